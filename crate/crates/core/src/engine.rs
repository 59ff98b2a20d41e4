// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! The coloring algorithm: greedy initial coloring followed by recursive
//! repair of bichromatic cycles.
//!
//! A repair step on `(e, C)` picks the seed `S(C)`, the two earliest-stamped
//! edges of `C` at opposite parity, and resamples the other `|C| - 2` edges
//! in ascending id order. While some resampled edge is still badly colored,
//! the largest one is repaired recursively through its smallest bichromatic
//! cycle. Every top-level repair opens a new phase.
//!
//! Recursion uses an explicit stack, so nesting depth is limited only by the
//! step cap. In instrumented mode every step re-checks the state invariants
//! around each recolored edge, and every completed call checks that the
//! edges well colored at its start, plus its resampled edges, are still
//! well colored.

use std::collections::BTreeSet;
use std::ops::Range;
use std::time::{Duration, Instant};

use crate::bicycle::{badly_colored_edges, is_acyclic_proper, largest_bad_edge};
use crate::error::ColoringError;
use crate::graph::{Cycle, EdgeId, Graph};
use crate::palette::{
    assign_random, initial_coloring, local_invariant_violation, ColoringState, DrawSource, Palette,
    RandomStream,
};

/// Default limit on the number of repair steps in one run.
pub const DEFAULT_STEP_CAP: usize = 1_000_000;

/// One execution of a repair step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub edge: EdgeId,
    pub cycle: Cycle,
    pub seed: (EdgeId, EdgeId),
    pub phase: usize,
    pub step_in_phase: usize,
    pub clock_at_start: u64,
    /// Index of the step whose repair loop launched this one; `None` for a
    /// phase root.
    pub parent: Option<usize>,
}

impl StepRecord {
    /// `C ∖ S(C)` in ascending id order, the edges this step resampled.
    pub fn resampled(&self) -> Vec<EdgeId> {
        resampled_edges(&self.cycle, self.seed)
    }
}

fn resampled_edges(cycle: &Cycle, seed: (EdgeId, EdgeId)) -> Vec<EdgeId> {
    let mut edges: Vec<EdgeId> = cycle
        .edges()
        .iter()
        .copied()
        .filter(|&f| f != seed.0 && f != seed.1)
        .collect();
    edges.sort_unstable();
    edges
}

/// The list of steps of a run, grouped into phases.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExecutionRecord {
    pub steps: Vec<StepRecord>,
    /// Index into `steps` of the first step of each phase.
    pub phase_roots: Vec<usize>,
    pub terminated: bool,
    pub total_instants: u64,
}

impl ExecutionRecord {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn phase_count(&self) -> usize {
        self.phase_roots.len()
    }

    /// Step indices of phase `s`.
    pub fn phase_range(&self, s: usize) -> Range<usize> {
        let start = self.phase_roots[s];
        let end = self
            .phase_roots
            .get(s + 1)
            .copied()
            .unwrap_or(self.steps.len());
        start..end
    }

    pub fn phase_steps(&self, s: usize) -> &[StepRecord] {
        &self.steps[self.phase_range(s)]
    }

    /// The `(edge, cycle)` pairs only; two runs have the same record in the
    /// algorithmic sense iff these lists agree.
    pub fn labels(&self) -> Vec<(EdgeId, Vec<EdgeId>)> {
        self.steps
            .iter()
            .map(|s| (s.edge, s.cycle.edges().to_vec()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub steps: usize,
    pub phases: usize,
    pub instants: u64,
    pub verified: bool,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: ColoringState,
    pub record: ExecutionRecord,
    pub stats: RunStats,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub palette: Palette,
    pub step_cap: usize,
    pub instrumented: bool,
}

impl EngineConfig {
    /// Palette from `γ` and the graph's maximum degree, default step cap,
    /// instrumentation off.
    pub fn for_graph(g: &Graph, gamma: f64) -> Result<Self, ColoringError> {
        Ok(EngineConfig {
            palette: Palette::from_gamma(gamma, g.max_degree())?,
            step_cap: DEFAULT_STEP_CAP,
            instrumented: false,
        })
    }

    pub fn with_step_cap(mut self, step_cap: usize) -> Self {
        self.step_cap = step_cap;
        self
    }

    pub fn instrumented(mut self, on: bool) -> Self {
        self.instrumented = on;
        self
    }
}

/// Hooks called as a run progresses.
pub trait Observer {
    fn initial_coloring(&mut self, _g: &Graph, _state: &ColoringState) {}
    /// Called after the step's resampling pass, before any nested repair.
    fn step(&mut self, _g: &Graph, _state: &ColoringState, _step: &StepRecord) {}
}

/// An observer that does nothing.
pub struct NoObserver;

impl Observer for NoObserver {}

/// `S(C) = (f1, f2)`: `f1` is the edge of `C` with the earliest stamp and
/// `f2` the earliest-stamped edge at a position of opposite parity to `f1`
/// in the canonical traversal.
pub fn seed_of(state: &ColoringState, cycle: &Cycle) -> Result<(EdgeId, EdgeId), ColoringError> {
    let stamps = cycle
        .edges()
        .iter()
        .map(|&e| state.stamp(e).ok_or(ColoringError::Uncolored(e)))
        .collect::<Result<Vec<_>, _>>()?;
    let first = (0..stamps.len())
        .min_by_key(|&i| stamps[i])
        .expect("cycles are non-empty");
    let second = (0..stamps.len())
        .filter(|i| i % 2 != first % 2)
        .min_by_key(|&i| stamps[i])
        .expect("cycles have both parities");
    Ok((cycle.edges()[first], cycle.edges()[second]))
}

struct Frame {
    step: usize,
    resampled: Vec<EdgeId>,
    well_at_entry: Option<Vec<EdgeId>>,
}

/// Drives one run. Most callers want [`run`] or [`run_seeded`]; the engine
/// itself is exposed so a run can start from a prepared coloring.
pub struct Engine<'a, R: DrawSource> {
    g: &'a Graph,
    state: ColoringState,
    rng: R,
    record: ExecutionRecord,
    config: EngineConfig,
    observer: &'a mut dyn Observer,
}

impl<'a, R: DrawSource> Engine<'a, R> {
    /// Start from the greedy initial coloring.
    pub fn new(
        g: &'a Graph,
        config: EngineConfig,
        mut rng: R,
        observer: &'a mut dyn Observer,
    ) -> Result<Self, ColoringError> {
        let state = initial_coloring(g, config.palette, &mut rng)?;
        observer.initial_coloring(g, &state);
        Ok(Self::with_state(g, state, config, rng, observer))
    }

    /// Start from an arbitrary (normally fully colored) state.
    pub fn with_state(
        g: &'a Graph,
        state: ColoringState,
        config: EngineConfig,
        rng: R,
        observer: &'a mut dyn Observer,
    ) -> Self {
        Engine {
            g,
            state,
            rng,
            record: ExecutionRecord::default(),
            config,
            observer,
        }
    }

    pub fn state(&self) -> &ColoringState {
        &self.state
    }

    pub fn record(&self) -> &ExecutionRecord {
        &self.record
    }

    pub fn into_parts(mut self) -> (ColoringState, ExecutionRecord) {
        self.record.total_instants = self.state.clock();
        (self.state, self.record)
    }

    /// Repair until no edge is badly colored. On the step cap this returns
    /// [`ColoringError::Truncated`] and the partial record stays available.
    pub fn repair_all(&mut self) -> Result<(), ColoringError> {
        let m = self.g.edge_count();
        while let Some(bad) = largest_bad_edge(&self.state, self.g, (0..m).rev())? {
            self.recolor(bad.edge, bad.cycle)?;
        }
        self.record.terminated = true;
        self.record.total_instants = self.state.clock();
        Ok(())
    }

    /// One top-level repair of `(e, cycle)`, i.e. one phase.
    pub fn recolor(&mut self, e: EdgeId, cycle: Cycle) -> Result<(), ColoringError> {
        let phase = self.record.phase_roots.len();
        if phase >= self.g.edge_count() {
            return Err(ColoringError::Invariant(format!(
                "phase {} would exceed the edge count {}",
                phase + 1,
                self.g.edge_count()
            )));
        }
        if let Some(&prev) = self
            .record
            .phase_roots
            .iter()
            .find(|&&root| self.record.steps[root].edge == e)
        {
            return Err(ColoringError::Invariant(format!(
                "edge {e} is the root edge of phase {phase} and of an earlier phase (step {prev})"
            )));
        }
        let root = self.step(e, cycle, None, phase)?;
        let mut stack = vec![root];
        while let Some(frame) = stack.last() {
            let next =
                largest_bad_edge(&self.state, self.g, frame.resampled.iter().rev().copied())?;
            match next {
                Some(bad) => {
                    let parent = frame.step;
                    let child = self.step(bad.edge, bad.cycle, Some(parent), phase)?;
                    stack.push(child);
                }
                None => {
                    let frame = stack.pop().expect("non-empty");
                    self.check_call_exit(&frame)?;
                }
            }
        }
        Ok(())
    }

    fn step(
        &mut self,
        e: EdgeId,
        cycle: Cycle,
        parent: Option<usize>,
        phase: usize,
    ) -> Result<Frame, ColoringError> {
        if self.record.steps.len() >= self.config.step_cap {
            self.record.total_instants = self.state.clock();
            return Err(ColoringError::Truncated {
                steps: self.record.steps.len(),
            });
        }
        if cycle.len() < 6 || !cycle.is_even() {
            return Err(ColoringError::Invariant(format!(
                "repair requested on a cycle of length {}",
                cycle.len()
            )));
        }
        if !cycle.contains(e) {
            return Err(ColoringError::Invariant(format!(
                "edge {e} is not on cycle {cycle}"
            )));
        }
        let seed = seed_of(&self.state, &cycle)?;
        if e == seed.0 || e == seed.1 {
            return Err(ColoringError::Invariant(format!(
                "edge {e} belongs to the seed {seed:?} of cycle {cycle}"
            )));
        }
        let well_at_entry = if self.config.instrumented {
            Some(self.well_colored_edges()?)
        } else {
            None
        };
        let resampled = resampled_edges(&cycle, seed);
        let index = self.record.steps.len();
        if parent.is_none() {
            self.record.phase_roots.push(index);
        }
        let root = self.record.phase_roots[phase];
        self.record.steps.push(StepRecord {
            edge: e,
            cycle,
            seed,
            phase,
            step_in_phase: index - root,
            clock_at_start: self.state.clock(),
            parent,
        });
        for &f in &resampled {
            assign_random(&mut self.state, self.g, f, &mut self.rng)?;
            if self.config.instrumented {
                if let Some(problem) = local_invariant_violation(&self.state, self.g, f) {
                    return Err(ColoringError::Invariant(problem));
                }
            }
        }
        self.observer
            .step(self.g, &self.state, &self.record.steps[index]);
        Ok(Frame {
            step: index,
            resampled,
            well_at_entry,
        })
    }

    fn well_colored_edges(&self) -> Result<Vec<EdgeId>, ColoringError> {
        let bad: BTreeSet<EdgeId> = badly_colored_edges(&self.state, self.g)?
            .into_iter()
            .collect();
        Ok((0..self.g.edge_count())
            .filter(|e| !bad.contains(e))
            .collect())
    }

    /// A finished call must leave its entry-time well-colored edges and its
    /// resampled edges well colored.
    fn check_call_exit(&self, frame: &Frame) -> Result<(), ColoringError> {
        let Some(well_at_entry) = &frame.well_at_entry else {
            return Ok(());
        };
        let bad: BTreeSet<EdgeId> = badly_colored_edges(&self.state, self.g)?
            .into_iter()
            .collect();
        if let Some(e) = well_at_entry
            .iter()
            .chain(frame.resampled.iter())
            .find(|e| bad.contains(e))
        {
            return Err(ColoringError::Invariant(format!(
                "edge {e} is badly colored after step {} returned",
                frame.step
            )));
        }
        Ok(())
    }
}

/// Run the full algorithm on `g`.
///
/// Hitting the step cap is not an error: the outcome carries the partial
/// record with `terminated == false`. Errors mean bad input or a broken
/// invariant.
pub fn run<R: DrawSource>(
    g: &Graph,
    config: EngineConfig,
    rng: R,
) -> Result<RunOutcome, ColoringError> {
    run_observed(g, config, rng, &mut NoObserver)
}

pub fn run_observed<R: DrawSource>(
    g: &Graph,
    config: EngineConfig,
    rng: R,
    observer: &mut dyn Observer,
) -> Result<RunOutcome, ColoringError> {
    let started = Instant::now();
    let mut engine = Engine::new(g, config, rng, observer)?;
    match engine.repair_all() {
        Ok(()) | Err(ColoringError::Truncated { .. }) => {}
        Err(other) => return Err(other),
    }
    let (state, record) = engine.into_parts();

    let expected = g.edge_count() as u64
        + record
            .steps
            .iter()
            .map(|s| s.cycle.len() as u64 - 2)
            .sum::<u64>();
    if record.total_instants != expected {
        return Err(ColoringError::Invariant(format!(
            "{} instants elapsed but the steps account for {expected}",
            record.total_instants
        )));
    }
    let verified = record.terminated && is_acyclic_proper(&state, g)?;
    if record.terminated && !verified {
        return Err(ColoringError::Invariant(
            "run terminated on a coloring that is not acyclic".into(),
        ));
    }
    let stats = RunStats {
        steps: record.len(),
        phases: record.phase_count(),
        instants: record.total_instants,
        verified,
        wall_time: started.elapsed(),
    };
    Ok(RunOutcome {
        state,
        record,
        stats,
    })
}

/// [`run`] with the palette derived from `gamma` and a seeded stream.
pub fn run_seeded(
    g: &Graph,
    gamma: f64,
    seed: u64,
    step_cap: usize,
) -> Result<RunOutcome, ColoringError> {
    let config = EngineConfig::for_graph(g, gamma)?.with_step_cap(step_cap);
    run(g, config, RandomStream::new(seed))
}
