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

//! Validation runs driven by a prescribed sequence of admissible triples.
//!
//! After the usual greedy initial coloring, each triple `(e1, e2, k)` selects
//! a cycle: the bichromatic `2k`-cycle through the ordered pair if there is
//! one (it is unique in a proper coloring), otherwise the smallest `2k`-cycle
//! through the pair. The cycle minus its seed is then resampled exactly like
//! a repair step. A run is successful when every selected cycle was
//! bichromatic.
//!
//! Cycle searches here are exhaustive depth-first searches and take
//! exponential time in `k`; they are intended for graphs with a handful of
//! vertices.

use rayon::prelude::*;

use crate::bicycle::bichromatic_cycle_through;
use crate::engine::seed_of;
use crate::error::ColoringError;
use crate::graph::{Cycle, EdgeId, Graph, Vertex};
use crate::palette::{assign_random, initial_coloring, quota, DrawSource, Palette, RandomStream};
use crate::split_seed;
use crate::witness::AdmissibleTriple;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorValOutcome {
    pub success: bool,
    /// The selected cycle of each step.
    pub cycles: Vec<Cycle>,
    /// Whether each step's cycle was bichromatic when selected.
    pub chosen_bichromatic: Vec<bool>,
    pub instants: u64,
}

fn inadmissible(t: AdmissibleTriple, reason: impl Into<String>) -> ColoringError {
    ColoringError::Inadmissible {
        e1: t.first,
        e2: t.second,
        k: t.k,
        reason: reason.into(),
    }
}

/// Check that `(first, second)` is an ordered adjacent pair and `k >= 3`.
/// Returns `(v, u, w)` with `first = {v, u}`, `v < u`, `second = {u, w}`.
fn ordered_pair(g: &Graph, t: AdmissibleTriple) -> Result<(Vertex, Vertex, Vertex), ColoringError> {
    let m = g.edge_count();
    if t.first >= m || t.second >= m {
        return Err(inadmissible(t, "edge id out of range"));
    }
    if t.k < 3 {
        return Err(inadmissible(t, "k must be at least 3"));
    }
    let (v, u) = g.endpoints(t.first);
    let w = match g.endpoints(t.second) {
        _ if t.first == t.second => return Err(inadmissible(t, "edges coincide")),
        (a, b) if a == u => b,
        (a, b) if b == u => a,
        _ => return Err(inadmissible(t, "pair is not ordered adjacent")),
    };
    Ok((v, u, w))
}

/// Depth-first search over simple paths `w -> ... -> v` of exactly `len`
/// edges that avoid `u`. Calls `visit` with the full vertex walk
/// `u, w, ..., v`; stops early when `visit` returns `true`.
fn search_cycles(
    g: &Graph,
    (v, u, w): (Vertex, Vertex, Vertex),
    cycle_len: usize,
    visit: &mut dyn FnMut(&[Vertex]) -> bool,
) {
    fn extend(
        g: &Graph,
        target: Vertex,
        path_edges_left: usize,
        walk: &mut Vec<Vertex>,
        on_walk: &mut [bool],
        visit: &mut dyn FnMut(&[Vertex]) -> bool,
    ) -> bool {
        let here = *walk.last().expect("non-empty");
        if path_edges_left == 0 {
            return here == target && visit(walk);
        }
        for &e in g.incident(here) {
            let next = g.other_endpoint(e, here).expect("incident");
            if on_walk[next] || (next == target && path_edges_left != 1) {
                continue;
            }
            walk.push(next);
            on_walk[next] = true;
            let stop = extend(g, target, path_edges_left - 1, walk, on_walk, visit);
            on_walk[next] = false;
            walk.pop();
            if stop {
                return true;
            }
        }
        false
    }
    let mut on_walk = vec![false; g.vertex_count()];
    on_walk[u] = true;
    on_walk[w] = true;
    let mut walk = vec![u, w];
    extend(g, v, cycle_len - 2, &mut walk, &mut on_walk, visit);
}

/// Whether some cycle of length `2k` contains the ordered pair.
pub fn is_admissible(g: &Graph, t: AdmissibleTriple) -> Result<bool, ColoringError> {
    let ends = ordered_pair(g, t)?;
    let mut found = false;
    search_cycles(g, ends, 2 * t.k, &mut |_| {
        found = true;
        true
    });
    Ok(found)
}

/// All `2k`-cycles through the ordered pair, in cycle order.
pub fn cycles_through_pair(g: &Graph, t: AdmissibleTriple) -> Result<Vec<Cycle>, ColoringError> {
    let ends = ordered_pair(g, t)?;
    let mut out = Vec::new();
    search_cycles(g, ends, 2 * t.k, &mut |walk| {
        out.push(Cycle::from_vertex_walk(g, walk).expect("search yields simple cycles"));
        false
    });
    out.sort();
    out.dedup();
    Ok(out)
}

/// One validation run over `sequence`.
pub fn colorval_run<R: DrawSource>(
    g: &Graph,
    sequence: &[AdmissibleTriple],
    palette: Palette,
    rng: &mut R,
) -> Result<ColorValOutcome, ColoringError> {
    let mut state = initial_coloring(g, palette, rng)?;
    let mut cycles = Vec::with_capacity(sequence.len());
    let mut chosen_bichromatic = Vec::with_capacity(sequence.len());
    for &t in sequence {
        ordered_pair(g, t)?;
        let b = state.color(t.second);
        let bichromatic =
            bichromatic_cycle_through(&state, g, t.first, b)?.filter(|c| c.len() == 2 * t.k);
        let (cycle, was_bichromatic) = match bichromatic {
            Some(c) => (c, true),
            None => {
                let smallest = smallest_cycle_through_pair(g, t)?
                    .ok_or_else(|| inadmissible(t, "no cycle of that length through the pair"))?;
                (smallest, false)
            }
        };
        let seed = seed_of(&state, &cycle)?;
        let mut resample: Vec<EdgeId> = cycle
            .edges()
            .iter()
            .copied()
            .filter(|&f| f != seed.0 && f != seed.1)
            .collect();
        resample.sort_unstable();
        for f in resample {
            assign_random(&mut state, g, f, rng)?;
        }
        cycles.push(cycle);
        chosen_bichromatic.push(was_bichromatic);
    }
    Ok(ColorValOutcome {
        success: chosen_bichromatic.iter().all(|&b| b),
        cycles,
        chosen_bichromatic,
        instants: state.clock(),
    })
}

fn smallest_cycle_through_pair(
    g: &Graph,
    t: AdmissibleTriple,
) -> Result<Option<Cycle>, ColoringError> {
    let ends = ordered_pair(g, t)?;
    let mut best: Option<Cycle> = None;
    search_cycles(g, ends, 2 * t.k, &mut |walk| {
        let c = Cycle::from_vertex_walk(g, walk).expect("search yields simple cycles");
        if best.as_ref().is_none_or(|b| c < *b) {
            best = Some(c);
        }
        false
    });
    Ok(best)
}

/// Upper bound on the success probability of a validation run:
/// `(1/K)^n · Π (1 - (1 - 1/K)^(Δ-1))^(2k_s - 3)`.
pub fn success_bound(
    sequence: &[AdmissibleTriple],
    gamma: f64,
    delta: usize,
) -> Result<f64, ColoringError> {
    let k = quota(gamma, delta)? as f64;
    let hit = 1.0 - (1.0 - 1.0 / k).powi(delta as i32 - 1);
    Ok(sequence
        .iter()
        .map(|t| hit.powi(2 * t.k as i32 - 3) / k)
        .product())
}

/// The relaxation `(Δ-1)^(-n) · Π (1/γ)(1 - e^(-1/γ))^(2k_s - 3)`, never
/// smaller than [`success_bound`].
pub fn relaxed_success_bound(
    sequence: &[AdmissibleTriple],
    gamma: f64,
    delta: usize,
) -> Result<f64, ColoringError> {
    quota(gamma, delta)?;
    let q = 1.0 - (-1.0 / gamma).exp();
    let d = (delta - 1) as f64;
    Ok(sequence
        .iter()
        .map(|t| q.powi(2 * t.k as i32 - 3) / (gamma * d))
        .product())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    /// Binomial standard error `sqrt(p(1-p)/trials)`.
    pub stderr: f64,
}

/// Fraction of successful validation runs over `trials` independent runs.
///
/// Trial `i` uses the stream seeded by [`split_seed`]`(seed, i)`, so the
/// estimate does not depend on how trials are scheduled across threads.
pub fn monte_carlo_success(
    g: &Graph,
    sequence: &[AdmissibleTriple],
    palette: Palette,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate, ColoringError> {
    let trials = trials.max(1);
    for &t in sequence {
        if !is_admissible(g, t)? {
            return Err(inadmissible(t, "no cycle of that length through the pair"));
        }
    }
    let successes = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomStream::new(split_seed(seed, i));
            colorval_run(g, sequence, palette, &mut rng).map(|o| o.success as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let p = successes as f64 / trials as f64;
    Ok(MonteCarloEstimate {
        trials,
        successes,
        estimate: p,
        stderr: (p * (1.0 - p) / trials as f64).sqrt(),
    })
}
