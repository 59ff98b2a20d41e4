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

//! Properly bichromatic cycles, found by alternating color-pair walks.
//!
//! In a proper coloring the edges colored `a` or `b` form paths and even
//! cycles, so the `{a, b}`-component through an `a`-colored edge is found by
//! following the unique continuation at each vertex. Cycles are never
//! enumerated except by the brute-force oracle [`brute_force_acyclic`].

use std::collections::BTreeSet;
use std::fmt;

use crate::error::ColoringError;
use crate::graph::{enumerate_cycles_upto, Cycle, EdgeId, Graph};
use crate::palette::{edge_with_color_at, Color, ColoringState, UNCOLORED};

/// A badly colored edge with the smallest bichromatic cycle through it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadEdgeReport {
    pub edge: EdgeId,
    pub cycle: Cycle,
    /// `(color of edge, the other color of the cycle)`.
    pub colors: (Color, Color),
}

/// The `{a, b}`-alternating cycle through `e` (colored `a`), if there is one.
///
/// Uncolored edges are treated as absent. The result has even length; a
/// 4-cycle is returned like any other.
pub fn bichromatic_cycle_through(
    state: &ColoringState,
    g: &Graph,
    e: EdgeId,
    b: Color,
) -> Result<Option<Cycle>, ColoringError> {
    let a = state.color(e);
    if a == UNCOLORED {
        return Err(ColoringError::Uncolored(e));
    }
    if b == a || b == UNCOLORED {
        return Ok(None);
    }
    let (u, v) = g.endpoints(e);
    let mut walk = vec![u, v];
    let mut here = v;
    let mut prev = e;
    let mut want = b;
    // A simple alternating path has at most n - 1 edges.
    for _ in 0..g.vertex_count() {
        let Some(next) = edge_with_color_at(state, g, here, want, prev) else {
            return Ok(None);
        };
        let there = g.other_endpoint(next, here)?;
        if there == u {
            if want != b {
                return Err(ColoringError::Invariant(format!(
                    "alternating walk from edge {e} closed at odd length"
                )));
            }
            let cycle = Cycle::from_vertex_walk(g, &walk)?;
            debug_assert!(cycle.is_even());
            return Ok(Some(cycle));
        }
        if walk.contains(&there) {
            // Only reachable if the coloring is improper.
            return Err(ColoringError::Invariant(format!(
                "alternating walk from edge {e} revisits vertex {there}"
            )));
        }
        walk.push(there);
        here = there;
        prev = next;
        want = if want == a { b } else { a };
    }
    Err(ColoringError::Invariant(format!(
        "alternating walk from edge {e} did not terminate"
    )))
}

/// The smallest bichromatic cycle through `e` (fewest edges, then smallest
/// canonical edge sequence), or `None` if `e` is well colored.
pub fn smallest_bichromatic_cycle(
    state: &ColoringState,
    g: &Graph,
    e: EdgeId,
) -> Result<Option<BadEdgeReport>, ColoringError> {
    let a = state.color(e);
    if a == UNCOLORED {
        return Err(ColoringError::Uncolored(e));
    }
    let (_, v) = g.endpoints(e);
    // A bichromatic cycle through e continues at v with its second color,
    // so only colors present at v need to be tried.
    let mut best: Option<BadEdgeReport> = None;
    for &f in g.incident(v) {
        let b = state.color(f);
        if f == e || b == UNCOLORED {
            continue;
        }
        if let Some(cycle) = bichromatic_cycle_through(state, g, e, b)? {
            if best.as_ref().is_none_or(|r| cycle < r.cycle) {
                best = Some(BadEdgeReport {
                    edge: e,
                    cycle,
                    colors: (a, b),
                });
            }
        }
    }
    Ok(best)
}

/// All badly colored edges, largest id first. Uncolored edges are skipped.
pub fn badly_colored_edges(state: &ColoringState, g: &Graph) -> Result<Vec<EdgeId>, ColoringError> {
    let mut bad = Vec::new();
    for e in (0..g.edge_count()).rev() {
        if state.color(e) != UNCOLORED && smallest_bichromatic_cycle(state, g, e)?.is_some() {
            bad.push(e);
        }
    }
    Ok(bad)
}

/// The largest badly colored edge with its smallest bichromatic cycle.
pub fn largest_bad_edge<I>(
    state: &ColoringState,
    g: &Graph,
    candidates_descending: I,
) -> Result<Option<BadEdgeReport>, ColoringError>
where
    I: IntoIterator<Item = EdgeId>,
{
    for e in candidates_descending {
        if let Some(report) = smallest_bichromatic_cycle(state, g, e)? {
            return Ok(Some(report));
        }
    }
    Ok(None)
}

/// Why a coloring is not acyclic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AcyclicityViolation {
    /// Two adjacent edges share a color.
    MonochromaticCherry {
        first: EdgeId,
        second: EdgeId,
        color: Color,
    },
    /// A cycle carrying only two colors.
    BichromaticCycle {
        cycle: Cycle,
        colors: (Color, Color),
    },
}

impl fmt::Display for AcyclicityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AcyclicityViolation::MonochromaticCherry {
                first,
                second,
                color,
            } => {
                write!(
                    f,
                    "monochromatic cherry: edges {first} and {second} both have color {color}"
                )
            }
            AcyclicityViolation::BichromaticCycle { cycle, colors } => write!(
                f,
                "bichromatic cycle {cycle} (edges {:?}) with colors {} and {}",
                cycle.edges(),
                colors.0,
                colors.1
            ),
        }
    }
}

fn require_colored(state: &ColoringState) -> Result<(), ColoringError> {
    match state.colors().iter().position(|&c| c == UNCOLORED) {
        Some(e) => Err(ColoringError::Uncolored(e)),
        None => Ok(()),
    }
}

/// The first violation of acyclic properness, checking cherries first and
/// then bichromatic cycles of every even length (4-cycles included).
pub fn find_acyclicity_violation(
    state: &ColoringState,
    g: &Graph,
) -> Result<Option<AcyclicityViolation>, ColoringError> {
    require_colored(state)?;
    for v in 0..g.vertex_count() {
        let inc = g.incident(v);
        for (i, &e) in inc.iter().enumerate() {
            for &f in &inc[i + 1..] {
                if state.color(e) == state.color(f) {
                    return Ok(Some(AcyclicityViolation::MonochromaticCherry {
                        first: e,
                        second: f,
                        color: state.color(e),
                    }));
                }
            }
        }
    }
    for e in 0..g.edge_count() {
        if let Some(report) = smallest_bichromatic_cycle(state, g, e)? {
            return Ok(Some(AcyclicityViolation::BichromaticCycle {
                cycle: report.cycle,
                colors: report.colors,
            }));
        }
    }
    Ok(None)
}

/// True iff the full coloring is proper and no cycle is bichromatic.
pub fn is_acyclic_proper(state: &ColoringState, g: &Graph) -> Result<bool, ColoringError> {
    Ok(find_acyclicity_violation(state, g)?.is_none())
}

/// Oracle for [`is_acyclic_proper`] by explicit cycle enumeration.
///
/// Checks every cherry directly and counts the colors on every cycle of
/// length up to `max_len`. The verdict only matches when `max_len` is at
/// least the circumference of `g`; choosing it is the caller's job.
pub fn brute_force_acyclic(
    state: &ColoringState,
    g: &Graph,
    max_len: usize,
) -> Result<bool, ColoringError> {
    require_colored(state)?;
    for e in 0..g.edge_count() {
        for f in e + 1..g.edge_count() {
            if g.adjacent(e, f) && state.color(e) == state.color(f) {
                return Ok(false);
            }
        }
    }
    for cycle in enumerate_cycles_upto(g, max_len) {
        let colors: BTreeSet<Color> = cycle.edges().iter().map(|&e| state.color(e)).collect();
        if colors.len() < 3 {
            return Ok(false);
        }
    }
    Ok(true)
}
