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

//! Partial edge colorings and the greedy "r-th smallest available color" rule.
//!
//! A color is an integer in `1..=N`; `0` marks an uncolored edge. The set of
//! available colors `D(e, w)` excludes every color that would create a
//! monochromatic cherry at `e` or close a bichromatic 4-cycle through `e`.
//! Because each such 4-cycle consumes an adjacent color pair, at most
//! `2(Δ-1)` colors are ever excluded, so `|D| >= N - 2(Δ-1) >= K` whenever
//! `N = ⌈(2+γ)(Δ-1)⌉+1` and `K = ⌈γ(Δ-1)⌉+1`.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ColoringError, GraphError};
use crate::graph::{EdgeId, Graph};

pub type Color = usize;

/// The color `0`, meaning "not colored".
pub const UNCOLORED: Color = 0;

fn check_gamma_delta(gamma: f64, delta: usize) -> Result<(), ColoringError> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(ColoringError::InvalidGamma(gamma));
    }
    if delta < 2 {
        return Err(ColoringError::DegreeTooSmall(delta));
    }
    Ok(())
}

/// `N = ⌈(2+γ)(Δ-1)⌉ + 1`.
pub fn num_colors(gamma: f64, delta: usize) -> Result<usize, ColoringError> {
    check_gamma_delta(gamma, delta)?;
    Ok(((2.0 + gamma) * (delta - 1) as f64).ceil() as usize + 1)
}

/// `K = ⌈γ(Δ-1)⌉ + 1`, the number of smallest available colors sampled from.
pub fn quota(gamma: f64, delta: usize) -> Result<usize, ColoringError> {
    check_gamma_delta(gamma, delta)?;
    Ok((gamma * (delta - 1) as f64).ceil() as usize + 1)
}

/// Palette size `N` and sampling quota `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Palette {
    num_colors: usize,
    quota: usize,
}

impl Palette {
    pub fn new(num_colors: usize, quota: usize) -> Result<Self, ColoringError> {
        if quota == 0 || quota > num_colors {
            return Err(ColoringError::InvalidPalette { num_colors, quota });
        }
        Ok(Palette { num_colors, quota })
    }

    /// The palette prescribed for maximum degree `delta`.
    pub fn from_gamma(gamma: f64, delta: usize) -> Result<Self, ColoringError> {
        Self::new(num_colors(gamma, delta)?, quota(gamma, delta)?)
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    pub fn quota(&self) -> usize {
        self.quota
    }
}

/// Source of the uniform draws `r ∈ 1..=K`.
pub trait DrawSource {
    /// A uniform integer in `1..=k`.
    fn draw(&mut self, k: usize) -> usize;
}

/// The seeded stream behind every randomized run.
///
/// Backed by ChaCha8 (`rand_chacha`) seeded through `seed_from_u64`, with
/// draws taken by `Rng::gen_range(1..=k)`. Both are value-stable within
/// their major versions, so a seed reproduces the same run across builds.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl DrawSource for RandomStream {
    fn draw(&mut self, k: usize) -> usize {
        self.rng.gen_range(1..=k)
    }
}

/// Draws replayed from a fixed script, optionally falling back to a random
/// stream once the script runs out. Used to force specific runs in tests.
///
/// Panics on a scripted value outside `1..=k`, or when the script is
/// exhausted without a fallback.
#[derive(Debug, Clone)]
pub struct ScriptedDraws {
    script: VecDeque<usize>,
    fallback: Option<RandomStream>,
}

impl ScriptedDraws {
    pub fn new(script: impl IntoIterator<Item = usize>) -> Self {
        ScriptedDraws {
            script: script.into_iter().collect(),
            fallback: None,
        }
    }

    pub fn with_fallback(script: impl IntoIterator<Item = usize>, seed: u64) -> Self {
        ScriptedDraws {
            script: script.into_iter().collect(),
            fallback: Some(RandomStream::new(seed)),
        }
    }

    pub fn remaining(&self) -> usize {
        self.script.len()
    }
}

impl DrawSource for ScriptedDraws {
    fn draw(&mut self, k: usize) -> usize {
        match self.script.pop_front() {
            Some(r) => {
                assert!((1..=k).contains(&r), "scripted draw {r} outside 1..={k}");
                r
            }
            None => self
                .fallback
                .as_mut()
                .expect("draw script exhausted")
                .draw(k),
        }
    }
}

/// A partial edge coloring with assignment timestamps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringState {
    colors: Vec<Color>,
    stamps: Vec<Option<u64>>,
    clock: u64,
    palette: Palette,
}

impl ColoringState {
    /// All `m` edges uncolored, clock at 0.
    pub fn new(m: usize, palette: Palette) -> Self {
        ColoringState {
            colors: vec![UNCOLORED; m],
            stamps: vec![None; m],
            clock: 0,
            palette,
        }
    }

    /// A state with the given colors, stamped in edge-id order as if they had
    /// been assigned sequentially. Colors must lie in `0..=N`.
    pub fn from_colors(colors: Vec<Color>, palette: Palette) -> Result<Self, ColoringError> {
        let mut state = Self::new(colors.len(), palette);
        for (e, c) in colors.into_iter().enumerate() {
            if c != UNCOLORED {
                state.set_color(e, c)?;
            }
        }
        Ok(state)
    }

    pub fn palette(&self) -> Palette {
        self.palette
    }

    pub fn color(&self, e: EdgeId) -> Color {
        self.colors[e]
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn stamp(&self, e: EdgeId) -> Option<u64> {
        self.stamps[e]
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn edge_count(&self) -> usize {
        self.colors.len()
    }

    pub fn is_fully_colored(&self) -> bool {
        self.colors.iter().all(|&c| c != UNCOLORED)
    }

    /// Assign a color directly, stamping it with the current instant.
    pub fn set_color(&mut self, e: EdgeId, color: Color) -> Result<(), ColoringError> {
        if color == UNCOLORED || color > self.palette.num_colors {
            return Err(ColoringError::ColorOutOfRange {
                color,
                num_colors: self.palette.num_colors,
            });
        }
        self.colors[e] = color;
        self.stamps[e] = Some(self.clock);
        self.clock += 1;
        Ok(())
    }

    /// Override the stamp of an edge. Only meant for building fixtures.
    pub fn set_stamp(&mut self, e: EdgeId, stamp: u64) {
        self.stamps[e] = Some(stamp);
    }
}

/// Text form of a coloring: one `edge_id color` line per edge, in id order.
pub fn format_coloring(colors: &[Color]) -> String {
    let mut out = String::with_capacity(colors.len() * 8);
    for (e, c) in colors.iter().enumerate() {
        out.push_str(&format!("{e} {c}\n"));
    }
    out
}

/// Parse `edge_id color` lines for a graph with `m` edges. Lines may come in
/// any order; blank lines and `#` comments are skipped. Every edge must
/// appear exactly once with a color of at least 1.
pub fn parse_coloring(text: &str, m: usize) -> Result<Vec<Color>, ColoringError> {
    let mut colors = vec![UNCOLORED; m];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let malformed = || GraphError::Malformed {
            line,
            content: raw.to_string(),
        };
        let mut fields = content.split_whitespace();
        let (e, c) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (
                a.parse::<usize>().map_err(|_| malformed())?,
                b.parse::<usize>().map_err(|_| malformed())?,
            ),
            _ => return Err(malformed().into()),
        };
        if e >= m {
            return Err(GraphError::EdgeOutOfRange { edge: e, m }.into());
        }
        if c == UNCOLORED {
            return Err(ColoringError::Uncolored(e));
        }
        if colors[e] != UNCOLORED {
            return Err(ColoringError::DuplicateEntry { line, edge: e });
        }
        colors[e] = c;
    }
    if let Some(e) = colors.iter().position(|&c| c == UNCOLORED) {
        return Err(ColoringError::Uncolored(e));
    }
    Ok(colors)
}

/// The color of some edge at `v` other than `skip` with color `c`.
pub(crate) fn edge_with_color_at(
    state: &ColoringState,
    g: &Graph,
    v: usize,
    c: Color,
    skip: EdgeId,
) -> Option<EdgeId> {
    g.incident(v)
        .iter()
        .copied()
        .find(|&f| f != skip && state.color(f) == c)
}

/// Forbidden-color mask for `e`, ignoring `e`'s own current color.
fn forbidden_mask(state: &ColoringState, g: &Graph, e: EdgeId) -> Vec<bool> {
    let n = state.palette.num_colors;
    let mut forbidden = vec![false; n + 1];
    let (u, v) = g.endpoints(e);
    for end in [u, v] {
        for &h in g.incident(end) {
            if h != e {
                forbidden[state.color(h)] = true;
            }
        }
    }
    // Colors that would close a bichromatic 4-cycle u-x-y-v: h = {u,x} and
    // f = {v,y} share a color, and g' = {x,y} carries the color in question.
    for &h in g.incident(u) {
        let a = state.color(h);
        if h == e || a == UNCOLORED {
            continue;
        }
        let x = g.other_endpoint(h, u).expect("incident");
        for &f in g.incident(v) {
            if f == e || state.color(f) != a {
                continue;
            }
            let y = g.other_endpoint(f, v).expect("incident");
            if x == y {
                continue;
            }
            if let Some(closing) = g.edge_between(x, y) {
                forbidden[state.color(closing)] = true;
            }
        }
    }
    forbidden[UNCOLORED] = false;
    forbidden
}

/// `D(e, w)`: the ascending list of colors available to `e`.
///
/// Fails with [`ColoringError::QuotaBreach`] when fewer than `K` colors
/// remain, which can only happen with an undersized palette or a corrupted
/// state.
pub fn available_colors(
    state: &ColoringState,
    g: &Graph,
    e: EdgeId,
) -> Result<Vec<Color>, ColoringError> {
    let forbidden = forbidden_mask(state, g, e);
    let available: Vec<Color> = (1..=state.palette.num_colors)
        .filter(|&c| !forbidden[c])
        .collect();
    if available.len() < state.palette.quota {
        return Err(ColoringError::QuotaBreach {
            edge: e,
            available: available.len(),
            quota: state.palette.quota,
        });
    }
    Ok(available)
}

/// Draw `r ∈ 1..=K` and give `e` the `r`-th smallest color of `D(e, w)`.
///
/// Only the `K` smallest available colors are ever used, even when `D` is
/// larger.
pub fn assign_random<R: DrawSource + ?Sized>(
    state: &mut ColoringState,
    g: &Graph,
    e: EdgeId,
    rng: &mut R,
) -> Result<Color, ColoringError> {
    let available = available_colors(state, g, e)?;
    let r = rng.draw(state.palette.quota);
    let color = available[r - 1];
    state.set_color(e, color)?;
    Ok(color)
}

/// Color every edge in id order with [`assign_random`]. The clock ends at `m`.
pub fn initial_coloring<R: DrawSource + ?Sized>(
    g: &Graph,
    palette: Palette,
    rng: &mut R,
) -> Result<ColoringState, ColoringError> {
    let mut state = ColoringState::new(g.edge_count(), palette);
    for e in 0..g.edge_count() {
        assign_random(&mut state, g, e, rng)?;
    }
    Ok(state)
}

/// Checks the two state invariants locally around `e`: no colored edge
/// adjacent to `e` shares its color, and no bichromatic 4-cycle passes
/// through `e`. Returns a description of the first violation.
pub fn local_invariant_violation(state: &ColoringState, g: &Graph, e: EdgeId) -> Option<String> {
    let a = state.color(e);
    if a == UNCOLORED {
        return None;
    }
    let (u, v) = g.endpoints(e);
    for end in [u, v] {
        if let Some(h) = edge_with_color_at(state, g, end, a, e) {
            return Some(format!("edges {e} and {h} share color {a} at vertex {end}"));
        }
    }
    for &h in g.incident(u) {
        let b = state.color(h);
        if h == e || b == UNCOLORED {
            continue;
        }
        let x = g.other_endpoint(h, u).expect("incident");
        let Some(f) = edge_with_color_at(state, g, v, b, e) else {
            continue;
        };
        let y = g.other_endpoint(f, v).expect("incident");
        if x == y {
            continue;
        }
        if let Some(closing) = g.edge_between(x, y) {
            if state.color(closing) == a {
                return Some(format!("bichromatic 4-cycle {u}-{x}-{y}-{v}"));
            }
        }
    }
    None
}
