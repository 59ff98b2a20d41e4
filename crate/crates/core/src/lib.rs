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

//! Randomized acyclic edge coloring.
//!
//! Edges are colored greedily from the `K` smallest colors that avoid
//! monochromatic cherries and bichromatic 4-cycles; afterwards every
//! bichromatic cycle is repaired by resampling all of its edges except a
//! two-edge seed. Runs are instrumented: the execution record converts to a
//! witness forest, a validation algorithm replays prescribed cycle
//! sequences, and the [`bounds`] module certifies numerically that the
//! process stops almost surely once `N >= (2 + γ)(Δ - 1)` with
//! `γ >= 1.569`.

pub mod bicycle;
pub mod bounds;
pub mod engine;
pub mod error;
pub mod graph;
pub mod palette;
pub mod validator;
pub mod witness;

pub use error::{BoundsError, ColoringError, GraphError};
pub use graph::{Cycle, EdgeId, Graph, Vertex};
pub use palette::{Color, ColoringState, DrawSource, Palette, RandomStream, ScriptedDraws};

/// The default `γ`; it gives `N = ⌈3.569(Δ-1)⌉ + 1`.
pub const DEFAULT_GAMMA: f64 = 1.569;

/// Derive the seed of trial `index` from a master seed (SplitMix64 over
/// `master + (index + 1) * 0x9E3779B97F4A7C15`).
pub fn split_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
