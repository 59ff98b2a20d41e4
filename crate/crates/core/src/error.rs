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

use thiserror::Error;

use crate::graph::{EdgeId, Vertex};

fn at_line(line: &Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

/// Problems with graph input or construction.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: expected two nonnegative integers, got {content:?}")]
    Malformed { line: usize, content: String },
    #[error("{}loop at vertex {vertex}", at_line(.line))]
    Loop { line: Option<usize>, vertex: Vertex },
    #[error("{}duplicate edge {u} {v}", at_line(.line))]
    DuplicateEdge {
        line: Option<usize>,
        u: Vertex,
        v: Vertex,
    },
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("edge {edge} out of range for {m} edges")]
    EdgeOutOfRange { edge: EdgeId, m: usize },
    #[error("vertex {vertex} is not an endpoint of edge {edge}")]
    NotAnEndpoint { edge: EdgeId, vertex: Vertex },
    #[error("no simple {d}-regular graph on {n} vertices")]
    Infeasible { n: usize, d: usize },
    #[error("pairing model rejected {attempts} samples in a row")]
    RejectionBudgetExhausted { attempts: usize },
    #[error("not a cycle: {0}")]
    NotACycle(String),
}

/// Errors raised while coloring, recoloring or replaying a coloring run.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ColoringError {
    #[error("gamma must be positive and finite, got {0}")]
    InvalidGamma(f64),
    #[error("maximum degree {0} is below 2")]
    DegreeTooSmall(usize),
    #[error("palette of {num_colors} colors cannot sample from quota {quota}")]
    InvalidPalette { num_colors: usize, quota: usize },
    #[error("edge {edge} has {available} available colors, below the quota {quota}")]
    QuotaBreach {
        edge: EdgeId,
        available: usize,
        quota: usize,
    },
    #[error("line {line}: edge {edge} is listed twice")]
    DuplicateEntry { line: usize, edge: EdgeId },
    #[error("edge {0} is uncolored")]
    Uncolored(EdgeId),
    #[error("color {color} is outside the palette 1..={num_colors}")]
    ColorOutOfRange { color: usize, num_colors: usize },
    #[error("step cap reached after {steps} steps")]
    Truncated { steps: usize },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("triple ({e1}, {e2}, {k}) is not admissible: {reason}")]
    Inadmissible {
        e1: EdgeId,
        e2: EdgeId,
        k: usize,
        reason: String,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl ColoringError {
    /// True for failures that indicate a bug or a broken invariant rather
    /// than bad input or an exhausted budget.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            ColoringError::Invariant(_) | ColoringError::QuotaBreach { .. }
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("gamma must be positive and finite, got {0}")]
    InvalidGamma(f64),
    #[error("k must be at least 3, got {0}")]
    InvalidK(usize),
    #[error("x = {x} is outside the convergence domain 0 <= x < {limit}")]
    Domain { x: f64, limit: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("bisection bracket [{lo}, {hi}] does not separate rho >= 1 from rho < 1 (rho(lo) = {rho_lo}, rho(hi) = {rho_hi})")]
    Bracket {
        lo: f64,
        hi: f64,
        rho_lo: f64,
        rho_hi: f64,
    },
    #[error("series coefficient Q_{index} overflowed")]
    Overflow { index: usize },
}
