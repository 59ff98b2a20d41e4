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

//! Witness forests: the labeled plane forest encoding an execution record.
//!
//! Each phase becomes a tree whose internal vertices are the phase's steps,
//! labeled `(edge, cycle)`. A step hangs below the nearest earlier step on
//! its ancestor chain whose resampled set `C ∖ S(C)` contains its edge.
//! The forest is then completed to exactly `m` trees by isolated vertices
//! for the edges that never rooted a phase, and every internal vertex is
//! padded with leaves until it has exactly `|C| - 2` children, one per
//! resampled edge.
//!
//! Children are ordered step-children first (in step order) and padding
//! leaves after them (ascending edge id). Trees carrying phases come first,
//! in phase order, followed by the isolated vertices in ascending edge id.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::engine::ExecutionRecord;
use crate::error::ColoringError;
use crate::graph::{shared_vertex, Cycle, EdgeId, Graph};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeLabel {
    /// A step: its cycle and the seed the step kept.
    Internal {
        cycle: Cycle,
        seed: (EdgeId, EdgeId),
    },
    /// The empty cycle label.
    Leaf,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub edge: EdgeId,
    pub label: NodeLabel,
    pub children: Vec<NodeId>,
}

impl Node {
    pub fn is_internal(&self) -> bool {
        matches!(self.label, NodeLabel::Internal { .. })
    }

    pub fn cycle(&self) -> Option<&Cycle> {
        match &self.label {
            NodeLabel::Internal { cycle, .. } => Some(cycle),
            NodeLabel::Leaf => None,
        }
    }

    /// `C ∖ S(C)` for internal vertices, ascending.
    pub fn resampled(&self) -> Vec<EdgeId> {
        match &self.label {
            NodeLabel::Internal { cycle, seed } => {
                let mut out: Vec<EdgeId> = cycle
                    .edges()
                    .iter()
                    .copied()
                    .filter(|&e| e != seed.0 && e != seed.1)
                    .collect();
                out.sort_unstable();
                out
            }
            NodeLabel::Leaf => Vec::new(),
        }
    }
}

/// A forest stored as an arena of nodes plus an ordered list of roots.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct WitnessForest {
    pub nodes: Vec<Node>,
    pub roots: Vec<NodeId>,
}

impl WitnessForest {
    pub fn tree_count(&self) -> usize {
        self.roots.len()
    }

    pub fn internal_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_internal()).count()
    }

    pub fn add_node(&mut self, edge: EdgeId, label: NodeLabel) -> NodeId {
        self.nodes.push(Node {
            edge,
            label,
            children: Vec::new(),
        });
        self.nodes.len() - 1
    }

    /// Pre-order (depth-first) node ids of the tree rooted at `root`.
    pub fn preorder(&self, root: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.nodes[id].children.iter().rev());
        }
        out
    }

    /// Internal vertices of the whole forest in depth-first order, trees in
    /// forest order.
    pub fn internal_preorder(&self) -> Vec<NodeId> {
        self.roots
            .iter()
            .flat_map(|&r| self.preorder(r))
            .filter(|&id| self.nodes[id].is_internal())
            .collect()
    }

    /// Indented text rendering, one node per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (t, &root) in self.roots.iter().enumerate() {
            let _ = writeln!(out, "tree {t}");
            self.render_node(root, 1, &mut out);
        }
        out
    }

    fn render_node(&self, id: NodeId, depth: usize, out: &mut String) {
        let node = &self.nodes[id];
        let pad = "  ".repeat(depth);
        match &node.label {
            NodeLabel::Internal { cycle, seed } => {
                let _ = writeln!(
                    out,
                    "{pad}(e{}, {:?}) seed ({}, {})",
                    node.edge,
                    cycle.edges(),
                    seed.0,
                    seed.1
                );
            }
            NodeLabel::Leaf => {
                let _ = writeln!(out, "{pad}(e{}, -)", node.edge);
            }
        }
        for &c in &node.children {
            self.render_node(c, depth + 1, out);
        }
    }
}

/// Build the witness forest of a record.
///
/// Fails with an invariant error if some step has no ancestor whose
/// resampled set contains its edge.
pub fn build_forest(record: &ExecutionRecord, g: &Graph) -> Result<WitnessForest, ColoringError> {
    let m = g.edge_count();
    let mut forest = WitnessForest::default();
    let mut parent: Vec<Option<NodeId>> = Vec::new();

    for s in 0..record.phase_count() {
        let steps = record.phase_steps(s);
        let mut previous: Option<NodeId> = None;
        for step in steps {
            let id = forest.add_node(
                step.edge,
                NodeLabel::Internal {
                    cycle: step.cycle.clone(),
                    seed: step.seed,
                },
            );
            parent.push(None);
            match previous {
                None => forest.roots.push(id),
                Some(last) => {
                    let mut candidate = Some(last);
                    while let Some(c) = candidate {
                        if forest.nodes[c].resampled().contains(&step.edge) {
                            break;
                        }
                        candidate = parent[c];
                    }
                    let Some(host) = candidate else {
                        return Err(ColoringError::Invariant(format!(
                            "step on edge {} has no ancestor that resampled it",
                            step.edge
                        )));
                    };
                    forest.nodes[host].children.push(id);
                    parent[id] = Some(host);
                }
            }
            previous = Some(id);
        }
    }

    let root_edges: BTreeSet<EdgeId> = forest.roots.iter().map(|&r| forest.nodes[r].edge).collect();
    for e in (0..m).filter(|e| !root_edges.contains(e)) {
        let id = forest.add_node(e, NodeLabel::Leaf);
        forest.roots.push(id);
    }

    let internal: Vec<NodeId> = (0..forest.nodes.len())
        .filter(|&id| forest.nodes[id].is_internal())
        .collect();
    for id in internal {
        let present: BTreeSet<EdgeId> = forest.nodes[id]
            .children
            .iter()
            .map(|&c| forest.nodes[c].edge)
            .collect();
        for e in forest.nodes[id].resampled() {
            if !present.contains(&e) {
                let leaf = forest.add_node(e, NodeLabel::Leaf);
                forest.nodes[id].children.push(leaf);
            }
        }
    }
    Ok(forest)
}

/// A structural defect of a witness forest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    TreeCount {
        expected: usize,
        found: usize,
    },
    RootEdgeRepeated {
        edge: EdgeId,
    },
    RootEdgeMissing {
        edge: EdgeId,
    },
    EdgeOutOfRange {
        node: NodeId,
        edge: EdgeId,
    },
    LeafWithChildren {
        node: NodeId,
    },
    EdgeNotOnOwnCycle {
        node: NodeId,
    },
    ChildNotOnCycle {
        node: NodeId,
        child: NodeId,
    },
    ChildInSeed {
        node: NodeId,
        child: NodeId,
    },
    SiblingEdgesRepeated {
        node: NodeId,
        edge: EdgeId,
    },
    ChildCount {
        node: NodeId,
        expected: usize,
        found: usize,
    },
    /// Depth-first labels of a tree differ from the phase's steps.
    PhaseMismatch {
        phase: usize,
    },
    InternalCount {
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Check the structural properties of a witness forest: `m` trees whose
/// root edges are distinct and cover every edge, leaves without children,
/// each child's edge in its parent's resampled set, distinct sibling edges
/// and exactly `|C| - 2` children per internal vertex.
pub fn check_properties(forest: &WitnessForest, g: &Graph) -> Vec<Violation> {
    let m = g.edge_count();
    let mut violations = Vec::new();
    if forest.tree_count() != m {
        violations.push(Violation::TreeCount {
            expected: m,
            found: forest.tree_count(),
        });
    }
    let mut root_edges = BTreeSet::new();
    for &r in &forest.roots {
        let e = forest.nodes[r].edge;
        if !root_edges.insert(e) {
            violations.push(Violation::RootEdgeRepeated { edge: e });
        }
    }
    for e in (0..m).filter(|e| !root_edges.contains(e)) {
        violations.push(Violation::RootEdgeMissing { edge: e });
    }

    for (id, node) in forest.nodes.iter().enumerate() {
        if node.edge >= m {
            violations.push(Violation::EdgeOutOfRange {
                node: id,
                edge: node.edge,
            });
            continue;
        }
        let NodeLabel::Internal { cycle, .. } = &node.label else {
            if !node.children.is_empty() {
                violations.push(Violation::LeafWithChildren { node: id });
            }
            continue;
        };
        if !cycle.contains(node.edge) {
            violations.push(Violation::EdgeNotOnOwnCycle { node: id });
        }
        let resampled = node.resampled();
        let mut siblings = BTreeSet::new();
        for &c in &node.children {
            let ce = forest.nodes[c].edge;
            if !cycle.contains(ce) {
                violations.push(Violation::ChildNotOnCycle { node: id, child: c });
            } else if !resampled.contains(&ce) {
                violations.push(Violation::ChildInSeed { node: id, child: c });
            }
            if !siblings.insert(ce) {
                violations.push(Violation::SiblingEdgesRepeated { node: id, edge: ce });
            }
        }
        let expected = cycle.len().saturating_sub(2);
        if node.children.len() != expected {
            violations.push(Violation::ChildCount {
                node: id,
                expected,
                found: node.children.len(),
            });
        }
    }
    violations
}

/// Check that the forest reproduces `record`: one internal vertex per step
/// and, per phase, the depth-first internal labels equal the step list.
pub fn check_against_record(forest: &WitnessForest, record: &ExecutionRecord) -> Vec<Violation> {
    let mut violations = Vec::new();
    let found = forest.internal_count();
    if found != record.len() {
        violations.push(Violation::InternalCount {
            expected: record.len(),
            found,
        });
    }
    for s in 0..record.phase_count() {
        let Some(&root) = forest.roots.get(s) else {
            violations.push(Violation::PhaseMismatch { phase: s });
            continue;
        };
        let labels: Vec<(EdgeId, &Cycle)> = forest
            .preorder(root)
            .into_iter()
            .filter_map(|id| forest.nodes[id].cycle().map(|c| (forest.nodes[id].edge, c)))
            .collect();
        let steps: Vec<(EdgeId, &Cycle)> = record
            .phase_steps(s)
            .iter()
            .map(|st| (st.edge, &st.cycle))
            .collect();
        if labels != steps {
            violations.push(Violation::PhaseMismatch { phase: s });
        }
    }
    violations
}

/// `(e1, e2, k)`: an ordered adjacent pair (e1 = {v, u} with v < u and e2
/// through u) together with a half cycle length `k >= 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AdmissibleTriple {
    pub first: EdgeId,
    pub second: EdgeId,
    pub k: usize,
}

pub type AdmissibleSequence = Vec<AdmissibleTriple>;

/// The neighbour of `e` in `cycle` through `e`'s larger endpoint.
pub fn ordered_neighbour(g: &Graph, cycle: &Cycle, e: EdgeId) -> Option<EdgeId> {
    let pos = cycle.position(e)?;
    let (_, hi) = g.endpoints(e);
    let (a, b) = cycle.neighbours_at(pos);
    [a, b]
        .into_iter()
        .find(|&f| shared_vertex(g.endpoints(e), g.endpoints(f)) == Some(hi))
}

/// One triple per internal vertex in global depth-first order.
pub fn admissible_sequence_of(
    forest: &WitnessForest,
    g: &Graph,
) -> Result<AdmissibleSequence, ColoringError> {
    forest
        .internal_preorder()
        .into_iter()
        .map(|id| {
            let node = &forest.nodes[id];
            let cycle = node.cycle().expect("internal");
            let second = ordered_neighbour(g, cycle, node.edge).ok_or_else(|| {
                ColoringError::Invariant(format!(
                    "edge {} has no ordered neighbour on cycle {cycle}",
                    node.edge
                ))
            })?;
            Ok(AdmissibleTriple {
                first: node.edge,
                second,
                k: cycle.len() / 2,
            })
        })
        .collect()
}

fn put(out: &mut Vec<u8>, x: usize) {
    let x = u32::try_from(x).expect("forest values fit in 32 bits");
    out.extend_from_slice(&x.to_le_bytes());
}

/// Canonical byte encoding: the tree count, then each tree in pre-order.
/// A node is `tag, edge` with tag 0 for leaves; internal vertices add the
/// cycle length, its edge ids, the seed and the child count. All integers
/// are little-endian `u32`. Every field needed to rebuild the forest is
/// present, so equal encodings mean equal forests.
pub fn encode_forest(forest: &WitnessForest) -> Vec<u8> {
    let mut out = Vec::new();
    put(&mut out, forest.roots.len());
    for &root in &forest.roots {
        for id in forest.preorder(root) {
            let node = &forest.nodes[id];
            match &node.label {
                NodeLabel::Leaf => {
                    out.push(0);
                    put(&mut out, node.edge);
                    put(&mut out, node.children.len());
                }
                NodeLabel::Internal { cycle, seed } => {
                    out.push(1);
                    put(&mut out, node.edge);
                    put(&mut out, cycle.len());
                    for &e in cycle.edges() {
                        put(&mut out, e);
                    }
                    put(&mut out, seed.0);
                    put(&mut out, seed.1);
                    put(&mut out, node.children.len());
                }
            }
        }
    }
    out
}
