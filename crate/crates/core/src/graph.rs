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

//! Simple undirected graphs with a fixed total order on vertices and edges.
//!
//! Vertices are the integers `0..n`. Edges are stored as `(u, v)` pairs with
//! `u < v`, sorted lexicographically, and an edge id is the position of the
//! pair in that sorted list. Everything downstream (the coloring order, the
//! "largest badly colored edge", cycle canonical forms) relies on this order.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::GraphError;

pub type Vertex = usize;
pub type EdgeId = usize;

/// An immutable simple graph in canonical edge order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    adjacency: Vec<Vec<EdgeId>>,
    max_degree: usize,
}

impl Graph {
    /// Build a graph on `n` vertices from an arbitrary list of vertex pairs.
    ///
    /// Pairs may be given in either orientation and in any order; they are
    /// normalized and sorted. Loops and duplicates are rejected.
    pub fn from_edges<I>(n: usize, pairs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut edges = Vec::new();
        for (u, v) in pairs {
            if u == v {
                return Err(GraphError::Loop {
                    line: None,
                    vertex: u,
                });
            }
            let (u, v) = if u < v { (u, v) } else { (v, u) };
            if v >= n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n });
            }
            edges.push((u, v));
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge {
                line: None,
                u: w[0].0,
                v: w[0].1,
            });
        }
        Ok(Self::from_sorted(n, edges))
    }

    fn from_sorted(n: usize, edges: Vec<(Vertex, Vertex)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        // Pushing in id order keeps every incidence list ascending.
        for (id, &(u, v)) in edges.iter().enumerate() {
            adjacency[u].push(id);
            adjacency[v].push(id);
        }
        let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        Graph {
            n,
            edges,
            adjacency,
            max_degree,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// The edge list in id order.
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    /// Endpoints `(u, v)` of an edge, with `u < v`.
    pub fn endpoints(&self, e: EdgeId) -> (Vertex, Vertex) {
        self.edges[e]
    }

    /// Ascending ids of the edges containing `v`.
    pub fn incident_edges(&self, v: Vertex) -> Result<&[EdgeId], GraphError> {
        self.adjacency
            .get(v)
            .map(Vec::as_slice)
            .ok_or(GraphError::VertexOutOfRange {
                vertex: v,
                n: self.n,
            })
    }

    /// Incidence list without the range check, for hot loops over known vertices.
    pub(crate) fn incident(&self, v: Vertex) -> &[EdgeId] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adjacency.get(v).map_or(0, Vec::len)
    }

    pub fn other_endpoint(&self, e: EdgeId, v: Vertex) -> Result<Vertex, GraphError> {
        let (a, b) = *self.edges.get(e).ok_or(GraphError::EdgeOutOfRange {
            edge: e,
            m: self.edges.len(),
        })?;
        if v == a {
            Ok(b)
        } else if v == b {
            Ok(a)
        } else {
            Err(GraphError::NotAnEndpoint { edge: e, vertex: v })
        }
    }

    /// The id of edge `{u, v}` if present.
    pub fn edge_between(&self, u: Vertex, v: Vertex) -> Option<EdgeId> {
        let key = if u < v { (u, v) } else { (v, u) };
        self.edges.binary_search(&key).ok()
    }

    /// Whether two distinct edges share an endpoint.
    pub fn adjacent(&self, e: EdgeId, f: EdgeId) -> bool {
        e != f && shared_vertex(self.edges[e], self.edges[f]).is_some()
    }

    /// Induced subgraph on `vertices`, relabeled to `0..k` in ascending
    /// original order. Also returns, for each new edge id, the original id.
    pub fn induced_subgraph(&self, vertices: &[Vertex]) -> (Graph, Vec<EdgeId>) {
        let mut keep: Vec<Vertex> = vertices.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let mut relabel = vec![usize::MAX; self.n];
        for (i, &v) in keep.iter().enumerate() {
            relabel[v] = i;
        }
        // Original edge order restricted to kept vertices is still
        // lexicographic after an order-preserving relabel.
        let mut edges = Vec::new();
        let mut origin = Vec::new();
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            if relabel[u] != usize::MAX && relabel[v] != usize::MAX {
                edges.push((relabel[u], relabel[v]));
                origin.push(id);
            }
        }
        (Self::from_sorted(keep.len(), edges), origin)
    }

    // Named families used throughout tests and examples.

    pub fn path(n: usize) -> Graph {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("path is simple")
    }

    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3, "a cycle needs at least 3 vertices");
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle is simple")
    }

    pub fn complete(n: usize) -> Graph {
        let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Self::from_edges(n, pairs).expect("complete graph is simple")
    }

    /// `K_{a,b}` with parts `0..a` and `a..a+b`.
    pub fn complete_bipartite(a: usize, b: usize) -> Graph {
        let pairs = (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v)));
        Self::from_edges(a + b, pairs).expect("complete bipartite graph is simple")
    }

    /// The `d`-dimensional hypercube on `2^d` vertices.
    pub fn hypercube(d: u32) -> Graph {
        let n = 1usize << d;
        let pairs = (0..n).flat_map(|u| {
            (0..d)
                .map(move |bit| (u, u ^ (1 << bit)))
                .filter(|&(u, v)| u < v)
        });
        Self::from_edges(n, pairs).expect("hypercube is simple")
    }

    /// Serialize as an edge-list document accepted by [`parse_graph`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# n={} m={}\n", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

pub(crate) fn shared_vertex(a: (Vertex, Vertex), b: (Vertex, Vertex)) -> Option<Vertex> {
    if a.0 == b.0 || a.0 == b.1 {
        Some(a.0)
    } else if a.1 == b.0 || a.1 == b.1 {
        Some(a.1)
    } else {
        None
    }
}

/// Parse an edge-list document: one `u v` pair per line, `#` starts a
/// comment line, blank lines are ignored. The vertex count is one more than
/// the largest vertex id mentioned.
pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let mut pairs = Vec::new();
    let mut seen = BTreeSet::new();
    let mut n = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (u, v) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => {
                let parse = |s: &str| {
                    s.parse::<Vertex>().map_err(|_| GraphError::Malformed {
                        line,
                        content: raw.to_string(),
                    })
                };
                (parse(a)?, parse(b)?)
            }
            _ => {
                return Err(GraphError::Malformed {
                    line,
                    content: raw.to_string(),
                })
            }
        };
        if u == v {
            return Err(GraphError::Loop {
                line: Some(line),
                vertex: u,
            });
        }
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            return Err(GraphError::DuplicateEdge {
                line: Some(line),
                u: key.0,
                v: key.1,
            });
        }
        n = n.max(key.1 + 1);
        pairs.push(key);
    }
    pairs.sort_unstable();
    Ok(Graph::from_sorted(n, pairs))
}

/// Attempts allowed before [`generate_random_regular`] gives up.
pub const DEFAULT_REGULAR_ATTEMPTS: usize = 10_000;

/// Sample a simple `d`-regular graph on `n` vertices with the pairing model.
///
/// Each attempt shuffles the `n*d` half-edges and pairs them consecutively;
/// an attempt producing a loop or a repeated pair is discarded as a whole.
/// The output depends only on `(n, d, seed)`.
pub fn generate_random_regular(n: usize, d: usize, seed: u64) -> Result<Graph, GraphError> {
    generate_random_regular_with_budget(n, d, seed, DEFAULT_REGULAR_ATTEMPTS)
}

pub fn generate_random_regular_with_budget(
    n: usize,
    d: usize,
    seed: u64,
    attempts: usize,
) -> Result<Graph, GraphError> {
    if (n * d) % 2 == 1 || (d >= n && !(d == 0 && n > 0)) {
        return Err(GraphError::Infeasible { n, d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Vertex> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    for _ in 0..attempts {
        points.shuffle(&mut rng);
        let mut pairs: Vec<(Vertex, Vertex)> = points
            .chunks_exact(2)
            .map(|p| (p[0].min(p[1]), p[0].max(p[1])))
            .collect();
        if pairs.iter().any(|&(u, v)| u == v) {
            continue;
        }
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        return Ok(Graph::from_sorted(n, pairs));
    }
    Err(GraphError::RejectionBudgetExhausted { attempts })
}

/// A cycle given by its edges and vertices in canonical traversal order.
///
/// Edge `i` joins `vertices[i]` and `vertices[(i + 1) % len]`. The sequence
/// starts at the smallest edge id and continues toward the smaller of that
/// edge's two cycle neighbours, so two cycles are equal exactly when their
/// sequences are.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cycle {
    edges: Vec<EdgeId>,
    vertices: Vec<Vertex>,
}

impl Cycle {
    /// Build from a closed vertex walk `v0 v1 ... v{k-1}` (without repeating
    /// `v0`). Fails unless the walk is a simple cycle of `g` of length ≥ 3.
    pub fn from_vertex_walk(g: &Graph, walk: &[Vertex]) -> Result<Cycle, GraphError> {
        let len = walk.len();
        if len < 3 {
            return Err(GraphError::NotACycle("fewer than three vertices".into()));
        }
        let mut distinct: Vec<Vertex> = walk.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() != len {
            return Err(GraphError::NotACycle("repeated vertex".into()));
        }
        let mut edges = Vec::with_capacity(len);
        for i in 0..len {
            let (a, b) = (walk[i], walk[(i + 1) % len]);
            let e = g
                .edge_between(a, b)
                .ok_or_else(|| GraphError::NotACycle(format!("{a}-{b} is not an edge")))?;
            edges.push(e);
        }
        Ok(Self::canonicalize(edges, walk.to_vec()))
    }

    /// Build from a cyclic sequence of edge ids in traversal order.
    pub fn from_edge_sequence(g: &Graph, seq: &[EdgeId]) -> Result<Cycle, GraphError> {
        let len = seq.len();
        if len < 3 {
            return Err(GraphError::NotACycle("fewer than three edges".into()));
        }
        if let Some(&bad) = seq.iter().find(|&&e| e >= g.edge_count()) {
            return Err(GraphError::EdgeOutOfRange {
                edge: bad,
                m: g.edge_count(),
            });
        }
        let mut walk = Vec::with_capacity(len);
        for i in 0..len {
            let prev = g.endpoints(seq[(i + len - 1) % len]);
            let cur = g.endpoints(seq[i]);
            let v = shared_vertex(prev, cur).ok_or_else(|| {
                GraphError::NotACycle(format!(
                    "edges {} and {} are not adjacent",
                    seq[(i + len - 1) % len],
                    seq[i]
                ))
            })?;
            walk.push(v);
        }
        let cycle = Self::from_vertex_walk(g, &walk)?;
        Ok(cycle)
    }

    fn canonicalize(mut edges: Vec<EdgeId>, mut vertices: Vec<Vertex>) -> Cycle {
        let len = edges.len();
        let start = (0..len).min_by_key(|&i| edges[i]).expect("non-empty");
        edges.rotate_left(start);
        vertices.rotate_left(start);
        if edges[len - 1] < edges[1] {
            // Walk the other way: e0, e{L-1}, ..., e1 over v1, v0, v{L-1}, ..., v2.
            edges[1..].reverse();
            vertices.swap(0, 1);
            vertices[2..].reverse();
        }
        Cycle { edges, vertices }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_even(&self) -> bool {
        self.edges.len().is_multiple_of(2)
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.contains(&e)
    }

    pub fn position(&self, e: EdgeId) -> Option<usize> {
        self.edges.iter().position(|&x| x == e)
    }

    /// Whether `e` and `f` are consecutive in the cycle.
    pub fn has_consecutive(&self, e: EdgeId, f: EdgeId) -> bool {
        let len = self.len();
        match (self.position(e), self.position(f)) {
            (Some(i), Some(j)) => (i + 1) % len == j || (j + 1) % len == i,
            _ => false,
        }
    }

    /// The two cycle neighbours of the edge at position `i`.
    pub fn neighbours_at(&self, i: usize) -> (EdgeId, EdgeId) {
        let len = self.len();
        (self.edges[(i + len - 1) % len], self.edges[(i + 1) % len])
    }
}

impl Ord for Cycle {
    fn cmp(&self, other: &Self) -> Ordering {
        self.edges
            .len()
            .cmp(&other.edges.len())
            .then_with(|| self.edges.cmp(&other.edges))
    }
}

impl PartialOrd for Cycle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let walk: Vec<String> = self.vertices.iter().map(ToString::to_string).collect();
        write!(f, "{}-{}", walk.join("-"), self.vertices[0])
    }
}

/// Every simple cycle of length `3..=max_len`, each once, in cycle order.
///
/// Brute-force depth-first search from each vertex as the cycle's smallest
/// vertex. The cost grows exponentially with `max_len` and the degree, so
/// this is meant for graphs of a dozen vertices or cycle lengths around 10.
pub fn enumerate_cycles_upto(g: &Graph, max_len: usize) -> Vec<Cycle> {
    let mut found = BTreeSet::new();
    let mut path = Vec::new();
    let mut on_path = vec![false; g.vertex_count()];
    for start in 0..g.vertex_count() {
        path.push(start);
        on_path[start] = true;
        extend_paths(g, start, max_len, &mut path, &mut on_path, &mut found);
        on_path[start] = false;
        path.pop();
    }
    found.into_iter().collect()
}

fn extend_paths(
    g: &Graph,
    start: Vertex,
    max_len: usize,
    path: &mut Vec<Vertex>,
    on_path: &mut [bool],
    found: &mut BTreeSet<Cycle>,
) {
    let last = *path.last().expect("path starts non-empty");
    for &e in g.incident(last) {
        let next = g.other_endpoint(e, last).expect("incident edge");
        if next == start && path.len() >= 3 {
            let cycle = Cycle::from_vertex_walk(g, path).expect("path closes a simple cycle");
            found.insert(cycle);
        } else if next > start && !on_path[next] && path.len() < max_len {
            path.push(next);
            on_path[next] = true;
            extend_paths(g, start, max_len, path, on_path, found);
            on_path[next] = false;
            path.pop();
        }
    }
}
