//! Simple graphs with canonically oriented edges, chains, 1-forms and
//! spanning-forest cycle bases.
//!
//! Vertices are `0..n`. Every edge `{r, s}` is stored once as `(r, s)` with
//! `r < s`, and edges are kept sorted lexicographically. All per-edge data in
//! the crate ([`Chain`], [`OneForm`], operator off-diagonals) is indexed by
//! the position of the edge in [`Graph::edges`].

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) references a vertex outside 0..{2}")]
    VertexOutOfRange(usize, usize, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty vertex subset")]
    EmptySubset,
    #[error("vertex {0} listed twice in subset")]
    DuplicateVertex(usize),
    #[error("edge set is not a spanning forest")]
    NotSpanningForest,
}

/// Simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    index: HashMap<(usize, usize), usize>,
}

impl Graph {
    /// Builds a graph, canonicalizing each pair to `r < s` and dropping duplicates.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let mut canon = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(GraphError::VertexOutOfRange(a, b, n));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        canon.dedup();

        let mut adjacency = vec![Vec::new(); n];
        let mut index = HashMap::with_capacity(canon.len());
        for (i, &(r, s)) in canon.iter().enumerate() {
            adjacency[r].push(s);
            adjacency[s].push(r);
            index.insert((r, s), i);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Ok(Self { n, edges: canon, adjacency, index })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|r| (r + 1..n).map(move |s| (r, s)));
        Self::new(n, edges).expect("complete graph is simple")
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|s| (s - 1, s))).expect("path graph is simple")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        Self::new(n, (0..n).map(|r| (r, (r + 1) % n))).expect("cycle graph is simple")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, r: usize) -> &[usize] {
        &self.adjacency[r]
    }

    pub fn degree(&self, r: usize) -> usize {
        self.adjacency[r].len()
    }

    /// Index of the edge `{r, s}` in either orientation.
    pub fn edge_index(&self, r: usize, s: usize) -> Option<usize> {
        self.index.get(&(r.min(s), r.max(s))).copied()
    }

    pub fn has_edge(&self, r: usize, s: usize) -> bool {
        self.edge_index(r, s).is_some()
    }

    /// Unordered pairs `r < s` that are not edges.
    pub fn non_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in 0..self.n {
            for s in r + 1..self.n {
                if !self.has_edge(r, s) {
                    out.push((r, s));
                }
            }
        }
        out
    }

    /// Components as sorted vertex lists, ordered by their least vertex.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.n];
        let mut components = Vec::new();
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut members = vec![start];
            label[start] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(r) = queue.pop_front() {
                for &s in &self.adjacency[r] {
                    if label[s] == usize::MAX {
                        label[s] = id;
                        members.push(s);
                        queue.push_back(s);
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        components
    }

    pub fn component_count(&self) -> usize {
        self.connected_components().len()
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }

    /// First Betti number `|E| - n + c`.
    pub fn betti_number(&self) -> usize {
        self.edges.len() + self.component_count() - self.n
    }

    /// Coboundary `(df)_rs = f(s) - f(r)` for every edge `r < s`.
    pub fn coboundary(&self, f: &[f64]) -> Result<OneForm, GraphError> {
        if f.len() != self.n {
            return Err(GraphError::DimensionMismatch { expected: self.n, got: f.len() });
        }
        Ok(OneForm::new(self.edges.iter().map(|&(r, s)| f[s] - f[r]).collect()))
    }

    /// Boundary `∂[rs] = [s] - [r]` of an integer chain.
    pub fn boundary(&self, xi: &Chain) -> Result<Vec<i64>, GraphError> {
        self.check_edge_len(xi.coefficients.len())?;
        let mut out = vec![0i64; self.n];
        for (&(r, s), &c) in self.edges.iter().zip(&xi.coefficients) {
            out[s] += c;
            out[r] -= c;
        }
        Ok(out)
    }

    /// Spanning forest from a BFS rooted at the least vertex of each
    /// component (neighbors visited in increasing order), plus one
    /// fundamental cycle per non-forest edge.
    pub fn cycle_basis(&self) -> CycleBasis {
        let mut seen = vec![false; self.n];
        let mut in_forest = vec![false; self.edges.len()];
        for root in 0..self.n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(r) = queue.pop_front() {
                for &s in &self.adjacency[r] {
                    if !seen[s] {
                        seen[s] = true;
                        in_forest[self.edge_index(r, s).expect("adjacent")] = true;
                        queue.push_back(s);
                    }
                }
            }
        }
        let forest: Vec<usize> = (0..self.edges.len()).filter(|&e| in_forest[e]).collect();
        self.cycle_basis_for_forest(&forest).expect("BFS forest spans")
    }

    /// Fundamental cycles with respect to a given spanning forest (edge indices).
    pub fn cycle_basis_for_forest(&self, forest: &[usize]) -> Result<CycleBasis, GraphError> {
        let mut in_forest = vec![false; self.edges.len()];
        for &e in forest {
            if e >= self.edges.len() || in_forest[e] {
                return Err(GraphError::NotSpanningForest);
            }
            in_forest[e] = true;
        }
        if forest.len() + self.component_count() != self.n {
            return Err(GraphError::NotSpanningForest);
        }
        let mut tree_adj = vec![Vec::new(); self.n];
        for &e in forest {
            let (r, s) = self.edges[e];
            tree_adj[r].push((s, e));
            tree_adj[s].push((r, e));
        }
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.n];
        let mut depth = vec![0usize; self.n];
        let mut seen = vec![false; self.n];
        for root in 0..self.n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(r) = queue.pop_front() {
                for &(s, e) in &tree_adj[r] {
                    if parent[r].map(|(_, pe)| pe) == Some(e) {
                        continue;
                    }
                    if seen[s] {
                        return Err(GraphError::NotSpanningForest);
                    }
                    seen[s] = true;
                    parent[s] = Some((r, e));
                    depth[s] = depth[r] + 1;
                    queue.push_back(s);
                }
            }
        }

        let forest_edges: Vec<usize> = (0..self.edges.len()).filter(|&e| in_forest[e]).collect();
        let free_edges: Vec<usize> = (0..self.edges.len()).filter(|&e| !in_forest[e]).collect();

        let mut cycles = Vec::with_capacity(free_edges.len());
        for &e in &free_edges {
            let (r, s) = self.edges[e];
            let mut coeffs = vec![0i64; self.edges.len()];
            // traverse r -> s along the free edge, then s back to r in the tree
            coeffs[e] = 1;
            let (mut a, mut b) = (s, r);
            let mut from_a = Vec::new();
            let mut from_b = Vec::new();
            while depth[a] > depth[b] {
                let (p, pe) = parent[a].expect("non-root");
                from_a.push((a, p, pe));
                a = p;
            }
            while depth[b] > depth[a] {
                let (p, pe) = parent[b].expect("non-root");
                from_b.push((b, p, pe));
                b = p;
            }
            while a != b {
                let (pa, pea) = parent[a].expect("non-root");
                let (pb, peb) = parent[b].expect("non-root");
                from_a.push((a, pa, pea));
                from_b.push((b, pb, peb));
                a = pa;
                b = pb;
            }
            // walk s up to the meeting vertex, then down to r
            for &(u, w, edge) in &from_a {
                coeffs[edge] += self.orientation(u, w);
            }
            for &(u, w, edge) in from_b.iter().rev() {
                coeffs[edge] += self.orientation(w, u);
            }
            cycles.push(Chain::new(coeffs));
        }

        Ok(CycleBasis { forest_edges, free_edges, cycles })
    }

    /// Subgraph induced on `vertices`; new labels follow the order given.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<Subgraph, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::EmptySubset);
        }
        let mut to_new = vec![None; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            if v >= self.n {
                return Err(GraphError::VertexOutOfRange(v, v, self.n));
            }
            if to_new[v].is_some() {
                return Err(GraphError::DuplicateVertex(v));
            }
            to_new[v] = Some(i);
        }
        let edges = self.edges.iter().filter_map(|&(r, s)| Some((to_new[r]?, to_new[s]?)));
        let graph = Graph::new(vertices.len(), edges)?;
        Ok(Subgraph { graph, to_old: vertices.to_vec(), to_new })
    }

    /// `+1` if travelling `u -> w` follows the canonical orientation.
    fn orientation(&self, u: usize, w: usize) -> i64 {
        if u < w {
            1
        } else {
            -1
        }
    }

    pub(crate) fn check_edge_len(&self, got: usize) -> Result<(), GraphError> {
        if got == self.edges.len() {
            Ok(())
        } else {
            Err(GraphError::DimensionMismatch { expected: self.edges.len(), got })
        }
    }
}

/// Induced subgraph together with the vertex relabeling.
#[derive(Debug, Clone)]
pub struct Subgraph {
    pub graph: Graph,
    /// `to_old[new] = old`
    pub to_old: Vec<usize>,
    /// `to_new[old] = Some(new)` for vertices in the subset
    pub to_new: Vec<Option<usize>>,
}

/// Integer 1-chain, one coefficient per canonically oriented edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub coefficients: Vec<i64>,
}

impl Chain {
    pub fn new(coefficients: Vec<i64>) -> Self {
        Self { coefficients }
    }

    /// Edges with nonzero coefficient.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coefficients.iter().enumerate().filter(|(_, &c)| c != 0).map(|(e, _)| e)
    }
}

/// Real 1-form: the value `α_rs` on every edge `r < s` (`α_sr = -α_rs`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneForm {
    pub values: Vec<f64>,
}

impl OneForm {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(edge_count: usize) -> Self {
        Self { values: vec![0.0; edge_count] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `∫_ξ α = Σ ξ_rs α_rs`.
    pub fn integrate(&self, xi: &Chain) -> Result<f64, GraphError> {
        if xi.coefficients.len() != self.values.len() {
            return Err(GraphError::DimensionMismatch { expected: self.values.len(), got: xi.coefficients.len() });
        }
        Ok(xi.coefficients.iter().zip(&self.values).map(|(&c, &a)| c as f64 * a).sum())
    }

    pub fn add(&self, other: &OneForm) -> OneForm {
        OneForm::new(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, t: f64) -> OneForm {
        OneForm::new(self.values.iter().map(|a| a * t).collect())
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Spanning forest and fundamental cycles of a graph.
#[derive(Debug, Clone)]
pub struct CycleBasis {
    /// Edge indices of the BFS spanning forest.
    pub forest_edges: Vec<usize>,
    /// Non-forest edges, one per fundamental cycle (same order as `cycles`).
    pub free_edges: Vec<usize>,
    pub cycles: Vec<Chain>,
}

impl CycleBasis {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }
}
