//! Two-sheeted covers of graphs drawn on a non-orientable surface.
//!
//! Vertex `v` of `G` becomes `v` (sheet 0) and `v + n` (sheet 1) in `G'`.
//! Edge `k` of `G` becomes edges `2k` and `2k + 1`; a crossing edge joins the
//! sheets, any other edge stays inside them.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::UGraph;
use crate::matching::{is_perfect, maximum_matching_size};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("graph is not bipartite")]
    NotBipartite,
    #[error("edge {0} out of range")]
    EdgeOutOfRange(usize),
    #[error("edge ({0}, {1}) invalid or repeated")]
    BadEdge(usize, usize),
    #[error("selected edges do not form a perfect matching")]
    NotPerfect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverCase {
    Klein,
    Projective,
}

/// A bipartite graph with the edges crossing the distinguished glued side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    case: CoverCase,
    graph: UGraph,
    crossing: Vec<bool>,
    colors: Vec<u8>,
}

impl LabeledGraph {
    pub fn new(case: CoverCase, n: usize, edges: &[(usize, usize)], crossing: &[usize]) -> Result<Self, CoverError> {
        let mut seen = std::collections::BTreeSet::new();
        for &(a, b) in edges {
            let key = (a.min(b), a.max(b));
            if a == b || a >= n || b >= n || !seen.insert(key) {
                return Err(CoverError::BadEdge(a, b));
            }
        }
        let graph = UGraph::new(n, edges.iter().copied());
        let colors = graph.two_coloring().map_err(|_| CoverError::NotBipartite)?;
        let mut flags = vec![false; edges.len()];
        for &e in crossing {
            *flags.get_mut(e).ok_or(CoverError::EdgeOutOfRange(e))? = true;
        }
        Ok(LabeledGraph { case, graph, crossing: flags, colors })
    }

    /// Random instance on an even number of at most `max_vertices` vertices.
    /// About half the instances contain a planted perfect matching.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, case: CoverCase, max_vertices: usize) -> Self {
        let half = rng.gen_range(1..=max_vertices.max(2) / 2);
        let n = 2 * half;
        let p = rng.gen_range(1.0..3.0) / half as f64;
        let mut edges = Vec::new();
        if rng.gen_bool(0.5) {
            edges.extend((0..half).map(|i| (i, half + i)));
        }
        for a in 0..half {
            for b in half..n {
                if b - half != a && rng.gen_bool(p.min(1.0)) {
                    edges.push((a, b));
                }
            }
        }
        let crossing: Vec<usize> = (0..edges.len()).filter(|_| rng.gen_bool(0.5)).collect();
        LabeledGraph::new(case, n, &edges, &crossing).expect("sides are independent sets")
    }

    pub fn case(&self) -> CoverCase {
        self.case
    }

    pub fn graph(&self) -> &UGraph {
        &self.graph
    }

    pub fn is_crossing(&self, e: usize) -> bool {
        self.crossing[e]
    }

    pub fn crossing_edges(&self) -> Vec<usize> {
        (0..self.crossing.len()).filter(|&e| self.crossing[e]).collect()
    }

    pub fn has_pm(&self) -> bool {
        2 * maximum_matching_size(&self.graph, &self.colors) == self.graph.vertex_count()
    }

    /// The doubled graph. It carries no crossing edges.
    pub fn double(&self) -> LabeledGraph {
        let n = self.graph.vertex_count();
        let mut edges = Vec::with_capacity(2 * self.graph.edge_count());
        for (k, &(u, v)) in self.graph.edges().iter().enumerate() {
            if self.crossing[k] {
                edges.push((u, v + n));
                edges.push((u + n, v));
            } else {
                edges.push((u, v));
                edges.push((u + n, v + n));
            }
        }
        let graph = UGraph::new(2 * n, edges);
        let colors = self.colors.iter().chain(&self.colors).copied().collect();
        LabeledGraph { case: self.case, crossing: vec![false; graph.edge_count()], graph, colors }
    }

    /// Both images of every edge of a perfect matching of `G`.
    pub fn lift_matching(&self, m: &[usize]) -> Result<Vec<usize>, CoverError> {
        if !is_perfect(&self.graph, m) {
            return Err(CoverError::NotPerfect);
        }
        let mut out: Vec<usize> = m.iter().flat_map(|&e| [2 * e, 2 * e + 1]).collect();
        out.sort_unstable();
        Ok(out)
    }

    /// A perfect matching of `G` from one of `G'`.
    ///
    /// The projected edges form a multigraph in which every vertex has degree
    /// two; each component is an even closed walk and every other edge of it
    /// is kept. Components are taken by smallest vertex, each walk starting
    /// along its smallest edge.
    pub fn project_matching(&self, m: &[usize]) -> Result<Vec<usize>, CoverError> {
        let n = self.graph.vertex_count();
        let doubled = self.double();
        if !is_perfect(&doubled.graph, m) {
            return Err(CoverError::NotPerfect);
        }
        let base: Vec<usize> = m.iter().map(|&e| e / 2).collect();
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (slot, &e) in base.iter().enumerate() {
            let (a, b) = self.graph.edge(e);
            incident[a].push(slot);
            incident[b].push(slot);
        }
        let mut used = vec![false; base.len()];
        let mut out = Vec::with_capacity(n / 2);
        for start in 0..n {
            let Some(&first) = incident[start].iter().filter(|&&s| !used[s]).min_by_key(|&&s| (base[s], s)) else {
                continue;
            };
            let (mut v, mut slot, mut keep) = (start, first, true);
            loop {
                used[slot] = true;
                if keep {
                    out.push(base[slot]);
                }
                keep = !keep;
                v = self.graph.other(base[slot], v);
                match incident[v].iter().find(|&&s| !used[s]) {
                    Some(&s) => slot = s,
                    None => break,
                }
            }
        }
        out.sort_unstable();
        debug_assert!(is_perfect(&self.graph, &out));
        Ok(out)
    }

    /// Edge ids of a matching given as vertex pairs.
    pub fn edges_from_pairs(&self, pairs: &[[usize; 2]]) -> Result<Vec<usize>, CoverError> {
        pairs
            .iter()
            .map(|&[a, b]| {
                if a.max(b) >= self.graph.vertex_count() {
                    return Err(CoverError::BadEdge(a, b));
                }
                self.graph.edge_between(a, b).ok_or(CoverError::BadEdge(a, b))
            })
            .collect()
    }

    pub fn pairs_from_edges(&self, edges: &[usize]) -> Vec<[usize; 2]> {
        edges.iter().map(|&e| self.graph.edge(e).into()).collect()
    }

    pub fn to_file(&self) -> LabeledGraphFile {
        LabeledGraphFile {
            case: self.case,
            vertices: self.graph.vertex_count(),
            edges: self.graph.edges().iter().map(|&e| e.into()).collect(),
            crossing: self.crossing_edges(),
        }
    }
}

/// JSON form: `{"case", "vertices", "edges": [[u, v]], "crossing": [edge index]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledGraphFile {
    pub case: CoverCase,
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub crossing: Vec<usize>,
}

impl LabeledGraphFile {
    pub fn to_graph(&self) -> Result<LabeledGraph, CoverError> {
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|&[a, b]| (a, b)).collect();
        LabeledGraph::new(self.case, self.vertices, &edges, &self.crossing)
    }
}

/// JSON form of a matching: `{"matching": [[u, v]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingFile {
    pub matching: Vec<[usize; 2]>,
}
