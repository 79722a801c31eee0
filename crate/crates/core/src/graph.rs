//! Plain undirected graphs, two-colouring and oriented cycles.

use std::collections::VecDeque;

/// Undirected simple graph on vertices `0..n` with indexed edges.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<(usize, usize)>>,
}

impl UGraph {
    /// Builds a graph; each edge is stored with its smaller endpoint first.
    ///
    /// Panics on self-loops or out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        let mut list = Vec::new();
        for (a, b) in edges {
            assert!(a < n && b < n, "edge ({a}, {b}) out of range for {n} vertices");
            assert_ne!(a, b, "self-loop at {a}");
            let id = list.len();
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            list.push((u, v));
            adj[u].push((v, id));
            adj[v].push((u, id));
        }
        UGraph { n, edges: list, adj }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> (usize, usize) {
        self.edges[id]
    }

    /// `(neighbour, edge id)` pairs incident to `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.adj[u].iter().find(|&&(w, _)| w == v).map(|&(_, e)| e)
    }

    /// The endpoint of edge `e` that is not `v`.
    pub fn other(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            debug_assert_eq!(b, v);
            a
        }
    }

    /// Copy of the graph without the listed edges. Edge ids are renumbered;
    /// the returned vector maps new ids to old ones.
    pub fn without_edges(&self, removed: &[usize]) -> (UGraph, Vec<usize>) {
        let mut drop = vec![false; self.edges.len()];
        for &e in removed {
            drop[e] = true;
        }
        let kept: Vec<usize> = (0..self.edges.len()).filter(|&e| !drop[e]).collect();
        let g = UGraph::new(self.n, kept.iter().map(|&e| self.edges[e]));
        (g, kept)
    }

    /// Two-colours the graph by breadth-first search.
    ///
    /// Isolated vertices get colour 0. On failure the returned cycle is an odd
    /// closed walk that is a simple cycle of the graph.
    pub fn two_coloring(&self) -> Result<Vec<u8>, OddCycle> {
        let mut color = vec![u8::MAX; self.n];
        let mut parent = vec![usize::MAX; self.n];
        let mut depth = vec![0usize; self.n];
        for root in 0..self.n {
            if color[root] != u8::MAX {
                continue;
            }
            color[root] = 0;
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for &(w, _) in &self.adj[v] {
                    if color[w] == u8::MAX {
                        color[w] = 1 - color[v];
                        parent[w] = v;
                        depth[w] = depth[v] + 1;
                        queue.push_back(w);
                    } else if color[w] == color[v] {
                        return Err(OddCycle { vertices: odd_cycle_from_tree(v, w, &parent, &depth) });
                    }
                }
            }
        }
        Ok(color)
    }
}

/// An odd cycle witnessing that a graph is not bipartite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OddCycle {
    pub vertices: Vec<usize>,
}

fn odd_cycle_from_tree(a: usize, b: usize, parent: &[usize], depth: &[usize]) -> Vec<usize> {
    let (mut x, mut y) = (a, b);
    let mut left = Vec::new();
    let mut right = Vec::new();
    while depth[x] > depth[y] {
        left.push(x);
        x = parent[x];
    }
    while depth[y] > depth[x] {
        right.push(y);
        y = parent[y];
    }
    while x != y {
        left.push(x);
        right.push(y);
        x = parent[x];
        y = parent[y];
    }
    left.push(x);
    right.reverse();
    left.extend(right);
    left
}

/// A simple cycle with a fixed orientation.
///
/// The orientation is canonical: the cycle starts with its smallest edge id
/// and continues towards the smaller of that edge's two neighbours on the
/// cycle. `vertices[k]` is the tail of `edges[k]` in that orientation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cycle {
    vertices: Vec<usize>,
    edges: Vec<usize>,
}

impl Cycle {
    /// Builds a cycle from its closed vertex sequence (first vertex not repeated).
    ///
    /// Returns `None` if consecutive vertices are not adjacent, a vertex
    /// repeats, or the sequence has fewer than three vertices.
    pub fn from_vertices(g: &UGraph, verts: &[usize]) -> Option<Cycle> {
        let k = verts.len();
        if k < 3 {
            return None;
        }
        let mut seen = vec![false; g.vertex_count()];
        let mut edges = Vec::with_capacity(k);
        for i in 0..k {
            let v = verts[i];
            if v >= g.vertex_count() || seen[v] {
                return None;
            }
            seen[v] = true;
            edges.push(g.edge_between(v, verts[(i + 1) % k])?);
        }
        Some(Self::canonical(verts.to_vec(), edges))
    }

    /// Builds a cycle from parallel vertex / edge sequences already known to
    /// form a simple cycle (`edges[k]` joins `verts[k]` and `verts[k+1]`).
    pub fn from_walk(verts: &[usize], edges: &[usize]) -> Cycle {
        debug_assert_eq!(verts.len(), edges.len());
        Self::canonical(verts.to_vec(), edges.to_vec())
    }

    fn canonical(mut verts: Vec<usize>, mut edges: Vec<usize>) -> Cycle {
        let k = edges.len();
        let start = (0..k).min_by_key(|&i| edges[i]).unwrap_or(0);
        let next = edges[(start + 1) % k];
        let prev = edges[(start + k - 1) % k];
        verts.rotate_left(start);
        edges.rotate_left(start);
        if prev < next {
            // Walk the other way round: e0, e_{k-1}, ..., e1 with tails
            // v1, v0, v_{k-1}, ..., v2.
            edges[1..].reverse();
            let mut vs = Vec::with_capacity(k);
            vs.push(verts[1]);
            vs.push(verts[0]);
            vs.extend(verts[2..].iter().rev());
            verts = vs;
        }
        Cycle { vertices: verts, edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    /// Iterates `(tail, edge, head)` in traversal order.
    pub fn steps(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let k = self.edges.len();
        (0..k).map(move |i| (self.vertices[i], self.edges[i], self.vertices[(i + 1) % k]))
    }

    /// Position (0-based) of edge `e` along the cycle.
    pub fn position(&self, e: usize) -> Option<usize> {
        self.edges.iter().position(|&x| x == e)
    }
}
