//! Genus-g grid graphs.
//!
//! A graph in the class lives on a `2m x 2m` grid of cells. Columns `x` and
//! rows `y` are numbered from 1, rows counted from the bottom. The border is
//! the closed walk of `8m - 4` cells around the grid; it is scanned clockwise
//! from an origin corner and cut into `4g` segments in the order
//! `S1 S2 S1' S2' ... S(2g-1) S(2g) S'(2g-1) S'(2g)`.
//!
//! Segment lengths are measured in border steps. A segment of length `L`
//! spans `L + 1` border cells; its two end cells are shared with the
//! neighbouring segments. The cells strictly inside the segment are its
//! ports, indexed `1..L` by their distance from the segment head. `S_i` runs
//! clockwise and `S'_i` counter-clockwise, so the j-th port of `S_i` and the
//! j-th port of `S'_i` are glued into one vertex. Segment end cells carry no
//! edges.
//!
//! Every edge is a unit grid edge with at most one endpoint on the border.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{OddCycle, UGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("segment S{segment} has odd length {length}")]
    SegmentLengthOdd { segment: usize, length: usize },
    #[error("segment lengths cover {found} border steps, the {m}-grid border has {expected}")]
    PerimeterMismatch { m: usize, expected: usize, found: usize },
    #[error("edge {0} -- {1} runs along the border")]
    BoundaryEdgeForbidden(String, String),
    #[error("edge {0} -- {1} is not a unit grid edge")]
    NonUnitEdge(String, String),
    #[error("edge at {0} touches a segment endpoint")]
    SegmentEndpoint(String),
    #[error("position {0} is out of bounds")]
    OutOfBounds(String),
    #[error("duplicate edge {0} -- {1}")]
    DuplicateEdge(String, String),
    #[error("density {0} is not in [0, 1]")]
    InfeasibleDensity(f64),
    #[error("unknown segment name {0:?}")]
    UnknownSegment(String),
}

/// Grid corner at which the clockwise border scan starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Corner {
    NW,
    NE,
    SE,
    SW,
}

impl Corner {
    pub const ALL: [Corner; 4] = [Corner::NW, Corner::NE, Corner::SE, Corner::SW];

    fn quarter(self) -> usize {
        match self {
            Corner::NW => 0,
            Corner::NE => 1,
            Corner::SE => 2,
            Corner::SW => 3,
        }
    }
}

impl FromStr for Corner {
    type Err = GridError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "NW" => Ok(Corner::NW),
            "NE" => Ok(Corner::NE),
            "SE" => Ok(Corner::SE),
            "SW" => Ok(Corner::SW),
            _ => Err(GridError::InvalidLayout(format!("unknown corner {s:?}"))),
        }
    }
}

/// A grid cell, 1-based: `x` is the column, `y` the row from the bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Cell { x, y }
    }

    fn is_unit_neighbor(self, other: Cell) -> bool {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y) == 1
    }

    fn parity(self) -> u8 {
        ((self.x + self.y) % 2) as u8
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// One of the `4g` boundary segments: `S_index` or, if `primed`, `S'_index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SegmentId {
    pub index: usize,
    pub primed: bool,
}

impl SegmentId {
    pub const fn s(index: usize) -> Self {
        SegmentId { index, primed: false }
    }

    pub const fn s_prime(index: usize) -> Self {
        SegmentId { index, primed: true }
    }

    pub fn partner(self) -> Self {
        SegmentId { index: self.index, primed: !self.primed }
    }
}

impl fmt::Display for SegmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}{}", self.index, if self.primed { "p" } else { "" })
    }
}

impl FromStr for SegmentId {
    type Err = GridError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GridError::UnknownSegment(s.to_string());
        let rest = s.strip_prefix('S').ok_or_else(bad)?;
        let (digits, primed) = match rest.strip_suffix('p') {
            Some(d) => (d, true),
            None => (rest, false),
        };
        let index: usize = digits.parse().map_err(|_| bad())?;
        if index == 0 {
            return Err(bad());
        }
        Ok(SegmentId { index, primed })
    }
}

/// How the border of a `2m x 2m` grid is cut into `4g` glued segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentLayout {
    g: usize,
    m: usize,
    lengths: Vec<usize>,
    origin: Corner,
    /// Scan offset of each segment head, in scan order.
    starts: Vec<usize>,
}

impl SegmentLayout {
    pub fn new(g: usize, m: usize, lengths: Vec<usize>, origin: Corner) -> Result<Self, GridError> {
        if g == 0 || m < 2 {
            return Err(GridError::InvalidLayout(format!("need g >= 1 and m >= 2, got g={g}, m={m}")));
        }
        if lengths.len() != 2 * g {
            return Err(GridError::InvalidLayout(format!("expected {} segment lengths, got {}", 2 * g, lengths.len())));
        }
        for (i, &len) in lengths.iter().enumerate() {
            if len % 2 == 1 {
                return Err(GridError::SegmentLengthOdd { segment: i + 1, length: len });
            }
            if len == 0 {
                return Err(GridError::InvalidLayout(format!("segment S{} has length 0", i + 1)));
            }
        }
        let expected = 8 * m - 4;
        let found = 2 * lengths.iter().sum::<usize>();
        if found != expected {
            return Err(GridError::PerimeterMismatch { m, expected, found });
        }
        let mut starts = Vec::with_capacity(4 * g);
        let mut at = 0;
        for seg in scan_order(g) {
            starts.push(at);
            at += lengths[seg.index - 1];
        }
        Ok(SegmentLayout { g, m, lengths, origin, starts })
    }

    /// Lengths as equal as possible (every length even).
    pub fn balanced(g: usize, m: usize, origin: Corner) -> Result<Self, GridError> {
        let units = (4 * m).saturating_sub(2) / 2;
        if g == 0 || units < 2 * g {
            return Err(GridError::InvalidLayout(format!("no layout with g={g} on m={m}")));
        }
        let lengths = (0..2 * g).map(|i| 2 * (units / (2 * g) + usize::from(i < units % (2 * g)))).collect();
        Self::new(g, m, lengths, origin)
    }

    /// Uniformly random composition of the border into even lengths, with a
    /// random origin corner.
    pub fn random<R: Rng + ?Sized>(g: usize, m: usize, rng: &mut R) -> Result<Self, GridError> {
        let units = (4 * m).saturating_sub(2) / 2;
        if g == 0 || units < 2 * g {
            return Err(GridError::InvalidLayout(format!("no layout with g={g} on m={m}")));
        }
        // Stars and bars: choose 2g-1 cut points among units-1 gaps.
        let mut cuts: Vec<usize> =
            rand::seq::index::sample(rng, units - 1, 2 * g - 1).into_iter().map(|c| c + 1).collect();
        cuts.sort_unstable();
        let mut lengths = Vec::with_capacity(2 * g);
        let mut prev = 0;
        for c in cuts.into_iter().chain(std::iter::once(units)) {
            lengths.push(2 * (c - prev));
            prev = c;
        }
        let origin = Corner::ALL[rng.gen_range(0..4)];
        Self::new(g, m, lengths, origin)
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn origin(&self) -> Corner {
        self.origin
    }

    /// Side of the grid in cells.
    pub fn side(&self) -> usize {
        2 * self.m
    }

    /// Number of border cells (equivalently, border steps).
    pub fn perimeter(&self) -> usize {
        8 * self.m - 4
    }

    pub fn length(&self, seg: SegmentId) -> usize {
        self.lengths[seg.index - 1]
    }

    pub fn segments(&self) -> impl Iterator<Item = SegmentId> {
        scan_order(self.g)
    }

    fn scan_slot(&self, seg: SegmentId) -> usize {
        let i = seg.index - 1;
        4 * (i / 2) + (i % 2) + if seg.primed { 2 } else { 0 }
    }

    fn check_segment(&self, seg: SegmentId) -> Result<(), GridError> {
        if seg.index == 0 || seg.index > 2 * self.g {
            Err(GridError::OutOfBounds(seg.to_string()))
        } else {
            Ok(())
        }
    }

    /// Cell at clockwise scan offset `k` (taken modulo the perimeter).
    pub fn border_cell(&self, k: usize) -> Cell {
        let side = 2 * self.m - 1;
        let top = 2 * self.m;
        let k = (k + self.origin.quarter() * side) % self.perimeter();
        match k / side {
            0 => Cell::new(1 + k, top),
            1 => Cell::new(top, top - (k - side)),
            2 => Cell::new(top - (k - 2 * side), 1),
            _ => Cell::new(1, 1 + (k - 3 * side)),
        }
    }

    /// Scan offset of a border cell.
    pub fn border_offset(&self, c: Cell) -> Option<usize> {
        let top = 2 * self.m;
        let side = top - 1;
        if !self.in_bounds(c) || !self.on_border(c) {
            return None;
        }
        let nw = if c.y == top && c.x < top {
            c.x - 1
        } else if c.x == top && c.y > 1 {
            side + (top - c.y)
        } else if c.y == 1 && c.x > 1 {
            2 * side + (top - c.x)
        } else {
            3 * side + (c.y - 1)
        };
        let p = self.perimeter();
        Some((nw + p - self.origin.quarter() * side) % p)
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        (1..=2 * self.m).contains(&c.x) && (1..=2 * self.m).contains(&c.y)
    }

    pub fn on_border(&self, c: Cell) -> bool {
        c.x == 1 || c.y == 1 || c.x == 2 * self.m || c.y == 2 * self.m
    }

    pub fn is_interior(&self, c: Cell) -> bool {
        (2..2 * self.m).contains(&c.x) && (2..2 * self.m).contains(&c.y)
    }

    /// Physical border cell of port `idx` on `seg`.
    pub fn port_cell(&self, seg: SegmentId, idx: usize) -> Result<Cell, GridError> {
        self.check_segment(seg)?;
        let len = self.length(seg);
        if idx == 0 || idx >= len {
            return Err(GridError::OutOfBounds(format!("{seg}:{idx}")));
        }
        let start = self.starts[self.scan_slot(seg)];
        let k = if seg.primed { start + len - idx } else { start + idx };
        Ok(self.border_cell(k))
    }

    /// Classifies a cell of the grid.
    pub fn locate(&self, c: Cell) -> Result<Location, GridError> {
        if !self.in_bounds(c) {
            return Err(GridError::OutOfBounds(c.to_string()));
        }
        let Some(k) = self.border_offset(c) else {
            return Ok(Location::Interior);
        };
        let slot = self.starts.partition_point(|&s| s <= k) - 1;
        let start = self.starts[slot];
        if k == start {
            return Ok(Location::SegmentEnd);
        }
        let seg = scan_order(self.g).nth(slot).expect("slot in range");
        let off = k - start;
        let idx = if seg.primed { self.length(seg) - off } else { off };
        Ok(Location::Port(seg, idx))
    }

    /// The interior cell adjacent to a non-corner border cell.
    fn inward(&self, c: Cell) -> Option<Cell> {
        let top = 2 * self.m;
        let n = if c.y == top {
            Cell::new(c.x, c.y - 1)
        } else if c.y == 1 {
            Cell::new(c.x, 2)
        } else if c.x == 1 {
            Cell::new(2, c.y)
        } else {
            Cell::new(c.x - 1, c.y)
        };
        self.is_interior(n).then_some(n)
    }
}

fn scan_order(g: usize) -> impl Iterator<Item = SegmentId> {
    (0..g).flat_map(|t| {
        let (a, b) = (2 * t + 1, 2 * t + 2);
        [SegmentId::s(a), SegmentId::s(b), SegmentId::s_prime(a), SegmentId::s_prime(b)]
    })
}

/// Where a grid cell sits relative to the segment structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Interior,
    Port(SegmentId, usize),
    /// A border cell shared by two consecutive segments.
    SegmentEnd,
}

/// A position named in an instance: a grid cell, or a port by segment and index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Position {
    Cell(Cell),
    Port(SegmentId, usize),
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Cell(c) => c.fmt(f),
            Position::Port(s, j) => write!(f, "{s}:{j}"),
        }
    }
}

/// Canonical vertex name: an interior cell, or a glued port named by its
/// unprimed segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexId {
    Interior(Cell),
    Port { seg: usize, idx: usize },
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Interior(c) => c.fmt(f),
            VertexId::Port { seg, idx } => write!(f, "S{seg}:{idx}"),
        }
    }
}

impl From<VertexId> for Position {
    fn from(v: VertexId) -> Self {
        match v {
            VertexId::Interior(c) => Position::Cell(c),
            VertexId::Port { seg, idx } => Position::Port(SegmentId::s(seg), idx),
        }
    }
}

/// Canonical vertex of a position. Ports on `S'_i` map to the same id as the
/// matching port on `S_i`; border cells resolve to their port.
pub fn canonical_id(layout: &SegmentLayout, p: Position) -> Result<VertexId, GridError> {
    let (seg, idx) = match p {
        Position::Port(seg, idx) => {
            layout.port_cell(seg, idx)?;
            (seg, idx)
        }
        Position::Cell(c) => match layout.locate(c)? {
            Location::Interior => return Ok(VertexId::Interior(c)),
            Location::Port(seg, idx) => (seg, idx),
            Location::SegmentEnd => return Err(GridError::SegmentEndpoint(c.to_string())),
        },
    };
    Ok(VertexId::Port { seg: seg.index, idx })
}

/// Geometry of one unit edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    /// Interior edge between `(x, y)` and `(x + 1, y)`.
    Horizontal { x: usize, y: usize },
    /// Interior edge between `(x, y)` and `(x, y + 1)`.
    Vertical { x: usize, y: usize },
    /// Edge from an interior cell to the physical port cell of `seg` at `idx`.
    Port { seg: SegmentId, idx: usize, inner: Cell },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridEdge {
    pub kind: EdgeKind,
    /// The two physical cells joined, in ascending order.
    pub cells: (Cell, Cell),
}

/// A validated graph on a genus-g grid.
#[derive(Debug, Clone)]
pub struct GenusGrid {
    layout: SegmentLayout,
    vertices: Vec<VertexId>,
    index: BTreeMap<VertexId, usize>,
    edges: Vec<GridEdge>,
    graph: UGraph,
}

impl PartialEq for GenusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.layout == other.layout && self.vertices == other.vertices && self.edges == other.edges
    }
}

/// An endpoint as given, with the physical cell resolved when known.
enum End {
    Inner(Cell),
    Port { seg: SegmentId, idx: usize, cell: Option<Cell> },
}

impl GenusGrid {
    /// Validates and builds an instance from position pairs.
    pub fn build(layout: SegmentLayout, edges: &[(Position, Position)]) -> Result<Self, GridError> {
        let mut physical: BTreeMap<(Cell, Cell), EdgeKind> = BTreeMap::new();
        for &(p, q) in edges {
            let e = resolve_edge(&layout, p, q)?;
            let cells = e.cells;
            if physical.insert(cells, e.kind).is_some() {
                return Err(GridError::DuplicateEdge(p.to_string(), q.to_string()));
            }
        }
        Ok(Self::from_physical(layout, physical))
    }

    fn from_physical(layout: SegmentLayout, physical: BTreeMap<(Cell, Cell), EdgeKind>) -> Self {
        let vid = |c: Cell| canonical_id(&layout, Position::Cell(c)).expect("resolved cell");
        let vertices: Vec<VertexId> =
            physical.keys().flat_map(|&(a, b)| [vid(a), vid(b)]).collect::<BTreeSet<_>>().into_iter().collect();
        let index: BTreeMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut listed: Vec<((usize, usize), GridEdge)> = physical
            .into_iter()
            .map(|(cells, kind)| {
                let (a, b) = (index[&vid(cells.0)], index[&vid(cells.1)]);
                ((a.min(b), a.max(b)), GridEdge { kind, cells })
            })
            .collect();
        listed.sort_by_key(|&(uv, _)| uv);
        let graph = UGraph::new(vertices.len(), listed.iter().map(|&(uv, _)| uv));
        let edges = listed.into_iter().map(|(_, e)| e).collect();
        let grid = GenusGrid { layout, vertices, index, edges, graph };
        debug_assert!(grid.graph.two_coloring().is_ok());
        grid
    }

    /// The empty instance on a layout.
    pub fn empty(layout: SegmentLayout) -> Self {
        Self::from_physical(layout, BTreeMap::new())
    }

    pub fn layout(&self) -> &SegmentLayout {
        &self.layout
    }

    pub fn graph(&self) -> &UGraph {
        &self.graph
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[GridEdge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &GridEdge {
        &self.edges[id]
    }

    pub fn vertex_index(&self, v: VertexId) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub fn canonical_id(&self, p: Position) -> Result<VertexId, GridError> {
        canonical_id(&self.layout, p)
    }

    /// Colour from cell parity; agrees with any BFS two-colouring up to a
    /// flip per component.
    pub fn geometric_color(&self, v: usize) -> u8 {
        match self.vertices[v] {
            VertexId::Interior(c) => c.parity(),
            VertexId::Port { seg, idx } => {
                self.layout.port_cell(SegmentId::s(seg), idx).expect("port of a built grid").parity()
            }
        }
    }

    /// Two-colouring of the instance, or an odd cycle.
    pub fn verify_bipartite(&self) -> Result<Vec<u8>, OddCycle> {
        verify_bipartite(&self.graph)
    }

    /// Edge positions in canonical (unprimed) form, in edge id order.
    pub fn edge_positions(&self) -> Vec<(Position, Position)> {
        self.graph.edges().iter().map(|&(u, v)| (self.vertices[u].into(), self.vertices[v].into())).collect()
    }

    /// Instance with the given edge ids removed. Vertices left without edges
    /// are dropped.
    pub fn without_edges(&self, removed: &[usize]) -> GenusGrid {
        let drop: BTreeSet<usize> = removed.iter().copied().collect();
        let physical =
            self.edges.iter().enumerate().filter(|(i, _)| !drop.contains(i)).map(|(_, e)| (e.cells, e.kind)).collect();
        Self::from_physical(self.layout.clone(), physical)
    }

    /// Every unit edge the layout allows, in a fixed order.
    pub fn legal_edges(layout: &SegmentLayout) -> Vec<GridEdge> {
        let top = layout.side();
        let mut out = Vec::new();
        for y in 2..top {
            for x in 2..top {
                if x + 1 < top {
                    out.push(GridEdge {
                        kind: EdgeKind::Horizontal { x, y },
                        cells: (Cell::new(x, y), Cell::new(x + 1, y)),
                    });
                }
                if y + 1 < top {
                    out.push(GridEdge {
                        kind: EdgeKind::Vertical { x, y },
                        cells: (Cell::new(x, y), Cell::new(x, y + 1)),
                    });
                }
            }
        }
        for k in 0..layout.perimeter() {
            let c = layout.border_cell(k);
            if let (Ok(Location::Port(seg, idx)), Some(inner)) = (layout.locate(c), layout.inward(c)) {
                out.push(GridEdge { kind: EdgeKind::Port { seg, idx, inner }, cells: (c.min(inner), c.max(inner)) });
            }
        }
        out
    }

    /// Seeded instance on a random layout: segment lengths and origin corner
    /// are drawn from `seed`, then [`GenusGrid::generate`] runs with it.
    pub fn from_seed(g: usize, m: usize, seed: u64, density: f64, ensure_pm: bool) -> Result<GenusGrid, GridError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let layout = SegmentLayout::random(g, m, &mut rng)?;
        Self::generate(&layout, seed, density, ensure_pm)
    }

    /// Seeded random instance.
    ///
    /// With `ensure_pm`, a random maximal set of disjoint legal edges is
    /// planted first; its endpoints become the vertex set and a `density`
    /// fraction of the remaining legal edges among them is added. Without
    /// it, a `density` fraction of all legal edges is taken.
    pub fn generate(layout: &SegmentLayout, seed: u64, density: f64, ensure_pm: bool) -> Result<GenusGrid, GridError> {
        if !(0.0..=1.0).contains(&density) {
            return Err(GridError::InfeasibleDensity(density));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut legal = Self::legal_edges(layout);
        legal.shuffle(&mut rng);
        let vid = |c: Cell| canonical_id(layout, Position::Cell(c)).expect("legal cell");
        let take = |n: usize| (density * n as f64).round() as usize;
        let chosen: Vec<GridEdge> = if ensure_pm {
            let mut used = BTreeSet::new();
            let mut skeleton = Vec::new();
            let mut rest = Vec::new();
            for e in legal {
                let (a, b) = (vid(e.cells.0), vid(e.cells.1));
                if !used.contains(&a) && !used.contains(&b) {
                    used.insert(a);
                    used.insert(b);
                    skeleton.push(e);
                } else {
                    rest.push(e);
                }
            }
            let candidates: Vec<GridEdge> =
                rest.into_iter().filter(|e| used.contains(&vid(e.cells.0)) && used.contains(&vid(e.cells.1))).collect();
            let k = take(candidates.len());
            skeleton.extend(candidates.into_iter().take(k));
            skeleton
        } else {
            let k = take(legal.len());
            legal.truncate(k);
            legal
        };
        let physical = chosen.into_iter().map(|e| (e.cells, e.kind)).collect();
        Ok(Self::from_physical(layout.clone(), physical))
    }
}

/// Two-colouring of any graph, or an odd cycle as counterexample.
pub fn verify_bipartite(g: &UGraph) -> Result<Vec<u8>, OddCycle> {
    g.two_coloring()
}

fn resolve(layout: &SegmentLayout, p: Position) -> Result<End, GridError> {
    match p {
        Position::Port(seg, idx) => {
            layout.port_cell(seg, idx)?;
            Ok(End::Port { seg, idx, cell: None })
        }
        Position::Cell(c) => match layout.locate(c)? {
            Location::Interior => Ok(End::Inner(c)),
            Location::Port(seg, idx) => Ok(End::Port { seg, idx, cell: Some(c) }),
            Location::SegmentEnd => Err(GridError::SegmentEndpoint(c.to_string())),
        },
    }
}

fn resolve_edge(layout: &SegmentLayout, p: Position, q: Position) -> Result<GridEdge, GridError> {
    let on_border = |x: Position| match x {
        Position::Port(..) => true,
        Position::Cell(c) => layout.in_bounds(c) && layout.on_border(c),
    };
    if on_border(p) && on_border(q) {
        return Err(GridError::BoundaryEdgeForbidden(p.to_string(), q.to_string()));
    }
    let non_unit = || GridError::NonUnitEdge(p.to_string(), q.to_string());
    match (resolve(layout, p)?, resolve(layout, q)?) {
        (End::Inner(a), End::Inner(b)) => {
            if !a.is_unit_neighbor(b) {
                return Err(non_unit());
            }
            let (a, b) = (a.min(b), a.max(b));
            let kind = if a.y == b.y {
                EdgeKind::Horizontal { x: a.x, y: a.y }
            } else {
                EdgeKind::Vertical { x: a.x, y: a.y }
            };
            Ok(GridEdge { kind, cells: (a, b) })
        }
        (End::Inner(inner), End::Port { seg, idx, cell }) | (End::Port { seg, idx, cell }, End::Inner(inner)) => {
            let (seg, cell) = match cell {
                Some(c) if c.is_unit_neighbor(inner) => (seg, c),
                Some(_) => return Err(non_unit()),
                None => {
                    let here = layout.port_cell(seg, idx)?;
                    let there = layout.port_cell(seg.partner(), idx)?;
                    if here.is_unit_neighbor(inner) {
                        (seg, here)
                    } else if there.is_unit_neighbor(inner) {
                        (seg.partner(), there)
                    } else {
                        return Err(non_unit());
                    }
                }
            };
            Ok(GridEdge { kind: EdgeKind::Port { seg, idx, inner }, cells: (cell.min(inner), cell.max(inner)) })
        }
        (End::Port { .. }, End::Port { .. }) => Err(GridError::BoundaryEdgeForbidden(p.to_string(), q.to_string())),
    }
}

// ---------------------------------------------------------------------------
// JSON instance files

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PosJson {
    Cell { x: usize, y: usize },
    Port { seg: String, idx: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub g: usize,
    pub m: usize,
    pub lengths: Vec<usize>,
    pub origin_corner: Corner,
    pub edges: Vec<[PosJson; 2]>,
}

impl PosJson {
    fn to_position(&self) -> Result<Position, GridError> {
        match self {
            PosJson::Cell { x, y } => Ok(Position::Cell(Cell::new(*x, *y))),
            PosJson::Port { seg, idx } => Ok(Position::Port(seg.parse()?, *idx)),
        }
    }

    fn from_position(p: Position) -> Self {
        match p {
            Position::Cell(c) => PosJson::Cell { x: c.x, y: c.y },
            Position::Port(s, idx) => PosJson::Port { seg: s.to_string(), idx },
        }
    }
}

impl InstanceFile {
    pub fn from_grid(g: &GenusGrid) -> Self {
        let l = g.layout();
        InstanceFile {
            g: l.g(),
            m: l.m(),
            lengths: l.lengths().to_vec(),
            origin_corner: l.origin(),
            edges: g
                .edge_positions()
                .into_iter()
                .map(|(a, b)| [PosJson::from_position(a), PosJson::from_position(b)])
                .collect(),
        }
    }

    pub fn to_grid(&self) -> Result<GenusGrid, GridError> {
        let layout = SegmentLayout::new(self.g, self.m, self.lengths.clone(), self.origin_corner)?;
        let edges = self
            .edges
            .iter()
            .map(|[a, b]| Ok((a.to_position()?, b.to_position()?)))
            .collect::<Result<Vec<_>, GridError>>()?;
        GenusGrid::build(layout, &edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout_24() -> SegmentLayout {
        SegmentLayout::new(1, 2, vec![2, 4], Corner::NW).unwrap()
    }

    #[test]
    fn empty_instance_is_valid() {
        let g = GenusGrid::build(layout_24(), &[]).unwrap();
        assert_eq!(g.vertex_count(), 0);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.verify_bipartite().unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn odd_length_rejected() {
        let err = SegmentLayout::new(1, 2, vec![3, 3], Corner::NW).unwrap_err();
        assert_eq!(err, GridError::SegmentLengthOdd { segment: 1, length: 3 });
    }

    #[test]
    fn perimeter_mismatch_rejected() {
        let err = SegmentLayout::new(1, 2, vec![2, 2], Corner::NW).unwrap_err();
        assert!(matches!(err, GridError::PerimeterMismatch { expected: 12, found: 8, .. }));
    }

    #[test]
    fn border_edge_rejected() {
        let e = (Position::Cell(Cell::new(2, 4)), Position::Cell(Cell::new(3, 4)));
        let err = GenusGrid::build(layout_24(), &[e]).unwrap_err();
        assert!(matches!(err, GridError::BoundaryEdgeForbidden(..)));
    }

    #[test]
    fn non_unit_edge_rejected() {
        let e = (Position::Cell(Cell::new(2, 2)), Position::Cell(Cell::new(3, 3)));
        assert!(matches!(GenusGrid::build(layout_24(), &[e]).unwrap_err(), GridError::NonUnitEdge(..)));
    }

    #[test]
    fn scan_visits_every_border_cell_once() {
        for origin in Corner::ALL {
            let l = SegmentLayout::balanced(2, 4, origin).unwrap();
            let cells: BTreeSet<Cell> = (0..l.perimeter()).map(|k| l.border_cell(k)).collect();
            assert_eq!(cells.len(), l.perimeter());
            for k in 0..l.perimeter() {
                assert_eq!(l.border_offset(l.border_cell(k)), Some(k));
                let next = l.border_cell(k + 1);
                assert!(l.border_cell(k).is_unit_neighbor(next));
            }
        }
    }

    #[test]
    fn glued_ports_share_id_and_parity() {
        let l = SegmentLayout::new(2, 4, vec![4, 2, 6, 2], Corner::SE).unwrap();
        for i in 1..=4 {
            for j in 1..l.lengths()[i - 1] {
                let a = canonical_id(&l, Position::Port(SegmentId::s(i), j)).unwrap();
                let b = canonical_id(&l, Position::Port(SegmentId::s_prime(i), j)).unwrap();
                assert_eq!(a, b);
                let ca = l.port_cell(SegmentId::s(i), j).unwrap();
                let cb = l.port_cell(SegmentId::s_prime(i), j).unwrap();
                assert_ne!(ca, cb);
                assert_eq!(ca.parity(), cb.parity());
                assert_eq!(l.locate(ca).unwrap(), Location::Port(SegmentId::s(i), j));
                assert_eq!(l.locate(cb).unwrap(), Location::Port(SegmentId::s_prime(i), j));
            }
        }
    }

    #[test]
    fn canonical_id_examples() {
        let l = layout_24();
        let a = canonical_id(&l, Position::Port(SegmentId::s(1), 1)).unwrap();
        let b = canonical_id(&l, Position::Port(SegmentId::s_prime(1), 1)).unwrap();
        assert_eq!(a, b);
        let c = Cell::new(3, 3);
        assert_eq!(canonical_id(&l, Position::Cell(c)).unwrap(), VertexId::Interior(c));
        let l4 = SegmentLayout::new(1, 3, vec![4, 6], Corner::NW).unwrap();
        assert!(matches!(canonical_id(&l4, Position::Port(SegmentId::s(1), 5)), Err(GridError::OutOfBounds(_))));
    }

    #[test]
    fn segment_names_round_trip() {
        for s in ["S1", "S12p", "S3"] {
            assert_eq!(s.parse::<SegmentId>().unwrap().to_string(), s);
        }
        assert!("T1".parse::<SegmentId>().is_err());
        assert!("S0".parse::<SegmentId>().is_err());
    }

    #[test]
    fn density_out_of_range() {
        let l = layout_24();
        assert_eq!(GenusGrid::generate(&l, 1, 1.5, true).unwrap_err(), GridError::InfeasibleDensity(1.5));
    }

    #[test]
    fn balanced_needs_room() {
        assert!(SegmentLayout::balanced(2, 2, Corner::NW).is_err());
        assert_eq!(SegmentLayout::balanced(2, 3, Corner::NW).unwrap().lengths(), &[4, 2, 2, 2]);
    }
}
