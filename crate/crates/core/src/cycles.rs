//! Exhaustive simple-cycle enumeration and the per-cycle checks built on it.
//!
//! The enumerator is Johnson's circuit algorithm run on the symmetric
//! digraph of an undirected graph. Each undirected cycle is reported once,
//! from its smallest vertex, in the direction whose second vertex is smaller
//! than its last.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::graph::{Cycle, UGraph};
use crate::grid::{EdgeKind, GenusGrid, VertexId};
use crate::weights::{circulation_restricted, CombinedWeight, ElementaryWeight};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("cycle budget of {cap} exceeded")]
    BudgetExceeded { cap: u64, partial: Option<Box<IsolationReport>> },
    #[error("segment S{0} is crossed an odd number of times")]
    PreconditionOddCrossing(usize),
    #[error("crossings of segment S{0} do not alternate")]
    PreconditionViolated(usize),
}

/// Hooks called while the enumerator walks paths.
///
/// `push` / `pop` bracket every edge put on the current path, including the
/// closing edge of a reported cycle. `depth` is the 0-based position of the
/// edge on the path.
pub trait PathVisitor {
    fn push(&mut self, _depth: usize, _tail: usize, _edge: usize, _head: usize) {}
    fn pop(&mut self, _depth: usize, _edge: usize) {}
    /// Called once per cycle with its vertices and edges in walk order.
    fn cycle(&mut self, verts: &[usize], edges: &[usize]) -> ControlFlow<()>;
}

impl<F: FnMut(&[usize], &[usize]) -> ControlFlow<()>> PathVisitor for F {
    fn cycle(&mut self, verts: &[usize], edges: &[usize]) -> ControlFlow<()> {
        self(verts, edges)
    }
}

struct Johnson<'a, V> {
    g: &'a UGraph,
    s: usize,
    max_len: usize,
    blocked: Vec<bool>,
    bsets: Vec<Vec<usize>>,
    /// Edge back to `s` for vertices allowed to close the current cycle.
    closing: Vec<Option<usize>>,
    verts: Vec<usize>,
    edges: Vec<usize>,
    stack: Vec<usize>,
    visitor: &'a mut V,
}

impl<V: PathVisitor> Johnson<'_, V> {
    fn circuit(&mut self, v: usize) -> ControlFlow<(), bool> {
        let mut found = false;
        self.verts.push(v);
        self.blocked[v] = true;
        if let Some(e) = self.closing[v] {
            found = true;
            let k = self.verts.len();
            if k >= 3 {
                self.visitor.push(k - 1, v, e, self.s);
                self.edges.push(e);
                let flow = self.visitor.cycle(&self.verts, &self.edges);
                self.edges.pop();
                self.visitor.pop(k - 1, e);
                if flow.is_break() {
                    self.verts.pop();
                    return ControlFlow::Break(());
                }
            }
        }
        let s = self.s;
        for &(w, e) in self.g.neighbors(v) {
            if w <= s || self.blocked[w] {
                continue;
            }
            if self.verts.len() >= self.max_len {
                found = true;
                continue;
            }
            let depth = self.edges.len();
            self.visitor.push(depth, v, e, w);
            self.edges.push(e);
            let sub = self.circuit(w);
            self.edges.pop();
            self.visitor.pop(depth, e);
            match sub {
                ControlFlow::Break(()) => {
                    self.verts.pop();
                    return ControlFlow::Break(());
                }
                ControlFlow::Continue(true) => found = true,
                ControlFlow::Continue(false) => {}
            }
        }
        if found {
            self.unblock(v);
        } else {
            for &(w, _) in self.g.neighbors(v) {
                if w > s && !self.bsets[w].contains(&v) {
                    self.bsets[w].push(v);
                }
            }
        }
        self.verts.pop();
        ControlFlow::Continue(found)
    }

    fn unblock(&mut self, v: usize) {
        self.stack.push(v);
        while let Some(u) = self.stack.pop() {
            if !self.blocked[u] {
                continue;
            }
            self.blocked[u] = false;
            while let Some(w) = self.bsets[u].pop() {
                self.stack.push(w);
            }
        }
    }
}

/// Walks every simple cycle of `g` (of length at most `max_len`, if given)
/// once. Stops early when the visitor breaks.
///
/// Cycles through `s` (their smallest vertex) are searched once per first
/// neighbour `a`, returning only through a neighbour larger than `a`; this
/// fixes the orientation without exploring the reverse walk.
pub fn walk_cycles<V: PathVisitor>(g: &UGraph, max_len: Option<usize>, visitor: &mut V) -> ControlFlow<()> {
    let n = g.vertex_count();
    let mut j = Johnson {
        g,
        s: 0,
        max_len: max_len.unwrap_or(usize::MAX),
        blocked: vec![false; n],
        bsets: vec![Vec::new(); n],
        closing: vec![None; n],
        verts: Vec::new(),
        edges: Vec::new(),
        stack: Vec::new(),
        visitor,
    };
    for s in 0..n {
        j.s = s;
        let mut firsts: Vec<(usize, usize)> = g.neighbors(s).iter().copied().filter(|&(a, _)| a > s).collect();
        firsts.sort_unstable();
        for (i, &(a, e)) in firsts.iter().enumerate() {
            for v in s..n {
                j.blocked[v] = false;
                j.bsets[v].clear();
                j.closing[v] = None;
            }
            for &(b, eb) in &firsts[i + 1..] {
                j.closing[b] = Some(eb);
            }
            if j.max_len < 2 {
                continue;
            }
            j.blocked[s] = true;
            j.verts.push(s);
            j.visitor.push(0, s, e, a);
            j.edges.push(e);
            let flow = j.circuit(a);
            j.edges.pop();
            j.visitor.pop(0, e);
            j.verts.pop();
            flow?;
        }
    }
    ControlFlow::Continue(())
}

/// All simple cycles of `g`, canonically oriented. Fails once more than
/// `cap` cycles exist.
pub fn enumerate_simple_cycles(
    g: &UGraph,
    max_len: Option<usize>,
    cap: Option<u64>,
) -> Result<Vec<Cycle>, OracleError> {
    let mut out = Vec::new();
    let cap_n = cap.unwrap_or(u64::MAX);
    let mut collect = |verts: &[usize], edges: &[usize]| {
        if out.len() as u64 >= cap_n {
            return ControlFlow::Break(());
        }
        out.push(Cycle::from_walk(verts, edges));
        ControlFlow::Continue(())
    };
    match walk_cycles(g, max_len, &mut collect) {
        ControlFlow::Continue(()) => Ok(out),
        ControlFlow::Break(()) => Err(OracleError::BudgetExceeded { cap: cap_n, partial: None }),
    }
}

/// Direction of a crossing edge relative to the grid interior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingDir {
    /// Traversed from the interior cell to the port.
    Out,
    In,
}

/// One edge of a cycle on an unprimed segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Crossing {
    pub idx: usize,
    pub dir: CrossingDir,
    pub edge: usize,
    /// 0-based position of the edge in the canonical orientation.
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CycleClass {
    Interior,
    /// Crossing counts `|E^C_i|` for segments `1..=2g`.
    Crossing {
        counts: Vec<usize>,
    },
}

impl CycleClass {
    /// Segments crossed an odd number of times.
    pub fn odd_segments(&self) -> Vec<usize> {
        match self {
            CycleClass::Interior => Vec::new(),
            CycleClass::Crossing { counts } => (1..=counts.len()).filter(|&i| counts[i - 1] % 2 == 1).collect(),
        }
    }
}

/// `(segment, port index)` of edges on an unprimed segment.
fn seg_side(grid: &GenusGrid, e: usize) -> Option<(usize, usize)> {
    match grid.edge(e).kind {
        EdgeKind::Port { seg, idx, .. } if !seg.primed => Some((seg.index, idx)),
        _ => None,
    }
}

fn is_port(grid: &GenusGrid, v: usize) -> bool {
    matches!(grid.vertices()[v], VertexId::Port { .. })
}

/// Crossing profile of `c`: entry `i - 1` lists the crossings of `S_i`
/// ordered by port index.
pub fn crossing_profile(grid: &GenusGrid, c: &Cycle) -> Vec<Vec<Crossing>> {
    let mut out = vec![Vec::new(); 2 * grid.layout().g()];
    for (position, (tail, edge, _)) in c.steps().enumerate() {
        if let Some((i, idx)) = seg_side(grid, edge) {
            let dir = if is_port(grid, tail) { CrossingDir::In } else { CrossingDir::Out };
            out[i - 1].push(Crossing { idx, dir, edge, position });
        }
    }
    for segment in &mut out {
        segment.sort_by_key(|x| x.idx);
    }
    out
}

pub fn classify(grid: &GenusGrid, c: &Cycle) -> CycleClass {
    let counts: Vec<usize> = crossing_profile(grid, c).iter().map(Vec::len).collect();
    if counts.iter().all(|&k| k == 0) {
        CycleClass::Interior
    } else {
        CycleClass::Crossing { counts }
    }
}

fn alternates(dirs: impl Iterator<Item = CrossingDir>) -> bool {
    let mut prev = None;
    for d in dirs {
        if prev == Some(d) {
            return false;
        }
        prev = Some(d);
    }
    true
}

/// Per segment, whether crossing directions alternate along the segment.
pub fn check_alternation(grid: &GenusGrid, c: &Cycle) -> Result<Vec<bool>, OracleError> {
    let profile = crossing_profile(grid, c);
    if let Some(i) = profile.iter().position(|p| p.len() % 2 == 1) {
        return Err(OracleError::PreconditionOddCrossing(i + 1));
    }
    Ok(profile.iter().map(|p| alternates(p.iter().map(|x| x.dir))).collect())
}

/// Both sides of the index-sum identity on segment `i`: the restricted
/// `w_alt(i)` circulation and `sum_k (i_2k - i_2k-1)`, in absolute value.
pub fn verify_weight_lemma(grid: &GenusGrid, c: &Cycle, i: usize) -> Result<(i64, i64), OracleError> {
    let profile = crossing_profile(grid, c);
    let p = &profile[i - 1];
    if p.len() % 2 == 1 {
        return Err(OracleError::PreconditionOddCrossing(i));
    }
    if !alternates(p.iter().map(|x| x.dir)) {
        return Err(OracleError::PreconditionViolated(i));
    }
    let subset: Vec<usize> = p.iter().map(|x| x.edge).collect();
    let f = ElementaryWeight::SegAlternating(i);
    let lhs: i64 = circulation_restricted(c, &subset, |e| f.eval(grid.edge(e))).expect("edges on cycle");
    let rhs: i64 = p.chunks(2).map(|w| (w[1].idx - w[0].idx) as i64).sum();
    Ok((lhs.abs(), rhs.abs()))
}

fn ser_big<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(b) => s.serialize_str(&b.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub checked: u64,
    pub failed: u64,
}

/// A cycle named by its vertices, for reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleRecord {
    pub vertices: Vec<String>,
    pub reason: String,
}

/// Outcome of checking every simple cycle of an instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsolationReport {
    pub g: usize,
    pub m: usize,
    pub lengths: Vec<usize>,
    pub vertices: usize,
    pub edges: usize,
    pub cycles_checked: u64,
    /// False when the cycle cap stopped the enumeration.
    pub complete: bool,
    #[serde(serialize_with = "ser_big")]
    pub min_abs_circulation: Option<BigInt>,
    /// Per elementary function, how many cycles it certified: the first
    /// function, in combination order, whose circulation is non-zero.
    pub witnesses: BTreeMap<String, u64>,
    pub interior_cycles: u64,
    pub crossing_cycles: u64,
    pub alternation: Tally,
    pub weight_lemma: Tally,
    pub disjunction: Tally,
    /// Cycles with zero circulation under `W`.
    pub failures: Vec<CycleRecord>,
    /// First few cycles failing one of the structural checks.
    pub lemma_failures: Vec<CycleRecord>,
}

impl IsolationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// All structural checks also passed.
    pub fn lemmas_passed(&self) -> bool {
        self.alternation.failed == 0 && self.weight_lemma.failed == 0 && self.disjunction.failed == 0
    }
}

const MAX_LEMMA_RECORDS: usize = 16;

struct EdgeInfo {
    /// `(segment, port index)` if on an unprimed segment.
    seg: Option<(usize, usize)>,
    alt: i64,
}

struct PortStep {
    seg: usize,
    idx: usize,
    dir: CrossingDir,
    /// Signed `w_alt` contribution at this position.
    term: i64,
}

struct IsolationVisitor<'a> {
    grid: &'a GenusGrid,
    k: usize,
    g2: usize,
    /// Non-zero elementary values per edge as `(function, value)`.
    elems: Vec<Vec<(usize, i64)>>,
    info: Vec<EdgeInfo>,
    running: Vec<i64>,
    ports: Vec<PortStep>,
    cap: u64,
    best: Option<Vec<i64>>,
    report: IsolationReport,
    witness_counts: Vec<u64>,
    scratch: Vec<Vec<(usize, CrossingDir, i64)>>,
}

impl IsolationVisitor<'_> {
    fn record(&self, verts: &[usize], reason: &str) -> CycleRecord {
        CycleRecord {
            vertices: verts.iter().map(|&v| self.grid.vertices()[v].to_string()).collect(),
            reason: reason.to_string(),
        }
    }

    fn lemma_failure(&mut self, verts: &[usize], reason: &str) {
        if self.report.lemma_failures.len() < MAX_LEMMA_RECORDS {
            let r = self.record(verts, reason);
            self.report.lemma_failures.push(r);
        }
    }

    fn structural_checks(&mut self, verts: &[usize]) {
        for s in &mut self.scratch {
            s.clear();
        }
        for p in &self.ports {
            self.scratch[p.seg - 1].push((p.idx, p.dir, p.term));
        }
        let interior = self.scratch.iter().all(Vec::is_empty);
        if interior {
            self.report.interior_cycles += 1;
        } else {
            self.report.crossing_cycles += 1;
        }
        let any_odd = self.scratch.iter().any(|s| s.len() % 2 == 1);

        // Certification skeleton: odd parity on a segment, else an
        // alternating crossing pattern, else the planar ramp.
        self.report.disjunction.checked += 1;
        let certified = if any_odd {
            (0..self.g2).any(|i| self.scratch[i].len() % 2 == 1 && self.running[i] != 0)
        } else if !interior {
            (0..self.g2).any(|i| !self.scratch[i].is_empty() && self.running[self.g2 + i] != 0)
        } else {
            self.running[2 * self.g2] != 0
        };
        if !certified {
            self.report.disjunction.failed += 1;
            self.lemma_failure(verts, "not certified by the expected elementary weight");
        }

        if any_odd || interior {
            return;
        }
        let mut alt_ok = true;
        for i in 0..self.g2 {
            let seg = &mut self.scratch[i];
            if seg.is_empty() {
                continue;
            }
            seg.sort_unstable_by_key(|x| x.0);
            let ok = alternates(seg.iter().map(|x| x.1));
            alt_ok &= ok;
            if ok {
                let lhs: i64 = seg.iter().map(|x| x.2).sum::<i64>().abs();
                let rhs: i64 = seg.chunks(2).map(|w| (w[1].0 - w[0].0) as i64).sum::<i64>().abs();
                self.report.weight_lemma.checked += 1;
                if lhs != rhs {
                    self.report.weight_lemma.failed += 1;
                    self.lemma_failure(verts, &format!("index-sum identity on S{}: {lhs} != {rhs}", i + 1));
                }
            }
        }
        self.report.alternation.checked += 1;
        if !alt_ok {
            self.report.alternation.failed += 1;
            self.lemma_failure(verts, "crossings do not alternate");
        }
    }
}

impl PathVisitor for IsolationVisitor<'_> {
    fn push(&mut self, depth: usize, tail: usize, edge: usize, _head: usize) {
        let sign = if depth.is_multiple_of(2) { -1 } else { 1 };
        for &(f, v) in &self.elems[edge] {
            self.running[f] += sign * v;
        }
        if let Some((seg, idx)) = self.info[edge].seg {
            let dir = if is_port(self.grid, tail) { CrossingDir::In } else { CrossingDir::Out };
            self.ports.push(PortStep { seg, idx, dir, term: sign * self.info[edge].alt });
        }
    }

    fn pop(&mut self, depth: usize, edge: usize) {
        let sign = if depth.is_multiple_of(2) { -1 } else { 1 };
        for &(f, v) in &self.elems[edge] {
            self.running[f] -= sign * v;
        }
        if self.info[edge].seg.is_some() {
            self.ports.pop();
        }
    }

    fn cycle(&mut self, verts: &[usize], _edges: &[usize]) -> ControlFlow<()> {
        if self.report.cycles_checked >= self.cap {
            return ControlFlow::Break(());
        }
        self.report.cycles_checked += 1;
        match self.running.iter().rposition(|&d| d != 0) {
            None => {
                let r = self.record(verts, "circulation under W vanishes");
                self.report.failures.push(r);
            }
            Some(top) => {
                // The first function in combination order with a non-zero
                // circulation certifies the cycle.
                let first = self.running.iter().position(|&d| d != 0).expect("non-zero digit");
                self.witness_counts[first] += 1;
                let sign = self.running[top].signum();
                let better = match &self.best {
                    None => true,
                    Some(b) => {
                        // Compare |circ| digit by digit from the top.
                        let mut ord = std::cmp::Ordering::Equal;
                        for i in (0..self.k).rev() {
                            ord = (sign * self.running[i]).cmp(&b[i]);
                            if ord.is_ne() {
                                break;
                            }
                        }
                        ord.is_lt()
                    }
                };
                if better {
                    self.best = Some(self.running.iter().map(|d| sign * d).collect());
                }
            }
        }
        self.structural_checks(verts);
        ControlFlow::Continue(())
    }
}

/// Checks `circ_W(C) != 0` for every simple cycle, together with the
/// crossing-structure checks. At most `cap` cycles are examined; if more
/// exist the partial report comes back inside `BudgetExceeded`.
pub fn verify_isolation(grid: &GenusGrid, w: &CombinedWeight, cap: u64) -> Result<IsolationReport, OracleError> {
    let k = w.order().len();
    let g2 = 2 * grid.layout().g();
    let elems = (0..grid.edge_count())
        .map(|e| w.elementary(e).iter().copied().enumerate().filter(|&(_, v)| v != 0).collect())
        .collect();
    let info = (0..grid.edge_count())
        .map(|e| EdgeInfo {
            seg: seg_side(grid, e),
            alt: seg_side(grid, e).map(|(i, _)| ElementaryWeight::SegAlternating(i).eval(grid.edge(e))).unwrap_or(0),
        })
        .collect();
    let layout = grid.layout();
    let mut v = IsolationVisitor {
        grid,
        k,
        g2,
        elems,
        info,
        running: vec![0; k],
        ports: Vec::new(),
        cap,
        best: None,
        report: IsolationReport {
            g: layout.g(),
            m: layout.m(),
            lengths: layout.lengths().to_vec(),
            vertices: grid.vertex_count(),
            edges: grid.edge_count(),
            cycles_checked: 0,
            complete: true,
            min_abs_circulation: None,
            witnesses: BTreeMap::new(),
            interior_cycles: 0,
            crossing_cycles: 0,
            alternation: Tally::default(),
            weight_lemma: Tally::default(),
            disjunction: Tally::default(),
            failures: Vec::new(),
            lemma_failures: Vec::new(),
        },
        witness_counts: vec![0; k],
        scratch: vec![Vec::new(); g2],
    };
    let flow = walk_cycles(grid.graph(), None, &mut v);
    let mut report = v.report;
    report.min_abs_circulation = v.best.map(|digits| w.encode(&digits));
    report.witnesses = w.order().iter().zip(&v.witness_counts).map(|(f, &c)| (f.to_string(), c)).collect();
    debug_assert!(report.min_abs_circulation.as_ref().is_none_or(|x| !x.is_zero()));
    match flow {
        ControlFlow::Continue(()) => Ok(report),
        ControlFlow::Break(()) => {
            report.complete = false;
            Err(OracleError::BudgetExceeded { cap, partial: Some(Box::new(report)) })
        }
    }
}
