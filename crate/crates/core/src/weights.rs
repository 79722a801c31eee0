//! Elementary edge weights, their big-integer combination and circulations.

use std::fmt;
use std::ops::{Add, Neg};

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::graph::Cycle;
use crate::grid::{EdgeKind, GenusGrid, GridEdge};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightError {
    #[error("cycle has odd length {0}")]
    OddCycle(usize),
    #[error("edge {0} is not on the cycle")]
    EdgeNotOnCycle(usize),
}

/// One of the `4g + 1` elementary weight functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementaryWeight {
    /// 1 on edges leaving the grid through unprimed segment `S_i`.
    SegIndicator(usize),
    /// `+j` / `-j` (j odd / even) on the edge through port `j` of `S_i`.
    SegAlternating(usize),
    /// Alternating ramp on horizontal interior edges.
    PlanarInterior,
}

impl ElementaryWeight {
    /// The fixed combination order for genus `g`.
    pub fn order(g: usize) -> Vec<ElementaryWeight> {
        (1..=2 * g)
            .map(ElementaryWeight::SegIndicator)
            .chain((1..=2 * g).map(ElementaryWeight::SegAlternating))
            .chain(std::iter::once(ElementaryWeight::PlanarInterior))
            .collect()
    }

    pub fn eval(self, e: &GridEdge) -> i64 {
        match (self, e.kind) {
            (ElementaryWeight::SegIndicator(i), EdgeKind::Port { seg, .. }) if !seg.primed && seg.index == i => 1,
            (ElementaryWeight::SegAlternating(i), EdgeKind::Port { seg, idx, .. }) if !seg.primed && seg.index == i => {
                let j = idx as i64;
                if j % 2 == 1 {
                    j
                } else {
                    -j
                }
            }
            (ElementaryWeight::PlanarInterior, EdgeKind::Horizontal { x, y }) => planar(y - 1, x - 1),
            _ => 0,
        }
    }
}

/// `(-1)^(i+j) (i+j-1)` for the j-th horizontal edge of interior row i.
fn planar(i: usize, j: usize) -> i64 {
    let s = (i + j) as i64;
    if s % 2 == 0 {
        s - 1
    } else {
        -(s - 1)
    }
}

impl fmt::Display for ElementaryWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementaryWeight::SegIndicator(i) => write!(f, "w_seg({i})"),
            ElementaryWeight::SegAlternating(i) => write!(f, "w_alt({i})"),
            ElementaryWeight::PlanarInterior => f.write_str("w_planar"),
        }
    }
}

/// `W(e) = sum_k elem_k(e) * B^k` over the fixed order, `k = 1..=4g+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedWeight {
    base: BigInt,
    order: Vec<ElementaryWeight>,
    /// Row-major `edge x function` table of elementary values.
    elems: Vec<i64>,
    values: Vec<BigInt>,
}

impl CombinedWeight {
    /// Combines the elementary weights of `grid` with base `B = n^4`, raised
    /// when needed so that `B > 2 n max|elem|` (digits of any circulation
    /// then never carry).
    pub fn new(grid: &GenusGrid) -> Self {
        let order = ElementaryWeight::order(grid.layout().g());
        let k = order.len();
        let mut elems = Vec::with_capacity(grid.edge_count() * k);
        for e in grid.edges() {
            elems.extend(order.iter().map(|f| f.eval(e)));
        }
        let n = grid.vertex_count() as u64;
        let max_abs = elems.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
        let floor = 2 * n * max_abs + 1;
        let base = BigInt::from(n.pow(4).max(floor).max(2));
        assert!(base > BigInt::from(2 * n * max_abs), "base too small for digit separation");
        let powers: Vec<BigInt> = (1..=k as u32).map(|p| base.pow(p)).collect();
        let values = elems
            .chunks(k.max(1))
            .take(grid.edge_count())
            .map(|row| row.iter().zip(&powers).map(|(&v, p)| p * v).sum())
            .collect();
        CombinedWeight { base, order, elems, values }
    }

    pub fn base(&self) -> &BigInt {
        &self.base
    }

    pub fn order(&self) -> &[ElementaryWeight] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `W(e)`.
    pub fn value(&self, e: usize) -> &BigInt {
        &self.values[e]
    }

    pub fn values(&self) -> &[BigInt] {
        &self.values
    }

    /// Elementary values of edge `e` in combination order.
    pub fn elementary(&self, e: usize) -> &[i64] {
        let k = self.order.len();
        &self.elems[e * k..(e + 1) * k]
    }

    /// Balanced base-B digits `d_1..d_K` of `value` (`d_0` must vanish).
    /// Returns `None` if the value is not representable that way.
    pub fn decode(&self, value: &BigInt) -> Option<Vec<i64>> {
        let digits = balanced_digits(value, &self.base, self.order.len() + 1)?;
        if digits[0] != 0 {
            return None;
        }
        Some(digits[1..].to_vec())
    }

    /// The same weights on a subset of the edges, renumbered in the order
    /// given. The base is kept.
    pub fn restrict(&self, kept: &[usize]) -> CombinedWeight {
        let k = self.order.len();
        CombinedWeight {
            base: self.base.clone(),
            order: self.order.clone(),
            elems: kept.iter().flat_map(|&e| self.elems[e * k..(e + 1) * k].iter().copied()).collect(),
            values: kept.iter().map(|&e| self.values[e].clone()).collect(),
        }
    }

    /// Inverse of [`decode`](Self::decode).
    pub fn encode(&self, digits: &[i64]) -> BigInt {
        let mut acc = BigInt::zero();
        for &d in digits.iter().rev() {
            acc = (acc + d) * &self.base;
        }
        acc
    }
}

/// Balanced digits with `|d| <= B/2`, least significant first.
pub fn balanced_digits(value: &BigInt, base: &BigInt, count: usize) -> Option<Vec<i64>> {
    let half = base / 2;
    let mut rest = value.clone();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut d = &rest % base;
        if d > half {
            d -= base;
        } else if d < -half.clone() {
            d += base;
        }
        rest = (rest - &d) / base;
        out.push(i64::try_from(d).ok()?);
    }
    rest.is_zero().then_some(out)
}

/// `sum_i (-1)^i w(e_i)` over the cycle, `i` counted from 1 in the
/// canonical orientation (so the first edge enters negatively).
pub fn circulation<T, F>(c: &Cycle, mut w: F) -> Result<T, WeightError>
where
    T: Zero + Neg<Output = T> + Add<Output = T>,
    F: FnMut(usize) -> T,
{
    if c.len() % 2 == 1 {
        return Err(WeightError::OddCycle(c.len()));
    }
    let mut acc = T::zero();
    for (pos, &e) in c.edges().iter().enumerate() {
        acc = acc + signed(pos, w(e));
    }
    Ok(acc)
}

/// Circulation restricted to `subset`, with the same sign convention as
/// [`circulation`]. Summing over a partition of the cycle gives the full
/// circulation.
pub fn circulation_restricted<T, F>(c: &Cycle, subset: &[usize], mut w: F) -> Result<T, WeightError>
where
    T: Zero + Neg<Output = T> + Add<Output = T>,
    F: FnMut(usize) -> T,
{
    let mut acc = T::zero();
    for &e in subset {
        let pos = c.position(e).ok_or(WeightError::EdgeNotOnCycle(e))?;
        acc = acc + signed(pos, w(e));
    }
    Ok(acc)
}

fn signed<T: Neg<Output = T>>(pos: usize, v: T) -> T {
    if pos.is_multiple_of(2) {
        -v
    } else {
        v
    }
}

/// `circ_W(C)` as a big integer.
pub fn circulation_w(c: &Cycle, w: &CombinedWeight) -> Result<BigInt, WeightError> {
    circulation(c, |e| w.value(e).clone())
}
