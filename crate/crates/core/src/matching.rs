//! Perfect matchings through the weight enumerator
//! `det [x^{W'(u,v)}] = sum_M sign(M) x^{W'(M)}`.
//!
//! Rows of the biadjacency matrix are the colour-0 vertices and columns the
//! colour-1 vertices, both in increasing order. Under an isolating weight the
//! lowest term of the enumerator comes from a single matching, so it cannot
//! cancel.

use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cycles::{walk_cycles, OracleError};
use crate::graph::{Cycle, UGraph};
use crate::poly::{determinant, Poly};
use crate::weights::circulation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchingError {
    #[error("colour classes have sizes {0} and {1}")]
    UnbalancedClasses(usize, usize),
    #[error("graph is not bipartite")]
    NotBipartite,
    #[error("selected edges do not form a perfect matching")]
    NotPerfect,
}

/// A set of edge ids with its total weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Matching {
    pub edges: Vec<usize>,
    #[serde(serialize_with = "ser_big")]
    pub weight: BigInt,
}

fn ser_big<S: serde::Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl Matching {
    pub fn new(mut edges: Vec<usize>, weights: &[BigInt]) -> Self {
        edges.sort_unstable();
        let weight = edges.iter().map(|&e| &weights[e]).sum();
        Matching { edges, weight }
    }

    /// Edges pairwise disjoint and covering every vertex of `g`.
    pub fn is_perfect_in(&self, g: &UGraph) -> bool {
        is_perfect(g, &self.edges)
    }
}

pub fn is_perfect(g: &UGraph, edges: &[usize]) -> bool {
    let mut covered = vec![false; g.vertex_count()];
    for &e in edges {
        if e >= g.edge_count() {
            return false;
        }
        let (a, b) = g.edge(e);
        if covered[a] || covered[b] {
            return false;
        }
        covered[a] = true;
        covered[b] = true;
    }
    covered.into_iter().all(|c| c)
}

/// `W' = W - min W` and the subtracted minimum.
pub fn shift_nonnegative(w: &[BigInt]) -> (Vec<BigInt>, BigInt) {
    let offset = w.iter().min().cloned().unwrap_or_default();
    (w.iter().map(|x| x - &offset).collect(), offset)
}

/// The signed weight enumerator of the perfect matchings of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightEnumerator {
    poly: Poly,
}

impl WeightEnumerator {
    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    /// `w_G`: the smallest exponent with a non-zero coefficient.
    pub fn min_exponent(&self) -> Option<&BigInt> {
        self.poly.min_exponent()
    }

    pub fn min_coefficient(&self) -> Option<BigInt> {
        self.min_exponent().map(|k| self.poly.coeff(k))
    }
}

/// Row and column vertex lists for a two-colouring.
fn sides(colors: &[u8]) -> (Vec<usize>, Vec<usize>) {
    let rows = (0..colors.len()).filter(|&v| colors[v] == 0).collect();
    let cols = (0..colors.len()).filter(|&v| colors[v] == 1).collect();
    (rows, cols)
}

fn enumerator_without(
    g: &UGraph,
    colors: &[u8],
    weights: &[BigInt],
    skip: Option<usize>,
) -> Result<WeightEnumerator, MatchingError> {
    let (rows, cols) = sides(colors);
    if rows.len() != cols.len() {
        return Err(MatchingError::UnbalancedClasses(rows.len(), cols.len()));
    }
    let mut pos = vec![0usize; g.vertex_count()];
    for (i, &v) in rows.iter().enumerate() {
        pos[v] = i;
    }
    for (i, &v) in cols.iter().enumerate() {
        pos[v] = i;
    }
    let n = rows.len();
    let mut m = vec![vec![Poly::zero(); n]; n];
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        if Some(e) == skip {
            continue;
        }
        let (r, c) = if colors[a] == 0 { (a, b) } else { (b, a) };
        m[pos[r]][pos[c]] = Poly::monomial(BigInt::one(), weights[e].clone());
    }
    Ok(WeightEnumerator { poly: determinant(m) })
}

/// Weight enumerator of `g` under `weights`, using the graph's own
/// two-colouring.
pub fn weight_enumerator(g: &UGraph, weights: &[BigInt]) -> Result<WeightEnumerator, MatchingError> {
    let colors = g.two_coloring().map_err(|_| MatchingError::NotBipartite)?;
    enumerator_without(g, &colors, weights, None)
}

/// Decision and construction procedures for one graph and weighting.
///
/// Weights are shifted to be non-negative on construction; reported matching
/// weights use the original values.
#[derive(Debug, Clone)]
pub struct MatchingOracle<'a> {
    g: &'a UGraph,
    colors: Vec<u8>,
    original: Vec<BigInt>,
    shifted: Vec<BigInt>,
    offset: BigInt,
}

impl<'a> MatchingOracle<'a> {
    pub fn new(g: &'a UGraph, weights: &[BigInt]) -> Result<Self, MatchingError> {
        assert_eq!(weights.len(), g.edge_count(), "one weight per edge");
        let colors = g.two_coloring().map_err(|_| MatchingError::NotBipartite)?;
        let (shifted, offset) = shift_nonnegative(weights);
        Ok(MatchingOracle { g, colors, original: weights.to_vec(), shifted, offset })
    }

    pub fn offset(&self) -> &BigInt {
        &self.offset
    }

    pub fn shifted_weights(&self) -> &[BigInt] {
        &self.shifted
    }

    fn enumerator(&self, skip: Option<usize>) -> Option<WeightEnumerator> {
        enumerator_without(self.g, &self.colors, &self.shifted, skip).ok()
    }

    /// Enumerator under the shifted weights; `None` if the colour classes
    /// differ in size.
    pub fn weight_enumerator(&self) -> Option<WeightEnumerator> {
        self.enumerator(None)
    }

    /// Non-zero enumerator. The empty graph has the empty matching.
    pub fn has_pm(&self) -> bool {
        self.enumerator(None).is_some_and(|p| !p.is_zero())
    }

    /// `w_G` under the shifted weights.
    pub fn min_pm_weight(&self) -> Option<BigInt> {
        self.enumerator(None)?.min_exponent().cloned()
    }

    /// Shifted minimum translated back to the original weights.
    pub fn unshift(&self, shifted_total: &BigInt) -> BigInt {
        shifted_total + &self.offset * BigInt::from(self.g.vertex_count() / 2)
    }

    /// Edges `e` whose deletion kills every perfect matching or raises the
    /// minimum weight. Under isolation these form the minimum matching.
    pub fn construct_pm(&self) -> Result<Option<Matching>, MatchingError> {
        let Some(w_g) = self.min_pm_weight() else {
            return Ok(None);
        };
        let chosen: Vec<usize> = (0..self.g.edge_count())
            .filter(|&e| match self.enumerator(Some(e)).and_then(|p| p.min_exponent().cloned()) {
                None => true,
                Some(k) => k > w_g,
            })
            .collect();
        let m = Matching::new(chosen, &self.original);
        if !m.is_perfect_in(self.g) {
            return Err(MatchingError::NotPerfect);
        }
        Ok(Some(m))
    }

    /// True iff a perfect matching exists and deleting any one of its edges
    /// leaves none.
    pub fn is_unique_pm(&self) -> bool {
        match self.construct_pm() {
            Ok(Some(m)) => m.edges.iter().all(|&e| !self.enumerator(Some(e)).is_some_and(|p| !p.is_zero())),
            _ => false,
        }
    }
}

/// Every perfect matching of `g`, as sorted edge lists, by exhaustive search.
pub fn brute_force_matchings(g: &UGraph) -> Vec<Vec<usize>> {
    fn go(g: &UGraph, used: &mut [bool], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let Some(v) = used.iter().position(|&u| !u) else {
            let mut m = cur.clone();
            m.sort_unstable();
            out.push(m);
            return;
        };
        used[v] = true;
        for &(w, e) in g.neighbors(v) {
            if !used[w] {
                used[w] = true;
                cur.push(e);
                go(g, used, cur, out);
                cur.pop();
                used[w] = false;
            }
        }
        used[v] = false;
    }
    let mut out = Vec::new();
    go(g, &mut vec![false; g.vertex_count()], &mut Vec::new(), &mut out);
    out
}

/// Sign of the permutation a perfect matching induces between the sorted
/// colour-0 and colour-1 vertices.
pub fn permutation_sign(g: &UGraph, colors: &[u8], m: &[usize]) -> i32 {
    let (rows, cols) = sides(colors);
    let col_pos = |v: usize| cols.binary_search(&v).expect("colour-1 vertex");
    let mut perm = vec![0usize; rows.len()];
    for &e in m {
        let (a, b) = g.edge(e);
        let (r, c) = if colors[a] == 0 { (a, b) } else { (b, a) };
        perm[rows.binary_search(&r).expect("colour-0 vertex")] = col_pos(c);
    }
    let inversions: usize = (0..perm.len()).map(|i| (i + 1..perm.len()).filter(|&j| perm[j] < perm[i]).count()).sum();
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Size of a maximum matching of a bipartite graph, by augmenting paths.
pub fn maximum_matching_size(g: &UGraph, colors: &[u8]) -> usize {
    fn augment(g: &UGraph, v: usize, seen: &mut [bool], mate: &mut [Option<usize>]) -> bool {
        for &(w, _) in g.neighbors(v) {
            if seen[w] {
                continue;
            }
            seen[w] = true;
            if mate[w].is_none_or(|u| augment(g, u, seen, mate)) {
                mate[w] = Some(v);
                return true;
            }
        }
        false
    }
    let n = g.vertex_count();
    let mut mate = vec![None; n];
    let mut size = 0;
    for v in (0..n).filter(|&v| colors[v] == 0) {
        let mut seen = vec![false; n];
        if augment(g, v, &mut seen, &mut mate) {
            size += 1;
        }
    }
    size
}

/// Outcome of checking "non-zero circulations imply a unique minimum".
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LemmaOutcome {
    /// Some cycle has zero circulation; nothing to check.
    NotApplicable,
    Pass {
        matchings: usize,
    },
    Fail {
        minimisers: usize,
    },
}

/// Enumerates cycles and perfect matchings of `g` and checks that non-zero
/// circulation on every cycle forces a unique minimum-weight matching.
pub fn verify_uniquepm_lemma(g: &UGraph, weights: &[BigInt], cap: u64) -> Result<LemmaOutcome, OracleError> {
    let mut seen = 0u64;
    let mut all_nonzero = true;
    let mut check = |verts: &[usize], edges: &[usize]| {
        if seen >= cap {
            return ControlFlow::Break(());
        }
        seen += 1;
        let c = Cycle::from_walk(verts, edges);
        let circ: BigInt = circulation(&c, |e| weights[e].clone()).unwrap_or_default();
        if circ.is_zero() {
            all_nonzero = false;
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    };
    if walk_cycles(g, None, &mut check).is_break() && all_nonzero {
        return Err(OracleError::BudgetExceeded { cap, partial: None });
    }
    if !all_nonzero {
        return Ok(LemmaOutcome::NotApplicable);
    }
    let all = brute_force_matchings(g);
    let totals: Vec<BigInt> = all.iter().map(|m| m.iter().map(|&e| &weights[e]).sum()).collect();
    let Some(min) = totals.iter().min() else {
        return Ok(LemmaOutcome::Pass { matchings: 0 });
    };
    let minimisers = totals.iter().filter(|t| *t == min).count();
    Ok(if minimisers == 1 { LemmaOutcome::Pass { matchings: all.len() } } else { LemmaOutcome::Fail { minimisers } })
}

/// Distinct weight totals of the given matchings, with signed counts.
pub fn signed_weight_counts(
    g: &UGraph,
    colors: &[u8],
    weights: &[BigInt],
    matchings: &[Vec<usize>],
) -> Vec<(BigInt, i64)> {
    let mut totals: std::collections::BTreeMap<BigInt, i64> = Default::default();
    for m in matchings {
        let w: BigInt = m.iter().map(|&e| &weights[e]).sum();
        *totals.entry(w).or_default() += i64::from(permutation_sign(g, colors, m));
    }
    totals.into_iter().filter(|(_, c)| *c != 0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn single_edge() {
        let g = UGraph::new(2, [(0, 1)]);
        let o = MatchingOracle::new(&g, &big(&[0])).unwrap();
        let e = o.weight_enumerator().unwrap();
        assert_eq!(e.min_exponent(), Some(&BigInt::zero()));
        let c = e.min_coefficient().unwrap();
        assert!(c == BigInt::one() || c == -BigInt::one());
        assert_eq!(o.min_pm_weight(), Some(BigInt::zero()));
        assert!(o.is_unique_pm());
    }

    #[test]
    fn four_cycle_two_matchings() {
        let g = UGraph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)]);
        // Edge ids follow insertion: (0,1)=0, (1,2)=1, (2,3)=2, (0,3)=3.
        let o = MatchingOracle::new(&g, &big(&[0, 1, 2, 3])).unwrap();
        let e = o.weight_enumerator().unwrap();
        let exps: Vec<BigInt> = e.poly().terms().map(|(k, _)| k.clone()).collect();
        assert_eq!(exps, big(&[2, 4]));
        assert!(e.poly().terms().all(|(_, c)| c == &BigInt::one() || c == &-BigInt::one()));
        assert_eq!(o.min_pm_weight(), Some(BigInt::from(2)));
        let m = o.construct_pm().unwrap().unwrap();
        assert_eq!(m.edges, vec![0, 2]);
        assert!(!o.is_unique_pm());
    }

    #[test]
    fn empty_graph_has_empty_matching() {
        let g = UGraph::new(0, []);
        let o = MatchingOracle::new(&g, &[]).unwrap();
        assert!(o.has_pm());
        assert_eq!(o.construct_pm().unwrap().unwrap().edges, Vec::<usize>::new());
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift_nonnegative(&big(&[0, 0])), (big(&[0, 0]), BigInt::zero()));
        assert_eq!(shift_nonnegative(&big(&[-3, 1])), (big(&[0, 4]), BigInt::from(-3)));
    }

    #[test]
    fn path_without_pm() {
        let g = UGraph::new(3, [(0, 1), (1, 2)]);
        let o = MatchingOracle::new(&g, &big(&[0, 0])).unwrap();
        assert!(!o.has_pm());
        assert_eq!(o.min_pm_weight(), None);
        assert_eq!(o.construct_pm().unwrap(), None);
        assert!(!o.is_unique_pm());
    }

    #[test]
    fn lemma_not_applicable_for_zero_weights() {
        let g = UGraph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)]);
        assert_eq!(verify_uniquepm_lemma(&g, &big(&[0, 0, 0, 0]), 100), Ok(LemmaOutcome::NotApplicable));
        assert_eq!(verify_uniquepm_lemma(&g, &big(&[0, 1, 2, 3]), 100), Ok(LemmaOutcome::Pass { matchings: 2 }));
    }
}
