//! Sparse univariate polynomials with big-integer exponents and coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

/// `sum c_k x^k`, only non-zero coefficients stored. Exponents may be
/// negative.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<BigInt, BigInt>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::monomial(BigInt::one(), BigInt::zero())
    }

    /// `c x^k`.
    pub fn monomial(c: BigInt, k: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of non-zero terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: &BigInt) -> BigInt {
        self.terms.get(k).cloned().unwrap_or_default()
    }

    /// `(exponent, coefficient)` pairs in increasing exponent order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&BigInt, &BigInt)> {
        self.terms.iter()
    }

    pub fn min_exponent(&self) -> Option<&BigInt> {
        self.terms.keys().next()
    }

    pub fn max_exponent(&self) -> Option<&BigInt> {
        self.terms.keys().next_back()
    }

    fn add_term(&mut self, k: BigInt, c: BigInt) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(k) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `self / d` if `d` divides `self` exactly over the integers.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (dk, dc) = d.terms.iter().next_back()?;
        let lo = d.min_exponent().expect("non-empty");
        // Exact quotient terms satisfy k + lo >= min exponent of self.
        let floor = match self.min_exponent() {
            Some(f) => f.clone(),
            None => return Some(Poly::zero()),
        };
        let mut rem = self.clone();
        let mut q = Poly::zero();
        while let Some((rk, rc)) = rem.terms.iter().next_back() {
            let (c, r) = rc.div_rem(dc);
            if !r.is_zero() {
                return None;
            }
            let k = rk - dk;
            if &k + lo < floor {
                return None;
            }
            for (ek, ec) in &d.terms {
                rem.add_term(ek + &k, -(ec * &c));
            }
            q.add_term(k, c);
        }
        Some(q)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), -c);
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                out.add_term(a + b, x * y);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect() }
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}*x^{k}")?;
        }
        Ok(())
    }
}

/// Determinant of a square matrix of polynomials by fraction-free
/// (Bareiss) elimination with row pivoting.
pub fn determinant(mut m: Vec<Vec<Poly>>) -> Poly {
    let n = m.len();
    if n == 0 {
        return Poly::one();
    }
    let mut negate = false;
    let mut prev = Poly::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return Poly::zero();
            };
            m.swap(k, p);
            negate = !negate;
        }
        let (top, rest) = m.split_at_mut(k + 1);
        let pivot_row = &top[k];
        let pivot = &pivot_row[k];
        for row in rest.iter_mut() {
            let lead = std::mem::take(&mut row[k]);
            for j in k + 1..n {
                let mut v = &row[j] * pivot;
                if !lead.is_zero() && !pivot_row[j].is_zero() {
                    v = &v - &(&lead * &pivot_row[j]);
                }
                row[j] = if k == 0 { v } else { v.div_exact(&prev).expect("Bareiss division is exact") };
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -&det
    } else {
        det
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[(i64, i64)]) -> Poly {
        let mut out = Poly::zero();
        for &(k, c) in terms {
            out.add_term(BigInt::from(k), BigInt::from(c));
        }
        out
    }

    #[test]
    fn arithmetic() {
        let a = p(&[(0, 1), (3, 2)]);
        let b = p(&[(1, -1), (3, 1)]);
        assert_eq!(&a + &b, p(&[(0, 1), (1, -1), (3, 3)]));
        assert_eq!(&a - &a, Poly::zero());
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        assert_eq!(prod.div_exact(&b), Some(a.clone()));
        assert_eq!(a.div_exact(&p(&[(1, 1), (0, 1)])), None);
        assert_eq!(p(&[(0, 3)]).div_exact(&p(&[(0, 2)])), None);
    }

    #[test]
    fn small_determinants() {
        assert_eq!(determinant(vec![]), Poly::one());
        let x = |k: i64| p(&[(k, 1)]);
        // [[x^0, x^1], [x^3, x^2]] -> x^2 - x^4
        let d = determinant(vec![vec![x(0), x(1)], vec![x(3), x(2)]]);
        assert_eq!(d, p(&[(2, 1), (4, -1)]));
        // needs a row swap
        let z = Poly::zero;
        let d = determinant(vec![vec![z(), x(1)], vec![x(2), z()]]);
        assert_eq!(d, p(&[(3, -1)]));
    }

    #[test]
    fn integer_determinant_matches_laplace() {
        let rows = [[2i64, -1, 0, 3], [1, 4, -2, 0], [0, 5, 1, -1], [3, 0, 2, 2]];
        let m: Vec<Vec<Poly>> = rows.iter().map(|r| r.iter().map(|&c| p(&[(0, c)])).collect()).collect();
        fn laplace(m: &[Vec<i64>]) -> i64 {
            if m.len() == 1 {
                return m[0][0];
            }
            (0..m.len())
                .map(|j| {
                    let minor: Vec<Vec<i64>> = m[1..]
                        .iter()
                        .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, &v)| v).collect())
                        .collect();
                    let s = if j % 2 == 0 { 1 } else { -1 };
                    s * m[0][j] * laplace(&minor)
                })
                .sum()
        }
        let ints: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
        assert_eq!(determinant(m), p(&[(0, laplace(&ints))]));
    }
}
