//! Polygonal schemata as cyclic words, their surface invariants, the
//! cut-and-paste reductions A-F and a normalisation driver.
//!
//! A word lists the sides of a polygon in order. Side `t` runs from corner
//! `t` to corner `t + 1`; an inverted letter runs against that direction.
//! Each label occurs exactly twice.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemaError {
    #[error("empty word")]
    Empty,
    #[error("label {0:?} occurs {1} times")]
    Occurrences(String, usize),
    #[error("malformed side {0:?}")]
    BadToken(String),
    #[error("rule {0} does not apply")]
    PatternNotFound(Rule),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub label: String,
    pub inv: bool,
}

impl Letter {
    pub fn new(label: impl Into<String>, inv: bool) -> Self {
        Letter { label: label.into(), inv }
    }

    pub fn inverse(&self) -> Letter {
        Letter { label: self.label.clone(), inv: !self.inv }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.label, if self.inv { "-" } else { "" })
    }
}

/// A cyclic word in which every label occurs twice.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SchemaWord {
    letters: Vec<Letter>,
}

impl SchemaWord {
    pub fn new(letters: Vec<Letter>) -> Result<Self, SchemaError> {
        if letters.is_empty() {
            return Err(SchemaError::Empty);
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for l in &letters {
            *counts.entry(l.label.as_str()).or_default() += 1;
        }
        if let Some((label, &n)) = counts.iter().find(|(_, &n)| n != 2) {
            return Err(SchemaError::Occurrences(label.to_string(), n));
        }
        Ok(SchemaWord { letters })
    }

    /// Random valid word on `labels` labels `a1, a2, ...`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, labels: usize) -> Self {
        let mut letters: Vec<Letter> = (1..=labels)
            .flat_map(|i| [Letter::new(format!("a{i}"), false), Letter::new(format!("a{i}"), false)])
            .collect();
        for l in &mut letters {
            l.inv = rng.gen();
        }
        letters.shuffle(rng);
        SchemaWord { letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn label_count(&self) -> usize {
        self.letters.len() / 2
    }

    /// Position of the other occurrence of the label at `t`.
    fn mate(&self, t: usize) -> usize {
        let label = &self.letters[t].label;
        (0..self.len()).find(|&u| u != t && &self.letters[u].label == label).expect("valid word")
    }

    fn is_orientable_at(&self, t: usize) -> bool {
        self.letters[t].inv != self.letters[self.mate(t)].inv
    }

    pub fn is_orientable(&self) -> bool {
        (0..self.len()).all(|t| self.is_orientable_at(t))
    }

    fn rotated(&self, start: usize) -> Vec<Letter> {
        let mut v = self.letters.clone();
        v.rotate_left(start % self.len().max(1));
        v
    }

    /// The word read the other way round.
    pub fn inverse(&self) -> SchemaWord {
        SchemaWord { letters: inverse_of(&self.letters) }
    }

    /// Corner class of each corner, numbered in order of first appearance.
    pub fn corner_labels(&self) -> Vec<usize> {
        let n = self.len();
        let mut uf: Vec<usize> = (0..n).collect();
        fn find(uf: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while uf[r] != r {
                r = uf[r];
            }
            let mut y = x;
            while uf[y] != r {
                let next = uf[y];
                uf[y] = r;
                y = next;
            }
            r
        }
        let ends = |t: usize| {
            let (a, b) = (t, (t + 1) % n);
            if self.letters[t].inv {
                (b, a)
            } else {
                (a, b)
            }
        };
        for t in 0..n {
            let u = self.mate(t);
            if u < t {
                continue;
            }
            let (t0, t1) = ends(t);
            let (u0, u1) = ends(u);
            for (x, y) in [(t0, u0), (t1, u1)] {
                let (rx, ry) = (find(&mut uf, x), find(&mut uf, y));
                uf[rx] = ry;
            }
        }
        let mut names = BTreeMap::new();
        (0..n)
            .map(|c| {
                let r = find(&mut uf, c);
                let next = names.len();
                *names.entry(r).or_insert(next)
            })
            .collect()
    }

    pub fn corner_classes(&self) -> usize {
        self.corner_labels().into_iter().collect::<BTreeSet<_>>().len()
    }

    pub fn invariants(&self) -> SurfaceInvariants {
        let v = self.corner_classes() as i64;
        let e = self.label_count() as i64;
        let euler_char = v - e + 1;
        let orientable = self.is_orientable();
        let genus = if orientable { (2 - euler_char) / 2 } else { 2 - euler_char };
        SurfaceInvariants { orientable, euler_char, genus }
    }

    fn fresh(&self, prefix: &str, taken: &mut BTreeSet<String>) -> String {
        for l in &self.letters {
            taken.insert(l.label.clone());
        }
        let name = (1..).map(|k| format!("{prefix}{k}")).find(|c| !taken.contains(c)).expect("unbounded");
        taken.insert(name.clone());
        name
    }

    fn with(letters: Vec<Letter>) -> SchemaWord {
        debug_assert!(SchemaWord::new(letters.clone()).is_ok(), "rewrite broke the word");
        SchemaWord { letters }
    }

    fn adjacent_inverse_at(&self, t: usize) -> bool {
        let n = self.len();
        let (a, b) = (&self.letters[t], &self.letters[(t + 1) % n]);
        a.label == b.label && a.inv != b.inv
    }

    // -- single rewrites at a given position ------------------------------

    /// A: drop `x x-` starting at `t`.
    fn a_at(&self, t: usize) -> Option<SchemaWord> {
        if self.len() <= 2 || !self.adjacent_inverse_at(t) {
            return None;
        }
        let mut w = self.rotated(t);
        w.drain(..2);
        Some(Self::with(w))
    }

    /// B: `s t X t- Y -> r X r- s Y` with `s` at position `p`.
    fn b_at(&self, p: usize) -> Option<SchemaWord> {
        let w = self.rotated(p);
        let n = w.len();
        let (s, t) = (&w[0], &w[1]);
        if s.label == t.label || n < 4 {
            return None;
        }
        let j = (2..n).find(|&j| w[j].label == t.label)?;
        if w[j].inv == t.inv {
            return None;
        }
        let r = Letter::new(self.fresh("r", &mut BTreeSet::new()), false);
        let mut out = vec![r.clone()];
        out.extend_from_slice(&w[2..j]);
        out.push(r.inverse());
        out.push(s.clone());
        out.extend_from_slice(&w[j + 1..]);
        Some(Self::with(out))
    }

    /// B': `s t X t Y -> s- r Y r X` with `s` at position `p`.
    fn b_prime_at(&self, p: usize) -> Option<SchemaWord> {
        let w = self.rotated(p);
        let n = w.len();
        let (s, t) = (&w[0], &w[1]);
        if s.label == t.label || n < 4 {
            return None;
        }
        let j = (2..n).find(|&j| w[j].label == t.label)?;
        if w[j].inv != t.inv {
            return None;
        }
        let r = Letter::new(self.fresh("r", &mut BTreeSet::new()), false);
        let mut out = vec![s.inverse(), r.clone()];
        out.extend_from_slice(&w[j + 1..]);
        out.push(r);
        out.extend_from_slice(&w[2..j]);
        Some(Self::with(out))
    }

    /// C: `s X s Y -> t t Y* X` for the non-adjacent occurrences at `p`.
    fn c_at(&self, p: usize) -> Option<SchemaWord> {
        let w = self.rotated(p);
        let n = w.len();
        let j = (1..n).find(|&j| w[j].label == w[0].label)?;
        if w[j].inv != w[0].inv || j == 1 || j == n - 1 {
            return None;
        }
        let t = Letter::new(self.fresh("c", &mut BTreeSet::new()), false);
        let mut out = vec![t.clone(), t];
        out.extend(inverse_of(&w[j + 1..]));
        out.extend_from_slice(&w[1..j]);
        Some(Self::with(out))
    }

    /// D: `s X t Y s- U t- V -> r p r- p- U Y X V`, with `s` at `p0` and the
    /// interleaving letter at `q`.
    fn d_at(&self, p0: usize, q: usize) -> Option<SchemaWord> {
        let n = self.len();
        let w = self.rotated(p0);
        let q = (q + n - p0) % n;
        let j = (1..n).find(|&j| w[j].label == w[0].label)?;
        if w[j].inv == w[0].inv || q == 0 || q >= j {
            return None;
        }
        let k = (j + 1..n).find(|&k| w[k].label == w[q].label)?;
        if w[k].inv == w[q].inv {
            return None;
        }
        let mut taken = BTreeSet::new();
        let r = Letter::new(self.fresh("d", &mut taken), false);
        let pi = Letter::new(self.fresh("d", &mut taken), false);
        let mut out = vec![r.clone(), pi.clone(), r.inverse(), pi.inverse()];
        out.extend_from_slice(&w[j + 1..k]); // U
        out.extend_from_slice(&w[q + 1..j]); // Y
        out.extend_from_slice(&w[1..q]); // X
        out.extend_from_slice(&w[k + 1..]); // V
        Some(Self::with(out))
    }

    /// E: `s1 s1 X s2 s3 s2- s3- Y -> t1 t1 t2 t2 t3 t3 X Y`, pair at `p`,
    /// handle at `h`.
    fn e_forward_at(&self, p: usize, h: usize) -> Option<SchemaWord> {
        let n = self.len();
        let w = self.rotated(p);
        let h = (h + n - p) % n;
        if !(is_pair(&w, 0) && h >= 2 && h + 4 <= n && is_handle(&w, h)) {
            return None;
        }
        let mut taken = BTreeSet::new();
        let mut out = Vec::with_capacity(n);
        for _ in 0..3 {
            let t = Letter::new(self.fresh("e", &mut taken), false);
            out.push(t.clone());
            out.push(t);
        }
        out.extend_from_slice(&w[2..h]);
        out.extend_from_slice(&w[h + 4..]);
        Some(Self::with(out))
    }

    /// E reversed with empty `X`: three consecutive pairs at `p` become a
    /// pair followed by a handle.
    fn e_reverse_at(&self, p: usize) -> Option<SchemaWord> {
        let n = self.len();
        let w = self.rotated(p);
        if n < 6 || !(is_pair(&w, 0) && is_pair(&w, 2) && is_pair(&w, 4)) {
            return None;
        }
        let mut taken = BTreeSet::new();
        let s1 = Letter::new(self.fresh("e", &mut taken), false);
        let s2 = Letter::new(self.fresh("e", &mut taken), false);
        let s3 = Letter::new(self.fresh("e", &mut taken), false);
        let mut out = vec![s1.clone(), s1, s2.clone(), s3.clone(), s2.inverse(), s3.inverse()];
        out.extend_from_slice(&w[6..]);
        Some(Self::with(out))
    }

    /// F: `s s t t X -> s r s- r X` with the first pair at `p`.
    fn f_at(&self, p: usize) -> Option<SchemaWord> {
        let n = self.len();
        let w = self.rotated(p);
        if n < 4 || !(is_pair(&w, 0) && is_pair(&w, 2)) {
            return None;
        }
        let r = Letter::new(self.fresh("f", &mut BTreeSet::new()), false);
        let s = w[0].clone();
        let mut out = vec![s.clone(), r.clone(), s.inverse(), r];
        out.extend_from_slice(&w[4..]);
        Some(Self::with(out))
    }

    // -- first-match rewrites ---------------------------------------------

    pub fn reduce_a(&self) -> Result<SchemaWord, SchemaError> {
        (0..self.len()).find_map(|t| self.a_at(t)).ok_or(SchemaError::PatternNotFound(Rule::A))
    }

    pub fn reduce_b(&self) -> Result<SchemaWord, SchemaError> {
        (0..self.len()).find_map(|t| self.b_at(t)).ok_or(SchemaError::PatternNotFound(Rule::B))
    }

    pub fn reduce_b_prime(&self) -> Result<SchemaWord, SchemaError> {
        (0..self.len()).find_map(|t| self.b_prime_at(t)).ok_or(SchemaError::PatternNotFound(Rule::BPrime))
    }

    pub fn reduce_c(&self) -> Result<SchemaWord, SchemaError> {
        (0..self.len()).find_map(|t| self.c_at(t)).ok_or(SchemaError::PatternNotFound(Rule::C))
    }

    pub fn reduce_d(&self) -> Result<SchemaWord, SchemaError> {
        let n = self.len();
        (0..n).find_map(|p| (1..n).find_map(|d| self.d_at(p, (p + d) % n))).ok_or(SchemaError::PatternNotFound(Rule::D))
    }

    pub fn reduce_e(&self, forward: bool) -> Result<SchemaWord, SchemaError> {
        let n = self.len();
        let out = if forward {
            (0..n).find_map(|p| (2..n).find_map(|d| self.e_forward_at(p, (p + d) % n)))
        } else {
            (0..n).find_map(|p| self.e_reverse_at(p))
        };
        out.ok_or(SchemaError::PatternNotFound(if forward { Rule::EForward } else { Rule::EReverse }))
    }

    pub fn reduce_f(&self) -> Result<SchemaWord, SchemaError> {
        (0..self.len()).find_map(|t| self.f_at(t)).ok_or(SchemaError::PatternNotFound(Rule::F))
    }

    /// Which normal form the word is in, up to rotation and reading direction.
    pub fn normal_form(&self) -> Option<NormalForm> {
        let n = self.len();
        for w in [self.letters.clone(), inverse_of(&self.letters)] {
            for r in 0..n {
                let mut v = w.clone();
                v.rotate_left(r);
                if let Some(f) = form_of(&v) {
                    return Some(f);
                }
            }
        }
        None
    }

    pub fn is_normal_form(&self) -> Option<NormalForm> {
        self.normal_form()
    }

    /// Rewrites the word into normal form, recording each step.
    pub fn normalize(&self) -> (SchemaWord, Vec<Step>) {
        let mut trace = Vec::new();
        let mut w = self.clone();
        let mut apply = |w: &mut SchemaWord, rule: Rule, next: SchemaWord| {
            trace.push(Step { rule, word: next.clone() });
            *w = next;
        };

        // Phase 1: a single corner class.
        loop {
            if w.len() <= 2 {
                break;
            }
            if let Ok(next) = w.reduce_a() {
                apply(&mut w, Rule::A, next);
                continue;
            }
            let corners = w.corner_labels();
            let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
            for &c in &corners {
                *sizes.entry(c).or_default() += 1;
            }
            if sizes.len() == 1 {
                break;
            }
            let (&target, _) = sizes.iter().min_by_key(|(&c, &k)| (k, c)).expect("non-empty");
            let n = w.len();
            let p =
                (0..n).find(|&p| corners[p] == target && corners[(p + n - 1) % n] != target).expect("class boundary");
            // Corner p sits between sides p - 1 and p.
            let s = (p + n - 1) % n;
            let (rule, next) =
                if w.is_orientable_at(p) { (Rule::B, w.b_at(s)) } else { (Rule::BPrime, w.b_prime_at(s)) };
            apply(&mut w, rule, next.expect("reduction applies at a class boundary"));
        }

        if w.is_orientable() {
            while let Some(next) = w.first_d(|_| true) {
                apply(&mut w, Rule::D, next);
            }
        } else {
            // Pair every non-orientable label.
            while let Some(next) = (0..w.len()).find_map(|t| w.c_at(t)) {
                apply(&mut w, Rule::C, next);
            }
            // Collect orientable labels into handles.
            loop {
                let orientable: Vec<bool> = (0..w.len()).map(|t| w.is_orientable_at(t)).collect();
                let Some(next) = w.first_d(|t| orientable[t]) else { break };
                apply(&mut w, Rule::D, next);
            }
            // Trade handles for pairs.
            while let Ok(next) = w.reduce_e(true) {
                apply(&mut w, Rule::EForward, next);
            }
            // Fold pairs back into handles, keeping one or two pairs.
            while let Some(p) = w.last_pair_triple() {
                let next = w.e_reverse_at(p).expect("three pairs");
                apply(&mut w, Rule::EReverse, next);
            }
            if w.len() >= 4 && w.count_pairs() == 2 {
                let next = w.reduce_f().expect("adjacent pairs");
                apply(&mut w, Rule::F, next);
            }
        }
        (w, trace)
    }

    /// D on the first label (allowed by `eligible`) not yet in a handle,
    /// with its first interleaving eligible letter.
    fn first_d(&self, eligible: impl Fn(usize) -> bool) -> Option<SchemaWord> {
        let in_handle = self.handle_positions();
        for (p, &handled) in in_handle.iter().enumerate() {
            if handled || !eligible(p) {
                continue;
            }
            let j = self.mate(p);
            if j < p {
                continue;
            }
            for q in p + 1..j {
                let k = self.mate(q);
                if (k > j || k < p) && eligible(q) {
                    let (first, second) = if self.letters[p].inv { (j, q) } else { (p, q) };
                    // Read from the occurrence of s that precedes its mate
                    // cyclically with the interleaver in between.
                    if let Some(next) = self.d_at(first, second) {
                        return Some(next);
                    }
                    if let Some(next) = self.d_at(p, q) {
                        return Some(next);
                    }
                }
            }
        }
        None
    }

    fn handle_positions(&self) -> Vec<bool> {
        let n = self.len();
        let mut out = vec![false; n];
        if n < 4 {
            return out;
        }
        for p in 0..n {
            let w = self.rotated(p);
            if is_handle(&w, 0) {
                for d in 0..4 {
                    out[(p + d) % n] = true;
                }
            }
        }
        out
    }

    fn count_pairs(&self) -> usize {
        (0..self.len()).filter(|&t| is_pair(&self.rotated(t), 0)).count()
    }

    /// Start of the last run of three consecutive pairs in the pair block.
    fn last_pair_triple(&self) -> Option<usize> {
        let n = self.len();
        let pair_at = |p: usize| is_pair(&self.rotated(p), 0);
        if self.count_pairs() < 3 {
            return None;
        }
        if 2 * self.count_pairs() == n {
            return (0..n).find(|&p| pair_at(p));
        }
        // Last pair of a run: no pair follows it.
        let end = (0..n).find(|&p| pair_at(p) && !pair_at((p + 2) % n))?;
        let start = (end + n - 4) % n;
        (pair_at(start) && pair_at((start + 2) % n)).then_some(start)
    }
}

fn inverse_of(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(Letter::inverse).collect()
}

/// `x x` at `i`.
fn is_pair(w: &[Letter], i: usize) -> bool {
    i + 1 < w.len() && w[i] == w[i + 1]
}

/// `x y x- y-` at `i` with distinct labels.
fn is_handle(w: &[Letter], i: usize) -> bool {
    i + 3 < w.len() && w[i].label != w[i + 1].label && w[i + 2] == w[i].inverse() && w[i + 3] == w[i + 1].inverse()
}

fn handles_only(w: &[Letter]) -> bool {
    if w.len() == 2 {
        return w[0].label == w[1].label && w[0].inv != w[1].inv;
    }
    w.len().is_multiple_of(4) && (0..w.len()).step_by(4).all(|i| is_handle(w, i))
}

fn form_of(w: &[Letter]) -> Option<NormalForm> {
    let n = w.len();
    if n == 2 && w[0].label == w[1].label && w[0].inv != w[1].inv {
        return Some(NormalForm::Sphere);
    }
    if n >= 4 && n.is_multiple_of(4) && handles_only(w) {
        return Some(NormalForm::Handles);
    }
    if is_pair(w, 0) && (n == 2 || handles_only(&w[2..])) {
        return Some(NormalForm::CrossCap);
    }
    if n >= 4 && w[0].label != w[1].label && w[2] == w[0].inverse() && w[3] == w[1] && (n == 4 || handles_only(&w[4..]))
    {
        return Some(NormalForm::KleinHandle);
    }
    None
}

/// The four normal forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum NormalForm {
    /// Form 1: `s1 t1 s1- t1- ... sk tk sk- tk-`.
    Handles,
    /// Form 2: `s s-`.
    Sphere,
    /// Form 3: `s s X` with `X` orientable and normal.
    CrossCap,
    /// Form 4: `s t s- t X` with `X` orientable and normal.
    KleinHandle,
}

impl NormalForm {
    pub fn id(self) -> u8 {
        match self {
            NormalForm::Handles => 1,
            NormalForm::Sphere => 2,
            NormalForm::CrossCap => 3,
            NormalForm::KleinHandle => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Rule {
    A,
    B,
    /// B for a side pair glued without reversal.
    BPrime,
    C,
    D,
    EForward,
    EReverse,
    F,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::A => "A",
            Rule::B => "B",
            Rule::BPrime => "B'",
            Rule::C => "C",
            Rule::D => "D",
            Rule::EForward => "E",
            Rule::EReverse => "E-reverse",
            Rule::F => "F",
        };
        f.write_str(s)
    }
}

/// One rewrite of a normalisation trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub rule: Rule,
    pub word: SchemaWord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SurfaceInvariants {
    pub orientable: bool,
    pub euler_char: i64,
    pub genus: i64,
}

impl FromStr for SchemaWord {
    type Err = SchemaError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let letters = s
            .split_whitespace()
            .map(|tok| {
                let (label, inv) = match tok.strip_suffix('-') {
                    Some(l) => (l, true),
                    None => (tok, false),
                };
                if label.is_empty() || label.contains('-') {
                    return Err(SchemaError::BadToken(tok.to_string()));
                }
                Ok(Letter::new(label, inv))
            })
            .collect::<Result<Vec<_>, _>>()?;
        SchemaWord::new(letters)
    }
}

impl fmt::Display for SchemaWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            l.fmt(f)?;
        }
        Ok(())
    }
}
