//! Multi-indices, occupation vectors, words in the generators and their
//! normal-form monomials.
//!
//! Generators are 0-based internally (`a_{i+1}` is generator `i`); all textual
//! output is 1-based so that `a1` is the first generator.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Deref};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance used when comparing expression coefficients.
pub const COEFF_TOL: f64 = 1e-9;

/// Componentwise count of letters, `occ(mu)`. Also used for the lattice points
/// `v`, `u`, `k^n` and indicator vectors `delta_S`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccVector(Vec<usize>);

impl OccVector {
    pub fn new(entries: Vec<usize>) -> Self {
        assert!(!entries.is_empty(), "occupation vectors need n >= 1");
        OccVector(entries)
    }

    pub fn zero(n: usize) -> Self {
        Self::new(vec![0; n])
    }

    /// The constant vector `(k, ..., k)`.
    pub fn splat(n: usize, k: usize) -> Self {
        Self::new(vec![k; n])
    }

    /// Indicator vector of a subset of generators (0-based).
    pub fn indicator(n: usize, subset: &[usize]) -> Self {
        let mut v = vec![0; n];
        for &i in subset {
            assert!(i < n, "generator {i} out of range for n = {n}");
            v[i] = 1;
        }
        Self::new(v)
    }

    /// Indicator vector for the subset encoded as a bit mask (bit `i` set iff `i` in S).
    pub fn from_mask(n: usize, mask: usize) -> Self {
        Self::new((0..n).map(|i| (mask >> i) & 1).collect())
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    /// `l(v) = v_1 + ... + v_n`, the tensor level of `H_v`.
    pub fn level(&self) -> usize {
        self.0.iter().sum()
    }

    /// Componentwise `self <= other`.
    pub fn leq(&self, other: &OccVector) -> bool {
        debug_assert_eq!(self.n(), other.n());
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn max_componentwise(&self, other: &OccVector) -> OccVector {
        OccVector(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    /// Componentwise difference; `None` unless the result is non-negative.
    pub fn checked_sub(&self, other: &OccVector) -> Option<OccVector> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(OccVector)
    }

    pub fn max_entry(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// `self + delta_{i}`.
    pub fn bump(&self, i: usize) -> OccVector {
        let mut v = self.0.clone();
        v[i] += 1;
        OccVector(v)
    }

    /// `self - delta_{i}` if that stays non-negative.
    pub fn drop_one(&self, i: usize) -> Option<OccVector> {
        let mut v = self.0.clone();
        v[i] = v[i].checked_sub(1)?;
        Some(OccVector(v))
    }

    /// `(v_1 + ... + v_n)! / (v_1! ... v_n!)`, the dimension of `H_v`.
    pub fn multinomial(&self) -> u64 {
        multinomial(&self.0)
    }

    /// All `v <= bound` componentwise, in lexicographic order.
    pub fn lattice_below(bound: &OccVector) -> Vec<OccVector> {
        let n = bound.n();
        let mut out = Vec::new();
        let mut cur = vec![0usize; n];
        loop {
            out.push(OccVector(cur.clone()));
            // odometer increment from the last coordinate
            let mut i = n;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if cur[i] < bound.0[i] {
                    cur[i] += 1;
                    for c in cur.iter_mut().skip(i + 1) {
                        *c = 0;
                    }
                    break;
                }
            }
        }
    }

    /// All `v <= (k, ..., k)` in lexicographic order.
    pub fn lattice_box(n: usize, k: usize) -> Vec<OccVector> {
        Self::lattice_below(&Self::splat(n, k))
    }

    /// All `v` with `l(v) <= max_level`, ordered by level then lexicographically.
    pub fn up_to_level(n: usize, max_level: usize) -> Vec<OccVector> {
        let mut all: Vec<_> = Self::lattice_box(n, max_level)
            .into_iter()
            .filter(|v| v.level() <= max_level)
            .collect();
        all.sort_by(|a, b| a.level().cmp(&b.level()).then_with(|| a.cmp(b)));
        all
    }
}

impl Add for &OccVector {
    type Output = OccVector;

    fn add(self, rhs: &OccVector) -> OccVector {
        OccVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for OccVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for OccVector {
    type Err = Error;

    /// Parses `1,1` or `(1,1)`.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let entries = body
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad occupation entry {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if entries.is_empty() {
            return Err(Error::Parse("empty occupation vector".into()));
        }
        Ok(OccVector(entries))
    }
}

pub fn multinomial(parts: &[usize]) -> u64 {
    // product of binomials C(v_1 + .. + v_i, v_i); stays exact in u64 for the sizes used here
    let mut total = 0u64;
    let mut acc = 1u64;
    for &p in parts {
        for j in 1..=p as u64 {
            total += 1;
            acc = acc * total / j;
        }
    }
    acc
}

/// A multi-index `mu = (mu_1, ..., mu_k)` naming the word `a_mu = a_{mu_1} ... a_{mu_k}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(indices: Vec<usize>) -> Self {
        MultiIndex(indices)
    }

    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    /// Build from 1-based generator labels, e.g. `from_labels(&[1, 2])` is `a_1 a_2`.
    pub fn from_labels(labels: &[usize]) -> Self {
        MultiIndex(labels.iter().map(|&l| l.checked_sub(1).expect("labels are 1-based")).collect())
    }

    pub fn occ(&self, n: usize) -> OccVector {
        occ(&self.0, n)
    }

    pub fn concat(&self, other: &MultiIndex) -> MultiIndex {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        MultiIndex(v)
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    /// 1-based labels, the form used in JSON output.
    pub fn labels(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    /// All multi-indices with `occ = v`, in lexicographic order.
    pub fn with_occ(v: &OccVector) -> Vec<MultiIndex> {
        fn rec(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if rest.iter().all(|&r| r == 0) {
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for i in 0..rest.len() {
                if rest[i] > 0 {
                    rest[i] -= 1;
                    cur.push(i);
                    rec(rest, cur, out);
                    cur.pop();
                    rest[i] += 1;
                }
            }
        }
        let mut out = Vec::new();
        rec(&mut v.entries().to_vec(), &mut Vec::new(), &mut out);
        out
    }

    /// All multi-indices over `n` generators with length at most `max_len`,
    /// ordered by length then lexicographically.
    pub fn all_up_to(n: usize, max_len: usize) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::empty()];
        let mut layer = vec![MultiIndex::empty()];
        for _ in 0..max_len {
            let next: Vec<MultiIndex> = layer
                .iter()
                .flat_map(|m| {
                    (0..n).map(move |i| {
                        let mut v = m.0.clone();
                        v.push(i);
                        MultiIndex(v)
                    })
                })
                .collect();
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

impl Deref for MultiIndex {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", x + 1)?;
        }
        write!(f, ")")
    }
}

pub fn occ(indices: &[usize], n: usize) -> OccVector {
    let mut v = vec![0; n];
    for &i in indices {
        assert!(i < n, "generator {i} out of range for n = {n}");
        v[i] += 1;
    }
    OccVector::new(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: usize,
    pub starred: bool,
}

impl Letter {
    pub fn plain(generator: usize) -> Self {
        Letter { generator, starred: false }
    }

    pub fn star(generator: usize) -> Self {
        Letter { generator, starred: true }
    }
}

/// A free word in `a_i`, `a_i*`. The empty word is the unit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn unit() -> Self {
        Word(Vec::new())
    }

    /// The word `a_mu a_sigma*` = `a_{mu_1} .. a_{mu_k} a_{sigma_m}* .. a_{sigma_1}*`.
    pub fn from_normal(mu: &[usize], sigma: &[usize]) -> Self {
        let mut letters: Vec<Letter> = mu.iter().map(|&i| Letter::plain(i)).collect();
        letters.extend(sigma.iter().rev().map(|&i| Letter::star(i)));
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn check_range(&self, n: usize) -> Result<()> {
        match self.0.iter().find(|l| l.generator >= n) {
            Some(l) => Err(Error::GeneratorOutOfRange { index: l.generator + 1, n }),
            None => Ok(()),
        }
    }

    /// Number of (starred, unstarred) pairs with the starred letter to the left.
    pub fn inversions(&self) -> usize {
        let mut stars = 0;
        let mut inv = 0;
        for l in &self.0 {
            if l.starred {
                stars += 1;
            } else {
                inv += stars;
            }
        }
        inv
    }

    pub(crate) fn letters_mut(&mut self) -> &mut Vec<Letter> {
        &mut self.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "a{}{}", l.generator + 1, if l.starred { "*" } else { "" })?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Grammar: `letter := 'a' INT '*'?`, `word := letter*` (whitespace separated).
    /// Indices are 1-based. The empty string (or `1`) is the unit.
    fn from_str(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let body = tok
                .strip_prefix('a')
                .ok_or_else(|| Error::Parse(format!("letter {tok:?} must start with 'a'")))?;
            let (digits, starred) = match body.strip_suffix('*') {
                Some(d) => (d, true),
                None => (body, false),
            };
            let label: usize = digits
                .parse()
                .map_err(|_| Error::Parse(format!("letter {tok:?} needs a positive index")))?;
            if label == 0 {
                return Err(Error::Parse(format!("letter {tok:?}: indices start at 1")));
            }
            letters.push(Letter { generator: label - 1, starred });
        }
        Ok(Word(letters))
    }
}

/// `coeff * a_mu a_sigma*`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalMonomial {
    pub coeff: Complex64,
    pub mu: MultiIndex,
    pub sigma: MultiIndex,
}

impl NormalMonomial {
    pub fn new(coeff: Complex64, mu: MultiIndex, sigma: MultiIndex) -> Self {
        NormalMonomial { coeff, mu, sigma }
    }

    pub fn unit() -> Self {
        Self::new(Complex64::new(1.0, 0.0), MultiIndex::empty(), MultiIndex::empty())
    }

    pub fn is_zero(&self) -> bool {
        self.coeff == Complex64::new(0.0, 0.0)
    }

    /// `occ(mu) = occ(sigma)`, i.e. the monomial lies in the gauge-invariant span.
    pub fn occ_balanced(&self, n: usize) -> bool {
        self.mu.occ(n) == self.sigma.occ(n)
    }

    pub fn to_word(&self) -> Word {
        Word::from_normal(&self.mu, &self.sigma)
    }

    /// Scalar value if no letters survive.
    pub fn as_scalar(&self) -> Option<Complex64> {
        (self.mu.is_empty() && self.sigma.is_empty()).then_some(self.coeff)
    }
}

impl fmt::Display for NormalMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff == Complex64::new(0.0, 0.0) {
            return write!(f, "0");
        }
        write!(f, "({}) * {}", fmt_complex(self.coeff), self.to_word())
    }
}

pub fn fmt_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.im < 0.0 {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

/// A finite linear combination of normal monomials, keyed by `(mu, sigma)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Expression {
    terms: BTreeMap<(MultiIndex, MultiIndex), Complex64>,
}

impl Expression {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::scalar(Complex64::new(1.0, 0.0))
    }

    pub fn scalar(c: Complex64) -> Self {
        Self::monomial(c, MultiIndex::empty(), MultiIndex::empty())
    }

    pub fn monomial(c: Complex64, mu: MultiIndex, sigma: MultiIndex) -> Self {
        let mut e = Self::zero();
        e.add_term(c, mu, sigma);
        e
    }

    pub fn from_monomial(m: &NormalMonomial) -> Self {
        Self::monomial(m.coeff, m.mu.clone(), m.sigma.clone())
    }

    pub fn add_term(&mut self, c: Complex64, mu: MultiIndex, sigma: MultiIndex) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let key = (mu, sigma);
        let entry = self.terms.entry(key.clone()).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &MultiIndex, Complex64)> {
        self.terms.iter().map(|((m, s), c)| (m, s, *c))
    }

    pub fn monomials(&self) -> impl Iterator<Item = NormalMonomial> + '_ {
        self.terms
            .iter()
            .map(|((m, s), c)| NormalMonomial::new(*c, m.clone(), s.clone()))
    }

    pub fn coeff(&self, mu: &MultiIndex, sigma: &MultiIndex) -> Complex64 {
        self.terms
            .get(&(mu.clone(), sigma.clone()))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Expression) -> Expression {
        let mut out = self.clone();
        for ((m, s), c) in &other.terms {
            out.add_term(*c, m.clone(), s.clone());
        }
        out
    }

    pub fn sub(&self, other: &Expression) -> Expression {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Expression {
        let mut out = Expression::zero();
        for ((m, s), x) in &self.terms {
            out.add_term(*x * c, m.clone(), s.clone());
        }
        out
    }

    /// Drops coefficients with modulus at most `tol`.
    pub fn pruned(&self, tol: f64) -> Expression {
        Expression {
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() > tol)
                .map(|(k, c)| (k.clone(), *c))
                .collect(),
        }
    }

    /// Coefficientwise comparison; missing keys count as zero.
    pub fn approx_eq(&self, other: &Expression, tol: f64) -> bool {
        self.max_diff(other) <= tol
    }

    pub fn max_diff(&self, other: &Expression) -> f64 {
        let keys = self.terms.keys().chain(other.terms.keys());
        keys.map(|(m, s)| (self.coeff(m, s) - other.coeff(m, s)).norm())
            .fold(0.0, f64::max)
    }

    /// True iff every monomial satisfies `occ(mu) = occ(sigma)`.
    pub fn is_balanced(&self, n: usize) -> bool {
        self.terms.keys().all(|(m, s)| m.occ(n) == s.occ(n))
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|(m, s)| m.len() + s.len()).max().unwrap_or(0)
    }
}

impl FromIterator<NormalMonomial> for Expression {
    fn from_iter<I: IntoIterator<Item = NormalMonomial>>(iter: I) -> Self {
        let mut e = Expression::zero();
        for m in iter {
            e.add_term(m.coeff, m.mu, m.sigma);
        }
        e
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, m) in self.monomials().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}
