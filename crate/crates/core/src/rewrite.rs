//! Normal-form rewriting for the isometry relations
//! `a_i* a_j = q_ij a_j a_i*` (i != j) and `a_i* a_i = 1`.
//!
//! A redex is an adjacent pair `(a_i*, a_j)`. Two redexes never overlap, so the
//! system has no critical pairs and every reduction order reaches the same
//! normal monomial `c * a_mu a_sigma*`.

use std::fmt;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{Expression, Letter, MultiIndex, NormalMonomial, Word};

/// Tolerance for the conjugate-symmetry and real-diagonal checks on input matrices.
const SYMMETRY_TOL: f64 = 1e-12;

/// Deformation parameters `(q_ij)`: `q_ji = conj(q_ij)`, real diagonal, `max |q_ij| < 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct QMatrix {
    n: usize,
    q: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct QMatrixJson {
    n: usize,
    q: Vec<Vec<[f64; 2]>>,
}

impl QMatrix {
    pub fn new(n: usize, rows: Vec<Vec<Complex64>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidQ("n must be at least 1".into()));
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidQ(format!("q must be an {n}x{n} matrix")));
        }
        let q: Vec<Complex64> = rows.into_iter().flatten().collect();
        let m = QMatrix { n, q };
        m.validate()?;
        Ok(m)
    }

    /// The undeformed (Cuntz-Toeplitz) case `q = 0`.
    pub fn zero(n: usize) -> Self {
        QMatrix { n, q: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    /// Two generators with a single off-diagonal parameter `q_12` and zero diagonal.
    pub fn two(q12: Complex64) -> Result<Self> {
        let z = Complex64::new(0.0, 0.0);
        Self::new(2, vec![vec![z, q12], vec![q12.conj(), z]])
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let x = self.get(i, j);
                if !(x.re.is_finite() && x.im.is_finite()) {
                    return Err(Error::InvalidQ(format!("q_{}{} is not finite", i + 1, j + 1)));
                }
                if x.norm() >= 1.0 {
                    return Err(Error::InvalidQ(format!(
                        "modulus bound max|q_ij| < 1 violated: |q_{}{}| = {}",
                        i + 1,
                        j + 1,
                        x.norm()
                    )));
                }
                if i == j && x.im.abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidQ(format!(
                        "diagonal entry q_{0}{0} must be real (q_ji = conj(q_ij) with i = j)",
                        i + 1
                    )));
                }
                if i < j && (self.get(j, i) - x.conj()).norm() > SYMMETRY_TOL {
                    return Err(Error::InvalidQ(format!(
                        "hermitian symmetry q_ji = conj(q_ij) violated at (i, j) = ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `q_ij` with 0-based indices.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.q[i * self.n + j]
    }

    pub fn max_modulus(&self) -> f64 {
        self.q.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i) == Complex64::new(0.0, 0.0))
    }

    /// Random parameters with zero diagonal; off-diagonal entries get uniform
    /// phases and moduli, rescaled so that `max |q_ij|` equals `max_modulus` exactly.
    pub fn random_isom(n: usize, max_modulus: f64, seed: u64) -> Result<Self> {
        check_max_modulus(max_modulus)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = QMatrix::zero(n);
        for i in 0..n {
            for j in i + 1..n {
                let r: f64 = rng.random_range(0.05..1.0);
                let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let z = Complex64::from_polar(r, phase);
                m.q[i * n + j] = z;
                m.q[j * n + i] = z.conj();
            }
        }
        m.rescale(max_modulus);
        Ok(m)
    }

    /// Random parameters with pairwise-distinct real diagonal entries (general q-CCR mode).
    pub fn random_general(n: usize, max_modulus: f64, seed: u64) -> Result<Self> {
        let mut m = Self::random_isom(n, max_modulus, seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        // evenly spaced values, jittered, keep them distinct
        for i in 0..n {
            let base = -max_modulus + (2.0 * max_modulus) * (i as f64 + 0.5) / n as f64;
            let jitter = rng.random_range(-0.25..0.25) * max_modulus / n as f64;
            m.q[i * n + i] = Complex64::new(base + jitter, 0.0);
        }
        m.validate()?;
        Ok(m)
    }

    fn rescale(&mut self, max_modulus: f64) {
        let cur = self.max_modulus();
        if cur > 0.0 {
            let s = max_modulus / cur;
            for x in &mut self.q {
                *x *= s;
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: QMatrixJson = serde_json::from_str(text)
            .map_err(|e| Error::InvalidQ(format!("malformed q JSON: {e}")))?;
        let rows = raw
            .q
            .iter()
            .map(|r| r.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
            .collect();
        Self::new(raw.n, rows)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let raw = QMatrixJson {
            n: self.n,
            q: (0..self.n)
                .map(|i| (0..self.n).map(|j| [self.get(i, j).re, self.get(i, j).im]).collect())
                .collect(),
        };
        serde_json::to_string(&raw).expect("q matrix serializes")
    }
}

fn check_max_modulus(m: f64) -> Result<()> {
    if (0.0..1.0).contains(&m) {
        Ok(())
    } else {
        Err(Error::InvalidQ(format!("modulus bound max|q_ij| < 1 violated: requested {m}")))
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> =
                (0..self.n).map(|j| crate::words::fmt_complex(self.get(i, j))).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// A [`QMatrix`] with `q_ii = 0` for every `i`, so each `a_i` is an isometry.
#[derive(Clone, Debug, PartialEq)]
pub struct IsomQ(QMatrix);

impl IsomQ {
    pub fn new(q: QMatrix) -> Result<Self> {
        if !q.has_zero_diagonal() {
            let i = (0..q.n()).find(|&i| q.get(i, i) != Complex64::new(0.0, 0.0)).unwrap();
            return Err(Error::NotIsometric(format!(
                "zero diagonal required, but q_{0}{0} = {1}",
                i + 1,
                q.get(i, i)
            )));
        }
        Ok(IsomQ(q))
    }

    pub fn zero(n: usize) -> Self {
        IsomQ(QMatrix::zero(n))
    }

    pub fn random(n: usize, max_modulus: f64, seed: u64) -> Result<Self> {
        Ok(IsomQ(QMatrix::random_isom(n, max_modulus, seed)?))
    }

    pub fn q(&self) -> &QMatrix {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0.get(i, j)
    }
}

impl TryFrom<QMatrix> for IsomQ {
    type Error = Error;

    fn try_from(q: QMatrix) -> Result<Self> {
        IsomQ::new(q)
    }
}

impl AsRef<QMatrix> for IsomQ {
    fn as_ref(&self) -> &QMatrix {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Leftmost,
    Rightmost,
}

/// Outcome of a full reduction with step bookkeeping.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub monomial: NormalMonomial,
    pub steps: usize,
    pub swaps: usize,
}

fn is_redex(letters: &[Letter], pos: usize) -> bool {
    pos + 1 < letters.len() && letters[pos].starred && !letters[pos + 1].starred
}

/// Applies one relation at `pos`, returning the scalar produced and the new word.
pub fn rewrite_step(w: &Word, pos: usize, q: &IsomQ) -> Result<(Complex64, Word)> {
    let mut out = w.clone();
    let c = step_in_place(&mut out, pos, q)?;
    Ok((c, out))
}

fn step_in_place(w: &mut Word, pos: usize, q: &IsomQ) -> Result<Complex64> {
    let letters = w.letters_mut();
    if !is_redex(letters, pos) {
        return Err(Error::NotARedex { pos });
    }
    let (i, j) = (letters[pos].generator, letters[pos + 1].generator);
    if i == j {
        letters.drain(pos..pos + 2);
        Ok(Complex64::new(1.0, 0.0))
    } else {
        letters.swap(pos, pos + 1);
        Ok(q.get(i, j))
    }
}

/// Reduces `w` to `c * a_mu a_sigma*` with the chosen redex order.
pub fn reduce(w: &Word, q: &IsomQ, strategy: Strategy) -> Result<Reduction> {
    w.check_range(q.n())?;
    let mut cur = w.clone();
    let mut coeff = Complex64::new(1.0, 0.0);
    let (mut steps, mut swaps) = (0, 0);
    loop {
        let letters = cur.letters();
        let found = match strategy {
            Strategy::Leftmost => (0..letters.len().saturating_sub(1)).find(|&p| is_redex(letters, p)),
            Strategy::Rightmost => {
                (0..letters.len().saturating_sub(1)).rev().find(|&p| is_redex(letters, p))
            }
        };
        let Some(pos) = found else { break };
        let before = cur.len();
        coeff *= step_in_place(&mut cur, pos, q)?;
        steps += 1;
        if cur.len() == before {
            swaps += 1;
        }
    }
    let mu = cur.letters().iter().take_while(|l| !l.starred).map(|l| l.generator).collect();
    // the starred tail reads a_{s_m}* .. a_{s_1}*, so sigma is its reverse
    let sigma = cur
        .letters()
        .iter()
        .rev()
        .take_while(|l| l.starred)
        .map(|l| l.generator)
        .collect();
    Ok(Reduction { monomial: NormalMonomial::new(coeff, MultiIndex::new(mu), MultiIndex::new(sigma)), steps, swaps })
}

/// Normal form using the leftmost-redex strategy.
pub fn normal_form(w: &Word, q: &IsomQ) -> Result<NormalMonomial> {
    Ok(reduce(w, q, Strategy::Leftmost)?.monomial)
}

/// Product of two normal monomials, `(a_mu1 a_sigma1*)(a_mu2 a_sigma2*)`.
pub fn multiply_monomials(x: &NormalMonomial, y: &NormalMonomial, q: &IsomQ) -> NormalMonomial {
    let word = x.to_word().concat(&y.to_word());
    let mut m = normal_form(&word, q).expect("normal monomials use in-range generators");
    m.coeff *= x.coeff * y.coeff;
    m
}

/// Bilinear product of expressions.
pub fn multiply(x: &Expression, y: &Expression, q: &IsomQ) -> Expression {
    let mut out = Expression::zero();
    for a in x.monomials() {
        for b in y.monomials() {
            let m = multiply_monomials(&a, &b, q);
            out.add_term(m.coeff, m.mu, m.sigma);
        }
    }
    out
}

/// The involution `(c a_mu a_sigma*)* = conj(c) a_sigma a_mu*`.
pub fn star(x: &Expression) -> Expression {
    let mut out = Expression::zero();
    for (mu, sigma, c) in x.terms() {
        out.add_term(c.conj(), sigma.clone(), mu.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::COEFF_TOL;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn q2() -> IsomQ {
        IsomQ::new(QMatrix::two(c(0.3, 0.4)).unwrap()).unwrap()
    }

    fn word(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn mono(mu: &[usize], sigma: &[usize]) -> Expression {
        Expression::monomial(c(1.0, 0.0), MultiIndex::from_labels(mu), MultiIndex::from_labels(sigma))
    }

    #[test]
    fn step_isometry() {
        let (s, w) = rewrite_step(&word("a1* a1"), 0, &q2()).unwrap();
        assert_eq!(s, c(1.0, 0.0));
        assert!(w.is_empty());
    }

    #[test]
    fn step_swap() {
        let q = q2();
        let (s, w) = rewrite_step(&word("a1* a2"), 0, &q).unwrap();
        assert_eq!(s, q.get(0, 1));
        assert_eq!(w, word("a2 a1*"));
        let (s, w) = rewrite_step(&word("a2 a1* a2"), 1, &q).unwrap();
        assert_eq!(s, q.get(0, 1));
        assert_eq!(w, word("a2 a2 a1*"));
    }

    #[test]
    fn step_rejects_non_redex() {
        let q = q2();
        assert_eq!(rewrite_step(&word("a1 a1*"), 0, &q), Err(Error::NotARedex { pos: 0 }));
        assert_eq!(rewrite_step(&word("a1*"), 0, &q), Err(Error::NotARedex { pos: 0 }));
        assert_eq!(rewrite_step(&word("a1* a1"), 1, &q), Err(Error::NotARedex { pos: 1 }));
    }

    #[test]
    fn normal_forms() {
        let q = q2();
        let m = normal_form(&word("a1* a1"), &q).unwrap();
        assert_eq!(m, NormalMonomial::unit());
        let m = normal_form(&word("a1* a2 a1"), &q).unwrap();
        assert_eq!(m.coeff, q.get(0, 1));
        assert_eq!(m.mu, MultiIndex::from_labels(&[2]));
        assert!(m.sigma.is_empty());
        // (a2 a1*)(a1 a2*)
        let m = normal_form(&word("a2 a1* a1 a2*"), &q).unwrap();
        assert_eq!(m.coeff, c(1.0, 0.0));
        assert_eq!(m.mu, MultiIndex::from_labels(&[2]));
        assert_eq!(m.sigma, MultiIndex::from_labels(&[2]));
    }

    #[test]
    fn sigma_is_read_in_adjoint_order() {
        let q = q2();
        let m = normal_form(&word("a1 a2* a1*"), &q).unwrap();
        // a2* a1* = (a1 a2)*
        assert_eq!(m.sigma, MultiIndex::from_labels(&[1, 2]));
        assert_eq!(m.to_word(), word("a1 a2* a1*"));
    }

    #[test]
    fn products() {
        let q = q2();
        let x = mono(&[1], &[1]);
        assert!(multiply(&Expression::one(), &x, &q).approx_eq(&x, 0.0));
        assert!(multiply(&x, &x, &q).approx_eq(&x, COEFF_TOL));
        let y = multiply(&mono(&[1], &[2]), &mono(&[2], &[1]), &q);
        assert!(y.approx_eq(&x, COEFF_TOL));
    }

    #[test]
    fn star_examples() {
        assert_eq!(star(&mono(&[1], &[2])), mono(&[2], &[1]));
        let z = c(0.2, -0.7);
        assert_eq!(star(&Expression::scalar(z)), Expression::scalar(z.conj()));
    }

    #[test]
    fn out_of_range_generator() {
        assert!(matches!(
            reduce(&word("a3"), &q2(), Strategy::Leftmost),
            Err(Error::GeneratorOutOfRange { index: 3, n: 2 })
        ));
    }

    #[test]
    fn validation_names_invariant() {
        let z = c(0.0, 0.0);
        let e = QMatrix::new(2, vec![vec![z, c(0.5, 0.0)], vec![c(0.4, 0.0), z]]).unwrap_err();
        assert!(e.to_string().contains("q_ji = conj(q_ij)"), "{e}");
        let e = QMatrix::new(2, vec![vec![z, c(1.0, 0.0)], vec![c(1.0, 0.0), z]]).unwrap_err();
        assert!(e.to_string().contains("max|q_ij| < 1"), "{e}");
        let general = QMatrix::new(2, vec![vec![c(0.5, 0.0), z], vec![z, z]]).unwrap();
        let e = IsomQ::new(general).unwrap_err();
        assert!(e.to_string().contains("zero diagonal"), "{e}");
    }

    #[test]
    fn json_round_trip() {
        let q = QMatrix::random_isom(3, 0.8, 7).unwrap();
        let back = QMatrix::from_json(&q.to_json()).unwrap();
        assert_eq!(q, back);
        let q = QMatrix::from_json(r#"{"n": 2, "q": [[[0,0],[0.5,0.1]],[[0.5,-0.1],[0,0]]]}"#).unwrap();
        assert_eq!(q.get(0, 1), c(0.5, 0.1));
    }

    #[test]
    fn random_presets() {
        let q = QMatrix::random_isom(3, 0.9, 42).unwrap();
        assert!((q.max_modulus() - 0.9).abs() < 1e-15);
        assert!(q.has_zero_diagonal());
        assert_eq!(q, QMatrix::random_isom(3, 0.9, 42).unwrap());
        let g = QMatrix::random_general(3, 0.9, 42).unwrap();
        let d: Vec<f64> = (0..3).map(|i| g.get(i, i).re).collect();
        assert!(d[0] != d[1] && d[1] != d[2] && d[0] != d[2]);
        assert!(QMatrix::random_isom(2, 1.0, 0).is_err());
    }

    mod props {
        use super::{reduce, IsomQ, Letter, Word};
        use proptest::prelude::*;

        fn any_word(n: usize, max_len: usize) -> impl proptest::strategy::Strategy<Value = Word> {
            prop::collection::vec((0..n, any::<bool>()), 0..=max_len).prop_map(|v| {
                Word::new(v.into_iter().map(|(g, s)| Letter { generator: g, starred: s }).collect())
            })
        }

        proptest! {
            #[test]
            fn confluence(w in any_word(3, 8), seed in 0u64..1000) {
                let q = IsomQ::random(3, 0.9, seed).unwrap();
                let l = reduce(&w, &q, crate::rewrite::Strategy::Leftmost).unwrap();
                let r = reduce(&w, &q, crate::rewrite::Strategy::Rightmost).unwrap();
                prop_assert_eq!(&l.monomial.mu, &r.monomial.mu);
                prop_assert_eq!(&l.monomial.sigma, &r.monomial.sigma);
                prop_assert!((l.monomial.coeff - r.monomial.coeff).norm() < 1e-12);
            }

            #[test]
            fn termination_and_grading(w in any_word(3, 8), seed in 0u64..1000) {
                let q = IsomQ::random(3, 0.9, seed).unwrap();
                let red = reduce(&w, &q, crate::rewrite::Strategy::Leftmost).unwrap();
                let len = w.len();
                prop_assert!(red.steps <= len * len + len);
                prop_assert!(red.swaps <= w.inversions());
                let bound = q.q().max_modulus().powi(red.swaps as i32);
                prop_assert!(red.monomial.coeff.norm() <= bound + 1e-15);
                prop_assert!(red.monomial.coeff.norm() <= 1.0);
                prop_assert!(!red.monomial.is_zero() || q.q().max_modulus() == 0.0 || red.swaps > 0);
            }
        }
    }
}
