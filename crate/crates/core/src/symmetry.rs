//! Unitary symmetries of the relations, the gauge torus action and the
//! conditional expectation onto the occupation-balanced span.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, real, CMatrix};
use crate::rep::{creation, GradedOperator, TruncatedFock};
use crate::rewrite::QMatrix;
use crate::words::{occ, Expression};

/// `u^† u = 1` threshold for [`UnitaryCandidate`].
pub const UNITARY_TOL: f64 = 1e-9;
/// `|w_i| = 1` threshold for [`TorusElement`].
pub const TORUS_TOL: f64 = 1e-12;
/// Threshold separating structural zeros in [`lemma1_test`].
pub const LEMMA1_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryCandidate(CMatrix);

impl UnitaryCandidate {
    pub fn new(u: CMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::NotUnitary(f64::INFINITY));
        }
        let n = u.nrows();
        let defect = (u.adjoint() * &u - CMatrix::identity(n, n)).camax();
        if defect.is_nan() || defect >= UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(UnitaryCandidate(u))
    }

    pub fn identity(n: usize) -> Self {
        UnitaryCandidate(CMatrix::identity(n, n))
    }

    pub fn diagonal(w: &TorusElement) -> Self {
        UnitaryCandidate(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(w.0.clone())))
    }

    /// Permutation matrix with `u[(sigma(i), i)] = 1`.
    pub fn permutation(sigma: &[usize]) -> Result<Self> {
        let n = sigma.len();
        let mut u = CMatrix::zeros(n, n);
        for (i, &s) in sigma.iter().enumerate() {
            if s >= n {
                return Err(Error::GeneratorOutOfRange { index: s, n });
            }
            u[(s, i)] = real(1.0);
        }
        Self::new(u)
    }

    /// Rotation by `theta` in the coordinate plane `(a, b)`.
    pub fn rotation(n: usize, a: usize, b: usize, theta: f64) -> Self {
        let mut u = CMatrix::identity(n, n);
        u[(a, a)] = real(theta.cos());
        u[(b, b)] = real(theta.cos());
        u[(a, b)] = real(-theta.sin());
        u[(b, a)] = real(theta.sin());
        UnitaryCandidate(u)
    }

    /// Haar-like sample: QR of a complex Gaussian matrix with the phases of `R` removed.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        let g = CMatrix::from_fn(n, n, |_, _| {
            c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        });
        let qr = g.qr();
        let (mut q, r) = (qr.q(), qr.r());
        for j in 0..n {
            let d = r[(j, j)];
            if d.norm() > 0.0 {
                let phase = d / d.norm();
                let mut col = q.column_mut(j);
                col *= phase;
            }
        }
        UnitaryCandidate(q)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn adjoint(&self) -> Self {
        UnitaryCandidate(self.0.adjoint())
    }

    pub fn mul(&self, other: &UnitaryCandidate) -> Self {
        UnitaryCandidate(&self.0 * &other.0)
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..n).all(|j| i == j || self.0[(i, j)].norm() < LEMMA1_TOL))
    }
}

/// A point `w` of the torus `T^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusElement(Vec<Complex64>);

impl TorusElement {
    pub fn new(w: Vec<Complex64>) -> Result<Self> {
        for (i, z) in w.iter().enumerate() {
            if (z.norm() - 1.0).abs() >= TORUS_TOL || !z.norm().is_finite() {
                return Err(Error::NotOnTorus { index: i + 1, modulus: z.norm() });
            }
        }
        Ok(TorusElement(w))
    }

    pub fn from_phases(theta: &[f64]) -> Self {
        TorusElement(theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect())
    }

    pub fn one(n: usize) -> Self {
        TorusElement(vec![real(1.0); n])
    }

    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        let theta: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        Self::from_phases(&theta)
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }
}

/// Outcome of [`lemma1_test`]; the witness and worst term use 1-based labels.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma1Outcome {
    pub passed: bool,
    /// `(i, j, k, l)` maximizing `|conj(u_ki) u_lj (q_kl - q_ij)|`.
    pub witness: Option<[usize; 4]>,
    pub worst: f64,
}

/// `conj(u_ki) u_lj (q_kl - q_ij) = 0` for all `i, j, k, l`, within [`LEMMA1_TOL`].
pub fn lemma1_test(u: &UnitaryCandidate, q: &QMatrix) -> Lemma1Outcome {
    let n = q.n();
    assert_eq!(u.n(), n, "unitary and q differ in size");
    let m = u.matrix();
    let mut worst = 0.0;
    let mut arg = [0; 4];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let val = (m[(k, i)].conj() * m[(l, j)] * (q.get(k, l) - q.get(i, j))).norm();
                    if val > worst {
                        worst = val;
                        arg = [i + 1, j + 1, k + 1, l + 1];
                    }
                }
            }
        }
    }
    let passed = worst < LEMMA1_TOL;
    Lemma1Outcome { passed, witness: (!passed).then_some(arg), worst }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct GroupAxiomReport {
    pub trials: usize,
    /// Diagonal and identity samples, all of which must pass.
    pub diagonal_passed: usize,
    /// Random (generically non-diagonal) samples passing the test.
    pub random_passed: usize,
    /// Products `u v` and adjoints `u^†` of passing samples that pass again.
    pub closure_checked: usize,
    pub closure_failed: usize,
    /// `Some(count)` of non-diagonal samples that failed, when `q` has distinct diagonal entries.
    pub distinct_diagonal_rejections: Option<usize>,
    pub ok: bool,
}

fn has_distinct_diagonal(q: &QMatrix) -> bool {
    let n = q.n();
    (0..n).all(|i| (i + 1..n).all(|j| (q.get(i, i) - q.get(j, j)).norm() > LEMMA1_TOL))
}

/// Samples diagonal and random unitaries and checks closure under products and inverses.
pub fn group_axiom_sample(q: &QMatrix, trials: usize, seed: u64) -> GroupAxiomReport {
    let n = q.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GroupAxiomReport { trials, ..Default::default() };
    let mut passing = vec![UnitaryCandidate::identity(n)];
    report.diagonal_passed += lemma1_test(&passing[0], q).passed as usize;
    for _ in 0..trials {
        let d = UnitaryCandidate::diagonal(&TorusElement::random(n, &mut rng));
        if lemma1_test(&d, q).passed {
            report.diagonal_passed += 1;
            passing.push(d);
        }
        let u = UnitaryCandidate::random(n, &mut rng);
        if lemma1_test(&u, q).passed {
            report.random_passed += 1;
            passing.push(u);
        }
    }
    for (a, u) in passing.iter().enumerate() {
        let v = &passing[(a * 7 + 3) % passing.len()];
        for candidate in [u.adjoint(), u.mul(v)] {
            report.closure_checked += 1;
            if !lemma1_test(&candidate, q).passed {
                report.closure_failed += 1;
            }
        }
    }
    if has_distinct_diagonal(q) && n >= 2 {
        let mut rejected = 0;
        for _ in 0..trials {
            let u = UnitaryCandidate::random(n, &mut rng);
            if !u.is_diagonal() && !lemma1_test(&u, q).passed {
                rejected += 1;
            }
        }
        report.distinct_diagonal_rejections = Some(rejected);
    }
    report.ok = report.diagonal_passed == trials + 1
        && report.closure_failed == 0
        && report.distinct_diagonal_rejections.is_none_or(|r| r == trials);
    report
}

/// `Psi_w`: scales `a_mu a_sigma*` by `prod_i w_i^{occ_i(mu)} conj(w_i)^{occ_i(sigma)}`.
pub fn torus_act(w: &TorusElement, x: &Expression) -> Expression {
    let n = w.n();
    let mut out = Expression::zero();
    for (mu, sigma, coeff) in x.terms() {
        let mut factor = real(1.0);
        for (i, (&a, &b)) in occ(mu, n).entries().iter().zip(occ(sigma, n).entries()).enumerate() {
            factor *= w.0[i].powu(a as u32) * w.0[i].conj().powu(b as u32);
        }
        out.add_term(coeff * factor, mu.clone(), sigma.clone());
    }
    out
}

/// Torus average: keeps the balanced monomials verbatim and deletes the rest.
pub fn conditional_expectation(x: &Expression, n: usize) -> Expression {
    let mut out = Expression::zero();
    for (mu, sigma, coeff) in x.terms() {
        if occ(mu, n) == occ(sigma, n) {
            out.add_term(coeff, mu.clone(), sigma.clone());
        }
    }
    out
}

/// Transformed generators `a_i' = sum_j a_j u_ji` in the truncated representation.
pub fn transformed_generators(u: &UnitaryCandidate, t: &TruncatedFock) -> Vec<GradedOperator> {
    let n = t.n();
    (0..n)
        .map(|i| {
            (0..n).fold(GradedOperator::zero(), |acc, j| {
                acc.add(&creation(j, t).scale(u.matrix()[(j, i)]))
            })
        })
        .collect()
}

/// Worst residual of `a_i'* a_j' - q_ij a_j' a_i'* - delta_ij` below the truncation boundary.
pub fn transformed_relation_residual(u: &UnitaryCandidate, t: &TruncatedFock) -> f64 {
    let gens = transformed_generators(u, t);
    let n = t.n();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let ai = &gens[i];
            let aj = &gens[j];
            let mut r = ai
                .adjoint()
                .compose(aj)
                .sub(&aj.compose(&ai.adjoint()).scale(t.q().get(i, j)));
            if i == j {
                r = r.sub(&t.identity());
            }
            worst = worst.max(r.restrict_domain(|v| t.is_interior(v)).norm());
        }
    }
    worst
}
