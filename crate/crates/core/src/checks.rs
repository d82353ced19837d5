//! The ten acceptance checks as named, timed functions.
//!
//! Each check runs over a [`Suite`] of parameter matrices; the acceptance test
//! target and the `verify` subcommand both drive this module.

use std::collections::BTreeSet;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bratteli::{diagram_numeric, disagreements};
use crate::error::Result;
use crate::fock::{gram_block, lemma3_check};
use crate::gicar::{decompose, faithfulness_rank, GicarSpan};
use crate::ideal::verify_ideal;
use crate::linalg::{c, real};
use crate::rep::{verify_relations, TruncatedFock, RELATION_TOL};
use crate::rewrite::{multiply, reduce, IsomQ, QMatrix, Strategy};
use crate::symmetry::{
    conditional_expectation, group_axiom_sample, lemma1_test, torus_act, TorusElement, UnitaryCandidate,
};
use crate::words::{Expression, Letter, MultiIndex, OccVector, Word};

/// Largest generator count the checks are sized for.
pub const MAX_N: usize = 3;

/// Parameter matrices the checks run over, plus the seed for every random choice.
#[derive(Clone, Debug)]
pub struct Suite {
    pub qs: Vec<IsomQ>,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub seconds: f64,
    pub limit_seconds: f64,
    pub within_time: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {:<22} {:>7.2}s / {:>4.0}s  {}",
            if self.passed && self.within_time { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.limit_seconds,
            self.detail
        )
    }

    pub fn ok(&self) -> bool {
        self.passed && self.within_time
    }
}

/// Name and time limit (seconds) of each check, in order.
pub const CHECKS: [(&str, f64); 10] = [
    ("confluence", 5.0),
    ("lemma3-bridge", 10.0),
    ("gram-positivity", 5.0),
    ("fock-relations", 10.0),
    ("faithfulness-rank", 30.0),
    ("block-units", 30.0),
    ("bratteli", 60.0),
    ("torus-fixed-points", 5.0),
    ("symmetry-membership", 5.0),
    ("compact-ideal", 30.0),
];

impl Suite {
    /// Five draws each for `n = 2` and `n = 3` at `max |q| = 0.9`.
    pub fn acceptance(seed: u64) -> Result<Self> {
        let mut qs = Vec::new();
        for n in [2, 3] {
            for j in 0..5 {
                qs.push(IsomQ::random(n, 0.9, seed.wrapping_add(100 * n as u64 + j))?);
            }
        }
        Ok(Suite { qs, seed })
    }

    pub fn single(q: IsomQ, seed: u64) -> Self {
        Suite { qs: vec![q], seed }
    }

    fn ns(&self) -> BTreeSet<usize> {
        self.qs.iter().map(|q| q.n()).collect()
    }

    fn of_n(&self, n: usize) -> impl Iterator<Item = &IsomQ> {
        self.qs.iter().filter(move |q| q.n() == n)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    /// Runs one check by its 1-based id.
    pub fn run(&self, id: usize) -> CheckOutcome {
        let (name, limit) = CHECKS[id - 1];
        let start = Instant::now();
        let result = match id {
            1 => self.confluence(),
            2 => self.lemma3_bridge(),
            3 => self.gram_positivity(),
            4 => self.fock_relations(),
            5 => self.faithfulness(),
            6 => self.block_units(),
            7 => self.bratteli(),
            8 => self.torus_fixed_points(),
            9 => self.symmetry_membership(),
            10 => self.compact_ideal(),
            _ => panic!("unknown check {id}"),
        };
        let seconds = start.elapsed().as_secs_f64();
        let (passed, detail) = match result {
            Ok(pair) => pair,
            Err(e) => (false, format!("error: {e}")),
        };
        CheckOutcome { id, name, passed, seconds, limit_seconds: limit, within_time: seconds < limit, detail }
    }

    pub fn run_all(&self) -> Vec<CheckOutcome> {
        (1..=CHECKS.len()).map(|id| self.run(id)).collect()
    }

    fn confluence(&self) -> Result<(bool, String)> {
        let mut rng = self.rng(1);
        let per_q = 1000usize.div_ceil(self.qs.len()).max(100);
        let (mut words, mut worst) = (0, 0.0f64);
        for q in &self.qs {
            for _ in 0..per_q {
                let len = rng.random_range(0..=8);
                let letters = (0..len)
                    .map(|_| Letter { generator: rng.random_range(0..q.n()), starred: rng.random_bool(0.5) })
                    .collect();
                let w = Word::new(letters);
                let l = reduce(&w, q, Strategy::Leftmost)?.monomial;
                let r = reduce(&w, q, Strategy::Rightmost)?.monomial;
                let diff = if l.mu == r.mu && l.sigma == r.sigma { (l.coeff - r.coeff).norm() } else { f64::INFINITY };
                worst = worst.max(diff);
                words += 1;
            }
        }
        Ok((worst < 1e-12, format!("{words} words, worst |Δc| = {worst:.1e}")))
    }

    fn lemma3_bridge(&self) -> Result<(bool, String)> {
        let (mut pairs, mut worst) = (0, 0.0f64);
        for q in &self.qs {
            let words = MultiIndex::all_up_to(q.n(), 4);
            for mu in &words {
                for sigma in words.iter().filter(|s| s.len() == mu.len()) {
                    let (rewritten, recursion) = lemma3_check(mu, sigma, q);
                    worst = worst.max((rewritten - recursion).norm());
                    pairs += 1;
                }
            }
        }
        Ok((worst < 1e-9, format!("{pairs} pairs, worst diff = {worst:.1e}")))
    }

    fn gram_positivity(&self) -> Result<(bool, String)> {
        let mut qs: Vec<QMatrix> = self.qs.iter().map(|q| q.q().clone()).collect();
        for n in self.ns() {
            for j in 0..5 {
                qs.push(QMatrix::random_isom(n, 0.95, self.seed.wrapping_add(7_000 + 10 * n as u64 + j))?);
            }
        }
        let (mut blocks, mut min_pivot, mut det_err) = (0, f64::INFINITY, 0.0f64);
        let mut failed = None;
        for q in &qs {
            let level = match q.n() {
                1 => 6,
                2 => 5,
                _ => 4,
            };
            for v in OccVector::up_to_level(q.n(), level) {
                match gram_block(&v, q) {
                    Ok(g) => min_pivot = min_pivot.min(g.min_pivot),
                    Err(e) => failed = failed.or(Some(e.to_string())),
                }
                blocks += 1;
            }
            if q.n() == 2 {
                let g = gram_block(&OccVector::new(vec![1, 1]), q)?;
                let want = real(1.0 - q.get(0, 1).norm_sqr());
                det_err = det_err.max((g.determinant() - want).norm());
            }
        }
        let passed = failed.is_none() && det_err < 1e-12;
        let mut detail = format!("{blocks} blocks, min pivot {min_pivot:.2e}, det error {det_err:.1e}");
        if let Some(f) = failed {
            detail.push_str(&format!("; {f}"));
        }
        Ok((passed, detail))
    }

    fn fock_relations(&self) -> Result<(bool, String)> {
        let mut worst = 0.0f64;
        for q in &self.qs {
            let t = TruncatedFock::new(q.q(), 4)?;
            worst = worst.max(verify_relations(&t, RELATION_TOL)?.max_residual);
        }
        Ok((worst < RELATION_TOL, format!("L = 4, levels <= 3, worst residual {worst:.1e}")))
    }

    fn filtration_levels(n: usize) -> Vec<usize> {
        match n {
            1 => vec![1, 2, 3],
            2 => vec![1, 2],
            _ => vec![1],
        }
    }

    fn faithfulness(&self) -> Result<(bool, String)> {
        let mut passed = true;
        let mut seen = BTreeSet::new();
        for q in &self.qs {
            let n = q.n();
            for k in Self::filtration_levels(n) {
                let t = TruncatedFock::for_filtration(q.q(), k)?;
                let got = faithfulness_rank(k, &t) as u64;
                let want = GicarSpan::expected_dim(n, k);
                let literal = match (n, k) {
                    (2, 1) => Some(7),
                    (2, 2) => Some(63),
                    (3, 1) => Some(52),
                    _ => None,
                };
                passed &= got == want && literal.is_none_or(|l| l == want);
                seen.insert(format!("n={n},k={k}:{got}/{want}"));
            }
        }
        Ok((passed, seen.into_iter().collect::<Vec<_>>().join(" ")))
    }

    fn block_units(&self) -> Result<(bool, String)> {
        let (mut runs, mut worst_op, mut worst_comm) = (0, 0.0f64, 0.0f64);
        for q in &self.qs {
            for k in Self::filtration_levels(q.n()) {
                let t = TruncatedFock::for_filtration(q.q(), k)?;
                let d = decompose(k, &t)?;
                for b in &d.blocks {
                    worst_op = worst_op
                        .max(b.checks.idempotent)
                        .max(b.checks.self_adjoint)
                        .max(b.checks.own_block_identity);
                    worst_comm = worst_comm.max(b.checks.central);
                }
                worst_op = worst_op.max(d.orthogonality).max(d.partition);
                runs += 1;
            }
        }
        Ok((
            true,
            format!("{runs} decompositions, worst unit residual {worst_op:.1e}, worst commutator {worst_comm:.1e}"),
        ))
    }

    fn bratteli(&self) -> Result<(bool, String)> {
        let mut passed = true;
        let mut pairs = 0;
        for n in self.ns() {
            let k_max = *Self::filtration_levels(n).last().expect("nonempty");
            let mut reference = None;
            for q in self.of_n(n) {
                for k in 1..=k_max {
                    let bad = disagreements(q.q(), k)?;
                    passed &= bad.is_empty();
                    pairs += OccVector::lattice_box(n, k).len() * OccVector::lattice_box(n, k + 1).len();
                }
                let d = diagram_numeric(q.q(), k_max)?;
                match &reference {
                    None => reference = Some(d.edges),
                    Some(edges) => passed &= *edges == d.edges,
                }
            }
        }
        Ok((passed, format!("{pairs} (v,u) pairs, {} draws", self.qs.len())))
    }

    fn torus_fixed_points(&self) -> Result<(bool, String)> {
        let mut rng = self.rng(8);
        let mut failures = Vec::new();
        for n in self.ns() {
            let q = self.of_n(n).next().expect("n from suite");
            for _ in 0..200 {
                let x = random_expression(n, &mut rng);
                let e = conditional_expectation(&x, n);
                for _ in 0..20 {
                    let w = TorusElement::random(n, &mut rng);
                    if !torus_act(&w, &e).approx_eq(&e, 1e-12) {
                        failures.push("E(x) not torus-fixed");
                    }
                }
                for y in [&x, &e] {
                    let fixed = (0..n).all(|i| {
                        let mut theta = vec![0.0; n];
                        theta[i] = rng.random_range(0.1..6.1);
                        torus_act(&TorusElement::from_phases(&theta), y).approx_eq(y, 1e-12)
                    });
                    if fixed != conditional_expectation(y, n).approx_eq(y, 1e-12) {
                        failures.push("circle-fixed differs from balanced");
                    }
                }
                if conditional_expectation(&e, n) != e {
                    failures.push("E not idempotent");
                }
            }
            if conditional_expectation(&Expression::one(), n) != Expression::one() {
                failures.push("E not unital");
            }
            for _ in 0..100 {
                let a = conditional_expectation(&random_expression(n, &mut rng), n);
                let b = conditional_expectation(&random_expression(n, &mut rng), n);
                let x = random_expression(n, &mut rng);
                let lhs = conditional_expectation(&multiply(&multiply(&a, &x, q), &b, q), n);
                let rhs = multiply(&multiply(&a, &conditional_expectation(&x, n), q), &b, q);
                if !lhs.approx_eq(&rhs, 1e-10) {
                    failures.push("bimodule property");
                }
            }
        }
        let detail = if failures.is_empty() {
            "200 expressions, 100 triples per n".to_string()
        } else {
            format!("{} failures, first: {}", failures.len(), failures[0])
        };
        Ok((failures.is_empty(), detail))
    }

    fn symmetry_membership(&self) -> Result<(bool, String)> {
        let mut rng = self.rng(9);
        let mut failures = Vec::new();
        for q in &self.qs {
            let n = q.n();
            if !lemma1_test(&UnitaryCandidate::identity(n), q.q()).passed {
                failures.push("identity rejected".to_string());
            }
            for _ in 0..50 {
                let d = UnitaryCandidate::diagonal(&TorusElement::random(n, &mut rng));
                if !lemma1_test(&d, q.q()).passed {
                    failures.push("diagonal unitary rejected".to_string());
                }
            }
            let report = group_axiom_sample(q.q(), 50, self.seed.wrapping_add(n as u64));
            if !report.ok {
                failures.push(format!("group axioms: {report:?}"));
            }
        }
        for n in self.ns().into_iter().filter(|&n| n >= 2) {
            let general = QMatrix::random_general(n, 0.9, self.seed.wrapping_add(900 + n as u64))?;
            for _ in 0..50 {
                let u = UnitaryCandidate::random(n, &mut rng);
                if u.is_diagonal() || lemma1_test(&u, &general).passed {
                    failures.push("non-diagonal unitary accepted for distinct q_ii".to_string());
                }
            }
        }
        let swap = UnitaryCandidate::permutation(&[1, 0])?;
        if !lemma1_test(&swap, &QMatrix::two(real(0.5))?).passed {
            failures.push("swap rejected for real q_12".to_string());
        }
        let imag = lemma1_test(&swap, &QMatrix::two(c(0.0, 0.5))?);
        if imag.passed || imag.witness.is_none() {
            failures.push("swap accepted for imaginary q_12".to_string());
        }
        let detail = if failures.is_empty() {
            format!("{} draws, 50 diagonal + 50 random unitaries each", self.qs.len())
        } else {
            format!("{} failures, first: {}", failures.len(), failures[0])
        };
        Ok((failures.is_empty(), detail))
    }

    fn compact_ideal(&self) -> Result<(bool, String)> {
        let mut passed = true;
        let (mut worst_product, mut worst_zero) = (0.0f64, 0.0f64);
        let mut units = 0;
        for n in self.ns() {
            let max_len = if n <= 2 { 2 } else { 1 };
            for q in self.of_n(n) {
                let t = TruncatedFock::new(q.q(), 4)?;
                let (r, _) = verify_ideal(&t, max_len)?;
                passed &= r.passed && r.rank_p == 1;
                worst_product = worst_product.max(r.product_residual).max(r.adjoint_residual);
                units += r.unit_count;
            }
            let t = TruncatedFock::new(&QMatrix::zero(n), 4)?;
            let (r, _) = verify_ideal(&t, max_len)?;
            worst_zero = worst_zero.max(r.product_residual).max(r.adjoint_residual).max(r.orthogonality_residual);
            passed &= r.passed;
        }
        passed &= worst_zero < 1e-12;
        Ok((
            passed,
            format!("{units} matrix units, worst residual {worst_product:.1e}, q = 0 worst {worst_zero:.1e}"),
        ))
    }
}

/// Random expression of degree at most 3 with up to five terms.
pub fn random_expression<R: Rng>(n: usize, rng: &mut R) -> Expression {
    let mut x = Expression::zero();
    let terms = rng.random_range(1..=5);
    for _ in 0..terms {
        let word = |rng: &mut R| {
            let len = rng.random_range(0..=3);
            MultiIndex::new((0..len).map(|_| rng.random_range(0..n)).collect())
        };
        let mu = word(rng);
        let sigma = if rng.random_bool(0.5) {
            // a permutation of mu, so that balanced terms are common
            let mut s = mu.clone().into_inner();
            s.reverse();
            MultiIndex::new(s)
        } else {
            word(rng)
        };
        let coeff = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        x.add_term(coeff, mu, sigma);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undeformed_suite_passes() {
        let suite = Suite::single(IsomQ::zero(2), 1);
        for id in [1, 2, 3, 4, 8, 9] {
            let out = suite.run(id);
            assert!(out.passed, "{}", out.line());
        }
    }
}
