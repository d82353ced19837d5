//! The deformed Fock inner product, Gram matrices of the level spaces `H_v`
//! and their orthonormalization.
//!
//! Convention: `fock_inner(mu, sigma)` is the scalar `lambda` with
//! `a_sigma* a_mu = lambda * 1` (when `occ(mu) = occ(sigma)` and `q_ii = 0`).
//! It is linear in `mu` and conjugate-linear in `sigma`, and the recursion
//! peels the first index of `sigma`.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, lower_triangular_inverse, real, CMatrix};
use crate::rewrite::{normal_form, IsomQ, QMatrix};
use crate::words::{MultiIndex, OccVector, Word};

/// Memoized evaluation of the Fock inner product for one parameter matrix.
///
/// The cache is owned by the value; use one instance per task.
pub struct FockInner<'q> {
    q: &'q QMatrix,
    cache: HashMap<(Vec<usize>, Vec<usize>), Complex64>,
}

impl<'q> FockInner<'q> {
    pub fn new(q: &'q QMatrix) -> Self {
        FockInner { q, cache: HashMap::new() }
    }

    pub fn inner(&mut self, mu: &[usize], sigma: &[usize]) -> Complex64 {
        if mu.len() != sigma.len() {
            return real(0.0);
        }
        if mu.is_empty() {
            return real(1.0);
        }
        let key = (mu.to_vec(), sigma.to_vec());
        if let Some(v) = self.cache.get(&key) {
            return *v;
        }
        let j1 = sigma[0];
        let mut total = real(0.0);
        let mut prefix = real(1.0);
        let mut reduced = Vec::with_capacity(mu.len() - 1);
        for (t, &it) in mu.iter().enumerate() {
            if it == j1 {
                reduced.clear();
                reduced.extend_from_slice(&mu[..t]);
                reduced.extend_from_slice(&mu[t + 1..]);
                let rest = reduced.clone();
                total += prefix * self.inner(&rest, &sigma[1..]);
            }
            prefix *= self.q.get(j1, it);
            if prefix == real(0.0) {
                // every later term carries this factor
                break;
            }
        }
        self.cache.insert(key, total);
        total
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }
}

/// `<xi_mu, xi_sigma>` for the deformed Fock inner product. Tensors of different
/// length are orthogonal.
pub fn fock_inner(mu: &[usize], sigma: &[usize], q: &QMatrix) -> Complex64 {
    FockInner::new(q).inner(mu, sigma)
}

/// Gram matrix of `<.,.>_v` on `H_v` in the lexicographic word basis.
#[derive(Clone, Debug)]
pub struct GramBlock {
    pub v: OccVector,
    pub basis: Vec<MultiIndex>,
    /// `gram[(a, b)] = fock_inner(basis[a], basis[b])`.
    pub gram: CMatrix,
    /// Lower-triangular `L` with `L L^H = gram`; present iff positivity was certified.
    pub chol: Option<CMatrix>,
    /// Smallest pivot of the factorization (the failing one if it stopped early).
    pub min_pivot: f64,
}

impl GramBlock {
    /// Builds the block and attempts the factorization without failing on indefiniteness.
    pub fn compute(v: &OccVector, q: &QMatrix) -> GramBlock {
        assert_eq!(v.n(), q.n(), "occupation vector and q disagree on n");
        let basis = MultiIndex::with_occ(v);
        let d = basis.len();
        let mut inner = FockInner::new(q);
        let mut gram = CMatrix::zeros(d, d);
        for a in 0..d {
            gram[(a, a)] = inner.inner(&basis[a], &basis[a]);
            for b in a + 1..d {
                gram[(a, b)] = inner.inner(&basis[a], &basis[b]);
                gram[(b, a)] = inner.inner(&basis[b], &basis[a]);
            }
        }
        let (chol, min_pivot) = match cholesky(&gram) {
            Ok((l, p)) => (Some(l), p),
            Err(p) => (None, p),
        };
        GramBlock { v: v.clone(), basis, gram, chol, min_pivot }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_positive(&self) -> bool {
        self.chol.is_some()
    }

    pub fn position(&self, word: &MultiIndex) -> Option<usize> {
        self.basis.binary_search(word).ok()
    }

    pub fn determinant(&self) -> Complex64 {
        if self.dim() == 0 {
            return real(1.0);
        }
        self.gram.determinant()
    }

    /// Largest deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        (&self.gram - self.gram.adjoint()).camax()
    }
}

/// Gram block for `H_v`, failing with `NotPositive` unless the factorization succeeds.
pub fn gram_block(v: &OccVector, q: &QMatrix) -> Result<GramBlock> {
    let g = GramBlock::compute(v, q);
    if g.is_positive() {
        Ok(g)
    } else {
        Err(Error::NotPositive { v: v.clone(), min_pivot: g.min_pivot })
    }
}

/// The pair (rewriting scalar, recursion scalar) for `a_sigma* a_mu`.
///
/// The first entry is the coefficient of the normal form of `a_sigma* a_mu`
/// when it reduces to a scalar (zero otherwise); the second is `fock_inner(mu, sigma)`.
pub fn lemma3_check(mu: &MultiIndex, sigma: &MultiIndex, q: &IsomQ) -> (Complex64, Complex64) {
    let word = Word::from_normal(&[], sigma).concat(&Word::from_normal(mu, &[]));
    let nf = normal_form(&word, q).expect("indices in range");
    let rewritten = nf.as_scalar().unwrap_or(real(0.0));
    (rewritten, fock_inner(mu, sigma, q.q()))
}

/// Change-of-basis matrix `C` to an orthonormal basis of `H_v`.
///
/// The vectors `hat a_alpha = sum_beta C[(beta, alpha)] a_beta` satisfy
/// `<hat a_alpha, hat a_beta>_v = delta`, i.e. `C^T G conj(C) = I` for the
/// Gram matrix `G` (equivalently `C^H G^T C = I`). `C` is upper triangular, so
/// `hat a_alpha` only involves `a_alpha` and lexicographically earlier words.
pub fn orthonormalize(g: &GramBlock) -> Result<CMatrix> {
    let l = g
        .chol
        .as_ref()
        .ok_or_else(|| Error::NotPositive { v: g.v.clone(), min_pivot: g.min_pivot })?;
    // G = L L^H  =>  C = L^{-T} gives C^T G conj(C) = L^{-1} L L^H L^{-H} = I
    Ok(lower_triangular_inverse(l).transpose())
}

/// Gram matrix of the vectors given by the columns of `coeffs` under `<.,.>_v`:
/// entry `(a, b)` is `<x_a, x_b>_v`.
pub fn form_gram(g: &CMatrix, coeffs: &CMatrix) -> CMatrix {
    coeffs.transpose() * g * coeffs.map(|z| z.conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::words::multinomial;

    fn mi(l: &[usize]) -> MultiIndex {
        MultiIndex::from_labels(l)
    }

    fn q12() -> IsomQ {
        IsomQ::new(QMatrix::two(c(0.35, -0.55)).unwrap()).unwrap()
    }

    #[test]
    fn vacuum_and_unequal_lengths() {
        let q = q12();
        assert_eq!(fock_inner(&[], &[], q.q()), real(1.0));
        assert_eq!(fock_inner(&[0], &[], q.q()), real(0.0));
    }

    #[test]
    fn one_level_of_recursion() {
        let q = q12();
        assert_eq!(fock_inner(&mi(&[2, 1]), &mi(&[1, 2]), q.q()), q.get(0, 1));
        assert_eq!(fock_inner(&mi(&[1, 2]), &mi(&[1, 2]), q.q()), real(1.0));
    }

    #[test]
    fn general_diagonal_branches() {
        // <xi_1 xi_1, xi_1 xi_1> = 1 + q_11 for a single generator
        let q = QMatrix::new(1, vec![vec![c(0.4, 0.0)]]).unwrap();
        assert!((fock_inner(&[0, 0], &[0, 0], &q) - c(1.4, 0.0)).norm() < 1e-15);
        // and [3]_q! = (1)(1+q)(1+q+q^2) at level three
        let want = 1.4 * (1.0 + 0.4 + 0.16);
        assert!((fock_inner(&[0, 0, 0], &[0, 0, 0], &q) - c(want, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn small_blocks() {
        let q = q12();
        let g = gram_block(&OccVector::new(vec![1, 0]), q.q()).unwrap();
        assert_eq!(g.gram, CMatrix::from_element(1, 1, real(1.0)));
        let g = gram_block(&OccVector::new(vec![2, 0]), q.q()).unwrap();
        assert_eq!(g.gram, CMatrix::from_element(1, 1, real(1.0)));

        let g = gram_block(&OccVector::new(vec![1, 1]), q.q()).unwrap();
        assert_eq!(g.basis, vec![mi(&[1, 2]), mi(&[2, 1])]);
        let q12 = q.get(0, 1);
        let want = CMatrix::from_row_slice(2, 2, &[real(1.0), q12.conj(), q12, real(1.0)]);
        assert!((&g.gram - want).norm() < 1e-15);
        assert!((g.determinant() - real(1.0 - q12.norm_sqr())).norm() < 1e-12);
    }

    #[test]
    fn lemma3_examples() {
        let q = q12();
        assert_eq!(lemma3_check(&mi(&[1]), &mi(&[1]), &q), (real(1.0), real(1.0)));
        let (a, b) = lemma3_check(&mi(&[2, 1]), &mi(&[1, 2]), &q);
        assert_eq!(a, q.get(0, 1));
        assert_eq!(b, q.get(0, 1));
        assert_eq!(lemma3_check(&mi(&[1]), &mi(&[2]), &q), (real(0.0), real(0.0)));
    }

    #[test]
    fn orthonormalize_examples() {
        let q = q12();
        let g = gram_block(&OccVector::new(vec![1, 0]), q.q()).unwrap();
        assert_eq!(orthonormalize(&g).unwrap(), CMatrix::identity(1, 1));

        let g = gram_block(&OccVector::new(vec![1, 1]), q.q()).unwrap();
        let cm = orthonormalize(&g).unwrap();
        assert!((form_gram(&g.gram, &cm) - CMatrix::identity(2, 2)).norm() < 1e-12);
        assert_eq!(cm[(1, 0)], real(0.0), "upper triangular");

        let zero = QMatrix::zero(3);
        for v in OccVector::up_to_level(3, 3) {
            let g = gram_block(&v, &zero).unwrap();
            let d = g.dim();
            assert_eq!(g.gram, CMatrix::identity(d, d));
            assert_eq!(orthonormalize(&g).unwrap(), CMatrix::identity(d, d));
        }
    }

    #[test]
    fn near_unit_modulus_is_reported() {
        // |q_12| just below 1 leaves a pivot of 1 - |q|^2 ~ 2e-13, under the certification threshold
        let q = QMatrix::two(c(1.0 - 1e-13, 0.0)).unwrap();
        match gram_block(&OccVector::new(vec![1, 1]), &q) {
            Err(Error::NotPositive { min_pivot, .. }) => assert!(min_pivot < 1e-12),
            other => panic!("expected NotPositive, got {other:?}"),
        }
        let g = GramBlock::compute(&OccVector::new(vec![1, 1]), &q);
        assert!(g.chol.is_none());
        assert!(orthonormalize(&g).is_err());
    }

    #[test]
    fn diagonal_is_one_and_positive() {
        for seed in 0..5 {
            let q = IsomQ::random(3, 0.95, seed).unwrap();
            for v in OccVector::up_to_level(3, 4) {
                let g = gram_block(&v, q.q()).unwrap();
                assert_eq!(g.dim() as u64, multinomial(v.entries()));
                assert!(g.hermitian_defect() < 1e-15);
                for a in 0..g.dim() {
                    assert!((g.gram[(a, a)] - real(1.0)).norm() < 1e-15);
                }
                let l = g.chol.as_ref().unwrap();
                assert!((l * l.adjoint() - &g.gram).norm() < 1e-9);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn conjugate_symmetry(mu in prop::collection::vec(0usize..3, 0..=5),
                                  perm_seed in any::<u64>(), seed in 0u64..500,
                                  general in any::<bool>()) {
                let q = if general {
                    QMatrix::random_general(3, 0.9, seed).unwrap()
                } else {
                    QMatrix::random_isom(3, 0.9, seed).unwrap()
                };
                // a rearrangement of mu so the pair is usually non-orthogonal
                let mut sigma = mu.clone();
                let len = sigma.len();
                if len > 1 {
                    let mut s = perm_seed;
                    for i in (1..len).rev() {
                        sigma.swap(i, (s % (i as u64 + 1)) as usize);
                        s /= i as u64 + 1;
                    }
                }
                let a = fock_inner(&mu, &sigma, &q);
                let b = fock_inner(&sigma, &mu, &q);
                prop_assert!((a - b.conj()).norm() < 1e-12);
            }
        }
    }
}
