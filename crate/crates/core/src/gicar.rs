//! The gauge-invariant filtration `W_1 ⊆ W_2 ⊆ …`, its block representation,
//! the prefix projections `p_v^u` and the central units `1_v^k`.

use std::collections::BTreeMap;

use nalgebra::SVD;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{column_span_projection, rank, real, CMatrix};
use crate::rep::{monomial_on_block, GradedOperator, TruncatedFock};
use crate::words::{Expression, MultiIndex, OccVector};

/// Equalities of constructed operators.
pub const OPERATOR_TOL: f64 = 1e-9;
/// Commutators and other quantities one multiplication deeper.
pub const COMMUTATOR_TOL: f64 = 1e-8;

/// Balanced monomials `a_mu a_sigma*` with `occ(mu) = occ(sigma) = v`.
pub fn w_v_basis(v: &OccVector) -> Vec<(MultiIndex, MultiIndex)> {
    let words = MultiIndex::with_occ(v);
    let mut out = Vec::with_capacity(words.len() * words.len());
    for mu in &words {
        for sigma in &words {
            out.push((mu.clone(), sigma.clone()));
        }
    }
    out
}

/// The monomial basis of `W_k`: balanced monomials with `max_i occ_i <= k`.
#[derive(Clone, Debug)]
pub struct GicarSpan {
    pub n: usize,
    pub k: usize,
    pub basis: Vec<(MultiIndex, MultiIndex)>,
}

impl GicarSpan {
    pub fn new(n: usize, k: usize) -> Self {
        let basis = OccVector::lattice_box(n, k).iter().flat_map(w_v_basis).collect();
        GicarSpan { n, k, basis }
    }

    /// `sum_{v <= k^n} multinomial(v)^2`.
    pub fn expected_dim(n: usize, k: usize) -> u64 {
        OccVector::lattice_box(n, k).iter().map(|v| v.multinomial().pow(2)).sum()
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn blocks(&self) -> Vec<OccVector> {
        OccVector::lattice_box(self.n, self.k)
    }

    pub fn contains(&self, mu: &MultiIndex, sigma: &MultiIndex) -> bool {
        let v = mu.occ(self.n);
        v == sigma.occ(self.n) && v.max_entry() <= self.k
    }
}

/// Smallest `v` with `x ∈ W_v`, or `None` if some monomial is unbalanced or
/// the monomials have different occupation vectors.
pub fn w_v_degree(x: &Expression, n: usize) -> Option<OccVector> {
    let mut degree = None;
    for (mu, sigma, _) in x.terms() {
        let v = mu.occ(n);
        if v != sigma.occ(n) || degree.as_ref().is_some_and(|d| d != &v) {
            return None;
        }
        degree = Some(v);
    }
    degree
}

/// Flattens the images of balanced monomials on the given blocks into columns.
pub fn representation_matrix(
    monomials: &[(MultiIndex, MultiIndex)],
    blocks: &[OccVector],
    t: &TruncatedFock,
) -> CMatrix {
    let rows: usize = blocks.iter().map(|w| t.dim(w).pow(2)).sum();
    let mut out = CMatrix::zeros(rows, monomials.len());
    for (col, (mu, sigma)) in monomials.iter().enumerate() {
        let mut offset = 0;
        for w in blocks {
            let d = t.dim(w);
            if let Some((target, m)) = monomial_on_block(mu, sigma, w, t) {
                if &target == w {
                    for (r, z) in m.iter().enumerate() {
                        out[(offset + r, col)] = *z;
                    }
                }
            }
            offset += d * d;
        }
    }
    out
}

/// Dimension of the image of `W_k` in block matrices on `⊕_{v <= k^n} H_v`.
pub fn faithfulness_rank(k: usize, t: &TruncatedFock) -> usize {
    let span = GicarSpan::new(t.n(), k);
    rank(&representation_matrix(&span.basis, &span.blocks(), t))
}

fn require_family(t: &TruncatedFock, family: &[OccVector]) -> Result<()> {
    match family.iter().find(|w| !t.contains(w)) {
        Some(w) => Err(Error::Config(format!("truncation does not contain block {w}"))),
        None => Ok(()),
    }
}

/// Orthogonal projection, in orthonormal coordinates of block `u`, onto the span of
/// the words whose first `|v|` letters have occupation `v`.
pub fn prefix_projection(v: &OccVector, u: &OccVector, t: &TruncatedFock) -> Result<CMatrix> {
    if !v.leq(u) {
        return Err(Error::BadOrder { v: v.clone(), u: u.clone() });
    }
    require_family(t, std::slice::from_ref(u))?;
    let g = t.gram(u).expect("checked above");
    let from_raw = &t.frame(u).expect("checked above").from_raw;
    let n = t.n();
    let cols: Vec<usize> = g
        .basis
        .iter()
        .enumerate()
        .filter(|(_, w)| MultiIndex::new(w[..v.level()].to_vec()).occ(n) == *v)
        .map(|(c, _)| c)
        .collect();
    let b = CMatrix::from_fn(g.dim(), cols.len(), |r, c| from_raw[(r, cols[c])]);
    Ok(column_span_projection(&b))
}

/// `P_v^u` as a graded operator supported on block `u`.
pub fn subspace_projection(v: &OccVector, u: &OccVector, t: &TruncatedFock) -> Result<GradedOperator> {
    let p = prefix_projection(v, u, t)?;
    Ok(GradedOperator::diagonal([(u.clone(), p)]))
}

/// Image of `p_v^u` on the blocks `w <= bound`: `P_v^w` where `u <= w`, zero elsewhere.
pub fn pvu_extension_on(
    v: &OccVector,
    u: &OccVector,
    bound: &OccVector,
    t: &TruncatedFock,
) -> Result<GradedOperator> {
    if !v.leq(u) {
        return Err(Error::BadOrder { v: v.clone(), u: u.clone() });
    }
    if !u.leq(bound) {
        return Err(Error::BadOrder { v: u.clone(), u: bound.clone() });
    }
    let family = OccVector::lattice_below(bound);
    require_family(t, &family)?;
    let mut blocks = Vec::with_capacity(family.len());
    for w in family {
        let m = if u.leq(&w) {
            prefix_projection(v, &w, t)?
        } else {
            CMatrix::zeros(t.dim(&w), t.dim(&w))
        };
        blocks.push((w, m));
    }
    Ok(GradedOperator::diagonal(blocks))
}

/// Image of `p_v^u ∈ W_k` on `⊕_{w <= k^n} H_w`.
pub fn pvu_extension(v: &OccVector, u: &OccVector, k: usize, t: &TruncatedFock) -> Result<GradedOperator> {
    pvu_extension_on(v, u, &OccVector::splat(t.n(), k), t)
}

/// Inclusion–exclusion `sum_S (-1)^|S| p_v^{v + delta_S}` over `v + delta_S <= k^n`,
/// evaluated on the blocks `w <= bound`.
///
/// Each `p_v^u` acts on block `w` as `P_v^w` when `u <= w`, so the sum collapses to
/// `c_w P_v^w` with the signed count `c_w` of admissible subsets below `w`.
pub fn block_unit_on(v: &OccVector, k: usize, bound: &OccVector, t: &TruncatedFock) -> Result<GradedOperator> {
    let n = t.n();
    let top = OccVector::splat(n, k);
    if !v.leq(&top) {
        return Err(Error::BadOrder { v: v.clone(), u: top });
    }
    if !top.leq(bound) {
        return Err(Error::BadOrder { v: top, u: bound.clone() });
    }
    let subsets: Vec<(OccVector, f64)> = (0..1usize << n)
        .map(|mask| (v + &OccVector::from_mask(n, mask), if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 }))
        .filter(|(u, _)| u.leq(&top))
        .collect();
    let family = OccVector::lattice_below(bound);
    require_family(t, &family)?;
    let mut blocks = Vec::with_capacity(family.len());
    for w in family {
        let coeff: f64 = subsets.iter().filter(|(u, _)| u.leq(&w)).map(|(_, s)| s).sum();
        let m = if coeff == 0.0 {
            CMatrix::zeros(t.dim(&w), t.dim(&w))
        } else {
            prefix_projection(v, &w, t)? * real(coeff)
        };
        blocks.push((w, m));
    }
    Ok(GradedOperator::diagonal(blocks))
}

/// A central unit `1_v^k` of `W_k`, as an operator and as an element of `W_k`.
#[derive(Clone, Debug)]
pub struct BlockUnit {
    pub v: OccVector,
    pub k: usize,
    pub operator: GradedOperator,
    pub expression: Expression,
}

/// `1_v^k` on `⊕_{w <= k^n} H_w` together with its preimage in `W_k`.
pub fn block_unit(v: &OccVector, k: usize, t: &TruncatedFock) -> Result<BlockUnit> {
    let operator = block_unit_on(v, k, &OccVector::splat(t.n(), k), t)?;
    let expression = preimage(&operator, k, t)?;
    Ok(BlockUnit { v: v.clone(), k, operator, expression })
}

/// The element of `W_k` whose block image is `op` (block-diagonal on `w <= k^n`).
///
/// Solves the linear system given by the faithful block representation.
pub fn preimage(op: &GradedOperator, k: usize, t: &TruncatedFock) -> Result<Expression> {
    let span = GicarSpan::new(t.n(), k);
    let blocks = span.blocks();
    let a = representation_matrix(&span.basis, &blocks, t);
    let mut b = CMatrix::zeros(a.nrows(), 1);
    let mut offset = 0;
    for w in &blocks {
        let d = t.dim(w);
        if let Some(m) = op.block(w, w) {
            for (r, z) in m.iter().enumerate() {
                b[(offset + r, 0)] = *z;
            }
        }
        offset += d * d;
    }
    let svd = SVD::new(a.clone(), true, true);
    let x = svd
        .solve(&b, 1e-12)
        .map_err(|e| Error::DecompositionFailure(format!("preimage solve: {e}")))?;
    if (&a * &x - &b).norm() > OPERATOR_TOL * (1.0 + b.norm()) {
        return Err(Error::DecompositionFailure("operator is not in the image of W_k".into()));
    }
    let mut out = Expression::zero();
    for (i, (mu, sigma)) in span.basis.iter().enumerate() {
        if x[(i, 0)].norm() > 1e-12 {
            out.add_term(x[(i, 0)], mu.clone(), sigma.clone());
        }
    }
    Ok(out)
}

/// Per-block outcome of [`decompose`].
#[derive(Clone, Debug, Serialize)]
pub struct BlockChecks {
    /// `||U^2 - U||`.
    pub idempotent: f64,
    /// `||U - U^†||`.
    pub self_adjoint: f64,
    /// `||U|_{H_v} - 1||`.
    pub own_block_identity: f64,
    /// `max_b ||[U, pi(b)]||` over the monomial basis of `W_k`.
    pub central: f64,
    /// Rank of `{pi(x) U : x ∈ W_v}`; equals `dim^2` iff it is all of `B(H_v)`.
    pub compressed_rank: usize,
    /// Norm of `pi(x) U` outside block `v`, worst over the basis of `W_v`.
    pub compressed_leak: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockReport {
    pub v: OccVector,
    /// Matrix size `multinomial(v)`.
    pub dim: u64,
    /// Linear dimension `multinomial(v)^2`.
    pub algebra_dim: u64,
    pub unit_rank: usize,
    pub checks: BlockChecks,
}

#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub n: usize,
    pub k: usize,
    pub blocks: Vec<BlockReport>,
    /// `sum_v multinomial(v)^2`.
    pub total_dim: u64,
    /// Rank of the represented span of `W_k`.
    pub represented_dim: usize,
    /// `max_{v != u} ||1_v 1_u||`.
    pub orthogonality: f64,
    /// `||sum_v 1_v - 1||`.
    pub partition: f64,
}

/// Decomposition of `W_k` into full matrix algebras, with every check measured.
///
/// Fails with `DecompositionFailure` naming the first violated check.
pub fn decompose(k: usize, t: &TruncatedFock) -> Result<Decomposition> {
    let n = t.n();
    let span = GicarSpan::new(n, k);
    let family = span.blocks();
    require_family(t, &family)?;
    let in_family = |w: &OccVector| w.max_entry() <= k;

    let images: Vec<GradedOperator> = span
        .basis
        .iter()
        .map(|(mu, sigma)| {
            let blocks = family.iter().filter_map(|w| {
                monomial_on_block(mu, sigma, w, t).map(|(target, m)| {
                    debug_assert_eq!(&target, w);
                    (w.clone(), m)
                })
            });
            GradedOperator::diagonal(blocks.collect::<Vec<_>>())
        })
        .collect();
    let image_of: BTreeMap<(MultiIndex, MultiIndex), &GradedOperator> =
        span.basis.iter().cloned().zip(images.iter()).collect();

    let units: Vec<GradedOperator> = family
        .iter()
        .map(|v| block_unit_on(v, k, &OccVector::splat(n, k), t))
        .collect::<Result<_>>()?;

    let mut blocks = Vec::new();
    for (v, u) in family.iter().zip(&units) {
        let d = t.dim(v);
        let idempotent = u.compose(u).sub(u).norm();
        let self_adjoint = u.sub(&u.adjoint()).norm();
        let own = u.block(v, v).map_or(f64::INFINITY, |m| {
            crate::linalg::spectral_norm(&(m - CMatrix::identity(d, d)))
        });
        let central = images
            .iter()
            .map(|b| u.compose(b).sub(&b.compose(u)).norm())
            .fold(0.0, f64::max);

        let wv = w_v_basis(v);
        let mut compressed = CMatrix::zeros(d * d, wv.len());
        let mut leak: f64 = 0.0;
        for (col, key) in wv.iter().enumerate() {
            let c = image_of[key].compose(u);
            leak = leak.max(c.restrict_domain(|w| w != v).norm());
            if let Some(m) = c.block(v, v) {
                for (r, z) in m.iter().enumerate() {
                    compressed[(r, col)] = *z;
                }
            }
        }
        let unit_rank = u.rank();
        let checks = BlockChecks {
            idempotent,
            self_adjoint,
            own_block_identity: own,
            central,
            compressed_rank: rank(&compressed),
            compressed_leak: leak,
        };
        let dim = v.multinomial();
        let report = BlockReport { v: v.clone(), dim, algebra_dim: dim * dim, unit_rank, checks };
        check_block(&report)?;
        blocks.push(report);
    }

    let mut orthogonality: f64 = 0.0;
    for (a, ua) in units.iter().enumerate() {
        for ub in &units[a + 1..] {
            orthogonality = orthogonality.max(ua.compose(ub).norm());
        }
    }
    let mut total = GradedOperator::zero();
    for u in &units {
        total = total.add(u);
    }
    let partition = total.sub(&t.identity_on(in_family)).norm();
    if orthogonality >= OPERATOR_TOL {
        return Err(Error::DecompositionFailure(format!("units not orthogonal: {orthogonality:.3e}")));
    }
    if partition >= OPERATOR_TOL {
        return Err(Error::DecompositionFailure(format!("units do not sum to 1: {partition:.3e}")));
    }
    let represented_dim = rank(&representation_matrix(&span.basis, &family, t));
    let total_dim = GicarSpan::expected_dim(n, k);
    if represented_dim as u64 != total_dim {
        return Err(Error::DecompositionFailure(format!(
            "represented span has dimension {represented_dim}, expected {total_dim}"
        )));
    }
    Ok(Decomposition { n, k, blocks, total_dim, represented_dim, orthogonality, partition })
}

fn check_block(b: &BlockReport) -> Result<()> {
    let c = &b.checks;
    let fail = |what: &str, val: String| {
        Err(Error::DecompositionFailure(format!("block {}: {what} ({val})", b.v)))
    };
    if c.idempotent >= OPERATOR_TOL {
        return fail("unit not idempotent", format!("{:.3e}", c.idempotent));
    }
    if c.self_adjoint >= OPERATOR_TOL {
        return fail("unit not self-adjoint", format!("{:.3e}", c.self_adjoint));
    }
    if c.own_block_identity >= OPERATOR_TOL {
        return fail("unit not identity on its block", format!("{:.3e}", c.own_block_identity));
    }
    if c.central >= COMMUTATOR_TOL {
        return fail("unit not central", format!("{:.3e}", c.central));
    }
    if b.unit_rank as u64 != b.dim {
        return fail("unit rank differs from block dimension", b.unit_rank.to_string());
    }
    if c.compressed_rank as u64 != b.algebra_dim || c.compressed_leak >= OPERATOR_TOL {
        return fail(
            "compressed block is not the full matrix algebra",
            format!("rank {}, leak {:.3e}", c.compressed_rank, c.compressed_leak),
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::rep::act_on_expression;
    use crate::rewrite::{multiply, star, IsomQ, QMatrix};
    use proptest::prelude::*;

    fn occ(e: &[usize]) -> OccVector {
        OccVector::new(e.to_vec())
    }

    fn fock(n: usize, k: usize, seed: u64) -> TruncatedFock {
        TruncatedFock::for_filtration(&QMatrix::random_isom(n, 0.85, seed).unwrap(), k).unwrap()
    }

    #[test]
    fn span_cardinality() {
        assert_eq!(GicarSpan::expected_dim(2, 1), 7);
        assert_eq!(GicarSpan::expected_dim(2, 2), 63);
        assert_eq!(GicarSpan::expected_dim(3, 1), 52);
        for (n, k) in [(1, 3), (2, 1), (2, 2), (3, 1)] {
            assert_eq!(GicarSpan::new(n, k).len() as u64, GicarSpan::expected_dim(n, k));
        }
    }

    #[test]
    fn span_closed_under_star_and_multiply() {
        let q = IsomQ::random(2, 0.8, 3).unwrap();
        let span = GicarSpan::new(2, 2);
        for (i, (m1, s1)) in span.basis.iter().enumerate().step_by(5) {
            let x = Expression::monomial(real(1.0), m1.clone(), s1.clone());
            for (mu, sigma, _) in star(&x).terms() {
                assert!(span.contains(mu, sigma));
            }
            for (m2, s2) in span.basis.iter().skip(i % 3).step_by(7) {
                let y = Expression::monomial(real(1.0), m2.clone(), s2.clone());
                for (mu, sigma, _) in multiply(&x, &y, &q).terms() {
                    assert!(span.contains(mu, sigma), "{mu} {sigma}");
                }
            }
        }
    }

    #[test]
    fn faithfulness_counts() {
        assert_eq!(faithfulness_rank(1, &fock(2, 1, 0)), 7);
        assert_eq!(faithfulness_rank(2, &fock(2, 2, 1)), 63);
        assert_eq!(faithfulness_rank(1, &fock(3, 1, 2)), 52);
    }

    #[test]
    fn lemma4_bijective_per_block() {
        let t = TruncatedFock::new(&QMatrix::random_isom(3, 0.9, 7).unwrap(), 4).unwrap();
        for v in OccVector::up_to_level(3, 4) {
            let d = v.multinomial() as usize;
            let a = representation_matrix(&w_v_basis(&v), std::slice::from_ref(&v), &t);
            assert_eq!(rank(&a), d * d, "block {v}");
        }
    }

    #[test]
    fn projection_examples() {
        let t = fock(2, 2, 4);
        let u = occ(&[1, 1]);
        let id = |p: &CMatrix| (p - CMatrix::identity(p.nrows(), p.nrows())).norm();
        assert!(id(&prefix_projection(&u, &u, &t).unwrap()) < 1e-12);
        assert!(id(&prefix_projection(&occ(&[0, 0]), &u, &t).unwrap()) < 1e-12);
        let p = prefix_projection(&occ(&[1, 0]), &u, &t).unwrap();
        assert_eq!(rank(&p), 1);
        assert!((&p * &p - &p).norm() < 1e-12 && (&p - p.adjoint()).norm() < 1e-12);
        // the range is spanned by a_1 a_2 Omega
        let x = t.word_vector(&MultiIndex::from_labels(&[1, 2])).unwrap()[&u].clone();
        assert!((&p * &x - &x).norm() < 1e-12);
        assert!(matches!(
            prefix_projection(&occ(&[2, 0]), &u, &t),
            Err(Error::BadOrder { .. })
        ));
    }

    #[test]
    fn projection_ranks() {
        let t = fock(2, 2, 5);
        for u in OccVector::lattice_box(2, 2) {
            for v in OccVector::lattice_below(&u) {
                let want = v.multinomial() * u.checked_sub(&v).unwrap().multinomial();
                assert_eq!(rank(&prefix_projection(&v, &u, &t).unwrap()) as u64, want);
            }
        }
    }

    #[test]
    fn pvu_examples() {
        let t = fock(2, 1, 6);
        let e = pvu_extension(&occ(&[0, 0]), &occ(&[0, 0]), 1, &t).unwrap();
        assert!(e.sub(&t.identity_on(|w| w.max_entry() <= 1)).norm() < 1e-12);
        let e = pvu_extension(&occ(&[1, 0]), &occ(&[1, 1]), 1, &t).unwrap();
        for w in [occ(&[0, 0]), occ(&[1, 0]), occ(&[0, 1])] {
            assert_eq!(e.block(&w, &w).unwrap().norm(), 0.0);
        }
        assert_eq!(rank(e.block(&occ(&[1, 1]), &occ(&[1, 1])).unwrap()), 1);
        let e = pvu_extension(&occ(&[1, 0]), &occ(&[1, 0]), 1, &t).unwrap();
        assert_eq!(e.block(&occ(&[0, 1]), &occ(&[0, 1])).unwrap().norm(), 0.0);
    }

    #[test]
    fn block_unit_examples() {
        let t = fock(2, 1, 8);
        let v = occ(&[1, 1]);
        let u = block_unit(&v, 1, &t).unwrap();
        let p = pvu_extension(&v, &v, 1, &t).unwrap();
        assert!(u.operator.sub(&p).norm() < 1e-12);

        let z = occ(&[0, 0]);
        let u0 = block_unit(&z, 1, &t).unwrap();
        let by_hand = pvu_extension(&z, &z, 1, &t)
            .unwrap()
            .sub(&pvu_extension(&z, &occ(&[1, 0]), 1, &t).unwrap())
            .sub(&pvu_extension(&z, &occ(&[0, 1]), 1, &t).unwrap())
            .add(&pvu_extension(&z, &occ(&[1, 1]), 1, &t).unwrap());
        assert!(u0.operator.sub(&by_hand).norm() < 1e-12);
        for w in OccVector::lattice_box(2, 1) {
            let b = u0.operator.block(&w, &w).unwrap();
            let want = if w == z { 1.0 } else { 0.0 };
            assert!((b - CMatrix::identity(b.nrows(), b.ncols()) * real(want)).norm() < 1e-9);
        }
    }

    #[test]
    fn units_have_preimages() {
        let t = fock(2, 2, 9);
        for v in OccVector::lattice_box(2, 2) {
            let u = block_unit(&v, 2, &t).unwrap();
            assert!(u.expression.is_balanced(2));
            let back = act_on_expression(&u.expression, &t).restrict(|w| w.max_entry() <= 2);
            assert!(back.sub(&u.operator).norm() < 1e-8, "block {v}");
        }
        // 1_0^1 for n = 1 is the vacuum projection 1 - a_1 a_1*
        let t1 = fock(1, 1, 0);
        let u = block_unit(&occ(&[0]), 1, &t1).unwrap();
        let want = Expression::one().sub(&Expression::monomial(
            real(1.0),
            MultiIndex::from_labels(&[1]),
            MultiIndex::from_labels(&[1]),
        ));
        assert!(u.expression.approx_eq(&want, 1e-9), "{}", u.expression);
    }

    #[test]
    fn decomposition_sizes() {
        let d = decompose(1, &fock(2, 1, 10)).unwrap();
        let dims: Vec<u64> = d.blocks.iter().map(|b| b.dim).collect();
        assert_eq!(dims, vec![1, 1, 1, 2]);
        assert_eq!(d.total_dim, 7);
        let d = decompose(2, &fock(2, 2, 11)).unwrap();
        assert_eq!(d.total_dim, 63);
        let d = decompose(3, &fock(1, 3, 0)).unwrap();
        assert_eq!(d.blocks.len(), 4);
        assert!(d.blocks.iter().all(|b| b.dim == 1));
    }

    #[test]
    fn decomposition_n3() {
        let d = decompose(1, &fock(3, 1, 12)).unwrap();
        assert_eq!(d.represented_dim, 52);
        assert!(d.partition < OPERATOR_TOL && d.orthogonality < OPERATOR_TOL);
    }

    #[test]
    fn decomposition_needs_blocks() {
        let t = TruncatedFock::new(&QMatrix::zero(2), 2).unwrap();
        assert!(matches!(decompose(2, &t), Err(Error::Config(_))));
    }

    fn balanced_element(v: &OccVector, coeffs: &[(f64, f64)]) -> Expression {
        let mut x = Expression::zero();
        for ((mu, sigma), (re, im)) in w_v_basis(v).into_iter().zip(coeffs.iter().cycle()) {
            x.add_term(c(*re, *im), mu, sigma);
        }
        x
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn ideal_property(
            v in proptest::collection::vec(0usize..3, 2),
            u in proptest::collection::vec(0usize..3, 2),
            coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6),
            seed in 0u64..20,
        ) {
            let q = IsomQ::random(2, 0.9, seed).unwrap();
            let v = OccVector::new(v);
            let u = OccVector::new(u);
            let x = balanced_element(&v, &coeffs);
            let y = balanced_element(&u, &coeffs[1..]);
            let prod = multiply(&x, &y, &q);
            let top = v.max_componentwise(&u);
            for (mu, sigma, _) in prod.terms() {
                prop_assert_eq!(mu.occ(2), top.clone());
                prop_assert_eq!(sigma.occ(2), top.clone());
            }
        }
    }

    #[test]
    fn filtration_nested_and_exhaustive() {
        for k in 1..3 {
            let small = GicarSpan::new(2, k);
            let big = GicarSpan::new(2, k + 1);
            assert!(small.basis.iter().all(|(m, s)| big.contains(m, s)));
        }
        // every balanced monomial of degree <= 3 lies in W_3
        let span = GicarSpan::new(2, 3);
        for mu in MultiIndex::all_up_to(2, 3) {
            for sigma in MultiIndex::all_up_to(2, 3) {
                if mu.occ(2) == sigma.occ(2) {
                    assert!(span.contains(&mu, &sigma));
                }
            }
        }
        assert_eq!(w_v_degree(&Expression::one(), 2), Some(occ(&[0, 0])));
    }
}
