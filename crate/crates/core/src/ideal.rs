//! The projection `p = 1 - 1_B` and the matrix units `e_{αβ} = â_α p â_β*`
//! spanning a copy of the compact operators.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, rank, real, CMatrix};
use crate::rep::{creation, monomial_operator, GradedOperator, TruncatedFock};
use crate::words::MultiIndex;

/// Eigenvalues above this belong to the support of `sum_i A_i A_i*`.
pub const SUPPORT_THRESHOLD: f64 = 1e-8;
/// Eigenvalues strictly between these bounds are too close to the threshold to classify.
pub const GAP_WINDOW: (f64, f64) = (1e-11, 1e-5);
/// Matrix-unit product relations.
pub const UNIT_PRODUCT_TOL: f64 = 1e-8;
/// Adjoint relation and `p A_i = 0`.
pub const UNIT_ADJOINT_TOL: f64 = 1e-9;

/// Support projection of `sum_i A_i A_i*`, with the smallest support eigenvalue.
#[derive(Clone, Debug)]
pub struct UnitOfB {
    pub operator: GradedOperator,
    /// Smallest eigenvalue above [`SUPPORT_THRESHOLD`].
    pub spectral_gap: f64,
    /// Largest eigenvalue at or below [`SUPPORT_THRESHOLD`].
    pub kernel_max: f64,
    pub rank: usize,
}

/// `1_B` as the support projection of `sum_i A_i A_i*` (block-diagonal).
pub fn unit_of_b(t: &TruncatedFock) -> Result<UnitOfB> {
    if !t.q().has_zero_diagonal() {
        return Err(Error::NotIsometric("the unit of B needs q_ii = 0".into()));
    }
    if t.level() < 2 {
        return Err(Error::Config("the unit of B needs truncation level L >= 2".into()));
    }
    let mut sum = GradedOperator::zero();
    for i in 0..t.n() {
        let a = creation(i, t);
        sum = sum.add(&a.compose(&a.adjoint()));
    }
    let mut blocks = Vec::new();
    let mut gap = f64::INFINITY;
    let mut kernel_max: f64 = 0.0;
    let mut total_rank = 0;
    for v in t.block_keys() {
        let d = t.dim(v);
        let m = sum.block(v, v).cloned().unwrap_or_else(|| CMatrix::zeros(d, d));
        let (vals, vecs) = hermitian_eigen(&m);
        let mut proj = CMatrix::zeros(d, d);
        for (idx, &lambda) in vals.iter().enumerate() {
            if lambda > GAP_WINDOW.0 && lambda < GAP_WINDOW.1 {
                return Err(Error::SpectralGapTooSmall { eigenvalue: lambda, threshold: SUPPORT_THRESHOLD });
            }
            if lambda > SUPPORT_THRESHOLD {
                let col = vecs.column(idx);
                proj += col * col.adjoint();
                gap = gap.min(lambda);
                total_rank += 1;
            } else {
                kernel_max = kernel_max.max(lambda);
            }
        }
        blocks.push((v.clone(), proj));
    }
    Ok(UnitOfB { operator: GradedOperator::diagonal(blocks), spectral_gap: gap, kernel_max, rank: total_rank })
}

/// `p = 1 - 1_B`.
pub fn projection_p(t: &TruncatedFock) -> Result<GradedOperator> {
    Ok(t.identity().sub(&unit_of_b(t)?.operator))
}

/// The orthonormalized creation word `â_α = sum_β C[β][α] a_β`.
pub fn orthonormal_creation(alpha: &MultiIndex, t: &TruncatedFock) -> Result<GradedOperator> {
    if alpha.len() > t.level() {
        return Err(Error::TruncationOverflow { len: alpha.len(), level: t.level() });
    }
    let v = alpha.occ(t.n());
    let g = t.gram(&v).expect("level checked above");
    let col = g.position(alpha).expect("word lies in its own block");
    let to_raw = &t.frame(&v).expect("level checked above").to_raw;
    let mut op = GradedOperator::zero();
    for (row, beta) in g.basis.iter().enumerate() {
        let coeff = to_raw[(row, col)];
        if coeff != real(0.0) {
            op = op.add(&monomial_operator(beta, &MultiIndex::empty(), t).scale(coeff));
        }
    }
    Ok(op)
}

/// Matrix units built from one `p`, cached per word.
pub struct MatrixUnits<'t> {
    t: &'t TruncatedFock,
    p: GradedOperator,
    hats: BTreeMap<MultiIndex, GradedOperator>,
}

impl<'t> MatrixUnits<'t> {
    pub fn new(t: &'t TruncatedFock) -> Result<Self> {
        Ok(MatrixUnits { t, p: projection_p(t)?, hats: BTreeMap::new() })
    }

    pub fn p(&self) -> &GradedOperator {
        &self.p
    }

    fn hat(&mut self, alpha: &MultiIndex) -> Result<GradedOperator> {
        if let Some(h) = self.hats.get(alpha) {
            return Ok(h.clone());
        }
        let h = orthonormal_creation(alpha, self.t)?;
        self.hats.insert(alpha.clone(), h.clone());
        Ok(h)
    }

    /// `e_{αβ} = â_α p â_β*`.
    pub fn unit(&mut self, alpha: &MultiIndex, beta: &MultiIndex) -> Result<GradedOperator> {
        let a = self.hat(alpha)?;
        let b = self.hat(beta)?;
        Ok(a.compose(&self.p).compose(&b.adjoint()))
    }
}

/// `e_{αβ}` for a single pair.
pub fn matrix_unit(alpha: &MultiIndex, beta: &MultiIndex, t: &TruncatedFock) -> Result<GradedOperator> {
    MatrixUnits::new(t)?.unit(alpha, beta)
}

/// The data certifying the compact ideal in the truncated representation.
pub struct IdealWitness {
    pub p: GradedOperator,
    pub one_b: GradedOperator,
    pub units: BTreeMap<(MultiIndex, MultiIndex), GradedOperator>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdealReport {
    pub n: usize,
    pub level: usize,
    pub max_len: usize,
    pub dim: usize,
    pub rank_p: usize,
    pub spectral_gap: f64,
    /// `max(||p^2 - p||, ||p - p^†||)`.
    pub p_projection: f64,
    /// `max_i ||p A_i||` and `||A_i^† p||` on blocks below the top level.
    pub p_kills_creation: f64,
    /// `max ||e_{αβ} e_{σμ} - δ_{βσ} e_{αμ}||`.
    pub product_residual: f64,
    /// `max ||e_{αβ}^† - e_{βα}||`.
    pub adjoint_residual: f64,
    /// `max ||p â_β^† â_α p - δ_{αβ} p||`.
    pub orthogonality_residual: f64,
    /// Every `e_{αα}` is a rank-one projection.
    pub diagonal_rank_one: bool,
    pub unit_count: usize,
    pub span_rank: usize,
    pub passed: bool,
}

/// Checks the matrix-unit relations over all word pairs of length at most `max_len`.
pub fn verify_ideal(t: &TruncatedFock, max_len: usize) -> Result<(IdealReport, IdealWitness)> {
    if max_len + 1 > t.level() {
        return Err(Error::TruncationOverflow { len: max_len, level: t.level() });
    }
    let n = t.n();
    let ub = unit_of_b(t)?;
    let mut units = MatrixUnits::new(t)?;
    let p = units.p().clone();
    let p_projection = p.compose(&p).sub(&p).norm().max(p.sub(&p.adjoint()).norm());
    let interior = |v: &crate::words::OccVector| t.is_interior(v);
    let mut p_kills: f64 = 0.0;
    for i in 0..n {
        let a = creation(i, t).restrict_domain(interior);
        p_kills = p_kills.max(p.compose(&a).norm());
        p_kills = p_kills.max(a.adjoint().compose(&p).norm());
    }

    let words = MultiIndex::all_up_to(n, max_len);
    let mut table = BTreeMap::new();
    for a in &words {
        for b in &words {
            table.insert((a.clone(), b.clone()), units.unit(a, b)?);
        }
    }

    let mut product: f64 = 0.0;
    let mut adjoint: f64 = 0.0;
    let mut rank_one = true;
    for ((a, b), e) in &table {
        adjoint = adjoint.max(e.adjoint().sub(&table[&(b.clone(), a.clone())]).norm());
        if a == b {
            let ranks = e.rank();
            let proj = e.compose(e).sub(e).norm();
            rank_one &= ranks == 1 && proj < UNIT_ADJOINT_TOL;
        }
        for ((s, m), f) in &table {
            let got = e.compose(f);
            let residual = if b == s { got.sub(&table[&(a.clone(), m.clone())]) } else { got }.norm();
            product = product.max(residual);
        }
    }

    let mut orthogonality: f64 = 0.0;
    for a in &words {
        for b in &words {
            let ha = units.hat(a)?;
            let hb = units.hat(b)?;
            let x = p.compose(&hb.adjoint()).compose(&ha).compose(&p);
            let r = if a == b { x.sub(&p) } else { x };
            orthogonality = orthogonality.max(r.norm());
        }
    }

    // linear independence of the units as vectors in the full matrix space
    let keys: Vec<_> = t.block_keys().cloned().collect();
    let dim = t.total_dim();
    let offset: BTreeMap<_, usize> = keys
        .iter()
        .scan(0, |acc, v| {
            let o = *acc;
            *acc += t.dim(v);
            Some((v.clone(), o))
        })
        .collect();
    let mut flat = CMatrix::zeros(dim * dim, table.len());
    for (col, e) in table.values().enumerate() {
        for (s, tg, m) in e.blocks() {
            for r in 0..m.nrows() {
                for cidx in 0..m.ncols() {
                    flat[((offset[tg] + r) * dim + offset[s] + cidx, col)] += m[(r, cidx)];
                }
            }
        }
    }
    let span_rank = rank(&flat);

    let rank_p = p.rank();
    let passed = p_projection < UNIT_ADJOINT_TOL
        && rank_p > 0
        && rank_p < dim
        && p_kills < UNIT_ADJOINT_TOL
        && product < UNIT_PRODUCT_TOL
        && adjoint < UNIT_ADJOINT_TOL
        && orthogonality < UNIT_PRODUCT_TOL
        && rank_one
        && span_rank == table.len();
    let report = IdealReport {
        n,
        level: t.level(),
        max_len,
        dim,
        rank_p,
        spectral_gap: ub.spectral_gap,
        p_projection,
        p_kills_creation: p_kills,
        product_residual: product,
        adjoint_residual: adjoint,
        orthogonality_residual: orthogonality,
        diagonal_rank_one: rank_one,
        unit_count: table.len(),
        span_rank,
        passed,
    };
    Ok((report, IdealWitness { p, one_b: ub.operator, units: table }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::QMatrix;
    use crate::words::OccVector;

    fn mi(l: &[usize]) -> MultiIndex {
        MultiIndex::from_labels(l)
    }

    #[test]
    fn undeformed_unit_of_b() {
        let t = TruncatedFock::new(&QMatrix::zero(2), 3).unwrap();
        let ub = unit_of_b(&t).unwrap();
        let zero = OccVector::zero(2);
        let want = t.identity().sub(&t.identity_on(|v| *v == zero));
        assert!(ub.operator.sub(&want).norm() < 1e-12);
        assert!((ub.spectral_gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_unit_of_b_has_corank_one() {
        let t = TruncatedFock::new(&QMatrix::random_isom(2, 0.9, 3).unwrap(), 3).unwrap();
        let ub = unit_of_b(&t).unwrap();
        assert_eq!(ub.rank, t.total_dim() - 1);
        let p = projection_p(&t).unwrap();
        for i in 0..2 {
            let a = creation(i, &t).restrict_domain(|v| v.level() < 3);
            assert!(p.compose(&a).norm() < 1e-9);
        }
    }

    #[test]
    fn requires_isometries() {
        let t = TruncatedFock::new(&QMatrix::random_general(2, 0.5, 1).unwrap(), 3).unwrap();
        assert!(matches!(unit_of_b(&t), Err(Error::NotIsometric(_))));
    }

    #[test]
    fn unit_examples() {
        let t = TruncatedFock::new(&QMatrix::random_isom(2, 0.8, 4).unwrap(), 3).unwrap();
        let mut units = MatrixUnits::new(&t).unwrap();
        let e00 = units.unit(&mi(&[]), &mi(&[])).unwrap();
        assert!(e00.sub(units.p()).norm() < 1e-12);
        let (a, b) = (mi(&[1, 2]), mi(&[2]));
        let eab = units.unit(&a, &b).unwrap();
        let eba = units.unit(&b, &a).unwrap();
        let eaa = units.unit(&a, &a).unwrap();
        assert!(eab.compose(&eba).sub(&eaa).norm() < 1e-9);
        assert!(eaa.compose(&eaa).sub(&eaa).norm() < 1e-9);
        let e21 = units.unit(&mi(&[2, 1]), &mi(&[1])).unwrap();
        assert!(eab.compose(&e21).norm() < 1e-9);
        assert!(matches!(
            matrix_unit(&mi(&[1, 1, 1, 1]), &mi(&[]), &t),
            Err(Error::TruncationOverflow { len: 4, level: 3 })
        ));
    }

    #[test]
    fn undeformed_ideal_is_exact() {
        let t = TruncatedFock::new(&QMatrix::zero(2), 3).unwrap();
        let (r, _) = verify_ideal(&t, 2).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.product_residual < 1e-12 && r.adjoint_residual < 1e-12);
        assert_eq!(r.rank_p, 1);
        assert_eq!(r.unit_count, 49);
    }

    #[test]
    fn random_ideal() {
        let t = TruncatedFock::new(&QMatrix::random_isom(2, 0.9, 6).unwrap(), 4).unwrap();
        let (r, w) = verify_ideal(&t, 2).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.span_rank, 49);
        assert!(w.one_b.add(&w.p).sub(&t.identity()).norm() < 1e-12);
    }
}
