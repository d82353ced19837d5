//! Truncated Fock representation.
//!
//! The space `⊕_{|v| <= L} H_v` is kept block by block, each block in the
//! orthonormal coordinates produced by [`orthonormalize`]. In these coordinates
//! the adjoint of an operator is its blockwise conjugate transpose.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{gram_block, orthonormalize, GramBlock};
use crate::linalg::{power_norm, rank, real, singular_values, CMatrix, CVector, RANK_REL_TOL};
use crate::rewrite::QMatrix;
use crate::words::{Expression, MultiIndex, OccVector};

/// Operator residual threshold for the defining relations.
pub const RELATION_TOL: f64 = 1e-9;

/// A block matrix family indexed by `(source, target)` occupation vectors.
/// Absent blocks are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradedOperator {
    blocks: BTreeMap<(OccVector, OccVector), CMatrix>,
}

/// A vector in `⊕ H_v`, one coordinate block per occupation vector.
pub type GradedVector = BTreeMap<OccVector, CVector>;

impl GradedOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_blocks(blocks: BTreeMap<(OccVector, OccVector), CMatrix>) -> Self {
        GradedOperator { blocks }
    }

    /// Block-diagonal operator from per-block matrices.
    pub fn diagonal(blocks: impl IntoIterator<Item = (OccVector, CMatrix)>) -> Self {
        GradedOperator {
            blocks: blocks.into_iter().map(|(v, m)| ((v.clone(), v), m)).collect(),
        }
    }

    pub fn insert(&mut self, source: OccVector, target: OccVector, m: CMatrix) {
        self.add_block(source, target, m);
    }

    fn add_block(&mut self, source: OccVector, target: OccVector, m: CMatrix) {
        match self.blocks.get_mut(&(source.clone(), target.clone())) {
            Some(existing) => *existing += m,
            None => {
                self.blocks.insert((source, target), m);
            }
        }
    }

    pub fn block(&self, source: &OccVector, target: &OccVector) -> Option<&CMatrix> {
        self.blocks.get(&(source.clone(), target.clone()))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&OccVector, &OccVector, &CMatrix)> {
        self.blocks.iter().map(|((s, t), m)| (s, t, m))
    }

    pub fn is_block_diagonal(&self) -> bool {
        self.blocks.iter().all(|((s, t), m)| s == t || m.norm() == 0.0)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &GradedOperator) -> GradedOperator {
        let mut by_source: BTreeMap<&OccVector, Vec<(&OccVector, &CMatrix)>> = BTreeMap::new();
        for ((s, t), m) in &self.blocks {
            by_source.entry(s).or_default().push((t, m));
        }
        let mut out = GradedOperator::zero();
        for ((s, mid), b) in &other.blocks {
            if let Some(list) = by_source.get(mid) {
                for (t, a) in list {
                    out.add_block(s.clone(), (*t).clone(), *a * b);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> GradedOperator {
        GradedOperator {
            blocks: self
                .blocks
                .iter()
                .map(|((s, t), m)| ((t.clone(), s.clone()), m.adjoint()))
                .collect(),
        }
    }

    pub fn add(&self, other: &GradedOperator) -> GradedOperator {
        let mut out = self.clone();
        for ((s, t), m) in &other.blocks {
            out.add_block(s.clone(), t.clone(), m.clone());
        }
        out
    }

    pub fn sub(&self, other: &GradedOperator) -> GradedOperator {
        self.add(&other.scale(real(-1.0)))
    }

    pub fn scale(&self, c: Complex64) -> GradedOperator {
        GradedOperator {
            blocks: self.blocks.iter().map(|(k, m)| (k.clone(), m * c)).collect(),
        }
    }

    /// Keeps only the blocks whose source satisfies `keep`.
    pub fn restrict_domain(&self, keep: impl Fn(&OccVector) -> bool) -> GradedOperator {
        GradedOperator {
            blocks: self
                .blocks
                .iter()
                .filter(|((s, _), _)| keep(s))
                .map(|(k, m)| (k.clone(), m.clone()))
                .collect(),
        }
    }

    /// Keeps only blocks whose source and target both satisfy `keep`.
    pub fn restrict(&self, keep: impl Fn(&OccVector) -> bool) -> GradedOperator {
        GradedOperator {
            blocks: self
                .blocks
                .iter()
                .filter(|((s, t), _)| keep(s) && keep(t))
                .map(|(k, m)| (k.clone(), m.clone()))
                .collect(),
        }
    }

    pub fn apply(&self, x: &GradedVector) -> GradedVector {
        let mut out: GradedVector = BTreeMap::new();
        for ((s, t), m) in &self.blocks {
            if let Some(xs) = x.get(s) {
                let y = m * xs;
                match out.get_mut(t) {
                    Some(acc) => *acc += y,
                    None => {
                        out.insert(t.clone(), y);
                    }
                }
            }
        }
        out
    }

    /// Largest entry modulus over all blocks.
    pub fn max_abs(&self) -> f64 {
        self.blocks.values().map(|m| m.camax()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks.values().map(|m| m.norm_squared()).sum::<f64>().sqrt()
    }

    fn layout<'a>(keys: impl Iterator<Item = (&'a OccVector, usize)>) -> (BTreeMap<OccVector, usize>, usize) {
        let mut offsets = BTreeMap::new();
        let mut total = 0;
        for (v, d) in keys {
            if !offsets.contains_key(v) {
                offsets.insert(v.clone(), total);
                total += d;
            }
        }
        (offsets, total)
    }

    /// Dense matrix over the blocks that actually occur, sources and targets each in key order.
    pub fn to_dense(&self) -> CMatrix {
        let (src, n_src) = Self::layout(self.blocks.iter().map(|((s, _), m)| (s, m.ncols())));
        let (tgt, n_tgt) = Self::layout(self.blocks.iter().map(|((_, t), m)| (t, m.nrows())));
        let mut out = CMatrix::zeros(n_tgt, n_src);
        for ((s, t), m) in &self.blocks {
            let mut view = out.view_mut((tgt[t], src[s]), m.shape());
            view += m;
        }
        out
    }

    /// Numerical rank with the threshold `RANK_REL_TOL * ||self||` taken over the whole operator.
    pub fn rank(&self) -> usize {
        if self.is_block_diagonal() {
            let values: Vec<f64> = self.blocks.values().flat_map(singular_values).collect();
            let top = values.iter().copied().fold(0.0, f64::max);
            values.iter().filter(|&&x| top > 0.0 && x > RANK_REL_TOL * top).count()
        } else {
            rank(&self.to_dense())
        }
    }

    /// Operator norm (largest singular value) by power iteration, converged to 1e-12.
    pub fn norm(&self) -> f64 {
        if self.max_abs() == 0.0 {
            return 0.0;
        }
        let (src, n_src) = Self::layout(self.blocks.iter().map(|((s, _), m)| (s, m.ncols())));
        let (tgt, n_tgt) = Self::layout(self.blocks.iter().map(|((_, t), m)| (t, m.nrows())));
        let forward = |x: &CVector| {
            let mut y = CVector::zeros(n_tgt);
            for ((s, t), m) in &self.blocks {
                let xs = x.rows(src[s], m.ncols());
                let mut ys = y.rows_mut(tgt[t], m.nrows());
                ys += m * xs;
            }
            y
        };
        let backward = |y: &CVector| {
            let mut x = CVector::zeros(n_src);
            for ((s, t), m) in &self.blocks {
                let yt = y.rows(tgt[t], m.nrows());
                let mut xs = x.rows_mut(src[s], m.ncols());
                xs += m.adjoint() * yt;
            }
            x
        };
        power_norm(n_src, forward, backward, 1e-12)
    }
}

/// Per-block orthonormal frame: `to_raw` maps orthonormal coordinates to raw
/// word coordinates, `from_raw` is its inverse.
#[derive(Clone, Debug)]
pub struct Frame {
    pub to_raw: CMatrix,
    pub from_raw: CMatrix,
}

/// The truncated Fock space `⊕_{|v| <= L} H_v` together with the generator matrices.
#[derive(Clone, Debug)]
pub struct TruncatedFock {
    n: usize,
    level: usize,
    q: QMatrix,
    blocks: BTreeMap<OccVector, GramBlock>,
    frames: BTreeMap<OccVector, Frame>,
    creation: Vec<GradedOperator>,
}

impl TruncatedFock {
    /// Builds every block with `|v| <= level`; fails if any Gram block is not positive.
    pub fn new(q: &QMatrix, level: usize) -> Result<Self> {
        Self::from_family(q, level, OccVector::up_to_level(q.n(), level))
    }

    /// Truncation level `n*k + 1`, enough for every block `v <= k^n` plus one spare level.
    pub fn for_filtration(q: &QMatrix, k: usize) -> Result<Self> {
        Self::new(q, q.n() * k + 1)
    }

    /// Only the blocks `v <= bound` componentwise. Creation leaving the box is truncated to zero.
    pub fn boxed(q: &QMatrix, bound: &OccVector) -> Result<Self> {
        Self::from_family(q, bound.level(), OccVector::lattice_below(bound))
    }

    fn from_family(q: &QMatrix, level: usize, family: Vec<OccVector>) -> Result<Self> {
        let n = q.n();
        let mut blocks = BTreeMap::new();
        let mut frames = BTreeMap::new();
        for v in family {
            let g = gram_block(&v, q)?;
            let to_raw = orthonormalize(&g)?;
            // to_raw = L^{-T}, so its inverse is L^T
            let from_raw = g.chol.as_ref().expect("certified block").transpose();
            frames.insert(v.clone(), Frame { to_raw, from_raw });
            blocks.insert(v, g);
        }
        let mut t = TruncatedFock { n, level, q: q.clone(), blocks, frames, creation: Vec::new() };
        t.creation = (0..n).map(|i| t.build_creation(i)).collect();
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn q(&self) -> &QMatrix {
        &self.q
    }

    pub fn gram(&self, v: &OccVector) -> Option<&GramBlock> {
        self.blocks.get(v)
    }

    pub fn frame(&self, v: &OccVector) -> Option<&Frame> {
        self.frames.get(v)
    }

    pub fn contains(&self, v: &OccVector) -> bool {
        self.blocks.contains_key(v)
    }

    /// Blocks from which every creation operator stays inside the truncation.
    pub fn is_interior(&self, v: &OccVector) -> bool {
        self.blocks.contains_key(v) && (0..self.n).all(|i| self.blocks.contains_key(&v.bump(i)))
    }

    pub fn block_keys(&self) -> impl Iterator<Item = &OccVector> {
        self.blocks.keys()
    }

    pub fn dim(&self, v: &OccVector) -> usize {
        self.blocks.get(v).map_or(0, |g| g.dim())
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.values().map(|g| g.dim()).sum()
    }

    /// `(block, column)` of a word in the raw basis.
    pub fn locate(&self, word: &MultiIndex) -> Option<(OccVector, usize)> {
        let v = word.occ(self.n);
        let pos = self.blocks.get(&v)?.position(word)?;
        Some((v, pos))
    }

    pub fn identity(&self) -> GradedOperator {
        self.identity_on(|_| true)
    }

    pub fn identity_on(&self, keep: impl Fn(&OccVector) -> bool) -> GradedOperator {
        GradedOperator::diagonal(
            self.blocks
                .iter()
                .filter(|(v, _)| keep(v))
                .map(|(v, g)| (v.clone(), CMatrix::identity(g.dim(), g.dim()))),
        )
    }

    fn build_creation(&self, i: usize) -> GradedOperator {
        let mut op = GradedOperator::zero();
        for (v, g) in &self.blocks {
            let target = v.bump(i);
            let Some(tg) = self.blocks.get(&target) else { continue };
            let mut raw = CMatrix::zeros(tg.dim(), g.dim());
            for (col, alpha) in g.basis.iter().enumerate() {
                let word = MultiIndex::new(vec![i]).concat(alpha);
                let row = tg.position(&word).expect("prepended word lies in the target block");
                raw[(row, col)] = real(1.0);
            }
            let m = &self.frames[&target].from_raw * raw * &self.frames[v].to_raw;
            op.insert(v.clone(), target, m);
        }
        op
    }

    /// The vacuum vector `Omega`.
    pub fn vacuum(&self) -> GradedVector {
        let mut x = BTreeMap::new();
        x.insert(OccVector::zero(self.n), CVector::from_element(1, real(1.0)));
        x
    }

    /// Orthonormal coordinates of the raw word vector `a_word Omega`.
    pub fn word_vector(&self, word: &MultiIndex) -> Option<GradedVector> {
        let (v, pos) = self.locate(word)?;
        let col = self.frames[&v].from_raw.column(pos).into_owned();
        let mut x = BTreeMap::new();
        x.insert(v, col);
        Some(x)
    }
}

/// `<x, y>` linear in `x`, conjugate-linear in `y`, in orthonormal coordinates.
pub fn graded_inner(x: &GradedVector, y: &GradedVector) -> Complex64 {
    x.iter()
        .filter_map(|(v, xv)| y.get(v).map(|yv| yv.dotc(xv)))
        .sum()
}

/// `pi_F(a_i)`: maps block `v` to `v + delta_i`; blocks at the top level map to zero.
pub fn creation(i: usize, t: &TruncatedFock) -> GradedOperator {
    assert!(i < t.n, "generator {i} out of range");
    t.creation[i].clone()
}

/// `pi_F(a_i*)`, the blockwise conjugate transpose of [`creation`].
pub fn annihilation(i: usize, t: &TruncatedFock) -> GradedOperator {
    creation(i, t).adjoint()
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationResidual {
    /// 1-based generator labels.
    pub i: usize,
    pub j: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    pub n: usize,
    pub level: usize,
    /// Relations are checked on domain blocks with `|v| <= checked_up_to`
    /// (for box truncations: on the blocks all of whose successors are present).
    pub checked_up_to: usize,
    pub note: String,
    pub residuals: Vec<RelationResidual>,
    pub max_residual: f64,
    /// `max_i ||A_i* A_i - 1 - q_ii A_i A_i*||` on the excluded blocks, which the truncation breaks.
    pub boundary_residual: f64,
}

impl RelationReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_residual < tol
    }
}

fn relation_operator(t: &TruncatedFock, i: usize, j: usize) -> GradedOperator {
    let ai = creation(i, t);
    let aj = creation(j, t);
    let mut r = ai.adjoint().compose(&aj).sub(&aj.compose(&ai.adjoint()).scale(t.q.get(i, j)));
    if i == j {
        r = r.sub(&t.identity());
    }
    r
}

/// Residuals of `a_i* a_j - q_ij a_j a_i* - delta_ij` below the top level.
pub fn relation_report(t: &TruncatedFock) -> RelationReport {
    let safe = t.level.saturating_sub(1);
    let interior = |v: &OccVector| t.is_interior(v);
    let mut residuals = Vec::new();
    let mut boundary: f64 = 0.0;
    for i in 0..t.n {
        for j in 0..t.n {
            let r = relation_operator(t, i, j);
            let residual = r.restrict_domain(interior).norm();
            residuals.push(RelationResidual { i: i + 1, j: j + 1, residual });
            if i == j {
                boundary = boundary.max(r.restrict_domain(|v| !interior(v)).norm());
            }
        }
    }
    let max_residual = residuals.iter().map(|r| r.residual).fold(0.0, f64::max);
    RelationReport {
        n: t.n,
        level: t.level,
        checked_up_to: safe,
        note: format!(
            "top level {} excluded: creation out of it is truncated to zero",
            t.level
        ),
        residuals,
        max_residual,
        boundary_residual: boundary,
    }
}

/// Like [`relation_report`] but fails with `RelationViolated` on the worst residual above `tol`.
pub fn verify_relations(t: &TruncatedFock, tol: f64) -> Result<RelationReport> {
    let report = relation_report(t);
    if let Some(worst) = report
        .residuals
        .iter()
        .filter(|r| r.residual >= tol)
        .max_by(|a, b| a.residual.partial_cmp(&b.residual).unwrap())
    {
        return Err(Error::RelationViolated { i: worst.i, j: worst.j, norm: worst.residual });
    }
    Ok(report)
}

/// Matrix of `pi_F(a_mu a_sigma*)` restricted to block `w`, with its target block.
///
/// `None` when the monomial kills the block or passes through a truncated block.
pub fn monomial_on_block(
    mu: &MultiIndex,
    sigma: &MultiIndex,
    w: &OccVector,
    t: &TruncatedFock,
) -> Option<(OccVector, CMatrix)> {
    let dim = t.dim(w);
    if dim == 0 {
        return None;
    }
    let mut block = w.clone();
    let mut m = CMatrix::identity(dim, dim);
    // a_mu a_sigma* = a_{mu_1} .. a_{mu_k} a_{sigma_m}* .. a_{sigma_1}*; a_{sigma_1}* acts first
    for &s in sigma.iter() {
        let lower = block.drop_one(s)?;
        let a = t.creation[s].block(&lower, &block)?;
        m = a.adjoint() * m;
        block = lower;
    }
    for &g in mu.iter().rev() {
        let upper = block.bump(g);
        let a = t.creation[g].block(&block, &upper)?;
        m = a * m;
        block = upper;
    }
    Some((block, m))
}

/// `pi_F(a_mu a_sigma*)` on every block of the truncation.
pub fn monomial_operator(mu: &MultiIndex, sigma: &MultiIndex, t: &TruncatedFock) -> GradedOperator {
    let mut op = GradedOperator::zero();
    for w in t.block_keys() {
        if let Some((target, m)) = monomial_on_block(mu, sigma, w, t) {
            op.insert(w.clone(), target, m);
        }
    }
    op
}

/// Linear extension of the monomial action to an expression in normal form.
pub fn act_on_expression(x: &Expression, t: &TruncatedFock) -> GradedOperator {
    let mut out = GradedOperator::zero();
    for (mu, sigma, c) in x.terms() {
        out = out.add(&monomial_operator(mu, sigma, t).scale(c));
    }
    out
}
