use thiserror::Error;

use crate::words::OccVector;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid q matrix: {0}")]
    InvalidQ(String),

    #[error("operation requires q_ii = 0 for all i (isometry mode): {0}")]
    NotIsometric(String),

    #[error("letters at position {pos} do not form a redex (a_i* a_j)")]
    NotARedex { pos: usize },

    #[error("cannot parse word: {0}")]
    Parse(String),

    #[error("generator index {index} out of range for n = {n}")]
    GeneratorOutOfRange { index: usize, n: usize },

    #[error("Gram block {v} is not positive-definite (min pivot {min_pivot:e})")]
    NotPositive { v: OccVector, min_pivot: f64 },

    #[error("occupation vectors are not ordered: {v} is not <= {u}")]
    BadOrder { v: OccVector, u: OccVector },

    #[error("word of length {len} exceeds truncation level {level}")]
    TruncationOverflow { len: usize, level: usize },

    #[error("relation violated for (i, j) = ({i}, {j}): residual {norm:e}")]
    RelationViolated { i: usize, j: usize, norm: f64 },

    #[error("decomposition check failed: {0}")]
    DecompositionFailure(String),

    #[error("non-integral multiplicity: rank {rank} / dim {dim}")]
    NonIntegralMultiplicity { rank: usize, dim: u64 },

    #[error("spectral gap too small: eigenvalue {eigenvalue:e} near threshold {threshold:e}")]
    SpectralGapTooSmall { eigenvalue: f64, threshold: f64 },

    #[error("matrix is not unitary (residual {0:e})")]
    NotUnitary(f64),

    #[error("torus element has a component off the unit circle (|w_{index}| = {modulus})")]
    NotOnTorus { index: usize, modulus: f64 },

    #[error("{0}")]
    Config(String),
}

impl Error {
    /// Name of the invariant a computation found violated; `None` when the input itself was bad.
    pub fn failed_invariant(&self) -> Option<&'static str> {
        match self {
            Error::NotPositive { .. } => Some("gram_positive_definite"),
            Error::RelationViolated { .. } => Some("fock_relations"),
            Error::DecompositionFailure(_) => Some("block_decomposition"),
            Error::NonIntegralMultiplicity { .. } => Some("integral_multiplicity"),
            Error::SpectralGapTooSmall { .. } => Some("spectral_gap"),
            _ => None,
        }
    }
}
