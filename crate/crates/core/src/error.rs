use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },

    #[error("pairing matrix is not skew-symmetric at ({row}, {col})")]
    NotSkew { row: usize, col: usize },

    #[error("pairing matrix must be square of size {0}")]
    BadMatrixShape(usize),

    #[error("active charges with vanishing central charge: {0}")]
    ZeroCentralCharge(String),

    #[error("truncation orders differ: {0} vs {1}")]
    TruncationMismatch(u32, u32),

    #[error("series has a nonzero s^0 term; exp/log need a nilpotent argument")]
    NonzeroConstantTerm,

    #[error("derivation is not nilpotent on the truncated algebra")]
    NonNilpotent,

    #[error("BPS structure is not uncoupled: <{0}, {1}> != 0 on the support")]
    NotUncoupled(String, String),

    #[error("order-by-order DT matching failed at s^{order}: {detail}")]
    DtMatchFailure { order: u32, detail: String },

    #[error("sheaf table is not symmetric in n: S_{n} != S_{neg}", neg = -n)]
    AsymmetricTable { n: i64 },

    #[error("curve class {0} is not effective")]
    NotEffective(String),

    #[error("Kahler degree must be positive, got {0}")]
    NonPositiveDegree(f64),

    #[error("evaluation point lies on (or within the angular guard of) an integration ray: {0}")]
    OnIntegrationRay(String),

    #[error("evaluation ray coincides with an active ray or with R<0: {0}")]
    RayCollision(String),

    #[error("quadrature did not converge: estimated error {error:e} after {subdivisions} subdivisions")]
    QuadratureFailure { error: f64, subdivisions: usize },

    #[error("degenerate ray: central charge vanishes")]
    DegenerateRay,

    #[error("odd index {0} for an even Bernoulli number")]
    OddBernoulliIndex(u32),

    #[error("residual pi symbol after specialisation in coefficient {0}")]
    ResidualPi(String),

    #[error("resonant base: |1 - b| = {0:e} below guard")]
    Resonance(f64),

    #[error("active rays overlap within the angular offset {0}")]
    OverlappingRays(f64),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
