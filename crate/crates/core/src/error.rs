use crate::C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid rates: {0}")]
    InvalidRates(String),

    #[error("unstable rates: lambda={lambda} must be below every mu in {mu:?}")]
    UnstableRates { lambda: f64, mu: Vec<f64> },

    #[error("mu1 and mu2 coincide; use the equal-rates formula")]
    EqualRates,

    #[error("mu1 and mu2 differ; the equal-rates formula does not apply")]
    RatesNotEqual,

    #[error("3-tandem formula needs pairwise distinct service rates")]
    EqualRates3d,

    #[error("expected {expected} stations, got {got}")]
    StationCount { expected: usize, got: usize },

    #[error("{0} must be nonzero")]
    ZeroArgument(&'static str),

    #[error("discriminant {delta} vanishes at beta={beta}; conjugate roots coincide")]
    DegenerateDiscriminant { beta: C64, delta: C64 },

    #[error("point {0} is outside the domain of this operation")]
    InvalidPoint(String),

    #[error("Gauss-Seidel did not converge in {sweeps} sweeps (last update {residual:e})")]
    NotConverged { sweeps: usize, residual: f64 },

    #[error("basis is rank deficient on the boundary samples")]
    RankDeficientBasis,

    #[error("basis element beta={beta} is inadmissible: {reason}")]
    InadmissibleBasisElement { beta: C64, reason: String },

    #[error("value has non-negligible imaginary part: {0}")]
    ComplexValue(C64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
