use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cell size must be positive, got {0}")]
    NonPositiveCellSize(f64),
    #[error("point {index} lies outside the non-periodic domain")]
    PointOutsideDomain { index: usize },
    #[error("empty candidate set")]
    EmptyCandidateSet,
    #[error("unsupported dimension {0}, expected 2 or 3")]
    UnsupportedDimension(usize),
    #[error("Chebyshev-Lobatto grid needs degree >= 1")]
    ZeroDegreeGrid,
    #[error("insufficient points for regression: have {have}, need {need}")]
    InsufficientPoints { have: usize, need: usize },
    #[error("insufficient neighbors around seed {seed}: have {have}, need {need}")]
    InsufficientNeighbors { seed: usize, have: usize, need: usize },
    #[error("degenerate fit: diagonal ratio {ratio:e} below threshold")]
    DegenerateFit { ratio: f64 },
    #[error("vanishing gradient")]
    VanishingGradient,
    #[error("iteration did not converge within {iterations} iterations")]
    NotConverged { iterations: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("shift amplitude alpha must lie in [0, 0.5), got {0}")]
    InvalidAlpha(f64),
    #[error("reach {reach} must be smaller than half band width {half_width}")]
    ReachExceedsBand { reach: f64, half_width: f64 },
    #[error("kernel argument must be non-negative, got {0}")]
    NegativeKernelArgument(f64),
    #[error("non-positive density {0}")]
    NonPositiveDensity(f64),
    #[error("coincident particles {0} and {1}")]
    CoincidentParticles(usize, usize),
    #[error("missing surface geometry for particle {0}")]
    MissingGeometry(usize),
    #[error("no samples available for redistancing")]
    NoSamples,
    #[error("convergence order needs at least two positive (h, e) pairs")]
    InvalidConvergenceData,
}
