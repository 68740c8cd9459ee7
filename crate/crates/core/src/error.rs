use thiserror::Error;

/// Errors surfaced by the skein computation modules.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SkeinError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("division by a zero divisor of the eta extension (r = {r})")]
    ZeroDivisor { r: u32 },
    #[error("level must satisfy r >= 3, got {0}")]
    InvalidLevel(u32),
    #[error("strand count mismatch: {left} vs {right}")]
    StrandMismatch { left: usize, right: usize },
    #[error("{what} out of range: {value} (allowed 0..={max})")]
    OutOfRange {
        what: &'static str,
        value: i64,
        max: i64,
    },
    #[error("degenerate denominator in Jones-Wenzl recursion at stage {stage}")]
    DegenerateDenominator { stage: usize },
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("resource limit exceeded: {terms} terms (budget {budget})")]
    ResourceLimit { terms: u64, budget: u64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unsupported genus {genus} (maximum {max})")]
    UnsupportedGenus { genus: usize, max: usize },
    #[error("singular Gram matrix at genus {genus}, r = {r}")]
    SingularGram { genus: usize, r: u32 },
    #[error("theta value vanishes for admissible-looking triple ({0}, {1}, {2})")]
    ZeroTheta(u8, u8, u8),
    #[error("parse error: {0}")]
    Parse(String),
}
