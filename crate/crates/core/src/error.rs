use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid sector: {0}")]
    InvalidSector(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("division by zero in {0}")]
    Division(&'static str),

    #[error("malformed chain: {0}")]
    Chain(String),

    #[error("degenerate spectrum: gap {gap:e} at index {index} is below tolerance")]
    DegenerateSpectrum { index: usize, gap: f64 },

    #[error("sector violation: transition to inadmissible index {0}")]
    SectorViolation(String),

    #[error("integration failed at t = {t_last}: {reason}")]
    Integration { t_last: f64, reason: String },

    #[error("system too large for dense simulation: {0} spins (limit 12)")]
    DimensionCap(u32),

    #[error("state is not permutation symmetric: residual {0:e}")]
    ProjectionInvalid(f64),

    #[error("time grid mismatch: {0}")]
    TimeGridMismatch(String),

    #[error("numeric overflow computing {0}")]
    Overflow(&'static str),
}
