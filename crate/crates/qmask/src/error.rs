use thiserror::Error;

/// Errors produced by state construction, gate application and the
/// masking/unmasking protocols.
#[derive(Debug, Error)]
pub enum QmaskError {
    #[error("site dimension {0} is below 2")]
    DimTooSmall(usize),
    #[error("register dimension overflows the dense cap ({0} amplitudes allowed)")]
    DimensionOverflow(usize),
    #[error("amplitude count {got} does not match register dimension {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("state vector has zero norm")]
    ZeroNorm,
    #[error("site index {0} out of range for register of {1} sites")]
    SiteOutOfRange(usize, usize),
    #[error("repeated site index {0}")]
    RepeatedSite(usize),
    #[error("operator shape does not match the dimensions at the given sites")]
    OperatorShapeMismatch,
    #[error("density matrices have different dimensions ({0} vs {1})")]
    DimMismatch(usize, usize),
    #[error("states have different register shapes")]
    ShapeMismatch,
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix trace deviates from 1 by {0:.3e}")]
    BadTrace(f64),
    #[error("matrix has negative eigenvalue {0:.3e}")]
    NotPositive(f64),
    #[error("Bell label ({k},{l}) out of range for dimension {d}")]
    InvalidLabel { d: usize, k: usize, l: usize },
    #[error("invalid controlled-shift direction {0} (must be +1 or -1)")]
    InvalidDirection(i8),
    #[error("input state is not in the range of the masking isometry (residual {0:.3e})")]
    NotInRange(f64),
    #[error("scheme {scheme} does not support dimension {d}")]
    InvalidScheme { scheme: String, d: usize },
    #[error("invalid unmask target site {0} (expected 2 or 3)")]
    InvalidTarget(usize),
    #[error("measurement outcome {0} out of range for dimension {1}")]
    OutcomeOutOfRange(usize, usize),
}

pub type Result<T> = std::result::Result<T, QmaskError>;
