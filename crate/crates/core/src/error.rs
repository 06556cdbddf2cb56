use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("number of Majorana modes must be even and positive, got {0}")]
    OddModes(usize),

    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dense dimension {dim} exceeds cap {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("interaction order q={q} out of range 0 < q <= n/2 for n={n}")]
    OrderOutOfRange { n: usize, q: usize },

    #[error("matrix is not antisymmetric (max |J + J^T| = {0:e})")]
    NotAntisymmetric(f64),

    #[error("eigensolver did not converge for a {0}x{0} matrix")]
    EigenNonConvergence(usize),

    #[error("eigenvalue pairing failed: relative gap {gap:e} at pair {index}")]
    PairingFailed { index: usize, gap: f64 },

    #[error("point is not in the auxiliary space: {0}")]
    NotInSpace(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("support size {size} exceeds cap {cap}")]
    SupportCapExceeded { size: usize, cap: usize },

    #[error("enumeration of 2^{exponent} atoms exceeds cap 2^{cap}")]
    EnumerationCapExceeded { exponent: usize, cap: usize },

    #[error("window [-{half_width}, {half_width}] too small: tail mass bound {bound:e}")]
    WindowTooSmall { half_width: f64, bound: f64 },

    #[error("law is (nearly) atomic at this grid resolution; use sampling or enumeration")]
    AtomicLaw,

    #[error("reconstruction failed: {0}")]
    Reconstruction(String),

    #[error("more than {0} nonzero coordinates detected")]
    KMaxExceeded(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported limit law: {0}")]
    UnsupportedLaw(String),
}

impl Error {
    /// Usage-type errors map to exit code 1 in the CLI, numerical ones to 2.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::OddModes(_)
                | Error::IndexOutOfRange { .. }
                | Error::InvalidIndexSet(_)
                | Error::OrderOutOfRange { .. }
                | Error::NotInSpace(_)
                | Error::InvalidMeasure(_)
                | Error::InvalidParameter(_)
                | Error::UnsupportedLaw(_)
        )
    }
}
