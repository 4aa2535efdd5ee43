use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix exponential did not produce a finite result")]
    ExpmFailure,

    #[error("continuous plant is not Hurwitz stable (max real part {max_real:.3e})")]
    NotHurwitz { max_real: f64 },

    #[error("(A, B) is not controllable (rank {rank} < {n})")]
    NotControllable { rank: usize, n: usize },

    #[error("relative degree is not one: |CB| = {cb:.3e} is below tolerance {tol:.3e}")]
    RelativeDegree { cb: f64, tol: f64 },

    #[error("could not isolate the structural zero eigenvalue (smallest modulus {modulus:.3e})")]
    StructuralZero { modulus: f64 },

    #[error("system is not stable (spectral radius {rho:.6})")]
    Unstable { rho: f64 },

    #[error("plant is minimum phase; the operation needs an unstable zero")]
    MinimumPhase,

    #[error("plant is nonminimum phase; unstable zeros: {0:?}")]
    NonMinimumPhase(Vec<Complex64>),

    #[error("expected exactly one unstable zero, found {0}")]
    UnstableZeroCount(usize),

    #[error("unstable zero {0} is complex; single-zero decomposition needs a real zero")]
    ComplexUnstableZero(Complex64),

    #[error("zero {0} lies within the unit-circle margin; classification is ambiguous")]
    MarginalZero(Complex64),

    #[error("numerator deflation by the unstable zero left remainder {0:.3e}")]
    Deflation(f64),

    #[error("kernel of C does not excite any unstable zero-dynamics mode")]
    NoUnstableExcitation,

    #[error("no samples in the fitting window [{lo}, {hi}] (found {found}, need {need})")]
    EmptyWindow { lo: f64, hi: f64, found: usize, need: usize },

    #[error("intersample output requested but the discrete plant has no continuous source")]
    MissingSource,
}

/// Coarse grouping used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Precondition,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NonFinite(_)
            | Error::ExpmFailure
            | Error::StructuralZero { .. }
            | Error::Deflation(_)
            | Error::EmptyWindow { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Precondition,
        }
    }
}
