use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("site {0} is not part of the register")]
    UnknownSite(usize),

    #[error("site {0} appears more than once")]
    DuplicateSite(usize),

    #[error("site set is empty")]
    EmptySiteSet,

    #[error("regions overlap on site {0}")]
    OverlappingRegions(usize),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{qubits} qubits exceed the dense cap of {cap}")]
    TooManyQubits { qubits: usize, cap: usize },

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("operator has negative eigenvalue {0:.3e}")]
    NegativeSpectrum(f64),

    #[error("trace is {0}, expected 1")]
    InvalidTrace(f64),

    #[error("state norm is {0}, expected 1")]
    NotNormalized(f64),

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("operator norm {0} exceeds 1")]
    OperatorNorm(f64),

    #[error("operator has weight {0:.3e} outside the support of the reference state")]
    SupportMismatch(f64),

    #[error("denominator 1 - <O_B>^2 = {0:.3e} is below the underflow guard")]
    DenominatorUnderflow(f64),

    #[error("criterion routes disagree: route a = {route_a}, route b = {route_b}")]
    RouteMismatch { route_a: f64, route_b: f64 },

    #[error("finite-difference extrapolation did not converge (value {value}, uncertainty {uncertainty})")]
    NonConvergent { value: f64, uncertainty: f64 },

    #[error("fit rejected: residual rms {0:.3e}")]
    BadFit(f64),

    #[error("no bracketing crossing in the supplied scan")]
    NoBracket,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("LAPACK routine {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },
}

impl Error {
    /// True for internal consistency failures (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RouteMismatch { .. }
                | Error::NonConvergent { .. }
                | Error::Lapack { .. }
                | Error::SupportMismatch(_)
                | Error::DenominatorUnderflow(_)
                | Error::BadFit(_)
                | Error::NoBracket
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
