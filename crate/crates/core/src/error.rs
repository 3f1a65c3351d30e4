use thiserror::Error;

/// Errors raised by the analysis pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |m - m^dagger| = {0:.3e})")]
    NonHermitian(f64),
    #[error("matrix has negative eigenvalue {0:.3e}")]
    NegativeEigenvalue(f64),
    #[error("unsupported matrix dimension {0} (expected {1})")]
    Dimension(usize, &'static str),
    #[error("state is not physical: {0}")]
    NonPhysicalState(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("measurement settings do not form a complete tomographic set (|det B| = {0:.3e})")]
    SingularSet(f64),
    #[error("negative coincidence rate {rate} in record {index}")]
    NegativeRate { index: usize, rate: f64 },
    #[error("all Cholesky parameters are zero")]
    ZeroParams,
    #[error("vanishing minor in parameter inversion: {0}")]
    DegenerateMinor(&'static str),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("optimizer did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("correlation denominator is not positive")]
    ZeroTotal,
    #[error("angle pattern mismatch: {0}")]
    PatternMismatch(String),
    #[error("missing angle combination ({0}, {1})")]
    MissingCombination(f64, f64),
    #[error("singles rate is zero")]
    ZeroSingles,
    #[error("expected {expected} records, got {got}")]
    RecordCount { expected: usize, got: usize },
}

impl Error {
    /// Short machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonHermitian(_) => "non_hermitian",
            Error::NegativeEigenvalue(_) => "negative_eigenvalue",
            Error::Dimension(..) => "dimension",
            Error::NonPhysicalState(_) => "non_physical_state",
            Error::DegenerateInput(_) => "degenerate_input",
            Error::SingularSet(_) => "singular_set",
            Error::NegativeRate { .. } => "negative_rate",
            Error::ZeroParams => "zero_params",
            Error::DegenerateMinor(_) => "degenerate_minor",
            Error::Domain(_) => "domain",
            Error::NoConvergence(_) => "no_convergence",
            Error::ZeroTotal => "zero_total",
            Error::PatternMismatch(_) => "pattern_mismatch",
            Error::MissingCombination(..) => "missing_combination",
            Error::ZeroSingles => "zero_singles",
            Error::RecordCount { .. } => "record_count",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
