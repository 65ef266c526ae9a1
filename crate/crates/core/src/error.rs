use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature failed to converge: requested {requested:e}, achieved {achieved:e} ({context})")]
    QuadratureFailure {
        requested: f64,
        achieved: f64,
        context: String,
    },

    /// A lag is not an integer multiple of the grid spacing.
    #[error("alignment error: lag {lag} is not a multiple of grid spacing {spacing}")]
    Alignment { lag: f64, spacing: f64 },

    /// A requested window or lag falls outside the available grid.
    #[error("window [{a}, {b}] is outside the grid [{lo}, {hi}]")]
    Window { a: f64, b: f64, lo: f64, hi: f64 },

    /// Path simulation failed (covariance factorization).
    #[error("simulation error: {0}")]
    Simulation(String),

    /// Experiment configuration is invalid.
    #[error("config error: {0}")]
    Config(String),

    /// Requested computation is valid but not supported at this cost tier.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::QuadratureFailure { .. } | Error::Simulation(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
