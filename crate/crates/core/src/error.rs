use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point {re}+{im}i lies outside the domain")]
    OutOfDomain { re: f64, im: f64 },

    #[error("quadrature did not converge: value {value_re}+{value_im}i, error estimate {error_estimate:e} after {cells} cells")]
    QuadratureNoConvergence {
        value_re: f64,
        value_im: f64,
        error_estimate: f64,
        cells: usize,
    },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("cross-check failed: {0}")]
    CrossCheck(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn out_of_domain(z: crate::C64) -> Self {
        Error::OutOfDomain { re: z.re, im: z.im }
    }

    /// True for errors caused by the caller's input rather than by numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::OutOfDomain { .. } | Error::Hypothesis(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
