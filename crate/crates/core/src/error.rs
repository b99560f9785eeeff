use alloc::string::String;

use crate::mode::ModeLabel;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    Shape {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("mode {0} is not part of the ordering")]
    UnknownMode(ModeLabel),

    #[error("mode {0} appears more than once")]
    DuplicateMode(ModeLabel),

    #[error("matrix is not symplectic (residual {residual:e})")]
    NotSymplectic { residual: f64 },

    #[error("covariance is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("covariance violates the uncertainty relation (min eigenvalue {0:e})")]
    UncertaintyViolated(f64),

    #[error("validation error: {0}")]
    Validation(String),
}

impl Error {
    pub(crate) fn shape(context: &'static str, expected: usize, found: usize) -> Self {
        Error::Shape {
            context,
            expected,
            found,
        }
    }
}
