use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("c is not in the column space of G (residual {residual:e})")]
    NotInColumnSpace { residual: f64 },

    #[error("sigma2[{index}] = {value} is not strictly positive")]
    NonPositiveSigma2 { index: usize, value: f64 },

    #[error("G(sigma0, sigma1) is singular")]
    SingularG,

    #[error("f[{index}] + sigma1[{index}] = {value:e} is at the nondifferentiable point zero")]
    TieAtZero { index: usize, value: f64 },

    #[error("no interior point of the dual cone was found")]
    NoInteriorPoint,

    #[error("instance is not diagonal (A and B must both be diagonal)")]
    NotDiagonal,

    #[error("c[{index}] is zero")]
    ZeroC { index: usize },

    #[error("dimension {n} exceeds the limit {max}")]
    TooLarge { n: usize, max: usize },

    #[error("invalid instance: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what: what.to_string(),
            expected,
            got,
        })
    }
}
