use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("{name} = {value} is outside the admissible interval {interval}")]
    GainOutOfRange {
        name: &'static str,
        value: f64,
        interval: String,
    },

    #[error("denominator is not Hurwitz{}", .tau.map(|t| format!(" at tau = {t}")).unwrap_or_default())]
    NonHurwitz { tau: Option<f64> },

    #[error("pole on the imaginary axis at omega = {omega}")]
    PoleOnAxis { omega: f64 },

    #[error("root iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: u32, residual: f64 },

    #[error("polynomial degree {0} is not supported here")]
    UnsupportedDegree(usize),

    #[error("poles are not real and distinct")]
    NotRealDistinct,

    #[error("simulation diverged at step {step} (t = {time})")]
    Divergence { step: usize, time: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidSpec(msg.into())
    }
}
