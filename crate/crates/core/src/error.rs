use thiserror::Error;

/// Errors raised by the physics and numerics layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("config error in `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(
        "parametric divergence: |kappa^2 + Delta^2 - 4G^2| = {value:e} is below the floor {floor:e}"
    )]
    ParametricDivergence { value: f64, floor: f64 },

    #[error("no real steady-state branch found")]
    NoBranches,

    #[error("polynomial root iteration did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("splitting estimate invalid: {0}")]
    EstimateInvalid(String),

    #[error("operating point is unstable; a stationary spectrum does not exist")]
    Unstable,

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("stability verdict is the same at both ends of [{lo}, {hi}]")]
    NoBoundary { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl serde::Serialize for Error {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
