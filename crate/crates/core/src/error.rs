use alloc::string::String;

/// Errors produced by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A theorem hypothesis (e.g. `θ < 1/|A|` for the `main2` schedule) does
    /// not hold for the requested configuration.
    #[error("hypothesis violated ({theorem}): {detail}")]
    Hypothesis { theorem: &'static str, detail: String },

    #[error("power iteration did not converge after {iterations} iterations (last sup-change {last_change:e})")]
    NoConvergence { iterations: usize, last_change: f64 },

    #[error("numerical check failed: {0}")]
    Numerical(String),

    /// An exact identity that must hold by construction was violated.
    #[error("identity violated: {0}")]
    Identity(String),

    #[error("fit impossible: {0}")]
    FitImpossible(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidInput(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
