use thiserror::Error;

use crate::fit::FitReport;

/// Errors raised by the special-function kernel, the distribution models
/// and the metric evaluators.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// A numerical procedure failed to reach its accuracy target.
    #[error("numeric failure in {op}: {msg}")]
    Numeric { op: &'static str, msg: String },

    /// Left and right pole families of a Mellin-Barnes integrand cannot be
    /// separated by a vertical contour.
    #[error("degenerate Meijer-G parameters: {0}; perturb the coincident parameters")]
    Degenerate(String),

    /// `select_k` could not meet the requested MSE target; carries the best fit seen.
    #[error("MSE target {target:e} unreachable with K <= {k_max} (best mse {:e} at K = {})", best.mse, best.k)]
    TargetUnreachable {
        target: f64,
        k_max: usize,
        best: Box<FitReport>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain {
        op,
        msg: msg.into(),
    }
}

pub(crate) fn numeric(op: &'static str, msg: impl Into<String>) -> Error {
    Error::Numeric {
        op,
        msg: msg.into(),
    }
}
