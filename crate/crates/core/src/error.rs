use thiserror::Error;

/// Errors raised by the correlation engines, the Monte Carlo simulator and
/// the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// No physical observation angle produces the requested phase.
    #[error("phase {delta} is unreachable: |delta| exceeds kd = {kd}")]
    UnreachablePhase { delta: f64, kd: f64 },

    /// The requested correlation order is too large for the selected algorithm.
    #[error("order {order} exceeds the {what} limit of {limit}")]
    Capacity {
        what: &'static str,
        order: usize,
        limit: usize,
    },

    /// A Monte Carlo tally did not collect enough counts to form an estimate.
    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),

    /// The scan is sampled too coarsely for the requested peak count.
    #[error("resolution insufficient: {0}")]
    ResolutionInsufficient(String),

    /// Spacings recovered from different detector pairs disagree.
    #[error("inconsistent detector angles: relative spread {spread:.3e} exceeds {limit}")]
    Inconsistent { spread: f64, limit: f64 },

    /// The magic-position search did not reach the purity threshold.
    #[error("magic-position search failed: best out-of-band energy {purity:.3e} at {phases:?}")]
    SearchFailed { phases: Vec<f64>, purity: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
