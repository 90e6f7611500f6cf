use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive refinement ran out of depth (or panels) before reaching the
    /// requested tolerance.
    #[error("tolerance not met: achieved error estimate {achieved:.3e}, requested {requested:.3e}")]
    ToleranceNotMet { achieved: f64, requested: f64 },

    /// Falling moments that do not belong to any distribution on {0, …, r}.
    #[error("invalid moment vector: probability {value:.3e} at index {index}")]
    InvalidMoments { index: usize, value: f64 },

    #[error("duplicate cycle length {0} in cycle spec")]
    DuplicateCycleLength(u64),

    /// A request exceeds a fixed size or cost guard.
    #[error("size limit exceeded: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
