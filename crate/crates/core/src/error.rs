use thiserror::Error;

/// Errors produced by the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("flutter boundary has a pole at omega_f = 1")]
    FlutterPole,

    #[error("delay/quasipolynomial structure check failed: {0}")]
    Structure(String),

    #[error("|Q(j*omega)| vanishes at omega = {omega}; not a genuine crossing")]
    NoCrossing { omega: f64 },

    #[error("crossing verification failed at omega = {omega}, tau = {tau}: residual {residual:e}")]
    CrossingResidual { omega: f64, tau: f64, residual: f64 },

    #[error("root sensitivity denominator vanishes at s = {re} + {im}j (non-simple root)")]
    NonSimpleRoot { re: f64, im: f64 },

    #[error("characteristic root lies on the contour; winding number undefined")]
    BoundaryRoot,

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("no stable delay interval: {0}")]
    NoStableInterval(String),

    #[error("trajectory window unusable: {0}")]
    Window(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
