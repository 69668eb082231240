use thiserror::Error;

/// Errors raised by the scattering model, the solvers and the spectrum analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransportError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("energy {energy} lies on an atomic level (pole of the renormalized energy)")]
    AtomPole { energy: f64 },

    #[error("energy {energy} is outside the open lead band; no incident photon propagates")]
    LeadBandEdge { energy: f64 },

    #[error("linear system is numerically singular ({reason})")]
    SingularSystem { reason: String },

    #[error("no band gap could be bracketed")]
    NoGap,

    #[error("requested spectral feature is absent: {0}")]
    FeatureAbsent(String),

    #[error("probe energy {energy} is not in the evanescent regime")]
    NotEvanescent { energy: f64 },
}

pub type Result<T> = std::result::Result<T, TransportError>;
