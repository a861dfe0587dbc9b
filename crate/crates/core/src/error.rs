use thiserror::Error;

/// Errors produced by the solver modules.
#[derive(Debug, Error)]
pub enum RingError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The spectral parameter is too close to an eigenvalue for a regular-point
    /// evaluation; use the resonance-separated path instead.
    #[error("spectral parameter {lambda} lies within {dist:.3e} of eigenvalue {eigenvalue}")]
    NearPole {
        lambda: f64,
        eigenvalue: f64,
        dist: f64,
    },

    #[error("{lambda0} is not an eigenvalue (nearest eigenvalue: {nearest})")]
    NotAnEigenvalue { lambda0: f64, nearest: f64 },

    /// The certified series tail at the given truncation exceeds the requested
    /// tolerance.
    #[error("series truncated at {modes} modes has tail bound {tail:.3e} > requested {requested:.3e}; increase the mode count")]
    Truncation {
        modes: usize,
        tail: f64,
        requested: f64,
    },

    #[error("eigenvalue scan grid too coarse to isolate roots near lambda = {lambda}; refine the grid step")]
    Resolution { lambda: f64 },

    #[error("asymptotic series diverges (spectral radius {radius:.3} >= 1); use the exact resonance-limit evaluation")]
    Divergence { radius: f64 },

    #[error("matching system ill-conditioned near resonance (condition estimate {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("scattering matrix failed the unitarity check (defect {defect:.3e})")]
    UnitarityViolation { defect: f64 },

    #[error("quadrature did not converge to tolerance; achieved error estimate {achieved:.3e}")]
    Accuracy { achieved: f64 },
}

pub type Result<T> = std::result::Result<T, RingError>;
