//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A field contains NaN or infinite samples.
    #[error("InvalidField: {0}")]
    InvalidField(String),

    /// Two fields that must share a grid do not.
    #[error("GridMismatch: {0}")]
    GridMismatch(String),

    /// A parameter violates its declared range. The message names the
    /// offending parameter as `module.name`.
    #[error("ParameterOutOfRange: {0}")]
    ParameterOutOfRange(String),

    /// A weighted norm failed the tail-dominance check in strict mode.
    #[error("WeightedNormDivergent: {0}")]
    WeightedNormDivergent(String),

    /// Dissipative flow requested for negative time.
    #[error("BackwardDissipative: A={a} > 0 with t={t} < 0")]
    BackwardDissipative { a: f64, t: f64 },

    /// Split-step norm grew past the stability envelope.
    #[error("UnstableStep: {0}")]
    UnstableStep(String),

    /// Second differences requested on a non-uniform time grid.
    #[error("NonUniformTimeGrid: {0}")]
    NonUniformTimeGrid(String),

    /// Rescaled coordinates leave the domain where the field is non-negligible.
    #[error("GridOverflow: {0}")]
    GridOverflow(String),

    /// Temporal sampling too coarse for the requested interpolation accuracy.
    #[error("InterpolationUnderresolved: {0}")]
    InterpolationUnderresolved(String),

    /// Compact support leaves the declared domain.
    #[error("SupportOutOfDomain: {0}")]
    SupportOutOfDomain(String),

    /// Scaled trajectory evaluation past the integrated range.
    #[error("TrajectoryTooShort: need t={needed}, have t_max={t_max}")]
    TrajectoryTooShort { needed: f64, t_max: f64 },

    /// ODE step exceeds the accuracy cap.
    #[error("StepTooLarge: step={step} exceeds {max}")]
    StepTooLarge { step: f64, max: f64 },

    /// Decay fit has fewer than the minimum usable samples.
    #[error("InsufficientSamples: {got} usable samples, need {need}")]
    InsufficientSamples { got: usize, need: usize },

    /// Gaussian evolution left the decaying regime (Re c <= 0).
    #[error("BranchOrDecayLoss: Re c = {re_c} after evolution")]
    BranchOrDecayLoss { re_c: f64 },

    /// Configuration failed to parse or validate.
    #[error("ConfigError: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
