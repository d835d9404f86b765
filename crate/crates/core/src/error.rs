use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The adaptive step collapsed, usually a stiff region or a singular vector field.
    #[error("adaptive step underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("vector field returned a non-finite value at t = {t}")]
    NonFinite { t: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    /// `tan(phi)` blows up in the three-level angle equations.
    #[error("|cos(phi)| <= 1e-12 at phi = {phi}")]
    PhiSingularity { phi: f64 },

    #[error("angle singularity while inverting angle rates at (phi, theta) = ({phi}, {theta})")]
    AngleSingularity { phi: f64, theta: f64 },

    /// Both switching functions vanish; the mixing angle is undefined.
    #[error("switching vector vanished (H1^2 + H2^2 = {norm_sq:e})")]
    SwitchingDegeneracy { norm_sq: f64 },

    #[error("sin(theta) <= 1e-12 in the isomorphic two-level angle equations (theta = {theta})")]
    ThetaSingularity { theta: f64 },

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("target not reached within the horizon")]
    NoHit,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
