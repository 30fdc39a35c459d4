use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("simulation horizon t_max = {t_max} too long for the mode grid: must be below {max_allowed} (half the recurrence time)")]
    HorizonTooLong { t_max: f64, max_allowed: f64 },

    #[error("integrator unstable at t = {t}: {reason}; reduce the time step")]
    Integrator { t: f64, reason: String },

    #[error("trace drifted by {drift:e} at t = {t}; reduce the time step")]
    TraceDrift { t: f64, drift: f64 },

    #[error("{excluded} of {total} trajectories diverged (limit 0.1%)")]
    Exclusions { excluded: usize, total: usize },

    #[error("memory cap exceeded: {needed} amplitudes requested, cap is {cap}")]
    MemoryCap { needed: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
