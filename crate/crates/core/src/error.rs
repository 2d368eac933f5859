use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Coulomb evaluation closer to the origin than the configured floor.
    #[error("phase point too close to the Coulomb singularity (|q| = {radius:e})")]
    SingularOrigin { radius: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    /// Consecutive samples of det h rotate too far to pick a unique square-root branch.
    #[error("square-root branch is ambiguous at sample {index} (phase jump {jump:.3} rad)")]
    BranchAmbiguity { index: usize, jump: f64 },

    #[error("gaussian states have different width matrices")]
    MismatchedWidth,

    #[error("time grid is not uniform at sample {0}")]
    NonUniformGrid(usize),

    #[error("no classically allowed region for E = {energy} at m = {m}")]
    BelowBarrier { energy: f64, m: i32 },

    #[error("could not bracket the quantization condition for n_r = {n_r}, m = {m}")]
    Bracketing { n_r: u32, m: i32 },

    #[error("grid domain too small: {0}")]
    DomainTooSmall(String),

    #[error("norm drifted by {drift:e} at t = {t}")]
    NormDrift { drift: f64, t: f64 },

    #[error("wavefunction density {density:e} reached the grid boundary at t = {t}")]
    BoundaryLeak { density: f64, t: f64 },

    #[error("linear solver did not converge (residual {residual:e} after {iterations} iterations)")]
    SolverDiverged { residual: f64, iterations: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Failures that come from the numerics rather than from input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularOrigin { .. }
                | Error::NonFinite(_)
                | Error::BranchAmbiguity { .. }
                | Error::BelowBarrier { .. }
                | Error::Bracketing { .. }
                | Error::NormDrift { .. }
                | Error::BoundaryLeak { .. }
                | Error::SolverDiverged { .. }
        )
    }
}
