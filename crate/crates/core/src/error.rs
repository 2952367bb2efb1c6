use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Parameters outside the regime `c > delta > 0`.
    #[error("no bifurcation regime: need c > delta > 0 (got c = {c}, delta = {delta})")]
    InvalidParams { c: f64, delta: f64 },

    /// `q` left the square-root domain of the Hamiltonian.
    #[error("population imbalance q = {q} outside the model domain")]
    Domain { q: f64 },

    /// Stability asked for at a degenerate (bifurcation) point.
    #[error("fixed point is marginal: det Gamma = {det:e}")]
    Marginal { det: f64 },

    /// Gamma cannot be inverted; the fluctuation prediction diverges here.
    #[error("Gamma is singular: det Gamma = {det:e}")]
    Singular { det: f64 },

    #[error("requested branch does not exist at R = {r}")]
    NoBranch { r: f64 },

    #[error("fixed point at R = {r} is not a stable center")]
    NotStable { r: f64 },

    #[error("invalid protocol: {0}")]
    Protocol(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Energy on a constant-R segment wandered past the integrator bound.
    #[error("energy drift {drift:e} on a constant-R segment exceeds bound {bound:e}")]
    Instability { drift: f64, bound: f64 },

    #[error("quantum norm drift {drift:e} exceeds bound {bound:e}")]
    NormDrift { drift: f64, bound: f64 },

    #[error("relative phase undefined: mode amplitude {amplitude:e} too small")]
    PhaseUndefined { amplitude: f64 },

    /// Loop sampled too coarsely for the discrete overlap sum.
    #[error("overlap {index}: magnitude {magnitude} / phase {phase} too coarse for the loop sum")]
    Sampling {
        index: usize,
        magnitude: f64,
        phase: f64,
    },

    #[error("loop endpoints differ by {gap:e} (tolerance {tolerance:e})")]
    Closure { gap: f64, tolerance: f64 },

    /// Branch could not be decided at R = 0.
    #[error("undecided branch: |q(R=0)| = {q_at_r0} not above threshold {threshold}")]
    Undecided { q_at_r0: f64, threshold: f64 },
}

impl Error {
    /// True for errors raised by invalid input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams { .. }
                | Error::Protocol(_)
                | Error::InvalidArgument(_)
                | Error::NoBranch { .. }
                | Error::NotStable { .. }
        )
    }
}
