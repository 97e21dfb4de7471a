use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid point count {0} must be a power of two and at least 64")]
    BadPointCount(usize),

    #[error("degenerate grid interval [{x_min}, {x_max}]")]
    DegenerateInterval { x_min: f64, x_max: f64 },

    #[error("grid too narrow: ground-state tail at the boundary is {ratio:e} of the peak")]
    GridTooNarrow { ratio: f64 },

    #[error("states live on different grids")]
    GridMismatch,

    #[error("imaginary-time relaxation did not converge in {iters} iterations (last energy change {delta:e})")]
    RelaxationDiverged { iters: usize, delta: f64 },

    #[error("position {x} lies outside the tabulated domain [{lo}, {hi}]")]
    OutsideTable { x: f64, lo: f64, hi: f64 },

    #[error("invalid potential table: {0}")]
    BadTable(String),

    #[error("no crossing: U2 - omega - U1 does not change sign on the grid")]
    NoCrossing,

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("propagation diverged (non-finite norm) at step {step}")]
    Divergence { step: usize },

    #[error("quadrature did not converge (last change {delta:e})")]
    QuadratureDiverged { delta: f64 },

    #[error("channel {channel} is empty (population {population:e})")]
    EmptyChannel { channel: usize, population: f64 },

    #[error("fit window holds {found} points, at least {needed} required")]
    TooFewPoints { found: usize, needed: usize },

    #[error("non-positive population {value} at t = {t}")]
    NonPositivePopulation { t: f64, value: f64 },

    #[error("series too short: {len} samples, at least {needed} required")]
    SeriesTooShort { len: usize, needed: usize },

    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("no quantum jumps to histogram")]
    NoJumps,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
