//! Two-channel nuclear wave packets under laser coupling.
//!
//! The crate propagates
//!
//! ```text
//! i d/dt psi1 = [-d^2/dx^2 + U1(x)] psi1 + V psi2
//! i d/dt psi2 = [-d^2/dx^2 + U2(x) - omega] psi2 + V psi1
//! ```
//!
//! on a uniform grid with a split-operator scheme, and checks the numerics
//! against closed-form models: Weisskopf-Wigner decay of a bound state into
//! a linear continuum, Landau-Zener crossings and Rabi flopping. Spontaneous
//! emission is treated with Monte Carlo wave-function trajectories.

pub mod airy;
pub mod analytic;
pub mod error;
pub mod grid;
pub mod mcwf;
pub mod model;
pub mod observables;
pub mod propagator;
mod spectral;

pub use analytic::{
    condon_factor, lz_probability, rabi_population, survival_probability, ww_rate_condon,
    ww_rate_reflection, CondonFactor, CondonMethod, DecayModelParams, LandauZener,
};
pub use error::{Error, Result};
pub use grid::{
    harmonic_ground_state, imaginary_time_relax, Channel, Grid, Norms, TwoChannelState,
};
pub use mcwf::{mcwf_ensemble, mcwf_trajectory, EnsembleResult, JumpRecord};
pub use model::{Crossing, Envelope, ModelSpec, PotentialSpec, PulseSpec, PulseValue};
pub use observables::{
    detect_oscillation, emission_spectrum, fit_decay_rate, position_moments, DecayFit, Moments,
    Oscillation, SpectrumHistogram, WindowPolicy,
};
pub use propagator::{
    apply_absorber, coupling_step, propagate, step, Absorber, Propagator, RunConfig, Snapshot,
    Trajectory,
};
