//! Split-operator time evolution of the coupled two-channel equations
//!
//! ```text
//! i d/dt psi1 = [-d^2/dx^2 + U1(x)] psi1 + V(t) psi2
//! i d/dt psi2 = [-d^2/dx^2 + U2(x) - omega + delta_omega(t)] psi2 + V(t) psi1
//! ```
//!
//! Each step is a Strang splitting: half a kinetic step in momentum space,
//! the exact pointwise 2x2 potential/coupling exponential at the step
//! midpoint, another half kinetic step, then the optional absorbing mask.
//!
//! Accuracy guidance: over the occupied region keep `dt * max|U| <= 0.05`
//! and `dt * k^2 <= 0.5` for the occupied momenta. The splitting is unitary
//! for any `dt`, so violating this costs accuracy, not stability.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::grid::{Channel, Grid, TwoChannelState};
use crate::model::ModelSpec;
use crate::observables::position_moments;
use crate::spectral::Spectral;

/// Steps between non-finite norm checks.
pub const DIVERGENCE_CHECK_EVERY: usize = 256;

/// 2x2 complex matrix, row major.
pub type Matrix2 = [[Complex64; 2]; 2];

/// Edge treatment of the periodic grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Absorber {
    None,
    /// Multiplicative mask over `width` at each edge with profile
    /// `cos(pi/2 * s)^(strength/8)`, `s` the fractional depth into the zone.
    Mask { width: f64, strength: f64 },
}

/// Numerical policy of one propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub dt: f64,
    pub t_final: f64,
    pub absorber: Absorber,
    /// Steps between density snapshots; 0 disables them.
    pub snapshot_every: usize,
    /// Steps between recorded observables; must be at least 1.
    pub record_every: usize,
    /// Steps between absorber applications; must be at least 1.
    pub absorb_every: usize,
}

impl RunConfig {
    pub fn new(dt: f64, t_final: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            t_final,
            absorber: Absorber::None,
            snapshot_every: 0,
            record_every: 1,
            absorb_every: 1,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn with_absorber(mut self, absorber: Absorber) -> Self {
        self.absorber = absorber;
        self
    }

    pub fn with_record_every(mut self, steps: usize) -> Self {
        self.record_every = steps;
        self
    }

    pub fn with_snapshot_every(mut self, steps: usize) -> Self {
        self.snapshot_every = steps;
        self
    }

    /// Applies the absorber only after every `steps`-th step, so runs at
    /// `dt / steps` see the mask at the same times as a run at `dt`.
    pub fn with_absorb_every(mut self, steps: usize) -> Self {
        self.absorb_every = steps;
        self
    }

    /// Whether the absorber acts after step `s` (counted from 1).
    pub fn absorbs_after(&self, s: usize) -> bool {
        s % self.absorb_every == 0
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    fn check(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", format!("{} must be positive", self.dt)));
        }
        if !(self.t_final >= self.dt && self.t_final.is_finite()) {
            return Err(invalid(
                "t_final",
                format!("{} must be at least dt = {}", self.t_final, self.dt),
            ));
        }
        if self.record_every == 0 {
            return Err(invalid("record_every", "must be at least 1"));
        }
        if self.absorb_every == 0 {
            return Err(invalid("absorb_every", "must be at least 1"));
        }
        Ok(())
    }

    /// Checks the configuration against the grid it will run on.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        self.check()?;
        if let Absorber::Mask { width, strength } = self.absorber {
            let half = 0.5 * (grid.x_max() - grid.x_min());
            if !(width > 0.0 && width < half) {
                return Err(invalid(
                    "mask_width",
                    format!("{width} must lie in (0, {half})"),
                ));
            }
            if !(strength > 0.0 && strength.is_finite()) {
                return Err(invalid("mask_strength", format!("{strength} must be positive")));
            }
        }
        Ok(())
    }
}

/// Exact `exp(-i dt [[u1, v], [v, u2]])`.
pub fn coupling_step(u1: f64, u2: f64, v: f64, dt: f64) -> Matrix2 {
    let mean = 0.5 * (u1 + u2);
    let half = 0.5 * (u1 - u2);
    let rabi = half.hypot(v);
    let c = (rabi * dt).cos();
    // sin(rabi dt) / rabi, continuous through rabi = 0
    let s = if rabi * dt.abs() > 1e-8 {
        (rabi * dt).sin() / rabi
    } else {
        dt * (1.0 - (rabi * dt).powi(2) / 6.0)
    };
    let phase = Complex64::from_polar(1.0, -mean * dt);
    let i = Complex64::i();
    [
        [phase * (c - i * half * s), phase * (-i * v * s)],
        [phase * (-i * v * s), phase * (c + i * half * s)],
    ]
}

/// Edge mask profile on a grid.
#[derive(Debug, Clone)]
pub struct Mask {
    profile: Vec<f64>,
}

impl Mask {
    pub fn new(grid: &Grid, width: f64, strength: f64) -> Self {
        let lo = grid.x_min() + width;
        let hi = grid.x_max() - width;
        let profile = grid
            .x()
            .iter()
            .map(|&x| {
                let depth = if x < lo {
                    (lo - x) / width
                } else if x > hi {
                    (x - hi) / width
                } else {
                    return 1.0;
                };
                (FRAC_PI_2 * depth.min(1.0)).cos().max(0.0).powf(strength / 8.0)
            })
            .collect();
        Self { profile }
    }

    pub fn profile(&self) -> &[f64] {
        &self.profile
    }

    /// Multiplies both channels by the mask; returns the probability removed
    /// from each channel.
    pub fn apply(&self, state: &mut TwoChannelState) -> [f64; 2] {
        let dx = state.grid().dx();
        let mut removed = [0.0; 2];
        for (c, psi) in [&mut state.psi1, &mut state.psi2].into_iter().enumerate() {
            let mut lost = 0.0;
            for (z, m) in psi.iter_mut().zip(&self.profile) {
                if *m < 1.0 {
                    let before = z.norm_sqr();
                    *z *= *m;
                    lost += before - z.norm_sqr();
                }
            }
            removed[c] = lost * dx;
        }
        removed
    }
}

/// Applies an absorber once, returning the total probability removed.
pub fn apply_absorber(state: &mut TwoChannelState, absorber: Absorber) -> f64 {
    match absorber {
        Absorber::None => 0.0,
        Absorber::Mask { width, strength } => {
            let mask = Mask::new(state.grid(), width, strength);
            mask.apply(state).iter().sum()
        }
    }
}

/// Reusable stepping machinery for one model, grid and time step.
pub struct Propagator {
    grid: Arc<Grid>,
    model: ModelSpec,
    dt: f64,
    u1: Vec<f64>,
    u2: Vec<f64>,
    kinetic_half: Vec<Complex64>,
    mask: Option<Mask>,
    spectral: Spectral,
    cached: Option<(f64, f64)>,
    matrices: Vec<Matrix2>,
}

impl Propagator {
    /// `dt` may be negative to run backwards in time.
    pub fn new(grid: Arc<Grid>, model: &ModelSpec, dt: f64, absorber: Absorber) -> Result<Self> {
        if !(dt != 0.0 && dt.is_finite()) {
            return Err(invalid("dt", format!("{dt} must be finite and non-zero")));
        }
        let u1 = model.u1.sample(&grid)?;
        let u2 = model.u2_minus_omega.sample(&grid)?;
        let kinetic_half = grid
            .k()
            .iter()
            .map(|k| Complex64::from_polar(1.0, -k * k * dt / 2.0))
            .collect();
        let mask = match absorber {
            Absorber::None => None,
            Absorber::Mask { width, strength } => Some(Mask::new(&grid, width, strength)),
        };
        let n = grid.len();
        Ok(Self {
            spectral: Spectral::new(n),
            grid,
            model: model.clone(),
            dt,
            u1,
            u2,
            kinetic_half,
            mask,
            cached: None,
            matrices: Vec::with_capacity(n),
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn refresh_matrices(&mut self, t_mid: f64) {
        let pv = self.model.pulse.value(t_mid);
        let key = (pv.coupling, pv.delta_omega);
        if self.cached == Some(key) {
            return;
        }
        let dt = self.dt;
        self.matrices.clear();
        self.matrices.extend(
            self.u1
                .iter()
                .zip(&self.u2)
                .map(|(&a, &b)| coupling_step(a, b + pv.delta_omega, pv.coupling, dt)),
        );
        self.cached = Some(key);
    }

    /// Advances `state` from `t` to `t + dt`. Returns the probability the
    /// mask removed from each channel.
    pub fn step(&mut self, state: &mut TwoChannelState, t: f64) -> [f64; 2] {
        self.unitary_step(state, t);
        self.absorb(state)
    }

    /// The split-operator step without the absorber.
    pub fn unitary_step(&mut self, state: &mut TwoChannelState, t: f64) {
        debug_assert!(state.grid() == &self.grid);
        self.spectral.apply_diagonal(&mut state.psi1, &self.kinetic_half);
        self.spectral.apply_diagonal(&mut state.psi2, &self.kinetic_half);

        self.refresh_matrices(t + 0.5 * self.dt);
        for ((a, b), m) in state
            .psi1
            .iter_mut()
            .zip(state.psi2.iter_mut())
            .zip(&self.matrices)
        {
            let (p, q) = (*a, *b);
            *a = m[0][0] * p + m[0][1] * q;
            *b = m[1][0] * p + m[1][1] * q;
        }

        self.spectral.apply_diagonal(&mut state.psi1, &self.kinetic_half);
        self.spectral.apply_diagonal(&mut state.psi2, &self.kinetic_half);
    }

    /// Applies the configured mask, returning the probability removed per channel.
    pub fn absorb(&self, state: &mut TwoChannelState) -> [f64; 2] {
        match &self.mask {
            Some(mask) => mask.apply(state),
            None => [0.0; 2],
        }
    }
}

/// Convenience single step: builds a propagator and advances once.
pub fn step(
    state: &TwoChannelState,
    model: &ModelSpec,
    t: f64,
    cfg: &RunConfig,
) -> Result<TwoChannelState> {
    cfg.validate(state.grid())?;
    let mut prop = Propagator::new(state.grid().clone(), model, cfg.dt, cfg.absorber)?;
    let mut next = state.clone();
    prop.step(&mut next, t);
    if !next.norm().total.is_finite() {
        return Err(Error::Divergence { step: 0 });
    }
    Ok(next)
}

/// Channel densities at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub density1: Vec<f64>,
    pub density2: Vec<f64>,
}

/// Recorded observables of one propagation. All series share one length.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    /// Conditional moments; NaN while a channel is empty.
    pub mean_x1: Vec<f64>,
    pub mean_x2: Vec<f64>,
    pub var_x1: Vec<f64>,
    pub var_x2: Vec<f64>,
    /// Cumulative probability removed by the absorber.
    pub absorbed: Vec<f64>,
    /// Final cumulative removal split by channel.
    pub absorbed_by_channel: [f64; 2],
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn absorbed_norm(&self) -> f64 {
        self.absorbed.last().copied().unwrap_or(0.0)
    }

    pub(crate) fn record(&mut self, t: f64, state: &TwoChannelState, absorbed: f64) {
        let norms = state.norm();
        self.times.push(t);
        self.p1.push(norms.p1);
        self.p2.push(norms.p2);
        for (channel, mean, var) in [
            (Channel::Ground, &mut self.mean_x1, &mut self.var_x1),
            (Channel::Excited, &mut self.mean_x2, &mut self.var_x2),
        ] {
            match position_moments(state, channel) {
                Ok(m) => {
                    mean.push(m.mean);
                    var.push(m.variance);
                }
                Err(_) => {
                    mean.push(f64::NAN);
                    var.push(f64::NAN);
                }
            }
        }
        self.absorbed.push(absorbed);
    }

    pub(crate) fn snapshot(&mut self, t: f64, state: &TwoChannelState) {
        self.snapshots.push(Snapshot {
            t,
            density1: state.density(Channel::Ground),
            density2: state.density(Channel::Excited),
        });
    }
}

/// Runs from `t = 0` to `cfg.t_final`, recording observables every
/// `record_every` steps (including `t = 0`) and snapshots every
/// `snapshot_every` steps.
pub fn propagate(
    state: &TwoChannelState,
    model: &ModelSpec,
    cfg: &RunConfig,
) -> Result<(Trajectory, TwoChannelState)> {
    propagate_with(state, model, cfg, |_, _, _| {})
}

/// As [`propagate`], calling `hook(step_index, t, state)` after every step.
pub fn propagate_with<F>(
    state: &TwoChannelState,
    model: &ModelSpec,
    cfg: &RunConfig,
    mut hook: F,
) -> Result<(Trajectory, TwoChannelState)>
where
    F: FnMut(usize, f64, &TwoChannelState),
{
    cfg.validate(state.grid())?;
    let mut prop = Propagator::new(state.grid().clone(), model, cfg.dt, cfg.absorber)?;
    let mut psi = state.clone();
    let mut traj = Trajectory::default();
    let mut absorbed = [0.0; 2];
    traj.record(0.0, &psi, 0.0);
    if cfg.snapshot_every > 0 {
        traj.snapshot(0.0, &psi);
    }
    let n_steps = cfg.n_steps();
    for s in 1..=n_steps {
        let t0 = (s - 1) as f64 * cfg.dt;
        prop.unitary_step(&mut psi, t0);
        let removed = if cfg.absorbs_after(s) { prop.absorb(&mut psi) } else { [0.0; 2] };
        absorbed[0] += removed[0];
        absorbed[1] += removed[1];
        let t = s as f64 * cfg.dt;
        if s % DIVERGENCE_CHECK_EVERY == 0 || s == n_steps {
            check_finite(&psi, s)?;
        }
        hook(s, t, &psi);
        if s % cfg.record_every == 0 {
            traj.record(t, &psi, absorbed[0] + absorbed[1]);
        }
        if cfg.snapshot_every > 0 && s % cfg.snapshot_every == 0 {
            traj.snapshot(t, &psi);
        }
    }
    traj.absorbed_by_channel = absorbed;
    Ok((traj, psi))
}

pub(crate) fn check_finite(state: &TwoChannelState, step: usize) -> Result<()> {
    if state.norm().total.is_finite() {
        Ok(())
    } else {
        Err(Error::Divergence { step })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::harmonic_ground_state;
    use crate::model::{PotentialSpec, PulseSpec};

    type C = Complex64;

    fn mat_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
        let mut out = [[C::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    /// Brute-force exponential: Taylor series of a scaled-down argument,
    /// then repeated squaring.
    fn expm_oracle(h: [[f64; 2]; 2], dt: f64) -> Matrix2 {
        let squarings = 6;
        let scale = dt / f64::from(1u32 << squarings);
        let a: Matrix2 = [
            [C::new(0.0, -h[0][0] * scale), C::new(0.0, -h[0][1] * scale)],
            [C::new(0.0, -h[1][0] * scale), C::new(0.0, -h[1][1] * scale)],
        ];
        let mut result = [[C::new(1.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), C::new(1.0, 0.0)]];
        let mut term = result;
        for n in 1..30 {
            term = mat_mul(&term, &a);
            for row in term.iter_mut() {
                for z in row.iter_mut() {
                    *z /= n as f64;
                }
            }
            for i in 0..2 {
                for j in 0..2 {
                    result[i][j] += term[i][j];
                }
            }
        }
        for _ in 0..squarings {
            result = mat_mul(&result, &result);
        }
        result
    }

    fn unitarity_error(m: &Matrix2) -> f64 {
        let mut err: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let dot = m[0][i].conj() * m[0][j] + m[1][i].conj() * m[1][j];
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((dot - target).norm());
            }
        }
        err
    }

    #[test]
    fn decoupled_step_is_diagonal() {
        let m = coupling_step(0.3, -1.2, 0.0, 0.05);
        assert!((m[0][0] - C::from_polar(1.0, -0.3 * 0.05)).norm() < 1e-15);
        assert!((m[1][1] - C::from_polar(1.0, 1.2 * 0.05)).norm() < 1e-15);
        assert_eq!(m[0][1], C::new(0.0, 0.0));
    }

    #[test]
    fn rabi_half_cycle_swaps() {
        let v = 0.7;
        let m = coupling_step(0.0, 0.0, v, FRAC_PI_2 / v);
        assert!(m[0][0].norm() < 1e-15);
        assert!((m[1][0] - C::new(0.0, -1.0)).norm() < 1e-15);
        assert!((m[0][1] - C::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn matches_matrix_exponential() {
        let got = coupling_step(0.0, 2.0, 1.0, 0.1);
        let want = expm_oracle([[0.0, 1.0], [1.0, 2.0]], 0.1);
        for i in 0..2 {
            for j in 0..2 {
                assert!((got[i][j] - want[i][j]).norm() < 1e-12);
            }
        }
        assert!(unitarity_error(&got) < 1e-14);
    }

    #[test]
    fn mask_removes_only_at_edges() {
        let g = Arc::new(Grid::new(-20.0, 20.0, 256).unwrap());
        let mut s = harmonic_ground_state(g.clone()).unwrap();
        let removed = apply_absorber(&mut s, Absorber::Mask { width: 5.0, strength: 1.0 });
        assert!(removed.abs() < 1e-14);

        let mut edge = TwoChannelState::gaussian_packet(g, Channel::Excited, 18.0, 0.0, 0.3);
        let absorber = Absorber::Mask { width: 5.0, strength: 1.0 };
        let mut last = edge.norm().total;
        let first = apply_absorber(&mut edge, absorber);
        assert!(first > 0.0);
        for _ in 0..10 {
            let r = apply_absorber(&mut edge, absorber);
            assert!(r >= 0.0);
            let now = edge.norm().total;
            assert!(now <= last);
            last = now;
        }
    }

    #[test]
    fn run_config_validation() {
        assert!(RunConfig::new(-0.1, 1.0).is_err());
        assert!(RunConfig::new(0.1, 0.01).is_err());
        let g = Grid::new(-10.0, 10.0, 64).unwrap();
        let cfg = RunConfig::new(0.01, 1.0)
            .unwrap()
            .with_absorber(Absorber::Mask { width: 10.0, strength: 1.0 });
        assert!(cfg.validate(&g).is_err());
        assert!(RunConfig::new(0.01, 1.0).unwrap().with_record_every(0).validate(&g).is_err());
        assert!(RunConfig::new(0.01, 1.0).unwrap().with_absorb_every(0).validate(&g).is_err());
    }

    #[test]
    fn absorber_cadence_follows_time_not_steps() {
        let g = Arc::new(Grid::new(-20.0, 20.0, 256).unwrap());
        let s = TwoChannelState::gaussian_packet(g, Channel::Excited, 16.0, 0.0, 1.0);
        let m = ModelSpec::new(
            PotentialSpec::constant(0.0),
            PotentialSpec::constant(0.0),
            PulseSpec::constant(0.0).unwrap(),
        );
        let absorber = Absorber::Mask { width: 6.0, strength: 1.0 };
        let absorbed = |dt: f64, every: usize| {
            let cfg = RunConfig::new(dt, 0.2)
                .unwrap()
                .with_absorber(absorber)
                .with_absorb_every(every);
            propagate(&s, &m, &cfg).unwrap().0.absorbed_norm()
        };
        let coarse = absorbed(0.01, 1);
        let fine_same_times = absorbed(0.005, 2);
        let fine_every_step = absorbed(0.005, 1);
        assert!((coarse - fine_same_times).abs() < 1e-3 * coarse);
        assert!(fine_every_step > 1.2 * coarse);
    }

    #[test]
    fn ground_state_is_stationary() {
        let g = Arc::new(Grid::new(-10.0, 10.0, 256).unwrap());
        let model = ModelSpec::new(
            PotentialSpec::Harmonic,
            PotentialSpec::constant(0.0),
            PulseSpec::constant(0.0).unwrap(),
        );
        let s0 = harmonic_ground_state(g).unwrap();
        let d0 = s0.density(Channel::Ground);
        // Ten vibrational periods of 2 pi / sqrt(2).
        let period = 2.0 * std::f64::consts::PI / std::f64::consts::SQRT_2;
        let cfg = RunConfig::new(0.005, 10.0 * period).unwrap().with_record_every(1000);
        let (_, s1) = propagate(&s0, &model, &cfg).unwrap();
        let d1 = s1.density(Channel::Ground);
        let worst = d0.iter().zip(&d1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn free_packet_spreads_by_the_analytic_law() {
        // Under -d^2/dx^2 a Gaussian of density width s0 spreads as
        // s(t)^2 = s0^2 + (t / s0)^2 and drifts at velocity 2 k0.
        let g = Arc::new(Grid::new(-60.0, 60.0, 2048).unwrap());
        let model = ModelSpec::new(
            PotentialSpec::constant(0.0),
            PotentialSpec::constant(0.0),
            PulseSpec::constant(0.0).unwrap(),
        );
        let (s0, k0) = (1.0, 0.8);
        let state = TwoChannelState::gaussian_packet(g, Channel::Ground, -5.0, k0, s0);
        let cfg = RunConfig::new(0.01, 6.0).unwrap().with_record_every(100);
        let (traj, _) = propagate(&state, &model, &cfg).unwrap();
        for (i, &t) in traj.times.iter().enumerate() {
            let var = s0 * s0 + (t / s0).powi(2);
            assert!((traj.var_x1[i] - var).abs() < 1e-9, "t={t}");
            assert!((traj.mean_x1[i] - (-5.0 + 2.0 * k0 * t)).abs() < 1e-9);
        }
    }

    #[test]
    fn flat_rabi_flopping_is_exact() {
        let g = Arc::new(Grid::new(-20.0, 20.0, 256).unwrap());
        let v = 0.9;
        let model = ModelSpec::new(
            PotentialSpec::constant(0.25),
            PotentialSpec::constant(0.25),
            PulseSpec::constant(v).unwrap(),
        );
        let state = TwoChannelState::gaussian_packet(g, Channel::Ground, 0.0, 0.3, 2.0);
        let cfg = RunConfig::new(0.01, 2.0 * std::f64::consts::PI / v).unwrap();
        let (traj, _) = propagate(&state, &model, &cfg).unwrap();
        for (t, p2) in traj.times.iter().zip(&traj.p2) {
            assert!((p2 - (v * t).sin().powi(2)).abs() < 1e-6);
        }
    }

    #[test]
    fn divergence_is_reported() {
        let g = Arc::new(Grid::new(-10.0, 10.0, 64).unwrap());
        let model = ModelSpec::new(
            PotentialSpec::Harmonic,
            PotentialSpec::constant(0.0),
            PulseSpec::constant(0.0).unwrap(),
        );
        let mut s = harmonic_ground_state(g).unwrap();
        s.psi1[3] = C::new(f64::NAN, 0.0);
        let cfg = RunConfig::new(0.01, 3.0).unwrap();
        assert_eq!(
            propagate(&s, &model, &cfg).unwrap_err(),
            Error::Divergence { step: 256 }
        );
    }

    #[test]
    fn trajectory_series_share_length() {
        let g = Arc::new(Grid::new(-10.0, 10.0, 128).unwrap());
        let model = ModelSpec::decay(2.0, PulseSpec::constant(0.3).unwrap()).unwrap();
        let s = harmonic_ground_state(g).unwrap();
        let cfg = RunConfig::new(0.01, 1.0)
            .unwrap()
            .with_record_every(7)
            .with_snapshot_every(25);
        let (traj, _) = propagate(&s, &model, &cfg).unwrap();
        let n = traj.len();
        assert_eq!(n, 1 + 100 / 7);
        for series in [&traj.p1, &traj.p2, &traj.mean_x1, &traj.mean_x2, &traj.var_x1, &traj.var_x2, &traj.absorbed] {
            assert_eq!(series.len(), n);
        }
        assert_eq!(traj.snapshots.len(), 5);
        assert!(traj.mean_x2[0].is_nan());
    }
}
