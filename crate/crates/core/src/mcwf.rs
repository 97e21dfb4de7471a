//! Monte Carlo wave-function (quantum jump) treatment of spontaneous decay
//! from channel 2 to channel 1.
//!
//! Between jumps each step is the unitary split-operator step followed by
//! the no-jump factor `exp(-gamma dt / 2)` on channel 2. The probability
//! lost to that factor accumulates into a survival value; a jump fires at
//! the first step where the survival falls below a uniform target drawn at
//! the start and after every jump. At a jump a position is sampled from
//! `|psi2|^2`, the channel-2 amplitude is moved onto channel 1 with its
//! spatial profile intact, and the state is renormalized.
//!
//! Trajectory `i` of an ensemble draws from a ChaCha8 generator keyed by
//! `base_seed` on stream `i`, so results do not depend on execution order
//! or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::grid::TwoChannelState;
use crate::model::ModelSpec;
use crate::propagator::{check_finite, Propagator, RunConfig, Trajectory, DIVERGENCE_CHECK_EVERY};

/// Time and position of one spontaneous emission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpRecord {
    pub t_jump: f64,
    pub x_jump: f64,
    pub trajectory_id: usize,
}

/// Random source of trajectory `index` under `base_seed`.
pub fn trajectory_rng(base_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(index as u64);
    rng
}

/// Uniform target in (0, 1]; never zero so a jump needs a real loss.
fn draw_target(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

fn sample_position(state: &TwoChannelState, rng: &mut ChaCha8Rng) -> f64 {
    let xs = state.grid().x();
    let weights: Vec<f64> = state.psi2.iter().map(|z| z.norm_sqr()).collect();
    let total: f64 = weights.iter().sum();
    let mut target = rng.random::<f64>() * total;
    for (w, &x) in weights.iter().zip(xs) {
        if target < *w {
            return x;
        }
        target -= w;
    }
    // Rounding left the target past the last occupied node.
    let last = weights.iter().rposition(|w| *w > 0.0).unwrap_or(xs.len() - 1);
    xs[last]
}

/// One stochastic trajectory, labelled `index` for seeding and bookkeeping.
pub fn mcwf_trajectory(
    initial: &TwoChannelState,
    model: &ModelSpec,
    gamma_sp: f64,
    cfg: &RunConfig,
    base_seed: u64,
    index: usize,
) -> Result<(Trajectory, Vec<JumpRecord>)> {
    if !(gamma_sp >= 0.0 && gamma_sp.is_finite()) {
        return Err(invalid("gamma_sp", format!("{gamma_sp} must be non-negative")));
    }
    cfg.validate(initial.grid())?;
    let mut rng = trajectory_rng(base_seed, index);
    let mut prop = Propagator::new(initial.grid().clone(), model, cfg.dt, cfg.absorber)?;
    let decay = (-0.5 * gamma_sp * cfg.dt).exp();

    let mut psi = initial.clone();
    let mut traj = Trajectory::default();
    let mut jumps = Vec::new();
    let mut absorbed = [0.0; 2];
    let mut survival = 1.0;
    let mut target = draw_target(&mut rng);

    traj.record(0.0, &psi, 0.0);
    if cfg.snapshot_every > 0 {
        traj.snapshot(0.0, &psi);
    }
    let n_steps = cfg.n_steps();
    for s in 1..=n_steps {
        prop.unitary_step(&mut psi, (s - 1) as f64 * cfg.dt);
        let removed = if cfg.absorbs_after(s) { prop.absorb(&mut psi) } else { [0.0; 2] };
        absorbed[0] += removed[0];
        absorbed[1] += removed[1];
        let t = s as f64 * cfg.dt;

        let norms = psi.norm();
        let before = norms.total;
        for z in psi.psi2.iter_mut() {
            *z *= decay;
        }
        let after = norms.p1 + norms.p2 * decay * decay;
        if after > 0.0 && after < before {
            survival *= after / before;
            psi.scale((before / after).sqrt());
        }

        if survival < target {
            let x_jump = sample_position(&psi, &mut rng);
            jumps.push(JumpRecord {
                t_jump: t,
                x_jump,
                trajectory_id: index,
            });
            let norm = psi.norm().total;
            psi.psi1 = std::mem::take(&mut psi.psi2);
            psi.psi2 = vec![num_complex::Complex64::new(0.0, 0.0); psi.psi1.len()];
            let moved = psi.norm().total;
            psi.scale((norm / moved).sqrt());
            survival = 1.0;
            target = draw_target(&mut rng);
        }

        if s % DIVERGENCE_CHECK_EVERY == 0 || s == n_steps {
            check_finite(&psi, s)?;
        }
        if s % cfg.record_every == 0 {
            traj.record(t, &psi, absorbed[0] + absorbed[1]);
        }
        if cfg.snapshot_every > 0 && s % cfg.snapshot_every == 0 {
            traj.snapshot(t, &psi);
        }
    }
    traj.absorbed_by_channel = absorbed;
    Ok((traj, jumps))
}

/// Aggregate of an ensemble of trajectories.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub n_trajectories: usize,
    pub base_seed: u64,
    pub times: Vec<f64>,
    pub mean_p1: Vec<f64>,
    pub mean_p2: Vec<f64>,
    /// Sample standard deviation over `sqrt(n)`.
    pub se_p1: Vec<f64>,
    pub se_p2: Vec<f64>,
    pub jumps: Vec<JumpRecord>,
}

/// Runs `n` trajectories (in parallel) and aggregates them in index order.
pub fn mcwf_ensemble(
    initial: &TwoChannelState,
    model: &ModelSpec,
    gamma_sp: f64,
    cfg: &RunConfig,
    base_seed: u64,
    n: usize,
) -> Result<EnsembleResult> {
    if n < 2 {
        return Err(invalid("n_trajectories", format!("{n} must be at least 2")));
    }
    let runs: Vec<(Trajectory, Vec<JumpRecord>)> = (0..n)
        .into_par_iter()
        .map(|i| mcwf_trajectory(initial, model, gamma_sp, cfg, base_seed, i))
        .collect::<Result<_>>()?;

    let times = runs[0].0.times.clone();
    let (mean_p1, se_p1) = mean_and_se(&runs, |t| &t.p1);
    let (mean_p2, se_p2) = mean_and_se(&runs, |t| &t.p2);
    let jumps = runs.into_iter().flat_map(|(_, j)| j).collect();
    Ok(EnsembleResult {
        n_trajectories: n,
        base_seed,
        times,
        mean_p1,
        mean_p2,
        se_p1,
        se_p2,
        jumps,
    })
}

fn mean_and_se<F>(runs: &[(Trajectory, Vec<JumpRecord>)], series: F) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(&Trajectory) -> &Vec<f64>,
{
    let n = runs.len();
    let len = series(&runs[0].0).len();
    let nf = n as f64;
    let mut column = vec![0.0; n];
    let mut means = Vec::with_capacity(len);
    let mut errors = Vec::with_capacity(len);
    for k in 0..len {
        for (c, (traj, _)) in column.iter_mut().zip(runs) {
            *c = series(traj)[k];
        }
        let mean = pairwise_sum(&column) / nf;
        for c in column.iter_mut() {
            *c = (*c - mean).powi(2);
        }
        let var = pairwise_sum(&column) / (nf - 1.0);
        means.push(mean);
        errors.push((var / nf).sqrt());
    }
    (means, errors)
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{harmonic_ground_state, Channel, Grid};
    use crate::model::{PotentialSpec, PulseSpec};
    use crate::propagator::propagate;
    use std::sync::Arc;

    fn flat_setup() -> (TwoChannelState, ModelSpec) {
        let g = Arc::new(Grid::new(-10.0, 10.0, 64).unwrap());
        let s = TwoChannelState::gaussian_packet(g, Channel::Excited, 0.0, 0.0, 1.5);
        let m = ModelSpec::new(
            PotentialSpec::constant(0.0),
            PotentialSpec::constant(0.0),
            PulseSpec::constant(0.0).unwrap(),
        );
        (s, m)
    }

    #[test]
    fn no_decay_matches_deterministic_propagation() {
        let g = Arc::new(Grid::new(-12.0, 12.0, 256).unwrap());
        let s = harmonic_ground_state(g).unwrap();
        let m = ModelSpec::decay(2.0, PulseSpec::gaussian(1.0, 1.0, 0.4).unwrap()).unwrap();
        let cfg = RunConfig::new(0.005, 2.0).unwrap().with_record_every(10);
        let (a, jumps) = mcwf_trajectory(&s, &m, 0.0, &cfg, 7, 0).unwrap();
        let (b, _) = propagate(&s, &m, &cfg).unwrap();
        assert!(jumps.is_empty());
        assert_eq!(a.p1, b.p1);
        assert_eq!(a.p2, b.p2);
    }

    #[test]
    fn at_most_one_jump_without_coupling() {
        let (s, m) = flat_setup();
        let cfg = RunConfig::new(0.01, 4.0).unwrap();
        for i in 0..50 {
            let (traj, jumps) = mcwf_trajectory(&s, &m, 1.0, &cfg, 3, i).unwrap();
            assert!(jumps.len() <= 1);
            if let Some(j) = jumps.first() {
                assert!(j.t_jump > 0.0 && j.t_jump <= 4.0 + 1e-12);
                let k = traj.times.iter().position(|&t| (t - j.t_jump).abs() < 1e-9).unwrap();
                assert!((traj.p1[k] - 1.0).abs() < 1e-12);
                assert_eq!(traj.p2[k], 0.0);
            }
        }
    }

    #[test]
    fn ensemble_is_reproducible_and_order_independent() {
        let (s, m) = flat_setup();
        let cfg = RunConfig::new(0.02, 2.0).unwrap().with_record_every(5);
        let a = mcwf_ensemble(&s, &m, 0.8, &cfg, 42, 40).unwrap();
        let b = mcwf_ensemble(&s, &m, 0.8, &cfg, 42, 40).unwrap();
        assert_eq!(a, b);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = single.install(|| mcwf_ensemble(&s, &m, 0.8, &cfg, 42, 40)).unwrap();
        assert_eq!(a, c);
        let d = mcwf_ensemble(&s, &m, 0.8, &cfg, 43, 40).unwrap();
        assert_ne!(a.jumps, d.jumps);
        assert!(mcwf_ensemble(&s, &m, 0.8, &cfg, 42, 1).is_err());
    }

    #[test]
    fn standard_error_definition() {
        let (s, m) = flat_setup();
        let cfg = RunConfig::new(0.02, 1.0).unwrap().with_record_every(10);
        let n = 30;
        let e = mcwf_ensemble(&s, &m, 1.5, &cfg, 9, n).unwrap();
        let runs: Vec<_> = (0..n).map(|i| mcwf_trajectory(&s, &m, 1.5, &cfg, 9, i).unwrap().0).collect();
        for k in 0..e.times.len() {
            let xs: Vec<f64> = runs.iter().map(|r| r.p2[k]).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            assert!((e.mean_p2[k] - mean).abs() < 1e-12);
            assert!((e.se_p2[k] - (var / n as f64).sqrt()).abs() < 1e-12);
        }
    }
}
