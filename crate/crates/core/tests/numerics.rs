use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use wavepacket_core::analytic::{condon_overlap, coupling_for_rate};
use wavepacket_core::*;

fn decay_grid() -> Arc<Grid> {
    Arc::new(Grid::new(-12.0, 52.0, 2048).unwrap())
}

#[test]
fn norm_drift_over_ten_thousand_steps() {
    let g = decay_grid();
    let v = coupling_for_rate(0.26, 2.0).unwrap();
    let model = ModelSpec::decay(2.0, PulseSpec::constant(v).unwrap()).unwrap();
    let psi = harmonic_ground_state(g).unwrap();
    let cfg = RunConfig::new(0.001, 10.0).unwrap().with_record_every(100);
    let (traj, _) = propagate(&psi, &model, &cfg).unwrap();
    assert_eq!(traj.times.len(), 101);
    let n0 = traj.p1[0] + traj.p2[0];
    let drift = traj
        .p1
        .iter()
        .zip(&traj.p2)
        .map(|(a, b)| (a + b - n0).abs())
        .fold(0.0, f64::max);
    assert!(drift <= 1e-8, "drift {drift:e}");
}

#[test]
fn forward_then_backward_recovers_state() {
    let g = Arc::new(Grid::new(-20.0, 40.0, 1024).unwrap());
    let model = ModelSpec::decay(2.0, PulseSpec::constant(0.6).unwrap()).unwrap();
    let start = harmonic_ground_state(g.clone()).unwrap();
    let mut psi = start.clone();
    let mut fwd = Propagator::new(g.clone(), &model, 0.002, Absorber::None).unwrap();
    let mut bwd = Propagator::new(g, &model, -0.002, Absorber::None).unwrap();
    let n = 1500;
    for s in 0..n {
        fwd.step(&mut psi, s as f64 * 0.002);
    }
    assert!(psi.norm().p2 > 0.1);
    for s in 0..n {
        bwd.step(&mut psi, (n - s) as f64 * 0.002);
    }
    let fidelity = start.overlap(&psi).unwrap().norm_sqr();
    assert!(fidelity >= 1.0 - 1e-8, "fidelity {fidelity}");
}

fn quadratic_coefficient(ts: &[f64], ys: &[f64]) -> f64 {
    // Least squares for y = a + b t + c t^2 through the 3x3 normal equations.
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for (&t, &y) in ts.iter().zip(ys) {
        let basis = [1.0, t, t * t];
        for i in 0..3 {
            r[i] += basis[i] * y;
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
        }
    }
    for col in 0..3 {
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            r[row] -= f * r[col];
        }
    }
    let mut c = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| m[i][k] * c[k]).sum();
        c[i] = (r[i] - s) / m[i][i];
    }
    c[2]
}

#[test]
fn ehrenfest_acceleration_on_slope() {
    let alpha = 2.0;
    let g = Arc::new(Grid::new(-20.0, 60.0, 2048).unwrap());
    let model = ModelSpec::decay(alpha, PulseSpec::constant(0.0).unwrap()).unwrap();
    let psi = TwoChannelState::gaussian_packet(g, Channel::Excited, 0.0, 0.0, 1.0);
    let cfg = RunConfig::new(0.001, 3.0).unwrap().with_record_every(20);
    let (traj, _) = propagate(&psi, &model, &cfg).unwrap();
    let accel = 2.0 * quadratic_coefficient(&traj.times, &traj.mean_x2);
    let rel = (accel - 2.0 * alpha).abs() / (2.0 * alpha);
    assert!(rel <= 0.005, "acceleration {accel}, relative error {rel:e}");
}

#[test]
fn free_packet_spreads_by_width_law() {
    let g = Arc::new(Grid::new(-60.0, 60.0, 2048).unwrap());
    let model = ModelSpec::new(
        PotentialSpec::constant(0.0),
        PotentialSpec::constant(0.0),
        PulseSpec::constant(0.0).unwrap(),
    );
    let sigma0: f64 = 1.5;
    let psi = TwoChannelState::gaussian_packet(g, Channel::Ground, -5.0, 1.0, sigma0);
    let cfg = RunConfig::new(0.005, 6.0).unwrap().with_record_every(200);
    let (traj, _) = propagate(&psi, &model, &cfg).unwrap();
    for (k, &t) in traj.times.iter().enumerate() {
        // Mass 1/2: sigma^2(t) = sigma0^2 + t^2 / sigma0^2, centre moves at 2 k0.
        let var = sigma0 * sigma0 + t * t / (sigma0 * sigma0);
        assert!((traj.var_x1[k] - var).abs() < 1e-8 * var, "t={t}");
        assert!((traj.mean_x1[k] - (-5.0 + 2.0 * t)).abs() < 1e-8);
    }
}

/// `<phi0|E>` evaluated in momentum space, where the continuum state of
/// `p^2 - alpha x` at zero energy is `alpha^(-1/2) exp(-i p^3 / (3 alpha))`.
fn fourier_overlap(alpha: f64) -> f64 {
    let c = (PI * SQRT_2).powf(-0.25);
    let pref = c * (2.0 * PI * SQRT_2).sqrt() / (2.0 * PI) / alpha.sqrt();
    let (a, b, n) = (-14.0, 14.0, 200_000);
    let h = (b - a) / n as f64;
    let f = |p: f64| (-p * p / SQRT_2).exp() * (p * p * p / (3.0 * alpha)).cos();
    let mut sum = 0.5 * (f(a) + f(b));
    for i in 1..n {
        sum += f(a + i as f64 * h);
    }
    pref * sum * h
}

#[test]
fn condon_quadrature_matches_momentum_space_oracle() {
    for alpha in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
        let s = condon_overlap(alpha).unwrap();
        let oracle = fourier_overlap(alpha);
        assert!(
            (s * s - oracle * oracle).abs() < 1e-9 * oracle * oracle,
            "alpha={alpha}: {} vs {}",
            s * s,
            oracle * oracle
        );
    }
    let q = condon_factor(2.0, CondonMethod::Quadrature).unwrap().magnitude_sq;
    let r = condon_factor(2.0, CondonMethod::Reflection).unwrap().magnitude_sq;
    assert!((q / r - 0.900).abs() < 1e-3, "{}", q / r);
}

#[test]
fn rabi_flopping_is_exact_on_flat_surfaces() {
    let g = Arc::new(Grid::new(-20.0, 20.0, 256).unwrap());
    let v = 0.8;
    let model = ModelSpec::new(
        PotentialSpec::constant(0.3),
        PotentialSpec::constant(0.3),
        PulseSpec::constant(v).unwrap(),
    );
    let psi = TwoChannelState::gaussian_packet(g, Channel::Ground, 0.0, 0.5, 2.0);
    let period = PI / v;
    let cfg = RunConfig::new(period / 2000.0, 2.0 * period).unwrap().with_record_every(10);
    let (traj, _) = propagate(&psi, &model, &cfg).unwrap();
    for (k, &t) in traj.times.iter().enumerate() {
        assert!((traj.p2[k] - rabi_population(v, t)).abs() <= 1e-6);
    }
}

#[test]
fn ground_state_stays_stationary() {
    let g = Arc::new(Grid::new(-16.0, 16.0, 512).unwrap());
    let model = ModelSpec::new(
        PotentialSpec::Harmonic,
        PotentialSpec::constant(5.0),
        PulseSpec::constant(0.0).unwrap(),
    );
    let psi = harmonic_ground_state(g).unwrap();
    let d0 = psi.density(Channel::Ground);
    // Angular frequency of the scaled oscillator is sqrt 2.
    let period = 2.0 * PI / SQRT_2;
    let cfg = RunConfig::new(period / 500.0, 10.0 * period).unwrap();
    let (_, end) = propagate(&psi, &model, &cfg).unwrap();
    let d1 = end.density(Channel::Ground);
    let worst = d0.iter().zip(&d1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-8, "{worst:e}");
}
