//! Preset pipelines and the run driver.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Map, Value};
use wavepacket_core::analytic::{condon_factor, CondonMethod};
use wavepacket_core::{
    detect_oscillation, emission_spectrum, fit_decay_rate, harmonic_ground_state, lz_probability,
    mcwf_ensemble, propagate, rabi_population, ww_rate_condon, ww_rate_reflection, Absorber,
    Channel, DecayModelParams, EnsembleResult, Grid, ModelSpec, PotentialSpec, PulseSpec,
    RunConfig, Trajectory, TwoChannelState, WindowPolicy,
};

use crate::config::{CustomSpec, Experiment, ExperimentConfig, InitialBlock, SurfaceBlock};
use crate::manifest::{units, write_manifest, CheckOutcome, Inventory, RunManifest};
use crate::output::{render_snapshot, render_table, render_timeseries, OutputError};
use crate::presets::{decay_setup, lz_setup, pulse_from, rabi_setup, Params, Preset, LZ_COUPLINGS, SCAN_RATES};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] wavepacket_core::Error),
    #[error(transparent)]
    Output(#[from] OutputError),
}

pub type RunResult<T> = std::result::Result<T, RunError>;

/// Tolerance of the probability bookkeeping check.
pub const CONSERVATION_TOL: f64 = 1e-8;

/// Accumulates derived quantities and checks of one run.
#[derive(Debug, Default)]
pub struct Report {
    pub derived: Map<String, Value>,
    pub checks: Vec<CheckOutcome>,
}

impl Report {
    fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.derived.insert(key.to_string(), value.into());
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(CheckOutcome {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

/// Runs an experiment, writing its outputs and manifest under `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> RunResult<RunManifest> {
    let start = Instant::now();
    let mut inv = Inventory::new(&cfg.out);
    let hash = cfg.hash();
    let mut report = Report::default();
    match &cfg.experiment {
        Experiment::Preset { preset, params } => {
            let p = Params(params);
            let ctx = Ctx {
                inv: &mut inv,
                report: &mut report,
                hash: &hash,
                window: cfg.fit_window,
                seed: cfg.seed,
            };
            match preset {
                Preset::DecayWeak | Preset::DecayStrong => decay_single(ctx, *preset, p)?,
                Preset::RegimeScan => regime_scan(ctx, p)?,
                Preset::PulsedGaussian => pulsed_gaussian(ctx, p)?,
                Preset::LzSweep => lz_sweep(ctx, p)?,
                Preset::ChirpCompare => chirp_compare(ctx, p)?,
                Preset::McwfDecay => mcwf_decay(ctx, p)?,
                Preset::FreezeDemo => freeze_demo(ctx, p)?,
                Preset::Rabi => rabi(ctx, p)?,
            }
        }
        Experiment::Custom(spec) => custom(
            Ctx {
                inv: &mut inv,
                report: &mut report,
                hash: &hash,
                window: cfg.fit_window,
                seed: cfg.seed,
            },
            spec,
        )?,
    }
    let manifest = RunManifest {
        experiment: cfg.name().to_string(),
        config_hash: hash,
        config: cfg.echo(),
        units: units(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        derived: Value::Object(report.derived),
        checks: report.checks,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        files: inv.entries()?,
    };
    write_manifest(&cfg.out, &manifest)?;
    Ok(manifest)
}

struct Ctx<'a> {
    inv: &'a mut Inventory,
    report: &'a mut Report,
    hash: &'a str,
    window: WindowPolicy,
    seed: u64,
}

impl Ctx<'_> {
    fn trajectory(&mut self, name: &str, grid: &Grid, traj: &Trajectory) -> RunResult<()> {
        self.inv.write(&format!("{name}.tsv"), &render_timeseries(traj))?;
        for (i, snap) in traj.snapshots.iter().enumerate() {
            let path = format!("snapshots/{name}_{i:05}.tsv");
            self.inv.write(&path, &render_snapshot(snap, grid, self.hash))?;
        }
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> RunResult<()> {
        let text = serde_json::to_string_pretty(value).expect("json value serializes");
        self.inv.write(name, &(text + "\n"))?;
        Ok(())
    }
}

/// Largest deviation of `p1 + p2 + absorbed` from its initial value.
pub fn conservation_error(traj: &Trajectory) -> f64 {
    let total = |k: usize| traj.p1[k] + traj.p2[k] + traj.absorbed[k];
    let n0 = total(0);
    (0..traj.len()).map(|k| (total(k) - n0).abs()).fold(0.0, f64::max)
}

fn conservation_check(report: &mut Report, label: &str, traj: &Trajectory) {
    let err = conservation_error(traj);
    report.check(
        &format!("{label}probability conservation"),
        err <= CONSERVATION_TOL,
        format!("max |p1 + p2 + absorbed - N0| = {err:.3e} (limit {CONSERVATION_TOL:e})"),
    );
}

fn crossing_info(model: &ModelSpec, grid: &Grid) -> Value {
    let mut out = Map::new();
    if let Ok(c) = model.crossing_point(grid) {
        out.insert("crossing_point".into(), json!({"x": c.x, "count": c.count}));
    }
    if let Ok(r) = model.resonance_point(grid, std::f64::consts::FRAC_1_SQRT_2) {
        out.insert("resonance_point_at_ground_energy".into(), json!({"x": r.x, "count": r.count}));
    }
    Value::Object(out)
}

/// Closed-form rates for the decay model.
pub fn decay_rates(v: f64, alpha: f64) -> wavepacket_core::Result<(f64, f64)> {
    let reflection = ww_rate_reflection(&DecayModelParams::new(v, alpha)?)?;
    let quadrature = ww_rate_condon(v, &condon_factor(alpha, CondonMethod::Quadrature)?)?;
    Ok((reflection, quadrature))
}

/// Fit and oscillation summary of one decay trajectory.
fn decay_summary(traj: &Trajectory, window: WindowPolicy) -> Value {
    let mut out = Map::new();
    match fit_decay_rate(&traj.times, &traj.p1, window) {
        Ok(f) => {
            out.insert("gamma_fit".into(), json!(f.gamma_fit));
            out.insert("r_squared".into(), json!(f.r_squared));
            out.insert("fit_window".into(), json!([f.window.0, f.window.1]));
            out.insert("fit_points".into(), json!(f.n_points));
        }
        Err(e) => {
            out.insert("fit_error".into(), json!(e.to_string()));
        }
    }
    if let Ok(o) = detect_oscillation(&traj.p1) {
        out.insert("oscillatory".into(), json!(o.is_oscillatory));
        out.insert("n_local_minima".into(), json!(o.n_local_minima));
    }
    Value::Object(out)
}

fn decay_single(mut ctx: Ctx<'_>, preset: Preset, p: Params<'_>) -> RunResult<()> {
    let s = decay_setup(p, p.get("gamma"))?;
    let (traj, _) = propagate(&s.state, &s.model, &s.cfg)?;
    ctx.trajectory("timeseries", s.state.grid(), &traj)?;
    let (g_ref, g_quad) = decay_rates(s.v, s.alpha)?;
    let summary = decay_summary(&traj, ctx.window);

    let r = &mut *ctx.report;
    r.set("v", s.v);
    r.set("v_derivation", "V = sqrt(gamma alpha (2 pi^2)^(1/4) / (2 pi)), the reflection-principle rate inverted");
    r.set("gamma_reflection", g_ref);
    r.set("gamma_quadrature", g_quad);
    r.set("condon_reflection", condon_factor(s.alpha, CondonMethod::Reflection)?.magnitude_sq);
    r.set("condon_quadrature", condon_factor(s.alpha, CondonMethod::Quadrature)?.magnitude_sq);
    r.set("geometry", crossing_info(&s.model, s.state.grid()));
    r.set("t_final", s.cfg.t_final);
    for (k, v) in summary.as_object().expect("object") {
        r.set(k, v.clone());
    }
    match preset {
        Preset::DecayWeak => {
            let gf = summary.get("gamma_fit").and_then(Value::as_f64);
            let r2 = summary.get("r_squared").and_then(Value::as_f64);
            match (gf, r2) {
                (Some(gf), Some(r2)) => {
                    let rel = (gf - g_quad).abs() / g_quad;
                    r.set("relative_gap_to_quadrature", rel);
                    r.set("relative_gap_to_reflection", (gf - g_ref).abs() / g_ref);
                    r.check("fit quality", r2 >= 0.995, format!("r^2 = {r2:.6} (need >= 0.995)"));
                    r.check(
                        "rate against golden rule",
                        rel <= 0.05,
                        format!("gamma_fit = {gf:.5}, quadrature rate = {g_quad:.5}, gap {:.2}% (limit 5%)", 100.0 * rel),
                    );
                }
                _ => r.check("fit quality", false, "decay fit failed".into()),
            }
        }
        _ => {
            let osc = summary.get("oscillatory").and_then(Value::as_bool).unwrap_or(false);
            let n = summary.get("n_local_minima").and_then(Value::as_u64).unwrap_or(0);
            r.check("oscillation", osc, format!("{n} local minima in p1"));
        }
    }
    conservation_check(r, "", &traj);
    let derived = Value::Object(r.derived.clone());
    ctx.json("fit.json", &derived)
}

/// One leg of the regime scan.
#[derive(Debug, Clone)]
pub struct ScanLeg {
    pub gamma: f64,
    pub v: f64,
    pub gamma_quadrature: f64,
    pub trajectory: Trajectory,
    pub summary: Value,
}

pub fn regime_legs(p: Params<'_>, window: WindowPolicy, rates: &[f64]) -> RunResult<Vec<ScanLeg>> {
    rates
        .par_iter()
        .map(|&gamma| {
            let s = decay_setup(p, gamma)?;
            let (traj, _) = propagate(&s.state, &s.model, &s.cfg)?;
            let (_, gamma_quadrature) = decay_rates(s.v, s.alpha)?;
            let summary = decay_summary(&traj, window);
            Ok(ScanLeg {
                gamma,
                v: s.v,
                gamma_quadrature,
                trajectory: traj,
                summary,
            })
        })
        .collect()
}

/// Whether a scan leg shows exponential decay (`gamma <= 1`) or oscillation.
pub fn scan_leg_passes(leg: &ScanLeg) -> (bool, String) {
    let r2 = leg.summary.get("r_squared").and_then(Value::as_f64).unwrap_or(f64::NAN);
    let osc = leg.summary.get("oscillatory").and_then(Value::as_bool).unwrap_or(false);
    let n = leg.summary.get("n_local_minima").and_then(Value::as_u64).unwrap_or(0);
    if leg.gamma <= 1.0 {
        (
            r2 >= 0.99 && !osc,
            format!("r^2 = {r2:.6} (need >= 0.99), oscillation {osc} ({n} minima, need none)"),
        )
    } else {
        (osc, format!("oscillation {osc} ({n} minima, need at least one)"))
    }
}

fn regime_scan(mut ctx: Ctx<'_>, p: Params<'_>) -> RunResult<()> {
    let legs = regime_legs(p, ctx.window, &SCAN_RATES)?;
    let grid = p.grid()?;
    let mut rows = Vec::new();
    for leg in &legs {
        ctx.trajectory(&format!("timeseries_gamma_{}", leg.gamma), &grid, &leg.trajectory)?;
        let get = |k: &str| leg.summary.get(k).and_then(Value::as_f64).unwrap_or(f64::NAN);
        let osc = leg.summary.get("oscillatory").and_then(Value::as_bool).unwrap_or(false);
        rows.push(vec![
            leg.gamma,
            leg.v,
            leg.gamma_quadrature,
            get("gamma_fit"),
            get("r_squared"),
            get("n_local_minima"),
            if osc { 1.0 } else { 0.0 },
        ]);
        let (passed, detail) = scan_leg_passes(leg);
        ctx.report.check(&format!("gamma = {}", leg.gamma), passed, detail);
        conservation_check(ctx.report, &format!("gamma = {}: ", leg.gamma), &leg.trajectory);
    }
    let table = render_table(
        &["gamma", "v", "gamma_quadrature", "gamma_fit", "r_squared", "n_local_minima", "oscillatory"],
        rows,
    );
    ctx.inv.write("scan.tsv", &table)?;
    let legs_json: Vec<Value> = legs
        .iter()
        .map(|l| json!({"gamma": l.gamma, "v": l.v, "gamma_quadrature": l.gamma_quadrature, "summary": l.summary}))
        .collect();
    ctx.report.set("legs", legs_json);
    Ok(())
}

fn pulsed_gaussian(mut ctx: Ctx<'_>, p: Params<'_>) -> RunResult<()> {
    let grid = p.grid()?;
    let state = harmonic_ground_state(grid.clone())?;
    let pulse = pulse_from(p)?.with_chirp(p.get("chirp_rate"))?;
    let model = ModelSpec::decay(p.get("alpha"), pulse)?;
    let cfg = p.run_config(p.get("t_final"))?;
    let (traj, _) = propagate(&state, &model, &cfg)?;
    ctx.trajectory("timeseries", &grid, &traj)?;
    let peak = traj.p2.iter().copied().fold(0.0, f64::max);
    let r = &mut *ctx.report;
    r.set("geometry", crossing_info(&model, &grid));
    r.set("peak_p2", peak);
    r.set("final_p1", *traj.p1.last().expect("recorded"));
    r.set("absorbed", traj.absorbed_norm());
    r.set("snapshots", traj.snapshots.len());
    conservation_check(r, "", &traj);
    Ok(())
}

/// Numeric transfer `p2 + absorbed from channel 2` for one coupling.
pub fn lz_transfer(p: Params<'_>, v: f64) -> RunResult<(f64, Trajectory)> {
    let (state, model, cfg) = lz_setup(p, v)?;
    let (traj, end) = propagate(&state, &model, &cfg)?;
    Ok((end.norm().p2 + traj.absorbed_by_channel[1], traj))
}

fn lz_sweep(mut ctx: Ctx<'_>, p: Params<'_>) -> RunResult<()> {
    let velocity = 2.0 * p.get("k0");
    let legs: Vec<(f64, f64, Trajectory)> = LZ_COUPLINGS
        .par_iter()
        .map(|&v| lz_transfer(p, v).map(|(t, traj)| (v, t, traj)))
        .collect::<RunResult<_>>()?;
    let mut rows = Vec::new();
    let (mut max_abs, mut max_rel) = (0.0f64, 0.0f64);
    let grid = p.grid()?;
    for (v, numeric, traj) in &legs {
        let analytic = lz_probability(*v, p.get("slope_difference"), velocity)?.transfer;
        let dev = numeric - analytic;
        max_abs = max_abs.max(dev.abs());
        max_rel = max_rel.max(dev.abs() / analytic);
        rows.push(vec![*v, *numeric, analytic, dev]);
        ctx.trajectory(&format!("timeseries_v_{v}"), &grid, traj)?;
        conservation_check(ctx.report, &format!("V = {v}: "), traj);
    }
    ctx.inv.write("lz.tsv", &render_table(&["v", "numeric", "analytic", "deviation"], rows))?;
    let (_, model, _) = lz_setup(p, 0.0)?;
    let r = &mut *ctx.report;
    r.set("velocity", velocity);
    r.set("geometry", crossing_info(&model, &grid));
    r.set("max_abs_deviation", max_abs);
    r.set("max_rel_deviation", max_rel);
    r.check(
        "Landau-Zener transfer",
        max_abs <= 0.02,
        format!("max |numeric - analytic| = {max_abs:.4} (limit 0.02), max relative {max_rel:.4}"),
    );
    Ok(())
}

/// Ground-state depletion `1 - p1(t_final)` under the preset pulse with the given chirp.
pub fn chirp_efficiency(p: Params<'_>, chirp_rate: f64) -> RunResult<(f64, Trajectory)> {
    let grid = p.grid()?;
    let state = harmonic_ground_state(grid)?;
    let model = ModelSpec::decay(p.get("alpha"), pulse_from(p)?.with_chirp(chirp_rate)?)?;
    let cfg = p.run_config(p.get("t_final"))?;
    let (traj, _) = propagate(&state, &model, &cfg)?;
    Ok((1.0 - traj.p1.last().expect("recorded"), traj))
}

fn chirp_compare(mut ctx: Ctx<'_>, p: Params<'_>) -> RunResult<()> {
    let chirp = p.get("chirp_rate");
    let legs: Vec<(f64, Trajectory)> = [0.0, chirp]
        .par_iter()
        .map(|&c| chirp_efficiency(p, c))
        .collect::<RunResult<_>>()?;
    let grid = p.grid()?;
    ctx.trajectory("timeseries_unchirped", &grid, &legs[0].1)?;
    ctx.trajectory("timeseries_chirped", &grid, &legs[1].1)?;
    let (plain, chirped) = (legs[0].0, legs[1].0);
    let summary = json!({"chirp_rate": chirp, "efficiency_unchirped": plain, "efficiency_chirped": chirped});
    ctx.json("chirp.json", &summary)?;
    let r = &mut *ctx.report;
    r.set("efficiency_unchirped", plain);
    r.set("efficiency_chirped", chirped);
    r.check(
        "chirp raises excitation",
        chirped > plain,
        format!("1 - p1(t_final): chirped {chirped:.4}, unchirped {plain:.4}"),
    );
    conservation_check(r, "unchirped: ", &legs[0].1);
    conservation_check(r, "chirped: ", &legs[1].1);
    Ok(())
}

fn ensemble_table(e: &EnsembleResult, reference: &Trajectory) -> String {
    let rows = (0..e.times.len()).map(|k| {
        vec![e.times[k], e.mean_p1[k], e.mean_p2[k], e.se_p1[k], e.se_p2[k], reference.p2[k]]
    });
    render_table(&["t", "mean_p1", "mean_p2", "se_p1", "se_p2", "reference_p2"], rows)
}

fn write_ensemble(ctx: &mut Ctx<'_>, e: &EnsembleResult, reference: &Trajectory, model: &ModelSpec, n_bins: usize) -> RunResult<()> {
    ctx.inv.write("ensemble.tsv", &ensemble_table(e, reference))?;
    let mut jumps = String::from("trajectory_id\tt_jump\tx_jump\tfrequency\n");
    for j in &e.jumps {
        let f = model.difference_potential(j.x_jump)?;
        jumps.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            j.trajectory_id,
            crate::output::fmt12(j.t_jump),
            crate::output::fmt12(j.x_jump),
            crate::output::fmt12(f)
        ));
    }
    ctx.inv.write("jumps.tsv", &jumps)?;
    ctx.report.set("n_trajectories", e.n_trajectories);
    ctx.report.set("base_seed", e.base_seed);
    ctx.report.set("seed_rule", "ChaCha8 seeded from base_seed, stream = trajectory index");
    ctx.report.set("n_jumps", e.jumps.len());
    if let Ok(h) = emission_spectrum(&e.jumps, model, n_bins) {
        let centers = h.centers();
        let rows = (0..h.n_bins()).map(|i| vec![h.bin_edges[i], h.bin_edges[i + 1], centers[i], h.counts[i] as f64]);
        ctx.inv.write("spectrum.tsv", &render_table(&["bin_lo", "bin_hi", "center", "count"], rows))?;
        ctx.report.set("spectrum_peak_frequency", centers[h.peak_bin()]);
    }
    Ok(())
}

fn mcwf_decay(mut ctx: Ctx<'_>, p: Params<'_>) -> RunResult<()> {
    let grid = p.grid()?;
    let state = harmonic_ground_state(grid.clone())?;
    let model = ModelSpec::decay(p.get("alpha"), pulse_from(p)?)?;
    let cfg = p.run_config(p.get("t_final"))?;
    let gamma = p.get("gamma_sp");
    let (reference, _) = propagate(&state, &model, &cfg)?;
    let e = mcwf_ensemble(&state, &model, gamma, &cfg, ctx.seed, p.count("n_trajectories"))?;
    write_ensemble(&mut ctx, &e, &reference, &model, p.count("n_bins"))?;
    let worst = (1..e.times.len())
        .map(|k| e.mean_p2[k] - reference.p2[k])
        .fold(f64::NEG_INFINITY, f64::max);
    let r = &mut *ctx.report;
    r.set("geometry", crossing_info(&model, &grid));
    r.set("gamma_sp", gamma);
    r.check(
        "decay lowers excited population",
        worst <= 0.0,
        format!("max over t > 0 of mean_p2 - p2(gamma = 0) = {worst:.3e} (need <= 0)"),
    );
    Ok(())
}

/// Population-weighted mean growth of the channel-2 variance over the
/// recorded times, relative to the variance of the initial state.
pub fn weighted_variance_growth(traj: &Trajectory, initial_variance: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..traj.len() {
        if traj.var_x2[k].is_finite() {
            num += traj.p2[k] * (traj.var_x2[k] - initial_variance);
            den += traj.p2[k];
        }
    }
    num / den
}

/// Variance growth at strong and weak coupling over one strong-coupling period.
pub fn freeze_growths(p: Params<'_>) -> RunResult<(f64, f64, Trajectory, Trajectory)> {
    let grid = p.grid()?;
    let state = harmonic_ground_state(grid)?;
    let var0 = wavepacket_core::position_moments(&state, Channel::Ground)?.variance;
    let strong = p.get("v_strong");
    let weak = strong / p.get("weak_ratio");
    let cfg = p.run_config(PI / strong)?;
    let legs: Vec<(f64, Trajectory)> = [strong, weak]
        .par_iter()
        .map(|&v| {
            let model = ModelSpec::decay(p.get("alpha"), PulseSpec::constant(v)?)?;
            let (traj, _) = propagate(&state, &model, &cfg)?;
            Ok((weighted_variance_growth(&traj, var0), traj))
        })
        .collect::<RunResult<_>>()?;
    let mut it = legs.into_iter();
    let (gs, ts) = it.next().expect("two legs");
    let (gw, tw) = it.next().expect("two legs");
    Ok((gs, gw, ts, tw))
}

fn freeze_demo(mut ctx: Ctx<'_>, p: Params<'_>) -> RunResult<()> {
    let (gs, gw, ts, tw) = freeze_growths(p)?;
    let grid = p.grid()?;
    ctx.trajectory("timeseries_strong", &grid, &ts)?;
    ctx.trajectory("timeseries_weak", &grid, &tw)?;
    let ratio = gw / gs;
    let summary = json!({
        "v_strong": p.get("v_strong"),
        "v_weak": p.get("v_strong") / p.get("weak_ratio"),
        "interval": PI / p.get("v_strong"),
        "growth_strong": gs,
        "growth_weak": gw,
        "ratio": ratio,
    });
    ctx.json("freeze.json", &summary)?;
    let r = &mut *ctx.report;
    for (k, v) in summary.as_object().expect("object") {
        r.set(k, v.clone());
    }
    r.check(
        "freezing",
        ratio >= 3.0,
        format!("weak/strong variance growth = {ratio:.3} (need >= 3)"),
    );
    conservation_check(r, "strong: ", &ts);
    conservation_check(r, "weak: ", &tw);
    Ok(())
}

/// Largest `|p2 - sin^2(V t)|` over the recorded times.
pub fn rabi_error(traj: &Trajectory, v: f64) -> f64 {
    traj.times
        .iter()
        .zip(&traj.p2)
        .map(|(&t, &p2)| (p2 - rabi_population(v, t)).abs())
        .fold(0.0, f64::max)
}

fn rabi(mut ctx: Ctx<'_>, p: Params<'_>) -> RunResult<()> {
    let (state, model, cfg) = rabi_setup(p)?;
    let (traj, _) = propagate(&state, &model, &cfg)?;
    ctx.trajectory("timeseries", state.grid(), &traj)?;
    let err = rabi_error(&traj, p.get("v"));
    let r = &mut *ctx.report;
    r.set("max_abs_error", err);
    r.set("dt", cfg.dt);
    r.check("Rabi flopping", err <= 1e-6, format!("max |p2 - sin^2(V t)| = {err:.3e} (limit 1e-6)"));
    conservation_check(r, "", &traj);
    Ok(())
}

fn surface(block: SurfaceBlock) -> PotentialSpec {
    match block {
        SurfaceBlock::Harmonic => PotentialSpec::Harmonic,
        SurfaceBlock::Linear { offset, slope } => PotentialSpec::linear(offset, slope),
    }
}

/// Grid, model, initial state and run policy of an explicit configuration.
pub fn custom_setup(spec: &CustomSpec) -> wavepacket_core::Result<(TwoChannelState, ModelSpec, RunConfig)> {
    let grid = Arc::new(Grid::new(spec.grid.x_min, spec.grid.x_max, spec.grid.n_points)?);
    let pb = spec.pulse;
    let pulse = match pb.envelope {
        "gaussian" => PulseSpec::gaussian(pb.v0, pb.t_center, pb.t_width)?,
        _ => PulseSpec::constant(pb.v0)?,
    }
    .with_chirp(pb.chirp_rate)?;
    let model = ModelSpec::new(surface(spec.model.u1), surface(spec.model.u2), pulse);
    let state = match spec.initial {
        InitialBlock::Ground => harmonic_ground_state(grid)?,
        InitialBlock::Packet { channel, x0, k0, sigma } => {
            let ch = if channel == 2 { Channel::Excited } else { Channel::Ground };
            TwoChannelState::gaussian_packet(grid, ch, x0, k0, sigma)
        }
    };
    let absorber = if spec.run.mask_width > 0.0 {
        Absorber::Mask {
            width: spec.run.mask_width,
            strength: spec.run.mask_strength,
        }
    } else {
        Absorber::None
    };
    let cfg = RunConfig::new(spec.run.dt, spec.run.t_final)?
        .with_absorber(absorber)
        .with_record_every(spec.run.record_every)
        .with_snapshot_every(spec.run.snapshot_every);
    cfg.validate(state.grid())?;
    Ok((state, model, cfg))
}

fn custom(mut ctx: Ctx<'_>, spec: &CustomSpec) -> RunResult<()> {
    let (state, model, cfg) = custom_setup(spec)?;
    let (traj, _) = propagate(&state, &model, &cfg)?;
    ctx.trajectory("timeseries", state.grid(), &traj)?;
    ctx.report.set("geometry", crossing_info(&model, state.grid()));
    let summary = decay_summary(&traj, ctx.window);
    ctx.report.set("summary", summary);
    conservation_check(ctx.report, "", &traj);
    if let Some(m) = spec.mcwf {
        let e = mcwf_ensemble(&state, &model, m.gamma_sp, &cfg, ctx.seed, m.n_trajectories)?;
        write_ensemble(&mut ctx, &e, &traj, &model, 30)?;
    }
    Ok(())
}
