//! Named experiments with documented, overridable parameters.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;
use wavepacket_core::analytic::coupling_for_rate;
use wavepacket_core::{
    harmonic_ground_state, Absorber, Channel, Grid, ModelSpec, PotentialSpec, PulseSpec, Result,
    RunConfig, TwoChannelState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    DecayWeak,
    DecayStrong,
    RegimeScan,
    PulsedGaussian,
    LzSweep,
    ChirpCompare,
    McwfDecay,
    FreezeDemo,
    Rabi,
}

/// One tunable preset parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub key: &'static str,
    pub default: f64,
    pub min: f64,
    pub max: f64,
    pub integer: bool,
    pub doc: &'static str,
}

const fn real(key: &'static str, default: f64, min: f64, max: f64, doc: &'static str) -> ParamSpec {
    ParamSpec {
        key,
        default,
        min,
        max,
        integer: false,
        doc,
    }
}

const fn int(key: &'static str, default: f64, min: f64, max: f64, doc: &'static str) -> ParamSpec {
    ParamSpec {
        key,
        default,
        min,
        max,
        integer: true,
        doc,
    }
}

const BIG: f64 = 1e9;

/// Coupling strengths of the Landau-Zener sweep.
pub const LZ_COUPLINGS: [f64; 9] = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];

/// Decay rates of the regime scan.
pub const SCAN_RATES: [f64; 5] = [0.1, 0.26, 0.5, 1.0, 2.4];

fn numerics(
    x_min: f64,
    x_max: f64,
    n_points: f64,
    dt: f64,
    record_every: f64,
    snapshot_every: f64,
    mask_width: f64,
) -> Vec<ParamSpec> {
    vec![
        real("x_min", x_min, -BIG, BIG, "left grid edge"),
        real("x_max", x_max, -BIG, BIG, "right grid edge"),
        int("n_points", n_points, 64.0, 4194304.0, "grid points, a power of two"),
        real("dt", dt, 1e-7, 1.0, "time step"),
        int("record_every", record_every, 1.0, BIG, "steps between recorded observables"),
        int("snapshot_every", snapshot_every, 0.0, BIG, "steps between density snapshots, 0 for none"),
        real("mask_width", mask_width, 0.0, BIG, "absorbing mask width at each edge, 0 for none"),
    ]
}

impl Preset {
    pub const ALL: [Preset; 9] = [
        Preset::DecayWeak,
        Preset::DecayStrong,
        Preset::RegimeScan,
        Preset::PulsedGaussian,
        Preset::LzSweep,
        Preset::ChirpCompare,
        Preset::McwfDecay,
        Preset::FreezeDemo,
        Preset::Rabi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::DecayWeak => "decay_weak",
            Preset::DecayStrong => "decay_strong",
            Preset::RegimeScan => "regime_scan",
            Preset::PulsedGaussian => "pulsed_gaussian",
            Preset::LzSweep => "lz_sweep",
            Preset::ChirpCompare => "chirp_compare",
            Preset::McwfDecay => "mcwf_decay",
            Preset::FreezeDemo => "freeze_demo",
            Preset::Rabi => "rabi",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::DecayWeak => "ground state coupled to a linear continuum at gamma = 0.26; exponential fit against the golden-rule rate",
            Preset::DecayStrong => "the same model at gamma = 2.4; Rabi-like oscillation of the ground population",
            Preset::RegimeScan => "decay model at gamma = 0.1, 0.26, 0.5, 1.0, 2.4; fit quality and oscillation flag per rate",
            Preset::PulsedGaussian => "Gaussian laser pulse lifting the ground state onto the sloped surface, with density snapshots",
            Preset::LzSweep => "packet crossing a linear curve crossing at fixed speed for V = 0.05 .. 0.8; transfer against Landau-Zener",
            Preset::ChirpCompare => "excitation by the same Gaussian pulse with and without a linear chirp",
            Preset::McwfDecay => "pulsed excitation with spontaneous decay by quantum jumps; ensemble means and emission spectrum",
            Preset::FreezeDemo => "width growth of the excited packet under strong and ten times weaker constant coupling",
            Preset::Rabi => "flat degenerate surfaces with constant coupling; p2 against sin^2(V t)",
        }
    }

    /// Typical single-core runtime.
    pub fn runtime(self) -> &'static str {
        match self {
            Preset::DecayWeak => "about 2 s",
            Preset::DecayStrong => "under 1 s",
            Preset::RegimeScan => "about 10 s",
            Preset::PulsedGaussian => "about 2 s",
            Preset::LzSweep => "about 11 s",
            Preset::ChirpCompare => "about 2 s",
            Preset::McwfDecay => "about 40 s",
            Preset::FreezeDemo => "under 1 s",
            Preset::Rabi => "under 1 s",
        }
    }

    pub fn parameters(self) -> Vec<ParamSpec> {
        let decay_grid = || numerics(-12.0, 52.0, 2048.0, 0.001, 10.0, 1000.0, 8.0);
        let mut p = match self {
            Preset::DecayWeak | Preset::DecayStrong => {
                let gamma = if self == Preset::DecayWeak { 0.26 } else { 2.4 };
                let mut p = vec![
                    real("gamma", gamma, 1e-3, 20.0, "target rate; V follows from the reflection-principle rate"),
                    real("alpha", 2.0, 0.05, 100.0, "slope of the excited surface"),
                    real("horizon", 4.0, 0.1, 50.0, "run length in units of 1/gamma"),
                ];
                p.extend(decay_grid());
                p
            }
            Preset::RegimeScan => {
                let mut p = vec![
                    real("alpha", 2.0, 0.05, 100.0, "slope of the excited surface"),
                    real("horizon", 4.0, 0.1, 50.0, "run length in units of 1/gamma"),
                ];
                p.extend(numerics(-12.0, 52.0, 2048.0, 0.001, 10.0, 0.0, 8.0));
                p
            }
            Preset::PulsedGaussian => {
                let mut p = vec![
                    real("v0", 5.0, 0.0, 1e3, "pulse peak coupling"),
                    real("t_center", 4.0, 0.0, 1e3, "pulse centre"),
                    real("t_width", 1.0, 1e-3, 1e3, "pulse width (standard deviation)"),
                    real("chirp_rate", 0.0, -1e3, 1e3, "linear chirp rate"),
                    real("alpha", 2.0, 0.05, 100.0, "slope of the excited surface"),
                    real("t_final", 8.0, 1e-3, 1e4, "run length"),
                ];
                p.extend(numerics(-12.0, 52.0, 2048.0, 0.001, 10.0, 500.0, 8.0));
                p
            }
            Preset::LzSweep => {
                let mut p = vec![
                    real("slope_difference", 1.0, 1e-3, 100.0, "difference of the diabatic slopes"),
                    real("k0", 1.0, 0.05, 20.0, "packet wave number; speed is 2 k0"),
                    real("sigma", 3.0, 0.1, 100.0, "packet width"),
                    real("x0", -25.0, -BIG, 0.0, "packet start, left of the crossing at x = 0"),
                    real("t_final", 25.0, 1e-3, 1e4, "run length"),
                ];
                p.extend(numerics(-50.0, 78.0, 4096.0, 0.005, 100.0, 0.0, 10.0));
                p
            }
            Preset::ChirpCompare => {
                let mut p = vec![
                    real("v0", 2.0, 0.0, 1e3, "pulse peak coupling"),
                    real("t_center", 2.0, 0.0, 1e3, "pulse centre"),
                    real("t_width", 0.5, 1e-3, 1e3, "pulse width (standard deviation)"),
                    real("chirp_rate", -5.0, -1e3, 1e3, "chirp of the chirped leg"),
                    real("alpha", 2.0, 0.05, 100.0, "slope of the excited surface"),
                    real("t_final", 4.0, 1e-3, 1e4, "run length"),
                ];
                p.extend(numerics(-12.0, 52.0, 2048.0, 0.001, 10.0, 0.0, 8.0));
                p
            }
            Preset::McwfDecay => {
                let mut p = vec![
                    real("v0", 1.5, 0.0, 1e3, "pulse peak coupling"),
                    real("t_center", 1.0, 0.0, 1e3, "pulse centre"),
                    real("t_width", 0.4, 1e-3, 1e3, "pulse width (standard deviation)"),
                    real("alpha", 2.0, 0.05, 100.0, "slope of the excited surface"),
                    real("gamma_sp", 1.0, 0.0, 1e3, "spontaneous decay rate of channel 2"),
                    int("n_trajectories", 200.0, 2.0, 1e6, "ensemble size"),
                    int("n_bins", 30.0, 1.0, 1e4, "bins of the emission spectrum"),
                    real("t_final", 4.0, 1e-3, 1e4, "run length"),
                ];
                p.extend(numerics(-12.0, 36.0, 1024.0, 0.002, 25.0, 0.0, 6.0));
                p
            }
            Preset::FreezeDemo => {
                let mut p = vec![
                    real("v_strong", 5.0, 1e-3, 1e3, "strong constant coupling"),
                    real("weak_ratio", 10.0, 1.0, 1e3, "strong over weak coupling"),
                    real("alpha", 2.0, 0.05, 100.0, "slope of the excited surface"),
                ];
                p.extend(numerics(-12.0, 52.0, 2048.0, 0.0005, 2.0, 0.0, 8.0));
                p
            }
            Preset::Rabi => {
                let mut p = vec![
                    real("v", 0.8, 1e-3, 100.0, "constant coupling"),
                    real("periods", 2.0, 0.1, 100.0, "number of population periods pi/V"),
                    int("steps_per_period", 2000.0, 10.0, 1e7, "time steps per period"),
                ];
                p.extend(numerics(-20.0, 20.0, 256.0, 1.0, 10.0, 0.0, 0.0));
                p.retain(|s| s.key != "dt");
                p
            }
        };
        p.sort_by_key(|s| s.key);
        p
    }

    pub fn defaults(self) -> BTreeMap<String, f64> {
        self.parameters()
            .into_iter()
            .map(|s| (s.key.to_string(), s.default))
            .collect()
    }

    /// Cross-parameter consistency.
    pub fn check_params(self, p: &BTreeMap<String, f64>) -> std::result::Result<(), String> {
        let (lo, hi) = (p["x_min"], p["x_max"]);
        if hi <= lo {
            return Err(format!("x_max = {hi} must exceed x_min = {lo}"));
        }
        let n = p["n_points"] as u64;
        if !n.is_power_of_two() {
            return Err(format!("n_points = {n} must be a power of two"));
        }
        if p["mask_width"] >= 0.5 * (hi - lo) {
            return Err(format!("mask_width = {} must be below half the grid extent", p["mask_width"]));
        }
        if let (Some(tf), Some(dt)) = (p.get("t_final"), p.get("dt")) {
            if tf < dt {
                return Err(format!("t_final = {tf} must be at least dt = {dt}"));
            }
        }
        Ok(())
    }
}

/// Accessor over a validated parameter map.
#[derive(Debug, Clone, Copy)]
pub struct Params<'a>(pub &'a BTreeMap<String, f64>);

impl Params<'_> {
    pub fn get(&self, key: &str) -> f64 {
        self.0[key]
    }

    pub fn count(&self, key: &str) -> usize {
        self.0[key] as usize
    }

    pub fn grid(&self) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::new(self.get("x_min"), self.get("x_max"), self.count("n_points"))?))
    }

    pub fn absorber(&self) -> Absorber {
        let width = self.get("mask_width");
        if width > 0.0 {
            Absorber::Mask {
                width,
                strength: 1.0,
            }
        } else {
            Absorber::None
        }
    }

    pub fn run_config(&self, t_final: f64) -> Result<RunConfig> {
        Ok(RunConfig::new(self.get("dt"), t_final)?
            .with_absorber(self.absorber())
            .with_record_every(self.count("record_every"))
            .with_snapshot_every(self.count("snapshot_every")))
    }
}

/// Ground state, decay model and run policy for a target rate.
#[derive(Debug, Clone)]
pub struct DecaySetup {
    pub gamma: f64,
    pub alpha: f64,
    pub v: f64,
    pub state: TwoChannelState,
    pub model: ModelSpec,
    pub cfg: RunConfig,
}

pub fn decay_setup(p: Params<'_>, gamma: f64) -> Result<DecaySetup> {
    let alpha = p.get("alpha");
    let v = coupling_for_rate(gamma, alpha)?;
    let state = harmonic_ground_state(p.grid()?)?;
    let model = ModelSpec::decay(alpha, PulseSpec::constant(v)?)?;
    let cfg = p.run_config(p.get("horizon") / gamma)?;
    Ok(DecaySetup {
        gamma,
        alpha,
        v,
        state,
        model,
        cfg,
    })
}

pub fn pulse_from(p: Params<'_>) -> Result<PulseSpec> {
    PulseSpec::gaussian(p.get("v0"), p.get("t_center"), p.get("t_width"))
}

/// Channel-1 packet heading for the crossing of `0` and `-slope_difference x`.
pub fn lz_setup(p: Params<'_>, v: f64) -> Result<(TwoChannelState, ModelSpec, RunConfig)> {
    let state = TwoChannelState::gaussian_packet(p.grid()?, Channel::Ground, p.get("x0"), p.get("k0"), p.get("sigma"));
    let model = ModelSpec::new(
        PotentialSpec::constant(0.0),
        PotentialSpec::linear(0.0, p.get("slope_difference")),
        PulseSpec::constant(v)?,
    );
    Ok((state, model, p.run_config(p.get("t_final"))?))
}

/// Flat degenerate surfaces with constant coupling.
pub fn rabi_setup(p: Params<'_>) -> Result<(TwoChannelState, ModelSpec, RunConfig)> {
    let v = p.get("v");
    let period = PI / v;
    let dt = period / p.get("steps_per_period");
    let t_final = p.get("periods") * period;
    let state = TwoChannelState::gaussian_packet(p.grid()?, Channel::Ground, 0.0, 0.5, 2.0);
    let model = ModelSpec::new(
        PotentialSpec::constant(0.0),
        PotentialSpec::constant(0.0),
        PulseSpec::constant(v)?,
    );
    let cfg = RunConfig::new(dt, t_final)?
        .with_absorber(p.absorber())
        .with_record_every(p.count("record_every"))
        .with_snapshot_every(p.count("snapshot_every"));
    Ok((state, model, cfg))
}
