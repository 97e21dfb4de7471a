//! Experiment configuration: a flat `key = value` format with `[section]`
//! headers, `#` comments and lowercase keys.
//!
//! ```text
//! preset = decay_weak
//! out = runs/decay_weak
//! seed = 2024
//!
//! [params]
//! gamma = 0.26
//! ```
//!
//! Either `preset` (optionally with `[params]`) or the explicit blocks
//! `[grid]`, `[model]`, `[pulse]`, `[run]`, `[initial]` and `[mcwf]` may be
//! given, never both. `[fit]` is accepted in either form.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use wavepacket_core::WindowPolicy;

use crate::presets::Preset;

pub const DEFAULT_SEED: u64 = 2024;

/// One problem found while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

/// Every violation in a rejected configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub Vec<Violation>);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} problems):", self.0.len())?;
        for v in &self.0 {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    pub fn mentions(&self, key: &str) -> bool {
        self.0.iter().any(|v| v.key == key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridBlock {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SurfaceBlock {
    Harmonic,
    Linear { offset: f64, slope: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelBlock {
    pub u1: SurfaceBlock,
    pub u2: SurfaceBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseBlock {
    /// `constant` or `gaussian`.
    pub envelope: &'static str,
    pub v0: f64,
    pub t_center: f64,
    pub t_width: f64,
    pub chirp_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunBlock {
    pub dt: f64,
    pub t_final: f64,
    /// Mask width; 0 disables the absorber.
    pub mask_width: f64,
    pub mask_strength: f64,
    pub record_every: usize,
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitialBlock {
    /// Harmonic ground state on channel 1.
    Ground,
    Packet {
        channel: u8,
        x0: f64,
        k0: f64,
        sigma: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McwfBlock {
    pub gamma_sp: f64,
    pub n_trajectories: usize,
}

/// A fully specified run without a preset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CustomSpec {
    pub grid: GridBlock,
    pub model: ModelBlock,
    pub pulse: PulseBlock,
    pub run: RunBlock,
    pub initial: InitialBlock,
    pub mcwf: Option<McwfBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Experiment {
    Preset {
        preset: Preset,
        /// Every preset parameter, defaults filled in.
        params: BTreeMap<String, f64>,
    },
    Custom(CustomSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub out: PathBuf,
    pub seed: u64,
    pub fit_window: WindowPolicy,
}

impl ExperimentConfig {
    /// Defaulted configuration of a preset.
    pub fn preset(preset: Preset) -> Self {
        Self {
            experiment: Experiment::Preset {
                preset,
                params: preset.defaults(),
            },
            out: PathBuf::from(format!("runs/{}", preset.name())),
            seed: DEFAULT_SEED,
            fit_window: WindowPolicy::default(),
        }
    }

    pub fn name(&self) -> &str {
        match &self.experiment {
            Experiment::Preset { preset, .. } => preset.name(),
            Experiment::Custom(_) => "custom",
        }
    }

    /// Stable JSON rendering used for hashing and the manifest echo.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of [`Self::echo`] without the
    /// output directory, so relocated runs carry the same hash.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut echo = self.echo();
        if let Some(map) = echo.as_object_mut() {
            map.remove("out");
        }
        let text = serde_json::to_string(&echo).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))[..16].to_string()
    }
}

const SECTIONS: [&str; 9] = [
    "", "params", "grid", "model", "pulse", "run", "initial", "mcwf", "fit",
];
const EXPLICIT: [&str; 6] = ["grid", "model", "pulse", "run", "initial", "mcwf"];

fn allowed_keys(section: &str) -> &'static [&'static str] {
    match section {
        "" => &["preset", "out", "seed"],
        "grid" => &["x_min", "x_max", "n_points"],
        "model" => &["u1", "u1_offset", "u1_slope", "u2", "u2_offset", "u2_slope"],
        "pulse" => &["envelope", "v0", "t_center", "t_width", "chirp_rate"],
        "run" => &[
            "dt",
            "t_final",
            "absorber",
            "mask_width",
            "mask_strength",
            "record_every",
            "snapshot_every",
        ],
        "initial" => &["kind", "channel", "x0", "k0", "sigma"],
        "mcwf" => &["gamma_sp", "n_trajectories"],
        "fit" => &["window_lo", "window_hi", "t_lo", "t_hi"],
        _ => &[],
    }
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

/// Raw sections after lexing, with provenance for error messages.
struct Raw {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
    violations: Vec<Violation>,
}

fn lex(text: &str) -> Raw {
    let mut sections: BTreeMap<String, BTreeMap<String, Entry>> = BTreeMap::new();
    let mut violations = Vec::new();
    let mut current = String::new();
    sections.insert(String::new(), BTreeMap::new());
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                violations.push(Violation {
                    line: Some(line),
                    key: content.to_string(),
                    message: "malformed section header".into(),
                });
                continue;
            };
            let name = name.trim();
            if !SECTIONS.contains(&name) || name.is_empty() {
                violations.push(Violation {
                    line: Some(line),
                    key: format!("[{name}]"),
                    message: "unknown section".into(),
                });
            }
            if sections.contains_key(name) && !name.is_empty() {
                violations.push(Violation {
                    line: Some(line),
                    key: format!("[{name}]"),
                    message: "section repeated".into(),
                });
            }
            current = name.to_string();
            sections.entry(current.clone()).or_default();
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            violations.push(Violation {
                line: Some(line),
                key: content.to_string(),
                message: "expected `key = value`".into(),
            });
            continue;
        };
        let key = key.trim();
        let value = value.trim().trim_matches('"').to_string();
        if key != key.to_lowercase() || key.is_empty() {
            violations.push(Violation {
                line: Some(line),
                key: key.to_string(),
                message: "keys must be lowercase".into(),
            });
            continue;
        }
        let qualified = qualify(&current, key);
        if SECTIONS.contains(&current.as_str())
            && current != "params"
            && !allowed_keys(&current).contains(&key)
        {
            violations.push(Violation {
                line: Some(line),
                key: qualified,
                message: "unknown key".into(),
            });
            continue;
        }
        let section = sections.entry(current.clone()).or_default();
        if section.contains_key(key) {
            violations.push(Violation {
                line: Some(line),
                key: qualified,
                message: "key repeated".into(),
            });
            continue;
        }
        section.insert(key.to_string(), Entry { value, line });
    }
    Raw {
        sections,
        violations,
    }
}

fn qualify(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

/// Typed access to one section, collecting violations as it goes.
struct Reader<'a> {
    section: &'a str,
    entries: Option<&'a BTreeMap<String, Entry>>,
    violations: &'a mut Vec<Violation>,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&Entry> {
        self.entries.and_then(|e| e.get(key))
    }

    fn fail(&mut self, key: &str, line: Option<usize>, message: String) {
        self.violations.push(Violation {
            line,
            key: qualify(self.section, key),
            message,
        });
    }

    fn string(&mut self, key: &str) -> Option<String> {
        self.raw(key).map(|e| e.value.clone())
    }

    /// Float in `[lo, hi]`, or `default` when absent. `None` on violation.
    fn float(&mut self, key: &str, default: Option<f64>, lo: f64, hi: f64) -> Option<f64> {
        let Some(entry) = self.raw(key).cloned() else {
            if default.is_none() {
                self.fail(key, None, "missing required value".into());
            }
            return default;
        };
        match entry.value.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= lo && v <= hi => Some(v),
            Ok(v) => {
                self.fail(key, Some(entry.line), format!("{v} outside [{lo}, {hi}]"));
                None
            }
            Err(_) => {
                self.fail(key, Some(entry.line), format!("`{}` is not a number", entry.value));
                None
            }
        }
    }

    /// Positive float.
    fn positive(&mut self, key: &str, default: Option<f64>) -> Option<f64> {
        let v = self.float(key, default, f64::MIN, f64::MAX)?;
        if v > 0.0 {
            Some(v)
        } else {
            let line = self.raw(key).map(|e| e.line);
            self.fail(key, line, format!("{v} must be positive"));
            None
        }
    }

    fn integer(&mut self, key: &str, default: Option<u64>, lo: u64, hi: u64) -> Option<u64> {
        let Some(entry) = self.raw(key).cloned() else {
            if default.is_none() {
                self.fail(key, None, "missing required value".into());
            }
            return default;
        };
        match entry.value.parse::<u64>() {
            Ok(v) if v >= lo && v <= hi => Some(v),
            Ok(v) => {
                self.fail(key, Some(entry.line), format!("{v} outside [{lo}, {hi}]"));
                None
            }
            Err(_) => {
                self.fail(
                    key,
                    Some(entry.line),
                    format!("`{}` is not a non-negative integer", entry.value),
                );
                None
            }
        }
    }

    fn choice(&mut self, key: &str, default: &'static str, options: &[&'static str]) -> Option<&'static str> {
        let Some(entry) = self.raw(key).cloned() else {
            return Some(default);
        };
        match options.iter().find(|o| **o == entry.value) {
            Some(o) => Some(o),
            None => {
                self.fail(
                    key,
                    Some(entry.line),
                    format!("`{}` is not one of {}", entry.value, options.join(", ")),
                );
                None
            }
        }
    }
}

/// Parses and validates a configuration, reporting every violation.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw = lex(text);
    let mut violations = raw.violations;
    let sections = raw.sections;

    let section = |name: &str| sections.get(name);
    let mut top = Reader {
        section: "",
        entries: section(""),
        violations: &mut violations,
    };
    let preset_name = top.string("preset");
    let out = top.string("out");
    let seed = top.integer("seed", Some(DEFAULT_SEED), 0, u64::MAX);

    let explicit: Vec<&str> = EXPLICIT
        .iter()
        .copied()
        .filter(|s| sections.contains_key(*s))
        .collect();

    let experiment = match (&preset_name, explicit.is_empty()) {
        (Some(_), false) => {
            violations.push(Violation {
                line: None,
                key: "preset".into(),
                message: format!(
                    "a preset cannot be combined with explicit blocks ({})",
                    explicit.join(", ")
                ),
            });
            if let Some(name) = &preset_name {
                parse_preset(name, section("params"), &mut violations);
            }
            None
        }
        (None, true) => {
            violations.push(Violation {
                line: None,
                key: "preset".into(),
                message: "give either a preset or the explicit [grid], [model], [pulse], [run] and [initial] blocks".into(),
            });
            None
        }
        (Some(name), true) => parse_preset(name, section("params"), &mut violations),
        (None, false) => {
            if sections.contains_key("params") {
                violations.push(Violation {
                    line: None,
                    key: "[params]".into(),
                    message: "preset parameters need a preset".into(),
                });
            }
            parse_custom(&sections, &mut violations).map(Experiment::Custom)
        }
    };

    let fit_window = parse_fit(section("fit"), &mut violations);

    if !violations.is_empty() {
        return Err(ConfigError(violations));
    }
    let experiment = experiment.expect("no violations implies a parsed experiment");
    let default_out = match &experiment {
        Experiment::Preset { preset, .. } => format!("runs/{}", preset.name()),
        Experiment::Custom(_) => "runs/custom".to_string(),
    };
    Ok(ExperimentConfig {
        experiment,
        out: PathBuf::from(out.unwrap_or(default_out)),
        seed: seed.expect("checked"),
        fit_window: fit_window.expect("checked"),
    })
}

fn parse_preset(
    name: &str,
    params: Option<&BTreeMap<String, Entry>>,
    violations: &mut Vec<Violation>,
) -> Option<Experiment> {
    let Some(preset) = Preset::from_name(name) else {
        violations.push(Violation {
            line: None,
            key: "preset".into(),
            message: format!(
                "unknown preset `{name}`; known: {}",
                Preset::ALL.map(|p| p.name()).join(", ")
            ),
        });
        return None;
    };
    let specs = preset.parameters();
    let mut values = preset.defaults();
    let mut ok = true;
    if let Some(entries) = params {
        for (key, entry) in entries {
            let Some(spec) = specs.iter().find(|s| s.key == key) else {
                violations.push(Violation {
                    line: Some(entry.line),
                    key: format!("params.{key}"),
                    message: format!("unknown parameter for preset {}", preset.name()),
                });
                ok = false;
                continue;
            };
            let mut reader = Reader {
                section: "params",
                entries: Some(entries),
                violations,
            };
            match reader.float(key, None, spec.min, spec.max) {
                Some(v) if spec.integer && v.fract() != 0.0 => {
                    reader.fail(key, Some(entry.line), format!("{v} must be an integer"));
                    ok = false;
                }
                Some(v) => {
                    values.insert(key.clone(), v);
                }
                None => ok = false,
            }
        }
    }
    if let Err(message) = preset.check_params(&values) {
        violations.push(Violation {
            line: None,
            key: "params".into(),
            message,
        });
        ok = false;
    }
    ok.then_some(Experiment::Preset {
        preset,
        params: values,
    })
}

fn parse_surface(r: &mut Reader<'_>, which: &str, default_kind: &'static str) -> Option<SurfaceBlock> {
    let kind = r.choice(which, default_kind, &["harmonic", "linear", "constant"])?;
    let offset_key = format!("{which}_offset");
    let slope_key = format!("{which}_slope");
    match kind {
        "harmonic" => {
            for key in [&offset_key, &slope_key] {
                if let Some(e) = r.raw(key).cloned() {
                    r.fail(key, Some(e.line), "not used by a harmonic surface".into());
                }
            }
            Some(SurfaceBlock::Harmonic)
        }
        "constant" => {
            let offset = r.float(&offset_key, Some(0.0), f64::MIN, f64::MAX);
            if let Some(e) = r.raw(&slope_key).cloned() {
                r.fail(&slope_key, Some(e.line), "not used by a constant surface".into());
            }
            Some(SurfaceBlock::Linear {
                offset: offset?,
                slope: 0.0,
            })
        }
        _ => {
            let offset = r.float(&offset_key, Some(0.0), f64::MIN, f64::MAX);
            let slope = r.float(&slope_key, None, f64::MIN, f64::MAX);
            Some(SurfaceBlock::Linear {
                offset: offset?,
                slope: slope?,
            })
        }
    }
}

fn parse_custom(
    sections: &BTreeMap<String, BTreeMap<String, Entry>>,
    violations: &mut Vec<Violation>,
) -> Option<CustomSpec> {
    for required in ["grid", "model", "pulse", "run", "initial"] {
        if !sections.contains_key(required) {
            violations.push(Violation {
                line: None,
                key: format!("[{required}]"),
                message: "missing required block".into(),
            });
        }
    }

    let mut r = Reader {
        section: "grid",
        entries: sections.get("grid"),
        violations,
    };
    let x_min = r.float("x_min", None, f64::MIN, f64::MAX);
    let x_max = r.float("x_max", None, f64::MIN, f64::MAX);
    let n_points = r.integer("n_points", None, 64, 1 << 22);
    if let Some(n) = n_points {
        if !n.is_power_of_two() {
            let line = r.raw("n_points").map(|e| e.line);
            r.fail("n_points", line, format!("{n} must be a power of two"));
        }
    }
    if let (Some(a), Some(b)) = (x_min, x_max) {
        if b <= a {
            r.fail("x_max", r.raw("x_max").map(|e| e.line), format!("{b} must exceed x_min = {a}"));
        }
    }
    let grid = match (x_min, x_max, n_points) {
        (Some(x_min), Some(x_max), Some(n)) if x_max > x_min && n.is_power_of_two() => Some(GridBlock {
            x_min,
            x_max,
            n_points: n as usize,
        }),
        _ => None,
    };

    let mut r = Reader {
        section: "model",
        entries: sections.get("model"),
        violations,
    };
    let u1 = parse_surface(&mut r, "u1", "harmonic");
    let u2 = parse_surface(&mut r, "u2", "linear");

    let mut r = Reader {
        section: "pulse",
        entries: sections.get("pulse"),
        violations,
    };
    let envelope = r.choice("envelope", "constant", &["constant", "gaussian"]);
    let v0 = r.float("v0", None, 0.0, f64::MAX);
    let gaussian = envelope == Some("gaussian");
    let t_center = r.float("t_center", Some(0.0), f64::MIN, f64::MAX);
    let t_width = if gaussian {
        r.positive("t_width", None)
    } else {
        r.positive("t_width", Some(1.0))
    };
    let chirp_rate = r.float("chirp_rate", Some(0.0), f64::MIN, f64::MAX);

    let mut r = Reader {
        section: "run",
        entries: sections.get("run"),
        violations,
    };
    let dt = r.positive("dt", None);
    let t_final = r.positive("t_final", None);
    if let (Some(dt), Some(tf)) = (dt, t_final) {
        if tf < dt {
            r.fail("t_final", r.raw("t_final").map(|e| e.line), format!("{tf} must be at least dt = {dt}"));
        }
    }
    let absorber = r.choice("absorber", "mask", &["mask", "none"]);
    let mask_width = r.positive("mask_width", Some(6.0));
    let mask_strength = r.positive("mask_strength", Some(1.0));
    let record_every = r.integer("record_every", Some(10), 1, u64::MAX);
    let snapshot_every = r.integer("snapshot_every", Some(0), 0, u64::MAX);
    if let (Some(g), Some("mask"), Some(w)) = (&grid, absorber, mask_width) {
        let half = 0.5 * (g.x_max - g.x_min);
        if w >= half {
            r.fail("mask_width", r.raw("mask_width").map(|e| e.line), format!("{w} must be below half the grid extent {half}"));
        }
    }

    let mut r = Reader {
        section: "initial",
        entries: sections.get("initial"),
        violations,
    };
    let initial = match r.choice("kind", "ground", &["ground", "packet"]) {
        Some("ground") => Some(InitialBlock::Ground),
        Some(_) => {
            let channel = r.integer("channel", Some(1), 1, 2);
            let x0 = r.float("x0", Some(0.0), f64::MIN, f64::MAX);
            let k0 = r.float("k0", Some(0.0), f64::MIN, f64::MAX);
            let sigma = r.positive("sigma", Some(1.0));
            match (channel, x0, k0, sigma) {
                (Some(c), Some(x0), Some(k0), Some(sigma)) => Some(InitialBlock::Packet {
                    channel: c as u8,
                    x0,
                    k0,
                    sigma,
                }),
                _ => None,
            }
        }
        None => None,
    };

    let mcwf = if sections.contains_key("mcwf") {
        let mut r = Reader {
            section: "mcwf",
            entries: sections.get("mcwf"),
            violations,
        };
        let gamma_sp = r.float("gamma_sp", None, 0.0, f64::MAX);
        let n = r.integer("n_trajectories", Some(200), 2, 1_000_000);
        match (gamma_sp, n) {
            (Some(gamma_sp), Some(n)) => Some(Some(McwfBlock {
                gamma_sp,
                n_trajectories: n as usize,
            })),
            _ => None,
        }
    } else {
        Some(None)
    };

    let pulse = match (envelope, v0, t_center, t_width, chirp_rate) {
        (Some(envelope), Some(v0), Some(t_center), Some(t_width), Some(chirp_rate)) => Some(PulseBlock {
            envelope,
            v0,
            t_center,
            t_width,
            chirp_rate,
        }),
        _ => None,
    };
    let run = match (dt, t_final, absorber, mask_width, mask_strength, record_every, snapshot_every) {
        (Some(dt), Some(t_final), Some(absorber), Some(w), Some(s), Some(rec), Some(snap)) if t_final >= dt => Some(RunBlock {
            dt,
            t_final,
            mask_width: if absorber == "mask" { w } else { 0.0 },
            mask_strength: s,
            record_every: rec as usize,
            snapshot_every: snap as usize,
        }),
        _ => None,
    };
    Some(CustomSpec {
        grid: grid?,
        model: ModelBlock { u1: u1?, u2: u2? },
        pulse: pulse?,
        run: run?,
        initial: initial?,
        mcwf: mcwf?,
    })
}

fn parse_fit(entries: Option<&BTreeMap<String, Entry>>, violations: &mut Vec<Violation>) -> Option<WindowPolicy> {
    let mut r = Reader {
        section: "fit",
        entries,
        violations,
    };
    let has_band = r.raw("window_lo").is_some() || r.raw("window_hi").is_some();
    let has_time = r.raw("t_lo").is_some() || r.raw("t_hi").is_some();
    if has_band && has_time {
        r.fail("t_lo", None, "choose either a population band or a time range".into());
        return None;
    }
    if has_time {
        let lo = r.float("t_lo", None, 0.0, f64::MAX)?;
        let hi = r.float("t_hi", None, 0.0, f64::MAX)?;
        if hi <= lo {
            r.fail("t_hi", r.raw("t_hi").map(|e| e.line), format!("{hi} must exceed t_lo = {lo}"));
            return None;
        }
        return Some(WindowPolicy::TimeRange { t_lo: lo, t_hi: hi });
    }
    let lo = r.float("window_lo", Some(0.1), 0.0, 1.0);
    let hi = r.float("window_hi", Some(0.8), 0.0, 1.0);
    let (lo, hi) = (lo?, hi?);
    if hi <= lo {
        r.fail("window_hi", r.raw("window_hi").map(|e| e.line), format!("{hi} must exceed window_lo = {lo}"));
        return None;
    }
    Some(WindowPolicy::PopulationBand { lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_preset_is_fully_defaulted() {
        let cfg = parse_config("preset = decay_weak\n").unwrap();
        assert_eq!(cfg, ExperimentConfig::preset(Preset::DecayWeak));
        assert_eq!(cfg.seed, DEFAULT_SEED);
        let Experiment::Preset { params, .. } = &cfg.experiment else {
            panic!()
        };
        assert_eq!(params["gamma"], 0.26);
        assert_eq!(params["alpha"], 2.0);
    }

    #[test]
    fn negative_dt_names_the_key() {
        let text = "preset = decay_weak\n[params]\ndt = -0.1\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.mentions("params.dt"), "{err}");

        let text = "[grid]\nx_min=-10\nx_max=10\nn_points=128\n[model]\nu2_slope=1\n[pulse]\nv0=0.1\n[run]\ndt = -0.1\nt_final=1\n[initial]\nkind=ground\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.mentions("run.dt"), "{err}");
    }

    #[test]
    fn preset_and_blocks_are_exclusive() {
        let err = parse_config("preset = decay_weak\n[params]\ndt = -1\n[grid]\nx_min = -5\n").unwrap_err();
        assert!(err.0.iter().any(|v| v.key == "preset" && v.message.contains("cannot be combined")));
        assert!(err.mentions("params.dt"));
    }

    #[test]
    fn all_violations_are_reported() {
        let text = "preset = decay_weak\nbogus = 1\n[params]\ngamma = -1\nalpha = x\nnope = 2\n[fit]\nwindow_lo = 0.9\nwindow_hi = 0.2\n";
        let err = parse_config(text).unwrap_err();
        for key in ["bogus", "params.gamma", "params.alpha", "params.nope", "fit.window_hi"] {
            assert!(err.mentions(key), "{key} missing from {err}");
        }
    }

    #[test]
    fn unknown_sections_and_case() {
        let err = parse_config("preset = decay_weak\n[extra]\nx = 1\nSeed = 3\n").unwrap_err();
        assert!(err.mentions("[extra]"));
        assert!(err.mentions("Seed"));
    }

    #[test]
    fn custom_blocks_parse() {
        let text = "\
out = /tmp/x
seed = 5
[grid]
x_min = -20
x_max = 20
n_points = 256
[model]
u1 = constant
u2 = constant
[pulse]
v0 = 0.5
[run]
dt = 0.01
t_final = 1
absorber = none
[initial]
kind = packet
channel = 2
sigma = 1.5
[mcwf]
gamma_sp = 1
n_trajectories = 10
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.seed, 5);
        let Experiment::Custom(c) = cfg.experiment else {
            panic!()
        };
        assert_eq!(c.run.mask_width, 0.0);
        assert_eq!(c.mcwf.unwrap().n_trajectories, 10);
        assert!(matches!(c.initial, InitialBlock::Packet { channel: 2, .. }));
    }

    #[test]
    fn grid_must_be_power_of_two() {
        let text = "[grid]\nx_min=-10\nx_max=10\nn_points=100\n[model]\nu2_slope=1\n[pulse]\nv0=0.1\n[run]\ndt=0.1\nt_final=1\n[initial]\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.mentions("grid.n_points"));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = parse_config("preset = lz_sweep\n").unwrap();
        let b = parse_config("preset = lz_sweep\n# comment\n").unwrap();
        let c = parse_config("preset = lz_sweep\nseed = 9\n").unwrap();
        let d = parse_config("preset = lz_sweep\nout = elsewhere\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash(), d.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }
}
