use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use wavepacket_cli::config::{parse_config, Experiment, ExperimentConfig};
use wavepacket_cli::presets::{Params, Preset, LZ_COUPLINGS, SCAN_RATES};
use wavepacket_cli::run::decay_rates;
use wavepacket_cli::{run_experiment, verify_dir, Mismatch};
use wavepacket_core::analytic::{condon_factor, coupling_for_rate, CondonMethod};
use wavepacket_core::lz_probability;

/// Two-channel wave packet experiments under laser coupling.
///
/// The thread count of parallel legs follows RAYON_NUM_THREADS. Results
/// do not depend on it.
#[derive(Parser)]
#[command(name = "wavepacket", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its outputs and manifest.
    Run {
        #[command(flatten)]
        source: Source,
        /// Output directory; overrides `out` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base seed; overrides `seed` in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Re-hash every written file against the manifest afterwards.
        #[arg(long)]
        verify: bool,
    },
    /// Check the files in an output directory against its manifest.
    Verify {
        #[arg(long)]
        out: PathBuf,
    },
    /// List presets with their parameters.
    Presets,
    /// Print closed-form quantities for a configuration.
    Analytic {
        #[command(flatten)]
        source: Source,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset name, with default parameters.
    #[arg(long)]
    preset: Option<String>,
}

fn load(source: &Source) -> Result<ExperimentConfig, String> {
    if let Some(path) = &source.config {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        return parse_config(&text).map_err(|e| format!("{}: {e}", path.display()));
    }
    let name = source.preset.as_deref().unwrap_or_default();
    parse_config(&format!("preset = {name}\n")).map_err(|e| e.to_string())
}

fn report_verify(out: &std::path::Path) -> ExitCode {
    match verify_dir(out) {
        Ok(problems) if problems.is_empty() => {
            println!("verify: all files match {}", out.join("manifest.json").display());
            ExitCode::SUCCESS
        }
        Ok(problems) => {
            for p in problems {
                match p {
                    Mismatch::Missing(f) => eprintln!("verify: missing {f}"),
                    Mismatch::Changed(f) => eprintln!("verify: checksum mismatch {f}"),
                }
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("verify: {e}");
            ExitCode::from(3)
        }
    }
}

fn analytic(cfg: &ExperimentConfig) -> Result<Value, wavepacket_core::Error> {
    let Experiment::Preset { preset, params } = &cfg.experiment else {
        return Ok(json!({"note": "closed-form quantities are tabulated for presets only"}));
    };
    let p = Params(params);
    let decay = |gamma: f64, alpha: f64| -> Result<Value, wavepacket_core::Error> {
        let v = coupling_for_rate(gamma, alpha)?;
        let (reflection, quadrature) = decay_rates(v, alpha)?;
        Ok(json!({
            "gamma_target": gamma,
            "alpha": alpha,
            "v": v,
            "gamma_reflection": reflection,
            "gamma_quadrature": quadrature,
            "condon_reflection": condon_factor(alpha, CondonMethod::Reflection)?.magnitude_sq,
            "condon_quadrature": condon_factor(alpha, CondonMethod::Quadrature)?.magnitude_sq,
        }))
    };
    Ok(match preset {
        Preset::DecayWeak | Preset::DecayStrong => decay(p.get("gamma"), p.get("alpha"))?,
        Preset::RegimeScan => Value::Array(
            SCAN_RATES
                .iter()
                .map(|&g| decay(g, p.get("alpha")))
                .collect::<Result<_, _>>()?,
        ),
        Preset::LzSweep => {
            let velocity = 2.0 * p.get("k0");
            let rows: Vec<Value> = LZ_COUPLINGS
                .iter()
                .map(|&v| {
                    lz_probability(v, p.get("slope_difference"), velocity)
                        .map(|lz| json!({"v": v, "transfer": lz.transfer, "survival": lz.survival}))
                })
                .collect::<Result<_, _>>()?;
            json!({"velocity": velocity, "landau_zener": rows})
        }
        Preset::Rabi => json!({"v": p.get("v"), "period": std::f64::consts::PI / p.get("v")}),
        Preset::FreezeDemo => json!({
            "v_strong": p.get("v_strong"),
            "v_weak": p.get("v_strong") / p.get("weak_ratio"),
            "interval": std::f64::consts::PI / p.get("v_strong"),
        }),
        _ => {
            let alpha = p.get("alpha");
            json!({
                "alpha": alpha,
                "condon_reflection": condon_factor(alpha, CondonMethod::Reflection)?.magnitude_sq,
                "condon_quadrature": condon_factor(alpha, CondonMethod::Quadrature)?.magnitude_sq,
            })
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Presets => {
            for preset in Preset::ALL {
                println!("{} ({})", preset.name(), preset.runtime());
                println!("    {}", preset.description());
                for s in preset.parameters() {
                    println!("    {:<18} {:>12}  {}", s.key, s.default, s.doc);
                }
                println!();
            }
            ExitCode::SUCCESS
        }
        Command::Verify { out } => report_verify(&out),
        Command::Analytic { source } => {
            let cfg = match load(&source) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            };
            match analytic(&cfg) {
                Ok(v) => {
                    println!("{}", serde_json::to_string_pretty(&v).expect("json"));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(3)
                }
            }
        }
        Command::Run {
            source,
            out,
            seed,
            verify,
        } => {
            let mut cfg = match load(&source) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(out) = out {
                cfg.out = out;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let manifest = match run_experiment(&cfg) {
                Ok(m) => m,
                Err(e) => {
                    eprintln!("run failed: {e}");
                    return ExitCode::from(3);
                }
            };
            for c in &manifest.checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!(
                "{} files written to {} in {:.1} s",
                manifest.files.len() + 1,
                cfg.out.display(),
                manifest.wall_clock_seconds
            );
            if verify {
                let code = report_verify(&cfg.out);
                if code != ExitCode::SUCCESS {
                    return code;
                }
            }
            if manifest.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
