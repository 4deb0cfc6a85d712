use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use rtnsim::experiment::{exit_code, preset, preset_names, run_experiment, Engine, ExperimentConfig, PhaseScanConfig, ToleranceTier};
use rtnsim::phase::{phase_scan, write_phase_csv};
use rtnsim::Error;

const TOLERANCE_VIOLATION: u8 = 3;

#[derive(Parser)]
#[command(name = "rtnsim", version, about = "Two-qubit entanglement under random telegraph noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a built-in figure preset.
    Preset {
        name: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Classify a (g/gamma, theta) grid into revival and single-death regions.
    PhaseScan {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in presets.
    ListPresets,
}

#[derive(Args)]
struct Overrides {
    /// Comma-separated subset of analytic, quasi_hamiltonian, monte_carlo.
    #[arg(long, value_delimiter = ',')]
    engines: Option<Vec<String>>,
    /// Monte Carlo runs; the tolerance becomes 4/sqrt(runs).
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// full (40000 runs, 0.02) or smoke (4000 runs, 0.07).
    #[arg(long)]
    tolerance_tier: Option<String>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<(), Error> {
        if let Some(list) = &self.engines {
            cfg.engines.list = list.iter().map(|s| s.trim().parse::<Engine>()).collect::<Result<_, _>>()?;
        }
        if let Some(tier) = &self.tolerance_tier {
            cfg.engines.tier = tier.parse::<ToleranceTier>()?;
        }
        if self.runs.is_some() {
            cfg.engines.runs = self.runs;
        }
        if let Some(seed) = self.seed {
            cfg.engines.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        cfg.validate()
    }
}

/// Runs each configuration; true when every declared tolerance holds.
fn run_all(configs: Vec<ExperimentConfig>) -> Result<bool, Error> {
    let mut ok = true;
    for cfg in configs {
        let report = run_experiment(&cfg)?;
        for c in &report.comparisons {
            if c.tolerance.is_finite() {
                let verdict = if c.pass() { "ok" } else { "VIOLATED" };
                println!(
                    "{} {} vs {} {}: max dev {:.3e} (tolerance {:.3e}) {verdict}",
                    report.name, c.engine_a, c.engine_b, c.quantity, c.max_abs_dev, c.tolerance
                );
            }
        }
        for path in report.write(&cfg.output.dir)? {
            info!("wrote {}", path.display());
        }
        ok &= report.passed();
    }
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Run { config, overrides } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            overrides.apply(&mut cfg)?;
            run_all(vec![cfg])
        }
        Command::Preset { name, overrides } => {
            let mut panels = preset(&name)?.panels;
            for p in &mut panels {
                overrides.apply(p)?;
            }
            run_all(panels)
        }
        Command::PhaseScan { config, out } => {
            let mut cfg = PhaseScanConfig::from_file(&config)?;
            if let Some(dir) = out {
                cfg.output.dir = dir;
            }
            let points = phase_scan(&cfg.spec()?)?;
            std::fs::create_dir_all(&cfg.output.dir)?;
            let path = cfg.output.dir.join(format!("{}_phase.csv", cfg.output.name));
            let mut w = BufWriter::new(File::create(&path)?);
            write_phase_csv(&points, &mut w)?;
            w.flush()?;
            let bad = points.iter().filter(|p| !p.region.agrees_with_boundary()).count();
            println!("{} points, {bad} disagree with g/gamma = sec(theta) outside the band", points.len());
            info!("wrote {}", path.display());
            Ok(bad == 0)
        }
        Command::ListPresets => {
            for name in preset_names() {
                let p = preset(name)?;
                println!("{name:6}  {}", p.description);
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(TOLERANCE_VIOLATION),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
