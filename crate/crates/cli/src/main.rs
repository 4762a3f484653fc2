use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bohmtrans::experiments::{builtin_names, fmt_f, run_builtin, run_scenario, PotentialSpec, ScenarioSpec};
use bohmtrans::spectral::{resonance_search, transmission_spectrum, uniform_energies};
use bohmtrans::{Error, Result};
use clap::{Parser, Subcommand};

/// Bohmian quantum-transport simulator for a resonant tunnelling diode in a cavity.
#[derive(Debug, Parser)]
#[command(name = "bohmtrans", version)]
struct Cli {
    /// Override the ensemble seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transmission spectrum T(E), R(E) and the resonances of a device.
    Spectrum {
        /// Scenario file supplying the potential (default: the RTD).
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 0.002)]
        e_min: f64,
        #[arg(long, default_value_t = 0.5)]
        e_max: f64,
        #[arg(long, default_value_t = 1000)]
        points: usize,
    },
    /// Run a scenario file.
    Run { scenario: PathBuf },
    /// Run a built-in figure scenario.
    Builtin { name: String },
    /// Parse and validate a scenario file without running it.
    Validate { scenario: PathBuf },
}

fn load(path: &Path) -> Result<ScenarioSpec> {
    let text = fs::read_to_string(path)?;
    ScenarioSpec::parse(&text)
}

fn spectrum(cli: &Cli, scenario: Option<&Path>, e_min: f64, e_max: f64, points: usize) -> Result<()> {
    let spec = match scenario {
        Some(p) => load(p)?,
        None => ScenarioSpec::default(),
    };
    if points < 2 || !(e_max > e_min && e_min > 0.0) {
        return Err(Error::InvalidKey {
            key: "--e-min/--e-max/--points".into(),
            message: "need 0 < e_min < e_max and at least 2 points".into(),
        });
    }
    let k = spec.constants()?;
    let v = spec.potential_profile()?;
    let pts = transmission_spectrum(&v, &k, &uniform_energies(e_min, e_max, points))?;
    let resonances = match spec.potential {
        PotentialSpec::DoubleBarrier { barrier_height, .. } => resonance_search(&v, &k, (0.0, barrier_height), 1e-6)?,
        PotentialSpec::Flat { .. } => Vec::new(),
    };
    let mut csv = String::from("E_eV,T,R\n");
    for p in &pts {
        csv.push_str(&format!("{},{},{}\n", fmt_f(p.energy), fmt_f(p.transmission), fmt_f(p.reflection)));
    }
    match &cli.out_dir {
        Some(d) => {
            fs::create_dir_all(d)?;
            fs::write(d.join("spectrum.csv"), csv)?;
        }
        None => print!("{csv}"),
    }
    for (i, e) in resonances.iter().enumerate() {
        eprintln!("resonance E{} = {} eV", i + 1, fmt_f(*e));
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Spectrum {
            scenario,
            e_min,
            e_max,
            points,
        } => spectrum(cli, scenario.as_deref(), *e_min, *e_max, *points).map_err(|e| e.in_stage("spectrum")),
        Command::Validate { scenario } => {
            let spec = load(scenario).map_err(|e| e.in_stage("validate"))?;
            spec.potential_profile().map_err(|e| e.in_stage("validate"))?;
            eprintln!("{}: ok", scenario.display());
            Ok(())
        }
        Command::Run { scenario } => {
            let mut spec = load(scenario).map_err(|e| e.in_stage("parse"))?;
            if let Some(s) = cli.seed {
                spec.run.seed = s;
            }
            let dir = cli.out_dir.clone().or(spec.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
            let o = run_scenario(&spec, Some(&dir))?;
            eprintln!(
                "{}: {} steps, KS max {} (bound {}), output in {}",
                o.name,
                o.steps,
                fmt_f(o.ks_max()),
                fmt_f(o.ks_bound()),
                dir.display()
            );
            Ok(())
        }
        Command::Builtin { name } => {
            if !builtin_names().contains(&name.as_str()) {
                return Err(Error::InvalidKey {
                    key: name.clone(),
                    message: format!("unknown built-in; expected one of {}", builtin_names().join(", ")),
                });
            }
            let dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(name));
            let o = run_builtin(name, Some(&dir), cli.seed)?;
            for (k, v) in &o.metrics {
                eprintln!("{k} = {}", fmt_f(*v));
            }
            eprintln!("output in {}", dir.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
