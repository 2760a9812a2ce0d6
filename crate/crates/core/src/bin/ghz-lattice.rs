use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use ghz_lattice::driver::{self, parse_override, Command, RunConfig};
use ghz_lattice::Error;

/// Thread count for sweeps, audits and table builds.
const THREADS_VAR: &str = "GHZ_LATTICE_THREADS";

#[derive(Parser)]
#[command(name = "ghz-lattice", version, about = "Two-species Bose-Hubbard ramps and entanglement checks")]
struct Cli {
    /// JSON run configuration; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration field, e.g. `--set sweep.tau_grid=[1000,5000]`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(short = 'N', long = "particles", global = true)]
    particles: Option<usize>,
    #[arg(short = 'M', long = "sites", global = true)]
    sites: Option<usize>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ground state metrics at one lattice depth.
    Ground,
    /// Ground state, π/2 pulse and one lattice ramp.
    Ramp,
    /// Independent ramps over `sweep.tau_grid`.
    Sweep,
    /// Condensate fraction and number variance over filling and J/U.
    PhaseDiagram,
    /// Hubbard parameters against lattice depth.
    BandTable,
    /// Two-particle closed form against the integrator.
    Oracle,
    /// Separability, maximum-correlator, oracle and phase-state checks.
    Audit {
        /// Force the named check (or every check with this prefix) to fail.
        #[arg(long)]
        inject_fault: Option<String>,
    },
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("cannot configure {n} threads: {e}"))
}

fn overrides(cli: &Cli) -> Result<Vec<(String, Value)>, Error> {
    let mut out = cli
        .overrides
        .iter()
        .map(|s| parse_override(s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut flag = |k: &str, v: Option<Value>| {
        if let Some(v) = v {
            out.push((k.to_string(), v));
        }
    };
    flag("output", cli.output.as_ref().map(|p| Value::from(p.display().to_string())));
    flag("seed", cli.seed.map(Value::from));
    flag("N", cli.particles.map(Value::from));
    flag("M", cli.sites.map(Value::from));
    flag("tau", cli.tau.map(Value::from));
    flag("dt", cli.dt.map(Value::from));
    if let Cmd::Audit {
        inject_fault: Some(f),
    } = &cli.command
    {
        out.push(("audit.inject_fault".into(), Value::from(f.clone())));
    }
    Ok(out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let command = match cli.command {
        Cmd::Ground => Command::Ground,
        Cmd::Ramp => Command::Ramp,
        Cmd::Sweep => Command::Sweep,
        Cmd::PhaseDiagram => Command::PhaseDiagram,
        Cmd::BandTable => Command::BandTable,
        Cmd::Oracle => Command::Oracle,
        Cmd::Audit { .. } => Command::Audit,
    };
    let result = overrides(&cli)
        .and_then(|o| RunConfig::load(cli.config.as_deref(), &o))
        .and_then(|config| driver::run(command, &config));
    match result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                for f in &outcome.failures {
                    eprintln!("failed: {f}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
