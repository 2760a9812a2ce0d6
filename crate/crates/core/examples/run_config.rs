//! Drive the command layer from code: build a configuration with overrides,
//! run a command and list the files it wrote.
//!
//!     cargo run --example run_config -- oracle /tmp/ghz-out

use ghz_lattice::driver::{self, parse_override, Command, RunConfig};

fn main() -> ghz_lattice::Result<()> {
    let mut args = std::env::args().skip(1);
    let command = match args.next().as_deref().unwrap_or("oracle") {
        "ground" => Command::Ground,
        "ramp" => Command::Ramp,
        "sweep" => Command::Sweep,
        "phase-diagram" => Command::PhaseDiagram,
        "band-table" => Command::BandTable,
        "oracle" => Command::Oracle,
        "audit" => Command::Audit,
        other => panic!("unknown command {other}"),
    };
    let output = args.next().unwrap_or_else(|| "out".into());
    let overrides = [
        parse_override(&format!("output={output}"))?,
        parse_override("N=4")?,
        parse_override("M=4")?,
        parse_override("tau=2000")?,
        parse_override("sweep.tau_grid=[500,2000]")?,
        parse_override("audit.samples=2000")?,
    ];
    let config = RunConfig::load(None, &overrides)?;
    let outcome = driver::run(command, &config)?;
    println!("{}: passed={}", command.name(), outcome.passed);
    for f in &outcome.files {
        println!("  {}", f.display());
    }
    Ok(())
}
