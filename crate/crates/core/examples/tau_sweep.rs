//! Final correlator and phases over a grid of ramp times. One prepared
//! protocol is shared by all ramps; ramps run in parallel.
//!
//!     cargo run --release --example tau_sweep -- 4 500 1000 2000 5000 10000

use rayon::prelude::*;

use ghz_lattice::protocol::{Protocol, ProtocolSpec};

fn main() -> ghz_lattice::Result<()> {
    let mut args = std::env::args().skip(1);
    let size: usize = args.next().map_or(4, |s| s.parse().expect("N = M"));
    let mut taus: Vec<f64> = args.map(|s| s.parse().expect("tau")).collect();
    if taus.is_empty() {
        taus = vec![500.0, 1000.0, 2000.0, 5000.0, 10000.0];
    }

    let mut spec = ProtocolSpec {
        particles: size,
        sites: size,
        ..ProtocolSpec::default()
    };
    spec.ramp.cadence = 1000;
    let protocol = Protocol::prepare(spec)?;
    let runs = taus
        .par_iter()
        .map(|&tau| protocol.run(tau))
        .collect::<ghz_lattice::Result<Vec<_>>>()?;

    println!("bound 2^-{} = {:.4e}", 2 * size, runs[0].bound);
    println!("{:>8} {:>12} {:>6}  phases", "tau", "C2_final", "above");
    for r in &runs {
        let phases: Vec<String> = r
            .decomposition
            .iter()
            .flat_map(|d| d.entries.iter().skip(1))
            .map(|e| format!("phi{}{}={:.3}", e.n_a, e.n_b, e.phase))
            .collect();
        println!(
            "{:>8.0} {:>12.5e} {:>6}  {}",
            r.tau,
            r.final_c2,
            r.final_c2 > r.bound,
            phases.join(" ")
        );
    }
    Ok(())
}
