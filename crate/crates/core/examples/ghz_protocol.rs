//! The full protocol: ground state at V_i, π/2 pulse, linear ramp to V_f, then
//! the correlator and the decomposition of the final state.
//!
//!     cargo run --release --example ghz_protocol -- 4 5000
//!     cargo run --release --example ghz_protocol -- 6 19100

use ghz_lattice::protocol::{Protocol, ProtocolSpec};

fn main() -> ghz_lattice::Result<()> {
    let mut args = std::env::args().skip(1);
    let size: usize = args.next().map_or(4, |s| s.parse().expect("N = M"));
    let tau: f64 = args.next().map_or(5000.0, |s| s.parse().expect("tau"));

    let spec = ProtocolSpec {
        particles: size,
        sites: size,
        ..ProtocolSpec::default()
    };
    let protocol = Protocol::prepare(spec)?;
    println!(
        "N=M={size}: dim {}, ground energy {:.8}, initial |C|^2 {:.3e}",
        protocol.basis.dim(),
        protocol.ground.energy,
        ghz_lattice::observables::correlator(&protocol.initial, &spec.direction)?.modulus_sq
    );

    let run = protocol.run(tau)?;
    let log = &run.outcome.log;
    let c2 = log.column("C2").expect("protocol log has C2");
    let stride = (c2.len() / 10).max(1);
    println!("{:>10} {:>7} {:>12}", "t", "V0", "|C|^2");
    let mut rows: Vec<usize> = (0..c2.len()).step_by(stride).collect();
    if rows.last() != Some(&(c2.len() - 1)) {
        rows.push(c2.len() - 1);
    }
    for i in rows {
        println!("{:>10.1} {:>7.2} {:>12.5e}", log.times[i], log.depths[i], c2[i]);
    }
    println!(
        "bound {:.3e}; final {:.5}; max {:.5} at t={:.0}; first above bound {:?}",
        run.bound, run.final_c2, run.max_c2, run.max_c2_time, run.first_bound_break
    );
    if let Some(d) = &run.decomposition {
        println!("decomposition residual {:.2e}", d.residual);
        for e in &d.entries {
            println!("  c{}{}  |c|={:.5}  phase={:.4}", e.n_a, e.n_b, e.magnitude, e.phase);
        }
    }
    println!(
        "norm drift {:.1e}, number drift {:.1e}, {} steps",
        run.outcome.max_norm_drift, run.outcome.max_number_drift, run.outcome.steps
    );
    Ok(())
}
