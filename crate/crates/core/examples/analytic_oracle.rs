//! Two particles on two sites: the closed-form coefficients against RK4 on the
//! full ten-state sector, plus the observed convergence order.
//!
//!     cargo run --example analytic_oracle -- 1.0 0.5 0.475

use ghz_lattice::oracle::{analytic_state, oracle_vs_numeric, richardson_order, OracleParams, REFERENCE_STATES};

fn main() -> ghz_lattice::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<f64>().expect("numeric argument"));
    let p = OracleParams {
        j: args.next().unwrap_or(1.0),
        u_aa: args.next().unwrap_or(0.5),
        u_ab: args.next().unwrap_or(0.475),
    };
    p.validate()?;

    println!("closed form at t = 1:");
    for (w, (c, occ)) in analytic_state(1.0, &p).c.iter().zip(REFERENCE_STATES).enumerate() {
        println!("  c{:<2} {:?}  {:+.8} {:+.8}i", w + 1, occ, c.re, c.im);
    }

    let cmp = oracle_vs_numeric(&p, 1e-3, 5.0, 100)?;
    println!(
        "RK4 dt=1e-3, t<=5: max deviation {:.3e} (c{} at t={:.2})",
        cmp.max_deviation, cmp.worst_index, cmp.worst_time
    );
    println!("Richardson order: {:.4}", richardson_order(&p, 0.02, 5.0)?);
    Ok(())
}
