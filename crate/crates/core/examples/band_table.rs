//! Hubbard parameters from the Bloch-band / Wannier pipeline against the
//! deep-lattice Gaussian estimates.
//!
//!     cargo run --example band_table -- 3 40 8

use ghz_lattice::band::{band_diagnostics, lattice_params, BandSettings, InteractionScenario, LatticeGeometry};

fn main() -> ghz_lattice::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<f64>().expect("numeric argument"));
    let v_min = args.next().unwrap_or(3.0);
    let v_max = args.next().unwrap_or(40.0);
    let points = args.next().unwrap_or(8.0) as usize;

    let geometry = LatticeGeometry::default();
    let settings = BandSettings::default();
    println!(
        "{:>6} {:>11} {:>9} {:>9} {:>11} {:>10} {:>10} {:>9}",
        "V0", "J", "J/Jgauss", "J2/J", "U_AA", "U/Ugauss", "U0001/U", "resid"
    );
    for k in 0..points {
        let v0 = v_min + (v_max - v_min) * k as f64 / (points.max(2) - 1) as f64;
        let d = band_diagnostics(v0, &geometry, settings)?;
        println!(
            "{:>6.2} {:>11.4e} {:>9.4} {:>9.5} {:>11.4e} {:>10.4} {:>10.4} {:>9.1e}",
            v0,
            d.j1,
            d.j1 / d.j_gauss,
            d.j2 / d.j1,
            d.u0000,
            d.u0000 / d.u_gauss,
            d.u0001 / d.u0000,
            d.reconstruction_residual
        );
    }

    let p = lattice_params(10.0, &geometry, InteractionScenario::default(), settings)?;
    println!("V0=10: J={:.5} U_AA={:.5} U_AB={:.5} U/J={:.2}", p.j, p.u_aa, p.u_ab, p.u_aa / p.j);
    Ok(())
}
