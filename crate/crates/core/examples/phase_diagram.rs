//! Mott-lobe / superfluid structure on a small ring: condensate fraction and
//! on-site variance of the single-species ground state over filling and J/U.
//!
//!     cargo run --release --example phase_diagram -- 5

use std::sync::Arc;

use ghz_lattice::driver::commands::phase_diagram_cell;
use ghz_lattice::fock::FockBasis;
use ghz_lattice::hamiltonian::{Boundary, HamiltonianParts};

fn main() -> ghz_lattice::Result<()> {
    let m: usize = std::env::args().nth(1).map_or(5, |s| s.parse().expect("M"));
    let ratios = [0.01, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0];

    print!("{:>5}", "nu");
    for r in ratios {
        print!(" {:>13}", format!("J/U={r}"));
    }
    println!("   (f_c / delta_1)");
    for n in 1..=2 * m {
        let basis = Arc::new(FockBasis::species(n, 0, m)?);
        let parts = HamiltonianParts::build(&basis, Boundary::Periodic)?;
        print!("{:>5.2}", n as f64 / m as f64);
        for r in ratios {
            let (fc, var) = phase_diagram_cell(&basis, &parts, r)?;
            print!(" {:>6.3}/{:<6.3}", fc, var);
        }
        println!();
    }
    Ok(())
}
