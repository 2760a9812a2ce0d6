//! Phase states on six sites, the symmetric-state identities that connect
//! them, and the correlator of the reference GHZ state.
//!
//!     cargo run --example phase_states

use std::f64::consts::PI;
use std::sync::Arc;

use ghz_lattice::fock::FockBasis;
use ghz_lattice::hamiltonian::DirectionVector;
use ghz_lattice::observables::{correlator, ghz_reference, phase_state, phase_state_identities};

fn main() -> ghz_lattice::Result<()> {
    let basis = Arc::new(FockBasis::full(6, 6)?);
    let plus = DirectionVector::raising();

    let check = phase_state_identities(&basis)?;
    let labels = ["S60+S06", "S51+S15", "S42+S24", "S33"];
    for (l, d) in labels.iter().zip(check.identities) {
        println!("{l:<8} max entrywise deviation {d:.2e}");
    }
    println!(
        "odd pairs with |pi/2> + |3pi/2>: deviations {:.3} {:.3}",
        check.same_sign_variants[0], check.same_sign_variants[1]
    );
    println!("paired (1,i,1,i)/8 vs e^(i pi/4)(|0> - i|pi>)/sqrt2: {:.2e}", check.ghz_form);

    let ghz = ghz_reference(&basis)?;
    println!("GHZ |C_+|^2 = {:.12}", correlator(&ghz, &plus)?.modulus_sq);
    for k in 0..4 {
        let phi = k as f64 * PI / 2.0;
        let c = correlator(&phase_state(&basis, phi)?, &plus)?;
        println!("|{}pi/2> : |C_+|^2 = {:.6e}", k, c.modulus_sq);
    }
    Ok(())
}
