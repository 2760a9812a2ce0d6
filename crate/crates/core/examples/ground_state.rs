//! Ground state of the single-species Bose-Hubbard ring at one lattice depth:
//! condensate fraction, on-site number variance and zero-momentum occupation.
//!
//!     cargo run --example ground_state -- 6 6 3

use std::sync::Arc;

use ghz_lattice::band::{lattice_params, BandSettings, InteractionScenario, LatticeGeometry};
use ghz_lattice::evolution::{ground_state, SpeciesConstraint};
use ghz_lattice::fock::FockBasis;
use ghz_lattice::hamiltonian::{Boundary, HamiltonianParts};
use ghz_lattice::observables::{condensate_fraction, quasimomentum_occupation, site_variance};

fn main() -> ghz_lattice::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(6, |s| s.parse().expect("N"));
    let m: usize = args.next().map_or(6, |s| s.parse().expect("M"));
    let v0: f64 = args.next().map_or(3.0, |s| s.parse().expect("V0"));

    let p = lattice_params(v0, &LatticeGeometry::default(), InteractionScenario::default(), BandSettings::default())?;
    let basis = Arc::new(FockBasis::full(n, m)?);
    let h = HamiltonianParts::build(&basis, Boundary::Periodic)?.hamiltonian_at(&p);
    let gs = ground_state(&h, &basis, Some(SpeciesConstraint::AllA))?;

    println!("V0={v0}  J={:.5}  U_AA={:.5}  U/J={:.3}", p.j, p.u_aa, p.u_aa / p.j);
    println!("dim {}  E0 {:.10}  residual {:.1e}", basis.dim(), gs.energy, gs.residual);
    println!("f_c      {:.6}", condensate_fraction(&gs.state));
    println!("N_(q=0)  {:.6}", quasimomentum_occupation(&gs.state, 0.0)?);
    for j in 0..m {
        println!("delta_{}  {:.6}", j + 1, site_variance(&gs.state, j)?);
    }
    Ok(())
}
