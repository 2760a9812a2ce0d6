//! Enumerate a two-species sector, look up states and apply ladder operators.
//!
//!     cargo run --example fock_basis -- 2 2

use ghz_lattice::fock::{apply_ladder, sector_dimension, FockBasis, LadderKind, Species};

fn main() -> ghz_lattice::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(2);
    let m = args.next().unwrap_or(2);

    let basis = FockBasis::full(n, m)?;
    println!("N={n} M={m}: dim {} (C(N+2M-1, N) = {:?})", basis.dim(), sector_dimension(n, m));
    for (i, s) in basis.states().iter().enumerate().take(20) {
        println!("{i:>4}  A {:?}  B {:?}", s.occ_a(), s.occ_b());
    }
    if basis.dim() > 20 {
        println!("   ... {} more", basis.dim() - 20);
    }

    // b†_0 a_0 moves one atom from A to B on site 0.
    let first = basis.state(0).clone();
    let lowered = apply_ladder(&first, 0, Species::A, LadderKind::Annihilate)?;
    if let Some(l) = &lowered.state {
        let raised = apply_ladder(l, 0, Species::B, LadderKind::Create)?;
        let out = raised.state.expect("creation never vanishes");
        println!(
            "b†_0 a_0 |{:?};{:?}> = {:.4} |{:?};{:?}>  (index {})",
            first.occ_a(),
            first.occ_b(),
            lowered.coefficient * raised.coefficient,
            out.occ_a(),
            out.occ_b(),
            basis.index_of(&out)?
        );
    }
    Ok(())
}
