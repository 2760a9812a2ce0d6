//! Randomized audits of the separable-state correlator bound, the single-site
//! lemma and the maximum correlator over all states.
//!
//!     cargo run --release --example separability_audit -- 10000 7

use ghz_lattice::hamiltonian::DirectionVector;
use ghz_lattice::separability::{
    audit_lemma, audit_separability_bound, coherent_product_state, max_correlator_search, validate_direction,
};

fn main() -> ghz_lattice::Result<()> {
    let mut args = std::env::args().skip(1);
    let samples: usize = args.next().map_or(10_000, |s| s.parse().expect("sample count"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));

    for (name, e) in [
        ("raising", DirectionVector::raising()),
        ("rotated raising", DirectionVector::rotated_raising()),
    ] {
        let check = validate_direction(&e);
        println!("{name}: admissible {} lambda_max {:.3}", check.admissible, check.lambda_max);
        for m in [2, 3] {
            let audit = audit_separability_bound(m, &e, samples, seed)?;
            let lemma = audit_lemma(m, &e, samples, seed)?;
            let coherent = coherent_product_state(m, &e)?.correlator(&e).norm_sqr();
            println!(
                "  M={m}: max product {:.4e}, max mixture {:.4e}, bound {:.4e}, coherent {:.4e}",
                audit.max_product, audit.max_mixture, audit.bound, coherent
            );
            println!(
                "        lemma max sum {:.4} <= {:.1}; full-space deviation {:.1e}",
                lemma.max_sum, lemma.bound, audit.full_space_deviation
            );
        }
    }

    for m in [2, 3] {
        let s = max_correlator_search(m, &DirectionVector::raising(), seed, 4)?;
        println!(
            "max |C_+|^2 at M={m}: family {:.6} (theta={:.4}, phi={:.4}), hill climb {:.6}",
            s.family_max, s.theta, s.phi, s.hill_climb_max
        );
    }
    Ok(())
}
