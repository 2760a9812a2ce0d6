//! Separable-state sampling and the correlator bound on the full Fock space.

use std::sync::Arc;

use num_complex::Complex64;

use ghz_lattice::fock::FockBasis;
use ghz_lattice::hamiltonian::{CorrelatorFactors, DirectionVector, SpinAxis};
use ghz_lattice::observables::correlator;
use ghz_lattice::separability::{
    audit_separability_bound, branch_states, coherent_product_state, max_correlator_search, random_product_state,
    separability_bound, validate_direction, SeparableMixture, SiteState,
};

#[test]
fn haar_sampling_has_zero_mean_spin() {
    let n = 20_000;
    let z = DirectionVector::axis(SpinAxis::Z);
    let x = DirectionVector::axis(SpinAxis::X);
    for e in [z, x] {
        let values: Vec<f64> = (0..n).map(|s| random_product_state(1, s).site_expectations(&e)[0].re).collect();
        let mean = values.iter().sum::<f64>() / n as f64;
        // A uniform Bloch vector component has variance 1/3, so <S> has variance 1/12.
        let sigma = (1.0 / 12.0 / n as f64).sqrt();
        assert!(mean.abs() < 3.0 * sigma, "mean {mean}, 3 sigma {}", 3.0 * sigma);
    }
}

#[test]
fn sampling_is_seed_deterministic() {
    assert_eq!(random_product_state(4, 99), random_product_state(4, 99));
    assert_ne!(random_product_state(4, 99), random_product_state(4, 100));
    let e = DirectionVector::rotated_raising();
    let a = audit_separability_bound(2, &e, 2000, 5).unwrap();
    let b = audit_separability_bound(2, &e, 2000, 5).unwrap();
    assert_eq!(a, b);
}

#[test]
fn product_formula_matches_full_space_expectation() {
    let e = DirectionVector::raising();
    for m in 1..=4 {
        let basis = Arc::new(FockBasis::full(m, m).unwrap());
        for seed in 0..5 {
            let p = random_product_state(m, seed);
            let full = correlator(&p.to_state(&basis).unwrap(), &e).unwrap().value;
            assert!((full - p.correlator(&e)).norm() < 1e-13);
        }
    }
}

#[test]
fn mixtures_are_linear_and_bounded() {
    let e = DirectionVector::rotated_raising();
    let basis = Arc::new(FockBasis::full(3, 3).unwrap());
    let factors = CorrelatorFactors::new(&basis, &e).unwrap();
    let components: Vec<_> = (0..4).map(|s| random_product_state(3, 40 + s)).collect();
    let mix = SeparableMixture::new(vec![0.1, 0.2, 0.3, 0.4], components).unwrap();
    let c = mix.correlator(&e);
    assert!((c - mix.correlator_full(&basis, &factors).unwrap()).norm() < 1e-13);
    assert!(c.norm_sqr() <= separability_bound(3, 3) + 1e-10);
    assert!(SeparableMixture::new(vec![0.5, 0.6], vec![random_product_state(3, 1), random_product_state(3, 2)]).is_err());
}

#[test]
fn coherent_state_saturates_the_bound() {
    for e in [DirectionVector::raising(), DirectionVector::rotated_raising()] {
        for m in 1..=6 {
            let c = coherent_product_state(m, &e).unwrap().correlator(&e).norm_sqr();
            assert!((c - separability_bound(m, m)).abs() < 1e-10);
        }
    }
}

#[test]
fn qubit_spin_matches_bloch_vector() {
    let s = SiteState::from_bloch([0.6, 0.0, 0.8]);
    let spin = s.spin();
    for (a, b) in spin.iter().zip([0.3, 0.0, 0.4]) {
        assert!((a - b).abs() < 1e-12);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = SiteState::qubit(Complex64::new(h, 0.0), Complex64::new(h, 0.0)).unwrap();
    assert!((plus.coherence() - Complex64::new(0.5, 0.0)).norm() < 1e-12);
}

#[test]
fn inadmissible_direction_is_flagged() {
    let big = DirectionVector::new(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let check = validate_direction(&big);
    assert!(!check.admissible);
    assert!((check.lambda_max - 2.0).abs() < 1e-12);
    assert!(audit_separability_bound(2, &big, 10, 0).is_err());
}

#[test]
fn maximal_correlator_is_a_quarter() {
    let e = DirectionVector::raising();
    let (u, d) = branch_states(&e);
    assert!((u[0].norm_sqr() + u[1].norm_sqr() - 1.0).abs() < 1e-12);
    assert!((d[0].norm_sqr() + d[1].norm_sqr() - 1.0).abs() < 1e-12);
    let r = max_correlator_search(2, &e, 3, 2).unwrap();
    assert!((r.family_max - 0.25).abs() < 1e-9);
    assert!(r.hill_climb_max <= 0.25 + 1e-6);
    let state = r.state.expect("maximizer kept");
    assert!((correlator(&state, &e).unwrap().modulus_sq - r.value).abs() < 1e-9);
}
