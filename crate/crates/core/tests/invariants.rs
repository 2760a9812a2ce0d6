//! Property tests for the basis, operators, integrator and observables.

use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use ghz_lattice::band::LatticeParams;
use ghz_lattice::evolution::{evolve_constant, Rk4};
use ghz_lattice::fock::{apply_ladder, sector_dimension, FockBasis, LadderKind, Species};
use ghz_lattice::hamiltonian::{build_site_spin, Boundary, DirectionVector, HamiltonianParts, SpinAxis};
use ghz_lattice::observables::{condensate_fraction, quasimomentum_occupation};
use ghz_lattice::separability::{separability_bound, sample_product, SiteState};
use ghz_lattice::state::StateVector;
use ghz_lattice::symmetry::{SymmetricSubspace, SymmetryGroup};

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
}

fn random_state(basis: &Arc<FockBasis>, raw: &[Complex64]) -> Option<StateVector> {
    let amps: Vec<Complex64> = (0..basis.dim()).map(|k| raw[k % raw.len()] * (1.0 + k as f64 * 0.37).sin()).collect();
    StateVector::normalized(basis.clone(), amps).ok()
}

fn params() -> impl Strategy<Value = LatticeParams> {
    (0.01f64..1.0, 0.0f64..2.0, 0.0f64..2.0, 0.0f64..2.0).prop_map(|(j, u_aa, u_bb, u_ab)| LatticeParams {
        j,
        u_aa,
        u_bb,
        u_ab,
    })
}

/// Random complex direction scaled so that the Gram matrix has `λ_max = scale`.
fn direction(scale: f64) -> impl Strategy<Value = DirectionVector> {
    complex_vec(3).prop_filter_map("degenerate direction", move |v| {
        let e = DirectionVector::new(v[0], v[1], v[2]);
        let l = e.lambda_max();
        (l > 1e-6).then(|| {
            let s = Complex64::new((scale / l).sqrt(), 0.0);
            DirectionVector::new(v[0] * s, v[1] * s, v[2] * s)
        })
    })
}

fn boundary() -> impl Strategy<Value = Boundary> {
    prop_oneof![Just(Boundary::Periodic), Just(Boundary::Open)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_is_ordered_indexed_and_counted(n in 0usize..5, m in 1usize..4) {
        let basis = FockBasis::full(n, m).unwrap();
        prop_assert_eq!(Some(basis.dim() as u128), sector_dimension(n, m));
        for (i, s) in basis.states().iter().enumerate() {
            prop_assert_eq!(s.total(), n);
            prop_assert_eq!(basis.index_of(s).unwrap(), i);
        }
        for w in basis.states().windows(2) {
            prop_assert!(w[0].modes() > w[1].modes());
        }
    }

    #[test]
    fn ladder_commutator_is_identity(n in 1usize..5, m in 1usize..4, pick in any::<prop::sample::Index>(), site_pick in any::<prop::sample::Index>(), b in any::<bool>()) {
        let basis = FockBasis::full(n, m).unwrap();
        let state = basis.state(pick.index(basis.dim()));
        let site = site_pick.index(m);
        let species = if b { Species::B } else { Species::A };
        // a a† |s> - a† a |s> = |s>
        let up = apply_ladder(state, site, species, LadderKind::Create).unwrap();
        let up_down = apply_ladder(up.state.as_ref().unwrap(), site, species, LadderKind::Annihilate).unwrap();
        let down = apply_ladder(state, site, species, LadderKind::Annihilate).unwrap();
        let down_up = match &down.state {
            Some(s) => apply_ladder(s, site, species, LadderKind::Create).unwrap().coefficient * down.coefficient,
            None => 0.0,
        };
        prop_assert_eq!(up_down.state.as_ref(), Some(state));
        let diff = up.coefficient * up_down.coefficient - down_up;
        prop_assert!((diff - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_is_hermitian_real_and_conserves_species(n in 1usize..4, m in 2usize..4, p in params(), bc in boundary()) {
        let basis = FockBasis::full(n, m).unwrap();
        let h = HamiltonianParts::build(&basis, bc).unwrap().hamiltonian_at(&p);
        prop_assert!(h.hermiticity_residual() < 1e-14);
        prop_assert!(h.is_real());
        for r in 0..h.dim() {
            for (c, _) in h.row(r) {
                prop_assert_eq!(basis.state(r).n_a(), basis.state(c).n_a());
            }
        }
    }

    #[test]
    fn site_spin_adjoint_conjugates_direction(n in 1usize..4, m in 1usize..3, e in direction(1.0)) {
        let basis = FockBasis::full(n, m).unwrap();
        let s = build_site_spin(&basis, 0, &e).unwrap();
        let conj = DirectionVector::new(e.x.conj(), e.y.conj(), e.z.conj());
        let s_conj = build_site_spin(&basis, 0, &conj).unwrap();
        prop_assert!(s.adjoint().max_abs_diff(&s_conj).unwrap() < 1e-13);
    }

    #[test]
    fn inadmissible_directions_are_rejected(e in direction(1.5)) {
        let basis = FockBasis::full(1, 1).unwrap();
        prop_assert!(!e.is_admissible());
        prop_assert!(build_site_spin(&basis, 0, &e).is_err());
    }

    #[test]
    fn rk4_conserves_norm_and_number(n in 1usize..4, m in 2usize..4, p in params(), raw in complex_vec(8)) {
        let basis = Arc::new(FockBasis::full(n, m).unwrap());
        let h = HamiltonianParts::build(&basis, Boundary::Periodic).unwrap().hamiltonian_at(&p);
        let Some(psi) = random_state(&basis, &raw) else { return Ok(()); };
        let out = evolve_constant(&psi, &h, 0.002, 500).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-8);
        let norm2 = out.norm() * out.norm();
        prop_assert!((out.total_number() - n as f64 * norm2).abs() < 1e-10);
    }

    #[test]
    fn rk4_steps_compose(p in params(), raw in complex_vec(10)) {
        let basis = Arc::new(FockBasis::full(2, 2).unwrap());
        let h = HamiltonianParts::build(&basis, Boundary::Periodic).unwrap().hamiltonian_at(&p);
        let Some(psi) = random_state(&basis, &raw) else { return Ok(()); };
        let composed = evolve_constant(&psi, &h, 0.01, 10).unwrap();
        let mut amps = psi.amplitudes().to_vec();
        let mut rk = Rk4::new(amps.len());
        for k in 0..10 {
            rk.step(&h, k as f64 * 0.01, 0.01, &mut amps);
        }
        let d = amps.iter().zip(composed.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(d < 1e-15);
    }

    #[test]
    fn condensate_fraction_matches_zero_momentum(n in 1usize..4, m in 2usize..4, raw in complex_vec(12)) {
        let basis = Arc::new(FockBasis::full(n, m).unwrap());
        let Some(psi) = random_state(&basis, &raw) else { return Ok(()); };
        let fc = condensate_fraction(&psi);
        let n0 = quasimomentum_occupation(&psi, 0.0).unwrap();
        prop_assert!((fc * n as f64 - n0).abs() < 1e-10);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&fc));
    }

    #[test]
    fn site_expectation_is_bounded(n in 1usize..6, raw in complex_vec(6), e in direction(1.0)) {
        let norm: f64 = raw[..=n].iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let site = SiteState::new(raw[..=n].iter().map(|a| a / norm).collect()).unwrap();
        let lambda = e.lambda_max();
        prop_assert!(site.expectation(&e).norm() <= n as f64 / 2.0 * lambda.sqrt() + 1e-12);
        let s = site.spin();
        let len = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
        prop_assert!(len <= n as f64 / 2.0 + 1e-12);
    }

    #[test]
    fn one_per_site_products_respect_the_bound(m in 1usize..7, seed in any::<u64>(), e in direction(1.0)) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let product = sample_product(&vec![1; m], &mut rng);
        prop_assert!(product.correlator(&e).norm_sqr() <= separability_bound(m, m) + 1e-10);
    }

    #[test]
    fn symmetric_subspace_roundtrip(n in 1usize..4, m in 2usize..4, raw in complex_vec(6), swap in any::<bool>()) {
        let basis = FockBasis::full(n, m).unwrap();
        let sub = SymmetricSubspace::new(&basis, SymmetryGroup::lattice(Boundary::Periodic, swap)).unwrap();
        let c: Vec<Complex64> = (0..sub.dim()).map(|k| raw[k % raw.len()] * (k as f64 + 1.0).cos()).collect();
        let (back, outside) = sub.reduce(&sub.expand(&c));
        prop_assert!(outside < 1e-12);
        let d = back.iter().zip(&c).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(d < 1e-12);
    }
}

#[test]
fn site_spin_components_satisfy_su2() {
    let basis = FockBasis::full(3, 2).unwrap();
    let s = |a| build_site_spin(&basis, 1, &DirectionVector::axis(a)).unwrap();
    let (x, y, z) = (s(SpinAxis::X), s(SpinAxis::Y), s(SpinAxis::Z));
    let i = Complex64::new(0.0, 1.0);
    for (a, b, c) in [(&x, &y, &z), (&y, &z, &x), (&z, &x, &y)] {
        let lhs = a.commutator(b).unwrap();
        assert!(lhs.max_abs_diff(&c.scaled(i)).unwrap() < 1e-13);
    }
}
