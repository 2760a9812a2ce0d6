//! Ramp integration: symmetric-subspace propagation against the full basis,
//! degenerate ramps, step-size convergence and adiabatic following.

use std::sync::Arc;

use num_complex::Complex64;

use ghz_lattice::band::{BandSettings, InteractionScenario, LatticeGeometry, ParamsTable};
use ghz_lattice::evolution::{ground_state, run_ramp, RampConfig, RampedHamiltonian, Rk4};
use ghz_lattice::fock::FockBasis;
use ghz_lattice::hamiltonian::{Boundary, HamiltonianParts, RampSchedule};
use ghz_lattice::observables::{condensate_fraction, site_variance, ObservableSet};
use ghz_lattice::protocol::{Protocol, ProtocolSpec};
use ghz_lattice::state::StateVector;

fn spec(size: usize) -> ProtocolSpec {
    ProtocolSpec {
        particles: size,
        sites: size,
        ..ProtocolSpec::default()
    }
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn symmetric_propagation_matches_full_basis() {
    for boundary in [Boundary::Periodic, Boundary::Open] {
        let mut s = spec(3);
        s.boundary = boundary;
        s.symmetric = false;
        let full = Protocol::prepare(s).unwrap();
        let reduced = Protocol { spec: ProtocolSpec { symmetric: true, ..s }, ..full.clone() };
        let a = full.run(400.0).unwrap();
        let b = reduced.run(400.0).unwrap();
        let sub = reduced.hamiltonian(400.0).unwrap().subspace().unwrap().dim();
        assert!(sub < full.basis.dim(), "{boundary:?}: {sub} vs {}", full.basis.dim());
        let d = max_diff(a.outcome.final_state.amplitudes(), b.outcome.final_state.amplitudes());
        assert!(d < 1e-10, "{boundary:?}: max amplitude difference {d:e}");
        assert!((a.final_c2 - b.final_c2).abs() < 1e-12);
    }
}

#[test]
fn energy_shift_changes_only_the_global_phase() {
    let mut s = spec(3);
    s.energy_shift = false;
    let plain = Protocol::prepare(s).unwrap();
    let shifted = Protocol { spec: ProtocolSpec { energy_shift: true, ..s }, ..plain.clone() };
    let a = plain.run(300.0).unwrap().outcome.final_state;
    let b = shifted.run(300.0).unwrap().outcome.final_state;
    assert!((a.fidelity(&b).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn zero_length_ramp_returns_the_initial_state() {
    let p = Protocol::prepare(spec(2)).unwrap();
    let run = p.run(0.0).unwrap();
    assert_eq!(run.outcome.steps, 0);
    assert!(max_diff(run.outcome.final_state.amplitudes(), p.initial.amplitudes()) < 1e-15);
    assert!((run.final_c2 - run.initial_c2).abs() < 1e-15);
}

#[test]
fn halving_the_step_leaves_the_final_correlator_unchanged() {
    let p = Protocol::prepare(spec(4)).unwrap();
    let coarse = p.run(2000.0).unwrap();
    let fine = Protocol { spec: ProtocolSpec { ramp: RampConfig { dt: 0.005, cadence: 200, ..p.spec.ramp }, ..p.spec }, ..p.clone() }
        .run(2000.0)
        .unwrap();
    assert!((coarse.final_c2 - fine.final_c2).abs() < 1e-6, "{} vs {}", coarse.final_c2, fine.final_c2);
}

#[test]
fn oversized_step_is_refused() {
    let p = Protocol::prepare(spec(2)).unwrap();
    let bad = Protocol { spec: ProtocolSpec { ramp: RampConfig { dt: 5.0, ..p.spec.ramp }, ..p.spec }, ..p.clone() };
    assert!(matches!(bad.run(100.0), Err(ghz_lattice::Error::StepTooLarge { .. })));
}

#[test]
fn protocol_log_conserves_norm_and_number() {
    let p = Protocol::prepare(spec(4)).unwrap();
    let run = p.run(1500.0).unwrap();
    assert!(run.outcome.max_norm_drift < 1e-8);
    assert!(run.outcome.max_number_drift < 1e-10);
    let obs = ObservableSet::protocol(&p.basis, &p.spec.direction).unwrap();
    assert_eq!(run.outcome.log.columns, obs.names());
}

/// Slow single-species ramp 3 -> 45: the state follows the instantaneous ground
/// state and the on-site variance collapses as the lattice deepens.
#[test]
fn slow_ramp_follows_the_ground_state() {
    let (n, m, tau) = (6, 6, 10_000.0);
    let table = Arc::new(
        ParamsTable::build(
            2.5,
            50.0,
            100,
            &LatticeGeometry::default(),
            InteractionScenario::default(),
            BandSettings::default(),
        )
        .unwrap(),
    );
    let basis = Arc::new(FockBasis::species(n, 0, m).unwrap());
    let parts = HamiltonianParts::build(&basis, Boundary::Periodic).unwrap();
    let schedule = RampSchedule::new(3.0, 45.0, tau).unwrap();
    let h = RampedHamiltonian::new(&parts, table.clone(), schedule, &basis).unwrap();
    let instantaneous = |t: f64| {
        let p = table.at(schedule.depth_at(t)).unwrap();
        ground_state(&parts.hamiltonian_at(&p), &basis, None).unwrap().state
    };

    let start = instantaneous(0.0);
    assert!(condensate_fraction(&start) > 0.95);
    let mut psi = start.amplitudes().to_vec();
    let mut rk = Rk4::new(psi.len());
    let dt = 0.01;
    let steps_per_check = 100_000;
    let mut worst = 1.0f64;
    let mut variance_at_30 = None;
    for check in 1..=10 {
        for k in 0..steps_per_check {
            let t = ((check - 1) * steps_per_check + k) as f64 * dt;
            rk.step(&h, t, dt, &mut psi);
        }
        let t = (check * steps_per_check) as f64 * dt;
        let state = StateVector::normalized(basis.clone(), psi.clone()).unwrap();
        worst = worst.min(state.fidelity(&instantaneous(t)).unwrap());
        if variance_at_30.is_none() && schedule.depth_at(t) >= 30.0 {
            variance_at_30 = Some(site_variance(&state, 0).unwrap());
        }
    }
    assert!(worst > 0.99, "lowest overlap with the instantaneous ground state {worst}");
    let v = variance_at_30.unwrap();
    assert!(v < 0.05, "on-site variance at V0 >= 30 is {v}");
}

#[test]
fn ramp_logs_the_requested_cadence() {
    let p = Protocol::prepare(spec(2)).unwrap();
    let h = p.hamiltonian(10.0).unwrap();
    let obs = ObservableSet::protocol(&p.basis, &p.spec.direction).unwrap();
    let cfg = RampConfig { cadence: 250, ..RampConfig::default() };
    let out = run_ramp(&p.initial, &h, &cfg, &obs).unwrap();
    assert_eq!(out.steps, 1000);
    assert_eq!(out.log.times.len(), 5);
    assert_eq!(*out.log.times.last().unwrap(), 10.0);
}
