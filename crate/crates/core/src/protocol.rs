//! The full ramp protocol: ground state at the initial depth in the all-A
//! sector, a `π/2` spin rotation, then a linear lattice ramp.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::band::{BandSettings, InteractionScenario, LatticeGeometry, ParamsTable};
use crate::error::{Error, Result};
use crate::evolution::{
    ground_state, prepare_spin_coherent, run_ramp, GroundState, RampConfig, RampOutcome, RampedHamiltonian,
    SpeciesConstraint,
};
use crate::fock::FockBasis;
use crate::hamiltonian::{Boundary, DirectionVector, HamiltonianParts, RampSchedule};
use crate::observables::{correlator, decompose_final_state, DecompositionReport, ObservableSet};
use crate::separability::separability_bound;
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub particles: usize,
    pub sites: usize,
    pub v_initial: f64,
    pub v_final: f64,
    pub direction: DirectionVector,
    pub geometry: LatticeGeometry,
    pub scenario: InteractionScenario,
    pub bands: BandSettings,
    /// Depth samples in the interpolation table.
    pub table_points: usize,
    pub boundary: Boundary,
    /// Propagate in the symmetric subspace (exact for this protocol).
    pub symmetric: bool,
    pub energy_shift: bool,
    pub ramp: RampConfig,
}

impl Default for ProtocolSpec {
    fn default() -> Self {
        Self {
            particles: 6,
            sites: 6,
            v_initial: 3.0,
            v_final: 40.0,
            direction: DirectionVector::rotated_raising(),
            geometry: LatticeGeometry::default(),
            scenario: InteractionScenario::default(),
            bands: BandSettings::default(),
            table_points: 200,
            boundary: Boundary::Periodic,
            symmetric: true,
            energy_shift: true,
            ramp: RampConfig::default(),
        }
    }
}

impl ProtocolSpec {
    /// Table range: half a recoil below the lower depth and five above the upper one.
    pub fn table_range(&self) -> (f64, f64) {
        let lo = self.v_initial.min(self.v_final);
        let hi = self.v_initial.max(self.v_final);
        ((lo - 0.5).max(0.0), hi + 5.0)
    }
}

/// Everything shared by ramps of different duration.
#[derive(Debug, Clone)]
pub struct Protocol {
    pub spec: ProtocolSpec,
    pub basis: Arc<FockBasis>,
    pub parts: HamiltonianParts,
    pub table: Arc<ParamsTable>,
    pub ground: GroundState,
    pub initial: StateVector,
}

#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub tau: f64,
    pub outcome: RampOutcome,
    /// `2^{-2M}` for `N = M`, `(N/2M)^{2M}` otherwise.
    pub bound: f64,
    pub initial_c2: f64,
    pub final_c2: f64,
    pub max_c2: f64,
    pub max_c2_time: f64,
    /// First sampled time with `|C|^2` above the bound.
    pub first_bound_break: Option<f64>,
    pub decomposition: Option<DecompositionReport>,
}

impl Protocol {
    pub fn prepare(spec: ProtocolSpec) -> Result<Self> {
        spec.geometry.validate()?;
        spec.direction.check_admissible()?;
        let (lo, hi) = spec.table_range();
        let table = Arc::new(ParamsTable::build(
            lo,
            hi,
            spec.table_points,
            &spec.geometry,
            spec.scenario,
            spec.bands,
        )?);
        let basis = Arc::new(FockBasis::full(spec.particles, spec.sites)?);
        let parts = HamiltonianParts::build(&basis, spec.boundary)?;
        let h0 = parts.hamiltonian_at(&table.at(spec.v_initial)?);
        let ground = ground_state(&h0, &basis, Some(SpeciesConstraint::AllA))?;
        let initial = prepare_spin_coherent(&ground.state)?;
        Ok(Self {
            spec,
            basis,
            parts,
            table,
            ground,
            initial,
        })
    }

    pub fn hamiltonian(&self, tau: f64) -> Result<RampedHamiltonian> {
        let schedule = RampSchedule::new(self.spec.v_initial, self.spec.v_final, tau)?;
        let h = if self.spec.symmetric {
            RampedHamiltonian::symmetric(&self.parts, self.table.clone(), schedule, &self.basis)?
        } else {
            RampedHamiltonian::new(&self.parts, self.table.clone(), schedule, &self.basis)?
        };
        Ok(h.with_energy_shift(self.spec.energy_shift))
    }

    pub fn run(&self, tau: f64) -> Result<ProtocolRun> {
        let h = self.hamiltonian(tau)?;
        let observables = ObservableSet::protocol(&self.basis, &self.spec.direction)?;
        let outcome = run_ramp(&self.initial, &h, &self.spec.ramp, &observables)?;
        let (n, m) = (self.spec.particles, self.spec.sites);
        let bound = separability_bound(n, m);
        let c2 = outcome
            .log
            .column("C2")
            .ok_or_else(|| Error::InvalidSector("correlator column missing".into()))?;
        let (imax, max_c2) = c2
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, v)| if v > b.1 { (i, v) } else { b });
        let first_bound_break = c2.iter().position(|&v| v > bound).map(|i| outcome.log.times[i]);
        let decomposition = if n == m {
            Some(decompose_final_state(&outcome.final_state)?)
        } else {
            None
        };
        Ok(ProtocolRun {
            tau,
            bound,
            initial_c2: correlator(&self.initial, &self.spec.direction)?.modulus_sq,
            final_c2: *c2.last().expect("at least the initial sample"),
            max_c2,
            max_c2_time: outcome.log.times[imax],
            first_bound_break,
            decomposition,
            outcome,
        })
    }
}
