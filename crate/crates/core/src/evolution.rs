//! Ground states, the spin rotation that prepares the initial state, and
//! fixed-step RK4 integration of the ramped Hamiltonian.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::band::{LatticeParams, ParamsTable};
use crate::error::{Error, Result};
use crate::fock::{FockBasis, SectorKind};
use crate::hamiltonian::{build_collective_spin, Boundary, HamiltonianParts, RampSchedule, SpinAxis};
use crate::lanczos::lowest_eigenpair;
use crate::observables::ObservableSet;
use crate::sparse::{RealCsr, SparseOperator};
use crate::state::StateVector;
use crate::symmetry::{SymmetricSubspace, SymmetryGroup};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const MINUS_I: Complex64 = Complex64 { re: 0.0, im: -1.0 };

/// Restrict the ground-state search to part of the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeciesConstraint {
    AllA,
    AllB,
    Populations { n_a: usize, n_b: usize },
}

impl SpeciesConstraint {
    fn allows(&self, n: usize, n_a: usize) -> bool {
        match *self {
            SpeciesConstraint::AllA => n_a == n,
            SpeciesConstraint::AllB => n_a == 0,
            SpeciesConstraint::Populations { n_a: want, .. } => n_a == want,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    pub residual: f64,
}

/// Residual bound accepted for a ground state.
pub const GROUND_RESIDUAL: f64 = 1e-9;

/// Lowest eigenpair of `h`, optionally inside a species sector. The phase is
/// fixed so the largest amplitude is real and positive.
pub fn ground_state(
    h: &SparseOperator,
    basis: &Arc<FockBasis>,
    constraint: Option<SpeciesConstraint>,
) -> Result<GroundState> {
    if h.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: h.dim(),
        });
    }
    if !h.is_hermitian() {
        return Err(Error::NotHermitian(h.hermiticity_residual()));
    }
    let n = basis.particles();
    let indices: Vec<usize> = match constraint {
        None => (0..basis.dim()).collect(),
        Some(c) => {
            if let SpeciesConstraint::Populations { n_a, n_b } = c {
                if n_a + n_b != n {
                    return Err(Error::InvalidSector(format!(
                        "constraint N_A + N_B = {} differs from N = {n}",
                        n_a + n_b
                    )));
                }
            }
            basis
                .states()
                .iter()
                .enumerate()
                .filter(|(_, s)| c.allows(n, s.n_a()))
                .map(|(k, _)| k)
                .collect()
        }
    };
    if indices.is_empty() {
        return Err(Error::InvalidSector("constraint selects no basis states".into()));
    }
    let sub = if indices.len() == basis.dim() {
        h.clone()
    } else {
        h.submatrix(&indices)
    };
    let pair = lowest_eigenpair(&sub, GROUND_RESIDUAL / 10.0)?;
    let mut amps = vec![ZERO; basis.dim()];
    for (&k, &v) in indices.iter().zip(&pair.vector) {
        amps[k] = v;
    }
    let mut state = StateVector::normalized(basis.clone(), amps)?;
    state.fix_gauge();
    let residual = crate::lanczos::residual_norm(h, pair.value, state.amplitudes());
    if residual > GROUND_RESIDUAL {
        return Err(Error::EigenSolver(format!(
            "ground-state residual {residual:.3e} exceeds {GROUND_RESIDUAL:.0e}"
        )));
    }
    Ok(GroundState {
        energy: pair.value,
        state,
        residual,
    })
}

/// `exp(-i θ S_y)`, built block by block from the spectral decomposition of
/// `S_y` inside each set of states sharing the per-site total occupations.
#[derive(Debug, Clone)]
pub struct SpinRotation {
    angle: f64,
    blocks: Vec<(Vec<usize>, DMatrix<Complex64>)>,
    dim: usize,
}

impl SpinRotation {
    pub fn new(basis: &FockBasis, angle: f64) -> Result<Self> {
        if basis.kind() != SectorKind::Full {
            return Err(Error::InvalidSector("the spin rotation needs the full sector".into()));
        }
        let sy = build_collective_spin(basis, SpinAxis::Y)?;
        let mut groups: HashMap<Vec<u8>, Vec<usize>> = HashMap::new();
        for (k, s) in basis.states().iter().enumerate() {
            let key: Vec<u8> = (0..basis.sites()).map(|i| s.site_total(i) as u8).collect();
            groups.entry(key).or_default().push(k);
        }
        let mut keys: Vec<_> = groups.keys().cloned().collect();
        keys.sort();
        let mut blocks = Vec::with_capacity(keys.len());
        for key in keys {
            let idx = groups.remove(&key).expect("key present");
            let block = sy.submatrix(&idx).to_dense();
            let eig = block
                .try_symmetric_eigen(1e-15, 100_000)
                .ok_or_else(|| Error::EigenSolver("S_y block did not diagonalize".into()))?;
            let v = eig.eigenvectors.map(|x| x);
            let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -angle * l)));
            let u = &v * phases * v.adjoint();
            blocks.push((idx, u));
        }
        Ok(Self {
            angle,
            blocks,
            dim: basis.dim(),
        })
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim];
        for (idx, u) in &self.blocks {
            for (r, &i) in idx.iter().enumerate() {
                let mut acc = ZERO;
                for (c, &j) in idx.iter().enumerate() {
                    acc += u[(r, c)] * psi[j];
                }
                out[i] = acc;
            }
        }
        out
    }

    pub fn to_operator(&self) -> SparseOperator {
        let mut t = Vec::new();
        for (idx, u) in &self.blocks {
            for (r, &i) in idx.iter().enumerate() {
                for (c, &j) in idx.iter().enumerate() {
                    t.push((i, j, u[(r, c)]));
                }
            }
        }
        SparseOperator::from_triplets(self.dim, t)
    }
}

/// Rotate an all-A state by `exp(-i π/2 S_y)`, which maps each `a†` to `(a† + b†)/√2`.
pub fn prepare_spin_coherent(gs_a: &StateVector) -> Result<StateVector> {
    let basis = gs_a.basis();
    let n = basis.particles();
    let leak: f64 = gs_a
        .amplitudes()
        .iter()
        .zip(basis.states())
        .filter(|(_, s)| s.n_a() != n)
        .map(|(a, _)| a.norm_sqr())
        .sum();
    if leak > 1e-20 {
        return Err(Error::InvalidSector(format!(
            "input has weight {leak:.3e} outside the all-A sector"
        )));
    }
    let rot = SpinRotation::new(basis, std::f64::consts::FRAC_PI_2)?;
    StateVector::new(basis.clone(), rot.apply(gs_a.amplitudes()))
}

/// A (possibly time-dependent) Hermitian generator `y = H(t) x`.
pub trait Generator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, t: f64, x: &[Complex64], y: &mut [Complex64]);
}

impl Generator for SparseOperator {
    fn dim(&self) -> usize {
        SparseOperator::dim(self)
    }
    fn apply(&self, _t: f64, x: &[Complex64], y: &mut [Complex64]) {
        self.apply_into(x, y)
    }
}

/// `H(t) = -J(t) T + U_AA(t) aa + U_BB(t) bb + U_AB(t) ab (+ shift)`, with
/// parameters interpolated from a table along a ramp.
///
/// The operator acts either on the full basis or on the symmetric subspace
/// (see [`RampedHamiltonian::symmetric`]); [`run_ramp`] handles both.
#[derive(Debug, Clone)]
pub struct RampedHamiltonian {
    hopping: RealCsr,
    aa: Vec<f64>,
    bb: Vec<f64>,
    ab: Vec<f64>,
    table: Arc<ParamsTable>,
    schedule: RampSchedule,
    particles: usize,
    band_bottom: f64,
    shift: bool,
    subspace: Option<Arc<SymmetricSubspace>>,
}

impl RampedHamiltonian {
    /// Generator on the full basis.
    pub fn new(
        parts: &HamiltonianParts,
        table: Arc<ParamsTable>,
        schedule: RampSchedule,
        basis: &FockBasis,
    ) -> Result<Self> {
        let (lo, hi) = schedule.depth_range();
        table.at(lo)?;
        table.at(hi)?;
        if parts.dim() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: parts.dim(),
            });
        }
        let band_bottom = match parts.boundary {
            Boundary::Periodic => -2.0,
            Boundary::Open => -2.0 * (std::f64::consts::PI / (basis.sites() as f64 + 1.0)).cos(),
        };
        Ok(Self {
            hopping: RealCsr::from_operator(&parts.hopping)?,
            aa: parts.interaction.aa.clone(),
            bb: parts.interaction.bb.clone(),
            ab: parts.interaction.ab.clone(),
            table,
            schedule,
            particles: basis.particles(),
            band_bottom,
            shift: false,
            subspace: None,
        })
    }

    /// Generator restricted to states invariant under translations (periodic
    /// chains), reflection and, when every tabulated `U_AA` equals `U_BB`, the
    /// species swap. Exact for initial states inside that subspace.
    pub fn symmetric(
        parts: &HamiltonianParts,
        table: Arc<ParamsTable>,
        schedule: RampSchedule,
        basis: &FockBasis,
    ) -> Result<Self> {
        let swap = table.rows.iter().all(|r| r.u_aa == r.u_bb)
            && match basis.kind() {
                SectorKind::Full => true,
                SectorKind::Species { n_a, n_b } => n_a == n_b,
            };
        let subspace = SymmetricSubspace::new(basis, SymmetryGroup::lattice(parts.boundary, swap))?;
        let mut out = Self::new(parts, table, schedule, basis)?;
        out.hopping = RealCsr::from_operator(&subspace.reduce_operator(&parts.hopping))?;
        out.aa = subspace.reduce_diagonal(&parts.interaction.aa);
        out.bb = subspace.reduce_diagonal(&parts.interaction.bb);
        out.ab = subspace.reduce_diagonal(&parts.interaction.ab);
        out.subspace = Some(Arc::new(subspace));
        Ok(out)
    }

    pub fn subspace(&self) -> Option<&SymmetricSubspace> {
        self.subspace.as_deref()
    }

    /// Add the c-number `-N ε_0 J(t)` (minus the non-interacting ground energy).
    /// This changes only the global phase and keeps RK4 phase errors small.
    pub fn with_energy_shift(mut self, on: bool) -> Self {
        self.shift = on;
        self
    }

    pub fn schedule(&self) -> &RampSchedule {
        &self.schedule
    }

    pub fn params_at(&self, t: f64) -> LatticeParams {
        self.table.at_unchecked(self.schedule.depth_at(t))
    }

    fn shift_at(&self, p: &LatticeParams) -> f64 {
        if self.shift {
            -self.band_bottom * p.j * self.particles as f64
        } else {
            0.0
        }
    }

    /// Upper bound on `|H(t)|` from row sums.
    pub fn norm_bound(&self, t: f64) -> f64 {
        let p = self.params_at(t);
        let s = self.shift_at(&p);
        let diag = (0..self.aa.len())
            .map(|k| (p.u_aa * self.aa[k] + p.u_bb * self.bb[k] + p.u_ab * self.ab[k] + s).abs())
            .fold(0.0, f64::max);
        diag + p.j * self.hopping.max_row_sum()
    }
}

impl Generator for RampedHamiltonian {
    fn dim(&self) -> usize {
        self.aa.len()
    }

    fn apply(&self, t: f64, x: &[Complex64], y: &mut [Complex64]) {
        let p = self.params_at(t);
        let s = self.shift_at(&p);
        let mj = -p.j;
        let rp = &self.hopping.row_ptr;
        let cols = &self.hopping.cols;
        let vals = &self.hopping.vals;
        for r in 0..y.len() {
            let d = p.u_aa * self.aa[r] + p.u_bb * self.bb[r] + p.u_ab * self.ab[r] + s;
            let mut acc = x[r] * d;
            let mut hop = ZERO;
            for k in rp[r] as usize..rp[r + 1] as usize {
                hop += x[cols[k] as usize] * vals[k];
            }
            acc += hop * mj;
            y[r] = acc;
        }
    }
}

/// Reusable RK4 workspace for `i dψ/dt = H(t) ψ`.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k: Vec<Complex64>,
    acc: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k: vec![ZERO; dim],
            acc: vec![ZERO; dim],
            tmp: vec![ZERO; dim],
        }
    }

    /// Advance `psi` from `t` to `t + dt` in place.
    pub fn step(&mut self, h: &impl Generator, t: f64, dt: f64, psi: &mut [Complex64]) {
        let half = MINUS_I * (dt / 2.0);
        let full = MINUS_I * dt;
        let sixth = MINUS_I * (dt / 6.0);
        // k1
        h.apply(t, psi, &mut self.k);
        for i in 0..psi.len() {
            self.acc[i] = self.k[i];
            self.tmp[i] = psi[i] + half * self.k[i];
        }
        // k2
        h.apply(t + dt / 2.0, &self.tmp, &mut self.k);
        for i in 0..psi.len() {
            self.acc[i] += self.k[i] * 2.0;
            self.tmp[i] = psi[i] + half * self.k[i];
        }
        // k3
        h.apply(t + dt / 2.0, &self.tmp, &mut self.k);
        for i in 0..psi.len() {
            self.acc[i] += self.k[i] * 2.0;
            self.tmp[i] = psi[i] + full * self.k[i];
        }
        // k4
        h.apply(t + dt, &self.tmp, &mut self.k);
        for i in 0..psi.len() {
            psi[i] += sixth * (self.acc[i] + self.k[i]);
        }
    }
}

/// One RK4 step returning a new state. Fails on non-finite amplitudes.
pub fn rk4_step(psi: &StateVector, t: f64, dt: f64, h: &impl Generator) -> Result<StateVector> {
    if h.dim() != psi.amplitudes().len() {
        return Err(Error::DimensionMismatch {
            expected: psi.amplitudes().len(),
            found: h.dim(),
        });
    }
    let mut amps = psi.amplitudes().to_vec();
    Rk4::new(amps.len()).step(h, t, dt, &mut amps);
    if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::NonFinite { time: t + dt });
    }
    Ok(StateVector::from_raw(psi.basis().clone(), amps))
}

/// Evolve under a time-independent operator for `steps` steps of size `dt`.
pub fn evolve_constant(psi: &StateVector, h: &SparseOperator, dt: f64, steps: usize) -> Result<StateVector> {
    let mut amps = psi.amplitudes().to_vec();
    let mut rk = Rk4::new(amps.len());
    for n in 0..steps {
        rk.step(h, n as f64 * dt, dt, &mut amps);
    }
    if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::NonFinite { time: steps as f64 * dt });
    }
    Ok(StateVector::from_raw(psi.basis().clone(), amps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampConfig {
    pub dt: f64,
    /// Sample observables every `cadence` steps.
    pub cadence: usize,
    pub norm_tolerance: f64,
    /// Refuse to start when `dt · |H|` exceeds this.
    pub stability_limit: f64,
}

impl Default for RampConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            cadence: 100,
            norm_tolerance: 1e-6,
            stability_limit: 0.1,
        }
    }
}

/// Sampled trajectory: one row per checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionLog {
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    pub depths: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl EvolutionLog {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        let i = self.columns.iter().position(|c| c == name)?;
        self.rows.last().map(|r| r[i])
    }

    /// CSV with header `t,V0,<columns>` and 12 significant digits.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        write!(w, "t,V0")?;
        for c in &self.columns {
            write!(w, ",{c}")?;
        }
        writeln!(w)?;
        for ((t, v), row) in self.times.iter().zip(&self.depths).zip(&self.rows) {
            write!(w, "{t:.11e},{v:.11e}")?;
            for x in row {
                write!(w, ",{x:.11e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RampOutcome {
    pub log: EvolutionLog,
    pub final_state: StateVector,
    pub steps: usize,
    pub dt: f64,
    pub max_norm_drift: f64,
    pub max_number_drift: f64,
}

/// Largest admissible component of the initial state outside the symmetric subspace.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Integrate over `[0, tau]` with the step adjusted so it lands on `tau`.
pub fn run_ramp(
    psi0: &StateVector,
    h: &RampedHamiltonian,
    config: &RampConfig,
    observables: &ObservableSet,
) -> Result<RampOutcome> {
    let full_dim = psi0.amplitudes().len();
    let expected = h.subspace().map_or(h.dim(), |s| s.full_dim());
    if expected != full_dim {
        return Err(Error::DimensionMismatch {
            expected: full_dim,
            found: expected,
        });
    }
    if !(config.dt > 0.0 && config.dt.is_finite()) || config.cadence == 0 {
        return Err(Error::InvalidParameter(format!(
            "need dt > 0 and cadence >= 1, got dt = {}, cadence = {}",
            config.dt, config.cadence
        )));
    }
    let tau = h.schedule().tau;
    let steps = if tau == 0.0 {
        0
    } else {
        (tau / config.dt - 1e-9).ceil().max(1.0) as usize
    };
    let dt = if steps == 0 { config.dt } else { tau / steps as f64 };
    let product = dt * h.norm_bound(0.0).max(h.norm_bound(tau));
    if product > config.stability_limit {
        return Err(Error::StepTooLarge {
            dt,
            product,
            limit: config.stability_limit,
        });
    }
    let basis = psi0.basis().clone();
    let n = basis.particles() as f64;
    let number: Vec<f64> = basis.states().iter().map(|s| s.total() as f64).collect();
    let mut log = EvolutionLog {
        columns: observables.names(),
        times: Vec::new(),
        depths: Vec::new(),
        rows: Vec::new(),
    };
    let mut psi = match h.subspace() {
        None => psi0.amplitudes().to_vec(),
        Some(sub) => {
            let (c, outside) = sub.reduce(psi0.amplitudes());
            if outside > SYMMETRY_TOLERANCE {
                return Err(Error::InvalidParameter(format!(
                    "initial state has weight {outside:.3e} outside the symmetric subspace"
                )));
            }
            c
        }
    };
    let mut full = vec![ZERO; full_dim];
    let mut rk = Rk4::new(psi.len());
    let mut max_norm_drift = 0.0f64;
    let mut max_number_drift = 0.0f64;
    let mut sample = |step: usize, reduced: &[Complex64], log: &mut EvolutionLog| -> Result<()> {
        let t = step as f64 * dt;
        let psi: &[Complex64] = match h.subspace() {
            None => reduced,
            Some(sub) => {
                sub.expand_into(reduced, &mut full);
                &full
            }
        };
        let norm2: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        if !norm2.is_finite() {
            return Err(Error::NonFinite { time: t });
        }
        let drift = (norm2.sqrt() - 1.0).abs();
        max_norm_drift = max_norm_drift.max(drift);
        if drift > config.norm_tolerance {
            return Err(Error::NormDrift {
                drift,
                time: t,
                tolerance: config.norm_tolerance,
            });
        }
        let nexp: f64 = psi.iter().zip(&number).map(|(a, k)| a.norm_sqr() * k).sum();
        max_number_drift = max_number_drift.max((nexp - n).abs());
        log.times.push(t);
        log.depths.push(h.schedule().depth_at(t));
        log.rows.push(observables.evaluate(psi));
        Ok(())
    };
    sample(0, &psi, &mut log)?;
    for step in 0..steps {
        rk.step(h, step as f64 * dt, dt, &mut psi);
        let done = step + 1;
        if done % config.cadence == 0 || done == steps {
            sample(done, &psi, &mut log)?;
        }
    }
    let final_amps = match h.subspace() {
        None => psi,
        Some(sub) => sub.expand(&psi),
    };
    Ok(RampOutcome {
        log,
        final_state: StateVector::from_raw(basis, final_amps),
        steps,
        dt,
        max_norm_drift,
        max_number_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build_hopping;

    #[test]
    fn rk4_conserves_norm_for_small_steps() {
        let basis = Arc::new(FockBasis::full(2, 3).unwrap());
        let h = build_hopping(&basis, Boundary::Periodic).unwrap();
        let psi = StateVector::basis_state(basis, 0).unwrap();
        let out = evolve_constant(&psi, &h, 1e-3, 2000).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rotation_of_single_boson() {
        let basis = FockBasis::full(1, 1).unwrap();
        let rot = SpinRotation::new(&basis, std::f64::consts::FRAC_PI_2).unwrap();
        // a† -> (a† + b†)/√2 : |1;0> -> (|1;0> + |0;1>)/√2
        let out = rot.apply(&[Complex64::new(1.0, 0.0), ZERO]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out[0] - Complex64::new(h, 0.0)).norm() < 1e-14);
        assert!((out[1] - Complex64::new(h, 0.0)).norm() < 1e-14);
    }
}
