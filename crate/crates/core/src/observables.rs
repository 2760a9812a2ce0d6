//! Condensate fraction, number fluctuations, quasimomentum occupation,
//! the entanglement correlator and the symmetric-state decomposition.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{hop_in_place, mode_index, FockBasis, SectorKind, Species};
use crate::hamiltonian::{CorrelatorFactors, DirectionVector};
use crate::sparse::SparseOperator;
use crate::state::StateVector;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// One-body density matrix `rho_ij = <σ†_i σ_j>` of one species.
pub fn one_body_density(psi: &StateVector, species: Species) -> DMatrix<Complex64> {
    let basis = psi.basis();
    let m = basis.sites();
    let amps = psi.amplitudes();
    let mut rho = DMatrix::from_element(m, m, ZERO);
    let mut buf = vec![0u8; 2 * m];
    for (k, state) in basis.states().iter().enumerate() {
        let ck = amps[k];
        if ck == ZERO {
            continue;
        }
        for j in 0..m {
            for i in 0..m {
                buf.copy_from_slice(state.modes());
                let (from, to) = (mode_index(m, j, species), mode_index(m, i, species));
                if let Some(amp) = hop_in_place(&mut buf, from, to) {
                    if let Some(row) = basis.find(&buf) {
                        rho[(i, j)] += amps[row].conj() * ck * amp;
                    }
                }
            }
        }
    }
    rho
}

/// `f_c = (1/NM) Σ_ij Σ_σ <σ†_i σ_j>`.
pub fn condensate_fraction(psi: &StateVector) -> f64 {
    let basis = psi.basis();
    let norm = (basis.particles() * basis.sites()) as f64;
    let total = one_body_density(psi, Species::A).sum() + one_body_density(psi, Species::B).sum();
    total.re / norm
}

/// The operator `(1/NM) Σ_ij Σ_σ σ†_i σ_j`, whose expectation is `f_c`.
pub fn condensate_fraction_operator(basis: &FockBasis) -> SparseOperator {
    let scale = 1.0 / (basis.particles() * basis.sites()) as f64;
    one_body_operator(basis, |_, _| Complex64::new(scale, 0.0))
}

fn one_body_operator(basis: &FockBasis, weight: impl Fn(usize, usize) -> Complex64) -> SparseOperator {
    let m = basis.sites();
    let mut buf = vec![0u8; 2 * m];
    let mut t = Vec::new();
    for (col, state) in basis.states().iter().enumerate() {
        for species in [Species::A, Species::B] {
            for j in 0..m {
                for i in 0..m {
                    buf.copy_from_slice(state.modes());
                    let (from, to) = (mode_index(m, j, species), mode_index(m, i, species));
                    if let Some(amp) = hop_in_place(&mut buf, from, to) {
                        let row = basis.find(&buf).expect("species-conserving move");
                        t.push((row, col, weight(i, j) * amp));
                    }
                }
            }
        }
    }
    SparseOperator::from_triplets(basis.dim(), t)
        .into_hermitian(1e-12)
        .expect("one-body number operators are hermitian")
}

/// `δ_i = <n_i^2> - <n_i>^2` for the total occupation of one site.
pub fn site_variance(psi: &StateVector, site: usize) -> Result<f64> {
    let basis = psi.basis();
    if site >= basis.sites() {
        return Err(Error::SiteOutOfRange {
            site,
            sites: basis.sites(),
        });
    }
    let (mut n1, mut n2) = (0.0, 0.0);
    for (a, s) in psi.amplitudes().iter().zip(basis.states()) {
        let n = s.site_total(site) as f64;
        let p = a.norm_sqr();
        n1 += p * n;
        n2 += p * n * n;
    }
    Ok(n2 - n1 * n1)
}

/// Quasimomentum grid index of `q` (units of `k_L`), if `q = 2k/M` for an integer `k`.
pub fn quasimomentum_index(q: f64, sites: usize) -> Result<usize> {
    let k = q * sites as f64 / 2.0;
    let kr = k.round();
    if (k - kr).abs() > 1e-9 {
        return Err(Error::OffGrid { q });
    }
    Ok((kr as i64).rem_euclid(sites as i64) as usize)
}

/// `Ñ_q = ã†_q ã_q + b̃†_q b̃_q` with `ã_q = (1/√M) Σ_j e^{-i q x_j} a_j`.
pub fn momentum_number_operator(basis: &FockBasis, k: usize) -> SparseOperator {
    let m = basis.sites();
    one_body_operator(basis, |i, j| {
        let phase = 2.0 * PI * k as f64 * (i as f64 - j as f64) / m as f64;
        Complex64::from_polar(1.0 / m as f64, phase)
    })
}

pub fn quasimomentum_occupation(psi: &StateVector, q: f64) -> Result<f64> {
    let k = quasimomentum_index(q, psi.basis().sites())?;
    Ok(momentum_number_operator(psi.basis(), k)
        .expectation(psi.amplitudes())
        .re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorValue {
    pub value: Complex64,
    pub modulus_sq: f64,
}

impl CorrelatorValue {
    pub fn from_value(value: Complex64) -> Self {
        Self {
            value,
            modulus_sq: value.norm_sqr(),
        }
    }
}

/// `C_e = <Π_j S_e^(j)>`.
pub fn correlator(psi: &StateVector, e: &DirectionVector) -> Result<CorrelatorValue> {
    let f = CorrelatorFactors::new(psi.basis(), e)?;
    Ok(CorrelatorValue::from_value(f.expectation(psi.amplitudes())))
}

fn require_one_per_site(basis: &FockBasis) -> Result<()> {
    if basis.kind() != SectorKind::Full || basis.particles() != basis.sites() {
        return Err(Error::InvalidSector(format!(
            "needs the full sector with N = M, got N = {}, M = {}, {:?}",
            basis.particles(),
            basis.sites(),
            basis.kind()
        )));
    }
    Ok(())
}

/// Indices of basis states with one particle per site and `n_b` of them B.
fn one_per_site_indices(basis: &FockBasis, n_b: usize) -> Vec<usize> {
    basis
        .states()
        .iter()
        .enumerate()
        .filter(|(_, s)| (0..basis.sites()).all(|i| s.site_total(i) == 1) && s.n_b() == n_b)
        .map(|(k, _)| k)
        .collect()
}

/// Unnormalized sum of all one-per-site Fock states with the given populations.
#[derive(Debug, Clone)]
pub struct SymmetricState {
    pub amplitudes: Vec<Complex64>,
    pub norm: f64,
}

pub fn build_symmetric_state(basis: &FockBasis, n_a: usize, n_b: usize) -> Result<SymmetricState> {
    require_one_per_site(basis)?;
    if n_a + n_b != basis.sites() {
        return Err(Error::InvalidSector(format!(
            "N_A + N_B = {} must equal M = {}",
            n_a + n_b,
            basis.sites()
        )));
    }
    let mut amplitudes = vec![ZERO; basis.dim()];
    let idx = one_per_site_indices(basis, n_b);
    for &k in &idx {
        amplitudes[k] = Complex64::new(1.0, 0.0);
    }
    Ok(SymmetricState {
        amplitudes,
        norm: (idx.len() as f64).sqrt(),
    })
}

impl SymmetricState {
    pub fn normalized(&self, basis: Arc<FockBasis>) -> Result<StateVector> {
        StateVector::normalized(basis, self.amplitudes.clone())
    }
}

/// Coefficient of the pair `S_{n_a,n_b} + S_{n_b,n_a}` (a single term when `n_a = n_b`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionEntry {
    pub n_a: usize,
    pub n_b: usize,
    pub coefficient: Complex64,
    pub magnitude: f64,
    /// Phase relative to the `(M, 0)` coefficient, in `[0, 2π)`.
    pub phase: f64,
    /// Number of Fock states in the pair.
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub entries: Vec<DecompositionEntry>,
    pub residual: f64,
    /// Set when the residual exceeds 0.05.
    pub flagged: bool,
}

pub const DECOMPOSITION_RESIDUAL_LIMIT: f64 = 0.05;

impl DecompositionReport {
    pub fn entry(&self, n_a: usize, n_b: usize) -> Option<&DecompositionEntry> {
        self.entries.iter().find(|e| e.n_a == n_a && e.n_b == n_b)
    }

    pub fn require_canonical(&self) -> Result<&Self> {
        if self.flagged {
            return Err(Error::InvalidParameter(format!(
                "state is not of symmetric one-per-site form (residual {:.3})",
                self.residual
            )));
        }
        Ok(self)
    }
}

/// Projection plan shared by repeated decompositions on one basis.
#[derive(Debug, Clone)]
pub struct Decomposer {
    pairs: Vec<(usize, usize, Vec<usize>)>,
}

impl Decomposer {
    pub fn new(basis: &FockBasis) -> Result<Self> {
        require_one_per_site(basis)?;
        let m = basis.sites();
        let pairs = (0..=m / 2)
            .map(|n_b| {
                let n_a = m - n_b;
                let mut idx = one_per_site_indices(basis, n_b);
                if n_a != n_b {
                    idx.extend(one_per_site_indices(basis, n_a));
                }
                (n_a, n_b, idx)
            })
            .collect();
        Ok(Self { pairs })
    }

    pub fn column_names(&self) -> (Vec<String>, Vec<String>) {
        let label = |a: usize, b: usize| {
            if a < 10 && b < 10 {
                format!("{a}{b}")
            } else {
                format!("{a}_{b}")
            }
        };
        let phases = self.pairs[1..].iter().map(|(a, b, _)| format!("phi{}", label(*a, *b))).collect();
        let mags = self.pairs.iter().map(|(a, b, _)| format!("c{}", label(*a, *b))).collect();
        (phases, mags)
    }

    pub fn decompose(&self, psi: &[Complex64]) -> DecompositionReport {
        let mut captured = 0.0;
        let mut entries: Vec<DecompositionEntry> = self
            .pairs
            .iter()
            .map(|(n_a, n_b, idx)| {
                let overlap: Complex64 = idx.iter().map(|&k| psi[k]).sum();
                let count = idx.len() as f64;
                captured += overlap.norm_sqr() / count;
                let coefficient = overlap / count;
                DecompositionEntry {
                    n_a: *n_a,
                    n_b: *n_b,
                    coefficient,
                    magnitude: coefficient.norm(),
                    phase: 0.0,
                    multiplicity: idx.len(),
                }
            })
            .collect();
        let reference = entries[0].coefficient;
        for e in &mut entries {
            e.phase = (e.coefficient * reference.conj()).arg().rem_euclid(2.0 * PI);
        }
        entries[0].phase = 0.0;
        let residual = (1.0 - captured).max(0.0);
        DecompositionReport {
            entries,
            residual,
            flagged: residual > DECOMPOSITION_RESIDUAL_LIMIT,
        }
    }
}

pub fn decompose_final_state(psi: &StateVector) -> Result<DecompositionReport> {
    Ok(Decomposer::new(psi.basis())?.decompose(psi.amplitudes()))
}

/// Unnormalized `Σ_k c_k (|S_{M-k,k}> + |S_{k,M-k}>)` for `k <= M/2`, with a
/// single term when `M - k = k`. This is the form the decomposition fits.
pub fn paired_state(basis: &FockBasis, coefficients: &[Complex64]) -> Result<Vec<Complex64>> {
    require_one_per_site(basis)?;
    let m = basis.sites();
    if coefficients.len() != m / 2 + 1 {
        return Err(Error::InvalidParameter(format!(
            "need {} pair coefficients for M = {m}, got {}",
            m / 2 + 1,
            coefficients.len()
        )));
    }
    let mut amps = vec![ZERO; basis.dim()];
    for (n_b, &c) in coefficients.iter().enumerate() {
        for k in one_per_site_indices(basis, n_b) {
            amps[k] = c;
        }
        for k in one_per_site_indices(basis, m - n_b) {
            amps[k] = c;
        }
    }
    Ok(amps)
}

/// Largest entrywise deviation of each phase-state identity on six sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseIdentityCheck {
    /// `(S60+S06)`, `(S51+S15)`, `(S42+S24)` and `S33` expressed through phase states.
    /// The odd pairs use `|π/2> - |3π/2>`: `Σ_k i^{-jk} |kπ/2>` keeps only `n_B ≡ j (mod 4)`.
    pub identities: [f64; 4],
    /// Deviations of the odd-pair identities written with `|π/2> + |3π/2>` instead.
    /// That combination has no weight on odd `n_B`, so these stay at 1/4.
    pub same_sign_variants: [f64; 2],
    /// Paired state with `c = (1, i, 1, i)/8` against `e^{iπ/4}(|0> - i|π>)/√2`.
    pub ghz_form: f64,
}

impl PhaseIdentityCheck {
    pub fn max_deviation(&self) -> f64 {
        self.identities.iter().copied().fold(self.ghz_form, f64::max)
    }
}

pub fn phase_state_identities(basis: &Arc<FockBasis>) -> Result<PhaseIdentityCheck> {
    if basis.sites() != 6 {
        return Err(Error::InvalidSector(format!(
            "the phase-state identities are stated for six sites, got {}",
            basis.sites()
        )));
    }
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let phase = |k: f64| phase_state(basis, k * PI / 6.0).map(|s| s.into_amplitudes());
    // Phase states at multiples of π/6.
    let p = (0..12).map(|k| phase(k as f64)).collect::<Result<Vec<_>>>()?;
    let combo = |terms: &[(Complex64, usize)]| -> Vec<Complex64> {
        let mut out = vec![ZERO; basis.dim()];
        for &(c, k) in terms {
            for (o, a) in out.iter_mut().zip(&p[k]) {
                *o += c * a;
            }
        }
        out
    };
    let pair = |k: usize, scale: f64| -> Result<Vec<Complex64>> {
        let mut c = vec![ZERO; 4];
        c[k] = Complex64::new(scale, 0.0);
        paired_state(basis, &c)
    };
    let dev = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let hex = [0, 6, 2, 4, 8, 10];
    let lhs = [pair(0, 0.75)?, pair(1, 0.5)?, pair(2, 0.75)?, pair(3, 0.5)?];
    let rhs = [
        combo(&hex.map(|k| (one, k))),
        combo(&[(one, 0), (-one, 6), (-i, 3), (i, 9)]),
        combo(&[(2.0 * one, 0), (2.0 * one, 6), (-one, 2), (-one, 4), (-one, 8), (-one, 10)]),
        combo(&[(one, 0), (-one, 6), (i, 3), (-i, 9)]),
    ];
    // Same sign on |π/2> and |3π/2> in the odd-pair identities.
    let same_sign = [
        combo(&[(one, 0), (-one, 6), (-i, 3), (-i, 9)]),
        combo(&[(one, 0), (-one, 6), (i, 3), (i, 9)]),
    ];
    let mut identities = [0.0; 4];
    for k in 0..4 {
        identities[k] = dev(&lhs[k], &rhs[k]);
    }
    let eighth = |c: Complex64| c / 8.0;
    let psi = paired_state(basis, &[eighth(one), eighth(i), eighth(one), eighth(i)])?;
    let g = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, PI / 4.0);
    let ghz = combo(&[(g, 0), (-i * g, 6)]);
    Ok(PhaseIdentityCheck {
        identities,
        same_sign_variants: [dev(&lhs[1], &same_sign[0]), dev(&lhs[3], &same_sign[1])],
        ghz_form: dev(&psi, &ghz),
    })
}

/// `|φ> = Π_j (a†_j + e^{iφ} b†_j)/√2 |0>`.
pub fn phase_state(basis: &Arc<FockBasis>, phi: f64) -> Result<StateVector> {
    require_one_per_site(basis)?;
    let m = basis.sites();
    let mut amps = vec![ZERO; basis.dim()];
    let scale = 2f64.powf(-(m as f64) / 2.0);
    for n_b in 0..=m {
        for k in one_per_site_indices(basis, n_b) {
            amps[k] = Complex64::from_polar(scale, phi * n_b as f64);
        }
    }
    StateVector::new(basis.clone(), amps)
}

/// `(|1..1;0..0> + |0..0;1..1>)/√2`.
pub fn ghz_reference(basis: &Arc<FockBasis>) -> Result<StateVector> {
    require_one_per_site(basis)?;
    let m = basis.sites();
    let mut amps = vec![ZERO; basis.dim()];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for n_b in [0, m] {
        for k in one_per_site_indices(basis, n_b) {
            amps[k] = Complex64::new(h, 0.0);
        }
    }
    StateVector::new(basis.clone(), amps)
}

/// A quantity sampled along a trajectory, possibly producing several columns.
pub trait Observable: Send + Sync {
    fn names(&self) -> Vec<String>;
    fn evaluate(&self, psi: &[Complex64], out: &mut Vec<f64>);
}

struct ExpectationObservable {
    name: String,
    op: SparseOperator,
}

impl Observable for ExpectationObservable {
    fn names(&self) -> Vec<String> {
        vec![self.name.clone()]
    }
    fn evaluate(&self, psi: &[Complex64], out: &mut Vec<f64>) {
        out.push(self.op.expectation(psi).re);
    }
}

struct SiteVariances {
    basis: Arc<FockBasis>,
}

impl Observable for SiteVariances {
    fn names(&self) -> Vec<String> {
        (1..=self.basis.sites()).map(|i| format!("var{i}")).collect()
    }
    fn evaluate(&self, psi: &[Complex64], out: &mut Vec<f64>) {
        let m = self.basis.sites();
        let mut n1 = vec![0.0; m];
        let mut n2 = vec![0.0; m];
        for (a, s) in psi.iter().zip(self.basis.states()) {
            let p = a.norm_sqr();
            for i in 0..m {
                let n = s.site_total(i) as f64;
                n1[i] += p * n;
                n2[i] += p * n * n;
            }
        }
        out.extend((0..m).map(|i| n2[i] - n1[i] * n1[i]));
    }
}

struct CorrelatorObservable {
    factors: CorrelatorFactors,
}

impl Observable for CorrelatorObservable {
    fn names(&self) -> Vec<String> {
        vec!["C2".into()]
    }
    fn evaluate(&self, psi: &[Complex64], out: &mut Vec<f64>) {
        out.push(self.factors.expectation(psi).norm_sqr());
    }
}

struct DecompositionObservable {
    decomposer: Decomposer,
}

impl Observable for DecompositionObservable {
    fn names(&self) -> Vec<String> {
        let (p, c) = self.decomposer.column_names();
        p.into_iter().chain(c).collect()
    }
    fn evaluate(&self, psi: &[Complex64], out: &mut Vec<f64>) {
        let r = self.decomposer.decompose(psi);
        out.extend(r.entries[1..].iter().map(|e| e.phase));
        out.extend(r.entries.iter().map(|e| e.magnitude));
    }
}

/// Ordered collection of observables; column names follow insertion order.
#[derive(Default)]
pub struct ObservableSet {
    items: Vec<Box<dyn Observable>>,
}

impl ObservableSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, o: Box<dyn Observable>) -> &mut Self {
        self.items.push(o);
        self
    }

    pub fn names(&self) -> Vec<String> {
        self.items.iter().flat_map(|o| o.names()).collect()
    }

    pub fn evaluate(&self, psi: &[Complex64]) -> Vec<f64> {
        let mut out = Vec::new();
        for o in &self.items {
            o.evaluate(psi, &mut out);
        }
        out
    }

    pub fn condensate_fraction(basis: &FockBasis) -> Box<dyn Observable> {
        Box::new(ExpectationObservable {
            name: "fc".into(),
            op: condensate_fraction_operator(basis),
        })
    }

    pub fn site_variances(basis: &Arc<FockBasis>) -> Box<dyn Observable> {
        Box::new(SiteVariances {
            basis: basis.clone(),
        })
    }

    pub fn zero_momentum(basis: &FockBasis) -> Box<dyn Observable> {
        Box::new(ExpectationObservable {
            name: "N0".into(),
            op: momentum_number_operator(basis, 0),
        })
    }

    pub fn correlator(basis: &FockBasis, e: &DirectionVector) -> Result<Box<dyn Observable>> {
        Ok(Box::new(CorrelatorObservable {
            factors: CorrelatorFactors::new(basis, e)?,
        }))
    }

    pub fn decomposition(basis: &FockBasis) -> Result<Box<dyn Observable>> {
        Ok(Box::new(DecompositionObservable {
            decomposer: Decomposer::new(basis)?,
        }))
    }

    /// `fc, var1..varM, C2, phi.., c.., N0`; the decomposition columns appear only when N = M.
    pub fn protocol(basis: &Arc<FockBasis>, e: &DirectionVector) -> Result<Self> {
        let mut set = Self::new();
        set.push(Self::condensate_fraction(basis))
            .push(Self::site_variances(basis));
        if basis.kind() == SectorKind::Full {
            set.push(Self::correlator(basis, e)?);
        }
        if basis.kind() == SectorKind::Full && basis.particles() == basis.sites() {
            set.push(Self::decomposition(basis)?);
        }
        set.push(Self::zero_momentum(basis));
        Ok(set)
    }
}
