//! Bose-Hubbard operator pieces, spin operators and the lattice-depth ramp.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::band::LatticeParams;
use crate::error::{Error, Result};
use crate::fock::{hop_in_place, mode_index, FockBasis, SectorKind, Species};
use crate::sparse::SparseOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

/// Bonds `(i, i+1)` of the chain. With periodic boundaries the closing bond
/// `(M-1, 0)` is included, so on two sites the single bond appears twice.
pub fn bonds(sites: usize, boundary: Boundary) -> Vec<(usize, usize)> {
    match boundary {
        Boundary::Periodic => (0..sites).map(|i| (i, (i + 1) % sites)).collect(),
        Boundary::Open => (0..sites.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
    }
}

/// The hopping operator `T = Σ_bonds Σ_σ (σ†_i σ_j + σ†_j σ_i)`, so that the
/// kinetic term is `-J T`.
pub fn build_hopping(basis: &FockBasis, boundary: Boundary) -> Result<SparseOperator> {
    let m = basis.sites();
    if m < 2 {
        return Err(Error::InvalidSector("hopping needs at least two sites".into()));
    }
    let bond_list = bonds(m, boundary);
    let mut triplets = Vec::new();
    let mut buf = vec![0u8; 2 * m];
    for (col, state) in basis.states().iter().enumerate() {
        for &(i, j) in &bond_list {
            for species in [Species::A, Species::B] {
                let (mi, mj) = (mode_index(m, i, species), mode_index(m, j, species));
                for (from, to) in [(mj, mi), (mi, mj)] {
                    buf.copy_from_slice(state.modes());
                    if let Some(amp) = hop_in_place(&mut buf, from, to) {
                        let row = basis.find(&buf).expect("hopping preserves the sector");
                        triplets.push((row, col, Complex64::new(amp, 0.0)));
                    }
                }
            }
        }
    }
    SparseOperator::from_triplets(basis.dim(), triplets).into_hermitian(1e-14)
}

/// Diagonals of the three on-site interaction operators:
/// `Σ n^A(n^A-1)/2`, `Σ n^B(n^B-1)/2` and `Σ n^A n^B`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionDiagonals {
    pub aa: Vec<f64>,
    pub bb: Vec<f64>,
    pub ab: Vec<f64>,
}

pub fn build_interaction(basis: &FockBasis) -> InteractionDiagonals {
    let m = basis.sites();
    let pair = |n: u8| (n as f64) * (n as f64 - 1.0) / 2.0;
    let mut out = InteractionDiagonals {
        aa: Vec::with_capacity(basis.dim()),
        bb: Vec::with_capacity(basis.dim()),
        ab: Vec::with_capacity(basis.dim()),
    };
    for s in basis.states() {
        let (a, b) = (s.occ_a(), s.occ_b());
        out.aa.push(a.iter().map(|&n| pair(n)).sum());
        out.bb.push(b.iter().map(|&n| pair(n)).sum());
        out.ab.push((0..m).map(|i| a[i] as f64 * b[i] as f64).sum());
    }
    out
}

impl InteractionDiagonals {
    pub fn operators(&self) -> [SparseOperator; 3] {
        [
            SparseOperator::from_real_diagonal(&self.aa),
            SparseOperator::from_real_diagonal(&self.bb),
            SparseOperator::from_real_diagonal(&self.ab),
        ]
    }

    /// Diagonal of `U_AA·aa + U_BB·bb + U_AB·ab`.
    pub fn combined(&self, p: &LatticeParams) -> Vec<f64> {
        (0..self.aa.len())
            .map(|k| p.u_aa * self.aa[k] + p.u_bb * self.bb[k] + p.u_ab * self.ab[k])
            .collect()
    }
}

/// Precomputed hopping and interaction pieces for one basis.
#[derive(Debug, Clone)]
pub struct HamiltonianParts {
    pub hopping: SparseOperator,
    pub interaction: InteractionDiagonals,
    pub boundary: Boundary,
}

impl HamiltonianParts {
    pub fn build(basis: &FockBasis, boundary: Boundary) -> Result<Self> {
        Ok(Self {
            hopping: build_hopping(basis, boundary)?,
            interaction: build_interaction(basis),
            boundary,
        })
    }

    pub fn dim(&self) -> usize {
        self.hopping.dim()
    }

    /// `H = -J T + U_AA Σ n^A(n^A-1)/2 + U_BB Σ n^B(n^B-1)/2 + U_AB Σ n^A n^B`.
    pub fn hamiltonian_at(&self, p: &LatticeParams) -> SparseOperator {
        let diag = SparseOperator::from_real_diagonal(&self.interaction.combined(p));
        let mut h = SparseOperator::linear_combination(&[
            (Complex64::new(-p.j, 0.0), &self.hopping),
            (Complex64::new(1.0, 0.0), &diag),
        ])
        .expect("pieces share the basis dimension");
        debug_assert!(h.hermiticity_residual() < 1e-12);
        h = h.into_hermitian(1e-12).expect("real symmetric pieces");
        h
    }
}

/// Linear lattice-depth ramp `V0(t) = V_i + (V_f - V_i) t / tau`, held at the
/// end points outside `[0, tau]`. A zero `tau` means no evolution at all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampSchedule {
    pub v_initial: f64,
    pub v_final: f64,
    pub tau: f64,
}

impl RampSchedule {
    pub fn new(v_initial: f64, v_final: f64, tau: f64) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("ramp time must be >= 0, got {tau}")));
        }
        if !(v_initial >= 0.0 && v_final >= 0.0 && v_initial.is_finite() && v_final.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lattice depths must be finite and >= 0, got {v_initial} -> {v_final}"
            )));
        }
        Ok(Self {
            v_initial,
            v_final,
            tau,
        })
    }

    pub fn depth_at(&self, t: f64) -> f64 {
        if self.tau == 0.0 || t >= self.tau {
            return self.v_final;
        }
        if t <= 0.0 {
            return self.v_initial;
        }
        self.v_initial + (self.v_final - self.v_initial) * t / self.tau
    }

    pub fn depth_range(&self) -> (f64, f64) {
        (self.v_initial.min(self.v_final), self.v_initial.max(self.v_final))
    }
}

/// Complex direction `e` defining `S_e = e_x S_x + e_y S_y + e_z S_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionVector {
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
}

impl DirectionVector {
    pub fn new(x: Complex64, y: Complex64, z: Complex64) -> Self {
        Self { x, y, z }
    }

    /// `e = (1, i, 0)`, giving `S_e = S_+`.
    pub fn raising() -> Self {
        Self::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
        )
    }

    /// `e = (0, 1, i)`, giving `S_e = S_y + i S_z`.
    pub fn rotated_raising() -> Self {
        Self::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
        )
    }

    pub fn axis(axis: SpinAxis) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match axis {
            SpinAxis::X => Self::new(one, zero, zero),
            SpinAxis::Y => Self::new(zero, one, zero),
            SpinAxis::Z => Self::new(zero, zero, one),
        }
    }

    pub fn components(&self) -> [Complex64; 3] {
        [self.x, self.y, self.z]
    }

    /// `Re e Re e^T + Im e Im e^T`.
    pub fn gram(&self) -> [[f64; 3]; 3] {
        let e = self.components();
        let mut g = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = e[i].re * e[j].re + e[i].im * e[j].im;
            }
        }
        g
    }

    /// Largest eigenvalue of the Gram matrix, from the closed-form cubic.
    pub fn lambda_max(&self) -> f64 {
        symmetric3_max_eigenvalue(&self.gram())
    }

    pub fn is_admissible(&self) -> bool {
        self.lambda_max() <= 1.0 + 1e-12
    }

    pub fn check_admissible(&self) -> Result<()> {
        let lambda_max = self.lambda_max();
        if lambda_max > 1.0 + 1e-12 {
            return Err(Error::InadmissibleDirection { lambda_max });
        }
        Ok(())
    }
}

/// Largest eigenvalue of a real symmetric 3x3 matrix (trigonometric solution).
pub fn symmetric3_max_eigenvalue(a: &[[f64; 3]; 3]) -> f64 {
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let tr = a[0][0] + a[1][1] + a[2][2];
    if p1 == 0.0 {
        return a[0][0].max(a[1][1]).max(a[2][2]);
    }
    let q = tr / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = *a;
    for (i, row) in b.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (*v - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    q + 2.0 * p * phi.cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpinAxis {
    X,
    Y,
    Z,
}

fn require_full_sector(basis: &FockBasis) -> Result<()> {
    match basis.kind() {
        SectorKind::Full => Ok(()),
        SectorKind::Species { .. } => Err(Error::InvalidSector(
            "spin-flip operators need the full N-particle sector".into(),
        )),
    }
}

/// Triplets of `S_e^(j)` on one site without the admissibility check.
fn site_spin_triplets(
    basis: &FockBasis,
    site: usize,
    e: &DirectionVector,
    out: &mut Vec<(usize, usize, Complex64)>,
) {
    let m = basis.sites();
    let half = Complex64::new(0.5, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let c_up = (e.x - i * e.y) * half; // a†b
    let c_down = (e.x + i * e.y) * half; // b†a
    let (ma, mb) = (mode_index(m, site, Species::A), mode_index(m, site, Species::B));
    let mut buf = vec![0u8; 2 * m];
    for (col, state) in basis.states().iter().enumerate() {
        let nz = state.modes()[ma] as f64 - state.modes()[mb] as f64;
        if e.z != Complex64::new(0.0, 0.0) && nz != 0.0 {
            out.push((col, col, e.z * half * nz));
        }
        for (from, to, coef) in [(mb, ma, c_up), (ma, mb, c_down)] {
            if coef == Complex64::new(0.0, 0.0) {
                continue;
            }
            buf.copy_from_slice(state.modes());
            if let Some(amp) = hop_in_place(&mut buf, from, to) {
                let row = basis.find(&buf).expect("spin flip stays in the full sector");
                out.push((row, col, coef * amp));
            }
        }
    }
}

/// `S_e^(j) = e · S^(j)` on one site.
pub fn build_site_spin(basis: &FockBasis, site: usize, e: &DirectionVector) -> Result<SparseOperator> {
    e.check_admissible()?;
    require_full_sector(basis)?;
    if site >= basis.sites() {
        return Err(Error::SiteOutOfRange {
            site,
            sites: basis.sites(),
        });
    }
    let mut t = Vec::new();
    site_spin_triplets(basis, site, e, &mut t);
    Ok(SparseOperator::from_triplets(basis.dim(), t))
}

/// Collective `S_x`, `S_y` or `S_z` summed over all sites.
pub fn build_collective_spin(basis: &FockBasis, axis: SpinAxis) -> Result<SparseOperator> {
    if axis != SpinAxis::Z {
        require_full_sector(basis)?;
    }
    let e = DirectionVector::axis(axis);
    let mut t = Vec::new();
    for j in 0..basis.sites() {
        site_spin_triplets(basis, j, &e, &mut t);
    }
    SparseOperator::from_triplets(basis.dim(), t).into_hermitian(1e-14)
}

/// The single-site factors of the correlator `Π_j S_e^(j)`.
#[derive(Debug, Clone)]
pub struct CorrelatorFactors {
    pub direction: DirectionVector,
    pub factors: Vec<SparseOperator>,
}

impl CorrelatorFactors {
    pub fn new(basis: &FockBasis, e: &DirectionVector) -> Result<Self> {
        let factors = (0..basis.sites())
            .map(|j| build_site_spin(basis, j, e))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            direction: *e,
            factors,
        })
    }

    /// `<psi| Π_j S_e^(j) |psi>`, applying the factors one at a time.
    pub fn expectation(&self, psi: &[Complex64]) -> Complex64 {
        let mut x = psi.to_vec();
        let mut y = vec![Complex64::new(0.0, 0.0); psi.len()];
        for f in self.factors.iter().rev() {
            f.apply_into(&x, &mut y);
            std::mem::swap(&mut x, &mut y);
        }
        psi.iter().zip(&x).map(|(a, b)| a.conj() * b).sum()
    }

    /// The assembled product operator.
    pub fn product(&self) -> Result<SparseOperator> {
        let mut acc = self.factors[0].clone();
        for f in &self.factors[1..] {
            acc = acc.matmul(f)?;
        }
        Ok(acc)
    }
}

pub fn build_correlator_operator(basis: &FockBasis, e: &DirectionVector) -> Result<SparseOperator> {
    CorrelatorFactors::new(basis, e)?.product()
}
