//! Closed-form dynamics of two bosons on two sites, used to validate the
//! numerical pipeline end to end.
//!
//! Coefficients are listed in the reference ordering
//! `|2,0;0,0>, |1,1;0,0>, |0,2;0,0>, |1,0;1,0>, |1,0;0,1>, |0,1;1,0>,
//! |0,1;0,1>, |0,0;2,0>, |0,0;1,1>, |0,0;0,2>`, which differs from the
//! basis ordering; [`reference_permutation`] maps between them.

use std::f64::consts::SQRT_2;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::band::LatticeParams;
use crate::error::{Error, Result};
use crate::evolution::{ground_state, prepare_spin_coherent, Rk4, SpeciesConstraint, SpinRotation};
use crate::fock::FockBasis;
use crate::hamiltonian::{Boundary, HamiltonianParts};

/// `(a_1, a_2, b_1, b_2)` occupations of the ten reference states.
pub const REFERENCE_STATES: [[u8; 4]; 10] = [
    [2, 0, 0, 0],
    [1, 1, 0, 0],
    [0, 2, 0, 0],
    [1, 0, 1, 0],
    [1, 0, 0, 1],
    [0, 1, 1, 0],
    [0, 1, 0, 1],
    [0, 0, 2, 0],
    [0, 0, 1, 1],
    [0, 0, 0, 2],
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub j: f64,
    pub u_aa: f64,
    pub u_ab: f64,
}

impl OracleParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.j > 0.0 && self.u_aa.is_finite() && self.u_ab.is_finite()) {
            return Err(Error::InvalidParameter(format!("oracle needs J > 0 and finite U, got {self:?}")));
        }
        Ok(())
    }

    pub fn lattice_params(&self) -> LatticeParams {
        LatticeParams {
            j: self.j,
            u_aa: self.u_aa,
            u_bb: self.u_aa,
            u_ab: self.u_ab,
        }
    }

    fn omega(&self, u: f64) -> f64 {
        (64.0 * self.j * self.j + u * u).sqrt()
    }
}

/// Ten coefficients in the reference ordering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub c: [Complex64; 10],
}

impl CoefficientSet {
    pub fn populations(&self) -> [f64; 10] {
        self.c.map(|x| x.norm_sqr())
    }
}

/// Basis index of each reference state.
pub fn reference_permutation(basis: &FockBasis) -> Result<[usize; 10]> {
    if basis.particles() != 2 || basis.sites() != 2 {
        return Err(Error::InvalidSector("reference ordering exists only for N = M = 2".into()));
    }
    let mut out = [0; 10];
    for (w, occ) in REFERENCE_STATES.iter().enumerate() {
        out[w] = basis.find(occ).ok_or_else(|| Error::InvalidSector("basis lacks a reference state".into()))?;
    }
    Ok(out)
}

/// `exp(-i π/2 S_y)` as tabulated in the reference ordering.
pub fn tabulated_rotation_matrix() -> DMatrix<f64> {
    let h = 0.5;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let rows = [
        [h, 0., 0., -r, 0., 0., 0., h, 0., 0.],
        [0., h, 0., 0., -h, -h, 0., 0., h, 0.],
        [0., 0., h, 0., 0., 0., -r, 0., 0., h],
        [r, 0., 0., 0., 0., 0., 0., -r, 0., 0.],
        [0., h, 0., 0., h, -h, 0., 0., -h, 0.],
        [0., h, 0., 0., -h, h, 0., 0., -h, 0.],
        [0., 0., r, 0., 0., 0., 0., 0., 0., -r],
        [h, 0., 0., r, 0., 0., 0., h, 0., 0.],
        [0., h, 0., 0., h, h, 0., 0., h, 0.],
        [0., 0., h, 0., 0., 0., r, 0., 0., h],
    ];
    DMatrix::from_fn(10, 10, |i, j| rows[i][j])
}

/// Same-species block on `{|1>,|2>,|3>}` and inter-species block on `{|4>..|7>}`.
pub fn tabulated_blocks(p: &OracleParams) -> (DMatrix<f64>, DMatrix<f64>) {
    let t = 2.0 * SQRT_2 * p.j;
    let s = 2.0 * p.j;
    let aa = DMatrix::from_row_slice(3, 3, &[p.u_aa, -t, 0.0, -t, 0.0, -t, 0.0, -t, p.u_aa]);
    let ab = DMatrix::from_row_slice(
        4,
        4,
        &[
            p.u_ab, -s, -s, 0.0, //
            -s, 0.0, 0.0, -s, //
            -s, 0.0, 0.0, -s, //
            0.0, -s, -s, p.u_ab,
        ],
    );
    (aa, ab)
}

/// Largest entrywise deviations between the tabulated matrices and the
/// operators the library builds, after reordering to the reference basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableCheck {
    pub rotation: f64,
    pub same_species_block: f64,
    pub inter_species_block: f64,
}

impl TableCheck {
    pub fn max_deviation(&self) -> f64 {
        self.rotation.max(self.same_species_block).max(self.inter_species_block)
    }
}

pub fn table_deviations(p: &OracleParams) -> Result<TableCheck> {
    p.validate()?;
    let basis = FockBasis::full(2, 2)?;
    let perm = reference_permutation(&basis)?;
    let reorder = |m: &DMatrix<Complex64>| DMatrix::from_fn(10, 10, |i, j| m[(perm[i], perm[j])]);
    let dev = |a: &DMatrix<Complex64>, b: &DMatrix<f64>| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - Complex64::new(*y, 0.0)).norm())
            .fold(0.0, f64::max)
    };
    let rotation = reorder(&SpinRotation::new(&basis, std::f64::consts::FRAC_PI_2)?.to_operator().to_dense());
    let h = reorder(
        &HamiltonianParts::build(&basis, Boundary::Periodic)?
            .hamiltonian_at(&p.lattice_params())
            .to_dense(),
    );
    let (aa, ab) = tabulated_blocks(p);
    Ok(TableCheck {
        rotation: dev(&rotation, &tabulated_rotation_matrix()),
        same_species_block: dev(&h.view((0, 0), (3, 3)).into_owned(), &aa),
        inter_species_block: dev(&h.view((3, 3), (4, 4)).into_owned(), &ab),
    })
}

/// Spin-coherent initial coefficients `(2√2, a/2, 2√2, 4, a/2, a/2, 4, 2√2, a/2, 2√2)/√(64 + a²)`.
pub fn initial_coefficients(p: &OracleParams) -> CoefficientSet {
    let a = (p.u_aa + p.omega(p.u_aa)) / p.j;
    let n = (64.0 + a * a).sqrt();
    let v = [2.0 * SQRT_2, a / 2.0, 2.0 * SQRT_2, 4.0, a / 2.0, a / 2.0, 4.0, 2.0 * SQRT_2, a / 2.0, 2.0 * SQRT_2];
    CoefficientSet {
        c: v.map(|x| Complex64::new(x / n, 0.0)),
    }
}

/// Closed-form coefficients at time `t` for `U_AA = U_BB`.
pub fn analytic_state(t: f64, p: &OracleParams) -> CoefficientSet {
    let j = p.j;
    let u = p.u_aa;
    let uab = p.u_ab;
    let w = p.omega(u);
    let op = u + w;
    let om = u - w;
    let wab = p.omega(uab);
    let opab = uab + wab;
    let omab = uab - wab;
    let i = Complex64::new(0.0, 1.0);
    let e = |x: f64| Complex64::from_polar(1.0, x);
    let jj = 64.0 * j * j;

    let c1 = e(-t * om / 2.0) * (2.0 * j / (jj + u * op).sqrt());
    let c2 = e(-t * om / 2.0) * (op.sqrt() / (2.0 * (2.0 * w).sqrt()));
    let c4 = e(-t * opab / 2.0) * (opab - op + e(t * wab) * (op - omab)) * (2.0 * j)
        / (wab * wab * (jj + op * op)).sqrt();
    let c5 = e(-t * uab / 2.0) / (2.0 * (2.0 * wab * wab * (jj + u * op)).sqrt())
        * (op * wab * (t * wab / 2.0).cos() + i * (jj + op * uab) * (t * wab / 2.0).sin());
    CoefficientSet {
        c: [c1, c2, c1, c4, c5, c5, c4, c1, c2, c1],
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleComparison {
    pub params: OracleParams,
    pub dt: f64,
    /// Largest `|c_w^num - c_w^exact|` over all samples.
    pub max_deviation: f64,
    /// 1-based reference index and time of the largest deviation.
    pub worst_index: usize,
    pub worst_time: f64,
    pub times: Vec<f64>,
    pub analytic: Vec<[f64; 10]>,
    pub numeric: Vec<[f64; 10]>,
}

impl OracleComparison {
    pub fn check(&self, tolerance: f64) -> Result<()> {
        if self.max_deviation > tolerance {
            return Err(Error::OracleMismatch {
                index: self.worst_index,
                time: self.worst_time,
                deviation: self.max_deviation,
            });
        }
        Ok(())
    }

    /// Two CSV tables with header `t,|c1|^2,...,|c10|^2`.
    pub fn write_csv(&self, mut analytic: impl Write, mut numeric: impl Write) -> std::io::Result<()> {
        let header = std::iter::once("t".to_string())
            .chain((1..=10).map(|w| format!("|c{w}|^2")))
            .collect::<Vec<_>>()
            .join(",");
        for (w, rows) in [(&mut analytic as &mut dyn Write, &self.analytic), (&mut numeric, &self.numeric)] {
            writeln!(w, "{header}")?;
            for (t, r) in self.times.iter().zip(rows.iter()) {
                write!(w, "{t:.11e}")?;
                for x in r {
                    write!(w, ",{x:.11e}")?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }
}

/// Run ground state, rotation and RK4 for `N = M = 2` and compare with the
/// closed form every `sample_every` steps up to `t_max`.
pub fn oracle_vs_numeric(p: &OracleParams, dt: f64, t_max: f64, sample_every: usize) -> Result<OracleComparison> {
    p.validate()?;
    if !(dt > 0.0 && t_max >= 0.0) || sample_every == 0 {
        return Err(Error::InvalidParameter("oracle needs dt > 0, t_max >= 0, sample_every >= 1".into()));
    }
    let basis = Arc::new(FockBasis::full(2, 2)?);
    let perm = reference_permutation(&basis)?;
    let parts = HamiltonianParts::build(&basis, Boundary::Periodic)?;
    let h = parts.hamiltonian_at(&p.lattice_params());
    let gs = ground_state(&h, &basis, Some(SpeciesConstraint::AllA))?;
    let psi0 = prepare_spin_coherent(&gs.state)?;
    let steps = (t_max / dt).round() as usize;
    let mut psi = psi0.amplitudes().to_vec();
    let mut rk = Rk4::new(psi.len());
    let mut out = OracleComparison {
        params: *p,
        dt,
        max_deviation: 0.0,
        worst_index: 1,
        worst_time: 0.0,
        times: Vec::new(),
        analytic: Vec::new(),
        numeric: Vec::new(),
    };
    for n in 0..=steps {
        if n > 0 {
            rk.step(&h, (n - 1) as f64 * dt, dt, &mut psi);
        }
        if n % sample_every != 0 && n != steps {
            continue;
        }
        let t = n as f64 * dt;
        let exact = analytic_state(t, p);
        let mut num = [0.0; 10];
        for w in 0..10 {
            let c = psi[perm[w]];
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::NonFinite { time: t });
            }
            num[w] = c.norm_sqr();
            let d = (c - exact.c[w]).norm();
            if d > out.max_deviation {
                out.max_deviation = d;
                out.worst_index = w + 1;
                out.worst_time = t;
            }
        }
        out.times.push(t);
        out.analytic.push(exact.populations());
        out.numeric.push(num);
    }
    Ok(out)
}

/// Observed convergence order `log2(err(dt) / err(dt/2))`.
pub fn richardson_order(p: &OracleParams, dt: f64, t_max: f64) -> Result<f64> {
    let coarse = oracle_vs_numeric(p, dt, t_max, 1)?.max_deviation;
    let fine = oracle_vs_numeric(p, dt / 2.0, t_max, 2)?.max_deviation;
    Ok((coarse / fine).log2())
}
