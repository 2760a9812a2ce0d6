//! Lowest Bloch band of `V0 sin^2(x)`, its Wannier function and the resulting
//! Bose-Hubbard parameters.
//!
//! Units: energies in recoil energies, lengths in `1/k_L`, so the lattice
//! period is `π` and the first Brillouin zone is `q ∈ (-1, 1]`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice period in units of `1/k_L`.
pub const PERIOD: f64 = PI;

/// Transverse confinement lengths and scattering lengths, all in `1/k_L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeGeometry {
    pub lx: f64,
    pub ly: f64,
    pub a_aa: f64,
    pub a_bb: f64,
    pub a_ab: f64,
}

/// Scattering length that makes the one-axis twisting of the default
/// six-site ramp reach the GHZ point at `tau = 19100`. See the README.
pub const DEFAULT_SCATTERING_LENGTH: f64 = 0.241;

impl Default for LatticeGeometry {
    fn default() -> Self {
        Self {
            lx: PERIOD,
            ly: PERIOD,
            a_aa: DEFAULT_SCATTERING_LENGTH,
            a_bb: DEFAULT_SCATTERING_LENGTH,
            a_ab: 0.95 * DEFAULT_SCATTERING_LENGTH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpeciesPair {
    AA,
    BB,
    AB,
}

impl LatticeGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lx", self.lx), ("ly", self.ly), ("a_aa", self.a_aa), ("a_bb", self.a_bb), ("a_ab", self.a_ab)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("geometry field {name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// One-dimensional contact coupling `g = 4 a / (Lx Ly)` in `E_R / k_L`.
    pub fn coupling(&self, pair: SpeciesPair) -> f64 {
        let a = match pair {
            SpeciesPair::AA => self.a_aa,
            SpeciesPair::BB => self.a_bb,
            SpeciesPair::AB => self.a_ab,
        };
        4.0 * a / (self.lx * self.ly)
    }
}

/// Plane-wave truncation and quasimomentum sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandSettings {
    pub plane_waves: usize,
    pub quasimomenta: usize,
}

impl Default for BandSettings {
    fn default() -> Self {
        Self {
            plane_waves: 21,
            quasimomenta: 128,
        }
    }
}

impl BandSettings {
    fn validate(&self) -> Result<()> {
        if self.plane_waves % 2 == 0 || self.plane_waves < 3 {
            return Err(Error::InvalidParameter(format!(
                "plane-wave count must be odd and >= 3, got {}",
                self.plane_waves
            )));
        }
        if self.quasimomenta < 4 || self.quasimomenta % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "quasimomentum count must be even and >= 4, got {}",
                self.quasimomenta
            )));
        }
        Ok(())
    }
}

/// Lowest-band energies and gauge-fixed plane-wave coefficients on the grid
/// `q_k = -1 + 2(k+1)/n_q`.
#[derive(Debug, Clone)]
pub struct BlochSpectrum {
    pub v0: f64,
    pub settings: BandSettings,
    pub q: Vec<f64>,
    pub energies: Vec<f64>,
    /// `coefficients[k][l + L]` multiplies `e^{i(q_k + 2l)x}`.
    pub coefficients: Vec<Vec<f64>>,
}

pub fn solve_bands(v0: f64, settings: BandSettings) -> Result<BlochSpectrum> {
    settings.validate()?;
    if !(v0.is_finite() && v0 >= 0.0) {
        return Err(Error::InvalidParameter(format!("lattice depth must be >= 0, got {v0}")));
    }
    let npw = settings.plane_waves;
    let half = (npw / 2) as i64;
    let nq = settings.quasimomenta;
    let q: Vec<f64> = (0..nq).map(|k| -1.0 + 2.0 * (k + 1) as f64 / nq as f64).collect();
    let mut energies = Vec::with_capacity(nq);
    let mut coefficients = Vec::with_capacity(nq);
    for &qk in &q {
        let mut h = DMatrix::<f64>::zeros(npw, npw);
        for i in 0..npw {
            let l = i as i64 - half;
            h[(i, i)] = (qk + 2.0 * l as f64).powi(2) + v0 / 2.0;
            if i + 1 < npw {
                h[(i, i + 1)] = -v0 / 4.0;
                h[(i + 1, i)] = -v0 / 4.0;
            }
        }
        let eig = h
            .try_symmetric_eigen(1e-15, 10_000)
            .ok_or_else(|| Error::EigenSolver(format!("Bloch matrix at q = {qk} did not converge")))?;
        let (imin, emin) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty spectrum");
        let mut c: Vec<f64> = eig.eigenvectors.column(imin).iter().copied().collect();
        // Gauge: the Bloch function is real and positive at x = 0.
        if c.iter().sum::<f64>() < 0.0 {
            c.iter_mut().for_each(|v| *v = -*v);
        }
        energies.push(emin);
        coefficients.push(c);
    }
    Ok(BlochSpectrum {
        v0,
        settings,
        q,
        energies,
        coefficients,
    })
}

impl BlochSpectrum {
    /// Largest deviation between `E_q` and `-Σ_{|n|<=n_max} J(n) cos(nπq)`.
    pub fn reconstruction_residual(&self, n_max: usize) -> Result<f64> {
        let js = (0..=n_max)
            .map(|n| compute_hopping(self, n as i64))
            .collect::<Result<Vec<_>>>()?;
        Ok(self
            .q
            .iter()
            .zip(&self.energies)
            .map(|(&q, &e)| {
                let mut rec = -js[0];
                for (n, j) in js.iter().enumerate().skip(1) {
                    rec -= 2.0 * j * (n as f64 * PI * q).cos();
                }
                (rec - e).abs()
            })
            .fold(0.0, f64::max))
    }
}

/// Hopping `J(n) = -(1/n_q) Σ_q E_q cos(n π q)` between sites `n` apart.
/// `J(0)` is minus the band mean.
pub fn compute_hopping(spectrum: &BlochSpectrum, n: i64) -> Result<f64> {
    let nq = spectrum.q.len();
    if n.unsigned_abs() as usize > nq / 4 {
        return Err(Error::InvalidParameter(format!(
            "hopping distance {n} exceeds n_q/4 = {}",
            nq / 4
        )));
    }
    let s: f64 = spectrum
        .q
        .iter()
        .zip(&spectrum.energies)
        .map(|(&q, &e)| e * (n as f64 * PI * q).cos())
        .sum();
    Ok(-s / nq as f64)
}

/// Spatial sampling of the Wannier function: `±half_width_periods` lattice
/// periods around site 0 with `points_per_period` samples per period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WannierGrid {
    pub half_width_periods: usize,
    pub points_per_period: usize,
}

impl Default for WannierGrid {
    fn default() -> Self {
        Self {
            half_width_periods: 8,
            points_per_period: 64,
        }
    }
}

/// Real Wannier function of the lowest band centred on site 0.
#[derive(Debug, Clone)]
pub struct WannierFunction {
    pub v0: f64,
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    pub dx: f64,
    pub points_per_period: usize,
    /// `max |Im w| / max |Re w|` before the imaginary part was discarded.
    pub imaginary_residual: f64,
}

const TAIL_WARNING: f64 = 1e-6;

pub fn build_wannier(spectrum: &BlochSpectrum) -> Result<WannierFunction> {
    build_wannier_on(spectrum, WannierGrid::default())
}

pub fn build_wannier_on(spectrum: &BlochSpectrum, grid: WannierGrid) -> Result<WannierFunction> {
    if grid.half_width_periods < 5 || grid.points_per_period < 8 {
        return Err(Error::InvalidParameter(format!(
            "Wannier grid must cover >= 5 periods each side with >= 8 points per period, got {grid:?}"
        )));
    }
    let nq = spectrum.q.len();
    let npw = spectrum.settings.plane_waves;
    let half = (npw / 2) as i64;
    let dq = 2.0 / nq as f64;
    // Every wavevector q_k + 2l equals -1 + m dq for one integer m, so the
    // double sum is a single polynomial in z = e^{i dq x}.
    let m_min = 1 - half * nq as i64;
    let m_max = (half + 1) * nq as i64;
    let mut poly = vec![0.0f64; (m_max - m_min + 1) as usize];
    for (k, c) in spectrum.coefficients.iter().enumerate() {
        for (i, &cl) in c.iter().enumerate() {
            let l = i as i64 - half;
            let m = (k as i64 + 1) + l * nq as i64;
            poly[(m - m_min) as usize] += cl;
        }
    }
    let prefactor = (PERIOD / (2.0 * PI)).sqrt() / (2.0 * PI).sqrt() * dq;
    let npts = 2 * grid.half_width_periods * grid.points_per_period + 1;
    let dx = PERIOD / grid.points_per_period as f64;
    let x0 = -(grid.half_width_periods as f64) * PERIOD;
    let x: Vec<f64> = (0..npts).map(|i| x0 + i as f64 * dx).collect();
    let w: Vec<Complex64> = x
        .iter()
        .map(|&xi| {
            let z = Complex64::from_polar(1.0, dq * xi);
            let mut acc = Complex64::new(0.0, 0.0);
            for &c in poly.iter().rev() {
                acc = acc * z + c;
            }
            acc * Complex64::from_polar(prefactor, (m_min as f64 * dq - 1.0) * xi)
        })
        .collect();
    let max_re = w.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    let max_im = w.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    let imaginary_residual = max_im / max_re;
    if !(imaginary_residual < 1e-8) {
        return Err(Error::Gauge(imaginary_residual));
    }
    let out = WannierFunction {
        v0: spectrum.v0,
        x,
        values: w.iter().map(|v| v.re).collect(),
        dx,
        points_per_period: grid.points_per_period,
        imaginary_residual,
    };
    let tail = out.tail_weight(grid.half_width_periods - 1);
    if tail > TAIL_WARNING {
        log::warn!(
            "Wannier function at V0 = {} has weight {tail:.2e} beyond {} periods; widen the grid",
            spectrum.v0,
            grid.half_width_periods - 1
        );
    }
    Ok(out)
}

impl WannierFunction {
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.dx
    }

    /// `∫ w(x) w(x - n d) dx`.
    pub fn overlap(&self, sites: i64) -> f64 {
        self.shifted_product(&[0, sites])
    }

    /// Weight of `|w|^2` farther than `periods` lattice periods from the centre.
    pub fn tail_weight(&self, periods: usize) -> f64 {
        let cut = periods as f64 * PERIOD;
        self.x
            .iter()
            .zip(&self.values)
            .filter(|(x, _)| x.abs() > cut)
            .map(|(_, v)| v * v)
            .sum::<f64>()
            * self.dx
    }

    /// `∫ Π_k w(x - s_k d) dx` by the trapezoid rule on the shared grid.
    fn shifted_product(&self, shifts: &[i64]) -> f64 {
        let n = self.values.len() as i64;
        let p = self.points_per_period as i64;
        let lo = shifts.iter().map(|s| s * p).max().unwrap_or(0).max(0);
        let hi = n + shifts.iter().map(|s| s * p).min().unwrap_or(0).min(0);
        (lo..hi)
            .map(|i| shifts.iter().map(|s| self.values[(i - s * p) as usize]).product::<f64>())
            .sum::<f64>()
            * self.dx
    }
}

/// `g ∫ w(x-x_i) w(x-x_j) w(x-x_k) w(x-x_l) dx` for the site offsets given.
pub fn compute_interaction(
    w: &WannierFunction,
    geometry: &LatticeGeometry,
    pair: SpeciesPair,
    offsets: [i64; 4],
) -> f64 {
    geometry.coupling(pair) * w.shifted_product(&offsets)
}

/// Harmonic-well estimate of the on-site interaction, `g V0^{1/4} / √(2π)`.
pub fn gaussian_interaction(v0: f64, geometry: &LatticeGeometry, pair: SpeciesPair) -> f64 {
    geometry.coupling(pair) * v0.powf(0.25) / (2.0 * PI).sqrt()
}

/// Deep-lattice asymptotic hopping `(4/√π) V0^{3/4} e^{-2√V0}`.
pub fn gaussian_hopping(v0: f64) -> f64 {
    4.0 / PI.sqrt() * v0.powf(0.75) * (-2.0 * v0.sqrt()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub j: f64,
    pub u_aa: f64,
    pub u_bb: f64,
    pub u_ab: f64,
}

/// How the three interaction constants are derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InteractionScenario {
    /// `U_BB = U_AA` and `U_AB = inter_ratio · U_AA`, with `U_AA` from `a_aa`.
    Symmetric { inter_ratio: f64 },
    /// Each constant from its own scattering length.
    Geometry,
}

impl Default for InteractionScenario {
    fn default() -> Self {
        InteractionScenario::Symmetric { inter_ratio: 0.95 }
    }
}

pub fn lattice_params(
    v0: f64,
    geometry: &LatticeGeometry,
    scenario: InteractionScenario,
    settings: BandSettings,
) -> Result<LatticeParams> {
    geometry.validate()?;
    let spectrum = solve_bands(v0, settings)?;
    let w = build_wannier(&spectrum)?;
    let j = compute_hopping(&spectrum, 1)?;
    let u = |pair| compute_interaction(&w, geometry, pair, [0; 4]);
    Ok(match scenario {
        InteractionScenario::Symmetric { inter_ratio } => {
            let u_aa = u(SpeciesPair::AA);
            LatticeParams {
                j,
                u_aa,
                u_bb: u_aa,
                u_ab: inter_ratio * u_aa,
            }
        }
        InteractionScenario::Geometry => LatticeParams {
            j,
            u_aa: u(SpeciesPair::AA),
            u_bb: u(SpeciesPair::BB),
            u_ab: u(SpeciesPair::AB),
        },
    })
}

/// Band quantities at one depth next to their deep-lattice Gaussian estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandDiagnostics {
    pub v0: f64,
    pub j1: f64,
    pub j2: f64,
    pub j_gauss: f64,
    /// `U_0000` for the A-A pair.
    pub u0000: f64,
    /// `U_0001` for the A-A pair: three orbitals on site 0, one on site 1.
    pub u0001: f64,
    pub u_gauss: f64,
    /// Largest `|E_q - Σ_{|n| <= n_q/4} ...|` over the quasimomentum grid.
    pub reconstruction_residual: f64,
}

pub fn band_diagnostics(v0: f64, geometry: &LatticeGeometry, settings: BandSettings) -> Result<BandDiagnostics> {
    geometry.validate()?;
    let spectrum = solve_bands(v0, settings)?;
    let w = build_wannier(&spectrum)?;
    Ok(BandDiagnostics {
        v0,
        j1: compute_hopping(&spectrum, 1)?,
        j2: compute_hopping(&spectrum, 2)?,
        j_gauss: gaussian_hopping(v0),
        u0000: compute_interaction(&w, geometry, SpeciesPair::AA, [0; 4]),
        u0001: compute_interaction(&w, geometry, SpeciesPair::AA, [0, 0, 0, 1]),
        u_gauss: gaussian_interaction(v0, geometry, SpeciesPair::AA),
        reconstruction_residual: spectrum.reconstruction_residual(settings.quasimomenta / 4)?,
    })
}

/// Natural cubic spline through `(x_i, y_i)` with increasing `x`.
#[derive(Debug, Clone)]
struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    /// Not-a-knot end conditions from four points up; natural below that.
    fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let mut m = vec![0.0; n];
        if n >= 4 {
            let mut a = DMatrix::<f64>::zeros(n, n);
            let mut rhs = DVector::<f64>::zeros(n);
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                a[(i, i - 1)] = h0;
                a[(i, i)] = 2.0 * (h0 + h1);
                a[(i, i + 1)] = h1;
                rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            }
            // Continuous third derivative across the second and the second-to-last knot.
            let (h0, h1) = (x[1] - x[0], x[2] - x[1]);
            a[(0, 0)] = h1;
            a[(0, 1)] = -(h0 + h1);
            a[(0, 2)] = h0;
            let (h0, h1) = (x[n - 2] - x[n - 3], x[n - 1] - x[n - 2]);
            a[(n - 1, n - 3)] = h1;
            a[(n - 1, n - 2)] = -(h0 + h1);
            a[(n - 1, n - 1)] = h0;
            if let Some(sol) = a.lu().solve(&rhs) {
                m = sol.iter().copied().collect();
            }
        } else if n == 3 {
            let h0 = x[1] - x[0];
            let h1 = x[2] - x[1];
            let rhs = 6.0 * ((y[2] - y[1]) / h1 - (y[1] - y[0]) / h0);
            m[1] = rhs / (2.0 * (h0 + h1));
        }
        Self { x, y, m }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a.powi(3) - a) * self.m[i] + (b.powi(3) - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Tabulated `(J, U_AA, U_BB, U_AB)` against lattice depth with cubic
/// interpolation (of `ln J` and of the interactions).
#[derive(Debug, Clone)]
pub struct ParamsTable {
    pub depths: Vec<f64>,
    pub rows: Vec<LatticeParams>,
    ln_j: CubicSpline,
    u_aa: CubicSpline,
    u_bb: CubicSpline,
    u_ab: CubicSpline,
}

impl ParamsTable {
    /// Evaluate the band pipeline on `points` evenly spaced depths in `[v_min, v_max]`.
    pub fn build(
        v_min: f64,
        v_max: f64,
        points: usize,
        geometry: &LatticeGeometry,
        scenario: InteractionScenario,
        settings: BandSettings,
    ) -> Result<Self> {
        if !(v_max > v_min && points >= 4) {
            return Err(Error::InvalidParameter(format!(
                "table needs v_max > v_min and >= 4 points, got [{v_min}, {v_max}] x {points}"
            )));
        }
        let depths: Vec<f64> = (0..points)
            .map(|i| v_min + (v_max - v_min) * i as f64 / (points - 1) as f64)
            .collect();
        let rows = params_table(&depths, geometry, scenario, settings)?;
        Self::from_rows(depths, rows)
    }

    pub fn from_rows(depths: Vec<f64>, rows: Vec<LatticeParams>) -> Result<Self> {
        if depths.len() != rows.len() || depths.len() < 2 {
            return Err(Error::InvalidParameter("table rows do not match depths".into()));
        }
        if depths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("table depths must increase".into()));
        }
        if rows.iter().any(|r| !(r.j > 0.0)) {
            return Err(Error::InvalidParameter("tabulated hopping must be positive".into()));
        }
        let col = |f: &dyn Fn(&LatticeParams) -> f64| CubicSpline::new(depths.clone(), rows.iter().map(f).collect());
        Ok(Self {
            ln_j: col(&|r| r.j.ln()),
            u_aa: col(&|r| r.u_aa),
            u_bb: col(&|r| r.u_bb),
            u_ab: col(&|r| r.u_ab),
            depths,
            rows,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.depths[0], *self.depths.last().unwrap())
    }

    pub fn at(&self, v0: f64) -> Result<LatticeParams> {
        let (min, max) = self.range();
        if !(v0 >= min - 1e-12 && v0 <= max + 1e-12) {
            return Err(Error::OutOfTable { depth: v0, min, max });
        }
        Ok(self.at_unchecked(v0))
    }

    pub(crate) fn at_unchecked(&self, v0: f64) -> LatticeParams {
        LatticeParams {
            j: self.ln_j.eval(v0).exp(),
            u_aa: self.u_aa.eval(v0),
            u_bb: self.u_bb.eval(v0),
            u_ab: self.u_ab.eval(v0),
        }
    }

    /// CSV with header `v0,J,U_AA,U_BB,U_AB` and 12 significant digits.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "v0,J,U_AA,U_BB,U_AB")?;
        for (v, r) in self.depths.iter().zip(&self.rows) {
            writeln!(
                w,
                "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
                v, r.j, r.u_aa, r.u_bb, r.u_ab
            )?;
        }
        Ok(())
    }
}

/// Parameters at each depth of `grid`, evaluated in parallel.
pub fn params_table(
    grid: &[f64],
    geometry: &LatticeGeometry,
    scenario: InteractionScenario,
    settings: BandSettings,
) -> Result<Vec<LatticeParams>> {
    grid.par_iter()
        .map(|&v| lattice_params(v, geometry, scenario, settings))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shallow_and_deep_hopping() {
        let s = solve_bands(10.0, BandSettings::default()).unwrap();
        let j = compute_hopping(&s, 1).unwrap();
        assert!((j - 0.0191825).abs() < 2e-6, "J(1) = {j}");
        let j0 = compute_hopping(&s, 0).unwrap();
        let mean = s.energies.iter().sum::<f64>() / s.energies.len() as f64;
        assert!((j0 + mean).abs() < 1e-12);
    }

    #[test]
    fn free_particle_band_is_parabola() {
        let s = solve_bands(0.0, BandSettings::default()).unwrap();
        for (q, e) in s.q.iter().zip(&s.energies) {
            assert!((e - q * q).abs() < 1e-12);
        }
    }

    #[test]
    fn wannier_is_normalized_and_orthogonal() {
        let s = solve_bands(5.0, BandSettings::default()).unwrap();
        let w = build_wannier(&s).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-9, "norm {}", w.norm());
        assert!(w.overlap(1).abs() < 1e-9);
        assert!(w.imaginary_residual < 1e-10);
    }

    #[test]
    fn spline_reproduces_cubic() {
        let x: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        let y: Vec<f64> = x.iter().map(|v| (0.3 * v).sin()).collect();
        let s = CubicSpline::new(x, y);
        assert!((s.eval(3.1) - (0.93f64).sin()).abs() < 1e-5);
    }

    #[test]
    fn table_rejects_out_of_range() {
        let t = ParamsTable::build(3.0, 5.0, 5, &LatticeGeometry::default(), InteractionScenario::default(), BandSettings::default()).unwrap();
        assert!(matches!(t.at(6.0), Err(Error::OutOfTable { .. })));
        let p = t.at(4.0).unwrap();
        assert!((p.u_ab / p.u_aa - 0.95).abs() < 1e-12);
    }
}
