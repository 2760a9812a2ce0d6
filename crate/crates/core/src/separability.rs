//! Numerical audits of the separability bound on the correlator `|C_e|^2`.
//!
//! A site-separable state of `N` bosons on `M` sites is a convex mixture of
//! products of single-site states. Because `S_e^(j)` conserves the occupation
//! of site `j`, each single-site factor can be taken with a definite particle
//! number `n_j`, and is then a vector over `n_B = 0..=n_j` (with `n_A = n_j - n_B`).
//! For such products the correlator factorizes into per-site means, which is
//! what the audits below sample and cross-check against the full Fock space.

use std::sync::Arc;

use nalgebra::{Matrix2, Matrix3, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::hamiltonian::{CorrelatorFactors, DirectionVector};
use crate::sparse::SparseOperator;
use crate::state::StateVector;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Samples handled by one seeded worker; fixes the partition independent of the thread count.
const CHUNK: usize = 256;
/// Largest lattice for which audits also evaluate states in the full Fock space.
pub const FULL_SPACE_SITES: usize = 4;
/// Slack allowed on top of the theorem bounds.
pub const BOUND_SLACK: f64 = 1e-10;

/// Normalized state of one site with a definite number of particles.
/// `amplitudes[k]` multiplies `|n - k, k>` (A count, B count).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteState {
    pub amplitudes: Vec<Complex64>,
}

impl SiteState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter("a site state needs at least one amplitude".into()));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("site state norm^2 = {norm}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    /// `(α a† + β b†)|0>`.
    pub fn qubit(alpha: Complex64, beta: Complex64) -> Result<Self> {
        Self::new(vec![alpha, beta])
    }

    /// One particle with Bloch vector `n` (unit length), so `<S> = n/2`.
    pub fn from_bloch(n: [f64; 3]) -> Self {
        let theta = n[2].clamp(-1.0, 1.0).acos();
        let phi = n[1].atan2(n[0]);
        Self {
            amplitudes: vec![
                Complex64::new((theta / 2.0).cos(), 0.0),
                Complex64::from_polar((theta / 2.0).sin(), phi),
            ],
        }
    }

    pub fn particles(&self) -> usize {
        self.amplitudes.len() - 1
    }

    /// `<a† b>` on this site.
    pub fn coherence(&self) -> Complex64 {
        let n = self.particles();
        (1..=n)
            .map(|k| self.amplitudes[k - 1].conj() * self.amplitudes[k] * (((n - k + 1) * k) as f64).sqrt())
            .sum()
    }

    /// `<n_A - n_B>` on this site.
    pub fn imbalance(&self) -> f64 {
        let n = self.particles() as f64;
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| a.norm_sqr() * (n - 2.0 * k as f64))
            .sum()
    }

    /// `(<S_x>, <S_y>, <S_z>)` with `S_x = Re<a†b>`, `S_y = Im<a†b>`.
    pub fn spin(&self) -> [f64; 3] {
        let c = self.coherence();
        [c.re, c.im, self.imbalance() / 2.0]
    }

    /// `<S_e> = e · <S>`.
    pub fn expectation(&self, e: &DirectionVector) -> Complex64 {
        let s = self.spin();
        e.x * s[0] + e.y * s[1] + e.z * s[2]
    }

    fn random(n: usize, rng: &mut impl Rng) -> Self {
        let mut v: Vec<Complex64> = (0..=n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        Self { amplitudes: v }
    }
}

/// Tensor product of single-site states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductState {
    pub sites: Vec<SiteState>,
}

impl ProductState {
    pub fn new(sites: Vec<SiteState>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidParameter("a product state needs at least one site".into()));
        }
        Ok(Self { sites })
    }

    /// The same single-site state on every site.
    pub fn uniform(site: SiteState, m: usize) -> Result<Self> {
        Self::new(vec![site; m])
    }

    pub fn sites(&self) -> usize {
        self.sites.len()
    }

    pub fn particles(&self) -> usize {
        self.sites.iter().map(SiteState::particles).sum()
    }

    pub fn one_per_site(&self) -> bool {
        self.sites.iter().all(|s| s.particles() == 1)
    }

    pub fn site_expectations(&self, e: &DirectionVector) -> Vec<Complex64> {
        self.sites.iter().map(|s| s.expectation(e)).collect()
    }

    /// `C_e = Π_j <S_e^(j)>`.
    pub fn correlator(&self, e: &DirectionVector) -> Complex64 {
        self.sites.iter().map(|s| s.expectation(e)).product()
    }

    /// Amplitudes in the full `N`-particle basis on `M` sites.
    pub fn to_state(&self, basis: &Arc<FockBasis>) -> Result<StateVector> {
        let m = self.sites();
        if basis.sites() != m || basis.particles() != self.particles() {
            return Err(Error::InvalidSector(format!(
                "product state has N = {}, M = {}; basis has N = {}, M = {}",
                self.particles(),
                m,
                basis.particles(),
                basis.sites()
            )));
        }
        let mut amps = vec![ZERO; basis.dim()];
        let mut occ = vec![0u8; 2 * m];
        let mut ks = vec![0usize; m];
        loop {
            let mut amp = Complex64::new(1.0, 0.0);
            for (j, s) in self.sites.iter().enumerate() {
                let n = s.particles();
                occ[j] = (n - ks[j]) as u8;
                occ[m + j] = ks[j] as u8;
                amp *= s.amplitudes[ks[j]];
            }
            let idx = basis.find(&occ).ok_or_else(|| Error::NotInBasis {
                state: format!("{occ:?}"),
                reason: "product component outside the sector".into(),
            })?;
            amps[idx] = amp;
            // Odometer over the per-site B counts.
            let mut j = 0;
            loop {
                if j == m {
                    return StateVector::new(basis.clone(), amps);
                }
                ks[j] += 1;
                if ks[j] <= self.sites[j].particles() {
                    break;
                }
                ks[j] = 0;
                j += 1;
            }
        }
    }
}

/// One particle per site, each drawn uniformly on the Bloch sphere.
pub fn random_product_state(m: usize, seed: u64) -> ProductState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_product(&vec![1; m], &mut rng)
}

/// Product state with the given per-site occupations and Haar-random site states.
pub fn sample_product(occupations: &[usize], rng: &mut impl Rng) -> ProductState {
    ProductState {
        sites: occupations.iter().map(|&n| SiteState::random(n, rng)).collect(),
    }
}

/// Product state whose per-site Bloch vector maximizes `|e · n|`, giving
/// `|C_e|^2 = (λ_max / 4)^M`, which equals `2^{-2M}` for `λ_max = 1`.
pub fn coherent_product_state(m: usize, e: &DirectionVector) -> Result<ProductState> {
    let g = e.gram();
    let eig = SymmetricEigen::new(Matrix3::from_fn(|i, j| g[i][j]));
    let top = eig.eigenvalues.imax();
    let v = eig.eigenvectors.column(top);
    ProductState::uniform(SiteState::from_bloch([v[0], v[1], v[2]]), m)
}

/// Finite convex combination of product states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableMixture {
    pub weights: Vec<f64>,
    pub components: Vec<ProductState>,
}

impl SeparableMixture {
    pub fn new(weights: Vec<f64>, components: Vec<ProductState>) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(Error::InvalidParameter("mixture needs one weight per component".into()));
        }
        if weights.iter().any(|&p| !(p >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("mixture weights must be >= 0 and sum to 1".into()));
        }
        let (n, m) = (components[0].particles(), components[0].sites());
        if components.iter().any(|c| c.particles() != n || c.sites() != m) {
            return Err(Error::InvalidParameter("mixture components must share N and M".into()));
        }
        Ok(Self { weights, components })
    }

    /// `tr(ρ Π_j S_e^(j)) = Σ_k p_k C_e(component_k)`.
    pub fn correlator(&self, e: &DirectionVector) -> Complex64 {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(p, c)| c.correlator(e) * *p)
            .sum()
    }

    /// The same trace evaluated on full-space state vectors.
    pub fn correlator_full(&self, basis: &Arc<FockBasis>, factors: &CorrelatorFactors) -> Result<Complex64> {
        let mut acc = ZERO;
        for (p, c) in self.weights.iter().zip(&self.components) {
            acc += factors.expectation(c.to_state(basis)?.amplitudes()) * *p;
        }
        Ok(acc)
    }
}

fn sample_mixture(occupations: &[usize], rng: &mut impl Rng) -> SeparableMixture {
    let k = rng.random_range(2..=8usize);
    let mut w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|p| *p /= s);
    SeparableMixture {
        weights: w,
        components: (0..k).map(|_| sample_product(occupations, rng)).collect(),
    }
}

/// Admissibility of `e` and the largest eigenvalue of its Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionCheck {
    pub admissible: bool,
    pub lambda_max: f64,
}

pub fn validate_direction(e: &DirectionVector) -> DirectionCheck {
    DirectionCheck {
        admissible: e.is_admissible(),
        lambda_max: e.lambda_max(),
    }
}

/// `(N / 2M)^{2M}`, the largest `|C_e|^2` of a separable `N`-particle state on `M` sites.
pub fn separability_bound(n: usize, m: usize) -> f64 {
    (n as f64 / (2.0 * m as f64)).powi(2 * m as i32)
}

/// Worst sample found by an audit, with the seed of the worker that drew it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub value: f64,
    pub worker_seed: u64,
    pub sample: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    #[serde(rename = "M")]
    pub m: usize,
    pub e: DirectionVector,
    pub n_samples: usize,
    pub n_mixtures: usize,
    pub max_value: f64,
    pub max_product: f64,
    pub max_mixture: f64,
    /// Largest `|C_e|^2` over products with arbitrary per-site occupations (only for `M = 2`).
    pub max_general_occupation: Option<f64>,
    pub bound: f64,
    /// `bound - max_value`.
    pub margin: f64,
    /// Worst `|C_e^{product formula} - C_e^{full space}|` over the cross-checked samples.
    pub full_space_deviation: f64,
    /// Worst `||Σ p_k C_k| - |tr(ρ C)||` over the cross-checked mixtures.
    pub linearity_deviation: f64,
    pub worst: Violation,
    pub seed: u64,
    pub passed: bool,
}

impl AuditReport {
    pub fn check(&self) -> Result<()> {
        if !self.passed {
            return Err(Error::AuditViolation {
                check: "separability bound".into(),
                value: self.max_value,
                bound: self.bound,
                seed: self.worst.worker_seed,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct ChunkMax {
    value: f64,
    worker_seed: u64,
    sample: usize,
}

impl Default for ChunkMax {
    fn default() -> Self {
        Self {
            value: 0.0,
            worker_seed: 0,
            sample: 0,
        }
    }
}

impl ChunkMax {
    fn push(&mut self, value: f64, worker_seed: u64, sample: usize) {
        if value > self.value {
            *self = Self {
                value,
                worker_seed,
                sample,
            };
        }
    }

    fn merge(self, other: Self) -> Self {
        if other.value > self.value {
            other
        } else {
            self
        }
    }
}

/// Runs `per_sample` on `n` samples split into seeded chunks of `CHUNK`.
/// Chunk `c` draws from `seed + c`, so results do not depend on the thread count.
fn chunked<F>(n: usize, seed: u64, per_sample: F) -> ChunkMax
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    if chunks == 0 {
        return ChunkMax::default();
    }
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let ws = seed.wrapping_add(c as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(ws);
            let mut best = ChunkMax {
                value: f64::NEG_INFINITY,
                worker_seed: ws,
                sample: c * CHUNK,
            };
            for s in c * CHUNK..((c + 1) * CHUNK).min(n) {
                best.push(per_sample(&mut rng), ws, s);
            }
            best
        })
        .reduce(
            || ChunkMax {
                value: f64::NEG_INFINITY,
                worker_seed: seed,
                sample: 0,
            },
            ChunkMax::merge,
        )
}

fn require_audit_size(m: usize) -> Result<()> {
    if m == 0 || m > FULL_SPACE_SITES {
        return Err(Error::InvalidParameter(format!(
            "audits evaluate the full space and need 1 <= M <= {FULL_SPACE_SITES}, got {m}"
        )));
    }
    Ok(())
}

/// Samples `n_samples` one-per-site product states and `n_samples / 10`
/// mixtures of 2 to 8 components, and checks `|C_e|^2 <= 2^{-2M}`.
/// The product formula is cross-checked against full-space expectations on
/// the first samples, and for `M = 2` products with arbitrary per-site
/// occupations are sampled directly in the full space.
pub fn audit_separability_bound(m: usize, e: &DirectionVector, n_samples: usize, seed: u64) -> Result<AuditReport> {
    e.check_admissible()?;
    require_audit_size(m)?;
    let ones = vec![1usize; m];
    let bound = separability_bound(m, m);

    let products = chunked(n_samples, seed, |rng| sample_product(&ones, rng).correlator(e).norm_sqr());
    let n_mixtures = n_samples / 10;
    let mix_seed = seed.wrapping_add(1 << 32);
    let mixtures = chunked(n_mixtures, mix_seed, |rng| sample_mixture(&ones, rng).correlator(e).norm_sqr());

    // Full-space cross-checks on a deterministic subset.
    let basis = Arc::new(FockBasis::full(m, m)?);
    let factors = CorrelatorFactors::new(&basis, e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2 << 32));
    let mut full_space_deviation: f64 = 0.0;
    let mut linearity_deviation: f64 = 0.0;
    for _ in 0..32 {
        let p = sample_product(&ones, &mut rng);
        let full = factors.expectation(p.to_state(&basis)?.amplitudes());
        full_space_deviation = full_space_deviation.max((full - p.correlator(e)).norm());
        let mix = sample_mixture(&ones, &mut rng);
        let full = mix.correlator_full(&basis, &factors)?;
        linearity_deviation = linearity_deviation.max((full.norm() - mix.correlator(e).norm()).abs());
    }

    let max_general_occupation = if m == 2 {
        let general_seed = seed.wrapping_add(3 << 32);
        let splits: Vec<[usize; 2]> = (0..=m).map(|n1| [n1, m - n1]).collect();
        let best = chunked(n_samples / 10, general_seed, |rng| {
            let occ = splits[rng.random_range(0..splits.len())];
            let k = rng.random_range(1..=8usize);
            let mut w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|p| *p /= s);
            let mut acc = ZERO;
            for p in w {
                let st = sample_product(&occ, rng).to_state(&basis).expect("sector matches");
                acc += factors.expectation(st.amplitudes()) * p;
            }
            acc.norm_sqr()
        });
        Some(best.value)
    } else {
        None
    };

    let worst = products.merge(mixtures);
    let max_value = worst.value.max(max_general_occupation.unwrap_or(0.0));
    let passed = max_value <= bound + BOUND_SLACK && full_space_deviation < 1e-12 && linearity_deviation < 1e-12;
    Ok(AuditReport {
        m,
        e: *e,
        n_samples,
        n_mixtures,
        max_value,
        max_product: products.value,
        max_mixture: mixtures.value,
        max_general_occupation,
        bound,
        margin: bound - max_value,
        full_space_deviation,
        linearity_deviation,
        worst: Violation {
            value: worst.value,
            worker_seed: worst.worker_seed,
            sample: worst.sample,
        },
        seed,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    #[serde(rename = "M")]
    pub m: usize,
    pub e: DirectionVector,
    pub n_samples: usize,
    /// Largest `Σ_j |<S_e^(j)>|` over the samples.
    pub max_sum: f64,
    /// `N / 2` with `N = M`.
    pub bound: f64,
    pub margin: f64,
    /// Largest `(Π_j |<S_e^(j)>|)^{1/M} - (1/M) Σ_j |<S_e^(j)>|`; never positive.
    pub max_mean_gap: f64,
    pub worst: Violation,
    pub seed: u64,
    pub passed: bool,
}

impl LemmaReport {
    pub fn check(&self) -> Result<()> {
        if !self.passed {
            return Err(Error::AuditViolation {
                check: "site-mean sum".into(),
                value: self.max_sum,
                bound: self.bound,
                seed: self.worst.worker_seed,
            });
        }
        Ok(())
    }
}

/// Checks `Σ_j |<S_e^(j)>| <= M/2` and the geometric-arithmetic mean step on
/// one-per-site product states.
pub fn audit_lemma(m: usize, e: &DirectionVector, n_samples: usize, seed: u64) -> Result<LemmaReport> {
    e.check_admissible()?;
    if m == 0 {
        return Err(Error::InvalidParameter("M must be >= 1".into()));
    }
    let ones = vec![1usize; m];
    let sums = chunked(n_samples, seed, |rng| {
        sample_product(&ones, rng)
            .site_expectations(e)
            .iter()
            .map(|c| c.norm())
            .sum()
    });
    let gaps = chunked(n_samples, seed, |rng| {
        let mods: Vec<f64> = sample_product(&ones, rng)
            .site_expectations(e)
            .iter()
            .map(|c| c.norm())
            .collect();
        let geo = mods.iter().product::<f64>().powf(1.0 / m as f64);
        let arith = mods.iter().sum::<f64>() / m as f64;
        geo - arith
    });
    let bound = m as f64 / 2.0;
    let max_mean_gap = if n_samples == 0 { 0.0 } else { gaps.value };
    Ok(LemmaReport {
        m,
        e: *e,
        n_samples,
        max_sum: sums.value,
        bound,
        margin: bound - sums.value,
        max_mean_gap,
        worst: Violation {
            value: sums.value,
            worker_seed: sums.worker_seed,
            sample: sums.sample,
        },
        seed,
        passed: sums.value <= bound + BOUND_SLACK && max_mean_gap <= 1e-12,
    })
}

/// Largest `|C_e|^2` found over the two-branch family and by random hill climbing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchResult {
    #[serde(rename = "M")]
    pub m: usize,
    pub e: DirectionVector,
    /// Maximum over `sin θ |d..d> + e^{iφ} cos θ |u..u>`.
    pub family_max: f64,
    pub theta: f64,
    pub phi: f64,
    /// Maximum over `φ` at `θ = π/4`.
    pub value_at_quarter_pi: f64,
    /// Best value reached by hill climbing over arbitrary states.
    pub hill_climb_max: f64,
    pub value: f64,
    pub seed: u64,
    #[serde(skip)]
    pub state: Option<StateVector>,
}

/// True when `Re e` and `Im e` are orthonormal, i.e. `e` is a rotation of `(1, i, 0)`.
pub fn is_raising_family(e: &DirectionVector) -> bool {
    let c = e.components();
    let dot = |f: &dyn Fn(Complex64) -> f64, g: &dyn Fn(Complex64) -> f64| c.iter().map(|z| f(*z) * g(*z)).sum::<f64>();
    let re = |z: Complex64| z.re;
    let im = |z: Complex64| z.im;
    (dot(&re, &re) - 1.0).abs() < 1e-12 && (dot(&im, &im) - 1.0).abs() < 1e-12 && dot(&re, &im).abs() < 1e-12
}

/// Branch states `(u, d)` from the top singular pair of the single-site
/// matrix of `S_e`: `S_e ≈ s |u><d|`. For `e` obtained from `(1, i, 0)` by a
/// rotation this is exact, and `u ⊥ d`.
pub fn branch_states(e: &DirectionVector) -> ([Complex64; 2], [Complex64; 2]) {
    let half = Complex64::new(0.5, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let s = Matrix2::new(
        e.z * half,
        (e.x - i * e.y) * half,
        (e.x + i * e.y) * half,
        -e.z * half,
    );
    let svd = s.svd(true, true);
    let k = svd.singular_values.imax();
    let u = svd.u.expect("requested").column(k).into_owned();
    let d = svd.v_t.expect("requested").row(k).adjoint();
    ([u[0], u[1]], [d[0], d[1]])
}

fn family_state(
    basis: &Arc<FockBasis>,
    up: &ProductState,
    down: &ProductState,
    theta: f64,
    phi: f64,
) -> Result<StateVector> {
    let a = down.to_state(basis)?;
    let b = up.to_state(basis)?;
    let w = Complex64::from_polar(theta.cos(), phi);
    let amps = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x * theta.sin() + y * w)
        .collect();
    StateVector::normalized(basis.clone(), amps)
}

fn expectation_sq(op: &SparseOperator, psi: &[Complex64]) -> f64 {
    op.expectation(psi).norm_sqr()
}

/// Scans the two-branch family on a `θ` grid containing `π/4` and a `φ`
/// grid, then runs `restarts` random hill climbs over the full space as a
/// falsification attempt on the maximum `1/4`.
pub fn max_correlator_search(m: usize, e: &DirectionVector, seed: u64, restarts: usize) -> Result<SearchResult> {
    e.check_admissible()?;
    require_audit_size(m)?;
    let basis = Arc::new(FockBasis::full(m, m)?);
    let op = CorrelatorFactors::new(&basis, e)?.product()?;
    let (u, d) = branch_states(e);
    let up = ProductState::uniform(SiteState::qubit(u[0], u[1])?, m)?;
    let down = ProductState::uniform(SiteState::qubit(d[0], d[1])?, m)?;

    const THETAS: usize = 180;
    const PHIS: usize = 72;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let mut at_quarter: f64 = 0.0;
    for it in 0..=THETAS {
        let theta = it as f64 * std::f64::consts::FRAC_PI_2 / THETAS as f64;
        for ip in 0..PHIS {
            let phi = ip as f64 * std::f64::consts::TAU / PHIS as f64;
            let psi = family_state(&basis, &up, &down, theta, phi)?;
            let v = expectation_sq(&op, psi.amplitudes());
            if v > best.0 {
                best = (v, theta, phi);
            }
            if it == THETAS / 2 {
                at_quarter = at_quarter.max(v);
            }
        }
    }
    let (family_max, theta, phi) = best;
    let state = family_state(&basis, &up, &down, theta, phi)?;

    let climbs: Vec<f64> = (0..restarts)
        .into_par_iter()
        .map(|r| hill_climb(&op, basis.dim(), seed.wrapping_add(r as u64), 3000))
        .collect();
    let hill_climb_max = climbs.into_iter().fold(0.0, f64::max);

    Ok(SearchResult {
        m,
        e: *e,
        family_max,
        theta,
        phi,
        value_at_quarter_pi: at_quarter,
        hill_climb_max,
        value: family_max.max(hill_climb_max),
        seed,
        state: Some(state),
    })
}

/// Greedy random search for the largest `|<ψ|O|ψ>|^2` over normalized `ψ`.
fn hill_climb(op: &SparseOperator, dim: usize, seed: u64, iterations: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = |rng: &mut ChaCha8Rng| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let normalize = |v: &mut Vec<Complex64>| {
        let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= n);
    };
    let mut psi: Vec<Complex64> = (0..dim).map(|_| normal(&mut rng)).collect();
    normalize(&mut psi);
    let mut value = expectation_sq(op, &psi);
    let mut step = 0.3;
    for _ in 0..iterations {
        let mut trial: Vec<Complex64> = psi.iter().map(|a| a + normal(&mut rng) * step).collect();
        normalize(&mut trial);
        let v = expectation_sq(op, &trial);
        if v > value {
            psi = trial;
            value = v;
            step = (step * 1.2).min(1.0);
        } else {
            step = (step * 0.97).max(1e-4);
        }
    }
    value
}
