use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockBasis;

/// Normalization tolerance enforced when a state is constructed.
pub const NORM_TOLERANCE: f64 = 1e-8;

/// Amplitudes over a shared Fock basis.
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<FockBasis>,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wrap amplitudes that are already normalized.
    pub fn new(basis: Arc<FockBasis>, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: amps.len(),
            });
        }
        let s = Self { basis, amps };
        let drift = (s.norm() - 1.0).abs();
        if !(drift < NORM_TOLERANCE) {
            return Err(Error::InvalidParameter(format!(
                "state is not normalized (|norm - 1| = {drift:.3e})"
            )));
        }
        Ok(s)
    }

    /// Normalize and wrap. Fails on a zero vector.
    pub fn normalized(basis: Arc<FockBasis>, mut amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidParameter("cannot normalize a zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= n);
        Self::new(basis, amps)
    }

    pub fn basis_state(basis: Arc<FockBasis>, index: usize) -> Result<Self> {
        let mut amps = vec![Complex64::new(0.0, 0.0); basis.dim()];
        *amps.get_mut(index).ok_or(Error::DimensionMismatch {
            expected: basis.dim(),
            found: index,
        })? = Complex64::new(1.0, 0.0);
        Self::new(basis, amps)
    }

    pub(crate) fn from_raw(basis: Arc<FockBasis>, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(basis.dim(), amps.len());
        Self { basis, amps }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`; both states must live on the same basis.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if !Arc::ptr_eq(&self.basis, &other.basis) && self.basis.states() != other.basis.states() {
            return Err(Error::InvalidSector("states live on different bases".into()));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// `<N>` computed from the occupations of every basis state.
    pub fn total_number(&self) -> f64 {
        self.amps
            .iter()
            .zip(self.basis.states())
            .map(|(a, s)| a.norm_sqr() * s.total() as f64)
            .sum()
    }

    /// Rotate the global phase so the largest-modulus amplitude (first one on ties)
    /// is real and positive.
    pub fn fix_gauge(&mut self) {
        let max = self.amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return;
        }
        let pivot = self
            .amps
            .iter()
            .find(|a| a.norm() >= max * (1.0 - 1e-9))
            .copied()
            .expect("max exists");
        let phase = pivot.conj() / pivot.norm();
        self.amps.iter_mut().for_each(|a| *a *= phase);
    }
}
