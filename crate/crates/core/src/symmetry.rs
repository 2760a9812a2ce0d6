//! Fully symmetric subspace under lattice translations, reflection and the
//! species swap `A <-> B`.
//!
//! Each orbit `O` of basis states under the group contributes one basis
//! vector `|O> = |O|^{-1/2} Σ_{s in O} |s>`. A state invariant under the group
//! is represented exactly by its orbit coefficients, and any operator that
//! commutes with the group maps this subspace into itself.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockBasis, SectorKind};
use crate::hamiltonian::Boundary;
use crate::sparse::SparseOperator;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Which symmetry operations generate the group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryGroup {
    pub translations: bool,
    pub reflection: bool,
    pub species_swap: bool,
}

impl SymmetryGroup {
    /// Symmetries of the hopping on the given boundary; the swap is added by the caller
    /// only when `U_AA = U_BB`.
    pub fn lattice(boundary: Boundary, species_swap: bool) -> Self {
        Self {
            translations: boundary == Boundary::Periodic,
            reflection: true,
            species_swap,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SymmetricSubspace {
    group: SymmetryGroup,
    orbit_of: Vec<u32>,
    sizes: Vec<u32>,
    representatives: Vec<usize>,
}

impl SymmetricSubspace {
    pub fn new(basis: &FockBasis, group: SymmetryGroup) -> Result<Self> {
        if group.species_swap {
            let swap_ok = match basis.kind() {
                SectorKind::Full => true,
                SectorKind::Species { n_a, n_b } => n_a == n_b,
            };
            if !swap_ok {
                return Err(Error::InvalidSector(
                    "the species swap needs a swap-invariant sector".into(),
                ));
            }
        }
        let m = basis.sites();
        let dim = basis.dim();
        let mut orbit_of = vec![u32::MAX; dim];
        let mut sizes = Vec::new();
        let mut representatives = Vec::new();
        let mut images: Vec<Vec<u8>> = Vec::new();
        let mut buf = vec![0u8; 2 * m];
        for k in 0..dim {
            if orbit_of[k] != u32::MAX {
                continue;
            }
            let id = sizes.len() as u32;
            let modes = basis.state(k).modes();
            images.clear();
            let shifts = if group.translations { m } else { 1 };
            for shift in 0..shifts {
                for reflect in [false, true] {
                    if reflect && !group.reflection {
                        continue;
                    }
                    for swap in [false, true] {
                        if swap && !group.species_swap {
                            continue;
                        }
                        for site in 0..m {
                            let src = if reflect { (m - 1 - site + shift) % m } else { (site + shift) % m };
                            let (a, b) = (modes[src], modes[m + src]);
                            let (a, b) = if swap { (b, a) } else { (a, b) };
                            buf[site] = a;
                            buf[m + site] = b;
                        }
                        images.push(buf.clone());
                    }
                }
            }
            let mut members: Vec<usize> = images
                .iter()
                .map(|img| basis.find(img).expect("symmetry maps the sector to itself"))
                .collect();
            members.sort_unstable();
            members.dedup();
            for &s in &members {
                orbit_of[s] = id;
            }
            sizes.push(members.len() as u32);
            representatives.push(k);
        }
        Ok(Self {
            group,
            orbit_of,
            sizes,
            representatives,
        })
    }

    pub fn group(&self) -> SymmetryGroup {
        self.group
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn full_dim(&self) -> usize {
        self.orbit_of.len()
    }

    /// Orbit coefficients `c_O = |O|^{-1/2} Σ_{s in O} ψ_s`, together with the
    /// norm of the part of `ψ` outside the subspace.
    pub fn reduce(&self, psi: &[Complex64]) -> (Vec<Complex64>, f64) {
        let mut c = vec![ZERO; self.dim()];
        for (s, &o) in self.orbit_of.iter().enumerate() {
            c[o as usize] += psi[s];
        }
        for (o, v) in c.iter_mut().enumerate() {
            *v /= (self.sizes[o] as f64).sqrt();
        }
        let outside: f64 = psi
            .iter()
            .zip(&self.orbit_of)
            .map(|(p, &o)| (p - c[o as usize] / (self.sizes[o as usize] as f64).sqrt()).norm_sqr())
            .sum::<f64>()
            .sqrt();
        (c, outside)
    }

    pub fn expand_into(&self, c: &[Complex64], psi: &mut [Complex64]) {
        for (p, &o) in psi.iter_mut().zip(&self.orbit_of) {
            *p = c[o as usize] / (self.sizes[o as usize] as f64).sqrt();
        }
    }

    pub fn expand(&self, c: &[Complex64]) -> Vec<Complex64> {
        let mut psi = vec![ZERO; self.full_dim()];
        self.expand_into(c, &mut psi);
        psi
    }

    /// `P A P` in the orbit basis.
    pub fn reduce_operator(&self, op: &SparseOperator) -> SparseOperator {
        let mut t = Vec::with_capacity(op.nnz());
        for s in 0..op.dim() {
            let o = self.orbit_of[s] as usize;
            let ws = (self.sizes[o] as f64).sqrt();
            for (c, v) in op.row(s) {
                let oc = self.orbit_of[c] as usize;
                let wc = (self.sizes[oc] as f64).sqrt();
                t.push((o, oc, v / (ws * wc)));
            }
        }
        let out = SparseOperator::from_triplets(self.dim(), t);
        if op.is_hermitian() {
            out.into_hermitian(1e-12).expect("projection keeps hermiticity")
        } else {
            out
        }
    }

    /// Restriction of a group-invariant diagonal to orbit representatives.
    pub fn reduce_diagonal(&self, d: &[f64]) -> Vec<f64> {
        self.representatives.iter().map(|&k| d[k]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbit_sizes_sum_to_dimension() {
        let b = FockBasis::full(4, 4).unwrap();
        let s = SymmetricSubspace::new(&b, SymmetryGroup::lattice(Boundary::Periodic, true)).unwrap();
        let total: u32 = s.sizes.iter().sum();
        assert_eq!(total as usize, b.dim());
        assert!(s.dim() < b.dim() / 8);
    }

    #[test]
    fn reduce_expand_roundtrip() {
        let b = FockBasis::full(3, 3).unwrap();
        let s = SymmetricSubspace::new(&b, SymmetryGroup::lattice(Boundary::Periodic, true)).unwrap();
        let c: Vec<Complex64> = (0..s.dim()).map(|k| Complex64::new(k as f64, 1.0)).collect();
        let (back, outside) = s.reduce(&s.expand(&c));
        assert!(outside < 1e-12);
        for (x, y) in c.iter().zip(&back) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
