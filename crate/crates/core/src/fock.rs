//! Two-species occupation-number basis on an M-site ring.
//!
//! A state is stored as the concatenation `occA ‖ occB` (2M mode occupations).
//! Sites are 0-based. The basis is sorted in descending lexicographic order of
//! `occA ‖ occB`, so index 0 puts every particle on site 0 of species A.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Largest sector the basis will enumerate.
pub const DIMENSION_CAP: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Species {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Create,
    Annihilate,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState {
    occ: Box<[u8]>,
}

impl FockState {
    pub fn new(occ_a: &[u8], occ_b: &[u8]) -> Result<Self> {
        if occ_a.len() != occ_b.len() || occ_a.is_empty() {
            return Err(Error::InvalidSector(format!(
                "species occupation vectors must have equal nonzero length ({} vs {})",
                occ_a.len(),
                occ_b.len()
            )));
        }
        let mut occ = Vec::with_capacity(2 * occ_a.len());
        occ.extend_from_slice(occ_a);
        occ.extend_from_slice(occ_b);
        Ok(Self { occ: occ.into() })
    }

    /// Build from the concatenated `occA ‖ occB` slice.
    pub fn from_modes(modes: &[u8]) -> Result<Self> {
        if modes.is_empty() || modes.len() % 2 != 0 {
            return Err(Error::InvalidSector(format!(
                "mode vector length {} is not 2M",
                modes.len()
            )));
        }
        Ok(Self { occ: modes.into() })
    }

    pub fn sites(&self) -> usize {
        self.occ.len() / 2
    }

    pub fn modes(&self) -> &[u8] {
        &self.occ
    }

    pub fn occ_a(&self) -> &[u8] {
        &self.occ[..self.sites()]
    }

    pub fn occ_b(&self) -> &[u8] {
        &self.occ[self.sites()..]
    }

    pub fn occupation(&self, site: usize, species: Species) -> u8 {
        self.occ[mode_index(self.sites(), site, species)]
    }

    pub fn total(&self) -> usize {
        self.occ.iter().map(|&n| n as usize).sum()
    }

    pub fn n_a(&self) -> usize {
        self.occ_a().iter().map(|&n| n as usize).sum()
    }

    pub fn n_b(&self) -> usize {
        self.occ_b().iter().map(|&n| n as usize).sum()
    }

    pub fn site_total(&self, site: usize) -> usize {
        self.occ_a()[site] as usize + self.occ_b()[site] as usize
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u8]| {
            v.iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "|{};{}>", join(self.occ_a()), join(self.occ_b()))
    }
}

#[inline]
pub fn mode_index(sites: usize, site: usize, species: Species) -> usize {
    match species {
        Species::A => site,
        Species::B => sites + site,
    }
}

/// Result of a single creation or annihilation operator. A zero coefficient
/// comes with `state == None`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderResult {
    pub coefficient: f64,
    pub state: Option<FockState>,
}

/// Apply `a_site` / `a†_site` (or the B-species analogue) to a Fock state.
pub fn apply_ladder(
    state: &FockState,
    site: usize,
    species: Species,
    kind: LadderKind,
) -> Result<LadderResult> {
    let m = state.sites();
    if site >= m {
        return Err(Error::SiteOutOfRange { site, sites: m });
    }
    let idx = mode_index(m, site, species);
    let n = state.occ[idx];
    let mut occ = state.occ.to_vec();
    match kind {
        LadderKind::Annihilate => {
            if n == 0 {
                return Ok(LadderResult {
                    coefficient: 0.0,
                    state: None,
                });
            }
            occ[idx] = n - 1;
            Ok(LadderResult {
                coefficient: (n as f64).sqrt(),
                state: Some(FockState { occ: occ.into() }),
            })
        }
        LadderKind::Create => {
            if n == u8::MAX {
                return Err(Error::Occupancy(format!(
                    "occupation of mode {idx} would exceed {}",
                    u8::MAX
                )));
            }
            occ[idx] = n + 1;
            Ok(LadderResult {
                coefficient: ((n as f64) + 1.0).sqrt(),
                state: Some(FockState { occ: occ.into() }),
            })
        }
    }
}

/// Move one boson from mode `from` to mode `to` in place, returning the matrix
/// element of `b†_to b_from`. Returns `None` if `from` is empty.
#[inline]
pub(crate) fn hop_in_place(occ: &mut [u8], from: usize, to: usize) -> Option<f64> {
    let nf = occ[from];
    if nf == 0 {
        return None;
    }
    if from == to {
        return Some(nf as f64);
    }
    let nt = occ[to];
    occ[from] = nf - 1;
    occ[to] = nt + 1;
    Some(((nf as f64) * (nt as f64 + 1.0)).sqrt())
}

/// Exact `C(n, k)` in 128-bit arithmetic, `None` on overflow.
pub fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Dimension of the full two-species sector, `C(N + 2M - 1, N)`.
pub fn sector_dimension(particles: usize, sites: usize) -> Option<u128> {
    if sites == 0 {
        return Some(if particles == 0 { 1 } else { 0 });
    }
    binomial((particles + 2 * sites - 1) as u128, particles as u128)
}

/// Which part of the N-particle sector a basis covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SectorKind {
    /// Every split of N between the species.
    Full,
    /// Fixed species populations `(N_A, N_B)`.
    Species { n_a: usize, n_b: usize },
}

#[derive(Debug, Clone)]
pub struct FockBasis {
    particles: usize,
    sites: usize,
    kind: SectorKind,
    states: Vec<FockState>,
    lookup: HashMap<Box<[u8]>, usize>,
}

impl FockBasis {
    /// All states with N bosons distributed over the 2M modes.
    pub fn full(particles: usize, sites: usize) -> Result<Self> {
        check_sector(particles, sites)?;
        let dim = sector_dimension(particles, sites).unwrap_or(u128::MAX);
        if dim > DIMENSION_CAP as u128 {
            return Err(Error::DimensionCap {
                particles,
                sites,
                dimension: dim,
                cap: DIMENSION_CAP,
            });
        }
        let mut states = Vec::with_capacity(dim as usize);
        let mut buf = vec![0u8; 2 * sites];
        compositions(particles, &mut buf, 0, &mut |occ| {
            states.push(FockState { occ: occ.into() })
        });
        Ok(Self::from_states(
            particles,
            sites,
            SectorKind::Full,
            states,
        ))
    }

    /// States with exactly `n_a` A bosons and `n_b` B bosons.
    pub fn species(n_a: usize, n_b: usize, sites: usize) -> Result<Self> {
        check_sector(n_a + n_b, sites)?;
        let dim_a = binomial((n_a + sites - 1) as u128, n_a as u128).unwrap_or(u128::MAX);
        let dim_b = binomial((n_b + sites - 1) as u128, n_b as u128).unwrap_or(u128::MAX);
        let dim = dim_a.saturating_mul(dim_b);
        if dim > DIMENSION_CAP as u128 {
            return Err(Error::DimensionCap {
                particles: n_a + n_b,
                sites,
                dimension: dim,
                cap: DIMENSION_CAP,
            });
        }
        let mut a_parts = Vec::new();
        let mut buf = vec![0u8; sites];
        compositions(n_a, &mut buf, 0, &mut |occ| a_parts.push(occ.to_vec()));
        let mut b_parts = Vec::new();
        compositions(n_b, &mut buf, 0, &mut |occ| b_parts.push(occ.to_vec()));
        let mut states = Vec::with_capacity(dim as usize);
        for a in &a_parts {
            for b in &b_parts {
                let mut occ = a.clone();
                occ.extend_from_slice(b);
                states.push(FockState { occ: occ.into() });
            }
        }
        Ok(Self::from_states(
            n_a + n_b,
            sites,
            SectorKind::Species { n_a, n_b },
            states,
        ))
    }

    fn from_states(
        particles: usize,
        sites: usize,
        kind: SectorKind,
        states: Vec<FockState>,
    ) -> Self {
        let lookup = states
            .iter()
            .enumerate()
            .map(|(k, s)| (s.occ.clone(), k))
            .collect();
        Self {
            particles,
            sites,
            kind,
            states,
            lookup,
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn kind(&self) -> SectorKind {
        self.kind
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn state(&self, index: usize) -> &FockState {
        &self.states[index]
    }

    /// Index lookup by raw `occA ‖ occB` slice.
    #[inline]
    pub fn find(&self, modes: &[u8]) -> Option<usize> {
        self.lookup.get(modes).copied()
    }

    pub fn index_of(&self, state: &FockState) -> Result<usize> {
        if state.sites() != self.sites {
            return Err(Error::NotInBasis {
                state: state.to_string(),
                reason: format!("has {} sites, basis has {}", state.sites(), self.sites),
            });
        }
        if state.total() != self.particles {
            return Err(Error::NotInBasis {
                state: state.to_string(),
                reason: format!(
                    "has {} particles, basis has {}",
                    state.total(),
                    self.particles
                ),
            });
        }
        self.find(state.modes()).ok_or_else(|| Error::NotInBasis {
            state: state.to_string(),
            reason: format!("outside the {:?} sector", self.kind),
        })
    }
}

fn check_sector(particles: usize, sites: usize) -> Result<()> {
    if sites == 0 {
        return Err(Error::InvalidSector("the lattice needs at least one site".into()));
    }
    if particles > u8::MAX as usize {
        return Err(Error::InvalidSector(format!(
            "{particles} particles exceeds the per-mode storage limit of {}",
            u8::MAX
        )));
    }
    Ok(())
}

/// Visit every composition of `n` into `buf[pos..]` in descending lexicographic order.
fn compositions(n: usize, buf: &mut [u8], pos: usize, visit: &mut impl FnMut(&[u8])) {
    if pos + 1 == buf.len() {
        buf[pos] = n as u8;
        visit(buf);
        return;
    }
    for k in (0..=n).rev() {
        buf[pos] = k as u8;
        compositions(n - k, buf, pos + 1, visit);
    }
    buf[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_formula() {
        assert_eq!(FockBasis::full(2, 2).unwrap().dim(), 10);
        assert_eq!(FockBasis::full(6, 6).unwrap().dim(), 12376);
        assert_eq!(sector_dimension(6, 6), Some(12376));
        assert_eq!(FockBasis::species(6, 0, 6).unwrap().dim(), 462);
    }

    #[test]
    fn ordering_starts_with_all_on_first_mode() {
        let b = FockBasis::full(2, 2).unwrap();
        assert_eq!(b.state(0).modes(), &[2, 0, 0, 0]);
        assert_eq!(b.state(1).modes(), &[1, 1, 0, 0]);
        assert_eq!(b.state(9).modes(), &[0, 0, 0, 2]);
    }

    #[test]
    fn ladder_examples() {
        let s = FockState::new(&[2, 0], &[0, 0]).unwrap();
        let r = apply_ladder(&s, 0, Species::A, LadderKind::Annihilate).unwrap();
        assert!((r.coefficient - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.state.unwrap().modes(), &[1, 0, 0, 0]);

        let s = FockState::new(&[0, 1], &[0, 0]).unwrap();
        let r = apply_ladder(&s, 0, Species::A, LadderKind::Annihilate).unwrap();
        assert_eq!(r.coefficient, 0.0);
        assert!(r.state.is_none());

        let s = FockState::new(&[1, 0], &[0, 0]).unwrap();
        let r = apply_ladder(&s, 0, Species::B, LadderKind::Create).unwrap();
        assert_eq!(r.coefficient, 1.0);
        assert_eq!(r.state.unwrap().modes(), &[1, 0, 1, 0]);
    }

    #[test]
    fn site_out_of_range_is_rejected() {
        let s = FockState::new(&[1, 0], &[0, 0]).unwrap();
        assert!(matches!(
            apply_ladder(&s, 2, Species::A, LadderKind::Create),
            Err(Error::SiteOutOfRange { .. })
        ));
    }

    #[test]
    fn dimension_cap_is_enforced() {
        assert!(matches!(
            FockBasis::full(20, 10),
            Err(Error::DimensionCap { .. })
        ));
    }

    #[test]
    fn lookup_rejects_wrong_particle_number() {
        let b = FockBasis::full(2, 2).unwrap();
        let s = FockState::new(&[1, 0], &[0, 0]).unwrap();
        assert!(b.index_of(&s).is_err());
        let b = FockBasis::species(2, 0, 2).unwrap();
        let s = FockState::new(&[1, 0], &[1, 0]).unwrap();
        assert!(b.index_of(&s).is_err());
    }
}
