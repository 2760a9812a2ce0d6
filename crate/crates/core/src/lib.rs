//! Exact diagonalization of a two-species Bose-Hubbard ring.
//!
//! The crate covers the full pipeline of a lattice-ramp protocol: Bloch bands
//! and Wannier functions give the Hubbard parameters, a Fock basis and sparse
//! operators give the Hamiltonian, RK4 integrates a linear lattice ramp from a
//! spin-coherent superfluid, and the entanglement correlator `|C_e|^2` is
//! compared against the separability bound `2^{-2M}`.

pub mod band;
pub mod driver;
pub mod error;
pub mod evolution;
pub mod fock;
pub mod hamiltonian;
pub mod lanczos;
pub mod observables;
pub mod oracle;
pub mod protocol;
pub mod separability;
pub mod sparse;
pub mod state;
pub mod symmetry;

pub use error::{Error, Result};
