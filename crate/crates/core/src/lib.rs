//! Exact desk-scale implementation of a quantum money scheme built on knots.
//!
//! Money states are superpositions of planar grid diagrams that share an
//! Alexander polynomial; the polynomial doubles as the bill's classical
//! serial number. The crate provides the full pipeline:
//!
//! - [`griddiag`]: grid diagrams, their validity, geometry, and encoding
//! - [`moves`]: the grid moves (cyclic permutation, transposition,
//!   stabilization) that preserve the encoded link
//! - [`alexander`]: exact Alexander polynomial computation and canonical
//!   serial numbers
//! - [`mint`]: the dimension distribution and minting, exact and classical
//! - [`statespace`]: sparse exact state vectors and measurement primitives
//! - [`markov`]: the move Markov chain on labeled configurations and the
//!   averaged verification operator
//! - [`verifier`]: end-to-end verification plus counterfeiting experiments
//!
//! Everything is deterministic given explicit RNG seeds, and all state
//! arithmetic is exact integer or rational work except for IEEE double
//! amplitudes. The crate is `no_std` (with `alloc`); IO, file formats and
//! the command line live in the companion `knotmoney-cli` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod alexander;
pub mod griddiag;
pub mod markov;
pub mod mint;
pub mod moves;
pub mod statespace;
pub mod verifier;

mod util;
