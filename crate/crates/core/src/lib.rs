//! Classical laboratory for the Gauss-law-constrained lattice Pauli-Fierz Hamiltonian.
//!
//! Everything here is exact linear algebra at small sizes: operator construction,
//! LCU decompositions, two Gauss-law checkers, small-scale dynamics, and literal
//! evaluation of the resource-cost formulas.

pub mod dynamics;
pub mod error;
pub mod estimator;
pub mod gausscheck;
pub mod lattice;
pub mod lcu;
pub mod ops;
pub mod stencils;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
