//! Exact sparse operators on the particle ⊗ field Hilbert space.

pub mod checks;
pub mod field;
pub mod hamiltonian;
pub mod sector;
pub mod space;
pub mod sparse;

pub use field::{dft, local_a, local_e, local_u, op_a, op_e, op_e_sq, op_plaquette, op_u, path_operator};
pub use hamiltonian::{build_h, build_hc, build_hf, build_hf1, build_hf2, build_hpi, Built};
pub use sector::{kernel_basis, sector_basis, SectorBasis};
pub use space::{BasisState, Space};
pub use sparse::SparseOperator;
