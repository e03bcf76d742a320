//! Gauss-law sector enumeration.

use std::collections::HashMap;

use super::space::Space;
use crate::error::{Error, Result};
use crate::gausscheck::{cube_charges, FluxStencil};
use crate::lattice::{CellCharge, LatticeSpec};
use crate::C64;

/// Largest scan the enumerators will attempt.
pub const SCAN_BUDGET: usize = 1 << 24;

/// Zero-residual basis states of a space, as sorted dense indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    pub space_dim: usize,
    pub members: Vec<usize>,
    position: HashMap<usize, usize>,
}

impl SectorBasis {
    pub fn from_members(space_dim: usize, members: Vec<usize>) -> Self {
        let position = members.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        SectorBasis { space_dim, members, position }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
    pub fn contains(&self, idx: usize) -> bool {
        self.position.contains_key(&idx)
    }
    pub fn position(&self, idx: usize) -> Option<usize> {
        self.position.get(&idx).copied()
    }

    /// Sector amplitudes lifted to the full space.
    pub fn embed(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.space_dim];
        for (&m, &a) in self.members.iter().zip(v) {
            out[m] = a;
        }
        out
    }

    /// Full-space vector restricted to the sector.
    pub fn restrict(&self, v: &[C64]) -> Vec<C64> {
        self.members.iter().map(|&m| v[m]).collect()
    }

    /// ‖(1 − P)ψ‖₂.
    pub fn leakage(&self, v: &[C64]) -> f64 {
        v.iter()
            .enumerate()
            .filter(|(i, _)| !self.contains(*i))
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

fn charge_keys(spec: &LatticeSpec, charges: &[CellCharge]) -> Result<Vec<(usize, i64)>> {
    charges
        .iter()
        .map(|c| {
            spec.check_cell(&c.cell)?;
            Ok((spec.cell_index(&c.cell), c.charge))
        })
        .collect()
}

/// Field configurations with zero residual everywhere for a fixed charge
/// placement (the spec's static charges are included). Indices refer to
/// `Space::field_only(spec)`.
pub fn sector_basis(spec: &LatticeSpec, charges: &[CellCharge]) -> Result<SectorBasis> {
    let (dim, _) = field_dim_checked(spec)?;
    let space = Space::field_only(spec)?;
    let mut all = spec.static_charges.clone();
    all.extend_from_slice(charges);
    let enclosed = cube_charges(spec, &charge_keys(spec, &all)?, spec.flux_order);
    let st = FluxStencil::new(spec, spec.flux_order)?;
    let members = (0..dim).filter(|&idx| st.satisfied(&enclosed, |l| space.link_level(idx, l))).collect();
    Ok(SectorBasis::from_members(dim, members))
}

fn field_dim_checked(spec: &LatticeSpec) -> Result<(usize, f64)> {
    let est = (spec.link_dim() as f64).powi(spec.n_links() as i32);
    if est > SCAN_BUDGET as f64 {
        return Err(Error::Resource(format!("sector scan over {est:.3e} field states exceeds budget {SCAN_BUDGET}")));
    }
    Ok((est as usize, est))
}

/// Per-index "Gauss law satisfied" flags on a full space (particles contribute
/// their charges at their current cells).
pub fn constraint_diagonal(space: &Space) -> Result<Vec<bool>> {
    let spec = &space.spec;
    let st = FluxStencil::new(spec, spec.flux_order)?;
    let statics = charge_keys(spec, &spec.static_charges)?;
    let fd = space.field_dim();
    let mut out = Vec::with_capacity(space.dim());
    for p in 0..space.particle_dim() {
        let base = p * fd;
        let mut keys = statics.clone();
        for i in 0..space.n_particles() {
            keys.push((space.particle_cell(base, i), spec.charges[i]));
        }
        let enclosed = cube_charges(spec, &keys, spec.flux_order);
        for f in 0..fd {
            let idx = base + f;
            out.push(st.satisfied(&enclosed, |l| space.link_level(idx, l)));
        }
    }
    Ok(out)
}

/// Kernel of H_c on a full space.
pub fn kernel_basis(space: &Space) -> Result<SectorBasis> {
    let ok = constraint_diagonal(space)?;
    let members = ok.iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| i).collect();
    Ok(SectorBasis::from_members(space.dim(), members))
}
