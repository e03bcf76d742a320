//! Hamiltonian pieces on the composite space.
//!
//! H_π = Σ_{i,μ} (1/2m_i)[−L/Δ² + iζ_i(GÂ + ÂG) + ζ_i²Â²], where L is the
//! Laplacian stencil, G the gradient stencil over Δ, and Â = A_{cell(x_i), μ}
//! acts on the link of the particle's current cell. This is the expansion of
//! (−iG − ζÂ)² with the kinetic part replaced by the Laplacian stencil.

use std::f64::consts::PI;

use super::field::{local_a, push_a_column};
use super::sector::constraint_diagonal;
use super::space::Space;
use super::sparse::{compress, SparseOperator, SparseVec};
use crate::error::Result;
use crate::lattice::{shift_site, LatticeSpec};
use crate::stencils::{gradient_coeffs, laplacian_coeffs};
use crate::C64;

/// An operator plus any caveats raised while building it.
#[derive(Debug, Clone)]
pub struct Built {
    pub op: SparseOperator,
    pub warnings: Vec<String>,
}

/// H_f1 = (h³/8π) Σ E².
pub fn build_hf1(space: &Space) -> SparseOperator {
    let spec = &space.spec;
    let pref = spec.h().powi(3) / (8.0 * PI) * spec.field_unit().powi(2);
    let n = spec.n_links();
    let d: Vec<f64> = (0..space.dim())
        .map(|r| pref * (0..n).map(|l| (space.link_level(r, l) as f64).powi(2)).sum::<f64>())
        .collect();
    SparseOperator::diagonal(&d)
}

/// Curl components as linear forms in the link potentials: one list of
/// `(link, coefficient)` per (cell, component). D=2 has the single normal
/// component; D=1 has none.
pub fn curl_terms(spec: &LatticeSpec) -> Result<Vec<Vec<(usize, f64)>>> {
    let g = gradient_coeffs(spec.grad_order)?.to_f64();
    let comps: Vec<Vec<(usize, usize, f64)>> = match spec.dims {
        1 => vec![],
        2 => vec![vec![(0, 1, 1.0), (1, 0, -1.0)]],
        _ => (0..3).map(|l| vec![((l + 1) % 3, (l + 2) % 3, 1.0), ((l + 2) % 3, (l + 1) % 3, -1.0)]).collect(),
    };
    let mut out = Vec::new();
    for qi in 0..spec.n_cells() {
        let q = spec.cell_coords(qi);
        for comp in &comps {
            let mut acc: std::collections::BTreeMap<usize, f64> = Default::default();
            for &(mu, nu, eps) in comp {
                for &(k, d) in &g {
                    if d != 0.0 {
                        *acc.entry(spec.link_offset(&q, mu, k, nu)).or_default() += eps * d;
                    }
                }
            }
            out.push(acc.into_iter().filter(|e| e.1.abs() > 1e-15).collect());
        }
    }
    Ok(out)
}

/// H_f2 = (c²h/8π) Σ_{q,ℓ} (Σ ε_{μνℓ} Σ_k d'_k A_{q+k e_μ, ν})².
pub fn build_hf2(space: &Space) -> Result<Built> {
    let spec = &space.spec;
    if spec.dims == 1 {
        return Ok(Built {
            op: SparseOperator::zeros(space.dim()),
            warnings: vec!["curl vanishes in D=1; magnetic term is zero".into()],
        });
    }
    let terms = curl_terms(spec)?;
    let a = local_a(spec.cutoff, spec.e_max());
    let pref = spec.light_speed.powi(2) * spec.h() / (8.0 * PI);
    let op = SparseOperator::from_hermitian_columns(space.dim(), |col| {
        let mut out = SparseVec::new();
        for c in &terms {
            let mut once = SparseVec::new();
            for &(l, w) in c {
                push_a_column(space, &a, l, col, C64::new(w, 0.0), &mut once);
            }
            for (idx, amp) in compress(once) {
                for &(l, w) in c {
                    push_a_column(space, &a, l, idx, amp * w * pref, &mut out);
                }
            }
        }
        out
    });
    Ok(Built { op, warnings: vec![] })
}

/// Adds `w · Σ_k c_k |x − k⟩` on particle register `reg`.
fn push_shift(space: &Space, reg: usize, col: usize, stencil: &[(i64, f64)], w: C64, out: &mut SparseVec) {
    let n = space.spec.n_side as i64;
    let x = space.digit(col, reg) as i64;
    for &(k, c) in stencil {
        if c != 0.0 {
            out.push((space.with_digit(col, reg, (x - k).rem_euclid(n) as usize), w * c));
        }
    }
}

/// Â for particle `i`, direction μ: A on link (cell(x_i), μ).
fn push_ahat(space: &Space, a: &nalgebra::DMatrix<C64>, i: usize, mu: usize, col: usize, w: C64, out: &mut SparseVec) {
    let l = mu * space.spec.n_cells() + space.particle_cell(col, i);
    push_a_column(space, a, l, col, w, out);
}

pub fn build_hpi(space: &Space) -> Result<SparseOperator> {
    let spec = &space.spec;
    let delta = spec.delta();
    let grad: Vec<(i64, f64)> = gradient_coeffs(spec.grad_order)?.to_f64().into_iter().map(|(k, v)| (k, v / delta)).collect();
    let lap = laplacian_coeffs(spec.grad_order)?.to_f64();
    let a = local_a(spec.cutoff, spec.e_max());
    let n_p = space.n_particles();
    Ok(SparseOperator::from_hermitian_columns(space.dim(), |col| {
        let mut out = SparseVec::new();
        for i in 0..n_p {
            let inv2m = 1.0 / (2.0 * spec.masses[i]);
            let z = spec.charges[i] as f64;
            for mu in 0..spec.dims {
                let reg = space.particle_reg(i, mu);
                push_shift(space, reg, col, &lap, C64::new(-inv2m / (delta * delta), 0.0), &mut out);
                // iζ(GÂ + ÂG)
                let cross = C64::new(0.0, z * inv2m);
                let mut ga = SparseVec::new();
                push_ahat(space, &a, i, mu, col, C64::new(1.0, 0.0), &mut ga);
                for (idx, amp) in compress(ga) {
                    push_shift(space, reg, idx, &grad, cross * amp, &mut out);
                }
                let mut gcol = SparseVec::new();
                push_shift(space, reg, col, &grad, C64::new(1.0, 0.0), &mut gcol);
                for (idx, amp) in compress(gcol) {
                    push_ahat(space, &a, i, mu, idx, cross * amp, &mut out);
                }
                // ζ²Â²
                let mut aa = SparseVec::new();
                push_ahat(space, &a, i, mu, col, C64::new(1.0, 0.0), &mut aa);
                for (idx, amp) in compress(aa) {
                    push_ahat(space, &a, i, mu, idx, amp * (z * z * inv2m), &mut out);
                }
            }
        }
        out
    }))
}

/// Diagonal projector onto Gauss-law-violating basis states.
pub fn build_hc(space: &Space) -> Result<SparseOperator> {
    let ok = constraint_diagonal(space)?;
    let d: Vec<f64> = ok.iter().map(|&k| if k { 0.0 } else { 1.0 }).collect();
    Ok(SparseOperator::diagonal(&d))
}

/// H_f = H_π + H_f1 + H_f2 (no constraint term).
pub fn build_hf(space: &Space) -> Result<Built> {
    let hf2 = build_hf2(space)?;
    let hf1 = build_hf1(space);
    let mut parts: Vec<(f64, &SparseOperator)> = vec![(1.0, &hf1), (1.0, &hf2.op)];
    let hpi;
    if space.has_particles() {
        hpi = build_hpi(space)?;
        parts.push((1.0, &hpi));
    }
    Ok(Built { op: SparseOperator::sum(space.dim(), &parts)?, warnings: hf2.warnings })
}

/// H = H_π + H_f1 + H_f2 + λ H_c.
pub fn build_h(space: &Space) -> Result<Built> {
    let hf = build_hf(space)?;
    if space.spec.penalty == 0.0 {
        return Ok(hf);
    }
    let hc = build_hc(space)?;
    Ok(Built { op: SparseOperator::sum(space.dim(), &[(1.0, &hf.op), (space.spec.penalty, &hc)])?, warnings: hf.warnings })
}

/// Link index of (q + k e_μ, ν); re-exported for experiments.
pub fn link_at(spec: &LatticeSpec, q: &[usize], mu: usize, k: i64, nu: usize) -> usize {
    let s = shift_site(q, mu, k, spec.m_side);
    nu * spec.n_cells() + spec.cell_index(&s)
}
