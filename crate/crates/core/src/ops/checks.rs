//! Identity checks on the operators of one spec, reported as max-norm deviations.

use serde::{Deserialize, Serialize};

use super::field::{expm_i_hermitian, local_a, local_u, op_a};
use super::hamiltonian::{build_h, build_hc, build_hf1, build_hf2};
use super::space::Space;
use super::sparse::dense_max_diff;
use crate::error::Result;
use crate::lattice::{LatticeSpec, LinkId};

/// Largest full space the operator checks will assemble.
pub const CHECK_MAX_DIM: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        IdentityCheck { name: name.into(), deviation, tolerance, passed: deviation <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
    /// Checks skipped because the full space is too large.
    pub skipped: Vec<String>,
    pub passed: bool,
}

/// exp(i·A·E_max/Λ) against the shift U on one link.
pub fn exp_a_deviation(cutoff: usize, e_max: f64) -> f64 {
    let a = local_a(cutoff, e_max);
    dense_max_diff(&expm_i_hermitian(&a, e_max / cutoff as f64), &local_u(cutoff))
}

/// Runs the local identity for Λ ∈ {1,2,4,8} plus the spec's own cutoff, and
/// the full-space checks when the space has at most `CHECK_MAX_DIM` states.
pub fn identity_checks(spec: &LatticeSpec) -> Result<IdentityReport> {
    spec.validate()?;
    let mut checks = Vec::new();
    let mut skipped = Vec::new();
    let h = spec.h();
    let mut cutoffs = vec![1, 2, 4, 8];
    if !cutoffs.contains(&spec.cutoff) {
        cutoffs.push(spec.cutoff);
    }
    for lam in cutoffs {
        checks.push(IdentityCheck::new(format!("exp(iA Emax/Lambda) = U, Lambda={lam}"), exp_a_deviation(lam, lam as f64 * h), 1e-10));
    }
    let full_dim = (spec.link_dim() as f64).powi(spec.n_links() as i32) * (spec.n_points() as f64).powi(spec.eta as i32);
    if full_dim > CHECK_MAX_DIM as f64 {
        skipped.push(format!("full-space checks: dimension {full_dim:e} exceeds {CHECK_MAX_DIM}"));
    } else {
        let space = Space::full(spec)?;
        let hc = build_hc(&space)?;
        checks.push(IdentityCheck::new("Hc^2 = Hc", hc.mul(&hc)?.max_diff(&hc)?, 1e-12));
        let hf1 = build_hf1(&space);
        checks.push(IdentityCheck::new("[Hc, Hf1] = 0", hc.mul(&hf1)?.max_diff(&hf1.mul(&hc)?)?, 1e-10));
        let hf2 = build_hf2(&space)?.op;
        let a0 = op_a(&space, &LinkId::new(&vec![0; spec.dims], 0))?;
        let scale = hf2.max_abs().max(1.0) * a0.max_abs().max(1.0);
        checks.push(IdentityCheck::new("[Hf2, A] = 0", hf2.mul(&a0)?.max_diff(&a0.mul(&hf2)?)? / scale, 1e-10));
        let hm = build_h(&space)?.op;
        checks.push(IdentityCheck::new("H = H^dagger", hm.hermitian_error() / hm.max_abs().max(1.0), 1e-12));
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(IdentityReport { checks, skipped, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_spec_passes_and_large_spec_skips() {
        let spec = LatticeSpec::new(2, 4, 2, 4.0, 1);
        let r = identity_checks(&spec).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.skipped.is_empty());
        let big = LatticeSpec::new(3, 4, 4, 64.0, 2);
        let r = identity_checks(&big).unwrap();
        assert!(r.passed && r.skipped.len() == 1);
        assert_eq!(r.checks.len(), 4);
    }
}
