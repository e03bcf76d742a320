//! Exact small-scale time evolution and the physics experiments built on it.
//!
//! Propagation uses a dense eigendecomposition for small dimensions and an
//! adaptive Lanczos exponential with an a-posteriori error estimate otherwise.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ops::{SectorBasis, SparseOperator};
use crate::C64;

pub mod experiments;
pub mod smooth;

pub use experiments::{
    init_coulomb_field, interaction_frame_check, loop_energy_shift, penalty_convergence, topological_suppression,
    topology_dichotomy,
};
pub use smooth::{gauge_drift, maxwell_faraday_residual, SmoothnessParams};

/// Largest dimension propagated by dense diagonalization.
pub const DENSE_MAX: usize = 512;
const KRYLOV_DIM: usize = 30;
const MAX_SUBSTEPS: usize = 200_000;

/// Amplitudes over a full-space or sector basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amps: Vec<C64>,
}

impl StateVector {
    pub fn basis(dim: usize, idx: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[idx] = C64::new(1.0, 0.0);
        StateVector { amps }
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) {
            return Err(Error::Numerical("cannot normalize the zero vector".into()));
        }
        self.amps.iter_mut().for_each(|a| *a /= n);
        Ok(self)
    }
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn check_hermitian(h: &SparseOperator) -> Result<()> {
    let scale = h.max_abs().max(1.0);
    if h.hermitian_error() > 1e-10 * scale {
        return Err(Error::Argument("Hamiltonian is not Hermitian".into()));
    }
    Ok(())
}

fn dense_propagate(h: &SparseOperator, psi: &[C64], t: f64) -> Vec<C64> {
    let eig = h.to_dense().symmetric_eigen();
    let v = &eig.eigenvectors;
    let c = v.adjoint() * DVector::from_column_slice(psi);
    let ph = DVector::from_fn(c.len(), |k, _| c[k] * C64::from_polar(1.0, -t * eig.eigenvalues[k]));
    (v * ph).iter().copied().collect()
}

/// One Lanczos approximation of exp(−iτH)v; returns the result and the
/// standard residual-based error estimate.
fn lanczos_step(h: &SparseOperator, v: &[C64], tau: f64) -> (Vec<C64>, f64) {
    let b0 = norm(v);
    let n = v.len();
    if b0 == 0.0 {
        return (vec![C64::new(0.0, 0.0); n], 0.0);
    }
    let mut basis: Vec<Vec<C64>> = vec![v.iter().map(|a| a / b0).collect()];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut w = vec![C64::new(0.0, 0.0); n];
    let scale = h.row_sum_norm().max(1e-300);
    let mut broke = false;
    for j in 0..KRYLOV_DIM.min(n) {
        h.apply_into(&basis[j], &mut w);
        alpha.push(inner(&basis[j], &w).re);
        // Full reorthogonalization, twice.
        for _ in 0..2 {
            for q in &basis {
                let c = inner(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let bj = norm(&w);
        if bj < 1e-13 * scale || j + 1 == n {
            broke = true;
            beta.push(bj);
            break;
        }
        beta.push(bj);
        basis.push(w.iter().map(|a| a / bj).collect());
    }
    let m = alpha.len();
    let t = DMatrix::<f64>::from_fn(m, m, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let q = &eig.eigenvectors;
    let coef: Vec<C64> = (0..m)
        .map(|r| (0..m).map(|k| q[(r, k)] * q[(0, k)] * C64::from_polar(1.0, -tau * eig.eigenvalues[k])).sum())
        .collect();
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (c, b) in coef.iter().zip(&basis) {
        out.iter_mut().zip(b).for_each(|(o, x)| *o += c * b0 * x);
    }
    let err = if broke { 0.0 } else { b0 * beta[m - 1] * coef[m - 1].norm() };
    (out, err)
}

/// ψ(t) = exp(−iHt)ψ₀ with 2-norm error ≤ tol.
pub fn evolve_exact(h: &SparseOperator, psi0: &[C64], t: f64, tol: f64) -> Result<Vec<C64>> {
    if h.dim() != psi0.len() {
        return Err(Error::DimensionMismatch(format!("operator {} vs state {}", h.dim(), psi0.len())));
    }
    check_hermitian(h)?;
    if t == 0.0 {
        return Ok(psi0.to_vec());
    }
    if h.dim() <= DENSE_MAX {
        return Ok(dense_propagate(h, psi0, t));
    }
    let total = t.abs();
    let sign = t.signum();
    let mut tau = total.min(10.0 / h.row_sum_norm().max(1e-300));
    let mut left = total;
    let mut psi = psi0.to_vec();
    let mut steps = 0;
    while left > 0.0 {
        tau = tau.min(left);
        let (next, err) = lanczos_step(h, &psi, sign * tau);
        steps += 1;
        if steps > MAX_SUBSTEPS || tau < total * 1e-12 {
            return Err(Error::Numerical(format!("tolerance {tol:e} unachievable within the step budget")));
        }
        if err <= tol * tau / total {
            psi = next;
            left -= tau;
            if left < total * 1e-15 {
                break;
            }
            tau *= 1.5;
        } else {
            tau *= 0.5;
        }
    }
    Ok(psi)
}

/// exp(−i P H_f P t)ψ₀ for ψ₀ supported on the sector.
pub fn evolve_zeno(hf: &SparseOperator, sector: &SectorBasis, psi0: &[C64], t: f64, tol: f64) -> Result<Vec<C64>> {
    if psi0.len() != sector.space_dim || hf.dim() != sector.space_dim {
        return Err(Error::DimensionMismatch("state, operator and sector sizes differ".into()));
    }
    if sector.leakage(psi0) > 1e-10 * norm(psi0).max(1.0) {
        return Err(Error::Argument("initial state is not supported on the sector".into()));
    }
    if sector.is_empty() {
        return Err(Error::Argument("empty sector".into()));
    }
    let sub = hf.restrict(&sector.members);
    let out = evolve_exact(&sub, &sector.restrict(psi0), t, tol)?;
    Ok(sector.embed(&out))
}

/// Spectral norm of a Hermitian operator (dense when small, Lanczos Ritz
/// estimate otherwise).
pub fn spectral_norm(h: &SparseOperator) -> f64 {
    if h.dim() <= 2048 {
        return crate::ops::sparse::hermitian_norm(h);
    }
    let n = h.dim();
    let mut v: Vec<C64> = (0..n).map(|i| C64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.05)).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|a| *a /= nv);
    let mut lam = 0.0;
    for _ in 0..200 {
        let w = h.apply(&v);
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        if (nw - lam).abs() < 1e-10 * nw {
            return nw;
        }
        lam = nw;
        v = w.into_iter().map(|a| a / nw).collect();
    }
    lam
}

/// Least-squares slope of ln y against ln x.
pub fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> SparseOperator {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut trip = Vec::new();
        for r in 0..n {
            trip.push((r, r, C64::new(rng.random_range(-2.0..2.0), 0.0)));
            for _ in 0..3 {
                let c = rng.random_range(0..n);
                if c != r {
                    let v = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    trip.push((r, c, v));
                    trip.push((c, r, v.conj()));
                }
            }
        }
        SparseOperator::from_triplets(n, trip)
    }

    fn random_state(n: usize) -> Vec<C64> {
        let v: Vec<C64> = (0..n).map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let nv = norm(&v);
        v.into_iter().map(|a| a / nv).collect()
    }

    #[test]
    fn trivial_cases() {
        let h = random_hermitian(40, 1);
        let psi = random_state(40);
        assert_eq!(evolve_exact(&h, &psi, 0.0, 1e-12).unwrap(), psi);
        let d: Vec<f64> = (0..700).map(|i| i as f64 * 0.01 - 3.0).collect();
        let hd = SparseOperator::diagonal(&d);
        let p = random_state(700);
        let out = evolve_exact(&hd, &p, 1.3, 1e-12).unwrap();
        for i in 0..700 {
            let want = p[i] * C64::from_polar(1.0, -1.3 * d[i]);
            assert!((out[i] - want).norm() < 1e-11);
        }
    }

    #[test]
    fn krylov_matches_dense_and_conserves() {
        let n = 600;
        let h = random_hermitian(n, 7);
        let psi = random_state(n);
        let kry = evolve_exact(&h, &psi, 2.0, 1e-11).unwrap();
        let dense = dense_propagate(&h, &psi, 2.0);
        assert!(distance(&kry, &dense) < 1e-9);
        assert!((norm(&kry) - 1.0).abs() < 1e-10);
        let e0 = h.expectation(&psi).re;
        let e1 = h.expectation(&kry).re;
        assert!((e0 - e1).abs() < 1e-8);
    }

    #[test]
    fn rejects_non_hermitian() {
        let op = SparseOperator::from_triplets(2, vec![(0, 1, C64::new(1.0, 0.0))]);
        assert!(evolve_exact(&op, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], 1.0, 1e-10).is_err());
    }

    #[test]
    fn zeno_trivial_cases() {
        let h = random_hermitian(20, 3);
        let one = SectorBasis::from_members(20, vec![5]);
        let psi = StateVector::basis(20, 5).amps;
        let out = evolve_zeno(&h, &one, &psi, 0.7, 1e-12).unwrap();
        let want = C64::from_polar(1.0, -0.7 * h.get(5, 5).re);
        assert!((out[5] - want).norm() < 1e-12);
        assert!(evolve_zeno(&h, &one, &StateVector::basis(20, 4).amps, 0.7, 1e-12).is_err());
        // Block-diagonal H: Zeno equals exact evolution.
        let d: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let hd = SparseOperator::diagonal(&d);
        let sec = SectorBasis::from_members(20, vec![1, 2, 3]);
        let mut p = vec![C64::new(0.0, 0.0); 20];
        p[1] = C64::new(0.6, 0.0);
        p[3] = C64::new(0.0, 0.8);
        let a = evolve_zeno(&hd, &sec, &p, 1.1, 1e-12).unwrap();
        let b = evolve_exact(&hd, &p, 1.1, 1e-12).unwrap();
        assert!(distance(&a, &b) < 1e-12);
    }

    #[test]
    fn slope_fit() {
        let xs = [1.0, 10.0, 100.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.5)).collect();
        assert!((log_slope(&xs, &ys) + 1.5).abs() < 1e-12);
    }
}
