//! Central-difference stencils, their remainder bounds, and surface quadrature.
//!
//! Coefficients are produced in exact rational arithmetic and only converted to
//! `f64` at the edge; callers divide by Δ (gradient) or Δ² (Laplacian).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StencilKind {
    Gradient,
    Laplacian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StencilCoeffs {
    pub order: usize,
    pub kind: StencilKind,
    /// `coeffs[j]` is the coefficient of offset `k = j - a`.
    pub coeffs: Vec<BigRational>,
}

impl StencilCoeffs {
    pub fn get(&self, k: i64) -> &BigRational {
        &self.coeffs[(k + self.order as i64) as usize]
    }
    pub fn offsets(&self) -> impl Iterator<Item = i64> {
        let a = self.order as i64;
        -a..=a
    }
    /// `(k, value)` pairs, zero coefficients included.
    pub fn to_f64(&self) -> Vec<(i64, f64)> {
        self.offsets().map(|k| (k, ratio_f64(self.get(k)))).collect()
    }
    pub fn one_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| ratio_f64(&c.abs())).sum()
    }
    /// Σ_{k≠0} |coeff(k)|.
    pub fn off_center_norm(&self) -> f64 {
        self.offsets().filter(|&k| k != 0).map(|k| ratio_f64(&self.get(k).abs())).sum()
    }
    /// Applies the stencil to samples of `f` at integer offsets, exactly.
    pub fn apply_exact(&self, f: impl Fn(i64) -> BigRational) -> BigRational {
        self.offsets().map(|k| self.get(k) * f(k)).sum()
    }
}

pub fn ratio_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// d'_k = (−1)^{k+1}(a!)²/(k(a−k)!(a+k)!), antisymmetric, d'_0 = 0.
pub fn gradient_coeffs(a: usize) -> Result<StencilCoeffs> {
    if a == 0 {
        return Err(Error::Argument("gradient stencil order must be >= 1".into()));
    }
    let fa2 = factorial(a) * factorial(a);
    let mut coeffs = vec![BigRational::zero(); 2 * a + 1];
    for k in 1..=a {
        let den = BigInt::from(k) * factorial(a - k) * factorial(a + k);
        let mut v = BigRational::new(fa2.clone(), den);
        if k % 2 == 0 {
            v = -v;
        }
        coeffs[a + k] = v.clone();
        coeffs[a - k] = -v;
    }
    Ok(StencilCoeffs { order: a, kind: StencilKind::Gradient, coeffs })
}

/// The printed closed form 2(−1)^{a+k+1}(a!)²/((a+k)!(a−k)!k²), before sign validation.
pub fn laplacian_raw(a: usize, k: usize) -> BigRational {
    let num = BigInt::from(2) * factorial(a) * factorial(a);
    let den = factorial(a + k) * factorial(a - k) * BigInt::from(k * k);
    let v = BigRational::new(num, den);
    if (a + k + 1) % 2 == 0 {
        v
    } else {
        -v
    }
}

/// Laplacian stencil whose overall sign is fixed by requiring Σ d_k k² = +2
/// (the stencil must return ψ'' = 2 for ψ = x²).
pub fn laplacian_coeffs(a: usize) -> Result<StencilCoeffs> {
    if a == 0 {
        return Err(Error::Argument("laplacian stencil order must be >= 1".into()));
    }
    let mut coeffs = vec![BigRational::zero(); 2 * a + 1];
    for k in 1..=a {
        let v = laplacian_raw(a, k);
        coeffs[a + k] = v.clone();
        coeffs[a - k] = v;
    }
    let mut st = StencilCoeffs { order: a, kind: StencilKind::Laplacian, coeffs };
    let second = st.apply_exact(|k| int(k * k));
    if second == int(-2) {
        for c in st.coeffs.iter_mut() {
            *c = -c.clone();
        }
    } else if second != int(2) {
        return Err(Error::Numerical(format!("laplacian stencil of order {a} fails the x² check")));
    }
    let off: BigRational = st.coeffs.iter().cloned().sum();
    st.coeffs[a] = -off;
    Ok(st)
}

pub fn remainder_bound(kind: StencilKind, a: usize, spacing: f64, max_deriv: f64) -> Result<f64> {
    if !(spacing > 0.0) {
        return Err(Error::Argument("spacing must be positive".into()));
    }
    if a == 0 {
        return Err(Error::Argument("stencil order must be >= 1".into()));
    }
    let pi = std::f64::consts::PI;
    let growth = (2.0 * a as f64 * (1.0 - std::f64::consts::LN_2)).exp();
    Ok(match kind {
        StencilKind::Laplacian => pi.powf(1.5) / 9.0 * growth * spacing.powi(2 * a as i32 - 1) * max_deriv,
        StencilKind::Gradient => {
            if a < 2 {
                return Err(Error::Argument("gradient remainder bound needs a >= 2".into()));
            }
            (2.0 * (a as f64).ln() + EULER_GAMMA) / (6.0 * pi.sqrt())
                * growth
                * spacing.powi(2 * a as i32 + 1)
                * max_deriv
        }
    })
}

/// Upper bound 2 ln a + γ on Σ|d'| (meaningful for a ≥ 2).
pub fn gradient_norm_bound(a: usize) -> f64 {
    2.0 * (a as f64).ln() + EULER_GAMMA
}

/// Upper bound 2π²/3 on Σ_{k≠0}|d_k|.
pub fn laplacian_norm_bound() -> f64 {
    2.0 * std::f64::consts::PI.powi(2) / 3.0
}

/// γ_q/h for q ∈ [−b, b]: integral over [−(b+½), b+½] of the Lagrange basis
/// polynomial through the integer nodes −b..b.
pub fn newton_cotes_exact(b: usize) -> Vec<BigRational> {
    let bi = b as i64;
    let nodes: Vec<i64> = (-bi..=bi).collect();
    let half_width = BigRational::new(BigInt::from(2 * b + 1), BigInt::from(2));
    nodes
        .iter()
        .map(|&q| {
            // coefficients of ℓ_q in the monomial basis, lowest degree first
            let mut poly = vec![BigRational::one()];
            for &j in nodes.iter().filter(|&&j| j != q) {
                let scale = int(q - j);
                let mut next = vec![BigRational::zero(); poly.len() + 1];
                for (n, c) in poly.iter().enumerate() {
                    next[n + 1] += c / &scale;
                    next[n] -= c * int(j) / &scale;
                }
                poly = next;
            }
            let mut total = BigRational::zero();
            let mut pow = half_width.clone();
            for (n, c) in poly.iter().enumerate() {
                if n % 2 == 0 {
                    total += c * &pow * int(2) / int(n as i64 + 1);
                }
                pow = &pow * &half_width;
            }
            total
        })
        .collect()
}

/// Line weights γ_q (length units) for q = −b..b.
pub fn newton_cotes_line(b: usize, h: f64) -> Vec<f64> {
    newton_cotes_exact(b).iter().map(|w| ratio_f64(w) * h).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceQuadrature {
    pub order: usize,
    pub dims: usize,
    pub h: f64,
    pub line_weights: Vec<f64>,
}

impl SurfaceQuadrature {
    pub fn new(dims: usize, b: usize, h: f64) -> Self {
        SurfaceQuadrature { order: b, dims, h, line_weights: newton_cotes_line(b, h) }
    }

    pub fn for_spec(spec: &LatticeSpec) -> Self {
        Self::new(spec.dims, spec.flux_order, spec.h())
    }

    /// Face nodes `u` (offsets along the D−1 transverse axes, in cell units) with
    /// weights β_u: 1 in D=1, γ_u/h in D=2, γ_{u1}γ_{u2}/h in D=3.
    pub fn face_weights(&self) -> Vec<(Vec<i64>, f64)> {
        let b = self.order as i64;
        let g = |u: i64| self.line_weights[(u + b) as usize];
        match self.dims {
            1 => vec![(vec![], 1.0)],
            2 => (-b..=b).map(|u| (vec![u], g(u) / self.h)).collect(),
            _ => {
                let mut out = Vec::new();
                for u1 in -b..=b {
                    for u2 in -b..=b {
                        out.push((vec![u1, u2], g(u1) * g(u2) / self.h));
                    }
                }
                out
            }
        }
    }

    /// Σ_u |β_u| over one face.
    pub fn face_norm(&self) -> f64 {
        self.face_weights().iter().map(|(_, w)| w.abs()).sum()
    }
}

/// Axes orthogonal to `mu` in increasing order.
pub fn transverse_axes(dims: usize, mu: usize) -> Vec<usize> {
    (0..dims).filter(|&n| n != mu).collect()
}

/// Closed-surface flux ∯E·dA through the (2b+1)-cube around cell `center`.
///
/// Cell `q` is centred at `q·h`; faces sit at ±(b+½)h and carry the tensor
/// Newton–Cotes rule (area weights γγ in D=3, γ in D=2, 1 in D=1).
pub fn flux_surface(spec: &LatticeSpec, field: &dyn Fn(&[f64], usize) -> f64, center: &[usize], b: usize) -> f64 {
    let h = spec.h();
    let d = spec.dims;
    let g = newton_cotes_line(b, h);
    let bi = b as i64;
    let reach = (b as f64 + 0.5) * h;
    let mut total = 0.0;
    let mut p = vec![0.0; d];
    for mu in 0..d {
        let tr = transverse_axes(d, mu);
        let n_nodes = (2 * b + 1).pow(tr.len() as u32);
        for node in 0..n_nodes {
            let mut w = 1.0;
            let mut rest = node;
            for &nu in &tr {
                let u = (rest % (2 * b + 1)) as i64 - bi;
                rest /= 2 * b + 1;
                w *= g[(u + bi) as usize];
                p[nu] = (center[nu] as f64 + u as f64) * h;
            }
            p[mu] = center[mu] as f64 * h + reach;
            let outer = field(&p, mu);
            p[mu] = center[mu] as f64 * h - reach;
            total += w * (outer - field(&p, mu));
        }
    }
    total
}
