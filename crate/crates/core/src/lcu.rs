//! Linear-combination-of-unitaries decompositions with symbolic unitaries.
//!
//! A term is a complex coefficient times an ordered product of register
//! factors. Register values are little-endian bit strings: Z_k is +1 when bit
//! k is 0. With j = c₀ − Σ_k 2^{k−1} Z_k and c₀ = (d−1)/2, every diagonal
//! polynomial in j expands into Z-strings, which the DFT carries over to A.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::ops::dft;
use crate::stencils::{gradient_coeffs, laplacian_coeffs};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorKind {
    Identity,
    /// Π_{k ∈ mask} Z_k, optionally conjugated as F·Z·F†.
    ZMask { mask: u64, dft: bool },
    /// Cyclic adder |y⟩ → |y − power⟩, i.e. (Sψ)(x) = ψ(x + power).
    Shift { power: i64 },
    /// F·diag(ω^j)·F† with ω = e^{2πi/d}: a product of single-bit phase gates.
    PhaseProduct,
    /// I − 2P on particle coordinates x with ⌊x / block⌋ = cell.
    CellReflection { block: usize, cell: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub reg: usize,
    #[serde(flatten)]
    pub kind: FactorKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcuTerm {
    pub coefficient: C64,
    pub factors: Vec<Factor>,
}

impl LcuTerm {
    pub fn label(&self) -> String {
        if self.factors.is_empty() {
            return "I".into();
        }
        self.factors
            .iter()
            .map(|f| match &f.kind {
                FactorKind::Identity => format!("I[{}]", f.reg),
                FactorKind::ZMask { mask, dft } => {
                    let zs: Vec<String> = (0..64).filter(|k| mask >> k & 1 == 1).map(|k| format!("Z{k}")).collect();
                    if *dft {
                        format!("F({})F†[{}]", zs.join(""), f.reg)
                    } else {
                        format!("{}[{}]", zs.join(""), f.reg)
                    }
                }
                FactorKind::Shift { power } => format!("S^{power}[{}]", f.reg),
                FactorKind::PhaseProduct => format!("F(⊗R)F†[{}]", f.reg),
                FactorKind::CellReflection { cell, .. } => format!("R_{cell}[{}]", f.reg),
            })
            .collect::<Vec<_>>()
            .join("·")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcuDecomposition {
    /// Register sizes, most significant first.
    pub registers: Vec<usize>,
    pub terms: Vec<LcuTerm>,
    pub one_norm: f64,
}

impl LcuDecomposition {
    pub fn new(registers: Vec<usize>, terms: Vec<LcuTerm>) -> Self {
        let terms: Vec<LcuTerm> = terms.into_iter().filter(|t| t.coefficient.norm() > 0.0).collect();
        let one_norm = terms.iter().map(|t| t.coefficient.norm()).sum();
        LcuDecomposition { registers, terms, one_norm }
    }

    pub fn target_dim(&self) -> usize {
        self.registers.iter().product()
    }

    /// |one_norm − Σ|c_j|| relative to one_norm.
    pub fn norm_consistency(&self) -> f64 {
        let s: f64 = self.terms.iter().map(|t| t.coefficient.norm()).sum();
        (self.one_norm - s).abs() / self.one_norm.max(f64::MIN_POSITIVE)
    }
}

fn z_sign(j: usize, mask: u64) -> f64 {
    if ((j as u64) & mask).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn single_reg(coeff: C64, kind: FactorKind) -> LcuTerm {
    LcuTerm { coefficient: coeff, factors: vec![Factor { reg: 0, kind }] }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn check_cutoff(cutoff: usize) -> Result<usize> {
    if cutoff == 0 || !cutoff.is_power_of_two() {
        return Err(Error::Argument(format!("cutoff {cutoff} is not a positive power of 2")));
    }
    Ok((2 * cutoff).trailing_zeros() as usize)
}

/// Z-string expansion of a quadratic a·j² + b·j + c in the bit weights w_k = 2^{k−1}.
fn quadratic_in_j(xi: usize, a2: f64, a1: f64, a0: f64, dft: bool) -> Vec<(f64, FactorKind)> {
    let d = 1usize << xi;
    let c0 = (d as f64 - 1.0) / 2.0;
    let w: Vec<f64> = (0..xi).map(|k| 2f64.powi(k as i32 - 1)).collect();
    let sum_w2: f64 = w.iter().map(|x| x * x).sum();
    // j = c0 − Σ w_k Z_k ⇒ j² = c0² + Σw² − 2c0 Σ w Z + 2 Σ_{k<l} w_k w_l Z_k Z_l.
    let mut out = vec![(a2 * (c0 * c0 + sum_w2) + a1 * c0 + a0, FactorKind::Identity)];
    for k in 0..xi {
        out.push((-(2.0 * a2 * c0 + a1) * w[k], FactorKind::ZMask { mask: 1 << k, dft }));
    }
    for k in 0..xi {
        for l in k + 1..xi {
            out.push((2.0 * a2 * w[k] * w[l], FactorKind::ZMask { mask: (1 << k) | (1 << l), dft }));
        }
    }
    out
}

fn from_pairs(d: usize, scale: f64, pairs: Vec<(f64, FactorKind)>) -> LcuDecomposition {
    let terms = pairs.into_iter().map(|(c, k)| single_reg(re(scale * c), k)).collect();
    LcuDecomposition::new(vec![d], terms)
}

/// A = (π/E_max)[c₀ I − Σ_k 2^{k−1} F Z_k F†].
pub fn lcu_a(cutoff: usize, e_max: f64) -> Result<LcuDecomposition> {
    let xi = check_cutoff(cutoff)?;
    Ok(from_pairs(2 * cutoff, PI / e_max, quadratic_in_j(xi, 0.0, 1.0, 0.0, true)))
}

/// A² from j²: identity, ξ single-Z and ξ(ξ−1)/2 ZZ terms.
pub fn lcu_a_sq(cutoff: usize, e_max: f64) -> Result<LcuDecomposition> {
    let xi = check_cutoff(cutoff)?;
    Ok(from_pairs(2 * cutoff, (PI / e_max).powi(2), quadratic_in_j(xi, 1.0, 0.0, 0.0, true)))
}

/// diag(ε²) in units of (E_max/Λ)², with ε = j − Λ.
pub fn lcu_e_sq(cutoff: usize) -> Result<LcuDecomposition> {
    let xi = check_cutoff(cutoff)?;
    let lam = cutoff as f64;
    Ok(from_pairs(2 * cutoff, 1.0, quadratic_in_j(xi, 1.0, -2.0 * lam, lam * lam, false)))
}

fn stencil_lcu(coeffs: Vec<(i64, f64)>, scale: f64, n: usize, order: usize) -> Result<LcuDecomposition> {
    if n < 2 * order + 1 {
        return Err(Error::Argument(format!("register of size {n} too small for stencil order {order}")));
    }
    let pairs = coeffs
        .into_iter()
        .map(|(k, c)| (c, if k == 0 { FactorKind::Identity } else { FactorKind::Shift { power: k } }))
        .collect();
    Ok(from_pairs(n, scale, pairs))
}

/// ∇ ≈ (1/Δ)Σ_k d'_k S^k on a cyclic register of size n.
pub fn lcu_grad(a: usize, delta: f64, n: usize) -> Result<LcuDecomposition> {
    stencil_lcu(gradient_coeffs(a)?.to_f64(), 1.0 / delta, n, a)
}

/// ∇² ≈ (1/Δ²)Σ_k d_k S^k on a cyclic register of size n.
pub fn lcu_lap(a: usize, delta: f64, n: usize) -> Result<LcuDecomposition> {
    stencil_lcu(laplacian_coeffs(a)?.to_f64(), 1.0 / (delta * delta), n, a)
}

/// U = F·(⊗_k R(2^k))·F† as a single phase-product term.
pub fn lcu_u(cutoff: usize) -> Result<LcuDecomposition> {
    check_cutoff(cutoff)?;
    Ok(from_pairs(2 * cutoff, 1.0, vec![(1.0, FactorKind::PhaseProduct)]))
}

/// Reflection I − 2P_q with P_q the projector on particle coordinates in cell q.
pub fn lcu_cell_projector(n_side: usize, m_side: usize, cell: usize) -> LcuDecomposition {
    let block = n_side / m_side;
    from_pairs(n_side, 1.0, vec![(0.5, FactorKind::Identity), (-0.5, FactorKind::CellReflection { block, cell })])
}

fn factor_matrix(d: usize, kind: &FactorKind) -> DMatrix<C64> {
    match kind {
        FactorKind::Identity => DMatrix::identity(d, d),
        FactorKind::ZMask { mask, dft: conj } => {
            let diag = DMatrix::from_diagonal(&DVector::from_fn(d, |j, _| re(z_sign(j, *mask))));
            if *conj {
                let f = dft(d);
                &f * diag * f.adjoint()
            } else {
                diag
            }
        }
        FactorKind::Shift { power } => DMatrix::from_fn(d, d, |r, c| {
            if r as i64 == (c as i64 - power).rem_euclid(d as i64) {
                re(1.0)
            } else {
                re(0.0)
            }
        }),
        FactorKind::PhaseProduct => {
            let f = dft(d);
            let diag = DMatrix::from_diagonal(&DVector::from_fn(d, |j, _| C64::from_polar(1.0, 2.0 * PI * j as f64 / d as f64)));
            &f * diag * f.adjoint()
        }
        FactorKind::CellReflection { block, cell } => {
            DMatrix::from_diagonal(&DVector::from_fn(d, |x, _| re(if x / block == *cell { -1.0 } else { 1.0 })))
        }
    }
}

/// Dense unitary of one term without its coefficient.
pub fn term_unitary(registers: &[usize], term: &LcuTerm) -> DMatrix<C64> {
    let mut per_reg: Vec<DMatrix<C64>> = registers.iter().map(|&d| DMatrix::identity(d, d)).collect();
    for f in &term.factors {
        let m = factor_matrix(registers[f.reg], &f.kind);
        per_reg[f.reg] = &per_reg[f.reg] * m;
    }
    per_reg.iter().skip(1).fold(per_reg[0].clone(), |acc, m| acc.kronecker(m))
}

/// Σ_j c_j U_j as a dense matrix.
pub fn reconstruct(d: &LcuDecomposition) -> DMatrix<C64> {
    let n = d.target_dim();
    d.terms.iter().fold(DMatrix::zeros(n, n), |acc, t| acc + term_unitary(&d.registers, t) * t.coefficient)
}

/// Re-targets a decomposition onto a larger register layout.
pub fn lift(d: &LcuDecomposition, registers: &[usize], map: &[usize]) -> Result<LcuDecomposition> {
    if map.len() != d.registers.len() || map.iter().zip(&d.registers).any(|(&m, &r)| registers.get(m) != Some(&r)) {
        return Err(Error::DimensionMismatch("register map does not match sizes".into()));
    }
    let terms = d
        .terms
        .iter()
        .map(|t| LcuTerm {
            coefficient: t.coefficient,
            factors: t.factors.iter().map(|f| Factor { reg: map[f.reg], kind: f.kind.clone() }).collect(),
        })
        .collect();
    Ok(LcuDecomposition::new(registers.to_vec(), terms))
}

/// Product a·b: every pair of terms, factors of `a` applied after those of `b`.
pub fn product(a: &LcuDecomposition, b: &LcuDecomposition) -> Result<LcuDecomposition> {
    if a.registers != b.registers {
        return Err(Error::DimensionMismatch("product of decompositions on different registers".into()));
    }
    let mut terms = Vec::with_capacity(a.terms.len() * b.terms.len());
    for ta in &a.terms {
        for tb in &b.terms {
            let mut factors = ta.factors.clone();
            factors.extend(tb.factors.iter().cloned());
            terms.push(LcuTerm { coefficient: ta.coefficient * tb.coefficient, factors });
        }
    }
    Ok(LcuDecomposition::new(a.registers.clone(), terms))
}

/// Multiplies every coefficient by `c`.
pub fn scale(d: &LcuDecomposition, c: C64) -> LcuDecomposition {
    let terms = d.terms.iter().map(|t| LcuTerm { coefficient: t.coefficient * c, factors: t.factors.clone() }).collect();
    LcuDecomposition::new(d.registers.clone(), terms)
}

/// Weighted sum of children; the 1-norm is Σ w_i λ_i.
pub fn combine(children: &[(f64, &LcuDecomposition)]) -> Result<LcuDecomposition> {
    let first = children.first().ok_or_else(|| Error::Argument("combine needs at least one child".into()))?;
    let mut terms = Vec::new();
    let mut one_norm = 0.0;
    for (w, c) in children {
        if c.registers != first.1.registers {
            return Err(Error::DimensionMismatch("children act on different registers".into()));
        }
        if *w < 0.0 {
            return Err(Error::Argument("combine weights must be nonnegative".into()));
        }
        one_norm += w * c.one_norm;
        terms.extend(c.terms.iter().map(|t| LcuTerm { coefficient: t.coefficient * *w, factors: t.factors.clone() }));
    }
    Ok(LcuDecomposition { registers: first.1.registers.clone(), terms, one_norm })
}

/// √(|c_j|/λ).
pub fn prep_amplitudes(d: &LcuDecomposition) -> Result<Vec<f64>> {
    if !(d.one_norm > 0.0) {
        return Err(Error::Numerical("zero one-norm".into()));
    }
    Ok(d.terms.iter().map(|t| (t.coefficient.norm() / d.one_norm).sqrt()).collect())
}

/// Householder unitary on `size` ancilla states whose first column is `amps`.
pub fn prep_unitary(amps: &[f64], size: usize) -> DMatrix<C64> {
    let mut a = DVector::<C64>::zeros(size);
    for (i, &x) in amps.iter().enumerate() {
        a[i] = re(x);
    }
    let mut v = -a;
    v[0] += re(1.0);
    let nv = v.norm_squared();
    if nv < 1e-30 {
        return DMatrix::identity(size, size);
    }
    DMatrix::identity(size, size) - (&v * v.adjoint()) * re(2.0 / nv)
}

/// Dense W = (PREP† ⊗ I)·SELECT·(PREP ⊗ I) with the ancilla padded to a power of two.
pub fn block_encoding(d: &LcuDecomposition) -> Result<DMatrix<C64>> {
    let amps = prep_amplitudes(d)?;
    let k = d.terms.len().next_power_of_two();
    let n = d.target_dim();
    let prep = prep_unitary(&amps, k);
    let id = DMatrix::<C64>::identity(n, n);
    let units: Vec<DMatrix<C64>> = (0..k)
        .map(|j| match d.terms.get(j) {
            Some(t) => term_unitary(&d.registers, t) * (t.coefficient / t.coefficient.norm()),
            None => id.clone(),
        })
        .collect();
    // SELECT is block diagonal, so block (a, b) of W is Σ_j conj(P_ja) P_jb U_j.
    let mut w = DMatrix::<C64>::zeros(k * n, k * n);
    for a in 0..k {
        for b in 0..k {
            let mut blk = DMatrix::<C64>::zeros(n, n);
            for (j, u) in units.iter().enumerate() {
                let c = prep[(j, a)].conj() * prep[(j, b)];
                if c.norm() > 0.0 {
                    blk += u * c;
                }
            }
            w.view_mut((a * n, b * n), (n, n)).copy_from(&blk);
        }
    }
    Ok(w)
}

/// max |⟨0|W|0⟩ − target/λ|.
pub fn block_encoding_error(d: &LcuDecomposition, target: &DMatrix<C64>) -> Result<f64> {
    let w = block_encoding(d)?;
    let n = d.target_dim();
    let block = w.view((0, 0), (n, n)).into_owned();
    let want = target * re(1.0 / d.one_norm);
    Ok((block - want).iter().map(|v| v.norm()).fold(0.0, f64::max))
}

/// H_π on a D=1, M=1 lattice with one particle, assembled as
/// (1/2m)[−∇² + iζ(∇Â + Â∇) + ζ²Σ_q P_q⊗A_q²] with Â = Σ_q ½(I − R_q)⊗A_q.
pub fn hpi_fragment(spec: &LatticeSpec) -> Result<LcuDecomposition> {
    spec.validate()?;
    if spec.dims != 1 || spec.eta != 1 || spec.m_side != 1 {
        return Err(Error::Argument("fragment instance needs D=1, η=1, M=1".into()));
    }
    let n = spec.n_side;
    let d = spec.link_dim();
    let regs = vec![n, d];
    let (m, z) = (spec.masses[0], spec.charges[0] as f64);
    let lap = lift(&lcu_lap(spec.grad_order, spec.delta(), n)?, &regs, &[0])?;
    let grad = lift(&lcu_grad(spec.grad_order, spec.delta(), n)?, &regs, &[0])?;
    let a = lift(&lcu_a(spec.cutoff, spec.e_max())?, &regs, &[1])?;
    let a2 = lift(&lcu_a_sq(spec.cutoff, spec.e_max())?, &regs, &[1])?;
    let p = lift(&lcu_cell_projector(n, 1, 0), &regs, &[0])?;
    let ahat = product(&p, &a)?;
    let ahat2 = product(&p, &a2)?;
    let i_sign = C64::new(0.0, z.signum());
    let ga = scale(&product(&grad, &ahat)?, i_sign);
    let ag = scale(&product(&ahat, &grad)?, i_sign);
    let inv2m = 1.0 / (2.0 * m);
    combine(&[
        (inv2m, &scale(&lap, re(-1.0))),
        (inv2m * z.abs(), &ga),
        (inv2m * z.abs(), &ag),
        (inv2m * z * z, &ahat2),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormConstants {
    pub lambda1: f64,
    pub lambda1_prime: f64,
    pub lambda2: f64,
    pub a1: f64,
    pub a1_prime: f64,
    pub a2: f64,
    pub a2_prime: f64,
    pub alpha_f2: f64,
}

/// The printed normalization constants, evaluated literally.
pub fn normalization_constants(spec: &LatticeSpec) -> Result<NormConstants> {
    if spec.grad_order < 1 {
        return Err(Error::Argument("grad_order must be >= 1".into()));
    }
    let (h, dl) = (spec.h(), spec.delta());
    let m = spec.n_cells() as f64;
    let eta = spec.eta as f64;
    let l = (2.0 * (spec.grad_order as f64).powi(2)).ln();
    let lambda1 = 2.0 * PI * l / (h * dl);
    let lambda1_prime = 4.0 * PI / (h * h);
    let lambda2 = 4.0 * PI * PI / (3.0 * dl * dl);
    let a1_prime = 4.0 * PI * m * l / (h * dl) + 4.0 * PI * m / (h * h);
    Ok(NormConstants {
        lambda1,
        lambda1_prime,
        lambda2,
        a1: 2.0 * lambda1 + lambda1_prime,
        a1_prime,
        a2: lambda2 + a1_prime,
        a2_prime: 2.0 * PI * PI * eta / (dl * dl) + 6.0 * PI * eta * m * l / (h * dl) + 6.0 * PI * eta * m / (h * h),
        alpha_f2: m * spec.light_speed.powi(2) * l * l / h,
    })
}
