//! Compressed-row complex matrices.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    /// Set by builders that guarantee Hermiticity by construction.
    pub hermitian: bool,
}

/// Column of an operator applied to one basis vector: `(row, value)` pairs.
pub type SparseVec = Vec<(usize, C64)>;

/// Sums duplicate indices and drops exact zeros, returning entries sorted by index.
pub fn compress(mut v: SparseVec) -> SparseVec {
    v.sort_unstable_by_key(|e| e.0);
    let mut out: SparseVec = Vec::with_capacity(v.len());
    for (i, x) in v {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 += x,
            _ => out.push((i, x)),
        }
    }
    out.retain(|e| e.1 != C64::new(0.0, 0.0));
    out
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        SparseOperator { dim, row_ptr: vec![0; dim + 1], cols: vec![], vals: vec![], hermitian: true }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut op = Self::from_rows(d.len(), |r| vec![(r, C64::new(d[r], 0.0))]);
        op.hermitian = true;
        op
    }

    /// Builds row by row; `row(r)` may contain duplicate columns.
    pub fn from_rows(dim: usize, row: impl Fn(usize) -> SparseVec) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for r in 0..dim {
            for (c, v) in compress(row(r)) {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        SparseOperator { dim, row_ptr, cols, vals, hermitian: false }
    }

    /// Builds a Hermitian operator from its action on basis vectors: row r is the
    /// conjugate of column r.
    pub fn from_hermitian_columns(dim: usize, col: impl Fn(usize) -> SparseVec) -> Self {
        let mut op = Self::from_rows(dim, |r| col(r).into_iter().map(|(c, v)| (c, v.conj())).collect());
        op.hermitian = true;
        op
    }

    /// General operator from column actions (transposes through triplets).
    pub fn from_columns(dim: usize, col: impl Fn(usize) -> SparseVec) -> Self {
        let mut trip = Vec::new();
        for c in 0..dim {
            for (r, v) in col(c) {
                trip.push((r, c, v));
            }
        }
        Self::from_triplets(dim, trip)
    }

    pub fn from_triplets(dim: usize, mut trip: Vec<(usize, usize, C64)>) -> Self {
        trip.sort_unstable_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(trip.len());
        let mut vals: Vec<C64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut op = SparseOperator { dim, row_ptr, cols, vals, hermitian: false };
        op.prune();
        op
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        Self::from_rows(m.nrows(), |r| (0..m.ncols()).map(|c| (c, m[(r, c)])).collect())
    }

    fn prune(&mut self) {
        let old = std::mem::take(self);
        *self = Self::from_rows(old.dim, |r| old.row(r).collect());
        self.hermitian = old.hermitian;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r).find(|e| e.0 == c).map(|e| e.1).unwrap_or_default()
    }

    /// Diagonal entries (zero where absent).
    pub fn diag(&self) -> Vec<C64> {
        (0..self.dim).map(|r| self.get(r, r)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|r| self.row(r).all(|(c, _)| c == r))
    }

    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        for r in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[r] = acc;
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.apply_into(x, &mut y);
        y
    }

    pub fn expectation(&self, psi: &[C64]) -> C64 {
        let hp = self.apply(psi);
        psi.iter().zip(&hp).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for v in out.vals.iter_mut() {
            *v *= s;
        }
        out.hermitian = self.hermitian && s.im == 0.0;
        out
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!("{} vs {}", self.dim, other.dim)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::from_rows(self.dim, |r| self.row(r).chain(other.row(r)).collect());
        out.hermitian = self.hermitian && other.hermitian;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale_re(-1.0))
    }

    /// Sum of `w_i · op_i`.
    pub fn sum(dim: usize, terms: &[(f64, &SparseOperator)]) -> Result<Self> {
        for (_, t) in terms {
            if t.dim != dim {
                return Err(Error::DimensionMismatch(format!("{} vs {}", t.dim, dim)));
            }
        }
        let mut out = Self::from_rows(dim, |r| {
            terms.iter().flat_map(|(w, t)| t.row(r).map(move |(c, v)| (c, v * *w))).collect()
        });
        out.hermitian = terms.iter().all(|(_, t)| t.hermitian);
        Ok(out)
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::from_rows(self.dim, |r| {
            let mut acc: HashMap<usize, C64> = HashMap::new();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    *acc.entry(c).or_default() += a * b;
                }
            }
            acc.into_iter().collect()
        }))
    }

    pub fn adjoint(&self) -> Self {
        let mut trip = Vec::with_capacity(self.nnz());
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                trip.push((c, r, v.conj()));
            }
        }
        let mut out = Self::from_triplets(self.dim, trip);
        out.hermitian = self.hermitian;
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// ‖self − other‖_max.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// ‖H − H†‖_max.
    pub fn hermitian_error(&self) -> f64 {
        self.max_diff(&self.adjoint()).unwrap_or(f64::INFINITY)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    /// Restriction to the subspace spanned by the listed basis indices.
    pub fn restrict(&self, members: &[usize]) -> Self {
        let mut pos = HashMap::with_capacity(members.len());
        for (i, &m) in members.iter().enumerate() {
            pos.insert(m, i);
        }
        let mut out = Self::from_rows(members.len(), |r| {
            self.row(members[r]).filter_map(|(c, v)| pos.get(&c).map(|&j| (j, v))).collect()
        });
        out.hermitian = self.hermitian;
        out
    }

    /// Upper bound on the spectral norm: max absolute row sum.
    pub fn row_sum_norm(&self) -> f64 {
        (0..self.dim).map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }
}

impl Default for SparseOperator {
    fn default() -> Self {
        Self::zeros(0)
    }
}

/// Spectral norm of a Hermitian operator via dense diagonalization.
pub fn hermitian_norm(op: &SparseOperator) -> f64 {
    let m = op.to_dense();
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().map(|v| v.abs()).fold(0.0, f64::max)
}

pub fn dense_max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let op = SparseOperator::from_triplets(2, vec![(0, 1, c(1.0, 0.0)), (0, 1, c(2.0, 0.0)), (1, 0, c(0.0, 0.0))]);
        assert_eq!(op.nnz(), 1);
        assert_eq!(op.get(0, 1), c(3.0, 0.0));
    }

    #[test]
    fn product_and_adjoint_match_dense() {
        let a = SparseOperator::from_rows(3, |r| vec![(r, c(r as f64, 1.0)), ((r + 1) % 3, c(0.5, -0.25))]);
        let b = SparseOperator::from_rows(3, |r| vec![((r + 2) % 3, c(1.0, 2.0))]);
        let ab = a.mul(&b).unwrap().to_dense();
        assert!(dense_max_diff(&ab, &(a.to_dense() * b.to_dense())) < 1e-15);
        assert!(dense_max_diff(&a.adjoint().to_dense(), &a.to_dense().adjoint()) < 1e-15);
        assert!(a.hermitian_error() > 0.1);
        let h = a.add(&a.adjoint()).unwrap();
        assert!(h.hermitian_error() < 1e-15);
    }

    #[test]
    fn restrict_picks_block() {
        let d = SparseOperator::diagonal(&[1.0, 2.0, 3.0, 4.0]);
        let r = d.restrict(&[1, 3]);
        assert_eq!(r.diag(), vec![c(2.0, 0.0), c(4.0, 0.0)]);
    }
}
