//! Mixed-radix layout of the composite particle ⊗ field Hilbert space.
//!
//! Registers, most significant first: particle coordinates `(i, μ)` (radix
//! n_side), then links in dense link order (radix 2Λ). A register value `j`
//! on a link stands for field level ε = j − Λ.

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

/// Largest full-space dimension any builder will materialize.
pub const MAX_DIM: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisState {
    /// Grid point of each particle.
    pub particles: Vec<Vec<usize>>,
    /// Field level ε per dense link index.
    pub links: Vec<i64>,
}

#[derive(Debug, Clone)]
pub struct Space {
    pub spec: LatticeSpec,
    radices: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
    n_particle_regs: usize,
}

impl Space {
    /// Particles and links.
    pub fn full(spec: &LatticeSpec) -> Result<Self> {
        Self::build(spec, spec.eta)
    }

    /// Links only; particles (if any) are ignored.
    pub fn field_only(spec: &LatticeSpec) -> Result<Self> {
        Self::build(spec, 0)
    }

    fn build(spec: &LatticeSpec, eta: usize) -> Result<Self> {
        spec.validate()?;
        let mut radices = vec![spec.n_side; eta * spec.dims];
        radices.extend(std::iter::repeat_n(spec.link_dim(), spec.n_links()));
        let mut dim: usize = 1;
        for &r in &radices {
            dim = dim
                .checked_mul(r)
                .filter(|&d| d <= MAX_DIM)
                .ok_or_else(|| Error::Resource(format!("Hilbert space exceeds 2^24 (radices {radices:?})")))?;
        }
        let mut strides = vec![1; radices.len()];
        for k in (0..radices.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * radices[k + 1];
        }
        Ok(Space { spec: spec.clone(), radices, strides, dim, n_particle_regs: eta * spec.dims })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn n_particles(&self) -> usize {
        self.n_particle_regs / self.spec.dims
    }
    pub fn has_particles(&self) -> bool {
        self.n_particle_regs > 0
    }
    /// Dimension of the field factor.
    pub fn field_dim(&self) -> usize {
        self.dim / self.particle_dim()
    }
    pub fn particle_dim(&self) -> usize {
        self.radices[..self.n_particle_regs].iter().product()
    }

    pub fn particle_reg(&self, i: usize, mu: usize) -> usize {
        i * self.spec.dims + mu
    }
    pub fn link_reg(&self, l: usize) -> usize {
        self.n_particle_regs + l
    }

    #[inline]
    pub fn digit(&self, idx: usize, reg: usize) -> usize {
        (idx / self.strides[reg]) % self.radices[reg]
    }

    #[inline]
    pub fn with_digit(&self, idx: usize, reg: usize, v: usize) -> usize {
        let old = self.digit(idx, reg);
        idx - old * self.strides[reg] + v * self.strides[reg]
    }

    pub fn link_level(&self, idx: usize, l: usize) -> i64 {
        self.digit(idx, self.link_reg(l)) as i64 - self.spec.cutoff as i64
    }

    pub fn particle_point(&self, idx: usize, i: usize) -> Vec<usize> {
        (0..self.spec.dims).map(|mu| self.digit(idx, self.particle_reg(i, mu))).collect()
    }

    /// Field cell of particle `i` as a dense cell index.
    pub fn particle_cell(&self, idx: usize, i: usize) -> usize {
        let per = self.spec.n_side / self.spec.m_side;
        let q: Vec<usize> = self.particle_point(idx, i).iter().map(|&x| x / per).collect();
        self.spec.cell_index(&q)
    }

    pub fn decode(&self, idx: usize) -> BasisState {
        BasisState {
            particles: (0..self.n_particles()).map(|i| self.particle_point(idx, i)).collect(),
            links: (0..self.spec.n_links()).map(|l| self.link_level(idx, l)).collect(),
        }
    }

    pub fn encode(&self, s: &BasisState) -> Result<usize> {
        if s.particles.len() != self.n_particles() || s.links.len() != self.spec.n_links() {
            return Err(Error::DimensionMismatch("basis state shape does not match space".into()));
        }
        let lam = self.spec.cutoff as i64;
        let mut idx = 0;
        for (i, x) in s.particles.iter().enumerate() {
            if x.len() != self.spec.dims || x.iter().any(|&c| c >= self.spec.n_side) {
                return Err(Error::Range(format!("particle {i} at {x:?} off grid")));
            }
            for (mu, &c) in x.iter().enumerate() {
                idx += c * self.strides[self.particle_reg(i, mu)];
            }
        }
        for (l, &e) in s.links.iter().enumerate() {
            if e < -lam || e >= lam {
                return Err(Error::Range(format!("link {l} level {e} outside [−{lam}, {lam})")));
            }
            idx += (e + lam) as usize * self.strides[self.link_reg(l)];
        }
        Ok(idx)
    }

    /// Index of a pure field configuration with particles all at the origin.
    pub fn field_index(&self, links: &[i64]) -> Result<usize> {
        let s = BasisState { particles: vec![vec![0; self.spec.dims]; self.n_particles()], links: links.to_vec() };
        self.encode(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode_roundtrip() {
        let spec = LatticeSpec::new(1, 4, 2, 4.0, 2).with_particles(&[1], &[1.0]);
        let sp = Space::full(&spec).unwrap();
        assert_eq!(sp.dim(), 4 * 4 * 4);
        for idx in 0..sp.dim() {
            assert_eq!(sp.encode(&sp.decode(idx)).unwrap(), idx);
        }
        let s = BasisState { particles: vec![vec![3]], links: vec![-2, 1] };
        let idx = sp.encode(&s).unwrap();
        assert_eq!(idx, 3 * 16 + 0 * 4 + 3);
        assert_eq!(sp.particle_cell(idx, 0), 1);
        assert!(sp.encode(&BasisState { particles: vec![vec![0]], links: vec![2, 0] }).is_err());
    }

    #[test]
    fn oversized_space_is_refused() {
        let spec = LatticeSpec::new(2, 8, 8, 64.0, 8);
        assert!(matches!(Space::full(&spec), Err(Error::Resource(_))));
    }
}
