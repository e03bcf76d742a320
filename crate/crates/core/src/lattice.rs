//! Torus geometry: particle grid, field-cell grid, links, and path topology.
//!
//! Sites and cells are D-tuples stored as `Vec<usize>`, flattened row-major
//! (axis 0 most significant). A link `(q, μ)` joins site `q` to `q + e_μ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fixed (non-dynamical) charge pinned to a field cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellCharge {
    pub cell: Vec<usize>,
    pub charge: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub dims: usize,
    pub n_side: usize,
    pub m_side: usize,
    pub volume: f64,
    pub cutoff: usize,
    /// `None` means the default `Λ·h`.
    #[serde(default)]
    pub e_max: Option<f64>,
    pub eta: usize,
    #[serde(default)]
    pub charges: Vec<i64>,
    #[serde(default)]
    pub masses: Vec<f64>,
    pub grad_order: usize,
    pub flux_order: usize,
    #[serde(default)]
    pub penalty: f64,
    pub light_speed: f64,
    /// Background charges; lets a lone particle live in a non-empty Gauss sector.
    #[serde(default)]
    pub static_charges: Vec<CellCharge>,
}

impl LatticeSpec {
    /// Minimal valid spec with no particles; callers adjust fields then `validate()`.
    pub fn new(dims: usize, n_side: usize, m_side: usize, volume: f64, cutoff: usize) -> Self {
        LatticeSpec {
            dims,
            n_side,
            m_side,
            volume,
            cutoff,
            e_max: None,
            eta: 0,
            charges: vec![],
            masses: vec![],
            grad_order: 1,
            flux_order: 0,
            penalty: 0.0,
            light_speed: 1.0,
            static_charges: vec![],
        }
    }

    pub fn with_particles(mut self, charges: &[i64], masses: &[f64]) -> Self {
        self.eta = charges.len();
        self.charges = charges.to_vec();
        self.masses = masses.to_vec();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Spec(m));
        if !(1..=3).contains(&self.dims) {
            return bad(format!("dims must be 1, 2 or 3 (got {})", self.dims));
        }
        if self.n_side == 0 || self.m_side == 0 {
            return bad("n_side and m_side must be positive".into());
        }
        if self.n_side % self.m_side != 0 {
            return bad(format!("m_side {} must divide n_side {}", self.m_side, self.n_side));
        }
        if !(self.volume > 0.0) || !self.volume.is_finite() {
            return bad("volume must be positive".into());
        }
        if self.cutoff == 0 || !self.cutoff.is_power_of_two() {
            return bad(format!("cutoff {} is not a positive power of 2", self.cutoff));
        }
        if let Some(e) = self.e_max {
            if !(e > 0.0) || !e.is_finite() {
                return bad("e_max must be positive".into());
            }
        }
        if self.charges.len() != self.eta || self.masses.len() != self.eta {
            return bad(format!(
                "eta = {} but {} charges and {} masses given",
                self.eta,
                self.charges.len(),
                self.masses.len()
            ));
        }
        for (i, (&z, &m)) in self.charges.iter().zip(&self.masses).enumerate() {
            if z == 0 {
                return bad(format!("charge {i} is zero"));
            }
            if !(m > 0.0) {
                return bad(format!("mass {i} must be positive"));
            }
            if z.unsigned_abs() as f64 / m > 1.0 {
                return bad(format!("|zeta|/m > 1 for particle {i}"));
            }
        }
        if self.grad_order == 0 {
            return bad("grad_order must be >= 1".into());
        }
        if 2 * self.grad_order + 1 > self.n_side {
            return bad(format!("gradient stencil 2a+1 = {} exceeds n_side", 2 * self.grad_order + 1));
        }
        if 2 * self.flux_order + 1 > self.m_side {
            return bad(format!("flux cube 2b+1 = {} exceeds m_side", 2 * self.flux_order + 1));
        }
        if self.h() < self.delta() {
            return bad("h must be >= delta".into());
        }
        if !(self.penalty >= 0.0) {
            return bad("penalty must be >= 0".into());
        }
        if !(self.light_speed > 0.0) {
            return bad("light_speed must be > 0".into());
        }
        for s in &self.static_charges {
            self.check_cell(&s.cell)?;
        }
        Ok(())
    }

    pub fn side_length(&self) -> f64 {
        self.volume.powf(1.0 / self.dims as f64)
    }
    /// Particle grid spacing Δ.
    pub fn delta(&self) -> f64 {
        self.side_length() / self.n_side as f64
    }
    /// Field cell width h.
    pub fn h(&self) -> f64 {
        self.side_length() / self.m_side as f64
    }
    pub fn e_max(&self) -> f64 {
        self.e_max.unwrap_or(self.cutoff as f64 * self.h())
    }
    /// Spacing between adjacent field levels, E_max/Λ.
    pub fn field_unit(&self) -> f64 {
        self.e_max() / self.cutoff as f64
    }
    pub fn n_points(&self) -> usize {
        self.n_side.pow(self.dims as u32)
    }
    pub fn n_cells(&self) -> usize {
        self.m_side.pow(self.dims as u32)
    }
    pub fn n_links(&self) -> usize {
        self.dims * self.n_cells()
    }
    pub fn link_dim(&self) -> usize {
        2 * self.cutoff
    }
    /// Field-level spacing that makes a unit lattice divergence (b = 0) carry exactly
    /// one charge quantum: (h²/2)·β₀·unit = 4π.
    pub fn gauss_field_quantum(&self) -> f64 {
        let beta0 = if self.dims == 3 { self.h() } else { 1.0 };
        8.0 * std::f64::consts::PI / (self.h() * self.h() * beta0)
    }
    /// Sets E_max so that field levels are spaced by `gauss_field_quantum`.
    pub fn with_gauss_units(mut self) -> Self {
        self.e_max = Some(self.cutoff as f64 * self.gauss_field_quantum());
        self
    }

    pub fn check_cell(&self, q: &[usize]) -> Result<()> {
        if q.len() != self.dims || q.iter().any(|&c| c >= self.m_side) {
            return Err(Error::Range(format!("cell {q:?} outside {}^{}", self.m_side, self.dims)));
        }
        Ok(())
    }

    pub fn cell_index(&self, q: &[usize]) -> usize {
        flatten(q, self.m_side)
    }
    pub fn cell_coords(&self, idx: usize) -> Vec<usize> {
        unflatten(idx, self.m_side, self.dims)
    }
    pub fn point_index(&self, x: &[usize]) -> usize {
        flatten(x, self.n_side)
    }
    pub fn point_coords(&self, idx: usize) -> Vec<usize> {
        unflatten(idx, self.n_side, self.dims)
    }

    /// Dense index of a link: `μ·M + cell_index(site)`.
    pub fn link_index(&self, l: &LinkId) -> usize {
        l.dir * self.n_cells() + self.cell_index(&l.site)
    }
    pub fn link_at(&self, idx: usize) -> LinkId {
        let m = self.n_cells();
        LinkId { site: self.cell_coords(idx % m), dir: idx / m }
    }
    pub fn links(&self) -> impl Iterator<Item = LinkId> + '_ {
        (0..self.n_links()).map(|i| self.link_at(i))
    }

    /// Link `(q + k e_μ, ν)` as a dense index.
    pub fn link_offset(&self, q: &[usize], mu: usize, k: i64, nu: usize) -> usize {
        let s = shift_site(q, mu, k, self.m_side);
        nu * self.n_cells() + self.cell_index(&s)
    }

    pub fn cell_of(&self, x: &[usize]) -> Result<Vec<usize>> {
        cell_of(self, x)
    }
}

pub fn flatten(c: &[usize], side: usize) -> usize {
    c.iter().fold(0, |acc, &v| acc * side + v)
}

pub fn unflatten(mut idx: usize, side: usize, dims: usize) -> Vec<usize> {
    let mut out = vec![0; dims];
    for d in (0..dims).rev() {
        out[d] = idx % side;
        idx /= side;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinkId {
    pub site: Vec<usize>,
    pub dir: usize,
}

impl LinkId {
    pub fn new(site: &[usize], dir: usize) -> Self {
        LinkId { site: site.to_vec(), dir }
    }
}

/// Field cell containing particle grid point `x`.
pub fn cell_of(spec: &LatticeSpec, x: &[usize]) -> Result<Vec<usize>> {
    if x.len() != spec.dims {
        return Err(Error::Range(format!("point {x:?} has wrong dimension")));
    }
    if let Some(&bad) = x.iter().find(|&&c| c >= spec.n_side) {
        return Err(Error::Range(format!("coordinate {bad} outside [0, {})", spec.n_side)));
    }
    let per = spec.n_side / spec.m_side;
    Ok(x.iter().map(|&c| c / per).collect())
}

/// `q + k e_μ` with periodic wraparound in axis μ only.
pub fn shift_site(q: &[usize], mu: usize, k: i64, side: usize) -> Vec<usize> {
    let mut out = q.to_vec();
    out[mu] = (q[mu] as i64 + k).rem_euclid(side as i64) as usize;
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    pub link: LinkId,
    /// +1 traverses the link along +e_μ, −1 against it.
    pub orientation: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub steps: Vec<PathStep>,
    /// Increment count per step (the m⃗ of the shift operator).
    pub multiplicity: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathClass {
    OpenPath,
    ContractibleLoop,
    NonContractibleLoop(Vec<i64>),
}

impl Path {
    pub fn new(steps: Vec<PathStep>) -> Self {
        let multiplicity = vec![1; steps.len()];
        Path { steps, multiplicity }
    }

    /// Walks from `start` taking unit moves `(axis, ±1)`.
    pub fn walk(spec: &LatticeSpec, start: &[usize], moves: &[(usize, i8)]) -> Self {
        let mut at = start.to_vec();
        let mut steps = Vec::with_capacity(moves.len());
        for &(mu, s) in moves {
            let next = shift_site(&at, mu, s as i64, spec.m_side);
            let site = if s > 0 { at.clone() } else { next.clone() };
            steps.push(PathStep { link: LinkId { site, dir: mu }, orientation: s });
            at = next;
        }
        Path::new(steps)
    }

    /// Straight loop of `m_side` steps along `axis`.
    pub fn straight_loop(spec: &LatticeSpec, start: &[usize], axis: usize) -> Self {
        Path::walk(spec, start, &vec![(axis, 1); spec.m_side])
    }

    /// Counter-clockwise unit square in the (μ, ν) plane.
    pub fn unit_square(spec: &LatticeSpec, corner: &[usize], mu: usize, nu: usize) -> Self {
        Path::walk(spec, corner, &[(mu, 1), (nu, 1), (mu, -1), (nu, -1)])
    }

    pub fn reversed(&self) -> Self {
        let steps = self
            .steps
            .iter()
            .rev()
            .map(|s| PathStep { link: s.link.clone(), orientation: -s.orientation })
            .collect();
        let multiplicity = self.multiplicity.iter().rev().copied().collect();
        Path { steps, multiplicity }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_simple(&self) -> bool {
        let mut seen: Vec<&LinkId> = self.steps.iter().map(|s| &s.link).collect();
        seen.sort();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}

fn step_ends(step: &PathStep, side: usize) -> (Vec<usize>, Vec<usize>) {
    let far = shift_site(&step.link.site, step.link.dir, 1, side);
    if step.orientation > 0 {
        (step.link.site.clone(), far)
    } else {
        (far, step.link.site.clone())
    }
}

pub fn classify_path(spec: &LatticeSpec, p: &Path) -> Result<PathClass> {
    if p.steps.is_empty() {
        return Err(Error::Structural("empty path".into()));
    }
    if p.multiplicity.len() != p.steps.len() {
        return Err(Error::Structural("multiplicity length differs from step count".into()));
    }
    let mut disp = vec![0i64; spec.dims];
    let mut prev_head: Option<Vec<usize>> = None;
    for (i, step) in p.steps.iter().enumerate() {
        if step.orientation != 1 && step.orientation != -1 {
            return Err(Error::Structural(format!("step {i} has orientation {}", step.orientation)));
        }
        spec.check_cell(&step.link.site)?;
        if step.link.dir >= spec.dims {
            return Err(Error::Structural(format!("step {i} direction out of range")));
        }
        let (tail, head) = step_ends(step, spec.m_side);
        if let Some(h) = &prev_head {
            if *h != tail {
                return Err(Error::Structural(format!("step {i} does not start where step {} ended", i - 1)));
            }
        }
        disp[step.link.dir] += step.orientation as i64;
        prev_head = Some(head);
    }
    let (start, _) = step_ends(&p.steps[0], spec.m_side);
    if prev_head.as_ref() != Some(&start) {
        return Ok(PathClass::OpenPath);
    }
    let m = spec.m_side as i64;
    let winding: Vec<i64> = disp.iter().map(|d| d / m).collect();
    if winding.iter().all(|&w| w == 0) {
        Ok(PathClass::ContractibleLoop)
    } else {
        Ok(PathClass::NonContractibleLoop(winding))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: usize, n: usize, m: usize) -> LatticeSpec {
        LatticeSpec::new(d, n, m, (m as f64).powi(d as i32), 1)
    }

    #[test]
    fn cell_of_examples() {
        assert_eq!(cell_of(&spec(1, 8, 4), &[5]).unwrap(), vec![2]);
        assert_eq!(cell_of(&spec(2, 4, 4), &[3, 1]).unwrap(), vec![3, 1]);
        assert_eq!(cell_of(&spec(3, 8, 2), &[7, 0, 4]).unwrap(), vec![1, 0, 1]);
        assert!(matches!(cell_of(&spec(1, 8, 4), &[8]), Err(Error::Range(_))));
    }

    #[test]
    fn cells_partition_points() {
        for (d, n, m) in [(1, 8, 4), (2, 6, 3), (2, 8, 2), (3, 4, 2), (2, 8, 8)] {
            let s = spec(d, n, m);
            let mut counts = vec![0usize; s.n_cells()];
            for i in 0..s.n_points() {
                let q = cell_of(&s, &s.point_coords(i)).unwrap();
                counts[s.cell_index(&q)] += 1;
            }
            let per = (n / m).pow(d as u32);
            assert!(counts.iter().all(|&c| c == per), "{d} {n} {m}");
        }
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift_site(&[3], 0, 1, 4), vec![0]);
        assert_eq!(shift_site(&[1, 2], 1, -3, 4), vec![1, 3]);
        assert_eq!(shift_site(&[0, 0, 0], 2, 0, 4), vec![0, 0, 0]);
    }

    #[test]
    fn classify_examples() {
        let s = spec(2, 4, 4);
        assert_eq!(
            classify_path(&s, &Path::straight_loop(&s, &[1, 2], 0)).unwrap(),
            PathClass::NonContractibleLoop(vec![1, 0])
        );
        assert_eq!(
            classify_path(&s, &Path::unit_square(&s, &[3, 3], 0, 1)).unwrap(),
            PathClass::ContractibleLoop
        );
        assert_eq!(classify_path(&s, &Path::walk(&s, &[0, 0], &[(1, 1)])).unwrap(), PathClass::OpenPath);
    }

    #[test]
    fn disconnected_is_structural() {
        let s = spec(2, 4, 4);
        let mut p = Path::walk(&s, &[0, 0], &[(0, 1), (0, 1)]);
        p.steps[1].link.site = vec![2, 2];
        assert!(matches!(classify_path(&s, &p), Err(Error::Structural(_))));
    }

    #[test]
    fn rotation_and_reversal() {
        let s = spec(2, 3, 3);
        let p = Path::walk(&s, &[0, 0], &[(0, 1), (0, 1), (1, 1), (0, 1), (1, 1), (1, 1)]);
        let w = match classify_path(&s, &p).unwrap() {
            PathClass::NonContractibleLoop(w) => w,
            c => panic!("{c:?}"),
        };
        assert_eq!(w, vec![1, 1]);
        for r in 0..p.len() {
            let mut q = p.clone();
            q.steps.rotate_left(r);
            assert_eq!(classify_path(&s, &q).unwrap(), PathClass::NonContractibleLoop(w.clone()));
        }
        assert_eq!(
            classify_path(&s, &p.reversed()).unwrap(),
            PathClass::NonContractibleLoop(vec![-1, -1])
        );
        let mut both = p.clone();
        both.steps.extend(p.reversed().steps);
        both.multiplicity = vec![1; both.steps.len()];
        assert_eq!(classify_path(&s, &both).unwrap(), PathClass::ContractibleLoop);
    }

    #[test]
    fn spec_invariants() {
        let mut s = spec(1, 8, 4);
        assert!(s.validate().is_ok());
        s.m_side = 3;
        assert!(s.validate().is_err());
        let mut s = spec(1, 8, 4);
        s.cutoff = 3;
        assert!(s.validate().is_err());
        let s = spec(1, 8, 4).with_particles(&[2], &[1.0]);
        assert!(s.validate().is_err());
        let mut s = spec(1, 4, 4);
        s.flux_order = 2;
        assert!(s.validate().is_err());
    }

    #[test]
    fn link_index_roundtrip() {
        let s = spec(3, 4, 2);
        for i in 0..s.n_links() {
            assert_eq!(s.link_index(&s.link_at(i)), i);
        }
    }
}
