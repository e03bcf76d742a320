//! Gauss-law violation detectors on classical configurations.
//!
//! The residual at cell q compares the quadrature flux through the faces of the
//! (2b+1)^D cube around q with 4π times the charge it encloses. Faces sit on the
//! staggered links: the outer face in direction μ is carried by links
//! `(q + b e_μ + u, μ)` and the inner one by `(q − (b+1) e_μ + u, μ)`, so at
//! b = 0 the flux is the lattice divergence `E_{q,μ} − E_{q−e_μ,μ}`.

mod sorted;

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use sorted::{check_sorted, comparator_scaling, merge_sort_counted, ScalingRow, ScalingTable};

use crate::error::{Error, Result};
use crate::lattice::{shift_site, CellCharge, LatticeSpec};
use crate::stencils::SurfaceQuadrature;

/// Relative tolerance of the zero-residual indicator, in units of 4π.
pub const TOL_RECT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalConfig {
    pub spec: LatticeSpec,
    pub charges: Vec<CellCharge>,
    /// Field level ε per dense link index.
    pub links: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussReport {
    pub violated: bool,
    /// flux − 4π·charge per cell (dense cell order).
    pub residual: Vec<f64>,
    /// Total comparisons; zero for the brute-force checker.
    pub comparator_count: u64,
    /// Comparisons per sorting stage.
    pub stages: Vec<(String, u64)>,
}

impl GaussReport {
    /// Cells whose residual is nonzero under the rect tolerance.
    pub fn support(&self) -> Vec<usize> {
        (0..self.residual.len()).filter(|&q| residual_is_nonzero(self.residual[q])).collect()
    }

    pub fn residual_in_charge_units(&self) -> Vec<f64> {
        self.residual.iter().map(|r| r / (4.0 * PI)).collect()
    }
}

pub fn residual_is_nonzero(r: f64) -> bool {
    r.abs() >= TOL_RECT * 4.0 * PI
}

impl ClassicalConfig {
    /// Configuration with the spec's static charges added to `charges`.
    pub fn new(spec: &LatticeSpec, charges: Vec<CellCharge>, links: Vec<i64>) -> Self {
        let mut all = spec.static_charges.clone();
        all.extend(charges);
        ClassicalConfig { spec: spec.clone(), charges: all, links }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.spec;
        if !(1..=3).contains(&s.dims) || s.m_side == 0 || s.cutoff == 0 {
            return Err(Error::Spec("config spec has invalid dims, m_side or cutoff".into()));
        }
        if self.links.len() != s.n_links() {
            return Err(Error::DimensionMismatch(format!("{} link values for {} links", self.links.len(), s.n_links())));
        }
        let lam = s.cutoff as i64;
        if let Some((l, e)) = self.links.iter().enumerate().find(|(_, &e)| e < -lam || e >= lam) {
            return Err(Error::Range(format!("link {l} level {e} outside [−{lam}, {lam})")));
        }
        for c in &self.charges {
            s.check_cell(&c.cell)?;
            if c.charge == 0 {
                return Err(Error::Argument("zero charge entry".into()));
            }
        }
        Ok(())
    }

    /// Dense cell index and charge of every entry.
    pub fn keyed_charges(&self) -> Vec<(usize, i64)> {
        self.charges.iter().map(|c| (self.spec.cell_index(&c.cell), c.charge)).collect()
    }
}

fn check_cube(spec: &LatticeSpec, b: usize) -> Result<()> {
    if 2 * b + 1 > spec.m_side {
        return Err(Error::Argument(format!("flux cube 2b+1 = {} exceeds m_side {}", 2 * b + 1, spec.m_side)));
    }
    Ok(())
}

/// Quadrature flux through the (2b+1)-cube around every cell.
pub fn cell_fluxes(spec: &LatticeSpec, links: &[i64], b: usize) -> Vec<f64> {
    let st = FluxStencil::build(spec, b);
    (0..spec.n_cells()).map(|q| st.flux(q, |l| links[l])).collect()
}

/// Charge enclosed in the Chebyshev (2b+1)-cube around every cell.
pub fn cube_charges(spec: &LatticeSpec, charges: &[(usize, i64)], b: usize) -> Vec<i64> {
    let mut per_cell = vec![0i64; spec.n_cells()];
    for &(q, z) in charges {
        per_cell[q] += z;
    }
    let side = 2 * b + 1;
    let n_off = side.pow(spec.dims as u32);
    (0..spec.n_cells())
        .map(|qi| {
            let q = spec.cell_coords(qi);
            (0..n_off)
                .map(|o| {
                    let mut s = q.clone();
                    let mut rest = o;
                    for mu in 0..spec.dims {
                        s = shift_site(&s, mu, (rest % side) as i64 - b as i64, spec.m_side);
                        rest /= side;
                    }
                    per_cell[spec.cell_index(&s)]
                })
                .sum()
        })
        .collect()
}

/// Per-cell flux stencil: `(link, weight)` pairs with duplicates merged, so a
/// flux is one dot product with the link levels.
#[derive(Debug, Clone)]
pub struct FluxStencil {
    cells: Vec<Vec<(usize, f64)>>,
}

impl FluxStencil {
    pub fn new(spec: &LatticeSpec, b: usize) -> Result<Self> {
        check_cube(spec, b)?;
        Ok(Self::build(spec, b))
    }

    fn build(spec: &LatticeSpec, b: usize) -> Self {
        let faces = SurfaceQuadrature::new(spec.dims, b, spec.h()).face_weights();
        let pref = spec.h() * spec.h() / 2.0 * spec.field_unit();
        let bi = b as i64;
        let cells = (0..spec.n_cells())
            .map(|qi| {
                let q = spec.cell_coords(qi);
                let mut acc: std::collections::BTreeMap<usize, f64> = Default::default();
                for mu in 0..spec.dims {
                    let tr = crate::stencils::transverse_axes(spec.dims, mu);
                    for (u, w) in &faces {
                        let mut base = q.clone();
                        for (&nu, &off) in tr.iter().zip(u) {
                            base = shift_site(&base, nu, off, spec.m_side);
                        }
                        *acc.entry(spec.link_offset(&base, mu, bi, mu)).or_default() += pref * w;
                        *acc.entry(spec.link_offset(&base, mu, -bi - 1, mu)).or_default() -= pref * w;
                    }
                }
                acc.into_iter().filter(|e| e.1 != 0.0).collect()
            })
            .collect();
        FluxStencil { cells }
    }

    /// Merged `(link, weight)` pairs of cell `q`, weights in flux units per level.
    pub fn terms(&self, q: usize) -> &[(usize, f64)] {
        &self.cells[q]
    }

    pub fn flux(&self, q: usize, level: impl Fn(usize) -> i64) -> f64 {
        self.cells[q].iter().map(|&(l, w)| w * level(l) as f64).sum()
    }

    /// True iff every cell's flux equals 4π times its enclosed charge.
    pub fn satisfied(&self, enclosed: &[i64], level: impl Fn(usize) -> i64) -> bool {
        (0..self.cells.len()).all(|q| !residual_is_nonzero(self.flux(q, &level) - 4.0 * PI * enclosed[q] as f64))
    }
}

/// Reference checker: direct per-cell summation.
pub fn check_bruteforce(cfg: &ClassicalConfig, b: usize) -> Result<GaussReport> {
    cfg.validate()?;
    check_cube(&cfg.spec, b)?;
    let flux = cell_fluxes(&cfg.spec, &cfg.links, b);
    let enclosed = cube_charges(&cfg.spec, &cfg.keyed_charges(), b);
    let residual: Vec<f64> = flux.iter().zip(&enclosed).map(|(f, &c)| f - 4.0 * PI * c as f64).collect();
    let violated = residual.iter().any(|&r| residual_is_nonzero(r));
    Ok(GaussReport { violated, residual, comparator_count: 0, stages: vec![] })
}

/// Splits every |ζ| > 1 charge into |ζ| unit charges at the same cell.
pub fn replica_expand(cfg: &ClassicalConfig) -> ClassicalConfig {
    let mut out = cfg.clone();
    out.charges = cfg
        .charges
        .iter()
        .flat_map(|c| {
            let unit = c.charge.signum();
            std::iter::repeat_n(CellCharge { cell: c.cell.clone(), charge: unit }, c.charge.unsigned_abs() as usize)
        })
        .collect();
    out
}

/// Spec used by the randomized and exhaustive equivalence suites: h = 1,
/// field levels spaced by one charge quantum.
pub fn checker_spec(dims: usize, m_side: usize, cutoff: usize, b: usize) -> LatticeSpec {
    let mut s = LatticeSpec::new(dims, 3 * m_side, m_side, (m_side as f64).powi(dims as i32), cutoff);
    s.flux_order = b;
    s.with_gauss_units()
}

fn random_cell(rng: &mut impl Rng, spec: &LatticeSpec) -> Vec<usize> {
    (0..spec.dims).map(|_| rng.random_range(0..spec.m_side)).collect()
}

/// Adds `amount` to every link of a random lattice walk from `a` to `b`
/// (raising the divergence by `amount` at `a` and lowering it at `b`).
fn add_path(rng: &mut impl Rng, spec: &LatticeSpec, links: &mut [i64], a: &[usize], b: &[usize], amount: i64) {
    let mut at = a.to_vec();
    let m = spec.m_side as i64;
    loop {
        let pending: Vec<usize> = (0..spec.dims).filter(|&mu| at[mu] != b[mu]).collect();
        if pending.is_empty() {
            break;
        }
        let mu = pending[rng.random_range(0..pending.len())];
        let fwd = (b[mu] as i64 - at[mu] as i64).rem_euclid(m);
        let step = if fwd <= m - fwd { 1 } else { -1 };
        let next = shift_site(&at, mu, step, spec.m_side);
        let (site, sign) = if step > 0 { (at.clone(), 1) } else { (next.clone(), -1) };
        links[spec.link_offset(&site, 0, 0, mu)] += sign * amount;
        at = next;
    }
}

/// Random configuration: balanced charge pairs joined by field strings plus
/// closed loops, then perturbed (a link or a charge moved) with probability ½.
pub fn random_config(rng: &mut impl Rng, dims: usize, max_m: usize, max_eta: usize, max_zeta: i64, b: usize) -> ClassicalConfig {
    let lo = 2 * b + 1;
    let max_side = match dims {
        1 => max_m,
        2 => (max_m as f64).sqrt() as usize,
        _ => (max_m as f64).cbrt() as usize,
    }
    .max(lo);
    let m_side = rng.random_range(lo..=max_side);
    let cutoff = 8;
    let spec = checker_spec(dims, m_side, cutoff, b);
    let eta = rng.random_range(0..=max_eta);
    let mut links = vec![0i64; spec.n_links()];
    let mut charges = Vec::with_capacity(eta);
    let mut i = 0;
    while i < eta {
        let z = rng.random_range(1..=max_zeta) * if rng.random_bool(0.5) { 1 } else { -1 };
        let a = random_cell(rng, &spec);
        charges.push(CellCharge { cell: a.clone(), charge: z });
        if i + 1 < eta {
            let c = random_cell(rng, &spec);
            charges.push(CellCharge { cell: c.clone(), charge: -z });
            add_path(rng, &spec, &mut links, &a, &c, z);
        }
        i += 2;
    }
    for _ in 0..rng.random_range(0..3) {
        let a = random_cell(rng, &spec);
        let c = random_cell(rng, &spec);
        let amount = if rng.random_bool(0.5) { 1 } else { -1 };
        add_path(rng, &spec, &mut links, &a, &c, amount);
        add_path(rng, &spec, &mut links, &c, &a, amount);
    }
    if rng.random_bool(0.5) {
        if !charges.is_empty() && rng.random_bool(0.5) {
            let k = rng.random_range(0..charges.len());
            charges[k].cell = random_cell(rng, &spec);
        } else {
            let l = rng.random_range(0..links.len());
            links[l] += if rng.random_bool(0.5) { 1 } else { -1 };
        }
    }
    let lam = cutoff as i64;
    for e in links.iter_mut() {
        *e = (*e).clamp(-lam, lam - 1);
    }
    ClassicalConfig { spec, charges, links }
}

/// Every D=1 configuration with m_side ≤ `max_m`, Λ = 1, up to two charges
/// ζ ∈ {±1, ±2}; returns (configs checked, disagreements).
pub fn exhaustive_sweep(max_m: usize, bs: &[usize]) -> Result<(usize, usize)> {
    let zetas = [-2i64, -1, 1, 2];
    let (mut checked, mut bad) = (0, 0);
    for &b in bs {
        for m in (2 * b + 1).max(1)..=max_m {
            let spec = checker_spec(1, m, 1, b);
            let mut charge_sets: Vec<Vec<CellCharge>> = vec![vec![]];
            for q in 0..m {
                for &z in &zetas {
                    charge_sets.push(vec![CellCharge { cell: vec![q], charge: z }]);
                    for q2 in 0..m {
                        for &z2 in &zetas {
                            charge_sets.push(vec![
                                CellCharge { cell: vec![q], charge: z },
                                CellCharge { cell: vec![q2], charge: z2 },
                            ]);
                        }
                    }
                }
            }
            for bits in 0..(1usize << m) {
                let links: Vec<i64> = (0..m).map(|l| if bits >> l & 1 == 1 { 0 } else { -1 }).collect();
                for cs in &charge_sets {
                    let cfg = ClassicalConfig { spec: spec.clone(), charges: cs.clone(), links: links.clone() };
                    let a = check_bruteforce(&cfg, b)?;
                    let s = check_sorted(&cfg, b)?;
                    checked += 1;
                    if a.violated != s.violated || a.support() != s.support() {
                        bad += 1;
                    }
                }
            }
        }
    }
    Ok((checked, bad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one_d(m: usize) -> LatticeSpec {
        checker_spec(1, m, 4, 0)
    }

    #[test]
    fn zero_everything_is_satisfied() {
        let spec = one_d(4);
        let cfg = ClassicalConfig::new(&spec, vec![], vec![0; 4]);
        let r = check_bruteforce(&cfg, 0).unwrap();
        assert!(!r.violated);
        assert!(r.residual.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn lone_charge_is_violated() {
        let spec = one_d(4);
        let cfg = ClassicalConfig::new(&spec, vec![CellCharge { cell: vec![1], charge: 1 }], vec![0; 4]);
        let r = check_bruteforce(&cfg, 0).unwrap();
        assert!(r.violated);
        assert_eq!(r.support(), vec![1]);
        assert!((r.residual[1] + 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn staircase_matches_charge_pair() {
        let spec = one_d(4);
        // One field quantum is 8π/h²; h = 1 here.
        assert!((spec.field_unit() - 8.0 * PI).abs() < 1e-12);
        let charges = vec![CellCharge { cell: vec![1], charge: 1 }, CellCharge { cell: vec![3], charge: -1 }];
        let cfg = ClassicalConfig::new(&spec, charges, vec![0, 1, 1, 0]);
        let r = check_bruteforce(&cfg, 0).unwrap();
        assert!(!r.violated, "{:?}", r.residual);
        assert!(!check_sorted(&cfg, 0).unwrap().violated);
    }

    #[test]
    fn wider_cube_in_1d_telescopes() {
        let spec = checker_spec(1, 6, 4, 1);
        let charges = vec![CellCharge { cell: vec![1], charge: 2 }, CellCharge { cell: vec![4], charge: -2 }];
        let cfg = ClassicalConfig::new(&spec, charges, vec![0, 2, 2, 2, 0, 0]);
        assert!(!check_bruteforce(&cfg, 0).unwrap().violated);
        assert!(!check_bruteforce(&cfg, 1).unwrap().violated);
    }

    #[test]
    fn replica_expansion() {
        let spec = one_d(4);
        let cfg = ClassicalConfig::new(&spec, vec![CellCharge { cell: vec![0], charge: 3 }], vec![0; 4]);
        let e = replica_expand(&cfg);
        assert_eq!(e.charges, vec![CellCharge { cell: vec![0], charge: 1 }; 3]);
        assert_eq!(replica_expand(&e), e);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let cfg = random_config(&mut rng, 2, 36, 6, 3, 0);
            let a = check_bruteforce(&cfg, 0).unwrap();
            let b = check_bruteforce(&replica_expand(&cfg), 0).unwrap();
            assert_eq!(a.residual, b.residual);
        }
    }

    #[test]
    fn random_configs_cover_both_outcomes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (mut ok, mut bad) = (0, 0);
        for _ in 0..200 {
            let cfg = random_config(&mut rng, 1, 64, 8, 3, 0);
            if check_bruteforce(&cfg, 0).unwrap().violated {
                bad += 1
            } else {
                ok += 1
            }
        }
        assert!(ok > 20 && bad > 20, "ok={ok} bad={bad}");
    }

    #[test]
    fn cube_must_fit() {
        let spec = one_d(2);
        let cfg = ClassicalConfig::new(&spec, vec![], vec![0; 2]);
        assert!(check_bruteforce(&cfg, 1).is_err());
    }
}
