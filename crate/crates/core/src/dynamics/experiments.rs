//! Penalty convergence, interaction-picture check, loop energy shifts,
//! topology of path operators, suppression sweeps and the Coulomb initializer.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{distance, evolve_exact, evolve_zeno, inner, log_slope, spectral_norm, StateVector};
use crate::error::{Error, Result};
use crate::gausscheck::{check_bruteforce, cube_charges, ClassicalConfig, FluxStencil, GaussReport};
use crate::lattice::{classify_path, CellCharge, LatticeSpec, Path, PathClass};
use crate::ops::field::{path_increments, plaquette_axes, plaquette_terms, shift_wraps, shifted_index};
use crate::ops::hamiltonian::{build_hc, build_hf, build_hf1, build_hf2, build_hpi};
use crate::ops::{kernel_basis, SparseOperator, Space};
use crate::C64;

const TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyRow {
    pub lambda: f64,
    /// ‖ψ_λ(t) − ψ_Zeno(t)‖₂.
    pub error: f64,
    /// ‖H_f‖²t/λ.
    pub scale: f64,
    /// ⟨H_c⟩ at time t.
    pub hc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyTable {
    pub hf_norm: f64,
    pub t: f64,
    pub rows: Vec<PenaltyRow>,
    /// p in error ∝ λ^{−p}, least squares over rows with positive λ.
    pub fitted_exponent: f64,
    pub warnings: Vec<String>,
}

/// Compares exp(−i(H_f + λH_c)t)ψ₀ with the Zeno-projected evolution.
pub fn penalty_convergence(spec: &LatticeSpec, psi0: &[C64], t: f64, lambdas: &[f64]) -> Result<PenaltyTable> {
    let space = Space::full(spec)?;
    let hf = build_hf(&space)?;
    let hc = build_hc(&space)?;
    let sector = kernel_basis(&space)?;
    let zeno = evolve_zeno(&hf.op, &sector, psi0, t, TOL)?;
    let hf_norm = spectral_norm(&hf.op);
    let mut rows = Vec::new();
    for &lam in lambdas {
        let h = SparseOperator::sum(space.dim(), &[(1.0, &hf.op), (lam, &hc)])?;
        let psi = evolve_exact(&h, psi0, t, TOL)?;
        rows.push(PenaltyRow {
            lambda: lam,
            error: distance(&psi, &zeno),
            scale: if lam > 0.0 { hf_norm * hf_norm * t / lam } else { f64::INFINITY },
            hc: hc.expectation(&psi).re,
        });
    }
    let pos: Vec<&PenaltyRow> = rows.iter().filter(|r| r.lambda > 0.0).collect();
    let fitted_exponent = -log_slope(&pos.iter().map(|r| r.lambda).collect::<Vec<_>>(), &pos.iter().map(|r| r.error).collect::<Vec<_>>());
    Ok(PenaltyTable { hf_norm, t, rows, fitted_exponent, warnings: hf.warnings })
}

/// The standard penalty instance: D=1, M=4, Λ=1, one +1 particle and a
/// static −1 charge, levels in charge quanta.
pub fn penalty_instance() -> LatticeSpec {
    let mut s = LatticeSpec::new(1, 4, 4, 4.0, 1).with_particles(&[1], &[1.0]);
    s.static_charges = vec![CellCharge { cell: vec![2], charge: -1 }];
    s.with_gauss_units()
}

/// Particle i at the corner of cell (i mod m_side) along the diagonal.
pub fn default_particle_points(spec: &LatticeSpec) -> Vec<Vec<usize>> {
    let block = spec.n_side / spec.m_side;
    (0..spec.eta).map(|i| vec![(i % spec.m_side) * block; spec.dims]).collect()
}

/// Sector basis state with the given particle points: the smallest total |ε|,
/// preferring states that a +1 winding along axis 0 does not wrap.
pub fn reference_state(space: &Space, points: &[Vec<usize>]) -> Result<usize> {
    let spec = &space.spec;
    let winding = path_increments(spec, &Path::straight_loop(spec, &vec![0; spec.dims], 0))?;
    let ok = crate::ops::sector::constraint_diagonal(space)?;
    let fd = space.field_dim();
    let mut base = 0;
    for (i, x) in points.iter().enumerate() {
        for (mu, &c) in x.iter().enumerate() {
            base = space.with_digit(base, space.particle_reg(i, mu), c);
        }
    }
    (base..base + fd)
        .filter(|&idx| ok[idx])
        .min_by_key(|&idx| {
            (shift_wraps(space, &winding, idx), (0..spec.n_links()).map(|l| space.link_level(idx, l).abs()).sum::<i64>())
        })
        .ok_or_else(|| Error::Argument("no sector state for these particle positions".into()))
}

/// ‖U_frame(t)·Π_k exp(−iH_int(t_k)dt)ψ₀ − exp(−iHt)ψ₀‖ with H₀ = H_f1 + λH_c
/// as the frame and midpoint times t_k.
pub fn interaction_frame_check(spec: &LatticeSpec, psi0: &[C64], t: f64, steps: usize) -> Result<f64> {
    let space = Space::full(spec)?;
    if space.dim() > 1 << 14 {
        return Err(Error::Resource(format!("interaction-frame check limited to 2^14 states, got {}", space.dim())));
    }
    if steps == 0 {
        return Err(Error::Argument("steps must be positive".into()));
    }
    let hf1 = build_hf1(&space);
    let hc = build_hc(&space)?;
    let h0 = SparseOperator::sum(space.dim(), &[(1.0, &hf1), (spec.penalty, &hc)])?;
    let mut parts = vec![build_hf2(&space)?.op];
    if space.has_particles() {
        parts.push(build_hpi(&space)?);
    }
    let v = SparseOperator::sum(space.dim(), &parts.iter().map(|p| (1.0, p)).collect::<Vec<_>>())?;
    let full = SparseOperator::sum(space.dim(), &[(1.0, &h0), (1.0, &v)])?;
    let reference = evolve_exact(&full, psi0, t, 1e-13)?;
    let d0: Vec<f64> = h0.diag().iter().map(|z| z.re).collect();
    let dt = t / steps as f64;
    let mut phi = psi0.to_vec();
    for k in 0..steps {
        let s = (k as f64 + 0.5) * dt;
        let hint = SparseOperator::from_rows(space.dim(), |r| {
            v.row(r).map(|(c, x)| (c, x * C64::from_polar(1.0, (d0[r] - d0[c]) * s))).collect()
        });
        phi = evolve_exact(&hint, &phi, dt, 1e-13)?;
    }
    let out: Vec<C64> = phi.iter().zip(&d0).map(|(a, &e)| a * C64::from_polar(1.0, -e * t)).collect();
    Ok(distance(&out, &reference))
}

/// (measured, formula) for the mean H_f1 shift produced by a unit-increment
/// path operator: ⟨F†H_f1F⟩ − ⟨H_f1⟩ against
/// (h³/8π)(2θ⟨Σ_P s·E⟩ + θ²|P|), θ = E_max/Λ.
pub fn loop_energy_shift(space: &Space, psi: &[C64], path: &Path) -> Result<(f64, f64)> {
    if path.multiplicity.iter().any(|&m| m != 1) {
        return Err(Error::Argument("energy-shift formula needs unit increments".into()));
    }
    let spec = &space.spec;
    let inc = path_increments(spec, path)?;
    let hf1 = build_hf1(space);
    let f = crate::ops::path_operator(space, path)?;
    let fpsi = f.apply(psi);
    let measured = hf1.expectation(&fpsi).re - hf1.expectation(psi).re;
    let theta = spec.field_unit();
    let mut along = 0.0;
    for (idx, a) in psi.iter().enumerate() {
        let p = a.norm_sqr();
        if p > 0.0 {
            along += p * inc.iter().enumerate().map(|(l, &k)| k as f64 * theta * space.link_level(idx, l) as f64).sum::<f64>();
        }
    }
    let formula = spec.h().powi(3) / (8.0 * PI) * (2.0 * theta * along + theta * theta * path.steps.len() as f64);
    Ok((measured, formula))
}

/// Per-basis-state Gauss-law check, including particle and static charges.
pub struct ConstraintOracle<'a> {
    space: &'a Space,
    stencil: FluxStencil,
    statics: Vec<(usize, i64)>,
}

impl<'a> ConstraintOracle<'a> {
    pub fn new(space: &'a Space) -> Result<Self> {
        let spec = &space.spec;
        let statics = spec.static_charges.iter().map(|c| (spec.cell_index(&c.cell), c.charge)).collect();
        Ok(ConstraintOracle { space, stencil: FluxStencil::new(spec, spec.flux_order)?, statics })
    }

    pub fn violated(&self, idx: usize) -> bool {
        let spec = &self.space.spec;
        let mut keys = self.statics.clone();
        for i in 0..self.space.n_particles() {
            keys.push((self.space.particle_cell(idx, i), spec.charges[i]));
        }
        let enclosed = cube_charges(spec, &keys, spec.flux_order);
        !self.stencil.satisfied(&enclosed, |l| self.space.link_level(idx, l))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyRow {
    pub class: String,
    /// ⟨ψ|F†H_cF|ψ⟩.
    pub hc: f64,
    /// Probability weight on basis states where F wraps a link past the cutoff.
    pub wrapped_weight: f64,
}

/// ⟨H_c⟩ after each path operator; exact because F permutes basis states.
pub fn topology_dichotomy(space: &Space, psi: &[C64], paths: &[Path]) -> Result<Vec<TopologyRow>> {
    let oracle = ConstraintOracle::new(space)?;
    paths
        .iter()
        .map(|p| {
            let class = match classify_path(&space.spec, p)? {
                PathClass::OpenPath => "open".to_string(),
                PathClass::ContractibleLoop => "contractible".to_string(),
                PathClass::NonContractibleLoop(w) => format!("non-contractible {w:?}"),
            };
            let inc = path_increments(&space.spec, p)?;
            let (mut hc, mut wrapped) = (0.0, 0.0);
            for (idx, a) in psi.iter().enumerate() {
                let w = a.norm_sqr();
                if w == 0.0 {
                    continue;
                }
                if oracle.violated(shifted_index(space, &inc, idx)) {
                    hc += w;
                }
                if shift_wraps(space, &inc, idx) {
                    wrapped += w;
                }
            }
            Ok(TopologyRow { class, hc, wrapped_weight: wrapped })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopoRow {
    pub m_side: usize,
    pub light_speed: f64,
    pub dim: usize,
    pub hc: f64,
    /// ⟨Σ (E^□)²⟩ over all plaquettes; 0 in D=1.
    pub plaquette_weight: f64,
    /// |⟨ψ(t)|F_P ψ₀⟩|² for the straight winding loop along axis 0.
    pub loop_overlap: f64,
}

fn plaquette_diagonal(space: &Space) -> Result<Vec<f64>> {
    let spec = &space.spec;
    if spec.dims < 2 {
        return Ok(vec![0.0; space.dim()]);
    }
    let normals: Vec<usize> = if spec.dims == 2 { vec![0] } else { (0..3).collect() };
    let mut forms = Vec::new();
    for p in 0..spec.n_cells() {
        for &nu in &normals {
            plaquette_axes(spec.dims, nu)?;
            forms.push(plaquette_terms(spec, &spec.cell_coords(p), nu)?);
        }
    }
    let theta = spec.field_unit();
    Ok((0..space.dim())
        .map(|idx| {
            forms
                .iter()
                .map(|f| f.iter().map(|&(l, c)| c * theta * space.link_level(idx, l) as f64).sum::<f64>().powi(2))
                .sum()
        })
        .collect())
}

/// Evolves the reference state of each spec under H (penalty included) and
/// reports ⟨H_c⟩, plaquette weight and winding-loop overlap at time t.
pub fn topological_suppression(specs: &[LatticeSpec], t: f64) -> Result<Vec<TopoRow>> {
    specs
        .iter()
        .map(|spec| {
            let space = Space::full(spec)?;
            let idx0 = reference_state(&space, &default_particle_points(spec))?;
            let psi0 = StateVector::basis(space.dim(), idx0).amps;
            let h = crate::ops::build_h(&space)?.op;
            let psi = evolve_exact(&h, &psi0, t, 1e-10)?;
            let hc = build_hc(&space)?.expectation(&psi).re;
            let plaq = plaquette_diagonal(&space)?;
            let plaquette_weight = psi.iter().zip(&plaq).map(|(a, w)| a.norm_sqr() * w).sum();
            let inc = path_increments(spec, &Path::straight_loop(spec, &vec![0; spec.dims], 0))?;
            let target = StateVector::basis(space.dim(), shifted_index(&space, &inc, idx0)).amps;
            let loop_overlap = inner(&psi, &target).norm_sqr();
            Ok(TopoRow { m_side: spec.m_side, light_speed: spec.light_speed, dim: space.dim(), hc, plaquette_weight, loop_overlap })
        })
        .collect()
}

/// Winding-overlap sweep: D=1, Λ=2, a +1/−1 particle pair, n_side = 2·m_side.
pub fn m_side_sweep(m_sides: &[usize], penalty: f64) -> Vec<LatticeSpec> {
    m_sides
        .iter()
        .map(|&m| {
            let mut s = LatticeSpec::new(1, 2 * m, m, m as f64, 2).with_particles(&[1, -1], &[1.0, 1.0]);
            s.penalty = penalty;
            s.with_gauss_units()
        })
        .collect()
}

/// Plaquette sweep: D=2, M=3×3, Λ=1, no particles, varying c.
pub fn light_speed_sweep(cs: &[f64], penalty: f64) -> Vec<LatticeSpec> {
    cs.iter()
        .map(|&c| {
            let mut s = LatticeSpec::new(2, 3, 3, 9.0, 1);
            s.light_speed = c;
            s.penalty = penalty;
            s
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoulombInit {
    pub config: ClassicalConfig,
    pub report: GaussReport,
    /// Links whose sampled level fell outside [−Λ, Λ−1] and were clamped.
    pub clamped: usize,
    /// Σ_q |residual_q|.
    pub total_residual: f64,
}

/// Samples the continuum Coulomb field of cell-centred charges at link
/// midpoints and rounds to the nearest level (ties up).
///
/// D=3 uses minimum-image point charges; D=1 uses the periodic solution
/// E(x) = 4πΣζ(½ − frac((x − x_i)/L)). The field is rescaled by the lattice
/// flux normalization so a unit divergence carries 4π.
pub fn init_coulomb_field(spec: &LatticeSpec, charges: &[CellCharge]) -> Result<CoulombInit> {
    spec.validate()?;
    let h = spec.h();
    let side = spec.side_length();
    let rho = match spec.dims {
        1 => h * h / 2.0,
        3 => h / 2.0,
        d => return Err(Error::UnsupportedDimension(format!("Coulomb initializer supports D=1 and D=3, got {d}"))),
    };
    for c in charges {
        spec.check_cell(&c.cell)?;
    }
    let theta = spec.field_unit();
    let lam = spec.cutoff as i64;
    let mut clamped = 0;
    let mut links = vec![0i64; spec.n_links()];
    for (l, slot) in links.iter_mut().enumerate() {
        let link = spec.link_at(l);
        let mid: Vec<f64> = (0..spec.dims)
            .map(|k| (link.site[k] as f64 + 0.5) * h + if k == link.dir { 0.5 * h } else { 0.0 })
            .collect();
        let mut e = 0.0;
        for c in charges {
            let z = c.charge as f64;
            let pos: Vec<f64> = c.cell.iter().map(|&q| (q as f64 + 0.5) * h).collect();
            if spec.dims == 1 {
                e += 4.0 * PI * z * (0.5 - ((mid[0] - pos[0]) / side).rem_euclid(1.0));
            } else {
                let r: Vec<f64> = mid.iter().zip(&pos).map(|(m, p)| (m - p) - side * ((m - p) / side).round()).collect();
                let r2: f64 = r.iter().map(|x| x * x).sum();
                if r2 < 1e-24 {
                    return Err(Error::Numerical("charge sits on a link midpoint".into()));
                }
                e += z * r[link.dir] / r2.powf(1.5);
            }
        }
        let level = (e / rho / theta + 0.5).floor() as i64;
        if level < -lam || level >= lam {
            clamped += 1;
        }
        *slot = level.clamp(-lam, lam - 1);
    }
    let config = ClassicalConfig::new(spec, charges.to_vec(), links);
    let report = check_bruteforce(&config, spec.flux_order)?;
    let total_residual = report.residual.iter().map(|r| r.abs()).sum();
    Ok(CoulombInit { config, report, clamped, total_residual })
}
