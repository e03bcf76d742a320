//! Invariant suites run by `selftest`; each is a small, fixed instance.

use std::f64::consts::PI;

use anyhow::Result;
use gausslab::dynamics::experiments::{loop_energy_shift, penalty_instance, reference_state, topology_dichotomy};
use gausslab::dynamics::{penalty_convergence, StateVector};
use gausslab::estimator::{n_t, thermo_compare, total_tcount, NRule, SimulationParams};
use gausslab::gausscheck::{check_bruteforce, check_sorted, exhaustive_sweep, random_config};
use gausslab::lattice::{LatticeSpec, Path};
use gausslab::lcu;
use gausslab::ops::checks::identity_checks;
use gausslab::ops::sparse::dense_max_diff;
use gausslab::ops::{build_hpi, local_a, local_u, Space};
use gausslab::stencils::{flux_surface, gradient_coeffs, laplacian_coeffs, StencilCoeffs};
use gausslab::C64;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Serialize)]
pub struct Suite {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

fn suite(name: &str, f: impl FnOnce() -> Result<(bool, Value)>) -> Suite {
    match f() {
        Ok((passed, detail)) => Suite { name: name.into(), passed, detail },
        Err(e) => Suite { name: name.into(), passed: false, detail: json!({"error": format!("{e:#}")}) },
    }
}

fn circulant(c: &StencilCoeffs, scale: f64, n: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(n, n);
    for (k, v) in c.to_f64() {
        for r in 0..n {
            let col = (r as i64 + k).rem_euclid(n as i64) as usize;
            m[(r, col)] += C64::new(v * scale, 0.0);
        }
    }
    m
}

fn lcu_suite() -> Result<(bool, Value)> {
    let mut worst: f64 = 0.0;
    let mut bounds = true;
    let h = 1.0;
    for lam in [1usize, 2, 4, 8] {
        let e_max = lam as f64 * h;
        let a = local_a(lam, e_max);
        let da = lcu::lcu_a(lam, e_max)?;
        let da2 = lcu::lcu_a_sq(lam, e_max)?;
        let de2 = lcu::lcu_e_sq(lam)?;
        let du = lcu::lcu_u(lam)?;
        let e2 = DMatrix::from_fn(2 * lam, 2 * lam, |r, c| {
            let e = r as f64 - lam as f64;
            C64::new(if r == c { e * e } else { 0.0 }, 0.0)
        });
        worst = worst
            .max(dense_max_diff(&lcu::reconstruct(&da), &a))
            .max(dense_max_diff(&lcu::reconstruct(&da2), &(&a * &a)))
            .max(dense_max_diff(&lcu::reconstruct(&de2), &e2))
            .max(dense_max_diff(&lcu::reconstruct(&du), &local_u(lam)));
        bounds &= da.one_norm <= 2.0 * PI / h + 1e-12
            && da2.one_norm <= 4.0 * PI * PI / (h * h) + 1e-9
            && de2.one_norm <= (lam * lam) as f64 + 1e-9;
    }
    let (delta, n) = (0.5, 8);
    for a in 1..=3 {
        let g = lcu::lcu_grad(a, delta, n)?;
        let l = lcu::lcu_lap(a, delta, n)?;
        worst = worst
            .max(dense_max_diff(&lcu::reconstruct(&g), &circulant(&gradient_coeffs(a)?, 1.0 / delta, n)))
            .max(dense_max_diff(&lcu::reconstruct(&l), &circulant(&laplacian_coeffs(a)?, 1.0 / (delta * delta), n)));
        if a >= 2 {
            bounds &= g.one_norm <= (2.0 * (a * a) as f64).ln() / delta;
        }
        bounds &= l.one_norm <= 4.0 * PI * PI / (3.0 * delta * delta);
    }
    Ok((worst <= 1e-10 && bounds, json!({"max_reconstruction_error": worst, "bounds_hold": bounds})))
}

fn block_encoding_suite() -> Result<(bool, Value)> {
    let mut spec = LatticeSpec::new(1, 3, 1, 1.5, 2).with_particles(&[-1], &[1.3]);
    spec.e_max = Some(1.7);
    let d = lcu::hpi_fragment(&spec)?;
    let target = build_hpi(&Space::full(&spec)?)?.to_dense();
    let err = lcu::block_encoding_error(&d, &target)?;
    Ok((err <= 1e-10, json!({"block_error": err, "one_norm": d.one_norm})))
}

fn gauss_suite(seed: u64) -> Result<(bool, Value)> {
    let (checked, bad) = exhaustive_sweep(4, &[0, 1])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random_bad = 0;
    for i in 0..200 {
        let cfg = random_config(&mut rng, 1 + i % 2, 16, 4, 3, i % 2);
        let b = cfg.spec.flux_order;
        let (x, y) = (check_bruteforce(&cfg, b)?, check_sorted(&cfg, b)?);
        if x.violated != y.violated {
            random_bad += 1;
        }
    }
    Ok((bad == 0 && random_bad == 0, json!({"exhaustive": checked, "disagreements": bad + random_bad})))
}

fn penalty_suite() -> Result<(bool, Value)> {
    let spec = penalty_instance();
    let space = Space::full(&spec)?;
    let psi0 = StateVector::basis(space.dim(), reference_state(&space, &[vec![0]])?).amps;
    let tab = penalty_convergence(&spec, &psi0, 1.0, &[1e2, 1e3, 1e4])?;
    let monotone = tab.rows.windows(2).all(|w| w[1].error <= w[0].error);
    let bounded = tab.rows.iter().all(|r| r.error <= 10.0 * r.scale);
    Ok((monotone && bounded, json!({"errors": tab.rows.iter().map(|r| r.error).collect::<Vec<_>>()})))
}

fn loop_spec() -> LatticeSpec {
    let mut s = LatticeSpec::new(2, 4, 2, 4.0, 2);
    s.e_max = Some(2.0);
    s
}

fn loop_suite() -> Result<(bool, Value)> {
    let spec = loop_spec();
    let space = Space::field_only(&spec)?;
    let psi = StateVector::basis(space.dim(), space.field_index(&[0; 8])?).amps;
    let (m, f) = loop_energy_shift(&space, &psi, &Path::unit_square(&spec, &[0, 0], 0, 1))?;
    let ok = (f - 1.0 / (2.0 * PI)).abs() < 1e-15 && (m - f).abs() <= 1e-10 * f.max(1.0);
    Ok((ok, json!({"measured": m, "formula": f})))
}

fn topology_suite() -> Result<(bool, Value)> {
    let spec = loop_spec().with_gauss_units();
    let space = Space::field_only(&spec)?;
    let psi = StateVector::basis(space.dim(), space.field_index(&[0; 8])?).amps;
    let paths = [
        Path::walk(&spec, &[0, 0], &[(0, 1)]),
        Path::unit_square(&spec, &[0, 0], 0, 1),
        Path::straight_loop(&spec, &[0, 0], 1),
    ];
    let rows = topology_dichotomy(&space, &psi, &paths)?;
    let hc: Vec<f64> = rows.iter().map(|r| r.hc).collect();
    Ok((hc == [1.0, 0.0, 0.0], json!({"hc": hc})))
}

fn quadrature_suite() -> Result<(bool, Value)> {
    let mut errs = vec![];
    let mut constant_zero = true;
    for b in 1..=4usize {
        let m = 2 * b + 5;
        let s = LatticeSpec::new(3, m, m, (m as f64).powi(3), 1);
        let c = [b + 2; 3];
        let src = [c[0] as f64 + 0.13, c[1] as f64 - 0.21, c[2] as f64 + 0.07];
        let field = move |p: &[f64], mu: usize| {
            let r: Vec<f64> = (0..3).map(|i| p[i] - src[i]).collect();
            let n = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
            r[mu] / (4.0 * PI * n * n * n)
        };
        errs.push((flux_surface(&s, &field, &c, b) - 1.0).abs());
        constant_zero &= flux_surface(&s, &|_: &[f64], mu: usize| [0.7, -1.3, 2.1][mu], &c, b) == 0.0;
    }
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    Ok((decreasing && constant_zero, json!({"point_charge_errors": errs, "constant_field_zero": constant_zero})))
}

fn estimator_suite() -> Result<(bool, Value)> {
    let p = SimulationParams::default();
    let report = total_tcount(&p)?;
    let nt = n_t(&p);
    let big = [1e4, 1e5, 1e6];
    let cube = thermo_compare(&big, NRule::Cube, 1.0, 0.5)?;
    let quintic = thermo_compare(&big, NRule::Quintic, 1.0, 0.5)?;
    let ok = nt == 22
        && report.t_total.is_finite()
        && report.t_total > 0.0
        && cube.iter().all(|r| r.ratio < 1.0)
        && quintic.iter().all(|r| r.ratio > 1.0);
    Ok((ok, json!({"n_t": nt, "t_total": report.t_total})))
}

pub fn run_all(spec: &LatticeSpec, seed: u64) -> Vec<Suite> {
    vec![
        suite("operator_identities", || {
            let r = identity_checks(spec)?;
            Ok((r.passed, serde_json::to_value(&r)?))
        }),
        suite("lcu_fidelity", lcu_suite),
        suite("block_encoding", block_encoding_suite),
        suite("gauss_checker_equivalence", || gauss_suite(seed)),
        suite("penalty_convergence", penalty_suite),
        suite("loop_energy_shift", loop_suite),
        suite("topology_dichotomy", topology_suite),
        suite("quadrature", quadrature_suite),
        suite("estimator", estimator_suite),
    ]
}
