//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criterion 8 is a known failure: the plaquette weight is not monotone in the
//! speed of light at the fixed observation time (it saturates on a 1/c² scale).
//! The run fails if any other criterion fails, or if 8 starts passing without
//! the known-failure list being updated.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::process::ExitCode;

use gausslab::dynamics::experiments::{
    light_speed_sweep, loop_energy_shift, m_side_sweep, penalty_instance, reference_state, topological_suppression,
    topology_dichotomy,
};
use gausslab::dynamics::smooth::{DriftSetup, LoopField};
use gausslab::dynamics::{gauge_drift, log_slope, maxwell_faraday_residual, penalty_convergence, SmoothnessParams, StateVector};
use gausslab::estimator::{snapshot, thermo_compare, NRule};
use gausslab::gausscheck::{check_bruteforce, check_sorted, comparator_scaling, exhaustive_sweep, random_config};
use gausslab::lattice::{LatticeSpec, Path};
use gausslab::lcu;
use gausslab::ops::checks::exp_a_deviation;
use gausslab::ops::field::path_increments;
use gausslab::ops::sparse::dense_max_diff;
use gausslab::ops::{build_hpi, local_a, local_u, Space};
use gausslab::stencils::{flux_surface, gradient_coeffs, laplacian_coeffs, StencilCoeffs};
use gausslab::C64;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = gausslab::Result<(bool, String)>;

const KNOWN_FAILURES: &[usize] = &[8];

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    for lam in [1usize, 2, 4, 8] {
        for h in [1.0, 0.37, 2.5] {
            worst = worst.max(exp_a_deviation(lam, lam as f64 * h));
        }
    }
    Ok((worst <= 1e-10, format!("max |exp(iA·Emax/Λ) − U| = {worst:.2e}")))
}

fn circulant(c: &StencilCoeffs, scale: f64, n: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(n, n);
    for (k, v) in c.to_f64() {
        for r in 0..n {
            m[(r, (r as i64 + k).rem_euclid(n as i64) as usize)] += C64::new(v * scale, 0.0);
        }
    }
    m
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut bounds = true;
    for h in [1.0, 0.5] {
        for lam in [1usize, 2, 4, 8] {
            let e_max = lam as f64 * h;
            let a = local_a(lam, e_max);
            let (da, da2, de2, du) = (lcu::lcu_a(lam, e_max)?, lcu::lcu_a_sq(lam, e_max)?, lcu::lcu_e_sq(lam)?, lcu::lcu_u(lam)?);
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
    }
    for (delta, n) in [(0.5, 8), (0.25, 12)] {
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
    }
    Ok((worst <= 1e-10 && bounds, format!("max reconstruction error {worst:.2e}, norm bounds hold: {bounds}")))
}

fn criterion_3() -> Outcome {
    let mut spec = LatticeSpec::new(1, 3, 1, 1.5, 2).with_particles(&[-1], &[1.3]);
    spec.e_max = Some(1.7);
    let d = lcu::hpi_fragment(&spec)?;
    let target = build_hpi(&Space::full(&spec)?)?.to_dense();
    let err = lcu::block_encoding_error(&d, &target)?;
    Ok((err <= 1e-10, format!("block-encoding error {err:.2e}")))
}

fn criterion_4() -> Outcome {
    let (checked, bad) = exhaustive_sweep(6, &[0, 1, 2])?;
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let (mut random_bad, mut violated) = (0, 0);
    for i in 0..10_000 {
        let b = rng.random_range(0..3);
        let cfg = random_config(&mut rng, 1 + i % 2, 64, 8, 3, b);
        let b = cfg.spec.flux_order;
        let (x, y) = (check_bruteforce(&cfg, b)?, check_sorted(&cfg, b)?);
        random_bad += usize::from(x.violated != y.violated);
        violated += usize::from(x.violated);
    }
    let sizes = [(8, 2), (16, 4), (32, 8), (64, 16), (128, 32)];
    let mut scaling_ok = true;
    let mut spread: f64 = 0.0;
    for b in [0, 1] {
        let tab = comparator_scaling(&sizes, b, 3)?;
        let mut norm: Vec<f64> = tab.rows.iter().map(|r| r.normalized).collect();
        norm.sort_by(f64::total_cmp);
        let median = norm[norm.len() / 2];
        spread = spread.max(norm[norm.len() - 1] / median);
        scaling_ok &= norm.iter().all(|&x| x <= 2.0 * median);
    }
    let ok = bad == 0 && random_bad == 0 && violated > 0 && violated < 10_000 && scaling_ok;
    Ok((
        ok,
        format!(
            "exhaustive {checked} configs, {} disagreements; random 10000 ({violated} violated), {random_bad} disagreements; max normalized/median {spread:.3}",
            bad
        ),
    ))
}

fn criterion_5() -> Outcome {
    let spec = penalty_instance();
    let space = Space::full(&spec)?;
    let psi0 = StateVector::basis(space.dim(), reference_state(&space, &[vec![0]])?).amps;
    let tab = penalty_convergence(&spec, &psi0, 1.0, &[1e2, 1e3, 1e4])?;
    let monotone = tab.rows.windows(2).all(|w| w[1].error < w[0].error);
    let bounded = tab.rows.iter().all(|r| r.error <= 10.0 * r.scale);
    let errs: Vec<String> = tab.rows.iter().map(|r| format!("{:.2e}/{:.2e}", r.error, r.scale)).collect();
    Ok((monotone && bounded, format!("error/scale at λ=1e2,1e3,1e4: {}", errs.join(", "))))
}

fn unit_field_spec() -> LatticeSpec {
    let mut s = LatticeSpec::new(2, 4, 2, 4.0, 2);
    s.e_max = Some(2.0);
    s
}

fn basis(space: &Space, levels: &[i64]) -> gausslab::Result<Vec<C64>> {
    Ok(StateVector::basis(space.dim(), space.field_index(levels)?).amps)
}

fn criterion_6() -> Outcome {
    let spec = unit_field_spec();
    let space = Space::field_only(&spec)?;
    let sq = Path::unit_square(&spec, &[0, 0], 0, 1);
    let straight = Path::straight_loop(&spec, &[0, 1], 1);
    let open = Path::walk(&spec, &[1, 0], &[(0, 1), (1, 1)]);
    let zero = basis(&space, &[0; 8])?;
    let inc = path_increments(&spec, &sq)?;
    let bg: Vec<i64> = inc.iter().map(|&k| if k < 0 { -1 } else { 0 }).collect();
    let aligned = basis(&space, &bg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut mixed = vec![C64::new(0.0, 0.0); space.dim()];
    for _ in 0..6 {
        let levels: Vec<i64> = (0..8).map(|_| -rng.random_range(0..2)).collect();
        mixed[space.field_index(&levels)?] += C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    let n = mixed.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    mixed.iter_mut().for_each(|a| *a /= n);
    let cases = [
        ("zero+square", &zero, &sq),
        ("zero+straight", &zero, &straight),
        ("zero+open", &zero, &open),
        ("background+square", &aligned, &sq),
        ("background+reversed", &aligned, &sq.reversed()),
        ("superposition+square", &mixed, &sq),
        ("superposition+straight", &mixed, &straight),
    ];
    let mut worst: f64 = 0.0;
    let mut shifts = BTreeMap::new();
    for (name, psi, path) in cases {
        let (m, f) = loop_energy_shift(&space, psi, path)?;
        worst = worst.max((m - f).abs() / f.abs().max(1.0));
        shifts.insert(name, f);
    }
    // Zero field: (h³/8π)·θ²·|P| with h = θ = 1 and a 4-step loop.
    let unit = (shifts["zero+square"] - 1.0 / (2.0 * PI)).abs();
    let opposite = (shifts["background+square"] + shifts["background+reversed"] - 2.0 * shifts["zero+square"]).abs();
    let ok = worst <= 1e-10 && unit < 1e-15 && opposite < 1e-12;
    Ok((ok, format!("{} pairs, max relative |measured − formula| {worst:.2e}, zero-field square shift − 1/2π = {unit:.1e}", shifts.len())))
}

fn criterion_7() -> Outcome {
    let spec = unit_field_spec().with_gauss_units();
    let space = Space::field_only(&spec)?;
    let sq = Path::unit_square(&spec, &[0, 0], 0, 1);
    let paths = [
        Path::walk(&spec, &[0, 0], &[(0, 1)]),
        Path::walk(&spec, &[0, 0], &[(0, 1), (1, 1)]),
        sq.clone(),
        Path::straight_loop(&spec, &[0, 0], 0),
        Path::straight_loop(&spec, &[1, 0], 1),
    ];
    let expected = [1.0, 1.0, 0.0, 0.0, 0.0];
    let curl: Vec<i64> = path_increments(&spec, &sq)?.iter().map(|k| -k).collect();
    let mut ok = true;
    let mut lines = vec![];
    for (name, psi) in [("zero field", basis(&space, &[0; 8])?), ("circulating field", basis(&space, &curl)?)] {
        let rows = topology_dichotomy(&space, &psi, &paths)?;
        let hc: Vec<f64> = rows.iter().map(|r| r.hc).collect();
        ok &= hc == expected && rows.iter().all(|r| r.wrapped_weight == 0.0);
        lines.push(format!("{name}: ⟨Hc⟩ {hc:?}"));
    }
    Ok((ok, lines.join("; ")))
}

fn decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn criterion_8() -> Outcome {
    let spec2 = LatticeSpec::new(2, 6, 3, 9.0, 2);
    let lp = Path::unit_square(&spec2, &[0, 0], 0, 1);
    let faraday: Vec<f64> = maxwell_faraday_residual(&spec2, &SmoothnessParams::default(), &lp, LoopField::default(), &[2, 4, 8], 1.0)?
        .iter()
        .map(|r| r.residual)
        .collect();
    let faraday_ok = decreasing(&faraday);

    let spec3 = LatticeSpec::new(3, 6, 6, 216.0, 2);
    let rows = gauge_drift(&spec3, &DriftSetup::default(), &[0, 1, 2], &[2, 4, 8])?;
    let at = |b: usize, lam: usize| rows.iter().find(|r| r.b == b && r.cutoff == lam).map(|r| r.drift).unwrap_or(f64::NAN);
    let mut drift_ok = true;
    for b in [0, 1, 2] {
        drift_ok &= decreasing(&[at(b, 2), at(b, 4), at(b, 8)]);
        for lam in [2, 4, 8] {
            let expect = ((2 * b + 1) * (2 * b + 1)) as f64;
            drift_ok &= (at(b, lam) / at(0, lam) - expect).abs() <= 1e-9 * expect;
        }
    }
    drift_ok &= rows.iter().all(|r| r.gauge_mean < 1e-12);

    let plaq_rows = topological_suppression(&light_speed_sweep(&[2.0, 4.0, 8.0], 0.0), 0.5)?;
    let plaq: Vec<f64> = plaq_rows.iter().map(|r| r.plaquette_weight).collect();
    let plaq_ok = decreasing(&plaq);

    let overlap_rows = topological_suppression(&m_side_sweep(&[2, 3, 4], 0.0), 1.0)?;
    let overlap: Vec<f64> = overlap_rows.iter().map(|r| r.loop_overlap).collect();
    let overlap_ok = decreasing(&overlap);

    let ok = faraday_ok && drift_ok && plaq_ok && overlap_ok;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" ");
    Ok((
        ok,
        format!(
            "Faraday Λ=2,4,8 [{}] {}; drift Λ=2,4,8 b=0 [{}] {}; plaquette c=2,4,8 [{}] {}; winding overlap m=2,3,4 [{}] {}",
            fmt(&faraday),
            tag(faraday_ok),
            fmt(&[at(0, 2), at(0, 4), at(0, 8)]),
            tag(drift_ok),
            fmt(&plaq),
            tag(plaq_ok),
            fmt(&overlap),
            tag(overlap_ok)
        ),
    ))
}

fn tag(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "NOT MONOTONE"
    }
}

fn criterion_9() -> Outcome {
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
        constant_zero &= flux_surface(&s, &|_: &[f64], mu: usize| [0.7, -1.3, 2.1][mu], &c, b).abs() < 1e-13;
    }
    let bs: Vec<f64> = (1..=4).map(|b| b as f64).collect();
    let slope = log_slope(&bs, &errs);
    let ok = decreasing(&errs) && slope < 0.0 && constant_zero;
    let shown: Vec<String> = errs.iter().map(|e| format!("{e:.2e}")).collect();
    Ok((
        ok,
        format!("point-charge flux errors b=1..4 [{}], log-slope {slope:.2}, constant field zero: {constant_zero}", shown.join(" ")),
    ))
}

fn criterion_10() -> Outcome {
    let golden: serde_json::Value = serde_json::from_str(include_str!("golden/estimator.json")).expect("golden file parses");
    let current = snapshot()?;
    let mut mismatches = vec![];
    for (name, v) in &current {
        let want = golden[name.as_str()]["bits"].as_str().and_then(|s| u64::from_str_radix(s, 16).ok());
        if want != Some(v.to_bits()) {
            mismatches.push(name.clone());
        }
    }
    let complete = golden.as_object().map(|o| o.len()) == Some(current.len());
    let etas = [1e4, 1e5, 1e6, 1e7];
    let cube = thermo_compare(&etas, NRule::Cube, 1.0, 0.5)?;
    let quintic = thermo_compare(&etas, NRule::Quintic, 1.0, 0.5)?;
    // With unit logs the ratio is η^(−1/3) for N = η³ and η^(1/3) for N = η⁵.
    let closed_form = cube.iter().zip(&quintic).all(|(c, q)| {
        (c.ratio - c.eta.powf(-1.0 / 3.0)).abs() < 1e-12 * c.ratio && (q.ratio - q.eta.powf(1.0 / 3.0)).abs() < 1e-12 * q.ratio
    });
    let ordered = cube.iter().all(|r| r.ratio < 1.0) && quintic.iter().all(|r| r.ratio > 1.0);
    let ok = mismatches.is_empty() && complete && closed_form && ordered;
    Ok((
        ok,
        format!(
            "{} snapshot values, mismatches {mismatches:?}; cube ratios < 1 and quintic > 1 for η ≥ 1e4: {ordered}",
            current.len()
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, fn() -> Outcome); 10] = [
        (1, "field operator identity", criterion_1),
        (2, "LCU decompositions", criterion_2),
        (3, "block encoding", criterion_3),
        (4, "Gauss checker equivalence", criterion_4),
        (5, "penalty convergence", criterion_5),
        (6, "loop energy shift", criterion_6),
        (7, "topological dichotomy", criterion_7),
        (8, "convergence trends", criterion_8),
        (9, "flux quadrature", criterion_9),
        (10, "resource estimator", criterion_10),
    ];
    let mut unexpected = 0;
    for (id, name, run) in criteria {
        let (passed, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        let known = KNOWN_FAILURES.contains(&id);
        let note = match (passed, known) {
            (false, true) => " (known failure)",
            (true, true) => " (unexpected pass; update the known-failure list)",
            _ => "",
        };
        println!("criterion {id:>2} {}: {name} — {detail}{note}", if passed { "PASS" } else { "FAIL" });
        if passed == known {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
