use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use gausslab::dynamics::experiments::{
    default_particle_points, light_speed_sweep, loop_energy_shift, m_side_sweep, reference_state, topology_dichotomy,
};
use gausslab::dynamics::{
    evolve_exact, gauge_drift, maxwell_faraday_residual, penalty_convergence, topological_suppression, StateVector,
};
use gausslab::estimator::{thermo_compare, total_tcount, NRule, SimulationParams};
use gausslab::gausscheck::{check_bruteforce, check_sorted, comparator_scaling, ClassicalConfig};
use gausslab::lattice::{Path as LatticePath, PathClass};
use gausslab::lcu;
use gausslab::ops::checks::identity_checks;
use gausslab::ops::{build_h, build_hc, Space};
use gausslab::stencils::{gradient_coeffs, laplacian_coeffs, newton_cotes_exact, ratio_f64, StencilCoeffs};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{load, load_run, RunConfig};
use crate::output::{to_csv, to_json, RunDir};
use crate::CheckFailed;

pub fn stencils(kind: &str, order: usize) -> Result<String> {
    let entry = |offset: i64, exact: String, value: f64| json!({"offset": offset, "exact": exact, "value": value});
    let from = |c: StencilCoeffs| -> Value {
        json!({
            "coefficients": c.offsets().map(|k| entry(k, c.get(k).to_string(), ratio_f64(c.get(k)))).collect::<Vec<_>>(),
            "one_norm": c.one_norm(),
        })
    };
    let mut body = match kind {
        "grad" => from(gradient_coeffs(order)?),
        "lap" => from(laplacian_coeffs(order)?),
        "cotes" => {
            let w = newton_cotes_exact(order);
            json!({
                "coefficients": w.iter().enumerate().map(|(j, r)| entry(j as i64, r.to_string(), ratio_f64(r))).collect::<Vec<_>>(),
                "one_norm": w.iter().map(ratio_f64).map(f64::abs).sum::<f64>(),
            })
        }
        other => bail!("unknown stencil kind {other}"),
    };
    body["kind"] = json!(kind);
    body["order"] = json!(order);
    to_json(&body)
}

pub fn lcu_dump(op: &str, cutoff: usize, e_max: Option<f64>, order: usize, delta: f64, n: usize) -> Result<String> {
    let e_max = e_max.unwrap_or(cutoff as f64);
    let d = match op {
        "A" => lcu::lcu_a(cutoff, e_max)?,
        "A2" => lcu::lcu_a_sq(cutoff, e_max)?,
        "E2" => lcu::lcu_e_sq(cutoff)?,
        "U" => lcu::lcu_u(cutoff)?,
        "grad" => lcu::lcu_grad(order, delta, n)?,
        "lap" => lcu::lcu_lap(order, delta, n)?,
        other => bail!("unknown operator {other}"),
    };
    let terms: Vec<Value> = d
        .terms
        .iter()
        .map(|t| json!({"label": t.label(), "re": t.coefficient.re, "im": t.coefficient.im}))
        .collect();
    to_json(&json!({"op": op, "registers": d.registers, "one_norm": d.one_norm, "terms": terms}))
}

pub fn operators_check(spec_path: &Path) -> Result<String> {
    let cfg = load_run(spec_path)?;
    let mut report = identity_checks(&cfg.spec)?;
    // The configured tolerance applies to the exp(iA)=U family only; the
    // full-space checks are exact up to round-off.
    for c in report.checks.iter_mut().filter(|c| c.name.starts_with("exp(")) {
        c.tolerance = cfg.tolerances.identity;
        c.passed = c.deviation <= c.tolerance;
    }
    report.passed = report.checks.iter().all(|c| c.passed);
    let out = to_json(&report)?;
    if !report.passed {
        print!("{out}");
        bail!(CheckFailed("operator identity check failed".into()));
    }
    Ok(out)
}

pub fn gauss_check(config: &Path, b: Option<usize>, checker: &str) -> Result<String> {
    let cfg: ClassicalConfig = load(config)?;
    cfg.validate()?;
    let b = b.unwrap_or(cfg.spec.flux_order);
    let brute = check_bruteforce(&cfg, b)?;
    let sorted = check_sorted(&cfg, b)?;
    let chosen = match checker {
        "sorted" => &sorted,
        "bruteforce" => &brute,
        other => bail!("unknown checker {other}"),
    };
    let out = to_json(chosen)?;
    if brute.violated != sorted.violated || brute.support() != sorted.support() {
        print!("{out}");
        bail!(CheckFailed("sorted and brute-force checkers disagree".into()));
    }
    Ok(out)
}

pub fn gauss_bench(sizes: &str, b: usize, seed: u64) -> Result<String> {
    let sizes = sizes
        .split(',')
        .map(|s| {
            let (m, eta) = s.split_once(':').ok_or_else(|| anyhow!("size {s:?} is not M:eta"))?;
            Ok((m.trim().parse()?, eta.trim().parse()?))
        })
        .collect::<Result<Vec<(usize, usize)>>>()?;
    let table = comparator_scaling(&sizes, b, seed)?;
    to_csv(&["m", "eta", "b", "comparators", "normalized"], &table.rows)
}

pub fn estimate(params: &Path) -> Result<String> {
    let p: SimulationParams = load(params)?;
    p.validate()?;
    to_json(&total_tcount(&p)?)
}

pub fn parse_etas(range: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = range.split(':').collect();
    match parts.as_slice() {
        [lo, hi, factor] => {
            let (lo, hi, f): (f64, f64, f64) = (lo.parse()?, hi.parse()?, factor.parse()?);
            if !(lo > 0.0 && hi >= lo && f > 1.0) {
                bail!("eta range needs 0 < lo ≤ hi and factor > 1");
            }
            let mut v = vec![];
            let mut x = lo;
            while x <= hi * (1.0 + 1e-12) {
                v.push(x);
                x *= f;
            }
            Ok(v)
        }
        [list] => list.split(',').map(|s| s.trim().parse::<f64>().map_err(Into::into)).collect(),
        _ => bail!("eta range is lo:hi:factor or a comma list"),
    }
}

pub fn compare(range: &str, rule: &str, t: f64, eps: f64) -> Result<String> {
    let rule = match rule {
        "cube" => NRule::Cube,
        "quartic" => NRule::Quartic,
        "quintic" => NRule::Quintic,
        other => bail!("unknown n-rule {other}"),
    };
    let rows = thermo_compare(&parse_etas(range)?, rule, t, eps)?;
    to_csv(&["eta", "n", "c_qed", "c_coulomb", "ratio", "crossover_n"], &rows)
}

#[derive(Serialize)]
struct Amplitude {
    index: usize,
    re: f64,
    im: f64,
}

pub fn evolve(spec_path: &Path, t: Option<f64>, out: Option<&Path>) -> Result<String> {
    let cfg = load_run(spec_path)?;
    let t = t.unwrap_or(cfg.t);
    let space = Space::full(&cfg.spec)?;
    let h = build_h(&space)?;
    let idx0 = reference_state(&space, &default_particle_points(&cfg.spec))?;
    let psi0 = StateVector::basis(space.dim(), idx0).amps;
    let psi = evolve_exact(&h.op, &psi0, t, cfg.tolerances.evolve)?;
    let (e0, e1) = (h.op.expectation(&psi0).re, h.op.expectation(&psi).re);
    let norm = StateVector { amps: psi.clone() }.norm();
    let summary = json!({
        "dim": space.dim(),
        "initial_state": idx0,
        "t": t,
        "norm": norm,
        "energy_initial": e0,
        "energy_final": e1,
        "hc_final": build_hc(&space)?.expectation(&psi).re,
        "warnings": h.warnings,
    });
    if let Some(dir) = out {
        let mut run = RunDir::create(dir)?;
        let amps: Vec<Amplitude> = psi.iter().enumerate().map(|(index, a)| Amplitude { index, re: a.re, im: a.im }).collect();
        run.csv("amplitudes.csv", &["index", "re", "im"], &amps)?;
        run.finish("evolve", serde_json::to_value(&cfg)?, summary.clone())?;
    }
    let text = to_json(&summary)?;
    if (norm - 1.0).abs() > 1e-8 || (e1 - e0).abs() > 1e-8 * e0.abs().max(1.0) {
        print!("{text}");
        bail!(CheckFailed("norm or energy not conserved".into()));
    }
    Ok(text)
}

#[derive(Serialize)]
struct ShiftRow {
    path: String,
    measured: f64,
    formula: f64,
    abs_error: f64,
}

#[derive(Serialize)]
struct ClassRow {
    path: String,
    class: String,
    hc: f64,
    wrapped_weight: f64,
}

fn loop_paths(spec: &gausslab::lattice::LatticeSpec) -> Vec<(String, LatticePath)> {
    let o = vec![0; spec.dims];
    let mut v = vec![
        ("open step".to_string(), LatticePath::walk(spec, &o, &[(0, 1)])),
        ("straight loop axis 0".to_string(), LatticePath::straight_loop(spec, &o, 0)),
    ];
    if spec.dims >= 2 {
        let sq = LatticePath::unit_square(spec, &o, 0, 1);
        v.push(("unit square".to_string(), sq.clone()));
        v.push(("reversed unit square".to_string(), sq.reversed()));
    }
    v
}

pub fn experiment(kind: &str, spec_path: &Path, out: &Path) -> Result<String> {
    let cfg: RunConfig = load_run(spec_path)?;
    let spec = &cfg.spec;
    let x = &cfg.experiment;
    let mut run = RunDir::create(out)?;
    let mut failure = None;
    let results = match kind {
        "penalty" => {
            let space = Space::full(spec)?;
            let idx0 = reference_state(&space, &default_particle_points(spec))?;
            let psi0 = StateVector::basis(space.dim(), idx0).amps;
            let tab = penalty_convergence(spec, &psi0, cfg.t, &x.lambdas)?;
            run.csv("penalty.csv", &["lambda", "error", "scale", "hc"], &tab.rows)?;
            json!({"hf_norm": tab.hf_norm, "fitted_exponent": tab.fitted_exponent, "warnings": tab.warnings})
        }
        "faraday" => {
            let lp = LatticePath::unit_square(spec, &vec![0; spec.dims], 0, 1);
            let rows = maxwell_faraday_residual(spec, &x.smooth, &lp, x.loop_field, &x.cutoffs, cfg.t)?;
            run.csv("faraday.csv", &["cutoff", "flux_rate", "circulation", "kappa", "residual"], &rows)?;
            json!({"decreasing": rows.windows(2).all(|w| w[1].residual < w[0].residual)})
        }
        "gauge-drift" => {
            let rows = gauge_drift(spec, &x.drift, &x.flux_orders, &x.cutoffs)?;
            run.csv("gauge_drift.csv", &["b", "cutoff", "drift", "gauge_mean"], &rows)?;
            Value::Null
        }
        "loops" => {
            let space = Space::field_only(spec)?;
            let zero = space.field_index(&vec![0; spec.n_links()])?;
            let psi = StateVector::basis(space.dim(), zero).amps;
            let paths = loop_paths(spec);
            let mut shifts = vec![];
            for (name, p) in &paths {
                let (measured, formula) = loop_energy_shift(&space, &psi, p)?;
                shifts.push(ShiftRow { path: name.clone(), measured, formula, abs_error: (measured - formula).abs() });
            }
            let ps: Vec<LatticePath> = paths.iter().map(|p| p.1.clone()).collect();
            let classes: Vec<ClassRow> = topology_dichotomy(&space, &psi, &ps)?
                .into_iter()
                .zip(&paths)
                .map(|(r, (name, _))| ClassRow { path: name.clone(), class: r.class, hc: r.hc, wrapped_weight: r.wrapped_weight })
                .collect();
            run.csv("loop_energy.csv", &["path", "measured", "formula", "abs_error"], &shifts)?;
            run.csv("topology.csv", &["path", "class", "hc", "wrapped_weight"], &classes)?;
            let exact = shifts.iter().all(|r| r.abs_error <= 1e-10 * r.formula.abs().max(1.0));
            let dichotomy = classes.iter().zip(&ps).all(|(r, p)| {
                let open = matches!(gausslab::lattice::classify_path(spec, p), Ok(PathClass::OpenPath));
                r.wrapped_weight > 0.0 || r.hc == if open { 1.0 } else { 0.0 }
            });
            if !(exact && dichotomy) {
                failure = Some("loop energy formula or path dichotomy broken");
            }
            json!({"formula_exact": exact, "dichotomy": dichotomy})
        }
        "topo" => {
            let by_m = topological_suppression(&m_side_sweep(&x.m_sides, spec.penalty), x.topo_t)?;
            let by_c = topological_suppression(&light_speed_sweep(&x.light_speeds, spec.penalty), x.topo_t)?;
            let cols = ["m_side", "light_speed", "dim", "hc", "plaquette_weight", "loop_overlap"];
            run.csv("topo_m_side.csv", &cols, &by_m)?;
            run.csv("topo_light_speed.csv", &cols, &by_c)?;
            json!({
                "overlap_decreasing_in_m_side": by_m.windows(2).all(|w| w[1].loop_overlap < w[0].loop_overlap),
                "plaquette_weight_decreasing_in_c": by_c.windows(2).all(|w| w[1].plaquette_weight < w[0].plaquette_weight),
            })
        }
        other => bail!("unknown experiment {other}"),
    };
    run.finish(&format!("experiment {kind}"), serde_json::to_value(&cfg)?, results.clone())
        .context("writing manifest")?;
    let text = to_json(&json!({"experiment": kind, "out": out.display().to_string(), "results": results}))?;
    if let Some(msg) = failure {
        print!("{text}");
        bail!(CheckFailed(msg.into()));
    }
    Ok(text)
}
