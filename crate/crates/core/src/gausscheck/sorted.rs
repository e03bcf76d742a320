//! Sort-based Gauss-law checker with comparator accounting.
//!
//! Classical data-flow analogue of a reversible sorting network: every sort is a
//! bottom-up merge sort whose comparison count depends only on the input length
//! (a merge of runs of length p and q is charged p + q comparisons), and linear
//! scans are charged one comparison per adjacent pair.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{cell_fluxes, check_cube, ClassicalConfig, GaussReport, TOL_RECT};
use crate::error::{Error, Result};
use crate::lattice::{shift_site, CellCharge};

/// Stable bottom-up merge sort by `key`; returns the (data-independent) comparator charge.
pub fn merge_sort_counted<T: Clone, K: Ord>(v: &mut Vec<T>, key: impl Fn(&T) -> K) -> u64 {
    let n = v.len();
    let mut count = 0u64;
    let mut width = 1;
    let mut buf: Vec<T> = Vec::with_capacity(n);
    while width < n {
        buf.clear();
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            if mid < hi {
                count += (hi - lo) as u64;
            }
            let (mut i, mut j) = (lo, mid);
            while i < mid && j < hi {
                if key(&v[j]) < key(&v[i]) {
                    buf.push(v[j].clone());
                    j += 1;
                } else {
                    buf.push(v[i].clone());
                    i += 1;
                }
            }
            buf.extend_from_slice(&v[i..mid]);
            buf.extend_from_slice(&v[j..hi]);
            lo = hi;
        }
        std::mem::swap(v, &mut buf);
        width *= 2;
    }
    count
}

/// Sentinel key for entries merged out or flux-free cells.
const DEAD: usize = usize::MAX;

#[derive(Debug, Clone)]
struct Entry {
    key: usize,
    charge: i64,
}

/// Adjacent-equal merge: the last entry of each equal-key run accumulates the
/// run's charge; the others are marked dead.
fn merge_adjacent(v: &mut [Entry]) -> u64 {
    for i in 1..v.len() {
        if v[i].key == v[i - 1].key && v[i].key != DEAD {
            v[i].charge += v[i - 1].charge;
            v[i - 1].key = DEAD;
        }
    }
    v.len().saturating_sub(1) as u64
}

pub fn check_sorted(cfg: &ClassicalConfig, b: usize) -> Result<GaussReport> {
    cfg.validate()?;
    check_cube(&cfg.spec, b)?;
    let spec = &cfg.spec;
    let mut stages: Vec<(String, u64)> = Vec::new();

    // (1) cell key per particle.
    let mut parts: Vec<Entry> = cfg.keyed_charges().into_iter().map(|(key, charge)| Entry { key, charge }).collect();
    // (2) sort by cell.
    stages.push(("sort_particles".into(), merge_sort_counted(&mut parts, |e| e.key)));
    // (3) merge equal cells.
    stages.push(("merge_charges".into(), merge_adjacent(&mut parts)));
    // (4) compaction: dead entries to the tail.
    stages.push(("compact_charges".into(), merge_sort_counted(&mut parts, |e| e.key)));

    // (5) fan-out to the (2b+1)^D neighbourhood.
    let side = 2 * b + 1;
    let n_off = side.pow(spec.dims as u32);
    let mut fict: Vec<Entry> = Vec::with_capacity(parts.len() * n_off);
    for e in &parts {
        let q = if e.key == DEAD { None } else { Some(spec.cell_coords(e.key)) };
        for o in 0..n_off {
            let key = match &q {
                None => DEAD,
                Some(q) => {
                    let mut s = q.clone();
                    let mut rest = o;
                    for mu in 0..spec.dims {
                        s = shift_site(&s, mu, (rest % side) as i64 - b as i64, spec.m_side);
                        rest /= side;
                    }
                    spec.cell_index(&s)
                }
            };
            fict.push(Entry { key, charge: e.charge });
        }
    }
    // (6) sort fictitious sites; (7) dedup with summed totals; (8) compaction.
    stages.push(("sort_fictitious".into(), merge_sort_counted(&mut fict, |e| e.key)));
    stages.push(("merge_fictitious".into(), merge_adjacent(&mut fict)));
    stages.push(("compact_fictitious".into(), merge_sort_counted(&mut fict, |e| e.key)));
    // (9) cube charge totals, ordered by site.
    let totals: Vec<&Entry> = fict.iter().take_while(|e| e.key != DEAD).collect();

    // (10) per-cell flux, rounded to the charge quantum (ties to even); cells
    // whose flux is not a whole number of quanta are flagged outright.
    let flux = cell_fluxes(spec, &cfg.links, b);
    let mut fractional = vec![false; flux.len()];
    let mut divs: Vec<(usize, i64)> = flux
        .iter()
        .enumerate()
        .map(|(q, &f)| {
            let units = f / (4.0 * PI);
            let r = units.round_ties_even();
            fractional[q] = (units - r).abs() >= TOL_RECT;
            let r = r as i64;
            (if r != 0 { q } else { DEAD }, r)
        })
        .collect();
    // (11) sort cells by (q if divergence ≠ 0 else sentinel).
    stages.push(("sort_cells".into(), merge_sort_counted(&mut divs, |e| e.0)));

    // (12) merge-walk subtraction of charge totals from divergences.
    let live_divs: Vec<(usize, i64)> = divs.iter().copied().take_while(|d| d.0 != DEAD).collect();
    let mut mismatch = vec![0i64; flux.len()];
    let (mut i, mut j) = (0, 0);
    while i < live_divs.len() || j < totals.len() {
        let dk = live_divs.get(i).map(|d| d.0).unwrap_or(DEAD);
        let tk = totals.get(j).map(|t| t.key).unwrap_or(DEAD);
        if dk == tk {
            mismatch[dk] = live_divs[i].1 - totals[j].charge;
            i += 1;
            j += 1;
        } else if dk < tk {
            mismatch[dk] = live_divs[i].1;
            i += 1;
        } else {
            mismatch[tk] = -totals[j].charge;
            j += 1;
        }
    }
    // Oblivious merge charge: both full-length lists are walked.
    stages.push(("match".into(), (divs.len() + fict.len()) as u64));

    // (13) all-zero test.
    let violated = mismatch.iter().any(|&m| m != 0) || fractional.iter().any(|&f| f);
    // Reported residual: matched mismatch in quanta plus any fractional remainder.
    let residual: Vec<f64> = (0..flux.len())
        .map(|q| {
            let frac = flux[q] - 4.0 * PI * (flux[q] / (4.0 * PI)).round_ties_even();
            4.0 * PI * mismatch[q] as f64 + frac
        })
        .collect();
    let comparator_count = stages.iter().map(|s| s.1).sum();
    Ok(GaussReport { violated, residual, comparator_count, stages })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub m: usize,
    pub eta: usize,
    pub b: usize,
    pub comparators: u64,
    /// comparators / ((M+η)·log₂(M+η)).
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    /// Least-squares fit comparators/(M+η) ≈ intercept + slope·log₂(M+η).
    pub slope: f64,
    pub intercept: f64,
    pub fit_rms: f64,
}

/// Comparator counts for D=1 configurations of the given (M, η) sizes.
pub fn comparator_scaling(sizes: &[(usize, usize)], b: usize, seed: u64) -> Result<ScalingTable> {
    if sizes.len() < 4 {
        return Err(Error::Argument(format!("need at least 4 sizes, got {}", sizes.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(sizes.len());
    for &(m, eta) in sizes {
        let spec = super::checker_spec(1, m, 8, b);
        let charges = (0..eta)
            .map(|i| CellCharge { cell: vec![rng.random_range(0..m)], charge: if i % 2 == 0 { 1 } else { -1 } })
            .collect();
        let cfg = ClassicalConfig::new(&spec, charges, vec![0; m]);
        let rep = check_sorted(&cfg, b)?;
        let n = (m + eta) as f64;
        rows.push(ScalingRow { m, eta, b, comparators: rep.comparator_count, normalized: rep.comparator_count as f64 / (n * n.log2()) });
    }
    let xs: Vec<f64> = rows.iter().map(|r| ((r.m + r.eta) as f64).log2()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.comparators as f64 / (r.m + r.eta) as f64).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let fit_rms = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / k).sqrt();
    Ok(ScalingTable { rows, slope, intercept, fit_rms })
}
