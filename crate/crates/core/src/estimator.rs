//! Resource-cost formulas, evaluated literally with unit prefactors.
//!
//! Every Õ/O bracket is taken at face value with base-2 logarithms, except
//! the stencil norm factor ln(2a²). Nothing here is a calibrated gate count:
//! reports carry the label [`ESTIMATE_LABEL`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ESTIMATE_LABEL: &str = "asymptotic estimate, unit constants";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationParams {
    /// Number of particles η.
    pub eta: u64,
    /// Particle grid points N.
    pub n_points: u64,
    /// Field cells M.
    pub n_cells: u64,
    /// Volume Ω.
    pub volume: f64,
    /// Field cutoff Λ.
    pub cutoff: u64,
    pub e_max: f64,
    /// Gradient stencil order a.
    pub a: u64,
    /// Flux quadrature order b.
    pub b: u64,
    pub t: f64,
    /// Target error ε.
    pub eps: f64,
    /// Rotation synthesis error ε_r.
    pub eps_r: f64,
    /// Speed of light c.
    pub c: f64,
    /// Σ|ζ_i|.
    pub sum_abs_charge: f64,
}

impl Default for SimulationParams {
    fn default() -> Self {
        SimulationParams {
            eta: 2,
            n_points: 64,
            n_cells: 8,
            volume: 8.0,
            cutoff: 4,
            e_max: 4.0,
            a: 2,
            b: 1,
            t: 1.0,
            eps: 0.01,
            eps_r: 0.001,
            c: 1.0,
            sum_abs_charge: 2.0,
        }
    }
}

impl SimulationParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Argument(format!("params: {what}")));
        if self.n_points == 0 || self.n_cells == 0 || self.a == 0 {
            return bad("n_points, n_cells and a must be positive");
        }
        if !(self.volume > 0.0 && self.e_max > 0.0 && self.c > 0.0) {
            return bad("volume, e_max and c must be positive");
        }
        if !(self.t >= 0.0 && self.sum_abs_charge >= 0.0) {
            return bad("t and sum_abs_charge must be nonnegative");
        }
        if !(self.eps > 0.0 && self.eps < 1.0 && self.eps_r > 0.0 && self.eps_r < 1.0) {
            return bad("eps and eps_r must lie in (0, 1)");
        }
        if self.cutoff == 0 || !self.cutoff.is_power_of_two() {
            return bad("cutoff must be a positive power of 2");
        }
        Ok(())
    }

    /// Cell width (Ω/M)^{1/3}.
    pub fn h(&self) -> f64 {
        (self.volume / self.n_cells as f64).cbrt()
    }

    /// Particle grid spacing (Ω/N)^{1/3}.
    pub fn delta(&self) -> f64 {
        (self.volume / self.n_points as f64).cbrt()
    }

    /// ln(2a²), the stencil norm factor.
    pub fn stencil_log(&self) -> f64 {
        (2.0 * (self.a as f64).powi(2)).ln()
    }

    fn log_n_lambda(&self) -> f64 {
        ((self.n_points * self.cutoff) as f64).log2()
    }

    fn log_inv_eps(&self) -> f64 {
        (1.0 / self.eps).log2()
    }
}

/// Mc²L²/h + η/Δ² + ηL/(chΔ) + η/(c²h²) with L = ln(2a²).
pub fn alpha_b(p: &SimulationParams) -> f64 {
    let (h, d, l, c) = (p.h(), p.delta(), p.stencil_log(), p.c);
    let (m, eta) = (p.n_cells as f64, p.eta as f64);
    m * c * c * l * l / h + eta / (d * d) + eta * l / (c * h * d) + eta / (c * c * h * h)
}

/// ‖H₀‖²·t/ε.
pub fn lambda_required(norm_h0: f64, t: f64, eps: f64) -> Result<f64> {
    if eps == 0.0 {
        return Err(Error::Argument("eps must be nonzero".into()));
    }
    Ok(norm_h0 * norm_h0 * t / eps)
}

/// ⌈log₂(η²t²L²/(Δ⁴ε²) + MΛ²t/ε)⌉, at least 1.
pub fn n_t(p: &SimulationParams) -> u64 {
    let (eta, m, lam) = (p.eta as f64, p.n_cells as f64, p.cutoff as f64);
    let (l, d, t, e) = (p.stencil_log(), p.delta(), p.t, p.eps);
    let arg = eta * eta * t * t * l * l / (d.powi(4) * e * e) + m * lam * lam * t / e;
    if arg <= 2.0 {
        1
    } else {
        arg.log2().ceil() as u64
    }
}

/// ηL²t(Mc²/η + 1/Δ²)·log₂(1/ε); the η-prefactor is distributed so η = 0 stays finite.
pub fn query_count_nht(p: &SimulationParams) -> f64 {
    let (eta, m, l, d) = (p.eta as f64, p.n_cells as f64, p.stencil_log(), p.delta());
    l * l * p.t * (m * p.c * p.c + eta / (d * d)) * p.log_inv_eps()
}

/// b³(M + Σ|ζ|)log₂²(NΛ) + n_t log₂(n_t/ε).
pub fn cost_vint(p: &SimulationParams) -> f64 {
    let nt = n_t(p) as f64;
    (p.b as f64).powi(3) * (p.n_cells as f64 + p.sum_abs_charge) * p.log_n_lambda().powi(2) + nt * (nt / p.eps).log2()
}

/// (a + log₂²Λ)log₂(1/ε_r) + (M + η)·a·log₂(NΛ).
pub fn cost_blockencode_hpi(p: &SimulationParams) -> f64 {
    let a = p.a as f64;
    (a + (p.cutoff as f64).log2().powi(2)) * (1.0 / p.eps_r).log2() + (p.n_cells + p.eta) as f64 * a * p.log_n_lambda()
}

/// M·a²·log₂Λ·log₂(1/ε).
pub fn cost_hf2(p: &SimulationParams) -> f64 {
    p.n_cells as f64 * (p.a as f64).powi(2) * (p.cutoff as f64).log2() * p.log_inv_eps()
}

/// (M(b³ + a²) + Σ|ζ| + n_t)·log₂²(NΛ)·log₂(1/ε).
pub fn cost_hamt(p: &SimulationParams) -> f64 {
    let bracket = p.n_cells as f64 * ((p.b as f64).powi(3) + (p.a as f64).powi(2)) + p.sum_abs_charge + n_t(p) as f64;
    bracket * p.log_n_lambda().powi(2) * p.log_inv_eps()
}

/// ηt(Mc²/η + 1/Δ²)(M(b³ + a²) + Σ|ζ|)·log₂²(NΛ)·log₂²(1/ε).
pub fn t_total_theorem(p: &SimulationParams) -> f64 {
    let (eta, m, d) = (p.eta as f64, p.n_cells as f64, p.delta());
    let bracket = m * ((p.b as f64).powi(3) + (p.a as f64).powi(2)) + p.sum_abs_charge;
    p.t * (m * p.c * p.c + eta / (d * d)) * bracket * p.log_n_lambda().powi(2) * p.log_inv_eps().powi(2)
}

/// N^{2/3}η^{4/3}t·log₂⁵(1/ε).
pub fn cost_qed_thermo(n: f64, eta: f64, t: f64, eps: f64) -> f64 {
    n.powf(2.0 / 3.0) * eta.powf(4.0 / 3.0) * t * (1.0 / eps).log2().powi(5)
}

/// N^{1/3}η^{8/3}t·log₂²(1/ε).
pub fn cost_coulomb_thermo(n: f64, eta: f64, t: f64, eps: f64) -> f64 {
    n.powf(1.0 / 3.0) * eta.powf(8.0 / 3.0) * t * (1.0 / eps).log2().powi(2)
}

/// N at which the two thermodynamic costs cross: η⁴·log₂⁻⁹(1/ε).
pub fn crossover_n(eta: f64, eps: f64) -> f64 {
    eta.powi(4) / (1.0 / eps).log2().powi(9)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub label: String,
    pub alpha_b: f64,
    pub lambda_required: f64,
    pub n_t: u64,
    pub n_ht: f64,
    pub c_vint: f64,
    pub c_blockencode_hpi: f64,
    pub c_hf2: f64,
    pub c_hamt: f64,
    /// Final display of the gate-count theorem.
    pub t_total: f64,
    /// N_HT·C_hamT.
    pub t_product: f64,
    /// t_product / t_total: the polylog factors the theorem drops.
    pub consistency_ratio: f64,
    pub c_coulomb_thermo: f64,
    pub c_qed_thermo: f64,
    /// c_qed_thermo / c_coulomb_thermo.
    pub ratio: f64,
    pub flags: Vec<String>,
}

/// Fills every report field; the penalty strength uses α_B as the ‖H₀‖ proxy.
pub fn total_tcount(p: &SimulationParams) -> Result<CostReport> {
    p.validate()?;
    let ab = alpha_b(p);
    let nht = query_count_nht(p);
    let hamt = cost_hamt(p);
    let t_total = t_total_theorem(p);
    let t_product = nht * hamt;
    let (n, eta) = (p.n_points as f64, p.eta as f64);
    let qed = cost_qed_thermo(n, eta, p.t, p.eps);
    let coul = cost_coulomb_thermo(n, eta, p.t, p.eps);
    let mut flags = Vec::new();
    if (p.cutoff as f64 / p.eps).log2() > p.n_cells as f64 {
        flags.push("log(cutoff/eps) exceeds M".to_string());
    }
    let field_part = p.n_cells as f64 * ((p.b as f64).powi(3) + (p.a as f64).powi(2));
    if field_part > 10.0 * p.sum_abs_charge {
        flags.push("M(b^3+a^2) dominates the HAM-T bracket".to_string());
    }
    Ok(CostReport {
        label: ESTIMATE_LABEL.to_string(),
        alpha_b: ab,
        lambda_required: lambda_required(ab, p.t, p.eps)?,
        n_t: n_t(p),
        n_ht: nht,
        c_vint: cost_vint(p),
        c_blockencode_hpi: cost_blockencode_hpi(p),
        c_hf2: cost_hf2(p),
        c_hamt: hamt,
        t_total,
        t_product,
        consistency_ratio: if t_total > 0.0 { t_product / t_total } else { 1.0 },
        c_coulomb_thermo: coul,
        c_qed_thermo: qed,
        ratio: if coul > 0.0 { qed / coul } else { f64::INFINITY },
        flags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NRule {
    Cube,
    Quartic,
    Quintic,
}

impl NRule {
    pub fn n_for(self, eta: f64) -> f64 {
        match self {
            NRule::Cube => eta.powi(3),
            NRule::Quartic => eta.powi(4),
            NRule::Quintic => eta.powi(5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoRow {
    pub eta: f64,
    pub n: f64,
    pub c_qed: f64,
    pub c_coulomb: f64,
    pub ratio: f64,
    pub crossover_n: f64,
}

pub fn thermo_compare(etas: &[f64], rule: NRule, t: f64, eps: f64) -> Result<Vec<ThermoRow>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Argument("eps must lie in (0, 1)".into()));
    }
    etas.iter()
        .map(|&eta| {
            if !(eta > 0.0) {
                return Err(Error::Argument("eta must be positive".into()));
            }
            let n = rule.n_for(eta);
            let (q, c) = (cost_qed_thermo(n, eta, t, eps), cost_coulomb_thermo(n, eta, t, eps));
            Ok(ThermoRow { eta, n, c_qed: q, c_coulomb: c, ratio: q / c, crossover_n: crossover_n(eta, eps) })
        })
        .collect()
}

/// Named values pinned by the regression snapshot: the worked examples, the
/// default report and the unit-log thermodynamic rows.
pub fn snapshot() -> Result<Vec<(String, f64)>> {
    let p = SimulationParams::default();
    let r = total_tcount(&p)?;
    let mut v = vec![
        ("lambda_required(10,1,0.01)".to_string(), lambda_required(10.0, 1.0, 0.01)?),
        ("lambda_required(1,1,1)".to_string(), lambda_required(1.0, 1.0, 1.0)?),
        ("crossover_n(1e6,0.5)".to_string(), crossover_n(1e6, 0.5)),
    ];
    let fields = [
        ("alpha_b", r.alpha_b),
        ("lambda_required", r.lambda_required),
        ("n_t", r.n_t as f64),
        ("n_ht", r.n_ht),
        ("c_vint", r.c_vint),
        ("c_blockencode_hpi", r.c_blockencode_hpi),
        ("c_hf2", r.c_hf2),
        ("c_hamt", r.c_hamt),
        ("t_total", r.t_total),
        ("t_product", r.t_product),
        ("consistency_ratio", r.consistency_ratio),
        ("c_coulomb_thermo", r.c_coulomb_thermo),
        ("c_qed_thermo", r.c_qed_thermo),
        ("ratio", r.ratio),
    ];
    v.extend(fields.iter().map(|(k, x)| (format!("report.{k}"), *x)));
    for (name, rule) in [("cube", NRule::Cube), ("quintic", NRule::Quintic)] {
        for row in thermo_compare(&[1e4, 1e5, 1e6], rule, 1.0, 0.5)? {
            v.push((format!("thermo.{name}.{:e}.ratio", row.eta), row.ratio));
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_examples() {
        let p = SimulationParams::default();
        assert!((p.h() - 1.0).abs() < 1e-15 && (p.delta() - 0.5).abs() < 1e-15);
        let l8 = 8f64.ln();
        let ab = 8.0 * l8 * l8 + 8.0 + 2.0 * l8 / 0.5 + 2.0;
        assert!((alpha_b(&p) - ab).abs() < 1e-12);
        assert!((alpha_b(&p) - 52.9).abs() < 0.05);
        assert_eq!(n_t(&p), 22);
        let nht = 2.0 * l8 * l8 * 8.0 * 100f64.log2();
        assert!((query_count_nht(&p) - nht).abs() < 1e-9);
        assert!((query_count_nht(&p) - 459.0).abs() < 1.0);
        assert!((cost_hamt(&p) - 64.0 * 64.0 * 100f64.log2()).abs() < 1e-8);
        assert!((cost_hamt(&p) - 27.2e3).abs() < 50.0);
    }

    #[test]
    fn simple_laws() {
        assert_eq!(lambda_required(10.0, 1.0, 0.01).unwrap(), 1e4);
        assert!((lambda_required(10.0, 1.0, 0.01).unwrap() - 1e4).abs() < 1e-9);
        assert_eq!(lambda_required(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(lambda_required(3.0, 2.0, 0.1).unwrap(), 2.0 * lambda_required(3.0, 1.0, 0.1).unwrap());
        assert!(lambda_required(1.0, 1.0, 0.0).is_err());
        let mut p = SimulationParams::default();
        let base = query_count_nht(&p);
        p.t = 3.0;
        assert!((query_count_nht(&p) - 3.0 * base).abs() < 1e-9);
        p.t = 0.0;
        assert_eq!(query_count_nht(&p), 0.0);
        let mut q = SimulationParams { eta: 0, ..SimulationParams::default() };
        let field_only = 8.0 * 8f64.ln().powi(2);
        assert!((alpha_b(&q) - field_only).abs() < 1e-12);
        q.c = 1e3;
        assert!(alpha_b(&q) > 1e6);
        let mut r = SimulationParams::default();
        let hb = cost_hamt(&r);
        r.b = 0;
        assert!(cost_hamt(&r) < hb);
    }

    #[test]
    fn vint_linear_in_m() {
        let at = |m| cost_vint(&SimulationParams { n_cells: m, ..SimulationParams::default() });
        // n_t depends on M only through a subdominant term; compare slopes.
        let (c8, c16, c24) = (at(8), at(16), at(24));
        assert!(((c24 - c16) - (c16 - c8)).abs() / (c16 - c8) < 0.02);
    }

    #[test]
    fn report_and_monotonicity() {
        let p = SimulationParams::default();
        let r = total_tcount(&p).unwrap();
        assert!(r.t_total > 0.0 && r.t_product > 0.0);
        assert!(r.consistency_ratio > 1e-3 && r.consistency_ratio < 1e3);
        let half = total_tcount(&SimulationParams { eps: 0.005, ..p.clone() }).unwrap();
        let want = (200f64.log2() / 100f64.log2()).powi(2);
        assert!((half.t_total / r.t_total - want).abs() < 1e-12);
        let vary: Vec<Box<dyn Fn(&mut SimulationParams, u64)>> = vec![
            Box::new(|p, k| p.t = k as f64),
            Box::new(|p, k| p.n_cells = 4 * k),
            Box::new(|p, k| p.eta = k),
            Box::new(|p, k| p.b = k),
            Box::new(|p, k| p.a = k),
            Box::new(|p, k| p.eps = 0.1 / k as f64),
        ];
        for f in &vary {
            let mut last = 0.0;
            for k in 1..6 {
                let mut q = p.clone();
                f(&mut q, k);
                let v = t_total_theorem(&q);
                assert!(v >= last);
                last = v;
            }
        }
    }

    #[test]
    fn thermo_crossover() {
        let etas = [1e4, 1e5, 1e6];
        for row in thermo_compare(&etas, NRule::Cube, 1.0, 0.5).unwrap() {
            assert!(row.ratio < 1.0);
        }
        for row in thermo_compare(&etas, NRule::Quintic, 1.0, 0.5).unwrap() {
            assert!(row.ratio > 1.0);
        }
        let q = thermo_compare(&[1e6], NRule::Quartic, 1.0, 0.5).unwrap();
        assert!((q[0].crossover_n / 1e24 - 1.0).abs() < 1e-12);
        assert!((q[0].ratio - 1.0).abs() < 1e-9);
        assert!(thermo_compare(&[1.0], NRule::Cube, 1.0, 1.0).is_err());
    }

    #[test]
    fn validation() {
        assert!(SimulationParams { cutoff: 3, ..SimulationParams::default() }.validate().is_err());
        assert!(SimulationParams { eps: 1.0, ..SimulationParams::default() }.validate().is_err());
        assert!(total_tcount(&SimulationParams { volume: -1.0, ..SimulationParams::default() }).is_err());
    }
}
