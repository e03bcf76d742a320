//! Run configuration: a lattice spec plus experiment knobs, seed and tolerances.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use gausslab::dynamics::smooth::{DriftSetup, LoopField};
use gausslab::dynamics::SmoothnessParams;
use gausslab::lattice::LatticeSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spec: LatticeSpec,
    #[serde(default)]
    pub seed: u64,
    /// Evolution time shared by all experiments.
    #[serde(default = "default_t")]
    pub t: f64,
    #[serde(default)]
    pub experiment: ExperimentParams,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_t() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentParams {
    pub lambdas: Vec<f64>,
    pub cutoffs: Vec<usize>,
    pub flux_orders: Vec<usize>,
    pub smooth: SmoothnessParams,
    pub loop_field: LoopField,
    pub drift: DriftSetup,
    pub m_sides: Vec<usize>,
    pub light_speeds: Vec<f64>,
    /// Time for the topological-suppression sweeps.
    pub topo_t: f64,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams {
            lambdas: vec![0.0, 1e2, 1e3, 1e4],
            cutoffs: vec![2, 4, 8],
            flux_orders: vec![0, 1, 2],
            smooth: SmoothnessParams::default(),
            loop_field: LoopField::default(),
            drift: DriftSetup::default(),
            m_sides: vec![2, 3, 4],
            light_speeds: vec![2.0, 4.0, 8.0],
            topo_t: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// 2-norm error budget of each propagation.
    pub evolve: f64,
    /// Max-norm tolerance of exact identities.
    pub identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { evolve: 1e-10, identity: 1e-10 }
    }
}

/// Reads and validates a JSON file; the error names the offending field.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("invalid config {}", path.display()))
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| anyhow!("schema error: {e}"))
}

pub fn load_run(path: &Path) -> Result<RunConfig> {
    let cfg: RunConfig = load(path)?;
    cfg.spec.validate()?;
    if !(cfg.t >= 0.0 && cfg.t.is_finite()) {
        return Err(anyhow!("schema error: t must be finite and nonnegative"));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_named() {
        let good = include_str!("../fixtures/default_spec.json");
        assert!(parse::<RunConfig>(good).is_ok());
        let bad = good.replacen("\"seed\"", "\"sede\"", 1);
        assert!(format!("{}", parse::<RunConfig>(&bad).unwrap_err()).contains("sede"));
        let err = parse::<RunConfig>(r#"{"spec": {"dims": 1}}"#).unwrap_err();
        assert!(format!("{err}").contains("n_side"));
        let err = parse::<Tolerances>(r#"{"evolv": 1}"#).unwrap_err();
        assert!(format!("{err}").contains("evolv"));
    }
}
