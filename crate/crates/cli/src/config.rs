//! Run configuration: defaults ← JSON config file ← command-line flags, in
//! that precedence order. The fully merged configuration is hashed into the
//! run id and echoed verbatim into the manifest.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use qmt::geometry::Gauge;
use qmt::models::{Family, ModelSpec};
use qmt::quench::TimeUnit;

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QuenchConfig {
    pub delta_lambda: f64,
    pub t_quench: f64,
    pub time_unit: TimeUnit,
    pub substeps: usize,
    /// "sudden" or "linear".
    pub schedule: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub s2: [usize; 2],
    pub s4: [usize; 4],
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub preset: String,
    pub sweep_points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChernConfig {
    /// "real" or "second".
    pub invariant: String,
    /// "curvature-oracle", "metric-oracle", or "metric-quench".
    pub method: String,
    /// "analytic" or "fd": which oracle backs the oracle methods.
    pub oracle: String,
    /// "printed" or "oracle-calibrated" (second Chern, metric form).
    pub normalization: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub t_values: Vec<f64>,
    pub delta_values: Vec<f64>,
    pub fixed_delta: f64,
    pub fixed_t: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub gauge: Gauge,
    pub quench: QuenchConfig,
    pub grid: GridConfig,
    pub fd_step: f64,
    pub seed: u64,
    pub metric: MetricConfig,
    pub chern: ChernConfig,
    pub sweep: SweepConfig,
}

impl RunConfig {
    /// Baseline defaults; family-dependent fields (mass, δλ, gauge) follow the
    /// model once it is known.
    pub fn defaults_for(model: ModelSpec) -> Self {
        let is_3d = model.family.is_3d();
        let delta = if is_3d { PI / 100.0 } else { PI / 80.0 };
        let gauge = if is_3d {
            Gauge::Analytic
        } else {
            Gauge::ReferenceProjection
        };
        RunConfig {
            model,
            gauge,
            quench: QuenchConfig {
                delta_lambda: delta,
                t_quench: 0.001,
                time_unit: TimeUnit::TwoPi,
                substeps: 100,
                schedule: "linear".into(),
            },
            grid: GridConfig {
                s2: qmt::chern::DEFAULT_S2_ORACLE,
                s4: qmt::chern::DEFAULT_S4_ORACLE,
            },
            fd_step: qmt::geometry::DEFAULT_FD_STEP,
            seed: 7,
            metric: MetricConfig {
                preset: "fig-1a".into(),
                sweep_points: 20,
            },
            chern: ChernConfig {
                invariant: "real".into(),
                method: "curvature-oracle".into(),
                oracle: "analytic".into(),
                normalization: "oracle-calibrated".into(),
            },
            sweep: SweepConfig {
                t_values: vec![0.05, 0.01, 0.001],
                delta_values: vec![PI / 20.0, PI / 50.0, PI / 100.0],
                fixed_delta: PI / 100.0,
                fixed_t: 0.001,
            },
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.quench.delta_lambda <= 0.0 || !self.quench.delta_lambda.is_finite() {
            return Err(CliError::Config(format!(
                "quench.delta_lambda must be positive and finite, got {}",
                self.quench.delta_lambda
            )));
        }
        if self.quench.substeps == 0 {
            return Err(CliError::Config("quench.substeps must be at least 1".into()));
        }
        if !matches!(self.quench.schedule.as_str(), "sudden" | "linear") {
            return Err(CliError::Config(format!(
                "quench.schedule must be \"sudden\" or \"linear\", got {:?}",
                self.quench.schedule
            )));
        }
        if self.grid.s2.iter().any(|&n| n == 0) || self.grid.s4.iter().any(|&n| n == 0) {
            return Err(CliError::Config("grid cell counts must be positive".into()));
        }
        if !matches!(self.chern.invariant.as_str(), "real" | "second") {
            return Err(CliError::Config(format!(
                "chern.invariant must be \"real\" or \"second\", got {:?}",
                self.chern.invariant
            )));
        }
        if !matches!(
            self.chern.method.as_str(),
            "curvature-oracle" | "metric-oracle" | "metric-quench"
        ) {
            return Err(CliError::Config(format!(
                "chern.method must be one of curvature-oracle | metric-oracle | metric-quench, \
                 got {:?}",
                self.chern.method
            )));
        }
        if !matches!(self.chern.oracle.as_str(), "analytic" | "fd") {
            return Err(CliError::Config(format!(
                "chern.oracle must be \"analytic\" or \"fd\", got {:?}",
                self.chern.oracle
            )));
        }
        if !matches!(
            self.chern.normalization.as_str(),
            "printed" | "oracle-calibrated"
        ) {
            return Err(CliError::Config(format!(
                "chern.normalization must be \"printed\" or \"oracle-calibrated\", got {:?}",
                self.chern.normalization
            )));
        }
        if self.sweep.t_values.is_empty() || self.sweep.delta_values.is_empty() {
            return Err(CliError::Config("sweep value lists must be nonempty".into()));
        }
        Ok(())
    }

    pub fn protocol(&self) -> qmt::quench::QuenchProtocol {
        let schedule = if self.quench.schedule == "sudden" {
            qmt::quench::Schedule::Sudden
        } else {
            qmt::quench::Schedule::Linear {
                duration: self.quench.t_quench,
                substeps: self.quench.substeps,
            }
        };
        qmt::quench::QuenchProtocol {
            delta: self.quench.delta_lambda,
            schedule,
            time_unit: self.quench.time_unit,
        }
    }
}

/// Read the family the run will use, before full merging, so the defaults can
/// be family-aware: flag > file > dirac3d-eff.
pub fn resolve_family(
    flag_family: Option<&str>,
    file_value: Option<&serde_json::Value>,
) -> Result<Family, CliError> {
    let from_flag = flag_family
        .map(|name| parse_family(name))
        .transpose()?;
    if let Some(f) = from_flag {
        return Ok(f);
    }
    if let Some(v) = file_value {
        if let Some(name) = v
            .get("model")
            .and_then(|m| m.get("family"))
            .and_then(|f| f.as_str())
        {
            return parse_family(name);
        }
    }
    Ok(Family::Dirac3dEff)
}

pub fn parse_family(name: &str) -> Result<Family, CliError> {
    serde_json::from_value(serde_json::Value::String(name.to_string()))
        .map_err(|_| CliError::Config(format!("unknown model family {name:?}")))
}

pub fn default_model(family: Family) -> ModelSpec {
    match family {
        Family::Dirac3dLattice => ModelSpec::dirac3d_lattice(2.0),
        Family::Dirac3dEff => ModelSpec::dirac3d_eff(1),
        Family::Yang5dLattice => ModelSpec::yang5d_lattice(4.0),
        Family::YangEff => ModelSpec::yang_eff(1),
        Family::Lattice4d => ModelSpec::lattice_4d(),
        Family::Experimental4level => ModelSpec::experimental_4level(1),
    }
}

/// Recursive JSON merge: objects merge key-wise, everything else replaces.
fn merge_value(base: &mut serde_json::Value, patch: &serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) => merge_value(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}

/// Load the optional config file and merge it over the defaults.
pub fn load_config(
    path: Option<&Path>,
    flag_family: Option<&str>,
) -> Result<RunConfig, CliError> {
    let file_value: Option<serde_json::Value> = match path {
        None => None,
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                CliError::Config(format!("cannot read config file {}: {e}", p.display()))
            })?;
            Some(serde_json::from_str(&text).map_err(|e| {
                CliError::Config(format!("config file {} is not valid JSON: {e}", p.display()))
            })?)
        }
    };
    let family = resolve_family(flag_family, file_value.as_ref())?;
    let defaults = RunConfig::defaults_for(default_model(family));
    let mut merged = serde_json::to_value(&defaults).expect("defaults serialize");
    if let Some(fv) = &file_value {
        merge_value(&mut merged, fv);
    }
    let config: RunConfig = serde_json::from_value(merged)
        .map_err(|e| CliError::Config(format!("invalid configuration: {e}")))?;
    Ok(config)
}

/// Parse "100x100" / "12x12x12x12" style grid shapes.
pub fn parse_grid(text: &str) -> Result<Vec<usize>, CliError> {
    let counts: Result<Vec<usize>, _> = text.split('x').map(str::parse::<usize>).collect();
    let counts =
        counts.map_err(|_| CliError::Config(format!("cannot parse grid shape {text:?}")))?;
    if counts.len() != 2 && counts.len() != 4 {
        return Err(CliError::Config(format!(
            "grid shape must have 2 or 4 cell counts, got {}",
            counts.len()
        )));
    }
    Ok(counts)
}

/// Parse "0.05,0.01,0.001" style float lists.
pub fn parse_float_list(text: &str) -> Result<Vec<f64>, CliError> {
    let values: Result<Vec<f64>, _> = text.split(',').map(str::parse::<f64>).collect();
    values.map_err(|_| CliError::Config(format!("cannot parse value list {text:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_layer_precedence() {
        // defaults
        let defaults = RunConfig::defaults_for(default_model(Family::Dirac3dEff));
        assert!((defaults.quench.delta_lambda - PI / 100.0).abs() < 1e-15);

        // file overrides defaults
        let dir = std::env::temp_dir().join("qmt-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(&path, r#"{"quench": {"delta_lambda": 0.0392699081698724}}"#).unwrap();
        let from_file = load_config(Some(&path), None).unwrap();
        assert!((from_file.quench.delta_lambda - 0.0392699081698724).abs() < 1e-15);
        // remaining fields keep the defaults
        assert_eq!(from_file.quench.substeps, 100);

        // flags override the file (simulated by the caller assigning after load)
        let mut with_flag = from_file;
        with_flag.quench.delta_lambda = PI / 50.0;
        assert!((with_flag.quench.delta_lambda - PI / 50.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = std::env::temp_dir().join("qmt-config-test2");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.json");
        std::fs::write(&path, r#"{"quemch": {"delta_lambda": 0.01}}"#).unwrap();
        assert!(load_config(Some(&path), None).is_err());
    }

    #[test]
    fn family_defaults_differ() {
        let c3 = RunConfig::defaults_for(default_model(Family::Dirac3dEff));
        let c5 = RunConfig::defaults_for(default_model(Family::YangEff));
        assert!((c3.quench.delta_lambda - PI / 100.0).abs() < 1e-15);
        assert!((c5.quench.delta_lambda - PI / 80.0).abs() < 1e-15);
        assert_eq!(c3.gauge, Gauge::Analytic);
        assert_eq!(c5.gauge, Gauge::ReferenceProjection);
    }

    #[test]
    fn grid_and_list_parsing() {
        assert_eq!(parse_grid("100x100").unwrap(), vec![100, 100]);
        assert_eq!(parse_grid("12x12x12x12").unwrap(), vec![12, 12, 12, 12]);
        assert!(parse_grid("10").is_err());
        assert_eq!(parse_float_list("0.05,0.01").unwrap(), vec![0.05, 0.01]);
    }
}
