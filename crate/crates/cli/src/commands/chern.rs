//! `qmt chern`: one topological-invariant computation, emitted as JSON.

use qmt::chern::{
    real_chern_from_curvature, real_chern_from_metric, second_chern_from_curvature,
    second_chern_from_metric, ChernResult, CurvatureSource, MetricSource, Normalization,
    SphereGrid,
};
use qmt::models::{Family, ModelSpec};

use crate::config::RunConfig;
use crate::CliError;

/// Family the invariant lives on, honoring a configured monopole sign.
fn model_for(config: &RunConfig, family: Family) -> ModelSpec {
    if config.model.family == family {
        config.model.clone()
    } else {
        let mut m = crate::config::default_model(family);
        m.sign = config.model.sign;
        m
    }
}

pub fn run(config: &RunConfig) -> Result<ChernResult, CliError> {
    let oracle_fd = config.chern.oracle == "fd";
    let curvature_source = if oracle_fd {
        CurvatureSource::FiniteDifference {
            gauge: config.gauge,
            step: config.fd_step,
        }
    } else {
        CurvatureSource::Analytic
    };
    let metric_source = match config.chern.method.as_str() {
        "metric-quench" => MetricSource::Quench {
            gauge: config.gauge,
            protocol: config.protocol(),
        },
        _ if oracle_fd => MetricSource::FiniteDifference {
            gauge: config.gauge,
            step: config.fd_step,
        },
        _ => MetricSource::Analytic,
    };
    let normalization = if config.chern.normalization == "printed" {
        Normalization::Printed
    } else {
        Normalization::OracleCalibrated
    };

    let result = match config.chern.invariant.as_str() {
        "real" => {
            let model = model_for(config, Family::Dirac3dEff);
            let grid = SphereGrid::s2(config.grid.s2[0], config.grid.s2[1]);
            match config.chern.method.as_str() {
                "curvature-oracle" => {
                    real_chern_from_curvature(&model, curvature_source, &grid)
                }
                _ => real_chern_from_metric(&model, &metric_source, &grid),
            }
        }
        _ => {
            let model = model_for(config, Family::YangEff);
            let grid = SphereGrid::s4(config.grid.s4);
            match config.chern.method.as_str() {
                "curvature-oracle" => {
                    second_chern_from_curvature(&model, curvature_source, &grid)
                }
                _ => second_chern_from_metric(&model, &metric_source, &grid, normalization),
            }
        }
    }
    .map_err(CliError::Module)?;

    if !result.quality_ok() {
        return Err(CliError::Quality(format!(
            "clamped-node budget exceeded: {} of {} nodes",
            result.clamped_nodes, result.total_nodes
        )));
    }
    if result.coarse_grid {
        return Err(CliError::Quality(format!(
            "grid too coarse: value {:.4} is {:.3} away from the nearest integer",
            result.value, result.rounding_error
        )));
    }
    Ok(result)
}
