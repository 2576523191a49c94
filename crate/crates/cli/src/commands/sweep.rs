//! `qmt sweep`: Chern-number quality versus quench duration and step size,
//! one CSV row per swept value plus a monotonicity summary.

use qmt::chern::{real_chern_from_metric, second_chern_from_metric, MetricSource, Normalization, SphereGrid};
use qmt::models::Family;
use qmt::quench::{QuenchProtocol, Schedule};

use crate::config::RunConfig;
use crate::manifest::fmt_float;
use crate::CliError;

pub struct SweepOutput {
    pub csv: Vec<u8>,
    pub monotonic_t: bool,
    pub monotonic_delta: bool,
}

fn quench_value(config: &RunConfig, delta: f64, t: f64) -> Result<f64, CliError> {
    let protocol = QuenchProtocol {
        delta,
        schedule: Schedule::Linear {
            duration: t,
            substeps: config.quench.substeps,
        },
        time_unit: config.quench.time_unit,
    };
    let source = MetricSource::Quench {
        gauge: config.gauge,
        protocol,
    };
    let value = if config.chern.invariant == "second" {
        let model = if config.model.family == Family::YangEff {
            config.model.clone()
        } else {
            crate::config::default_model(Family::YangEff)
        };
        second_chern_from_metric(
            &model,
            &source,
            &SphereGrid::s4(config.grid.s4),
            Normalization::OracleCalibrated,
        )
        .map_err(CliError::Module)?
        .value
    } else {
        let model = if config.model.family == Family::Dirac3dEff {
            config.model.clone()
        } else {
            crate::config::default_model(Family::Dirac3dEff)
        };
        real_chern_from_metric(
            &model,
            &source,
            &SphereGrid::s2(config.grid.s2[0], config.grid.s2[1]),
        )
        .map_err(CliError::Module)?
        .value
    };
    Ok(value)
}

pub fn run(config: &RunConfig) -> Result<SweepOutput, CliError> {
    // ideal value the error is measured against
    let target = if config.chern.invariant == "second" {
        -(config.model.sign as f64)
    } else {
        config.model.sign as f64
    };

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "row_kind",
            "sweep_param",
            "sweep_value",
            "chern_value",
            "abs_error",
        ])
        .map_err(|e| CliError::Config(format!("CSV write error: {e}")))?;

    let mut t_errors = Vec::new();
    for &t in &config.sweep.t_values {
        let v = quench_value(config, config.sweep.fixed_delta, t)?;
        let err = (v - target).abs();
        t_errors.push(err);
        writer
            .write_record([
                "result".to_string(),
                "t_quench".to_string(),
                fmt_float(t),
                fmt_float(v),
                fmt_float(err),
            ])
            .map_err(|e| CliError::Config(format!("CSV write error: {e}")))?;
    }
    let mut d_errors = Vec::new();
    for &delta in &config.sweep.delta_values {
        let v = quench_value(config, delta, config.sweep.fixed_t)?;
        let err = (v - target).abs();
        d_errors.push(err);
        writer
            .write_record([
                "result".to_string(),
                "delta_lambda".to_string(),
                fmt_float(delta),
                fmt_float(v),
                fmt_float(err),
            ])
            .map_err(|e| CliError::Config(format!("CSV write error: {e}")))?;
    }

    let non_increasing = |xs: &[f64]| xs.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let monotonic_t = non_increasing(&t_errors);
    let monotonic_delta = non_increasing(&d_errors);
    for (param, flag) in [("t_quench", monotonic_t), ("delta_lambda", monotonic_delta)] {
        writer
            .write_record([
                "summary".to_string(),
                param.to_string(),
                String::new(),
                String::new(),
                format!("non_increasing={flag}"),
            ])
            .map_err(|e| CliError::Config(format!("CSV write error: {e}")))?;
    }

    Ok(SweepOutput {
        csv: writer
            .into_inner()
            .map_err(|e| CliError::Config(format!("CSV write error: {e}")))?,
        monotonic_t,
        monotonic_delta,
    })
}
