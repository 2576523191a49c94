//! `qmt metric`: figure-preset component sweeps, quench vs oracle vs closed
//! form, emitted as CSV together with the per-run probability ledger.

use std::f64::consts::PI;

use qmt::geometry::{analytic_reference, metric_from_qgt, qgt_fd};
use qmt::models::{Chart, Family, ModelSpec, ParameterPoint};
use qmt::quench::{measure_metric, ComponentId, RunRecord};

use crate::config::RunConfig;
use crate::manifest::fmt_float;
use crate::CliError;

pub struct Preset {
    pub name: &'static str,
    pub family: Family,
    /// Swept coordinate axis.
    pub axis: usize,
    /// The other coordinates, fixed.
    pub fixed: &'static [(usize, f64)],
    pub components: &'static [(usize, usize, usize, usize)],
}

const QUARTER: f64 = PI / 4.0;
const HALF: f64 = PI / 2.0;

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig-1a",
        family: Family::Dirac3dEff,
        axis: 0,
        fixed: &[(1, QUARTER)],
        components: &[(0, 0, 0, 0), (1, 1, 0, 0)],
    },
    Preset {
        name: "fig-1b",
        family: Family::Dirac3dEff,
        axis: 0,
        fixed: &[(1, QUARTER)],
        components: &[(0, 1, 0, 0)],
    },
    Preset {
        name: "fig-1c",
        family: Family::Dirac3dEff,
        axis: 0,
        fixed: &[(1, QUARTER)],
        components: &[(1, 1, 0, 1)],
    },
    Preset {
        name: "fig-1d",
        family: Family::Dirac3dEff,
        axis: 0,
        fixed: &[(1, QUARTER)],
        components: &[(0, 1, 0, 1)],
    },
    Preset {
        name: "fig-2a",
        family: Family::YangEff,
        axis: 0,
        fixed: &[(1, QUARTER), (2, PI), (3, QUARTER)],
        components: &[(0, 0, 1, 1)],
    },
    Preset {
        name: "fig-2b",
        family: Family::YangEff,
        axis: 0,
        fixed: &[(1, QUARTER), (2, PI), (3, QUARTER)],
        components: &[(1, 1, 1, 1)],
    },
    Preset {
        name: "fig-2c",
        family: Family::YangEff,
        axis: 1,
        fixed: &[(0, QUARTER), (2, PI), (3, QUARTER)],
        components: &[(2, 2, 1, 1)],
    },
    Preset {
        name: "fig-2d",
        family: Family::YangEff,
        axis: 2,
        fixed: &[(0, QUARTER), (1, QUARTER), (3, QUARTER)],
        components: &[(3, 3, 0, 1), (3, 3, 1, 1)],
    },
    Preset {
        name: "fig-3a",
        family: Family::Lattice4d,
        axis: 0,
        fixed: &[(1, HALF), (2, HALF), (3, PI)],
        components: &[(0, 0, 0, 0)],
    },
    Preset {
        name: "fig-3b",
        family: Family::Lattice4d,
        axis: 1,
        fixed: &[(0, HALF), (2, HALF), (3, HALF)],
        components: &[(2, 3, 1, 1)],
    },
    Preset {
        name: "fig-3c",
        family: Family::Lattice4d,
        axis: 2,
        fixed: &[(0, 0.0), (1, HALF), (3, HALF)],
        components: &[(0, 0, 0, 1)],
    },
    Preset {
        name: "fig-3d",
        family: Family::Lattice4d,
        axis: 3,
        fixed: &[(0, HALF), (1, HALF), (2, QUARTER)],
        components: &[(1, 3, 0, 1)],
    },
];

pub fn find_preset(name: &str) -> Result<&'static Preset, CliError> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let known: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        CliError::Config(format!("unknown preset {name:?}; known presets: {known:?}"))
    })
}

fn sweep_values(preset: &Preset, n: usize) -> Vec<f64> {
    // midpoints of the swept axis range: (0, π) for polar sphere angles,
    // (0, 2π) for azimuthal angles and lattice momenta
    let chart = preset.family.chart();
    let dims = preset.family.param_dim();
    let range = match chart {
        Chart::CartesianMomentum => 2.0 * PI,
        Chart::SphereS2 | Chart::SphereS4 => {
            if preset.axis == dims - 1 {
                2.0 * PI
            } else {
                PI
            }
        }
    };
    (0..n).map(|i| (i as f64 + 0.5) * range / n as f64).collect()
}

fn point_at(preset: &Preset, value: f64) -> ParameterPoint {
    let dims = preset.family.param_dim();
    let mut coords = vec![0.0; dims];
    coords[preset.axis] = value;
    for &(axis, v) in preset.fixed {
        coords[axis] = v;
    }
    ParameterPoint {
        chart: preset.family.chart(),
        coords,
    }
}

pub struct MetricOutput {
    pub components_csv: Vec<u8>,
    pub runs_csv: Vec<u8>,
    pub rows: usize,
    pub worst_abs_error: f64,
}

pub fn run(config: &RunConfig) -> Result<MetricOutput, CliError> {
    let preset = find_preset(&config.metric.preset)?;
    let model = preset_model(preset, &config.model);
    let gauge = config.gauge;
    let protocol = config.protocol();
    let selection: Vec<ComponentId> = preset
        .components
        .iter()
        .map(|&(mu, nu, j, jp)| ComponentId::new(mu, nu, j, jp))
        .collect();
    let has_analytic = matches!(model.family, Family::Dirac3dEff | Family::YangEff);

    let mut components = csv::Writer::from_writer(Vec::new());
    components
        .write_record([
            "sweep_value",
            "mu",
            "nu",
            "j",
            "jprime",
            "part",
            "quench",
            "oracle",
            "analytic",
            "abs_error",
        ])
        .map_err(csv_err)?;

    let mut all_runs: Vec<RunRecord> = Vec::new();
    let mut worst_abs_error = 0.0f64;
    let mut rows = 0usize;
    for value in sweep_values(preset, config.metric.sweep_points) {
        let p = point_at(preset, value);
        let measured = measure_metric(&model, &p, gauge, &selection, &protocol)
            .map_err(CliError::Module)?;
        let oracle = metric_from_qgt(
            &qgt_fd(&model, &p, gauge, config.fd_step).map_err(CliError::Module)?,
        );
        let analytic = if has_analytic {
            Some(analytic_reference(&model, &p).map_err(CliError::Module)?)
        } else {
            None
        };
        for c in &selection {
            let q = measured.metric.component(c.mu, c.nu, c.j, c.jp);
            let o = oracle.component(c.mu, c.nu, c.j, c.jp);
            let a = analytic
                .as_ref()
                .map(|r| r.metric.component(c.mu, c.nu, c.j, c.jp));
            let parts: &[&str] = if c.j == c.jp { &["re"] } else { &["re", "im"] };
            for &part in parts {
                let (qv, ov, av) = match part {
                    "re" => (q.re, o.re, a.map(|z| z.re)),
                    _ => (q.im, o.im, a.map(|z| z.im)),
                };
                let err = (qv - ov).abs();
                worst_abs_error = worst_abs_error.max(err);
                components
                    .write_record([
                        fmt_float(value),
                        (c.mu + 1).to_string(),
                        (c.nu + 1).to_string(),
                        (c.j + 1).to_string(),
                        (c.jp + 1).to_string(),
                        part.to_string(),
                        fmt_float(qv),
                        fmt_float(ov),
                        av.map(fmt_float).unwrap_or_default(),
                        fmt_float(err),
                    ])
                    .map_err(csv_err)?;
                rows += 1;
            }
        }
        let base = all_runs.len();
        all_runs.extend(measured.runs.into_iter().map(|mut r| {
            r.run_id += base;
            r
        }));
    }

    let mut runs = csv::Writer::from_writer(Vec::new());
    runs.write_record([
        "run_id",
        "family",
        "coords",
        "state",
        "direction",
        "delta_lambda",
        "schedule",
        "t_quench",
        "substeps",
        "gamma",
    ])
    .map_err(csv_err)?;
    for r in &all_runs {
        let coords = r
            .coords
            .iter()
            .map(|&x| fmt_float(x))
            .collect::<Vec<_>>()
            .join(" ");
        runs.write_record([
            r.run_id.to_string(),
            r.family.clone(),
            coords,
            r.state.clone(),
            r.direction.clone(),
            fmt_float(r.delta_lambda),
            r.schedule.clone(),
            fmt_float(r.t_quench),
            r.substeps.to_string(),
            fmt_float(r.gamma),
        ])
        .map_err(csv_err)?;
    }

    Ok(MetricOutput {
        components_csv: components.into_inner().map_err(|e| csv_err(e.into_error().into()))?,
        runs_csv: runs.into_inner().map_err(|e| csv_err(e.into_error().into()))?,
        rows,
        worst_abs_error,
    })
}

/// The preset pins the family; sign and mass come from the configured model
/// when the families agree (so --config can flip the monopole sign).
fn preset_model(preset: &Preset, configured: &ModelSpec) -> ModelSpec {
    if configured.family == preset.family {
        configured.clone()
    } else {
        crate::config::default_model(preset.family)
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Config(format!("CSV write error: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_cover_all_figures() {
        for name in [
            "fig-1a", "fig-1b", "fig-1c", "fig-1d", "fig-2a", "fig-2b", "fig-2c", "fig-2d",
            "fig-3a", "fig-3b", "fig-3c", "fig-3d",
        ] {
            assert!(find_preset(name).is_ok(), "missing preset {name}");
        }
        assert!(find_preset("fig-9z").is_err());
    }

    #[test]
    fn sweep_points_stay_interior() {
        let preset = find_preset("fig-2c").unwrap();
        for v in sweep_values(preset, 10) {
            assert!(v > 0.0 && v < PI);
            let p = point_at(preset, v);
            assert_eq!(p.coords[1], v);
            assert_eq!(p.coords[2], PI);
        }
    }
}
