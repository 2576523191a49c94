//! Quadrature on S²/S⁴ and the topological-invariant pipelines.
//!
//! The real Chern number of the 3D monopole comes either from the curvature,
//!
//! ```text
//! C_R = (1/4π) ∫ tr(I·𝓕ᴿ_{θφ}) dθdφ  mod 2,   I = −iσ₂,  𝓕ᴿ = −iF,
//! ```
//!
//! or from same-band metric determinants, C_R = (1/2π)∫(√det g¹¹ + √det g²²).
//! The second Chern number of the 5D monopole comes from
//! C₂ = (3/4π²)∫ tr[F_{φ₁φ₂}F_{φ₃φ₄}] d⁴φ or from the band-traced metric via
//! sgn(𝓕)·√det G. Midpoint product rules on the open coordinate box keep every
//! node away from the parameterization's polar singularities, and all node
//! reductions use fixed-order pairwise summation so results are byte-identical
//! for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{
    analytic_reference, curvature_from_qgt, metric_from_qgt, qgt_fd, CurvatureTensor, Gauge,
    MetricTensor,
};
use crate::models::{Chart, Family, ModelSpec, ParameterPoint};
use crate::numlin::pairwise_sum;
use crate::quench::{measure_metric, same_band_components, QuenchProtocol};
use crate::{Error, Result};

use std::f64::consts::PI;

/// Default oracle grid on S².
pub const DEFAULT_S2_ORACLE: [usize; 2] = [100, 100];
/// Default quench grid on S².
pub const DEFAULT_S2_QUENCH: [usize; 2] = [50, 50];
/// Default oracle grid on S⁴.
pub const DEFAULT_S4_ORACLE: [usize; 4] = [20, 20, 20, 40];
/// Default quench grid on S⁴.
pub const DEFAULT_S4_QUENCH: [usize; 4] = [12, 12, 12, 12];

/// A node-count deviation above this flags the grid as too coarse.
pub const COARSE_FLAG_THRESHOLD: f64 = 0.05;
/// Budget for clamped (negative-determinant) nodes: 1% of the grid.
pub const CLAMP_BUDGET_PERCENT: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SphereKind {
    S2,
    S4,
}

/// Midpoint product grid on the open coordinate box of a sphere chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereGrid {
    pub kind: SphereKind,
    pub counts: Vec<usize>,
}

impl SphereGrid {
    pub fn s2(n_theta: usize, n_phi: usize) -> Self {
        Self {
            kind: SphereKind::S2,
            counts: vec![n_theta, n_phi],
        }
    }

    pub fn s4(counts: [usize; 4]) -> Self {
        Self {
            kind: SphereKind::S4,
            counts: counts.to_vec(),
        }
    }

    /// Coordinate ranges: polar angles span (0, π), the last angle (0, 2π).
    pub fn ranges(&self) -> Vec<f64> {
        let mut r = vec![PI; self.counts.len()];
        *r.last_mut().expect("nonempty grid") = 2.0 * PI;
        r
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Product of the cell widths.
    pub fn cell_measure(&self) -> f64 {
        self.ranges()
            .iter()
            .zip(&self.counts)
            .map(|(r, &n)| r / n as f64)
            .product()
    }

    /// Midpoint node for a flat row-major index.
    pub fn node(&self, flat: usize) -> ParameterPoint {
        let ranges = self.ranges();
        let mut rem = flat;
        let mut coords = vec![0.0; self.counts.len()];
        for i in (0..self.counts.len()).rev() {
            let n = self.counts[i];
            let idx = rem % n;
            rem /= n;
            coords[i] = (idx as f64 + 0.5) * ranges[i] / n as f64;
        }
        let chart = match self.kind {
            SphereKind::S2 => Chart::SphereS2,
            SphereKind::S4 => Chart::SphereS4,
        };
        ParameterPoint { chart, coords }
    }

    /// Same grid with every cell count doubled.
    pub fn refined(&self) -> Self {
        Self {
            kind: self.kind,
            counts: self.counts.iter().map(|&n| n * 2).collect(),
        }
    }
}

/// Where curvature blocks come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvatureSource {
    Analytic,
    FiniteDifference { gauge: Gauge, step: f64 },
}

/// Where metric components come from.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSource {
    Analytic,
    FiniteDifference { gauge: Gauge, step: f64 },
    Quench { gauge: Gauge, protocol: QuenchProtocol },
}

impl MetricSource {
    pub fn method_name(&self) -> &'static str {
        match self {
            MetricSource::Analytic | MetricSource::FiniteDifference { .. } => "metric-oracle",
            MetricSource::Quench { .. } => "metric-quench",
        }
    }
}

/// Normalization of the metric form of the second Chern number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// The nominal coefficient 3/π².
    Printed,
    /// Coefficient fixed so the metric pipeline reproduces the curvature
    /// pipeline on the closed-form model over the same grid.
    OracleCalibrated,
}

impl Normalization {
    pub fn name(self) -> &'static str {
        match self {
            Normalization::Printed => "printed",
            Normalization::OracleCalibrated => "oracle-calibrated",
        }
    }
}

/// An integrated topological invariant with its grid and run parameters.
#[derive(Debug, Clone, Serialize)]
pub struct ChernResult {
    pub value: f64,
    /// Real Chern number only: round(value) mod 2.
    pub mod2: Option<i64>,
    /// |value − round(value)|.
    pub rounding_error: f64,
    pub method: String,
    pub normalization: Option<String>,
    pub grid: Vec<usize>,
    pub delta_lambda: Option<f64>,
    #[serde(rename = "T")]
    pub t_quench: Option<f64>,
    pub time_unit: Option<String>,
    pub substeps: Option<usize>,
    pub clamped_nodes: usize,
    pub total_nodes: usize,
    pub calibration_ratio: Option<f64>,
    /// Set when the value sits further than 0.05 from the nearest integer.
    pub coarse_grid: bool,
}

impl ChernResult {
    fn new(value: f64, method: &str, grid: &SphereGrid, with_mod2: bool) -> Self {
        let rounded = value.round();
        let rounding_error = (value - rounded).abs();
        Self {
            value,
            mod2: with_mod2.then(|| (rounded as i64).rem_euclid(2)),
            rounding_error,
            method: method.to_string(),
            normalization: None,
            grid: grid.counts.clone(),
            delta_lambda: None,
            t_quench: None,
            time_unit: None,
            substeps: None,
            clamped_nodes: 0,
            total_nodes: grid.len(),
            calibration_ratio: None,
            coarse_grid: rounding_error > COARSE_FLAG_THRESHOLD,
        }
    }

    fn absorb_source(&mut self, source: &MetricSource) {
        if let MetricSource::Quench { protocol, .. } = source {
            self.delta_lambda = Some(protocol.delta);
            self.t_quench = Some(protocol.quench_time());
            self.time_unit = Some(protocol.time_unit.name().to_string());
            self.substeps = Some(protocol.substeps());
        }
    }

    /// Clamped-node budget check (1% of nodes).
    pub fn quality_ok(&self) -> bool {
        self.clamped_nodes * 100 <= self.total_nodes * CLAMP_BUDGET_PERCENT
    }
}

fn require_family(spec: &ModelSpec, op: &str, allowed: &[Family]) -> Result<()> {
    if !allowed.contains(&spec.family) {
        return Err(Error::UnsupportedFamily {
            op: op.into(),
            family: spec.family.name().into(),
        });
    }
    spec.check_mass_window()
}

fn curvature_block_at(
    spec: &ModelSpec,
    source: CurvatureSource,
    p: &ParameterPoint,
    mu: usize,
    nu: usize,
) -> Result<crate::numlin::ComplexMatrix> {
    match source {
        CurvatureSource::Analytic => {
            let r = analytic_reference(spec, p)?;
            r.curvature_block(mu, nu).ok_or(Error::UnsupportedFamily {
                op: format!("analytic curvature block ({mu},{nu})"),
                family: spec.family.name().into(),
            })
        }
        CurvatureSource::FiniteDifference { gauge, step } => {
            let q = qgt_fd(spec, p, gauge, step)?;
            Ok(curvature_from_qgt(&q).block(mu, nu).clone())
        }
    }
}

/// Real Chern number from the non-Abelian curvature.
///
/// The integrand tr(I·𝓕ᴿ) is defined in the globally consistent real gauge of
/// the PT-symmetric model, so a finite-difference curvature block is first
/// re-expressed in the closed-form eigenstate frame at each node (an exact
/// covariant conjugation); the result is then independent of the bundle gauge
/// the differences were taken in.
pub fn real_chern_from_curvature(
    spec: &ModelSpec,
    source: CurvatureSource,
    grid: &SphereGrid,
) -> Result<ChernResult> {
    require_family(
        spec,
        "real_chern_from_curvature",
        &[Family::Dirac3dEff, Family::Experimental4level],
    )?;
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|flat| -> Result<f64> {
            let p = grid.node(flat);
            let f_tp = match source {
                CurvatureSource::Analytic => analytic_reference(spec, &p)?
                    .curvature_block(0, 1)
                    .expect("closed-form block"),
                CurvatureSource::FiniteDifference { gauge, step } => {
                    let q = qgt_fd(spec, &p, gauge, step)?;
                    let f = curvature_from_qgt(&q).block(0, 1).clone();
                    // rotate into the closed-form real frame
                    let bundle = crate::geometry::ground_bundle(spec, &p, gauge)?;
                    let d = spec.coefficients(&p)?;
                    let states = crate::geometry::closed_form_eigenstates(&[d[0], d[1], d[2]])?;
                    let real_frame =
                        crate::numlin::Frame::from_cols(states[..2].to_vec());
                    let v = crate::numlin::alignment_rotation(&bundle.ground, &real_frame)?;
                    v.adjoint().mul(&f).mul(&v)
                }
            };
            // tr(I·(−iF)) with I = −iσ₂ = [[0, −1], [1, 0]]
            let m = f_tp.scale(crate::numlin::C64::new(0.0, -1.0));
            Ok((-m.get(1, 0) + m.get(0, 1)).re)
        })
        .collect::<Result<Vec<_>>>()?;
    let value = pairwise_sum(&values) * grid.cell_measure() / (4.0 * PI);
    Ok(ChernResult::new(value, "curvature-oracle", grid, true))
}

fn metric_at(spec: &ModelSpec, source: &MetricSource, p: &ParameterPoint) -> Result<MetricTensor> {
    match source {
        MetricSource::Analytic => Ok(analytic_reference(spec, p)?.metric),
        MetricSource::FiniteDifference { gauge, step } => {
            Ok(metric_from_qgt(&qgt_fd(spec, p, *gauge, *step)?))
        }
        MetricSource::Quench { gauge, protocol } => {
            let selection = same_band_components(p.dim(), spec.degeneracy);
            Ok(measure_metric(spec, p, *gauge, &selection, protocol)?.metric)
        }
    }
}

/// Real Chern number from same-band metric determinants.
pub fn real_chern_from_metric(
    spec: &ModelSpec,
    source: &MetricSource,
    grid: &SphereGrid,
) -> Result<ChernResult> {
    require_family(
        spec,
        "real_chern_from_metric",
        &[Family::Dirac3dEff, Family::Experimental4level],
    )?;
    let per_node: Vec<(f64, usize)> = (0..grid.len())
        .into_par_iter()
        .map(|flat| -> Result<(f64, usize)> {
            let p = grid.node(flat);
            let g = metric_at(spec, source, &p)?;
            let det2 = |m: [[f64; 2]; 2]| m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let mut clamped = 0;
            let mut integrand = 0.0;
            for band in 0..2 {
                let det = det2(g.band_subblock(band, 0, 1));
                if det < 0.0 {
                    clamped += 1;
                }
                integrand += det.max(0.0).sqrt();
            }
            Ok((integrand, clamped))
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = per_node.iter().map(|(v, _)| *v).collect();
    let clamped_nodes = per_node.iter().filter(|(_, c)| *c > 0).count();
    let value = pairwise_sum(&values) * grid.cell_measure() / (2.0 * PI);
    let mut result = ChernResult::new(value, source.method_name(), grid, true);
    result.clamped_nodes = clamped_nodes;
    result.absorb_source(source);
    Ok(result)
}

/// Second Chern number from the two closed-form curvature blocks (or their
/// finite-difference versions).
pub fn second_chern_from_curvature(
    spec: &ModelSpec,
    source: CurvatureSource,
    grid: &SphereGrid,
) -> Result<ChernResult> {
    require_family(spec, "second_chern_from_curvature", &[Family::YangEff])?;
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|flat| -> Result<f64> {
            let p = grid.node(flat);
            let f12 = curvature_block_at(spec, source, &p, 0, 1)?;
            let f34 = curvature_block_at(spec, source, &p, 2, 3)?;
            Ok(f12.mul(&f34).trace().re)
        })
        .collect::<Result<Vec<_>>>()?;
    let value = pairwise_sum(&values) * grid.cell_measure() * 3.0 / (4.0 * PI * PI);
    Ok(ChernResult::new(value, "curvature-oracle", grid, false))
}

/// Band-traced metric matrix G_ij = tr(g_{φ_i φ_j}).
pub fn g_trace_matrix(metric: &MetricTensor) -> Result<[[f64; 4]; 4]> {
    if metric.dirs != 4 {
        return Err(Error::DimensionMismatch {
            context: format!("G matrix needs 4 directions, metric has {}", metric.dirs),
        });
    }
    let mut g = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let tr = metric.block(i, j).trace();
            debug_assert!(tr.im.abs() <= 1e-10, "imaginary trace residue {}", tr.im);
            g[i][j] = tr.re;
        }
    }
    Ok(g)
}

/// Determinant of a small real matrix by Gaussian elimination with partial
/// pivoting.
pub fn det_real(m: &[[f64; 4]; 4]) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for col in 0..4 {
        let mut pivot = col;
        for row in (col + 1)..4 {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for row in (col + 1)..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    det
}

/// The scalar density 𝓕 = ε^{abcd} tr(F_ab F_cd) from a full curvature tensor.
pub fn curvature_scalar(f: &CurvatureTensor) -> f64 {
    let tr = |a: usize, b: usize, c: usize, d: usize| f.block(a, b).mul(f.block(c, d)).trace().re;
    8.0 * (tr(0, 1, 2, 3) - tr(0, 2, 1, 3) + tr(0, 3, 1, 2))
}

/// Per-point record of the √detG–|𝓕| comparison.
#[derive(Debug, Clone, Serialize)]
pub struct DetGPoint {
    pub coords: Vec<f64>,
    pub sqrt_det_g: f64,
    pub curly_f: f64,
    pub ratio: f64,
}

/// Outcome of sampling the √detG = |𝓕|/48 relation.
#[derive(Debug, Clone, Serialize)]
pub struct DetGReport {
    pub points: Vec<DetGPoint>,
    /// max |48√detG − |𝓕|| / max(|𝓕|, 1e-12) over the sample.
    pub max_rel_deviation: f64,
    /// Spread (max − min) of the measured |𝓕|/√detG ratios.
    pub ratio_spread: f64,
    pub mean_ratio: f64,
    /// True when sgn(𝓕) never changes across the sample.
    pub sign_constant: bool,
    /// The common sign when constant.
    pub sign: f64,
}

/// Sample the metric–curvature determinant relation of the 5D model over a
/// set of points, using the finite-difference oracle for all six curvature
/// blocks and the band-traced metric.
pub fn sqrt_detg_vs_f_check(
    spec: &ModelSpec,
    gauge: Gauge,
    step: f64,
    points: &[ParameterPoint],
) -> Result<DetGReport> {
    require_family(spec, "sqrt_detg_vs_f_check", &[Family::YangEff])?;
    let evaluated: Vec<DetGPoint> = points
        .par_iter()
        .map(|p| -> Result<DetGPoint> {
            let q = qgt_fd(spec, p, gauge, step)?;
            let metric = metric_from_qgt(&q);
            let curvature = curvature_from_qgt(&q);
            let g = g_trace_matrix(&metric)?;
            let sqrt_det_g = det_real(&g).max(0.0).sqrt();
            let curly_f = curvature_scalar(&curvature);
            let ratio = if sqrt_det_g > 0.0 {
                curly_f.abs() / sqrt_det_g
            } else {
                0.0
            };
            Ok(DetGPoint {
                coords: p.coords.clone(),
                sqrt_det_g,
                curly_f,
                ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut max_rel_deviation = 0.0f64;
    let mut ratio_min = f64::INFINITY;
    let mut ratio_max = f64::NEG_INFINITY;
    let mut ratio_sum = 0.0;
    let first_sign = evaluated
        .first()
        .map(|p| p.curly_f.signum())
        .unwrap_or(0.0);
    let mut sign_constant = true;
    for p in &evaluated {
        let dev = (48.0 * p.sqrt_det_g - p.curly_f.abs()).abs() / p.curly_f.abs().max(1e-12);
        max_rel_deviation = max_rel_deviation.max(dev);
        ratio_min = ratio_min.min(p.ratio);
        ratio_max = ratio_max.max(p.ratio);
        ratio_sum += p.ratio;
        if p.curly_f.signum() != first_sign {
            sign_constant = false;
        }
    }
    Ok(DetGReport {
        max_rel_deviation,
        ratio_spread: ratio_max - ratio_min,
        mean_ratio: ratio_sum / evaluated.len().max(1) as f64,
        sign_constant,
        sign: first_sign,
        points: evaluated,
    })
}

/// sgn(𝓕) on the closed-form model (it never changes sign on the sphere).
fn analytic_sign(spec: &ModelSpec, p: &ParameterPoint) -> Result<f64> {
    let r = analytic_reference(spec, p)?;
    let f12 = r.curvature_block(0, 1).expect("closed-form block");
    let f34 = r.curvature_block(2, 3).expect("closed-form block");
    Ok(f12.mul(&f34).trace().re.signum())
}

/// Constant quench-mode sign, established by finite-difference sampling.
fn sampled_sign(spec: &ModelSpec, gauge: Gauge) -> Result<f64> {
    let probes = [
        [1.0, 1.2, 0.9, 0.8],
        [1.8, 2.0, 1.4, 2.2],
        [0.7, 1.9, 2.3, 4.0],
    ];
    let points: Vec<ParameterPoint> = probes
        .iter()
        .map(|c| ParameterPoint {
            chart: Chart::SphereS4,
            coords: c.to_vec(),
        })
        .collect();
    let report = sqrt_detg_vs_f_check(spec, gauge, crate::geometry::DEFAULT_FD_STEP, &points)?;
    Ok(report.sign)
}

/// ∫ sgn(𝓕)·√detG over the grid on the closed-form model (used to calibrate
/// the metric-form normalization).
fn analytic_signed_detg_integral(spec: &ModelSpec, grid: &SphereGrid) -> Result<f64> {
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|flat| -> Result<f64> {
            let p = grid.node(flat);
            let g = g_trace_matrix(&analytic_reference(spec, &p)?.metric)?;
            let sign = analytic_sign(spec, &p)?;
            Ok(sign * det_real(&g).max(0.0).sqrt())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&values) * grid.cell_measure())
}

/// Second Chern number from the band-traced metric.
///
/// The metric form needs an overall coefficient. `Printed` uses the nominal
/// 3/π²; `OracleCalibrated` fixes the coefficient so that this pipeline
/// reproduces [`second_chern_from_curvature`] on the closed-form model over
/// the same grid, and reports the ratio between the two choices.
pub fn second_chern_from_metric(
    spec: &ModelSpec,
    source: &MetricSource,
    grid: &SphereGrid,
    normalization: Normalization,
) -> Result<ChernResult> {
    require_family(spec, "second_chern_from_metric", &[Family::YangEff])?;
    let printed = 3.0 / (PI * PI);
    let coefficient = match normalization {
        Normalization::Printed => printed,
        Normalization::OracleCalibrated => {
            let target = second_chern_from_curvature(spec, CurvatureSource::Analytic, grid)?;
            let integral = analytic_signed_detg_integral(spec, grid)?;
            target.value / integral
        }
    };

    // sign of 𝓕 per node in oracle modes, constant sampled sign in quench mode
    let constant_sign = match source {
        MetricSource::Quench { gauge, .. } => Some(sampled_sign(spec, *gauge)?),
        _ => None,
    };

    let per_node: Vec<(f64, usize)> = (0..grid.len())
        .into_par_iter()
        .map(|flat| -> Result<(f64, usize)> {
            let p = grid.node(flat);
            let g = g_trace_matrix(&metric_at(spec, source, &p)?)?;
            let det = det_real(&g);
            let clamped = usize::from(det < 0.0);
            let sign = match constant_sign {
                Some(s) => s,
                None => match source {
                    MetricSource::Analytic => analytic_sign(spec, &p)?,
                    MetricSource::FiniteDifference { gauge, step } => {
                        let q = qgt_fd(spec, &p, *gauge, *step)?;
                        curvature_scalar(&curvature_from_qgt(&q)).signum()
                    }
                    MetricSource::Quench { .. } => unreachable!("constant sign set above"),
                },
            };
            Ok((sign * det.max(0.0).sqrt(), clamped))
        })
        .collect::<Result<Vec<_>>>()?;

    let values: Vec<f64> = per_node.iter().map(|(v, _)| *v).collect();
    let clamped_nodes = per_node.iter().map(|(_, c)| *c).sum();
    let value = coefficient * pairwise_sum(&values) * grid.cell_measure();
    let mut result = ChernResult::new(value, source.method_name(), grid, false);
    result.normalization = Some(normalization.name().to_string());
    result.calibration_ratio = Some(coefficient / printed);
    result.clamped_nodes = clamped_nodes;
    result.absorb_source(source);
    Ok(result)
}
