//! Simulated parameter quenches and metric reconstruction.
//!
//! A run prepares a state in the degenerate ground space at λ, quenches the
//! parameters by δλ along one or two coordinate directions (instantaneously
//! or as a linear ramp integrated with midpoint-exponential substeps), and
//! measures the transition probability Γ into the excited subspace at the end
//! point. Metric components follow from the quadratic response:
//!
//! ```text
//! g^{jj}_{μμ} ≈ Γ^{jj}_{μμ}/δλ²
//! g^{jj}_{μν} ≈ (Γ^{jj}_{μν} − Γ^{jj}_{μμ} − Γ^{jj}_{νν})/(2δλ²)
//! Re g^{jj'} ≈ (2Γ^{aa} − Γ^{jj} − Γ^{j'j'})/(2δλ²)
//! Im g^{jj'} ≈ (Γ^{jj} + Γ^{j'j'} − 2Γ^{bb})/(2δλ²)
//! ```
//!
//! with |ψ_a⟩ = (|ψ_j⟩+|ψ_{j'}⟩)/√2 and |ψ_b⟩ = (|ψ_j⟩+i|ψ_{j'}⟩)/√2. For
//! μ≠ν band-off-diagonal components the Re/Im combinations consume the
//! already-combined Γ_{μν}-class quantities of the four states.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{ground_bundle, Gauge, GroundBundle, MetricTensor};
use crate::models::{ModelSpec, ParameterPoint};
use crate::numlin::{hermitian_eig, inner, C64, ComplexMatrix, ZERO};
use crate::{Error, Result};

/// Default quench step for the 3D model (radians).
pub const DEFAULT_DELTA_3D: f64 = PI / 100.0;
/// Default quench step for the 5D model (radians).
pub const DEFAULT_DELTA_5D: f64 = PI / 80.0;
/// Default quench duration, in ramp time units.
pub const DEFAULT_T_QUENCH: f64 = 0.001;
/// Default number of midpoint-exponential substeps.
pub const DEFAULT_SUBSTEPS: usize = 100;

/// Conversion between the quench duration T and physical evolution time.
///
/// The ramp time is quoted in units of 2π/Ω₀; with ħ = Ω₀ = 1 the default
/// maps T to 2πT. Both conventions sit deep in the sudden regime at the
/// defaults, and every run manifest records which one was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeUnit {
    TwoPi,
    One,
}

impl TimeUnit {
    pub fn physical_time(self, t: f64) -> f64 {
        match self {
            TimeUnit::TwoPi => 2.0 * PI * t,
            TimeUnit::One => t,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TimeUnit::TwoPi => "two-pi",
            TimeUnit::One => "one",
        }
    }
}

/// Quench schedule: instantaneous, or a linear ramp λ(t) = λ₀ + (t/τ)·δλ·e.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Schedule {
    Sudden,
    Linear { duration: f64, substeps: usize },
}

impl Schedule {
    pub fn name(&self) -> &'static str {
        match self {
            Schedule::Sudden => "sudden",
            Schedule::Linear { .. } => "linear",
        }
    }
}

/// One or two unit coordinate directions; the same δλ applies to both legs of
/// a pair quench.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuenchDirection {
    Single(usize),
    Pair(usize, usize),
}

impl QuenchDirection {
    pub fn displacement(&self, dims: usize, delta: f64) -> Vec<f64> {
        let mut d = vec![0.0; dims];
        match *self {
            QuenchDirection::Single(mu) => d[mu] = delta,
            QuenchDirection::Pair(mu, nu) => {
                d[mu] = delta;
                d[nu] = delta;
            }
        }
        d
    }

    pub fn label(&self) -> String {
        match *self {
            QuenchDirection::Single(mu) => format!("e{}", mu + 1),
            QuenchDirection::Pair(mu, nu) => format!("e{}+e{}", mu + 1, nu + 1),
        }
    }
}

/// One simulated quench experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchSpec {
    pub start: ParameterPoint,
    pub direction: QuenchDirection,
    pub delta: f64,
    pub schedule: Schedule,
    pub time_unit: TimeUnit,
}

impl QuenchSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.delta.is_finite() || self.delta < 0.0 {
            return Err(Error::InvalidQuench {
                context: format!("delta = {}", self.delta),
            });
        }
        if let Schedule::Linear { duration, substeps } = self.schedule {
            if substeps == 0 || !duration.is_finite() || duration < 0.0 {
                return Err(Error::InvalidQuench {
                    context: format!("linear schedule T={duration}, substeps={substeps}"),
                });
            }
        }
        Ok(())
    }

    pub fn end_point(&self) -> ParameterPoint {
        self.start
            .displaced_by(&self.direction.displacement(self.start.dim(), self.delta))
    }
}

/// Which combination of ground states a run starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StateKind {
    /// One ground band (0-based index).
    Band(usize),
    /// (|ψ_j⟩ + |ψ_{j'}⟩)/√2.
    SuperposA(usize, usize),
    /// (|ψ_j⟩ + i|ψ_{j'}⟩)/√2.
    SuperposB(usize, usize),
}

impl StateKind {
    pub fn label(&self) -> String {
        match *self {
            StateKind::Band(j) => format!("band-{}", j + 1),
            StateKind::SuperposA(j, k) => format!("sup-a({},{})", j + 1, k + 1),
            StateKind::SuperposB(j, k) => format!("sup-b({},{})", j + 1, k + 1),
        }
    }
}

/// Coefficients of an initial state over the gauge-fixed ground basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedState {
    pub kind: StateKind,
    pub coefficients: Vec<C64>,
}

impl PreparedState {
    pub fn new(kind: StateKind, degeneracy: usize) -> Result<Self> {
        let mut coefficients = vec![ZERO; degeneracy];
        let r = 1.0 / 2.0f64.sqrt();
        match kind {
            StateKind::Band(j) => {
                check_band(j, degeneracy)?;
                coefficients[j] = C64::new(1.0, 0.0);
            }
            StateKind::SuperposA(j, k) => {
                check_band(j, degeneracy)?;
                check_band(k, degeneracy)?;
                coefficients[j] = C64::new(r, 0.0);
                coefficients[k] = C64::new(r, 0.0);
            }
            StateKind::SuperposB(j, k) => {
                check_band(j, degeneracy)?;
                check_band(k, degeneracy)?;
                coefficients[j] = C64::new(r, 0.0);
                coefficients[k] = C64::new(0.0, r);
            }
        }
        Ok(Self { kind, coefficients })
    }
}

fn check_band(j: usize, degeneracy: usize) -> Result<()> {
    if j >= degeneracy {
        return Err(Error::InvalidState {
            context: format!("band index {j} with degeneracy {degeneracy}"),
        });
    }
    Ok(())
}

/// Time-ordered propagator for the quench, or `None` for a sudden one.
///
/// The linear ramp is integrated as a product of exact substep exponentials
/// evaluated at interval midpoints, so the result is unitary by construction.
pub fn propagator(spec: &ModelSpec, q: &QuenchSpec) -> Result<Option<ComplexMatrix>> {
    q.validate()?;
    match q.schedule {
        Schedule::Sudden => Ok(None),
        Schedule::Linear { duration, substeps } => {
            let tau = q.time_unit.physical_time(duration);
            let dt = tau / substeps as f64;
            let disp = q.direction.displacement(q.start.dim(), q.delta);
            let mut u = ComplexMatrix::identity(4);
            for k in 0..substeps {
                let frac = (k as f64 + 0.5) / substeps as f64;
                let mid: Vec<f64> = disp.iter().map(|d| d * frac).collect();
                let h = spec.hamiltonian(&q.start.displaced_by(&mid))?;
                let dec = hermitian_eig(&h)?;
                let step = dec.map_eigenvalues(|e| C64::from_polar(1.0, -e * dt));
                u = step.mul(&u);
            }
            Ok(Some(u))
        }
    }
}

/// State vector at the end of the quench.
pub fn evolve(
    spec: &ModelSpec,
    q: &QuenchSpec,
    bundle: &GroundBundle,
    state: &PreparedState,
) -> Result<Vec<C64>> {
    let psi = bundle.ground.combine(&state.coefficients);
    Ok(match propagator(spec, q)? {
        None => psi,
        Some(u) => u.mul_vec(&psi),
    })
}

/// Measured transition probability of one run.
#[derive(Debug, Clone)]
pub struct TransitionResult {
    /// Probability in the excited subspace at the end point.
    pub gamma: f64,
    /// Probability summed over every end-point eigenstate; unity up to
    /// rounding for any unitary evolution.
    pub total_probability: f64,
    pub spec: QuenchSpec,
    pub state: StateKind,
}

/// Evolve a prepared state through the quench and project onto the end-point
/// excited cluster.
pub fn transition_probability(
    spec: &ModelSpec,
    q: &QuenchSpec,
    bundle: &GroundBundle,
    state: &PreparedState,
) -> Result<TransitionResult> {
    let psi = evolve(spec, q, bundle, state)?;
    let end = ground_bundle(spec, &q.end_point(), Gauge::EigensolverRaw)?;
    gamma_from_state(&psi, &end, q, state.kind)
}

fn gamma_from_state(
    psi: &[C64],
    end: &GroundBundle,
    q: &QuenchSpec,
    state: StateKind,
) -> Result<TransitionResult> {
    let mut gamma = 0.0;
    for m in 0..end.excited.len() {
        gamma += inner(end.excited.col(m), psi).norm_sqr();
    }
    let mut total = gamma;
    for j in 0..end.ground.len() {
        total += inner(end.ground.col(j), psi).norm_sqr();
    }
    Ok(TransitionResult {
        gamma,
        total_probability: total,
        spec: q.clone(),
        state,
    })
}

/// g^{jj}_{μμ} from a single diagonal-class probability.
pub fn extract_diag(gamma: f64, delta: f64) -> f64 {
    gamma / (delta * delta)
}

/// g^{jj}_{μν} from the pair-direction probability and the two single-direction
/// probabilities of the same state.
pub fn extract_offdiag_same_band(
    gamma_munu: f64,
    gamma_mumu: f64,
    gamma_nunu: f64,
    delta: f64,
) -> f64 {
    (gamma_munu - gamma_mumu - gamma_nunu) / (2.0 * delta * delta)
}

/// Complex g^{jj'} from the four state probabilities of one direction class.
///
/// For μ≠ν pass the already-combined Γ_{μν}-class quantities
/// (Γ_{μν} − Γ_{μμ} − Γ_{νν})/2 of each state.
pub fn extract_offdiag_bands(
    gamma_aa: f64,
    gamma_bb: f64,
    gamma_jj: f64,
    gamma_jpjp: f64,
    delta: f64,
) -> C64 {
    let d2 = 2.0 * delta * delta;
    C64::new(
        (2.0 * gamma_aa - gamma_jj - gamma_jpjp) / d2,
        (gamma_jj + gamma_jpjp - 2.0 * gamma_bb) / d2,
    )
}

/// One metric component g^{jj'}_{μν}, with μ ≤ ν and j ≤ j'.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComponentId {
    pub mu: usize,
    pub nu: usize,
    pub j: usize,
    pub jp: usize,
}

impl ComponentId {
    pub fn new(mu: usize, nu: usize, j: usize, jp: usize) -> Self {
        let (mu, nu) = if mu <= nu { (mu, nu) } else { (nu, mu) };
        let (j, jp) = if j <= jp { (j, jp) } else { (jp, j) };
        Self { mu, nu, j, jp }
    }

    pub fn label(&self) -> String {
        format!(
            "g[{},{}]^({},{})",
            self.mu + 1,
            self.nu + 1,
            self.j + 1,
            self.jp + 1
        )
    }
}

/// Every independent component for `dirs` directions and `bands` bands.
pub fn all_components(dirs: usize, bands: usize) -> Vec<ComponentId> {
    let mut out = Vec::new();
    for mu in 0..dirs {
        for nu in mu..dirs {
            for j in 0..bands {
                for jp in j..bands {
                    out.push(ComponentId::new(mu, nu, j, jp));
                }
            }
        }
    }
    out
}

/// The same-band components only (enough for the band-traced metric G).
pub fn same_band_components(dirs: usize, bands: usize) -> Vec<ComponentId> {
    all_components(dirs, bands)
        .into_iter()
        .filter(|c| c.j == c.jp)
        .collect()
}

/// Quench template shared by every run of one measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuenchProtocol {
    pub delta: f64,
    pub schedule: Schedule,
    pub time_unit: TimeUnit,
}

impl QuenchProtocol {
    pub fn sudden(delta: f64) -> Self {
        Self {
            delta,
            schedule: Schedule::Sudden,
            time_unit: TimeUnit::TwoPi,
        }
    }

    pub fn linear(delta: f64, duration: f64, substeps: usize) -> Self {
        Self {
            delta,
            schedule: Schedule::Linear { duration, substeps },
            time_unit: TimeUnit::TwoPi,
        }
    }

    pub fn quench_time(&self) -> f64 {
        match self.schedule {
            Schedule::Sudden => 0.0,
            Schedule::Linear { duration, .. } => duration,
        }
    }

    pub fn substeps(&self) -> usize {
        match self.schedule {
            Schedule::Sudden => 0,
            Schedule::Linear { substeps, .. } => substeps,
        }
    }
}

/// Ledger entry for one executed quench run.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub family: String,
    pub coords: Vec<f64>,
    pub state: String,
    pub direction: String,
    pub delta_lambda: f64,
    pub schedule: String,
    pub t_quench: f64,
    pub substeps: usize,
    pub gamma: f64,
}

/// A measured metric estimate plus the per-run probability ledger.
#[derive(Debug, Clone)]
pub struct MeasuredMetric {
    pub metric: MetricTensor,
    pub runs: Vec<RunRecord>,
    /// Worst deviation of Σ_m |⟨ψ_m|ψ⟩|² from 1 across the runs.
    pub worst_conservation: f64,
}

/// Measure the selected metric components at `p` with the minimal set of
/// prepared states and quench runs.
///
/// Runs that share a direction reuse one propagator and one end-point bundle;
/// every (state, direction) pair executes exactly once and lands in the
/// ledger. Unselected components stay zero in the returned tensor.
pub fn measure_metric(
    spec: &ModelSpec,
    p: &ParameterPoint,
    gauge: Gauge,
    selection: &[ComponentId],
    protocol: &QuenchProtocol,
) -> Result<MeasuredMetric> {
    let bundle = ground_bundle(spec, p, gauge)?;
    let bands = bundle.degeneracy();
    let dirs = p.dim();
    for c in selection {
        if c.nu >= dirs || c.jp >= bands {
            return Err(Error::DimensionMismatch {
                context: format!("component {} out of range", c.label()),
            });
        }
    }

    // the minimal (state, direction) set the selection needs
    let mut needed: BTreeSet<(StateKind, QuenchDirection)> = BTreeSet::new();
    for c in selection {
        let single_mu = QuenchDirection::Single(c.mu);
        let single_nu = QuenchDirection::Single(c.nu);
        let states: Vec<StateKind> = if c.j == c.jp {
            vec![StateKind::Band(c.j)]
        } else {
            vec![
                StateKind::Band(c.j),
                StateKind::Band(c.jp),
                StateKind::SuperposA(c.j, c.jp),
                StateKind::SuperposB(c.j, c.jp),
            ]
        };
        for s in states {
            needed.insert((s, single_mu));
            if c.mu != c.nu {
                needed.insert((s, single_nu));
                needed.insert((s, QuenchDirection::Pair(c.mu, c.nu)));
            }
        }
    }

    // group by direction so the propagator and end bundle are built once
    let mut by_direction: BTreeMap<QuenchDirection, Vec<StateKind>> = BTreeMap::new();
    for (s, d) in &needed {
        by_direction.entry(*d).or_default().push(*s);
    }

    let mut gammas: BTreeMap<(StateKind, QuenchDirection), f64> = BTreeMap::new();
    let mut runs = Vec::with_capacity(needed.len());
    let mut worst_conservation = 0.0f64;
    for (direction, states) in &by_direction {
        let q = QuenchSpec {
            start: p.clone(),
            direction: *direction,
            delta: protocol.delta,
            schedule: protocol.schedule,
            time_unit: protocol.time_unit,
        };
        let u = propagator(spec, &q)?;
        let end = ground_bundle(spec, &q.end_point(), Gauge::EigensolverRaw)?;
        for kind in states {
            let prepared = PreparedState::new(*kind, bands)?;
            let psi0 = bundle.ground.combine(&prepared.coefficients);
            let psi = match &u {
                None => psi0,
                Some(u) => u.mul_vec(&psi0),
            };
            let result = gamma_from_state(&psi, &end, &q, *kind)?;
            worst_conservation = worst_conservation.max((result.total_probability - 1.0).abs());
            gammas.insert((*kind, *direction), result.gamma);
            runs.push(RunRecord {
                run_id: runs.len(),
                family: spec.family.name().to_string(),
                coords: p.coords.clone(),
                state: kind.label(),
                direction: direction.label(),
                delta_lambda: protocol.delta,
                schedule: protocol.schedule.name().to_string(),
                t_quench: protocol.quench_time(),
                substeps: protocol.substeps(),
                gamma: result.gamma,
            });
        }
    }

    let delta = protocol.delta;
    let gamma = |s: StateKind, d: QuenchDirection| -> f64 { gammas[&(s, d)] };
    // Γ_{μν}-class combination with Γ units: (Γ_{μν} − Γ_{μμ} − Γ_{νν})/2
    let combined = |s: StateKind, mu: usize, nu: usize| -> f64 {
        (gamma(s, QuenchDirection::Pair(mu, nu))
            - gamma(s, QuenchDirection::Single(mu))
            - gamma(s, QuenchDirection::Single(nu)))
            / 2.0
    };

    let mut metric = MetricTensor::zeros(dirs, bands);
    for c in selection {
        let value = match (c.mu == c.nu, c.j == c.jp) {
            (true, true) => C64::new(
                extract_diag(gamma(StateKind::Band(c.j), QuenchDirection::Single(c.mu)), delta),
                0.0,
            ),
            (false, true) => {
                let s = StateKind::Band(c.j);
                C64::new(
                    extract_offdiag_same_band(
                        gamma(s, QuenchDirection::Pair(c.mu, c.nu)),
                        gamma(s, QuenchDirection::Single(c.mu)),
                        gamma(s, QuenchDirection::Single(c.nu)),
                        delta,
                    ),
                    0.0,
                )
            }
            (true, false) => {
                let d = QuenchDirection::Single(c.mu);
                extract_offdiag_bands(
                    gamma(StateKind::SuperposA(c.j, c.jp), d),
                    gamma(StateKind::SuperposB(c.j, c.jp), d),
                    gamma(StateKind::Band(c.j), d),
                    gamma(StateKind::Band(c.jp), d),
                    delta,
                )
            }
            (false, false) => extract_offdiag_bands(
                combined(StateKind::SuperposA(c.j, c.jp), c.mu, c.nu),
                combined(StateKind::SuperposB(c.j, c.jp), c.mu, c.nu),
                combined(StateKind::Band(c.j), c.mu, c.nu),
                combined(StateKind::Band(c.jp), c.mu, c.nu),
                delta,
            ),
        };
        metric.set_component(c.mu, c.nu, c.j, c.jp, value);
    }

    Ok(MeasuredMetric {
        metric,
        runs,
        worst_conservation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::analytic_reference;
    use crate::models::Chart;
    use crate::numlin::norm;

    fn s2(theta: f64, phi: f64) -> ParameterPoint {
        ParameterPoint {
            chart: Chart::SphereS2,
            coords: vec![theta, phi],
        }
    }

    fn eff_spec() -> ModelSpec {
        ModelSpec::dirac3d_eff(1)
    }

    fn band(j: usize) -> PreparedState {
        PreparedState::new(StateKind::Band(j), 2).unwrap()
    }

    #[test]
    fn sudden_evolution_is_identity() {
        let spec = eff_spec();
        let p = s2(1.0, 1.0);
        let bundle = ground_bundle(&spec, &p, Gauge::Analytic).unwrap();
        let q = QuenchSpec {
            start: p,
            direction: QuenchDirection::Single(0),
            delta: 0.1,
            schedule: Schedule::Sudden,
            time_unit: TimeUnit::TwoPi,
        };
        let out = evolve(&spec, &q, &bundle, &band(0)).unwrap();
        let expect = bundle.ground.col(0);
        for (a, b) in out.iter().zip(expect) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn linear_tiny_duration_is_near_identity() {
        let spec = eff_spec();
        let p = s2(1.0, 1.0);
        let bundle = ground_bundle(&spec, &p, Gauge::Analytic).unwrap();
        let q = QuenchSpec {
            start: p,
            direction: QuenchDirection::Single(0),
            delta: PI / 100.0,
            schedule: Schedule::Linear {
                duration: 1e-6,
                substeps: 10,
            },
            time_unit: TimeUnit::TwoPi,
        };
        let out = evolve(&spec, &q, &bundle, &band(0)).unwrap();
        let dev = out
            .iter()
            .zip(bundle.ground.col(0))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev <= 1e-5, "deviation {dev}");
    }

    #[test]
    fn linear_substep_refinement() {
        let spec = eff_spec();
        let p = s2(PI / 2.0, 1.0);
        let bundle = ground_bundle(&spec, &p, Gauge::Analytic).unwrap();
        let mk = |substeps| QuenchSpec {
            start: p.clone(),
            direction: QuenchDirection::Single(0),
            delta: PI / 100.0,
            schedule: Schedule::Linear {
                duration: 0.001,
                substeps,
            },
            time_unit: TimeUnit::TwoPi,
        };
        let coarse = evolve(&spec, &mk(100), &bundle, &band(0)).unwrap();
        let fine = evolve(&spec, &mk(10_000), &bundle, &band(0)).unwrap();
        assert!((norm(&coarse) - 1.0).abs() <= 1e-12);
        let dev = coarse
            .iter()
            .zip(&fine)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev <= 1e-6, "refinement deviation {dev}");
    }

    #[test]
    fn gamma_zero_for_zero_step() {
        let spec = eff_spec();
        let p = s2(1.0, 1.0);
        let bundle = ground_bundle(&spec, &p, Gauge::Analytic).unwrap();
        let q = QuenchSpec {
            start: p,
            direction: QuenchDirection::Single(0),
            delta: 0.0,
            schedule: Schedule::Sudden,
            time_unit: TimeUnit::TwoPi,
        };
        let r = transition_probability(&spec, &q, &bundle, &band(0)).unwrap();
        assert!(r.gamma <= 1e-20);
        assert!((r.total_probability - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn gamma_matches_metric_sudden_and_linear() {
        let spec = eff_spec();
        let p = s2(PI / 2.0, PI / 4.0);
        let bundle = ground_bundle(&spec, &p, Gauge::Analytic).unwrap();
        let delta = PI / 100.0;
        let sudden = QuenchSpec {
            start: p.clone(),
            direction: QuenchDirection::Single(0),
            delta,
            schedule: Schedule::Sudden,
            time_unit: TimeUnit::TwoPi,
        };
        let expect = 0.25 * delta * delta;
        let rs = transition_probability(&spec, &sudden, &bundle, &band(0)).unwrap();
        assert!((rs.gamma - expect).abs() <= 0.05 * expect, "sudden {}", rs.gamma);
        assert!(rs.gamma >= 0.0 && rs.gamma <= 1.0 + 1e-12);

        let linear = QuenchSpec {
            schedule: Schedule::Linear {
                duration: 0.001,
                substeps: 100,
            },
            ..sudden
        };
        let rl = transition_probability(&spec, &linear, &bundle, &band(0)).unwrap();
        assert!(
            (rl.gamma - rs.gamma).abs() <= 0.05 * rs.gamma,
            "linear {} vs sudden {}",
            rl.gamma,
            rs.gamma
        );
    }

    #[test]
    fn extraction_formula_inversion() {
        let delta = PI / 100.0;
        assert!((extract_diag(2.467e-4, delta) - 0.2500).abs() < 5e-5);
        assert_eq!(extract_diag(0.0, 0.3), 0.0);
        // Γ_{μν} = Γ_{μμ} + Γ_{νν} means no off-diagonal part
        assert_eq!(extract_offdiag_same_band(0.5, 0.2, 0.3, delta), 0.0);
        // no band coherence
        let g = extract_offdiag_bands(0.25, 0.25, 0.2, 0.3, delta);
        assert!(g.norm() < 1e-15);
    }

    #[test]
    fn planted_same_band_recovery() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let delta = PI / 100.0;
        for _ in 0..20 {
            // random 2×2 PSD direction metric for one band
            let a: f64 = rng.random_range(0.1..1.0);
            let b: f64 = rng.random_range(0.1..1.0);
            let max_off = (a * b).sqrt();
            let c: f64 = rng.random_range(-max_off..max_off);
            let g_mm = a * delta * delta;
            let g_nn = b * delta * delta;
            let g_mn = (a + b + 2.0 * c) * delta * delta;
            let rec = extract_offdiag_same_band(g_mn, g_mm, g_nn, delta);
            assert!((rec - c).abs() <= 1e-12, "planted {c}, got {rec}");
        }
    }

    #[test]
    fn planted_band_offdiagonal_recovery() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let delta = PI / 80.0;
        for _ in 0..20 {
            let gjj: f64 = rng.random_range(0.1..1.0);
            let gpp: f64 = rng.random_range(0.1..1.0);
            let re: f64 = rng.random_range(-0.3..0.3);
            let im: f64 = rng.random_range(-0.3..0.3);
            let d2 = delta * delta;
            let gaa = (0.5 * (gjj + gpp) + re) * d2;
            let gbb = (0.5 * (gjj + gpp) - im) * d2;
            let rec = extract_offdiag_bands(gaa, gbb, gjj * d2, gpp * d2, delta);
            assert!((rec.re - re).abs() <= 1e-12 && (rec.im - im).abs() <= 1e-12);
        }
    }

    #[test]
    fn measure_full_selection_matches_analytic() {
        let spec = eff_spec();
        let p = s2(PI / 2.0, PI / 4.0);
        let protocol = QuenchProtocol::linear(PI / 100.0, 0.001, 100);
        let selection = all_components(2, 2);
        let measured =
            measure_metric(&spec, &p, Gauge::Analytic, &selection, &protocol).unwrap();
        // minimal run set: 4 diagonal-class, 2 same-band pair-direction,
        // 6 superposition (a and b on each of e1, e2, e1+e2)
        assert_eq!(measured.runs.len(), 12, "minimal run count");
        assert!(measured.worst_conservation <= 1e-10);
        let reference = analytic_reference(&spec, &p).unwrap();
        for mu in 0..2 {
            for nu in 0..2 {
                let dev = measured
                    .metric
                    .block(mu, nu)
                    .max_abs_diff(reference.metric.block(mu, nu));
                assert!(dev <= 2e-2, "block ({mu},{nu}) deviation {dev}");
            }
        }
    }

    #[test]
    fn measure_yang_component() {
        let spec = ModelSpec::yang_eff(1);
        let p = ParameterPoint {
            chart: Chart::SphereS4,
            coords: vec![PI / 4.0, PI / 4.0, PI, PI / 4.0],
        };
        let protocol = QuenchProtocol::linear(PI / 80.0, 0.001, 100);
        let selection = vec![ComponentId::new(2, 2, 1, 1)];
        let measured =
            measure_metric(&spec, &p, Gauge::ReferenceProjection, &selection, &protocol)
                .unwrap();
        let got = measured.metric.component(2, 2, 1, 1).re;
        let expect = 1.0 / 16.0; // sin²(π/4) sin²(π/4) / 4
        assert!((got - expect).abs() <= 2e-2, "g^22_f3f3 = {got}");
        assert_eq!(measured.runs.len(), 1);
    }

    #[test]
    fn quadratic_scaling_of_gamma() {
        let spec = eff_spec();
        let p = s2(1.2, 0.9);
        let bundle = ground_bundle(&spec, &p, Gauge::Analytic).unwrap();
        let mut ratios = Vec::new();
        for n in [400.0, 200.0, 100.0] {
            let delta = PI / n;
            let q = QuenchSpec {
                start: p.clone(),
                direction: QuenchDirection::Single(0),
                delta,
                schedule: Schedule::Sudden,
                time_unit: TimeUnit::TwoPi,
            };
            let r = transition_probability(&spec, &q, &bundle, &band(0)).unwrap();
            ratios.push((delta, r.gamma / (delta * delta)));
        }
        for i in 0..ratios.len() {
            for k in (i + 1)..ratios.len() {
                let (d1, r1) = ratios[i];
                let (d2, r2) = ratios[k];
                let rel = (r1 / r2 - 1.0).abs();
                assert!(rel <= 3.0 * d1.max(d2), "scaling violation {rel}");
            }
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let p = s2(1.0, 1.0);
        let bad = QuenchSpec {
            start: p.clone(),
            direction: QuenchDirection::Single(0),
            delta: -0.1,
            schedule: Schedule::Sudden,
            time_unit: TimeUnit::TwoPi,
        };
        assert!(bad.validate().is_err());
        let bad2 = QuenchSpec {
            delta: 0.1,
            schedule: Schedule::Linear {
                duration: 0.001,
                substeps: 0,
            },
            ..bad
        };
        assert!(bad2.validate().is_err());
        assert!(PreparedState::new(StateKind::Band(2), 2).is_err());
    }
}
