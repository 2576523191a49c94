//! Cross-module invariant suite.
//!
//! Every check is deterministic given the seed, returns a residual against an
//! explicit threshold, and never mutates shared state, so the suite can run
//! under any worker count. `quick` trims trial counts and skips the slow
//! convergence sweeps; fault injection corrupts exactly one check's input to
//! prove the report localizes failures.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chern::{
    self, real_chern_from_curvature, real_chern_from_metric, second_chern_from_curvature,
    second_chern_from_metric, sqrt_detg_vs_f_check, CurvatureSource, MetricSource, Normalization,
    SphereGrid,
};
use crate::geometry::{
    analytic_reference, curvature_from_qgt, fidelity_distance, ground_bundle, metric_from_qgt,
    qgt_fd, Gauge, DEFAULT_FD_STEP,
};
use crate::models::{
    anticommutator_check, dirac_alphas, dirac_betas, experimental_reduction_check, pauli,
    symmetry_check, Chart, ModelSpec, ParameterPoint,
};
use crate::numlin::{hermitian_eig, subspace_align, unitary_exp, C64, ComplexMatrix, Frame};
use crate::quench::{
    all_components, measure_metric, transition_probability, QuenchDirection, QuenchProtocol,
    QuenchSpec, Schedule, StateKind, TimeUnit,
};
use crate::Result;

/// Corruptions available to `validate --corrupt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultInjection {
    /// Replace α_x by σ₀⊗τ₁ in the algebra check input.
    DiracAlgebra,
}

impl FaultInjection {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "dirac-algebra" => Some(Self::DiracAlgebra),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::DiracAlgebra => "dirac-algebra",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub id: String,
    pub passed: bool,
    pub residual: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub quick: bool,
    pub fault: Option<String>,
    pub all_passed: bool,
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn failing_ids(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.id.as_str())
            .collect()
    }
}

fn outcome(id: &str, residual: f64, threshold: f64, detail: impl Into<String>) -> CheckOutcome {
    CheckOutcome {
        id: id.to_string(),
        passed: residual <= threshold,
        residual,
        threshold,
        detail: detail.into(),
    }
}

fn guarded(id: &str, f: impl FnOnce() -> Result<CheckOutcome>) -> CheckOutcome {
    match f() {
        Ok(c) => c,
        Err(e) => CheckOutcome {
            id: id.to_string(),
            passed: false,
            residual: f64::INFINITY,
            threshold: 0.0,
            detail: format!("error: {e}"),
        },
    }
}

/// Run the whole suite.
pub fn run_validation(seed: u64, quick: bool, fault: Option<FaultInjection>) -> ValidationReport {
    let mut checks = Vec::new();

    checks.push(guarded("numlin.reconstruction", || {
        numlin_reconstruction(seed, quick)
    }));
    checks.push(guarded("numlin.exp_additivity", || {
        numlin_exp_additivity(seed)
    }));
    checks.push(guarded("numlin.align_idempotent", || {
        numlin_align_idempotent(seed)
    }));
    checks.push(guarded("numlin.determinism", || numlin_determinism(seed)));
    checks.push(guarded("models.dirac_algebra", || {
        models_dirac_algebra(fault)
    }));
    checks.push(guarded("models.hermiticity_and_spectrum", || {
        models_spectrum(seed, quick)
    }));
    checks.push(guarded("models.symmetry_3d", || models_symmetry_3d(seed, quick)));
    checks.push(guarded("models.symmetry_5d", || models_symmetry_5d(seed, quick)));
    checks.push(guarded("models.experimental_reduction", || {
        models_reduction(quick)
    }));
    checks.push(guarded("geometry.bigq_psd", || geometry_bigq(seed, quick)));
    checks.push(guarded("geometry.block_symmetries", || {
        geometry_block_symmetries(seed)
    }));
    checks.push(guarded("geometry.trace_gauge_covariance", || {
        geometry_trace_covariance(seed, quick)
    }));
    checks.push(guarded("geometry.distance_quadratic", || {
        geometry_distance_quadratic(seed, quick)
    }));
    checks.push(guarded("geometry.tr_f_traceless_5d", || {
        geometry_traceless(seed, quick)
    }));
    checks.push(guarded("quench.probability_conservation", || {
        quench_conservation(seed)
    }));
    checks.push(guarded("quench.sudden_linear_consistency", || {
        quench_sudden_linear()
    }));
    checks.push(guarded("quench.quadratic_scaling", || quench_scaling()));
    checks.push(guarded("quench.oracle_agreement", || {
        quench_oracle_agreement(quick)
    }));
    checks.push(guarded("quench.gauge_consistency", || {
        quench_gauge_consistency()
    }));
    checks.push(guarded("chern.grid_refinement", || chern_refinement(quick)));
    checks.push(guarded("chern.monopole_antisymmetry", || {
        chern_antisymmetry(quick)
    }));
    checks.push(guarded("chern.gauge_invariance", || chern_gauge_invariance()));
    checks.push(guarded("chern.detg_relation", || chern_detg(seed, quick)));
    if !quick {
        checks.push(guarded("chern.error_monotonicity", chern_monotonicity));
    }

    let all_passed = checks.iter().all(|c| c.passed);
    ValidationReport {
        seed,
        quick,
        fault: fault.map(|f| f.name().to_string()),
        all_passed,
        checks,
    }
}

fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(dim);
    for r in 0..dim {
        h.set(r, r, C64::new(rng.random_range(-1.0..1.0), 0.0));
        for c in (r + 1)..dim {
            let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            h.set(r, c, z);
            h.set(c, r, z.conj());
        }
    }
    h
}

fn numlin_reconstruction(seed: u64, quick: bool) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trials = if quick { 20 } else { 100 };
    let mut worst = 0.0f64;
    for t in 0..trials {
        let dim = 2 + (t % 7);
        let h = random_hermitian(&mut rng, dim);
        let dec = hermitian_eig(&h)?;
        worst = worst.max(dec.reconstruct().max_abs_diff(&h));
    }
    Ok(outcome(
        "numlin.reconstruction",
        worst,
        1e-10,
        format!("{trials} random Hermitian matrices, dims 2..=8"),
    ))
}

fn numlin_exp_additivity(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let h = random_hermitian(&mut rng, 4);
        let (dt1, dt2) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let u12 = unitary_exp(&h, dt1)?.mul(&unitary_exp(&h, dt2)?);
        worst = worst.max(u12.max_abs_diff(&unitary_exp(&h, dt1 + dt2)?));
    }
    Ok(outcome(
        "numlin.exp_additivity",
        worst,
        1e-11,
        "U(dt1)·U(dt2) = U(dt1+dt2), 20 trials",
    ))
}

fn numlin_align_idempotent(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let h = random_hermitian(&mut rng, 6);
        let dec = hermitian_eig(&h)?;
        let reference = Frame::from_matrix_columns(&dec.eigenvectors, 0, 2);
        let rot = unitary_exp(&random_hermitian(&mut rng, 2), 0.7)?;
        let once = subspace_align(&reference.mix(&rot), &reference)?;
        let twice = subspace_align(&once, &reference)?;
        for k in 0..2 {
            for (a, b) in once.col(k).iter().zip(twice.col(k)) {
                worst = worst.max((a - b).norm());
            }
        }
    }
    Ok(outcome(
        "numlin.align_idempotent",
        worst,
        1e-12,
        "aligning an aligned basis is the identity",
    ))
}

fn numlin_determinism(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
    let h = random_hermitian(&mut rng, 6);
    let d1 = hermitian_eig(&h)?;
    let d2 = hermitian_eig(&h)?;
    let same_eig = d1.eigenvalues == d2.eigenvalues && d1.eigenvectors == d2.eigenvectors;

    let spec = ModelSpec::dirac3d_eff(1);
    let p = ParameterPoint {
        chart: Chart::SphereS2,
        coords: vec![1.1, 0.8],
    };
    let protocol = QuenchProtocol::linear(PI / 100.0, 0.001, 50);
    let sel = all_components(2, 2);
    let m1 = measure_metric(&spec, &p, Gauge::Analytic, &sel, &protocol)?;
    let m2 = measure_metric(&spec, &p, Gauge::Analytic, &sel, &protocol)?;
    let same_runs = m1
        .runs
        .iter()
        .zip(&m2.runs)
        .all(|(a, b)| a.gamma.to_bits() == b.gamma.to_bits());

    let residual = if same_eig && same_runs { 0.0 } else { 1.0 };
    Ok(outcome(
        "numlin.determinism",
        residual,
        0.0,
        "identical input bits give identical output bits",
    ))
}

fn models_dirac_algebra(fault: Option<FaultInjection>) -> Result<CheckOutcome> {
    let mut alphas = dirac_alphas().to_vec();
    if fault == Some(FaultInjection::DiracAlgebra) {
        alphas[0] = pauli(0).kron(&pauli(1));
    }
    let r3 = anticommutator_check(&alphas);
    let r5 = anticommutator_check(&dirac_betas());
    let residual = r3.max_residual.max(r5.max_residual);
    Ok(outcome(
        "models.dirac_algebra",
        residual,
        0.0,
        format!(
            "anticommutators, 3D residual {:.1e}, 5D residual {:.1e}",
            r3.max_residual, r5.max_residual
        ),
    ))
}

fn lattice_specs() -> Vec<ModelSpec> {
    vec![
        ModelSpec::dirac3d_lattice(2.0),
        ModelSpec::yang5d_lattice(4.0),
        ModelSpec::lattice_4d(),
    ]
}

fn models_spectrum(seed: u64, quick: bool) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(4));
    let trials = if quick { 5 } else { 10 };
    let mut worst_spec = 0.0f64;
    let mut worst_herm = 0.0f64;
    for spec in lattice_specs() {
        for _ in 0..trials {
            let k: Vec<f64> = (0..spec.family.param_dim())
                .map(|_| rng.random_range(-PI..PI))
                .collect();
            let p = ParameterPoint::cartesian(k)?;
            let h = spec.hamiltonian(&p)?;
            worst_herm = worst_herm.max(h.hermiticity_residual());
            let radius = spec.gap_radius(&p)?;
            let dec = hermitian_eig(&h)?;
            for (e, x) in dec.eigenvalues.iter().zip([-radius, -radius, radius, radius]) {
                worst_spec = worst_spec.max((e - x).abs() / (1.0 + radius));
            }
        }
    }
    Ok(outcome(
        "models.hermiticity_and_spectrum",
        worst_spec.max(worst_herm),
        1e-10,
        "spectrum is {−|d|,−|d|,+|d|,+|d|} and H = H†",
    ))
}

fn models_symmetry_3d(seed: u64, quick: bool) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(5));
    let spec = ModelSpec::dirac3d_lattice(2.0);
    let trials = if quick { 10 } else { 50 };
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let k: Vec<f64> = (0..3).map(|_| rng.random_range(-PI..PI)).collect();
        let report = symmetry_check(&spec, &ParameterPoint::cartesian(k)?)?;
        worst = worst.max(report.max_residual);
    }
    Ok(outcome(
        "models.symmetry_3d",
        worst,
        1e-12,
        "P, T, PT relations of the 3D lattice model",
    ))
}

fn models_symmetry_5d(seed: u64, quick: bool) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(6));
    let trials = if quick { 10 } else { 20 };
    let mut worst = 0.0f64;
    for spec in [ModelSpec::yang5d_lattice(4.0), ModelSpec::lattice_4d()] {
        for _ in 0..trials {
            let k: Vec<f64> = (0..spec.family.param_dim())
                .map(|_| rng.random_range(-PI..PI))
                .collect();
            let report = symmetry_check(&spec, &ParameterPoint::cartesian(k)?)?;
            worst = worst.max(report.max_residual);
        }
    }
    Ok(outcome(
        "models.symmetry_5d",
        worst,
        1e-12,
        "pointwise antiunitary symmetry of the 5D models",
    ))
}

fn models_reduction(quick: bool) -> Result<CheckOutcome> {
    let n = if quick { 5 } else { 10 };
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let theta = (i as f64 + 0.5) * PI / n as f64;
            let phi = (j as f64 + 0.5) * 2.0 * PI / n as f64;
            for sign in [1, -1] {
                worst = worst.max(experimental_reduction_check(theta, phi, sign)?);
            }
        }
    }
    Ok(outcome(
        "models.experimental_reduction",
        worst,
        1e-13,
        format!("four-level mapping vs Dirac form on a {n}×{n} angle grid"),
    ))
}

fn interior_s2(rng: &mut ChaCha8Rng) -> ParameterPoint {
    ParameterPoint {
        chart: Chart::SphereS2,
        coords: vec![
            rng.random_range(0.3..PI - 0.3),
            rng.random_range(0.3..2.0 * PI - 0.3),
        ],
    }
}

fn interior_s4(rng: &mut ChaCha8Rng) -> ParameterPoint {
    ParameterPoint {
        chart: Chart::SphereS4,
        coords: vec![
            rng.random_range(0.3..PI - 0.3),
            rng.random_range(0.3..PI - 0.3),
            rng.random_range(0.3..PI - 0.3),
            rng.random_range(0.3..2.0 * PI - 0.3),
        ],
    }
}

fn geometry_bigq(seed: u64, quick: bool) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(7));
    let mut worst = 0.0f64;
    let n2 = if quick { 2 } else { 5 };
    for _ in 0..n2 {
        let q = qgt_fd(
            &ModelSpec::dirac3d_eff(1),
            &interior_s2(&mut rng),
            Gauge::Analytic,
            DEFAULT_FD_STEP,
        )?;
        let eigs = hermitian_eig(&q.big_matrix())?.eigenvalues;
        worst = worst.max((-eigs[0]).max(0.0));
    }
    let n4 = if quick { 1 } else { 3 };
    for _ in 0..n4 {
        let q = qgt_fd(
            &ModelSpec::yang_eff(1),
            &interior_s4(&mut rng),
            Gauge::ReferenceProjection,
            DEFAULT_FD_STEP,
        )?;
        let eigs = hermitian_eig(&q.big_matrix())?.eigenvalues;
        worst = worst.max((-eigs[0]).max(0.0));
    }
    Ok(outcome(
        "geometry.bigq_psd",
        worst,
        1e-8,
        "assembled DN×DN tensor is positive semidefinite",
    ))
}

fn geometry_block_symmetries(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(8));
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let q = qgt_fd(
            &ModelSpec::yang_eff(1),
            &interior_s4(&mut rng),
            Gauge::ReferenceProjection,
            DEFAULT_FD_STEP,
        )?;
        let g = metric_from_qgt(&q);
        let f = curvature_from_qgt(&q);
        worst = worst
            .max(g.max_hermiticity_residual())
            .max(g.max_direction_asymmetry())
            .max(f.max_hermiticity_residual())
            .max(f.max_direction_symmetry());
    }
    Ok(outcome(
        "geometry.block_symmetries",
        worst,
        1e-10,
        "g = g† = gᵀ(directions), F = F† = −Fᵀ(directions)",
    ))
}

fn geometry_trace_covariance(seed: u64, quick: bool) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(9));
    let spec = ModelSpec::dirac3d_eff(1);
    let trials = if quick { 5 } else { 20 };
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let p = interior_s2(&mut rng);
        let qa = qgt_fd(&spec, &p, Gauge::Analytic, DEFAULT_FD_STEP)?;
        let qr = qgt_fd(&spec, &p, Gauge::ReferenceProjection, DEFAULT_FD_STEP)?;
        let (ga, gr) = (metric_from_qgt(&qa), metric_from_qgt(&qr));
        let (fa, fr) = (curvature_from_qgt(&qa), curvature_from_qgt(&qr));
        for mu in 0..2 {
            for nu in 0..2 {
                worst = worst
                    .max((ga.block(mu, nu).trace() - gr.block(mu, nu).trace()).norm())
                    .max((fa.block(mu, nu).trace() - fr.block(mu, nu).trace()).norm());
            }
        }
        let det = |g: &crate::geometry::MetricTensor, band| {
            let m = g.band_subblock(band, 0, 1);
            m[0][0] * m[1][1] - m[0][1] * m[1][0]
        };
        worst = worst.max((det(&ga, 0) - det(&gr, 0)).abs());
        worst = worst.max((det(&ga, 1) - det(&gr, 1)).abs());
        let ff = |f: &crate::geometry::CurvatureTensor| {
            f.block(0, 1).mul(f.block(0, 1)).trace().re
        };
        worst = worst.max((ff(&fa) - ff(&fr)).abs());
    }
    Ok(outcome(
        "geometry.trace_gauge_covariance",
        worst,
        1e-8,
        "traces, determinants, and invariants agree across gauges",
    ))
}

fn geometry_distance_quadratic(seed: u64, quick: bool) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(10));
    let spec = ModelSpec::dirac3d_eff(1);
    let draws = if quick { 5 } else { 20 };
    let mut worst_margin = 0.0f64;
    for _ in 0..draws {
        let p = interior_s2(&mut rng);
        // random normalized coefficients and direction
        let raw = [
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        ];
        let nrm = (raw[0].norm_sqr() + raw[1].norm_sqr()).sqrt();
        let c = [raw[0] / nrm, raw[1] / nrm];
        let ang: f64 = rng.random_range(0.0..2.0 * PI);
        let u = [ang.cos(), ang.sin()];
        let reference = analytic_reference(&spec, &p)?;
        let mut quad = 0.0;
        for mu in 0..2 {
            for nu in 0..2 {
                let mut cblock = C64::new(0.0, 0.0);
                for j in 0..2 {
                    for k in 0..2 {
                        cblock += c[j].conj() * reference.metric.component(mu, nu, j, k) * c[k];
                    }
                }
                quad += cblock.re * u[mu] * u[nu];
            }
        }
        for dl in [1e-2, 1e-3, 1e-4] {
            let ds = fidelity_distance(
                &spec,
                &p,
                Gauge::Analytic,
                &c,
                &[u[0] * dl, u[1] * dl],
            )?;
            let ratio = ds / (quad * dl * dl);
            worst_margin = worst_margin.max((ratio - 1.0).abs() / (3.0 * dl));
        }
    }
    Ok(outcome(
        "geometry.distance_quadratic",
        worst_margin,
        1.0,
        "infidelity / quadratic form → 1 within 3·dλ",
    ))
}

fn geometry_traceless(seed: u64, quick: bool) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(11));
    let spec = ModelSpec::yang_eff(1);
    let trials = if quick { 2 } else { 5 };
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let q = qgt_fd(
            &spec,
            &interior_s4(&mut rng),
            Gauge::ReferenceProjection,
            DEFAULT_FD_STEP,
        )?;
        let f = curvature_from_qgt(&q);
        for mu in 0..4 {
            for nu in 0..4 {
                worst = worst.max(f.block(mu, nu).trace().norm());
            }
        }
    }
    Ok(outcome(
        "geometry.tr_f_traceless_5d",
        worst,
        1e-8,
        "tr F_{φiφj} vanishes on the 5D model",
    ))
}

fn quench_conservation(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(12));
    let mut worst = 0.0f64;
    let protocol = QuenchProtocol::linear(PI / 100.0, 0.001, 100);
    for _ in 0..3 {
        let p = interior_s2(&mut rng);
        let m = measure_metric(
            &ModelSpec::dirac3d_eff(1),
            &p,
            Gauge::Analytic,
            &all_components(2, 2),
            &protocol,
        )?;
        worst = worst.max(m.worst_conservation);
    }
    let p4 = interior_s4(&mut rng);
    let m4 = measure_metric(
        &ModelSpec::yang_eff(1),
        &p4,
        Gauge::ReferenceProjection,
        &all_components(4, 2),
        &QuenchProtocol::linear(PI / 80.0, 0.001, 100),
    )?;
    worst = worst.max(m4.worst_conservation);
    Ok(outcome(
        "quench.probability_conservation",
        worst,
        1e-10,
        "Σ_m |⟨ψ_m|ψ⟩|² = 1 over every executed run",
    ))
}

fn quench_sudden_linear() -> Result<CheckOutcome> {
    let spec = ModelSpec::dirac3d_eff(1);
    let mut worst = 0.0f64;
    for (theta, phi) in [(PI / 2.0, PI / 4.0), (1.1, 2.3), (2.2, 5.0)] {
        let p = ParameterPoint {
            chart: Chart::SphereS2,
            coords: vec![theta, phi],
        };
        let bundle = ground_bundle(&spec, &p, Gauge::Analytic)?;
        let mk = |schedule| QuenchSpec {
            start: p.clone(),
            direction: QuenchDirection::Single(0),
            delta: PI / 100.0,
            schedule,
            time_unit: TimeUnit::TwoPi,
        };
        let state = crate::quench::PreparedState::new(StateKind::Band(0), 2)?;
        let sudden = transition_probability(&spec, &mk(Schedule::Sudden), &bundle, &state)?;
        let linear = transition_probability(
            &spec,
            &mk(Schedule::Linear {
                duration: 0.001,
                substeps: 100,
            }),
            &bundle,
            &state,
        )?;
        worst = worst.max((linear.gamma - sudden.gamma).abs() / sudden.gamma);
    }
    Ok(outcome(
        "quench.sudden_linear_consistency",
        worst,
        5e-2,
        "linear ramp at T = 0.001 sits in the sudden regime",
    ))
}

fn quench_scaling() -> Result<CheckOutcome> {
    let spec = ModelSpec::dirac3d_eff(1);
    let p = ParameterPoint {
        chart: Chart::SphereS2,
        coords: vec![1.2, 0.9],
    };
    let bundle = ground_bundle(&spec, &p, Gauge::Analytic)?;
    let state = crate::quench::PreparedState::new(StateKind::Band(0), 2)?;
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
        let r = transition_probability(&spec, &q, &bundle, &state)?;
        ratios.push((delta, r.gamma / (delta * delta)));
    }
    let mut worst_margin = 0.0f64;
    for i in 0..ratios.len() {
        for k in (i + 1)..ratios.len() {
            let (d1, r1) = ratios[i];
            let (d2, r2) = ratios[k];
            worst_margin = worst_margin.max((r1 / r2 - 1.0).abs() / (3.0 * d1.max(d2)));
        }
    }
    Ok(outcome(
        "quench.quadratic_scaling",
        worst_margin,
        1.0,
        "Γ/δλ² constant within 3·δλ across δλ ∈ {π/400, π/200, π/100}",
    ))
}

fn quench_oracle_agreement(quick: bool) -> Result<CheckOutcome> {
    struct Case {
        spec: ModelSpec,
        gauge: Gauge,
        delta: f64,
        points: Vec<ParameterPoint>,
    }
    let s2 = |theta: f64, phi: f64| ParameterPoint {
        chart: Chart::SphereS2,
        coords: vec![theta, phi],
    };
    let s4 = |c: [f64; 4]| ParameterPoint {
        chart: Chart::SphereS4,
        coords: c.to_vec(),
    };
    let k4 = |c: [f64; 4]| ParameterPoint {
        chart: Chart::CartesianMomentum,
        coords: c.to_vec(),
    };
    let mut cases = vec![
        Case {
            spec: ModelSpec::dirac3d_eff(1),
            gauge: Gauge::Analytic,
            delta: PI / 100.0,
            points: if quick {
                vec![s2(1.5, PI / 4.0)]
            } else {
                vec![s2(0.6, PI / 4.0), s2(1.5, PI / 4.0), s2(2.5, PI / 4.0)]
            },
        },
        Case {
            spec: ModelSpec::yang_eff(1),
            gauge: Gauge::ReferenceProjection,
            delta: PI / 80.0,
            points: if quick {
                vec![s4([0.8, PI / 4.0, 2.9, PI / 4.0])]
            } else {
                vec![
                    s4([0.8, PI / 4.0, 2.9, PI / 4.0]),
                    s4([PI / 4.0, PI / 4.0, 2.0, PI / 4.0]),
                ]
            },
        },
        Case {
            spec: ModelSpec::lattice_4d(),
            gauge: Gauge::ReferenceProjection,
            delta: PI / 80.0,
            points: if quick {
                vec![k4([1.0, PI / 2.0, PI / 2.0, PI])]
            } else {
                vec![
                    k4([1.0, PI / 2.0, PI / 2.0, PI]),
                    k4([0.0, PI / 2.0, 1.2, PI / 2.0]),
                    k4([PI / 2.0, PI / 2.0, PI / 4.0, 2.0]),
                ]
            },
        },
    ];
    let mut worst_margin = 0.0f64;
    for case in cases.drain(..) {
        let dirs = case.spec.family.param_dim();
        let selection = all_components(dirs, 2);
        let protocol = QuenchProtocol::linear(case.delta, 0.001, 100);
        for p in &case.points {
            let measured = measure_metric(&case.spec, p, case.gauge, &selection, &protocol)?;
            let oracle = metric_from_qgt(&qgt_fd(&case.spec, p, case.gauge, DEFAULT_FD_STEP)?);
            for c in &selection {
                let m = measured.metric.component(c.mu, c.nu, c.j, c.jp);
                let o = oracle.component(c.mu, c.nu, c.j, c.jp);
                let allowed = (5e-2 * o.norm()).max(2e-2);
                worst_margin = worst_margin.max((m - o).norm() / allowed);
            }
        }
    }
    Ok(outcome(
        "quench.oracle_agreement",
        worst_margin,
        1.0,
        "every extracted component within max(2e-2, 5%·|oracle|) of the oracle",
    ))
}

fn quench_gauge_consistency() -> Result<CheckOutcome> {
    let spec = ModelSpec::dirac3d_eff(1);
    let p = ParameterPoint {
        chart: Chart::SphereS2,
        coords: vec![1.3, 2.0],
    };
    let protocol = QuenchProtocol::linear(PI / 100.0, 0.001, 100);
    let sel = all_components(2, 2);
    let ma = measure_metric(&spec, &p, Gauge::Analytic, &sel, &protocol)?;
    let mr = measure_metric(&spec, &p, Gauge::ReferenceProjection, &sel, &protocol)?;
    let mut worst = 0.0f64;
    for mu in 0..2 {
        for nu in 0..2 {
            let ta = ma.metric.block(mu, nu).trace();
            let tr = mr.metric.block(mu, nu).trace();
            worst = worst.max((ta - tr).norm());
        }
    }
    Ok(outcome(
        "quench.gauge_consistency",
        worst,
        1e-8,
        "band-traced measured metric is gauge independent",
    ))
}

fn chern_refinement(quick: bool) -> Result<CheckOutcome> {
    let spec3 = ModelSpec::dirac3d_eff(1);
    let g2 = SphereGrid::s2(100, 100);
    let a = real_chern_from_curvature(&spec3, CurvatureSource::Analytic, &g2)?;
    let b = real_chern_from_curvature(&spec3, CurvatureSource::Analytic, &g2.refined())?;
    let mut worst = (a.value - b.value).abs();

    // the S⁴ refinement doubles the default oracle grid; full mode only
    if !quick {
        let spec5 = ModelSpec::yang_eff(1);
        let g4 = SphereGrid::s4(chern::DEFAULT_S4_ORACLE);
        let c = second_chern_from_curvature(&spec5, CurvatureSource::Analytic, &g4)?;
        let d = second_chern_from_curvature(&spec5, CurvatureSource::Analytic, &g4.refined())?;
        worst = worst.max((c.value - d.value).abs());
    }
    Ok(outcome(
        "chern.grid_refinement",
        worst,
        1e-3,
        "doubling every cell count moves oracle values by < 1e-3",
    ))
}

fn chern_antisymmetry(quick: bool) -> Result<CheckOutcome> {
    let g2 = SphereGrid::s2(100, 100);
    let rp = real_chern_from_curvature(&ModelSpec::dirac3d_eff(1), CurvatureSource::Analytic, &g2)?;
    let rm =
        real_chern_from_curvature(&ModelSpec::dirac3d_eff(-1), CurvatureSource::Analytic, &g2)?;
    let mut worst = (rp.value + rm.value).abs();

    let g4 = if quick {
        SphereGrid::s4([10, 10, 10, 20])
    } else {
        SphereGrid::s4([12, 12, 12, 24])
    };
    let cp = second_chern_from_curvature(&ModelSpec::yang_eff(1), CurvatureSource::Analytic, &g4)?;
    let cm = second_chern_from_curvature(&ModelSpec::yang_eff(-1), CurvatureSource::Analytic, &g4)?;
    worst = worst.max((cp.value + cm.value).abs());
    Ok(outcome(
        "chern.monopole_antisymmetry",
        worst,
        1e-3,
        "C(+ monopole) = −C(− monopole) in oracle mode",
    ))
}

fn chern_gauge_invariance() -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    let spec3 = ModelSpec::dirac3d_eff(1);
    let g2 = SphereGrid::s2(20, 20);
    let fd = |gauge| CurvatureSource::FiniteDifference {
        gauge,
        step: DEFAULT_FD_STEP,
    };
    let met = |gauge| MetricSource::FiniteDifference {
        gauge,
        step: DEFAULT_FD_STEP,
    };
    let rc_a = real_chern_from_curvature(&spec3, fd(Gauge::Analytic), &g2)?;
    let rc_r = real_chern_from_curvature(&spec3, fd(Gauge::ReferenceProjection), &g2)?;
    worst = worst.max((rc_a.value - rc_r.value).abs());
    let rm_a = real_chern_from_metric(&spec3, &met(Gauge::Analytic), &g2)?;
    let rm_r = real_chern_from_metric(&spec3, &met(Gauge::ReferenceProjection), &g2)?;
    worst = worst.max((rm_a.value - rm_r.value).abs());

    let spec5 = ModelSpec::yang_eff(1);
    let g4 = SphereGrid::s4([4, 4, 4, 4]);
    let sc_r = second_chern_from_curvature(&spec5, fd(Gauge::ReferenceProjection), &g4)?;
    let sc_e = second_chern_from_curvature(&spec5, fd(Gauge::EigensolverRaw), &g4)?;
    worst = worst.max((sc_r.value - sc_e.value).abs());
    let sm_r = second_chern_from_metric(
        &spec5,
        &met(Gauge::ReferenceProjection),
        &g4,
        Normalization::OracleCalibrated,
    )?;
    let sm_e = second_chern_from_metric(
        &spec5,
        &met(Gauge::EigensolverRaw),
        &g4,
        Normalization::OracleCalibrated,
    )?;
    worst = worst.max((sm_r.value - sm_e.value).abs());
    Ok(outcome(
        "chern.gauge_invariance",
        worst,
        1e-6,
        "all four pipelines are independent of the gauge choice",
    ))
}

fn chern_detg(seed: u64, quick: bool) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(13));
    let spec = ModelSpec::yang_eff(1);
    let n = if quick { 10 } else { 100 };
    let points: Vec<ParameterPoint> = (0..n).map(|_| interior_s4(&mut rng)).collect();
    let report = sqrt_detg_vs_f_check(&spec, Gauge::ReferenceProjection, DEFAULT_FD_STEP, &points)?;
    let mut worst = report.ratio_spread / 1e-6;
    if !report.sign_constant {
        worst = worst.max(2.0);
    }

    // the calibrated metric pipeline must land on the curvature pipeline
    let grid = if quick {
        SphereGrid::s4([6, 6, 6, 6])
    } else {
        SphereGrid::s4([8, 8, 8, 8])
    };
    let curv = second_chern_from_curvature(&spec, CurvatureSource::Analytic, &grid)?;
    let metr = second_chern_from_metric(
        &spec,
        &MetricSource::FiniteDifference {
            gauge: Gauge::ReferenceProjection,
            step: DEFAULT_FD_STEP,
        },
        &grid,
        Normalization::OracleCalibrated,
    )?;
    worst = worst.max((metr.value - curv.value).abs() / 2e-2);
    Ok(outcome(
        "chern.detg_relation",
        worst,
        1.0,
        format!(
            "|𝓕|/√detG = {:.6} (spread {:.2e}), sign {}, calibrated C₂ matches curvature",
            report.mean_ratio, report.ratio_spread, report.sign
        ),
    ))
}

fn chern_monotonicity() -> Result<CheckOutcome> {
    let spec = ModelSpec::dirac3d_eff(1);
    let grid = SphereGrid::s2(chern::DEFAULT_S2_QUENCH[0], chern::DEFAULT_S2_QUENCH[1]);
    let run = |delta: f64, t: f64| -> Result<f64> {
        let source = MetricSource::Quench {
            gauge: Gauge::Analytic,
            protocol: QuenchProtocol::linear(delta, t, 100),
        };
        Ok(real_chern_from_metric(&spec, &source, &grid)?.value)
    };
    let mut worst: f64 = 0.0;
    let t_errors: Vec<f64> = [0.05, 0.01, 0.001]
        .iter()
        .map(|&t| run(PI / 100.0, t).map(|v| (v - 1.0).abs()))
        .collect::<Result<_>>()?;
    for w in t_errors.windows(2) {
        worst = worst.max(w[1] - w[0]);
    }
    let d_errors: Vec<f64> = [PI / 20.0, PI / 50.0, PI / 100.0]
        .iter()
        .map(|&d| run(d, 0.001).map(|v| (v - 1.0).abs()))
        .collect::<Result<_>>()?;
    for w in d_errors.windows(2) {
        worst = worst.max(w[1] - w[0]);
    }
    Ok(outcome(
        "chern.error_monotonicity",
        worst.max(0.0),
        1e-12,
        format!("|C_R−1| over T sweep {t_errors:?} and δλ sweep {d_errors:?}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let report = run_validation(7, true, None);
        for c in &report.checks {
            assert!(
                c.passed,
                "check {} failed: residual {:.3e} > {:.3e} ({})",
                c.id, c.residual, c.threshold, c.detail
            );
        }
        assert!(report.all_passed);
    }

    #[test]
    fn fault_injection_localizes() {
        let report = run_validation(7, true, Some(FaultInjection::DiracAlgebra));
        assert!(!report.all_passed);
        assert_eq!(report.failing_ids(), vec!["models.dirac_algebra"]);
    }
}
