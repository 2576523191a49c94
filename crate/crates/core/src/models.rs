//! Parameterized four-band Hamiltonian families.
//!
//! Two lattice Dirac models (3D and 5D momentum space), their low-energy
//! effective monopole Hamiltonians on the unit S²/S⁴ spheres, a 4D subsystem
//! obtained by freezing one momentum of the 5D model, and a four-level
//! experimental Hamiltonian together with the parameter mapping that reduces
//! it to the Dirac form. Every built-in family has a two-fold degenerate
//! ground pair at every gapped point.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::numlin::{C64, ComplexMatrix, ONE, ZERO};
use crate::{Error, Result};

/// σ₀, σ₁, σ₂, σ₃.
pub fn pauli(index: usize) -> ComplexMatrix {
    match index {
        0 => ComplexMatrix::identity(2),
        1 => ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]),
        2 => ComplexMatrix::from_rows(&[
            vec![ZERO, C64::new(0.0, -1.0)],
            vec![C64::new(0.0, 1.0), ZERO],
        ]),
        3 => ComplexMatrix::from_rows(&[vec![ONE, ZERO], vec![ZERO, -ONE]]),
        _ => panic!("pauli index {index} out of range"),
    }
}

/// The 3D Dirac matrices: α_x = σ₃⊗τ₁, α_y = −σ₁⊗τ₁, α_z = −σ₀⊗τ₃.
pub fn dirac_alphas() -> [ComplexMatrix; 3] {
    [
        pauli(3).kron(&pauli(1)),
        pauli(1).kron(&pauli(1)).scale(-ONE),
        pauli(0).kron(&pauli(3)).scale(-ONE),
    ]
}

/// The 5D Dirac matrices β₁..β₅.
pub fn dirac_betas() -> [ComplexMatrix; 5] {
    [
        pauli(0).kron(&pauli(3)),
        pauli(0).kron(&pauli(1)),
        pauli(3).kron(&pauli(2)).scale(-ONE),
        pauli(2).kron(&pauli(2)),
        pauli(1).kron(&pauli(2)),
    ]
}

/// Coordinate chart of a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    CartesianMomentum,
    SphereS2,
    SphereS4,
}

impl Chart {
    pub fn name(self) -> &'static str {
        match self {
            Chart::CartesianMomentum => "cartesian-momentum",
            Chart::SphereS2 => "sphere-S2",
            Chart::SphereS4 => "sphere-S4",
        }
    }
}

/// A point in parameter space, tagged with its chart.
///
/// Sphere constructors enforce the coordinate ranges θ, φ₁..φ₃ ∈ (0, π] and
/// φ, φ₄ ∈ (0, 2π]; out-of-range input is rejected unless the caller asks for
/// wrapping explicitly. [`ParameterPoint::displaced`] skips revalidation: the
/// sphere embeddings extend smoothly, and quench/stencil end points may step
/// marginally outside the chart box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterPoint {
    pub chart: Chart,
    pub coords: Vec<f64>,
}

impl ParameterPoint {
    pub fn cartesian(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            chart: Chart::CartesianMomentum,
            coords,
        })
    }

    pub fn sphere_s2(theta: f64, phi: f64) -> Result<Self> {
        check_range(0, theta, PI)?;
        check_range(1, phi, 2.0 * PI)?;
        Ok(Self {
            chart: Chart::SphereS2,
            coords: vec![theta, phi],
        })
    }

    pub fn sphere_s4(phis: [f64; 4]) -> Result<Self> {
        for (i, &p) in phis.iter().enumerate() {
            let high = if i == 3 { 2.0 * PI } else { PI };
            check_range(i, p, high)?;
        }
        Ok(Self {
            chart: Chart::SphereS4,
            coords: phis.to_vec(),
        })
    }

    /// Wrap out-of-range sphere coordinates back into their ranges
    /// (polar angles reflect at the poles, azimuthal angles wrap mod 2π).
    pub fn sphere_wrapped(chart: Chart, coords: &[f64]) -> Result<Self> {
        let dim = match chart {
            Chart::SphereS2 => 2,
            Chart::SphereS4 => 4,
            Chart::CartesianMomentum => {
                return Self::cartesian(coords.to_vec());
            }
        };
        if coords.len() != dim {
            return Err(Error::DimensionMismatch {
                context: format!("{} expects {dim} coordinates", chart.name()),
            });
        }
        let wrapped: Vec<f64> = coords
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let azimuthal = i == dim - 1;
                if azimuthal {
                    let mut v = c.rem_euclid(2.0 * PI);
                    if v == 0.0 {
                        v = 2.0 * PI;
                    }
                    v
                } else {
                    // reflect into (0, π]
                    let period = 2.0 * PI;
                    let mut v = c.rem_euclid(period);
                    if v > PI {
                        v = period - v;
                    }
                    if v == 0.0 {
                        v = PI;
                    }
                    v
                }
            })
            .collect();
        Ok(Self {
            chart,
            coords: wrapped,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Step `amount` along coordinate axis `axis`, without range revalidation.
    pub fn displaced(&self, axis: usize, amount: f64) -> Self {
        let mut coords = self.coords.clone();
        coords[axis] += amount;
        Self {
            chart: self.chart,
            coords,
        }
    }

    /// Step by an arbitrary displacement vector, without range revalidation.
    pub fn displaced_by(&self, delta: &[f64]) -> Self {
        assert_eq!(delta.len(), self.coords.len());
        let coords = self
            .coords
            .iter()
            .zip(delta)
            .map(|(c, d)| c + d)
            .collect();
        Self {
            chart: self.chart,
            coords,
        }
    }

    /// The point representing −k (or −q on sphere charts).
    pub fn negated(&self) -> Self {
        let coords = match self.chart {
            Chart::CartesianMomentum => self.coords.iter().map(|c| -c).collect(),
            Chart::SphereS2 => vec![PI - self.coords[0], self.coords[1] + PI],
            Chart::SphereS4 => vec![
                PI - self.coords[0],
                PI - self.coords[1],
                PI - self.coords[2],
                self.coords[3] + PI,
            ],
        };
        Self {
            chart: self.chart,
            coords,
        }
    }
}

fn check_range(index: usize, value: f64, high: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite);
    }
    if value <= 0.0 || value > high {
        return Err(Error::CoordinateRange {
            index,
            value,
            low: 0.0,
            high,
        });
    }
    Ok(())
}

/// Built-in Hamiltonian families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Dirac3dLattice,
    Dirac3dEff,
    Yang5dLattice,
    YangEff,
    #[serde(rename = "lattice-4d")]
    Lattice4d,
    #[serde(rename = "experimental-4level")]
    Experimental4level,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Dirac3dLattice => "dirac3d-lattice",
            Family::Dirac3dEff => "dirac3d-eff",
            Family::Yang5dLattice => "yang5d-lattice",
            Family::YangEff => "yang-eff",
            Family::Lattice4d => "lattice-4d",
            Family::Experimental4level => "experimental-4level",
        }
    }

    pub fn chart(self) -> Chart {
        match self {
            Family::Dirac3dLattice | Family::Yang5dLattice | Family::Lattice4d => {
                Chart::CartesianMomentum
            }
            Family::Dirac3dEff | Family::Experimental4level => Chart::SphereS2,
            Family::YangEff => Chart::SphereS4,
        }
    }

    pub fn param_dim(self) -> usize {
        match self {
            Family::Dirac3dLattice => 3,
            Family::Dirac3dEff | Family::Experimental4level => 2,
            Family::Yang5dLattice => 5,
            Family::YangEff | Family::Lattice4d => 4,
        }
    }

    pub fn is_3d(self) -> bool {
        matches!(
            self,
            Family::Dirac3dLattice | Family::Dirac3dEff | Family::Experimental4level
        )
    }
}

/// A fully specified model: family plus its fixed parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    /// Zeeman strength m_z (3D) or m̃_z (5D); unused by sphere families.
    #[serde(default)]
    pub mass: f64,
    /// Monopole selector: +1 for K₊, −1 for K₋ effective Hamiltonians.
    #[serde(default = "default_sign")]
    pub sign: i8,
    /// Frozen fifth momentum for the 4D subsystem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frozen: Option<f64>,
    /// Ground-state degeneracy (2 for every built-in family).
    #[serde(default = "default_degeneracy")]
    pub degeneracy: usize,
}

fn default_sign() -> i8 {
    1
}

fn default_degeneracy() -> usize {
    2
}

impl ModelSpec {
    pub fn dirac3d_lattice(mass: f64) -> Self {
        Self {
            family: Family::Dirac3dLattice,
            mass,
            sign: 1,
            frozen: None,
            degeneracy: 2,
        }
    }

    pub fn dirac3d_eff(sign: i8) -> Self {
        Self {
            family: Family::Dirac3dEff,
            mass: 0.0,
            sign,
            frozen: None,
            degeneracy: 2,
        }
    }

    pub fn yang5d_lattice(mass: f64) -> Self {
        Self {
            family: Family::Yang5dLattice,
            mass,
            sign: 1,
            frozen: None,
            degeneracy: 2,
        }
    }

    pub fn yang_eff(sign: i8) -> Self {
        Self {
            family: Family::YangEff,
            mass: 0.0,
            sign,
            frozen: None,
            degeneracy: 2,
        }
    }

    /// The 4D topological-insulator subsystem: 5D lattice with m̃_z = 1 and
    /// k_v frozen at π/2.
    pub fn lattice_4d() -> Self {
        Self {
            family: Family::Lattice4d,
            mass: 1.0,
            sign: 1,
            frozen: Some(PI / 2.0),
            degeneracy: 2,
        }
    }

    pub fn experimental_4level(sign: i8) -> Self {
        Self {
            family: Family::Experimental4level,
            mass: 0.0,
            sign,
            frozen: None,
            degeneracy: 2,
        }
    }

    pub fn check_point(&self, p: &ParameterPoint) -> Result<()> {
        let expected = self.family.chart();
        let expected_dim = self.family.param_dim();
        if p.chart != expected || p.dim() != expected_dim {
            return Err(Error::ChartMismatch {
                expected: expected.name().into(),
                expected_dim,
                got: p.chart.name().into(),
                got_dim: p.dim(),
            });
        }
        Ok(())
    }

    /// Enforce the topological mass window for lattice families; sphere
    /// families always pass.
    pub fn check_mass_window(&self) -> Result<()> {
        let window = match self.family {
            Family::Dirac3dLattice => Some((0.0, 3.0)),
            Family::Yang5dLattice | Family::Lattice4d => Some((0.0, 5.0)),
            _ => None,
        };
        if let Some((low, high)) = window {
            if self.mass <= low || self.mass >= high {
                return Err(Error::MassWindow {
                    mass: self.mass,
                    low,
                    high,
                    family: self.family.name().into(),
                });
            }
        }
        Ok(())
    }

    /// Coefficient vector d (3D families) or d̃ (5D families) multiplying the
    /// Dirac matrices at this point.
    pub fn coefficients(&self, p: &ParameterPoint) -> Result<Vec<f64>> {
        self.check_point(p)?;
        let s = self.sign as f64;
        Ok(match self.family {
            Family::Dirac3dLattice => {
                let (kx, ky, kz) = (p.coords[0], p.coords[1], p.coords[2]);
                vec![
                    kx.sin(),
                    ky.sin(),
                    self.mass - kx.cos() - ky.cos() - kz.cos(),
                ]
            }
            Family::Dirac3dEff | Family::Experimental4level => {
                let (theta, phi) = (p.coords[0], p.coords[1]);
                vec![
                    theta.sin() * phi.cos(),
                    theta.sin() * phi.sin(),
                    s * theta.cos(),
                ]
            }
            Family::Yang5dLattice => {
                let k = &p.coords;
                vec![
                    k[0].sin(),
                    k[1].sin(),
                    k[2].sin(),
                    k[3].sin(),
                    self.mass - k.iter().map(|x| x.cos()).sum::<f64>(),
                ]
            }
            Family::Lattice4d => {
                let k = &p.coords;
                let kv = self.frozen.unwrap_or(PI / 2.0);
                vec![
                    k[0].sin(),
                    k[1].sin(),
                    k[2].sin(),
                    k[3].sin(),
                    self.mass - k.iter().map(|x| x.cos()).sum::<f64>() - kv.cos(),
                ]
            }
            Family::YangEff => {
                let (f1, f2, f3, f4) = (p.coords[0], p.coords[1], p.coords[2], p.coords[3]);
                let (s1, s2, s3) = (f1.sin(), f2.sin(), f3.sin());
                vec![
                    f1.cos(),
                    s1 * f2.cos(),
                    s1 * s2 * f3.cos(),
                    s1 * s2 * s3 * f4.cos(),
                    s * s1 * s2 * s3 * f4.sin(),
                ]
            }
        })
    }

    /// The 4×4 Hamiltonian matrix at a parameter point.
    pub fn hamiltonian(&self, p: &ParameterPoint) -> Result<ComplexMatrix> {
        if self.family == Family::Experimental4level {
            // route through the four-level matrix plus the level lift
            let (theta, phi) = (p.coords[0], p.coords[1]);
            self.check_point(p)?;
            return Ok(experimental_effective(theta, phi, self.sign));
        }
        let d = self.coefficients(p)?;
        let gammas: Vec<ComplexMatrix> = if self.family.is_3d() {
            dirac_alphas().to_vec()
        } else {
            dirac_betas().to_vec()
        };
        let mut h = ComplexMatrix::zeros(4);
        for (coef, gamma) in d.iter().zip(&gammas) {
            if *coef != 0.0 {
                h = h.add(&gamma.scale(C64::new(*coef, 0.0)));
            }
        }
        Ok(h)
    }

    /// |d|, half the spectral gap.
    pub fn gap_radius(&self, p: &ParameterPoint) -> Result<f64> {
        let d = self.coefficients(p)?;
        Ok(d.iter().map(|x| x * x).sum::<f64>().sqrt())
    }
}

/// Anticommutation report for a set of candidate Dirac matrices.
#[derive(Debug, Clone)]
pub struct AlgebraReport {
    /// max‖{Γ_a, Γ_b} − 2δ_ab·1‖ for every pair a ≤ b.
    pub pair_residuals: Vec<((usize, usize), f64)>,
    pub max_residual: f64,
    pub passed: bool,
}

/// Verify {Γ_a, Γ_b} = 2δ_ab·1 for an explicit matrix set.
pub fn anticommutator_check(gammas: &[ComplexMatrix]) -> AlgebraReport {
    let dim = gammas[0].dim();
    let identity2 = ComplexMatrix::identity(dim).scale(C64::new(2.0, 0.0));
    let mut pair_residuals = Vec::new();
    let mut max_residual = 0.0f64;
    for a in 0..gammas.len() {
        for b in a..gammas.len() {
            let anti = gammas[a].mul(&gammas[b]).add(&gammas[b].mul(&gammas[a]));
            let target = if a == b {
                identity2.clone()
            } else {
                ComplexMatrix::zeros(dim)
            };
            let res = anti.max_abs_diff(&target);
            max_residual = max_residual.max(res);
            pair_residuals.push(((a, b), res));
        }
    }
    AlgebraReport {
        pair_residuals,
        max_residual,
        passed: max_residual == 0.0,
    }
}

/// Verify the anticommutation relations of the family's Dirac matrix set.
pub fn dirac_algebra_check(spec: &ModelSpec) -> AlgebraReport {
    if spec.family.is_3d() {
        anticommutator_check(&dirac_alphas())
    } else {
        anticommutator_check(&dirac_betas())
    }
}

/// Residuals of the discrete-symmetry relations at one parameter point.
#[derive(Debug, Clone)]
pub struct SymmetryReport {
    pub relations: Vec<(String, f64)>,
    pub max_residual: f64,
}

/// Check the family's discrete symmetries at `p`.
///
/// 3D families: P H(k) P⁻¹ = H(−k) with P = α_z, T H(k) T⁻¹ = H(−k) with
/// T = α_z K, and the PT relation H(k)* = H(k) (the Hamiltonian is real).
/// 5D families: the antiunitary T = ΘK with Θ = iσ₂⊗σ₀ commutes with the
/// Hamiltonian at every point, Θ H(k̃)* Θ⁻¹ = H(k̃); this is what forces the
/// two-fold band degeneracy and traceless Berry curvature.
pub fn symmetry_check(spec: &ModelSpec, p: &ParameterPoint) -> Result<SymmetryReport> {
    let h = spec.hamiltonian(p)?;
    let mut relations = Vec::new();
    if spec.family.is_3d() {
        let h_neg = spec.hamiltonian(&p.negated())?;
        let alpha_z = dirac_alphas()[2].clone();
        let p_h_p = alpha_z.mul(&h).mul(&alpha_z);
        relations.push(("inversion".to_string(), p_h_p.max_abs_diff(&h_neg)));
        let t_h_t = alpha_z.mul(&h.conjugate()).mul(&alpha_z);
        relations.push(("time-reversal".to_string(), t_h_t.max_abs_diff(&h_neg)));
        relations.push(("pt-reality".to_string(), h.conjugate().max_abs_diff(&h)));
    } else {
        let theta = pauli(2).kron(&pauli(0)).scale(C64::new(0.0, 1.0));
        let theta_inv = theta.adjoint();
        let lhs = theta.mul(&h.conjugate()).mul(&theta_inv);
        relations.push(("time-reversal-pointwise".to_string(), lhs.max_abs_diff(&h)));
    }
    let max_residual = relations.iter().map(|(_, r)| *r).fold(0.0, f64::max);
    Ok(SymmetryReport {
        relations,
        max_residual,
    })
}

/// The rotating-frame four-level Hamiltonian, exactly as realized in the
/// microwave-dressed atomic system.
pub fn experimental_hamiltonian(
    rabi: [f64; 4],
    phases: [f64; 4],
    detunings: [f64; 4],
    t: f64,
) -> ComplexMatrix {
    let [o1, o2, o3, o4] = rabi;
    let [p1, p2, p3, p4] = phases;
    let [d1, _d2, d3, d4] = detunings;
    let dprime = detunings[0] + detunings[1] - detunings[2] - detunings[3];
    let e = |omega: f64, phase: f64| C64::new(omega * phase.cos(), omega * phase.sin());
    let mut h = ComplexMatrix::zeros(4);
    h.set(0, 0, C64::new(-d1, 0.0));
    h.set(2, 2, C64::new(-d4, 0.0));
    h.set(3, 3, C64::new(d3 - d1, 0.0));
    h.set(0, 1, e(o1, -p1));
    h.set(1, 0, e(o1, p1));
    h.set(0, 3, e(o3, -p3));
    h.set(3, 0, e(o3, p3));
    h.set(1, 2, e(o4, p4));
    h.set(2, 1, e(o4, -p4));
    h.set(2, 3, e(o2, -p2 - dprime * t));
    h.set(3, 2, e(o2, p2 + dprime * t));
    h
}

/// Four-level matrix with the monopole parameter mapping and the level lift
/// Δ·diag(0, 1, 0, 1) applied; equals the effective Dirac Hamiltonian.
fn experimental_effective(theta: f64, phi: f64, sign: i8) -> ComplexMatrix {
    let o0 = 1.0;
    let (st, ct) = (theta.sin(), theta.cos());
    let rabi = [
        o0 * st * phi.cos(),
        -o0 * st * phi.cos(),
        -o0 * st * phi.sin(),
        -o0 * st * phi.sin(),
    ];
    let delta = sign as f64 * o0 * ct;
    let mut h = experimental_hamiltonian(rabi, [0.0; 4], [delta; 4], 0.0);
    // lift levels |b⟩ and |d⟩ by Δ
    h.set(1, 1, h.get(1, 1) + C64::new(delta, 0.0));
    h.set(3, 3, h.get(3, 3) + C64::new(delta, 0.0));
    h
}

/// Four-level matrix with the lattice parameter mapping (Ω's from d_x, d_y,
/// detunings from d_z) and the level lift applied.
pub fn experimental_from_d(d: &[f64; 3]) -> ComplexMatrix {
    let rabi = [d[0], -d[0], -d[1], -d[1]];
    let delta = d[2];
    let mut h = experimental_hamiltonian(rabi, [0.0; 4], [delta; 4], 0.0);
    h.set(1, 1, h.get(1, 1) + C64::new(delta, 0.0));
    h.set(3, 3, h.get(3, 3) + C64::new(delta, 0.0));
    h
}

/// Build the effective Dirac Hamiltonian both directly and through the
/// four-level mapping; the maximum entrywise deviation must vanish.
pub fn experimental_reduction_check(theta: f64, phi: f64, sign: i8) -> Result<f64> {
    let via_levels = experimental_effective(theta, phi, sign);
    let spec = ModelSpec::dirac3d_eff(sign);
    let direct = spec.hamiltonian(&ParameterPoint {
        chart: Chart::SphereS2,
        coords: vec![theta, phi],
    })?;
    Ok(via_levels.max_abs_diff(&direct))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::hermitian_eig;

    fn assert_zero_matrix(m: &ComplexMatrix, tol: f64, what: &str) {
        assert!(
            m.max_abs_diff(&ComplexMatrix::zeros(m.dim())) <= tol,
            "{what} not zero (max {})",
            m.max_norm()
        );
    }

    #[test]
    fn dirac_point_location_3d() {
        let spec = ModelSpec::dirac3d_lattice(2.0);
        let p = ParameterPoint::cartesian(vec![0.0, 0.0, PI / 2.0]).unwrap();
        let h = spec.hamiltonian(&p).unwrap();
        assert_zero_matrix(&h, 1e-15, "H at the Dirac point");
    }

    #[test]
    fn eff_pole_is_alpha_z() {
        // θ → 0 pole of the parameterization: q = (0, 0, 1)
        let spec = ModelSpec::dirac3d_eff(1);
        let p = ParameterPoint {
            chart: Chart::SphereS2,
            coords: vec![0.0, 0.3],
        };
        let h = spec.hamiltonian(&p).unwrap();
        assert!(h.max_abs_diff(&dirac_alphas()[2]) < 1e-15);
    }

    #[test]
    fn yang_monopole_location() {
        let spec = ModelSpec::yang5d_lattice(4.0);
        let p = ParameterPoint::cartesian(vec![0.0, 0.0, 0.0, 0.0, PI / 2.0]).unwrap();
        let h = spec.hamiltonian(&p).unwrap();
        assert_zero_matrix(&h, 1e-15, "H at the Yang monopole");
    }

    #[test]
    fn yang_eff_all_right_angles_is_beta5() {
        let spec = ModelSpec::yang_eff(1);
        let p = ParameterPoint::sphere_s4([PI / 2.0; 4]).unwrap();
        let h = spec.hamiltonian(&p).unwrap();
        assert!(h.max_abs_diff(&dirac_betas()[4]) < 1e-15);
    }

    #[test]
    fn algebra_checks_pass_exactly() {
        let r3 = dirac_algebra_check(&ModelSpec::dirac3d_lattice(2.0));
        assert!(r3.passed, "3D algebra residual {}", r3.max_residual);
        assert_eq!(r3.max_residual, 0.0);
        let r5 = dirac_algebra_check(&ModelSpec::yang_eff(1));
        assert!(r5.passed, "5D algebra residual {}", r5.max_residual);
    }

    #[test]
    fn corrupted_algebra_fails() {
        let mut gammas = dirac_alphas().to_vec();
        gammas[0] = pauli(0).kron(&pauli(1));
        let report = anticommutator_check(&gammas);
        assert!(!report.passed);
        assert!(report.max_residual > 0.1);
    }

    #[test]
    fn symmetries_3d_exact() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let spec = ModelSpec::dirac3d_lattice(2.0);
        for _ in 0..50 {
            let k: Vec<f64> = (0..3).map(|_| rng.random_range(-PI..PI)).collect();
            let p = ParameterPoint::cartesian(k).unwrap();
            let report = symmetry_check(&spec, &p).unwrap();
            assert!(
                report.max_residual <= 1e-12,
                "3D symmetry residual {}",
                report.max_residual
            );
            // PT implies a real Hamiltonian
            let h = spec.hamiltonian(&p).unwrap();
            let im_max = (0..4)
                .flat_map(|r| (0..4).map(move |c| (r, c)))
                .map(|(r, c)| h.get(r, c).im.abs())
                .fold(0.0, f64::max);
            assert!(im_max <= 1e-15);
        }
    }

    #[test]
    fn symmetry_5d_pointwise() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let spec = ModelSpec::yang5d_lattice(4.0);
        for _ in 0..20 {
            let k: Vec<f64> = (0..5).map(|_| rng.random_range(-PI..PI)).collect();
            let p = ParameterPoint::cartesian(k).unwrap();
            let report = symmetry_check(&spec, &p).unwrap();
            assert!(report.max_residual <= 1e-12);
        }
    }

    #[test]
    fn spectrum_two_plus_two() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let specs = [
            ModelSpec::dirac3d_lattice(2.0),
            ModelSpec::yang5d_lattice(4.0),
            ModelSpec::lattice_4d(),
        ];
        for spec in &specs {
            for _ in 0..10 {
                let k: Vec<f64> = (0..spec.family.param_dim())
                    .map(|_| rng.random_range(-PI..PI))
                    .collect();
                let p = ParameterPoint::cartesian(k).unwrap();
                let h = spec.hamiltonian(&p).unwrap();
                let radius = spec.gap_radius(&p).unwrap();
                let dec = hermitian_eig(&h).unwrap();
                let expect = [-radius, -radius, radius, radius];
                for (e, x) in dec.eigenvalues.iter().zip(expect) {
                    assert!((e - x).abs() <= 1e-10 * (1.0 + radius), "spectrum ±|d|");
                }
            }
        }
    }

    #[test]
    fn experimental_zero_drive_is_zero() {
        let h = experimental_hamiltonian([0.0; 4], [0.0; 4], [0.0; 4], 0.0);
        assert_zero_matrix(&h, 0.0, "undriven four-level matrix");
    }

    #[test]
    fn experimental_matches_lattice_mapping() {
        let spec = ModelSpec::dirac3d_lattice(2.0);
        let p = ParameterPoint::cartesian(vec![0.7, -0.4, 1.3]).unwrap();
        let d = spec.coefficients(&p).unwrap();
        let via_levels = experimental_from_d(&[d[0], d[1], d[2]]);
        let direct = spec.hamiltonian(&p).unwrap();
        assert!(via_levels.max_abs_diff(&direct) <= 1e-14);
    }

    #[test]
    fn experimental_reduction_exact() {
        assert!(experimental_reduction_check(PI / 2.0, 0.0, 1).unwrap() == 0.0);
        assert!(experimental_reduction_check(PI / 4.0, PI / 3.0, 1).unwrap() <= 1e-15);
        for i in 0..10 {
            for j in 0..10 {
                let theta = (i as f64 + 0.5) * PI / 10.0;
                let phi = (j as f64 + 0.5) * 2.0 * PI / 10.0;
                for sign in [1, -1] {
                    let dev = experimental_reduction_check(theta, phi, sign).unwrap();
                    assert!(dev <= 1e-13, "reduction deviation {dev} at ({theta}, {phi})");
                }
            }
        }
    }

    #[test]
    fn point_range_enforcement() {
        assert!(ParameterPoint::sphere_s2(0.0, 1.0).is_err());
        assert!(ParameterPoint::sphere_s2(1.0, 7.0).is_err());
        assert!(ParameterPoint::sphere_s2(PI, 2.0 * PI).is_ok());
        let w = ParameterPoint::sphere_wrapped(Chart::SphereS2, &[1.0, 7.0]).unwrap();
        assert!(w.coords[1] > 0.0 && w.coords[1] <= 2.0 * PI);
    }

    #[test]
    fn mass_window() {
        assert!(ModelSpec::dirac3d_lattice(2.0).check_mass_window().is_ok());
        assert!(ModelSpec::dirac3d_lattice(3.5).check_mass_window().is_err());
        assert!(ModelSpec::yang5d_lattice(4.0).check_mass_window().is_ok());
        assert!(ModelSpec::yang5d_lattice(5.0).check_mass_window().is_err());
    }

    #[test]
    fn spec_serializes_with_kebab_names() {
        let spec = ModelSpec::lattice_4d();
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"lattice-4d\""), "{json}");
        let back: ModelSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
}
