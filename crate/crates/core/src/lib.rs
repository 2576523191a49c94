//! Simulation and analysis toolkit for the geometry of degenerate quantum
//! states in parameter space.
//!
//! The crate is organized around a pipeline:
//!
//! * [`numlin`] — dense complex linear algebra sized for small Hermitian
//!   matrices: a cyclic Jacobi eigensolver, exact unitary propagators, and
//!   subspace gauge alignment.
//! * [`models`] — parameterized four-band Hamiltonian families: 3D/5D lattice
//!   Dirac models, their effective monopole Hamiltonians on spheres, a frozen
//!   4D subsystem, and a four-level experimental Hamiltonian.
//! * [`geometry`] — the exact geometric oracle: gauge-fixed ground bundles,
//!   finite-difference quantum geometric tensor, metric/curvature
//!   decomposition, and closed-form reference values for the monopole models.
//! * [`quench`] — simulated sudden/linear parameter quenches and the
//!   transition-probability inversion that reconstructs every component class
//!   of the non-Abelian quantum metric.
//! * [`chern`] — quadrature on S² and S⁴ and the topological-invariant
//!   pipelines: real Chern number and second Chern number, each from either
//!   curvature or metric data.
//! * [`validate`] — the cross-module invariant suite behind `qmt validate`.

pub mod chern;
pub mod geometry;
pub mod models;
pub mod numlin;
pub mod quench;
pub mod validate;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    EigNotConverged { sweeps: usize, off_norm: f64 },
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("frames are not orthonormal enough to align: residual {residual:.3e}")]
    FrameNotOrthonormal { residual: f64 },
    #[error("gauge singularity: overlap smallest singular value {sigma_min:.3e} below {threshold:.3e}")]
    GaugeSingular { sigma_min: f64, threshold: f64 },
    #[error("chart mismatch: expected {expected} with {expected_dim} coordinates, got {got} with {got_dim}")]
    ChartMismatch {
        expected: String,
        expected_dim: usize,
        got: String,
        got_dim: usize,
    },
    #[error("coordinate {index} = {value} outside the allowed range ({low}, {high}]")]
    CoordinateRange {
        index: usize,
        value: f64,
        low: f64,
        high: f64,
    },
    #[error("spectral gap collapsed at this point: gap {gap:.3e} below floor {floor:.3e}")]
    GapCollapse { gap: f64, floor: f64 },
    #[error("ground cluster has {found} states, expected {expected}")]
    ClusterMismatch { expected: usize, found: usize },
    #[error("eigenstate normalization singular: denominator {denom:.3e}")]
    SingularNormalization { denom: f64 },
    #[error("operation {op} does not support family {family}")]
    UnsupportedFamily { op: String, family: String },
    #[error("invalid prepared state: {context}")]
    InvalidState { context: String },
    #[error("invalid quench specification: {context}")]
    InvalidQuench { context: String },
    #[error("mass {mass} outside the topological window ({low}, {high}) for {family}")]
    MassWindow {
        mass: f64,
        low: f64,
        high: f64,
        family: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
