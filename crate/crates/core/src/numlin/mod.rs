//! Dense complex linear-algebra kernel: Hermitian eigendecomposition, unitary
//! propagators, and subspace gauge alignment.
//!
//! The eigensolver is a cyclic Jacobi iteration specialized to the small
//! (dim ≤ 16) Hermitian matrices this crate works with. All operations are
//! pure functions of their inputs and bitwise deterministic.

mod matrix;

pub use matrix::{inner, norm, C64, ComplexMatrix, Frame, I, ONE, ZERO};

use crate::{Error, Result};

/// Convergence threshold for the Jacobi sweep, relative to ‖H‖_F.
pub const JACOBI_REL_TOL: f64 = 1e-14;
/// Hard cap on Jacobi sweeps before reporting non-convergence.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Smallest acceptable singular value of an alignment overlap matrix.
pub const ALIGN_SIGMA_MIN: f64 = 1e-8;

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column k is the eigenvector for `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// V diag(E) V†.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_eigenvalues(|e| C64::new(e, 0.0))
    }

    /// V diag(f(E)) V†.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n);
        for k in 0..n {
            let fk = f(self.eigenvalues[k]);
            for r in 0..n {
                let vr = v.get(r, k) * fk;
                for c in 0..n {
                    out.add_assign_at(r, c, vr * v.get(c, k).conj());
                }
            }
        }
        out
    }

    /// Apply exp(−i E dt) in the eigenbasis to a state vector.
    pub fn evolve_state(&self, dt: f64, state: &[C64]) -> Vec<C64> {
        let n = self.dim();
        debug_assert_eq!(state.len(), n);
        let v = &self.eigenvectors;
        // amplitudes in the eigenbasis
        let mut amps = vec![ZERO; n];
        for k in 0..n {
            let mut acc = ZERO;
            for r in 0..n {
                acc += v.get(r, k).conj() * state[r];
            }
            let phase = C64::from_polar(1.0, -self.eigenvalues[k] * dt);
            amps[k] = acc * phase;
        }
        let mut out = vec![ZERO; n];
        for k in 0..n {
            let a = amps[k];
            for r in 0..n {
                out[r] += v.get(r, k) * a;
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Eigenvalues come back ascending; ties keep the sweep order, so identical
/// input bits always produce identical output bits.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<SpectralDecomposition> {
    h.check_hermitian()?;
    let n = h.dim();
    if n == 0 {
        return Err(Error::DimensionMismatch {
            context: "empty matrix".into(),
        });
    }

    let mut a = h.clone();
    let mut v = ComplexMatrix::identity(n);
    let fro = a.fro_norm();
    let tol = JACOBI_REL_TOL * fro;

    if fro > 0.0 {
        let mut converged = a.offdiag_fro_norm() <= tol;
        let mut sweeps = 0;
        while !converged {
            if sweeps >= JACOBI_MAX_SWEEPS {
                return Err(Error::EigNotConverged {
                    sweeps,
                    off_norm: a.offdiag_fro_norm(),
                });
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut a, &mut v, p, q);
                }
            }
            sweeps += 1;
            converged = a.offdiag_fro_norm() <= tol;
        }
    }

    // sort ascending, stable in the original column order
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |r, c| v.get(r, order[c]));
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// One Jacobi rotation zeroing the (p, q) entry of the Hermitian matrix `a`,
/// accumulating the rotation into `v`.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let phase = apq / r;
    let s = phase * (t * c);

    let n = a.dim();
    // A <- J† A J with J = [[c, s], [-s̄, c]] acting on columns (p, q)
    for i in 0..n {
        let aip = a.get(i, p);
        let aiq = a.get(i, q);
        a.set(i, p, aip * c - aiq * s.conj());
        a.set(i, q, aip * s + aiq * c);
    }
    for i in 0..n {
        let api = a.get(p, i);
        let aqi = a.get(q, i);
        a.set(p, i, api * c - aqi * s);
        a.set(q, i, api * s.conj() + aqi * c);
    }
    // the rotation is exact on these entries; pin them
    a.set(p, q, ZERO);
    a.set(q, p, ZERO);
    let dpp = a.get(p, p);
    let dqq = a.get(q, q);
    a.set(p, p, C64::new(dpp.re, 0.0));
    a.set(q, q, C64::new(dqq.re, 0.0));

    for i in 0..n {
        let vip = v.get(i, p);
        let viq = v.get(i, q);
        v.set(i, p, vip * c - viq * s.conj());
        v.set(i, q, vip * s + viq * c);
    }
}

/// Propagator U = exp(−i H dt) through the spectral decomposition.
pub fn unitary_exp(h: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
    if !dt.is_finite() {
        return Err(Error::NonFinite);
    }
    let dec = hermitian_eig(h)?;
    Ok(dec.map_eigenvalues(|e| C64::from_polar(1.0, -e * dt)))
}

/// Smallest singular value of the overlap matrix between two frames.
pub fn overlap_sigma_min(reference: &Frame, basis: &Frame) -> Result<f64> {
    let w = reference.overlap(basis);
    let gram = w.mul(&w.adjoint());
    let dec = hermitian_eig(&gram)?;
    Ok(dec.eigenvalues[0].max(0.0).sqrt())
}

/// The unitary V minimizing ‖basis·V − reference‖ in Frobenius norm.
///
/// With W[j][k] = ⟨ref_j|basis_k⟩ this is the unitary polar factor of W†;
/// the overlap must be well conditioned.
pub fn alignment_rotation(basis: &Frame, reference: &Frame) -> Result<ComplexMatrix> {
    if basis.dim() != reference.dim() || basis.len() != reference.len() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "align: basis {}x{}, reference {}x{}",
                basis.dim(),
                basis.len(),
                reference.dim(),
                reference.len()
            ),
        });
    }
    let guard = 1e-6;
    let res = basis
        .orthonormality_residual()
        .max(reference.orthonormality_residual());
    if res > guard {
        return Err(Error::FrameNotOrthonormal { residual: res });
    }

    let w = reference.overlap(basis);
    let gram = w.mul(&w.adjoint());
    let dec = hermitian_eig(&gram)?;
    let sigma_min = dec.eigenvalues[0].max(0.0).sqrt();
    if sigma_min < ALIGN_SIGMA_MIN {
        return Err(Error::GaugeSingular {
            sigma_min,
            threshold: ALIGN_SIGMA_MIN,
        });
    }
    let inv_sqrt = dec.map_eigenvalues(|e| C64::new(1.0 / e.sqrt(), 0.0));
    Ok(w.adjoint().mul(&inv_sqrt))
}

/// Rotate `basis` by the unitary closest (in Frobenius distance) to carrying
/// it onto `reference`.
///
/// The aligned frame spans the same subspace as `basis` and satisfies
/// ⟨ref_j|aligned_k⟩ = (W W†)^{1/2}, a Hermitian positive matrix.
pub fn subspace_align(basis: &Frame, reference: &Frame) -> Result<Frame> {
    let v = alignment_rotation(basis, reference)?;
    Ok(basis.mix(&v))
}

/// Fixed-order pairwise summation; deterministic for any worker count.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1..=8 => values.iter().sum(),
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}
