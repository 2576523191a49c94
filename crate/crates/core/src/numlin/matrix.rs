//! Dense square complex matrices and orthonormal column frames.
//!
//! Everything here is sized for the 2–16 dimensional Hermitian problems the
//! rest of the crate works with; storage is a flat row-major `Vec`.

use num_complex::Complex;

use crate::{Error, Result};

pub type C64 = Complex<f64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// Dense square complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, ONE);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    /// Build from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "row {r} has wrong length");
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, v);
            }
        }
        m
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |r, c| C64::new(rows[r][c], 0.0))
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, C64::new(v, 0.0));
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    #[inline]
    pub fn add_assign_at(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] += v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r))
    }

    pub fn conjugate(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(r, c).conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.data[k * n + c];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        let n = self.dim;
        let mut out = vec![ZERO; n];
        for r in 0..n {
            let mut acc = ZERO;
            for c in 0..n {
                acc += self.data[r * n + c] * v[c];
            }
            out[r] = acc;
        }
        out
    }

    /// Kronecker product, left factor ⊗ right factor.
    pub fn kron(&self, other: &Self) -> Self {
        let (na, nb) = (self.dim, other.dim);
        let n = na * nb;
        let mut out = Self::zeros(n);
        for ra in 0..na {
            for ca in 0..na {
                let a = self.get(ra, ca);
                if a == ZERO {
                    continue;
                }
                for rb in 0..nb {
                    for cb in 0..nb {
                        out.set(ra * nb + rb, ca * nb + cb, a * other.get(rb, cb));
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry magnitude.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius norm of the off-diagonal part.
    pub fn offdiag_fro_norm(&self) -> f64 {
        let mut acc = 0.0;
        for r in 0..self.dim {
            for c in 0..self.dim {
                if r != c {
                    acc += self.get(r, c).norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |A - A†|, the Hermiticity defect.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in r..self.dim {
                let d = (self.get(r, c) - self.get(c, r).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Validate the Hermitian-matrix contract: finite entries and
    /// max|A − A†| ≤ 1e-12 · max(1, ‖A‖_max).
    pub fn check_hermitian(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        let tol = 1e-12 * self.max_norm().max(1.0);
        let residual = self.hermiticity_residual();
        if residual > tol {
            return Err(Error::NotHermitian { residual, tol });
        }
        Ok(())
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.dim).map(|r| self.get(r, c)).collect()
    }
}

/// ⟨a|b⟩ with the physics convention (conjugate-linear in the first slot).
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// A list of same-dimension column vectors, usually orthonormal.
#[derive(Debug, Clone)]
pub struct Frame {
    dim: usize,
    cols: Vec<Vec<C64>>,
}

impl Frame {
    pub fn from_cols(cols: Vec<Vec<C64>>) -> Self {
        let dim = cols.first().map_or(0, Vec::len);
        assert!(cols.iter().all(|c| c.len() == dim), "ragged frame");
        Self { dim, cols }
    }

    /// Columns `lo..hi` of an eigenvector matrix.
    pub fn from_matrix_columns(m: &ComplexMatrix, lo: usize, hi: usize) -> Self {
        Self::from_cols((lo..hi).map(|c| m.column(c)).collect())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vectors in the frame.
    #[inline]
    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn col(&self, k: usize) -> &[C64] {
        &self.cols[k]
    }

    pub fn cols(&self) -> &[Vec<C64>] {
        &self.cols
    }

    /// Overlap matrix W with W[j][k] = ⟨self_j | other_k⟩ (square frames only).
    pub fn overlap(&self, other: &Frame) -> ComplexMatrix {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.len(), other.len());
        let n = self.len();
        ComplexMatrix::from_fn(n, |j, k| inner(self.col(j), other.col(k)))
    }

    /// Linear combination of the frame columns: Σ_j col_j · coeffs_j.
    pub fn combine(&self, coeffs: &[C64]) -> Vec<C64> {
        assert_eq!(coeffs.len(), self.len());
        let mut out = vec![ZERO; self.dim];
        for (c, col) in coeffs.iter().zip(&self.cols) {
            if *c == ZERO {
                continue;
            }
            for (o, v) in out.iter_mut().zip(col) {
                *o += c * v;
            }
        }
        out
    }

    /// New frame with columns mixed by a small square matrix: out_k = Σ_j col_j V[j][k].
    pub fn mix(&self, v: &ComplexMatrix) -> Frame {
        assert_eq!(v.dim(), self.len());
        let cols = (0..self.len())
            .map(|k| self.combine(&v.column(k)))
            .collect();
        Frame::from_cols(cols)
    }

    /// max |⟨c_j|c_k⟩ − δ_jk| over the frame.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.len() {
            for k in j..self.len() {
                let ov = inner(self.col(j), self.col(k));
                let target = if j == k { ONE } else { ZERO };
                worst = worst.max((ov - target).norm());
            }
        }
        worst
    }

    /// Projector Σ_j |c_j⟩⟨c_j| onto the frame span.
    pub fn projector(&self) -> ComplexMatrix {
        let mut p = ComplexMatrix::zeros(self.dim);
        for col in &self.cols {
            for r in 0..self.dim {
                for c in 0..self.dim {
                    p.add_assign_at(r, c, col[r] * col[c].conj());
                }
            }
        }
        p
    }

    /// Remove the frame-span component from `v` in place.
    pub fn project_out(&self, v: &mut [C64]) {
        for col in &self.cols {
            let amp = inner(col, v);
            for (x, c) in v.iter_mut().zip(col) {
                *x -= amp * c;
            }
        }
    }
}
