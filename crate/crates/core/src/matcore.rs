//! Dense complex square matrices and a cyclic Jacobi eigensolver for Hermitian input.
//!
//! Everything here is sized for 2-, 4- and 8-dimensional registers, so storage is a
//! flat row-major `Vec` and all products are the textbook triple loop.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sweep cap for the Jacobi eigensolver.
pub const MAX_SWEEPS: usize = 1000;

#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_diag(diag: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, T::zero());
        }
        m
    }

    /// Builds a matrix from row-major rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::NotSquare {
                    rows: dim,
                    cols: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from a flat row-major vector of `dim * dim` entries.
    pub fn from_vec(dim: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::NotSquare {
                rows: dim,
                cols: data.len() / dim.max(1),
            });
        }
        Ok(Self { dim, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<Complex<T>> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn real_diagonal(&self) -> Vec<T> {
        (0..self.dim).map(|i| self[(i, i)].re).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Kronecker product `self ⊗ other`; block `(i, j)` of the result is `self[i,j] * other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let mut out = Self::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * other.data[k * n + j];
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, unitary: &Self) -> Result<Self> {
        unitary.matmul(self)?.matmul(&unitary.adjoint())
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, exponent: usize) -> Self {
        let mut out = Self::identity(self.dim);
        for _ in 0..exponent {
            out = out.matmul(self).expect("square matrix power");
        }
        out
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max))
    }

    /// Largest `|a_ij - conj(a_ji)|`.
    pub fn hermiticity_deviation(&self) -> T {
        let n = self.dim;
        let mut dev = T::zero();
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    fn off_diagonal_norm(&self) -> T {
        let n = self.dim;
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc = acc + self[(i, j)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        match self.matmul(&self.adjoint()) {
            Ok(p) => p
                .max_abs_diff(&Self::identity(self.dim))
                .map(|d| d <= tol)
                .unwrap_or(false),
            Err(_) => false,
        }
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
    ///
    /// `tol` bounds the accepted Hermiticity deviation of the input. Eigenvalues
    /// ascend and column `k` of `eigenvectors` belongs to eigenvalue `k`.
    pub fn hermitian_eig(&self, tol: T) -> Result<EigenDecomposition<T>> {
        let (diag, v) = self.jacobi(tol, true)?;
        let v = v.expect("vectors requested");
        let order = ascending_order(&diag);
        let n = self.dim;
        let mut eigenvectors = Self::zeros(n);
        for (col, &src) in order.iter().enumerate() {
            for row in 0..n {
                eigenvectors[(row, col)] = v[(row, src)];
            }
        }
        Ok(EigenDecomposition {
            eigenvalues: order.iter().map(|&i| diag[i]).collect(),
            eigenvectors,
        })
    }

    /// Ascending eigenvalues only; same rotations as [`Matrix::hermitian_eig`] without
    /// accumulating the eigenvectors.
    pub fn hermitian_eigenvalues(&self, tol: T) -> Result<Vec<T>> {
        let (diag, _) = self.jacobi(tol, false)?;
        Ok(ascending_order(&diag).iter().map(|&i| diag[i]).collect())
    }

    // Negated comparisons below also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    fn jacobi(&self, tol: T, vectors: bool) -> Result<(Vec<T>, Option<Self>)> {
        let deviation = self.hermiticity_deviation();
        if !(deviation <= tol) {
            return Err(Error::NotHermitian {
                deviation: deviation.to_f64().unwrap_or(f64::NAN),
            });
        }
        let n = self.dim;
        // Symmetrize so rounding in the input cannot bias the rotations.
        let mut a = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = (self[(i, j)] + self[(j, i)].conj()).scale(T::lit(0.5));
            }
        }
        let mut v = vectors.then(|| Self::identity(n));

        let threshold = T::lit(T::JACOBI_TOL).max(T::epsilon() * T::lit(16.0) * a.frobenius_norm());
        let mut sweeps = 0;
        while a.off_diagonal_norm() >= threshold {
            if sweeps == MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    sweeps,
                    residual: a.off_diagonal_norm().to_f64().unwrap_or(f64::NAN),
                });
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut a, v.as_mut(), p, q);
                }
            }
            sweeps += 1;
        }
        Ok((a.real_diagonal(), v))
    }

    /// Checks Hermiticity, unit trace and eigenvalue non-negativity at `tol`.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn is_density_matrix(&self, tol: T) -> DensityCheck {
        let dev = self.hermiticity_deviation();
        if !(dev <= tol) {
            return DensityCheck::fail(format!("not Hermitian (deviation {dev:e})"));
        }
        let tr = self.trace();
        let tr_err = (tr - Complex::one()).norm();
        if !(tr_err <= tol) {
            return DensityCheck::fail(format!("trace {} deviates from 1 by {tr_err:e}", tr.re));
        }
        match self.hermitian_eigenvalues(tol) {
            Ok(eigenvalues) => {
                let min = eigenvalues[0];
                if min < -tol {
                    DensityCheck::fail(format!("negative eigenvalue {min:e}"))
                } else {
                    DensityCheck::pass()
                }
            }
            Err(e) => DensityCheck::fail(e.to_string()),
        }
    }
}

/// One two-sided complex Jacobi rotation zeroing `a[p][q]`, accumulated into `v`.
fn jacobi_rotate<T: Real>(a: &mut Matrix<T>, v: Option<&mut Matrix<T>>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Below this the pivot cannot move either diagonal entry.
    if r <= T::epsilon() * T::epsilon() * (app.abs() + aqq.abs()) || r < T::min_positive_value() {
        a[(p, q)] = Complex::zero();
        a[(q, p)] = Complex::zero();
        return;
    }
    // Unit phase that makes the pivot real, then a real symmetric rotation.
    let phase = Complex::from_polar(T::one(), -apq.arg());
    let theta = T::lit(0.5) * (r + r).atan2(aqq - app);
    let (s, c) = theta.sin_cos();

    let g_pp = Complex::new(c, T::zero());
    let g_pq = Complex::new(s, T::zero());
    let g_qp = phase.scale(-s);
    let g_qq = phase.scale(c);

    let n = a.dim;
    // A <- A G
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    // A <- G† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = Complex::zero();
    a[(q, p)] = Complex::zero();
    a[(p, p)].im = T::zero();
    a[(q, q)].im = T::zero();
    // V <- V G
    let Some(v) = v else { return };
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

fn ascending_order<T: Real>(values: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(std::cmp::Ordering::Equal));
    order
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[Complex<T>]> = self.data.chunks(self.dim.max(1)).collect();
        f.debug_struct("Matrix")
            .field("dim", &self.dim)
            .field("rows", &rows)
            .finish()
    }
}

/// Eigenvalues ascending, eigenvectors as the matching columns of a unitary.
#[derive(Clone, Debug)]
pub struct EigenDecomposition<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Matrix<T>,
}

impl<T: Real> EigenDecomposition<T> {
    /// `V · diag(λ) · V†`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let lambda: Vec<Complex<T>> = self.eigenvalues.iter().map(|&l| Complex::new(l, T::zero())).collect();
        let d = Matrix::from_diag(&lambda);
        self.eigenvectors
            .matmul(&d)
            .and_then(|vd| vd.matmul(&self.eigenvectors.adjoint()))
            .expect("eigenvector matrix matches eigenvalue count")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityCheck {
    pub valid: bool,
    pub diagnostic: Option<String>,
}

impl DensityCheck {
    fn pass() -> Self {
        Self {
            valid: true,
            diagnostic: None,
        }
    }

    fn fail(reason: String) -> Self {
        Self {
            valid: false,
            diagnostic: Some(reason),
        }
    }
}
