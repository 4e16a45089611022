//! Small dense matrix utilities.
//!
//! Dimensions here are tiny (two to five assets), so everything is built on
//! `nalgebra::DMatrix` and the Sylvester-type operator `X -> AX + XA^T` is
//! inverted through its explicit `d^2 x d^2` Kronecker representation.

use nalgebra::{DMatrix, SymmetricEigen, LU};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex square matrix.
pub type CMat = DMatrix<Complex64>;

/// Relative tolerance for the PSD predicate (scaled by the spectral norm).
pub const TOL_PSD: f64 = 1e-10;
/// Tolerance for the spectral condition `0 not in sigma(A) + sigma(A)`.
pub const TOL_SPEC: f64 = 1e-12;
/// Generic numerical tolerance.
pub const TOL_NUM: f64 = 1e-10;

/// Scalar types the matrix helpers operate on: `f64` and `Complex64`.
pub trait Entry: nalgebra::ComplexField<RealField = f64> + Copy {
    fn re_part(self) -> f64;
    fn im_part(self) -> f64;
    fn from_parts(re: f64, im: f64) -> Self;
}

impl Entry for f64 {
    fn re_part(self) -> f64 {
        self
    }
    fn im_part(self) -> f64 {
        0.0
    }
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
}

impl Entry for Complex64 {
    fn re_part(self) -> f64 {
        self.re
    }
    fn im_part(self) -> f64 {
        self.im
    }
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
}

/// Embeds a real matrix into `T`.
pub fn lift<T: Entry>(a: &DMatrix<f64>) -> DMatrix<T> {
    a.map(T::from_real)
}

/// Real symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMat(DMatrix<f64>);

impl SymMat {
    /// Wraps a square matrix, rejecting asymmetry beyond rounding and
    /// symmetrizing what remains.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape(format!("{}x{} is not square", m.nrows(), m.ncols())));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("non-finite matrix entry".into()));
        }
        let scale = m.amax().max(1.0);
        let d = m.nrows();
        for i in 0..d {
            for j in (i + 1)..d {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-9 * scale {
                    return Err(Error::Validation(format!(
                        "matrix is not symmetric at ({i},{j}): {} vs {}",
                        m[(i, j)],
                        m[(j, i)]
                    )));
                }
            }
        }
        Ok(Self::symmetrize(&m))
    }

    /// Symmetric part `(M + M^T)/2` of any square matrix.
    pub fn symmetrize(m: &DMatrix<f64>) -> Self {
        SymMat((m + m.transpose()) * 0.5)
    }

    pub fn zeros(d: usize) -> Self {
        SymMat(DMatrix::zeros(d, d))
    }

    pub fn identity(d: usize) -> Self {
        SymMat(DMatrix::identity(d, d))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        SymMat(DMatrix::from_fn(d, d, |i, j| if i == j { diag[i] } else { 0.0 }))
    }

    /// 2x2 convenience constructor `[[m11, m12], [m12, m22]]`.
    pub fn from_2x2(m11: f64, m12: f64, m22: f64) -> Self {
        SymMat(DMatrix::from_row_slice(2, 2, &[m11, m12, m12, m22]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn scaled(&self, c: f64) -> Self {
        SymMat(&self.0 * c)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        sym_eigenvalues(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues().into_iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Positive semidefiniteness up to `TOL_PSD * ||X||`.
    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -TOL_PSD * self.spectral_norm()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > TOL_PSD * self.spectral_norm()
    }

    pub fn to_complex(&self) -> CMat {
        lift(&self.0)
    }
}

fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 2 {
        let (a, b, c) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
        let mid = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        return vec![mid - rad, mid + rad];
    }
    SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect()
}

/// Largest eigenvalue of the symmetric part of a real square matrix.
pub fn sym_part_max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    sym_eigenvalues(&s).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Largest singular value of a real matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    let gram = m.transpose() * m;
    sym_eigenvalues(&gram).into_iter().fold(0.0, f64::max).max(0.0).sqrt()
}

/// Trace inner product `tr(X^T Y)` (no conjugation).
pub fn trace_inner<T: Entry>(x: &DMatrix<T>, y: &DMatrix<T>) -> T {
    x.iter().zip(y.iter()).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
}

/// Trace of a product `tr(X Y)` without forming it.
pub fn trace_product<T: Entry>(x: &DMatrix<T>, y: &DMatrix<T>) -> T {
    let d = x.nrows();
    let mut acc = T::zero();
    for i in 0..d {
        for k in 0..d {
            acc += x[(i, k)] * y[(k, i)];
        }
    }
    acc
}

/// Mean-reversion matrix `A` together with the cached pieces needed to apply
/// and invert `X -> AX + XA^T` and its adjoint `X -> A^T X + XA`.
#[derive(Clone, Debug)]
pub struct MeanReversionMatrix {
    a: DMatrix<f64>,
    eigenvalues: Vec<Complex64>,
    diagonal: Option<Vec<f64>>,
    kron: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    kron_adjoint: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    inverse_norm: f64,
}

impl MeanReversionMatrix {
    /// Validates `0 not in sigma(A) + sigma(A)` and caches the Kronecker
    /// factorizations.
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape(format!("A is {}x{}", a.nrows(), a.ncols())));
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("non-finite entry in A".into()));
        }
        let d = a.nrows();
        let eigenvalues: Vec<Complex64> = a.complex_eigenvalues().iter().copied().collect();
        let scale = spectral_norm(&a).max(1.0);
        for (i, li) in eigenvalues.iter().enumerate() {
            for lj in eigenvalues.iter().skip(i) {
                if (li + lj).norm() < TOL_SPEC * scale {
                    return Err(Error::SingularOperator(format!(
                        "eigenvalues {li} and {lj} sum to zero"
                    )));
                }
            }
        }
        let is_diag = (0..d).all(|i| (0..d).all(|j| i == j || a[(i, j)] == 0.0));
        let diagonal = is_diag.then(|| a.diagonal().iter().copied().collect());
        let id = DMatrix::<f64>::identity(d, d);
        let at = a.transpose();
        let k = id.kronecker(&a) + a.kronecker(&id);
        let k_adj = id.kronecker(&at) + at.kronecker(&id);
        let inverse_norm = match k.clone().try_inverse() {
            Some(inv) => spectral_norm(&inv),
            None => return Err(Error::SingularOperator("Kronecker system is singular".into())),
        };
        Ok(Self {
            a,
            eigenvalues,
            diagonal,
            kron: k.lu(),
            kron_adjoint: k_adj.lu(),
            inverse_norm,
        })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        Self::new(DMatrix::from_fn(d, d, |i, j| if i == j { diag[i] } else { 0.0 }))
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn diagonal(&self) -> Option<&[f64]> {
        self.diagonal.as_deref()
    }

    /// Spectral norm of `A`.
    pub fn norm(&self) -> f64 {
        spectral_norm(&self.a)
    }

    /// Operator norm of `X -> (AX + XA^T)^{-1}` on `vec` coordinates
    /// (Frobenius-induced).
    pub fn inverse_operator_norm(&self) -> f64 {
        self.inverse_norm
    }

    /// Matrix exponential `e^{At}`.
    pub fn expm(&self, t: f64) -> Result<DMatrix<f64>> {
        if let Some(diag) = &self.diagonal {
            if !t.is_finite() {
                return Err(Error::Numeric(format!("expm at non-finite t = {t}")));
            }
            let d = diag.len();
            let e = DMatrix::from_fn(d, d, |i, j| if i == j { (diag[i] * t).exp() } else { 0.0 });
            return finite_or_err(e, t);
        }
        expm(&self.a, t)
    }

    /// `AX + XA^T`, or `A^T X + XA` when `adjoint` is set.
    pub fn sylvester_apply<T: Entry>(&self, x: &DMatrix<T>, adjoint: bool) -> Result<DMatrix<T>> {
        self.check_shape(x)?;
        if let Some(diag) = &self.diagonal {
            return Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
                x[(i, j)] * T::from_real(diag[i] + diag[j])
            }));
        }
        let a: DMatrix<T> = lift(&self.a);
        Ok(if adjoint {
            a.transpose() * x + x * &a
        } else {
            &a * x + x * a.transpose()
        })
    }

    /// Solves `AX + XA^T = Y` (or the adjoint equation) for `X`.
    pub fn sylvester_solve<T: Entry>(&self, y: &DMatrix<T>, adjoint: bool) -> Result<DMatrix<T>> {
        self.check_shape(y)?;
        let d = self.dim();
        if let Some(diag) = &self.diagonal {
            return Ok(DMatrix::from_fn(d, d, |i, j| {
                y[(i, j)] / T::from_real(diag[i] + diag[j])
            }));
        }
        let lu = if adjoint { &self.kron_adjoint } else { &self.kron };
        let re = nalgebra::DVector::from_iterator(d * d, y.iter().map(|v| v.re_part()));
        let im = nalgebra::DVector::from_iterator(d * d, y.iter().map(|v| v.im_part()));
        let xr = lu
            .solve(&re)
            .ok_or_else(|| Error::SingularOperator("Kronecker solve failed".into()))?;
        let xi = lu
            .solve(&im)
            .ok_or_else(|| Error::SingularOperator("Kronecker solve failed".into()))?;
        // column-major vec ordering matches DMatrix storage
        Ok(DMatrix::from_fn(d, d, |i, j| T::from_parts(xr[j * d + i], xi[j * d + i])))
    }

    /// `e^{A^T s} X e^{A s}` for the adjoint flow, `e^{A s} X e^{A^T s}` otherwise.
    pub fn congruence<T: Entry>(&self, x: &DMatrix<T>, s: f64, adjoint: bool) -> Result<DMatrix<T>> {
        self.check_shape(x)?;
        if let Some(diag) = &self.diagonal {
            return Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
                x[(i, j)] * T::from_real(((diag[i] + diag[j]) * s).exp())
            }));
        }
        let e: DMatrix<T> = lift(&self.expm(s)?);
        Ok(if adjoint {
            e.transpose() * x * e
        } else {
            &e * x * e.transpose()
        })
    }

    fn check_shape<T: Entry>(&self, x: &DMatrix<T>) -> Result<()> {
        let d = self.dim();
        if x.nrows() != d || x.ncols() != d {
            return Err(Error::Shape(format!(
                "expected {d}x{d}, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(())
    }
}

/// Matrix exponential `e^{At}` of an arbitrary real square matrix.
///
/// Diagonal and symmetric inputs go through their eigendecomposition; anything
/// else uses scaling and squaring with a Pade approximant.
pub fn expm(a: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    if !t.is_finite() {
        return Err(Error::Numeric(format!("expm at non-finite t = {t}")));
    }
    let d = a.nrows();
    let is_diag = (0..d).all(|i| (0..d).all(|j| i == j || a[(i, j)] == 0.0));
    let e = if is_diag {
        DMatrix::from_fn(d, d, |i, j| if i == j { (a[(i, i)] * t).exp() } else { 0.0 })
    } else if *a == a.transpose() {
        let eig = SymmetricEigen::new(a.clone());
        let v = &eig.eigenvectors;
        let exps = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (l * t).exp()));
        v * exps * v.transpose()
    } else {
        (a * t).exp()
    };
    finite_or_err(e, t)
}

fn finite_or_err(e: DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    if e.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric(format!("expm overflow at t = {t}")));
    }
    Ok(e)
}

/// Symmetric PSD square root. Eigenvalues in `[-tol, 0)` are clipped to zero.
pub fn psd_sqrt(x: &SymMat) -> Result<SymMat> {
    let d = x.dim();
    if d == 1 {
        let v = x.get(0, 0);
        if v < -TOL_PSD * v.abs() {
            return Err(Error::NotPsd { min_eigenvalue: v });
        }
        return Ok(SymMat(DMatrix::from_element(1, 1, v.max(0.0).sqrt())));
    }
    if d == 2 {
        return psd_sqrt_2x2(x);
    }
    let eig = SymmetricEigen::new(x.as_matrix().clone());
    let norm = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -TOL_PSD * norm {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let v = &eig.eigenvectors;
    let roots = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    Ok(SymMat::symmetrize(&(v * roots * v.transpose())))
}

// For 2x2 PSD X: sqrt(X) = (X + sqrt(det X) I) / (sqrt(l1) + sqrt(l2)).
fn psd_sqrt_2x2(x: &SymMat) -> Result<SymMat> {
    let eig = x.eigenvalues();
    let (lo, hi) = (eig[0], eig[1]);
    let norm = lo.abs().max(hi.abs());
    if lo < -TOL_PSD * norm {
        return Err(Error::NotPsd { min_eigenvalue: lo });
    }
    if hi <= 0.0 {
        return Ok(SymMat::zeros(2));
    }
    if lo < 0.0 {
        // rank-one after clipping: sqrt(X) = P / sqrt(hi) with P the projected part
        let m = x.as_matrix();
        let p = m - DMatrix::<f64>::identity(2, 2) * lo;
        return Ok(SymMat::symmetrize(&(p / (hi - lo).sqrt())));
    }
    let sdet = (lo * hi).sqrt();
    let denom = lo.sqrt() + hi.sqrt();
    let m = x.as_matrix();
    let r = (m + DMatrix::<f64>::identity(2, 2) * sdet) / denom;
    Ok(SymMat::symmetrize(&r))
}
