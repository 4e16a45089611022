//! The general `d`-asset model
//!
//! ```text
//! dY = (mu + beta(Sigma)) dt + Sigma^{1/2} dW + rho(dL)
//! dSigma = (A Sigma + Sigma A^T) dt + dL
//! ```
//!
//! with transforms evaluated by quadrature of the driver's cumulant along
//! `s -> H_y(s) + rho^*(y)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::levy::SubordinatorSpec;
use crate::matrix::{lift, spectral_norm, trace_product, CMat, Entry, MeanReversionMatrix, SymMat};
use crate::quad::{integrate, QuadConfig};

/// Linear map from `d x d` matrices to `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub enum LinOpToVec {
    /// `X -> (c_1 X_11, ..., c_d X_dd)`.
    Diagonal(Vec<f64>),
    /// `X -> G vec(X)` with `G` of shape `d x d^2` and column-major `vec`.
    General(DMatrix<f64>),
}

impl LinOpToVec {
    pub fn zero(d: usize) -> Self {
        LinOpToVec::Diagonal(vec![0.0; d])
    }

    /// Risk-neutral drift correction `X -> -X_ii / 2`.
    pub fn martingale_beta(d: usize) -> Self {
        LinOpToVec::Diagonal(vec![-0.5; d])
    }

    pub fn dim(&self) -> usize {
        match self {
            LinOpToVec::Diagonal(c) => c.len(),
            LinOpToVec::General(g) => g.nrows(),
        }
    }

    /// The `d x d^2` coefficient matrix.
    pub fn coefficients(&self) -> DMatrix<f64> {
        match self {
            LinOpToVec::Diagonal(c) => {
                let d = c.len();
                let mut g = DMatrix::zeros(d, d * d);
                for (i, &ci) in c.iter().enumerate() {
                    g[(i, i + i * d)] = ci;
                }
                g
            }
            LinOpToVec::General(g) => g.clone(),
        }
    }

    pub fn is_martingale_beta(&self) -> bool {
        self.coefficients() == LinOpToVec::martingale_beta(self.dim()).coefficients()
    }

    pub fn apply<T: Entry>(&self, x: &DMatrix<T>) -> DVector<T> {
        match self {
            LinOpToVec::Diagonal(c) => DVector::from_iterator(c.len(), c.iter().enumerate().map(|(i, &ci)| x[(i, i)] * T::from_real(ci))),
            LinOpToVec::General(g) => {
                let d = g.nrows();
                DVector::from_fn(d, |i, _| {
                    let mut acc = T::zero();
                    for (k, v) in x.iter().enumerate() {
                        acc += *v * T::from_real(g[(i, k)]);
                    }
                    acc
                })
            }
        }
    }

    /// Adjoint under `<X, Y> = tr(X^T Y)`: `y^T op(X) = tr(op^*(y)^T X)`.
    pub fn adjoint<T: Entry>(&self, y: &[T]) -> DMatrix<T> {
        match self {
            LinOpToVec::Diagonal(c) => {
                let d = c.len();
                DMatrix::from_fn(d, d, |i, j| if i == j { y[i] * T::from_real(c[i]) } else { T::zero() })
            }
            LinOpToVec::General(g) => {
                let d = g.nrows();
                DMatrix::from_fn(d, d, |i, j| {
                    let k = i + j * d;
                    let mut acc = T::zero();
                    for (r, &yr) in y.iter().enumerate() {
                        acc += yr * T::from_real(g[(r, k)]);
                    }
                    acc
                })
            }
        }
    }

    /// Operator norm from Frobenius-normed matrices to Euclidean vectors.
    pub fn operator_norm(&self) -> f64 {
        match self {
            LinOpToVec::Diagonal(c) => c.iter().fold(0.0, |m, x| m.max(x.abs())),
            LinOpToVec::General(g) => spectral_norm(g),
        }
    }
}

/// Which domain check `mgf_with` applies before evaluating.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainGate {
    /// Require `|Re y| < theta` from [`ModelParams::strip_radius`].
    Strict,
    /// Only require the driver's cumulant to be defined along the whole path
    /// `s -> H_y(s) + rho^*(y)`.
    Driver,
}

/// Norms entering the strip radius.
#[derive(Clone, Debug, PartialEq)]
pub struct StripNorms {
    /// Spectral norm of `A`.
    pub a: f64,
    /// Norm of `X -> A^{-1} X` induced by the Frobenius norm.
    pub a_inv: f64,
    pub beta: f64,
    pub rho: f64,
    /// Norm used on the matrix space.
    pub matrix_norm: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StripInfo {
    pub theta: f64,
    pub eps: f64,
    pub t: f64,
    pub norms: StripNorms,
}

/// Full parameter set of the general model.
#[derive(Clone, Debug)]
pub struct ModelParams {
    pub mu: DVector<f64>,
    pub a: MeanReversionMatrix,
    pub beta: LinOpToVec,
    pub rho: LinOpToVec,
    pub sigma0: SymMat,
    pub y0: DVector<f64>,
    pub sub: SubordinatorSpec,
}

fn outer<T: Entry>(y: &[T]) -> DMatrix<T> {
    DMatrix::from_fn(y.len(), y.len(), |i, j| y[i] * y[j])
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl ModelParams {
    pub fn new(
        mu: DVector<f64>,
        a: MeanReversionMatrix,
        beta: LinOpToVec,
        rho: LinOpToVec,
        sigma0: SymMat,
        y0: DVector<f64>,
        sub: SubordinatorSpec,
    ) -> Result<Self> {
        let p = Self { mu, a, beta, rho, sigma0, y0, sub };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.a.dim();
        let dims = [self.mu.len(), self.beta.dim(), self.rho.dim(), self.sigma0.dim(), self.y0.len(), self.sub.dim()];
        if dims.iter().any(|&k| k != d) {
            return Err(Error::Shape(format!("inconsistent dimensions {dims:?} for d = {d}")));
        }
        for op in [&self.beta, &self.rho] {
            if let LinOpToVec::General(g) = op {
                if g.ncols() != d * d {
                    return Err(Error::Shape(format!("operator has {} columns, expected {}", g.ncols(), d * d)));
                }
            }
        }
        if !self.sigma0.is_psd() {
            return Err(Error::NotPsd { min_eigenvalue: self.sigma0.min_eigenvalue() });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `A^{-*}(beta^*(y) + y y^T / 2)`.
    fn h_base(&self, y: &[Complex64]) -> Result<CMat> {
        let q = self.beta.adjoint(y) + outer(y) * c(0.5);
        self.a.sylvester_solve(&q, true)
    }

    fn check_arg(&self, y: &[Complex64]) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::Shape(format!("argument has length {}, model has d = {}", y.len(), self.dim())));
        }
        Ok(())
    }

    /// `H_y(s) = e^{A^T s} Q e^{A s} - Q` with `Q = A^{-*}(beta^*(y) + y y^T / 2)`.
    pub fn h(&self, y: &[Complex64], s: f64) -> Result<CMat> {
        self.check_arg(y)?;
        let q = self.h_base(y)?;
        Ok(self.a.congruence(&q, s, true)? - q)
    }

    /// Joint characteristic function `E exp(i y^T Y_t + i tr(z Sigma_t))`.
    pub fn joint_cf(&self, y: &[f64], z: &DMatrix<f64>, t: f64, cfg: &QuadConfig) -> Result<Complex64> {
        let d = self.dim();
        if y.len() != d || z.nrows() != d || z.ncols() != d {
            return Err(Error::Shape("joint_cf argument dimensions".into()));
        }
        let i = Complex64::new(0.0, 1.0);
        let yc: Vec<Complex64> = y.iter().map(|&v| c(v)).collect();
        let q = self.a.sylvester_solve(&(self.beta.adjoint(&yc) + outer(&yc) * (i * 0.5)), true)?;
        let zc: CMat = lift(z);
        let rho_star = self.rho.adjoint(&yc);
        let sigma0 = self.sigma0.to_complex();
        let drift: f64 = y.iter().zip(self.y0.iter().zip(self.mu.iter())).map(|(&yk, (&y0, &mu))| yk * (y0 + mu * t)).sum();
        let mut expo = i * drift;
        expo += i * trace_product(&sigma0, &self.a.congruence(&zc, t, true)?);
        expo += i * trace_product(&sigma0, &(self.a.congruence(&q, t, true)? - &q));
        let integral = integrate(
            |s| {
                let arg = self.a.congruence(&(&zc + &q), s, true)? - &q + &rho_star;
                self.sub.char_exponent(&arg)
            },
            0.0,
            t,
            cfg,
        )?;
        Ok((expo + integral.value).exp())
    }

    /// Strip radius `theta` with spectral norm on `A`, Frobenius norm on the
    /// matrix space and the induced operator norms.
    pub fn strip_radius(&self, t: f64) -> StripInfo {
        let norms = StripNorms {
            a: spectral_norm(self.a.matrix()),
            a_inv: self.a.inverse_operator_norm(),
            beta: self.beta.operator_norm(),
            rho: self.rho.operator_norm(),
            matrix_norm: "frobenius",
        };
        let eps = self.sub.eps_moment();
        let k = ((2.0 * norms.a * t).exp() + 1.0) * norms.a_inv;
        let theta = if eps.is_infinite() {
            f64::INFINITY
        } else {
            let b = norms.rho / k + norms.beta;
            let q = 2.0 * eps / k;
            q / (b + (b * b + q).sqrt())
        };
        StripInfo { theta, eps, t, norms }
    }

    /// Moment generating function `E exp(y^T Y_t)` behind the strict gate.
    pub fn mgf(&self, y: &[Complex64], t: f64) -> Result<Complex64> {
        self.mgf_with(y, t, DomainGate::Strict, &QuadConfig::default())
    }

    pub fn mgf_with(&self, y: &[Complex64], t: f64, gate: DomainGate, cfg: &QuadConfig) -> Result<Complex64> {
        Ok(self.log_mgf_with(y, t, gate, cfg)?.exp())
    }

    /// `log E exp(y^T Y_t)`; the logarithm is the continuous one obtained
    /// from the exponent, not a principal value.
    pub fn log_mgf_with(&self, y: &[Complex64], t: f64, gate: DomainGate, cfg: &QuadConfig) -> Result<Complex64> {
        self.check_arg(y)?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("horizon must be finite and non-negative, got {t}")));
        }
        let q = self.h_base(y)?;
        let rho_star = self.rho.adjoint(y);
        let z_at = |s: f64| -> Result<CMat> { Ok(self.a.congruence(&q, s, true)? - &q + &rho_star) };
        match gate {
            DomainGate::Strict => {
                let re_norm = y.iter().map(|v| v.re * v.re).sum::<f64>().sqrt();
                let info = self.strip_radius(t);
                if re_norm >= info.theta {
                    return Err(Error::OutOfStrip(format!("|Re y| = {re_norm} >= theta = {}", info.theta)));
                }
            }
            DomainGate::Driver => {
                for s in [0.0, t] {
                    if !self.sub.in_strip(&z_at(s)?) {
                        return Err(Error::OutOfStrip(format!("driver cumulant undefined at s = {s}")));
                    }
                }
            }
        }
        let drift: Complex64 = y.iter().zip(self.y0.iter().zip(self.mu.iter())).map(|(&yk, (&y0, &mu))| yk * (y0 + mu * t)).sum();
        let sigma_term = trace_product(&self.sigma0.to_complex(), &(self.a.congruence(&q, t, true)? - &q));
        let integral = integrate(|s| self.sub.cumulant(&z_at(s)?), 0.0, t, cfg)?;
        Ok(drift + sigma_term + integral.value)
    }

    /// Marginal transform `E exp(y Y^i_t)` through the one-dimensional
    /// representation of asset `i`; requires diagonal `A` and `beta`.
    pub fn marginal_mgf_quadrature(&self, i: usize, y: Complex64, t: f64, cfg: &QuadConfig) -> Result<Complex64> {
        let d = self.dim();
        if i >= d {
            return Err(Error::Shape(format!("asset index {i} out of range for d = {d}")));
        }
        let (Some(a), LinOpToVec::Diagonal(beta)) = (self.a.diagonal(), &self.beta) else {
            let mut e = vec![c(0.0); d];
            e[i] = y;
            return self.mgf_with(&e, t, DomainGate::Driver, cfg);
        };
        let ai = a[i];
        let k = beta[i] * y + 0.5 * y * y;
        let phi = |s: f64| (2.0 * ai * s).exp_m1() / (2.0 * ai);
        let mut e = vec![c(0.0); d];
        e[i] = y;
        let rho_star = self.rho.adjoint(&e);
        let z_at = |s: f64| -> CMat {
            let mut z = rho_star.clone();
            z[(i, i)] += k * phi(s);
            z
        };
        for s in [0.0, t] {
            if !self.sub.in_strip(&z_at(s)) {
                return Err(Error::OutOfStrip(format!("driver cumulant undefined at s = {s}")));
            }
        }
        let integral = integrate(|s| self.sub.cumulant(&z_at(s)), 0.0, t, cfg)?;
        let expo = y * (self.y0[i] + self.mu[i] * t) + k * phi(t) * self.sigma0.get(i, i) + integral.value;
        Ok(expo.exp())
    }

    /// Drift `mu` making `e^{-(r_dom - r_for,i) t} e^{Y^i_t}` martingales.
    pub fn martingale_mu(&self, r_dom: f64, r_for: &[f64]) -> Result<DVector<f64>> {
        let d = self.dim();
        if r_for.len() != d {
            return Err(Error::Shape(format!("{} foreign rates for d = {d}", r_for.len())));
        }
        if !self.beta.is_martingale_beta() {
            return Err(Error::MartingaleInfeasible("risk premium must be X -> -X_ii/2".into()));
        }
        let mut mu = DVector::zeros(d);
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            let s = self.rho.adjoint(&e);
            let comp = self
                .sub
                .cumulant_real(&s)
                .map_err(|err| Error::MartingaleInfeasible(format!("asset {}: {err}", i + 1)))?;
            mu[i] = r_dom - r_for[i] - comp;
        }
        Ok(mu)
    }

    /// Matrix `M` with `|Phi(R + i w)| <= Phi(R) exp(-<M w, w>/2)`:
    /// `M = A^{-1} B(t) Sigma0 + int_0^t A^{-1} B(s) gamma ds`, where
    /// `B(s) X = e^{As} X e^{A^T s} - X`.
    pub fn gaussian_envelope(&self, t: f64) -> Result<SymMat> {
        let sig = self.sigma0.as_matrix();
        let gam = self.sub.gamma().as_matrix();
        let part0 = self.a.sylvester_solve(&(self.a.congruence(sig, t, false)? - sig), false)?;
        let int_b = self.a.sylvester_solve(&(self.a.congruence(gam, t, false)? - gam), false)? - gam * t;
        let part1 = self.a.sylvester_solve(&int_b, false)?;
        Ok(SymMat::symmetrize(&(part0 + part1)))
    }
}
