//! Matrix subordinators: drift plus compound-Poisson Wishart jumps.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::{psd_sqrt, sym_part_max_eigenvalue, trace_product, CMat, SymMat};

/// Independent random stream `index` derived from `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Compound-Poisson jumps with intensity `lambda` and `W_d(n, Theta)` sizes.
#[derive(Clone, Debug)]
pub struct WishartJumpSpec {
    lambda: f64,
    n: f64,
    theta: SymMat,
    theta_sqrt: SymMat,
}

impl WishartJumpSpec {
    pub fn new(lambda: f64, n: f64, theta: SymMat) -> Result<Self> {
        let d = theta.dim();
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Validation(format!("jump intensity must be positive, got {lambda}")));
        }
        if !(n.is_finite() && n > d as f64 - 1.0) {
            return Err(Error::Validation(format!("degrees of freedom must exceed {}, got {n}", d - 1)));
        }
        if !theta.is_psd() {
            return Err(Error::NotPsd { min_eigenvalue: theta.min_eigenvalue() });
        }
        let theta_sqrt = psd_sqrt(&theta)?;
        Ok(Self { lambda, n, theta, theta_sqrt })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn theta(&self) -> &SymMat {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    /// `E[X_ij X_kl]` for `X ~ W_d(n, Theta)`.
    pub fn raw_moment(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let t = |a: usize, b: usize| self.theta.get(a, b);
        let n = self.n;
        n * (t(i, k) * t(j, l) + t(i, l) * t(j, k)) + n * n * t(i, j) * t(k, l)
    }

    /// `Cov(X_ij, X_kl)` for `X ~ W_d(n, Theta)`.
    pub fn covariance(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let t = |a: usize, b: usize| self.theta.get(a, b);
        self.n * (t(i, k) * t(j, l) + t(i, l) * t(j, k))
    }

    /// One draw from `W_d(n, Theta)` as `Theta^{1/2} (sum_k x_k x_k^T) Theta^{1/2}`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SymMat> {
        if self.n.fract() != 0.0 {
            return Err(Error::UnsupportedSampling(format!(
                "Wishart sampling needs integer degrees of freedom, got {}",
                self.n
            )));
        }
        let d = self.dim();
        let s = self.theta_sqrt.as_matrix();
        let mut acc = DMatrix::<f64>::zeros(d, d);
        let mut x = DVector::<f64>::zeros(d);
        for _ in 0..self.n as usize {
            for v in x.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let g = s * &x;
            acc += &g * g.transpose();
        }
        Ok(SymMat::symmetrize(&acc))
    }
}

/// Second-order jump statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpMoments {
    /// `Cov(X11, X12)`, `Cov(X22, X12)`, `Cov(X11, X22)`; only for `d = 2`.
    pub pair_covariances: Option<[f64; 3]>,
    /// `E[X_ii X_jj]`.
    pub raw_diagonal: DMatrix<f64>,
}

/// Matrix subordinator `L_t = gamma t + compound Poisson Wishart`.
#[derive(Clone, Debug)]
pub struct SubordinatorSpec {
    gamma: SymMat,
    jumps: Option<WishartJumpSpec>,
    eps_moment: f64,
}

impl SubordinatorSpec {
    pub fn new(gamma: SymMat, jumps: Option<WishartJumpSpec>) -> Result<Self> {
        if !gamma.is_psd() {
            return Err(Error::NotPsd { min_eigenvalue: gamma.min_eigenvalue() });
        }
        if let Some(j) = &jumps {
            if j.dim() != gamma.dim() {
                return Err(Error::Shape(format!("drift is {0}x{0}, jumps are {1}x{1}", gamma.dim(), j.dim())));
            }
        }
        let eps_moment = match &jumps {
            Some(j) => {
                let norm = j.theta.spectral_norm();
                if norm > 0.0 {
                    1.0 / (2.0 * norm)
                } else {
                    f64::INFINITY
                }
            }
            None => f64::INFINITY,
        };
        Ok(Self { gamma, jumps, eps_moment })
    }

    /// Drift plus Wishart jumps; `lambda == 0` gives a pure drift.
    pub fn wishart(gamma: SymMat, lambda: f64, n: f64, theta: SymMat) -> Result<Self> {
        let jumps = if lambda == 0.0 { None } else { Some(WishartJumpSpec::new(lambda, n, theta)?) };
        Self::new(gamma, jumps)
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    pub fn gamma(&self) -> &SymMat {
        &self.gamma
    }

    pub fn jumps(&self) -> Option<&WishartJumpSpec> {
        self.jumps.as_ref()
    }

    pub fn eps_moment(&self) -> f64 {
        self.eps_moment
    }

    pub fn lambda(&self) -> f64 {
        self.jumps.as_ref().map_or(0.0, |j| j.lambda)
    }

    /// Whether `Z` lies in the exponential-moment domain, i.e. the largest
    /// eigenvalue of the symmetric part of `Re Z` is below `eps_moment`.
    pub fn in_strip(&self, z: &CMat) -> bool {
        self.eps_moment.is_infinite() || sym_part_max_eigenvalue(&z.map(|v| v.re)) < self.eps_moment
    }

    /// Cumulant transform `log E exp tr(Z L_1)`.
    pub fn cumulant(&self, z: &CMat) -> Result<Complex64> {
        self.check_shape(z)?;
        let zs = (z + z.transpose()) * Complex64::new(0.5, 0.0);
        let drift = trace_product(&self.gamma.to_complex(), &zs);
        let Some(j) = &self.jumps else {
            return Ok(drift);
        };
        let top = sym_part_max_eigenvalue(&zs.map(|v| v.re));
        if top >= self.eps_moment {
            return Err(Error::OutOfStrip(format!(
                "real part has top eigenvalue {top} >= moment radius {}",
                self.eps_moment
            )));
        }
        let w = DMatrix::<Complex64>::identity(zs.nrows(), zs.nrows()) - zs * j.theta.to_complex() * Complex64::new(2.0, 0.0);
        Ok(drift + j.lambda * (det_power(&w, -0.5 * j.n)? - 1.0))
    }

    /// Characteristic exponent `log E exp(i tr(Z L_1))`.
    pub fn char_exponent(&self, z: &CMat) -> Result<Complex64> {
        self.check_shape(z)?;
        let i = Complex64::new(0.0, 1.0);
        let mut acc = Complex64::new(0.0, 0.0);
        let d = z.nrows();
        for a in 0..d {
            for b in 0..d {
                acc += i * self.gamma.get(a, b) * 0.5 * (z[(a, b)] + z[(b, a)]);
            }
        }
        let Some(j) = &self.jumps else {
            return Ok(acc);
        };
        // exponential moments are needed only for the part -Im Z
        let neg_im = z.map(|v| -v.im);
        if !self.eps_moment.is_infinite() && sym_part_max_eigenvalue(&neg_im) >= self.eps_moment {
            return Err(Error::OutOfStrip("imaginary part outside the moment domain".into()));
        }
        let mut w = DMatrix::<Complex64>::identity(d, d);
        for a in 0..d {
            for b in 0..d {
                let mut s = Complex64::new(0.0, 0.0);
                for c in 0..d {
                    s += 0.5 * (z[(a, c)] + z[(c, a)]) * j.theta.get(c, b);
                }
                w[(a, b)] -= 2.0 * i * s;
            }
        }
        Ok(acc + j.lambda * (det_power(&w, -0.5 * j.n)? - 1.0))
    }

    /// Cumulant at a real argument, checking the exact existence condition
    /// `I - 2 Theta^{1/2} sym(S) Theta^{1/2} > 0` instead of the moment radius.
    pub fn cumulant_real(&self, s: &DMatrix<f64>) -> Result<f64> {
        self.check_shape(&s.map(|v| Complex64::new(v, 0.0)))?;
        let ss = (s + s.transpose()) * 0.5;
        let drift = (self.gamma.as_matrix() * &ss).trace();
        let Some(j) = &self.jumps else {
            return Ok(drift);
        };
        let r = j.theta_sqrt.as_matrix();
        let w = DMatrix::<f64>::identity(ss.nrows(), ss.nrows()) - r * &ss * r * 2.0;
        let low = SymMat::symmetrize(&w).min_eigenvalue();
        if low <= 0.0 {
            return Err(Error::OutOfStrip(format!("exponential moment does not exist (eigenvalue {low:e})")));
        }
        Ok(drift + j.lambda * (w.determinant().powf(-0.5 * j.n) - 1.0))
    }

    /// `E L_1 = gamma + lambda n Theta`.
    pub fn mean(&self) -> SymMat {
        match &self.jumps {
            Some(j) => SymMat::symmetrize(&(self.gamma.as_matrix() + j.theta.as_matrix() * (j.lambda * j.n))),
            None => self.gamma.clone(),
        }
    }

    /// Wishart jump covariances and raw moments `E[X_ii X_jj]`.
    pub fn jump_moments(&self) -> JumpMoments {
        let d = self.dim();
        let Some(j) = &self.jumps else {
            return JumpMoments {
                pair_covariances: (d == 2).then_some([0.0; 3]),
                raw_diagonal: DMatrix::zeros(d, d),
            };
        };
        let pair_covariances = (d == 2).then(|| [j.covariance(0, 0, 0, 1), j.covariance(1, 1, 0, 1), j.covariance(0, 0, 1, 1)]);
        let raw_diagonal = DMatrix::from_fn(d, d, |a, b| j.raw_moment(a, a, b, b));
        JumpMoments { pair_covariances, raw_diagonal }
    }

    /// One jump size; a zero matrix for a drift-only driver.
    pub fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SymMat> {
        match &self.jumps {
            Some(j) => j.sample(rng),
            None => Ok(SymMat::zeros(self.dim())),
        }
    }

    fn check_shape(&self, z: &CMat) -> Result<()> {
        let d = self.dim();
        if z.nrows() != d || z.ncols() != d {
            return Err(Error::Shape(format!("argument is {}x{}, driver is {d}x{d}", z.nrows(), z.ncols())));
        }
        Ok(())
    }
}

/// `det(W)^p` with `log det` taken as the sum of principal logarithms of the
/// eigenvalues; integer powers avoid logarithms entirely.
fn det_power(w: &CMat, p: f64) -> Result<Complex64> {
    if p.fract() == 0.0 {
        let det = w.determinant();
        if det.norm() == 0.0 {
            return Err(Error::Branch("determinant vanishes".into()));
        }
        return Ok(det.powi(p as i32));
    }
    let log_det = if w.nrows() <= 2 {
        let det = w.determinant();
        if det.im == 0.0 && det.re <= 0.0 {
            return Err(Error::Branch(format!("determinant {det} on the branch cut")));
        }
        det.ln()
    } else {
        let eig = Schur::new(w.clone())
            .eigenvalues()
            .ok_or_else(|| Error::Numeric("complex Schur decomposition failed".into()))?;
        let mut acc = Complex64::new(0.0, 0.0);
        for e in eig.iter() {
            if e.im == 0.0 && e.re <= 0.0 {
                return Err(Error::Branch(format!("eigenvalue {e} on the branch cut")));
            }
            acc += e.ln();
        }
        acc
    };
    Ok((log_det * p).exp())
}
