//! Two-asset OU-Wishart model: diagonal mean reversion, Wishart
//! jumps and leverage on the jumps of `L^11`, `L^22` and `L^12`.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::levy::SubordinatorSpec;
use crate::matrix::{MeanReversionMatrix, SymMat};
use crate::model::{LinOpToVec, ModelParams};
use crate::quad::{integrate, QuadConfig};

type C2 = Matrix2<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OUW2Params {
    pub a1: f64,
    pub a2: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho12: f64,
    pub rho21: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub lambda: f64,
    pub n: f64,
    pub theta: SymMat,
    pub sigma0: SymMat,
    pub r_dom: f64,
    pub r_for1: f64,
    pub r_for2: f64,
    /// Explicit drifts; `None` derives the risk-neutral ones.
    pub mu: Option<[f64; 2]>,
}

/// Coefficients of `det(I - 2(H_y(s) + rho^*(y)) Theta) = b0 + b1 x + b2 x^2`
/// with `x = e^{2as}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MGFCoefficients {
    pub b0: Complex64,
    pub b1: Complex64,
    pub b2: Complex64,
    pub delta: Complex64,
    pub b: C2,
    pub c: C2,
}

fn det2(m: &C2) -> Complex64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

fn tr2(m: &C2) -> Complex64 {
    m[(0, 0)] + m[(1, 1)]
}

impl OUW2Params {
    /// Table-style parameter set with risk-neutral drifts.
    #[allow(clippy::too_many_arguments)]
    pub fn diagonal(
        lambda: f64,
        a: f64,
        rho: [f64; 2],
        gamma: [f64; 2],
        theta: SymMat,
        sigma0: SymMat,
        rates: [f64; 3],
    ) -> Result<Self> {
        let p = Self {
            a1: a,
            a2: a,
            rho1: rho[0],
            rho2: rho[1],
            rho12: 0.0,
            rho21: 0.0,
            gamma1: gamma[0],
            gamma2: gamma[1],
            lambda,
            n: 2.0,
            theta,
            sigma0,
            r_dom: rates[0],
            r_for1: rates[1],
            r_for2: rates[2],
            mu: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.a1, self.a2, self.rho1, self.rho2, self.rho12, self.rho21, self.gamma1, self.gamma2, self.lambda, self.n, self.r_dom,
            self.r_for1, self.r_for2,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("parameters must be finite".into()));
        }
        if !(self.a1 < 0.0 && self.a2 < 0.0) {
            return Err(Error::Validation(format!("mean reversion must be negative (a1 = {}, a2 = {})", self.a1, self.a2)));
        }
        if self.gamma1 < 0.0 || self.gamma2 < 0.0 {
            return Err(Error::Validation("drift gamma must be non-negative".into()));
        }
        if self.lambda < 0.0 {
            return Err(Error::Validation(format!("jump intensity must be non-negative, got {}", self.lambda)));
        }
        if self.n <= 1.0 {
            return Err(Error::Validation(format!("degrees of freedom must exceed 1, got {}", self.n)));
        }
        if self.theta.dim() != 2 || self.sigma0.dim() != 2 {
            return Err(Error::Shape("Theta and Sigma0 must be 2x2".into()));
        }
        if !self.theta.is_psd() {
            return Err(Error::NotPsd { min_eigenvalue: self.theta.min_eigenvalue() });
        }
        if !self.sigma0.is_positive_definite() {
            return Err(Error::NotPsd { min_eigenvalue: self.sigma0.min_eigenvalue() });
        }
        Ok(())
    }

    pub fn eps_moment(&self) -> f64 {
        let norm = self.theta.spectral_norm();
        if self.lambda == 0.0 || norm == 0.0 {
            f64::INFINITY
        } else {
            0.5 / norm
        }
    }

    /// Common mean reversion when `a1 == a2`.
    pub fn common_a(&self) -> Result<f64> {
        if self.a1 != self.a2 {
            return Err(Error::WrongBranch(format!("a1 = {} differs from a2 = {}", self.a1, self.a2)));
        }
        Ok(self.a1)
    }

    /// Risk-neutral drifts for the FX pairs.
    pub fn fx_drifts(&self) -> Result<(f64, f64)> {
        let t = &self.theta;
        let det_t = t.get(0, 0) * t.get(1, 1) - t.get(0, 1) * t.get(0, 1);
        let drift = |r_for: f64, lin: f64, cross: f64, label: &str| -> Result<f64> {
            // sym([[rho_i, rho_ij], [0, 0]]) against Theta
            let d = 1.0 - 2.0 * lin - cross * cross * det_t;
            if self.lambda > 0.0 && !(d > 0.0 && 1.0 - lin > 0.0) {
                return Err(Error::MartingaleInfeasible(format!("{label}: jump exponential moment does not exist")));
            }
            Ok(self.r_dom - r_for - self.lambda * (d.powf(-0.5 * self.n) - 1.0))
        };
        let mu1 = drift(self.r_for1, self.rho1 * t.get(0, 0) + self.rho12 * t.get(0, 1), self.rho12, "asset 1")?;
        let mu2 = drift(self.r_for2, self.rho2 * t.get(1, 1) + self.rho21 * t.get(0, 1), self.rho21, "asset 2")?;
        Ok((mu1, mu2))
    }

    /// Explicit drifts if set, otherwise the risk-neutral ones.
    pub fn drifts(&self) -> Result<[f64; 2]> {
        match self.mu {
            Some(m) => Ok(m),
            None => {
                let (a, b) = self.fx_drifts()?;
                Ok([a, b])
            }
        }
    }

    /// `sym(rho^*(y))`.
    fn rho_star_sym(&self, y: [Complex64; 2]) -> C2 {
        let off = 0.5 * (self.rho12 * y[0] + self.rho21 * y[1]);
        C2::new(self.rho1 * y[0], off, off, self.rho2 * y[1])
    }

    fn theta_c(&self) -> C2 {
        let t = &self.theta;
        C2::new(c(t.get(0, 0)), c(t.get(0, 1)), c(t.get(0, 1)), c(t.get(1, 1)))
    }

    fn y_tilde(y: [Complex64; 2]) -> C2 {
        C2::new(y[0] * y[0] - y[0], y[0] * y[1], y[0] * y[1], y[1] * y[1] - y[1])
    }

    /// Equal-mean-reversion coefficients.
    pub fn coefficients(&self, y: [Complex64; 2]) -> Result<MGFCoefficients> {
        let a = self.common_a()?;
        let theta = self.theta_c();
        let b = Self::y_tilde(y) * theta / c(4.0 * a);
        let cm = self.rho_star_sym(y) * theta;
        let bc = b - cm;
        let b2 = 4.0 * det2(&b);
        let b1 = -8.0 * det2(&b) + 4.0 * tr2(&b) * tr2(&cm) - 4.0 * tr2(&(b * cm)) - 2.0 * tr2(&b);
        let b0 = 1.0 + 4.0 * det2(&bc) + 2.0 * tr2(&bc);
        let delta = (4.0 * b0 * b2 - b1 * b1).sqrt();
        Ok(MGFCoefficients { b0, b1, b2, delta, b, c: cm })
    }

    fn check_driver_domain(&self, z_at: impl Fn(f64) -> C2, t: f64) -> Result<()> {
        let eps = self.eps_moment();
        if eps.is_infinite() {
            return Ok(());
        }
        for s in [0.0, t] {
            let z = z_at(s);
            let (p, q, r) = (z[(0, 0)].re, 0.5 * (z[(0, 1)].re + z[(1, 0)].re), z[(1, 1)].re);
            let top = 0.5 * (p + r) + (0.25 * (p - r) * (p - r) + q * q).sqrt();
            if top >= eps {
                return Err(Error::OutOfStrip(format!("driver cumulant undefined at s = {s} (eigenvalue {top} >= {eps})")));
            }
        }
        Ok(())
    }

    /// Terms of `log E exp(y^T Y_t)` not involving the jump integral.
    fn log_mgf_continuous(&self, y: [Complex64; 2], t: f64) -> Result<Complex64> {
        let mu = self.drifts()?;
        let yt = Self::y_tilde(y);
        let s0 = &self.sigma0;
        let a = [self.a1, self.a2];
        let g = [self.gamma1, self.gamma2];
        let mut acc = y[0] * mu[0] * t + y[1] * mu[1] * t;
        for i in 0..2 {
            for j in 0..2 {
                let k = a[i] + a[j];
                acc += 0.5 * yt[(i, j)] * s0.get(i, j) * (k * t).exp_m1() / k;
            }
            let k = 2.0 * a[i];
            acc += 0.5 * g[i] * yt[(i, i)] * ((k * t).exp_m1() / k - t) / k;
        }
        Ok(acc)
    }

    /// Closed-form joint transform `E exp(y1 Y^1_t + y2 Y^2_t)` for `a1 == a2`
    /// and `n = 2`.
    pub fn mgf2_closed(&self, y: [Complex64; 2], t: f64) -> Result<Complex64> {
        Ok(self.log_mgf2_closed(y, t)?.exp())
    }

    pub fn log_mgf2_closed(&self, y: [Complex64; 2], t: f64) -> Result<Complex64> {
        let a = self.common_a()?;
        if self.n != 2.0 {
            return Err(Error::WrongBranch(format!("closed form needs n = 2, got {}", self.n)));
        }
        let cont = self.log_mgf_continuous(y, t)?;
        if self.lambda == 0.0 || t == 0.0 {
            return Ok(cont);
        }
        let co = self.coefficients(y)?;
        let yt = Self::y_tilde(y);
        let rs = self.rho_star_sym(y);
        self.check_driver_domain(|s| yt * c((2.0 * a * s).exp_m1() / (4.0 * a)) + rs, t)?;
        let j = jump_integral(co.b0, co.b1, co.b2, a, t)?;
        Ok(cont + self.lambda * (j - t))
    }

    /// Closed-form marginal transform of asset `i` (0 or 1); valid for any
    /// `a1`, `a2` and `n = 2`.
    pub fn mgf1_closed(&self, i: usize, y: Complex64, t: f64) -> Result<Complex64> {
        Ok(self.log_mgf1_closed(i, y, t)?.exp())
    }

    pub fn log_mgf1_closed(&self, i: usize, y: Complex64, t: f64) -> Result<Complex64> {
        if i > 1 {
            return Err(Error::Shape(format!("asset index {i} out of range")));
        }
        if self.n != 2.0 {
            return Err(Error::WrongBranch(format!("closed form needs n = 2, got {}", self.n)));
        }
        let mut yy = [c(0.0); 2];
        yy[i] = y;
        let cont = self.log_mgf_continuous(yy, t)?;
        if self.lambda == 0.0 || t == 0.0 {
            return Ok(cont);
        }
        let th = &self.theta;
        let det_t = th.get(0, 0) * th.get(1, 1) - th.get(0, 1) * th.get(0, 1);
        let (a, tii, lin, cross) = if i == 0 {
            (self.a1, th.get(0, 0), self.rho1 * th.get(0, 0) + self.rho12 * th.get(0, 1), self.rho12)
        } else {
            (self.a2, th.get(1, 1), self.rho2 * th.get(1, 1) + self.rho21 * th.get(0, 1), self.rho21)
        };
        let k = y * y - y;
        let b1 = -k * tii / (2.0 * a);
        let b0 = 1.0 - b1 - 2.0 * y * lin - y * y * cross * cross * det_t;
        let rs = self.rho_star_sym(yy);
        self.check_driver_domain(
            |s| {
                let mut z = rs;
                z[(i, i)] += k * ((2.0 * a * s).exp_m1() / (4.0 * a));
                z
            },
            t,
        )?;
        let j = jump_integral(b0, b1, c(0.0), a, t)?;
        Ok(cont + self.lambda * (j - t))
    }

    /// Joint transform by quadrature of the jump integral; any `a1`, `a2`, `n`.
    pub fn log_mgf2_quadrature(&self, y: [Complex64; 2], t: f64, cfg: &QuadConfig) -> Result<Complex64> {
        let cont = self.log_mgf_continuous(y, t)?;
        if self.lambda == 0.0 || t == 0.0 {
            return Ok(cont);
        }
        let yt = Self::y_tilde(y);
        let rs = self.rho_star_sym(y);
        let a = [self.a1, self.a2];
        let theta = self.theta_c();
        let z_at = |s: f64| -> C2 {
            let mut z = rs;
            for i in 0..2 {
                for j in 0..2 {
                    let k = a[i] + a[j];
                    z[(i, j)] += 0.5 * yt[(i, j)] * (k * s).exp_m1() / k;
                }
            }
            z
        };
        self.check_driver_domain(z_at, t)?;
        let p = -0.5 * self.n;
        let integral = integrate(
            |s| {
                let d = det2(&(C2::identity() - z_at(s) * theta * c(2.0)));
                if p == -1.0 {
                    Ok(d.inv() - 1.0)
                } else {
                    Ok((d.ln() * p).exp() - 1.0)
                }
            },
            0.0,
            t,
            cfg,
        )?;
        Ok(cont + self.lambda * integral.value)
    }

    /// Closed form when available, quadrature otherwise.
    pub fn log_mgf2(&self, y: [Complex64; 2], t: f64, cfg: &QuadConfig) -> Result<Complex64> {
        if self.a1 == self.a2 && self.n == 2.0 {
            self.log_mgf2_closed(y, t)
        } else {
            log::debug!("joint transform by quadrature (a1 = {}, a2 = {}, n = {})", self.a1, self.a2, self.n);
            self.log_mgf2_quadrature(y, t, cfg)
        }
    }

    /// Marginal transform; closed form for `n = 2`, quadrature otherwise.
    pub fn log_mgf1(&self, i: usize, y: Complex64, t: f64, cfg: &QuadConfig) -> Result<Complex64> {
        if self.n == 2.0 {
            self.log_mgf1_closed(i, y, t)
        } else {
            let mut yy = [c(0.0); 2];
            yy[i] = y;
            self.log_mgf2_quadrature(yy, t, cfg)
        }
    }

    /// Embedding into the general model. The general model routes the drift
    /// `gamma` through the leverage term, so `mu` is shifted by `rho(gamma)`.
    pub fn to_model(&self) -> Result<ModelParams> {
        self.validate()?;
        let mu = self.drifts()?;
        let rho = if self.rho12 == 0.0 && self.rho21 == 0.0 {
            LinOpToVec::Diagonal(vec![self.rho1, self.rho2])
        } else {
            let mut g = DMatrix::zeros(2, 4);
            g[(0, 0)] = self.rho1;
            g[(0, 2)] = self.rho12;
            g[(1, 1)] = self.rho21;
            g[(1, 3)] = self.rho2;
            LinOpToVec::General(g)
        };
        let gamma = SymMat::from_diagonal(&[self.gamma1, self.gamma2]);
        let shift = rho.apply(gamma.as_matrix());
        let sub = SubordinatorSpec::wishart(gamma, self.lambda, self.n, self.theta.clone())?;
        ModelParams::new(
            DVector::from_vec(vec![mu[0] - shift[0], mu[1] - shift[1]]),
            MeanReversionMatrix::from_diagonal(&[self.a1, self.a2])?,
            LinOpToVec::martingale_beta(2),
            rho,
            self.sigma0.clone(),
            DVector::zeros(2),
            sub,
        )
    }
}

/// `int_0^t ds / D(e^{2as})` with `D(x) = b0 + b1 x + b2 x^2`.
///
/// Writing `x = e^{2as}`, the integral is
/// `(2at - ln(D(X)/D(1)) / 2 - (b1/2) int_1^X dx/D) / (2 a b0)`. Both pieces
/// are expressed through `Log((X - r)/(1 - r))` for the roots `r` of `D`;
/// these arguments are affine in `x` along the real segment, so principal
/// logarithms are continuous in the parameters.
pub fn jump_integral(b0: Complex64, b1: Complex64, b2: Complex64, a: f64, t: f64) -> Result<Complex64> {
    let scale = b0.norm().max(b1.norm()).max(b2.norm());
    if b0.norm() <= 1e-14 * scale || b0.norm() == 0.0 {
        return Err(Error::DegenerateCoefficient(format!("b0 = {b0} vanishes")));
    }
    let x_end = (2.0 * a * t).exp();
    let d1 = b0 + b1 + b2;
    let dx = b0 + b1 * x_end + b2 * x_end * x_end;
    if d1.norm() == 0.0 || dx.norm() == 0.0 {
        return Err(Error::DegenerateCoefficient("determinant vanishes on the integration path".into()));
    }
    let (log_ratio, int_inv) = if b2.norm() <= 1e-14 * scale {
        if b1.norm() <= 1e-14 * scale {
            (c(0.0), c(x_end - 1.0) / b0)
        } else {
            let w = dx / d1;
            check_cut(w)?;
            let l = w.ln();
            (l, l / b1)
        }
    } else {
        let disc = b1 * b1 - 4.0 * b2 * b0;
        let mut sq = disc.sqrt();
        if (b1.conj() * sq).re < 0.0 {
            sq = -sq;
        }
        let q = -0.5 * (b1 + sq);
        if q.norm() == 0.0 {
            return Err(Error::DegenerateCoefficient("quadratic with vanishing roots".into()));
        }
        let r1 = q / b2;
        let r2 = b0 / q;
        let w1 = (x_end - r1) / (1.0 - r1);
        let w2 = (x_end - r2) / (1.0 - r2);
        check_cut(w1)?;
        check_cut(w2)?;
        let (l1, l2) = (w1.ln(), w2.ln());
        let m = 0.5 * (r1 + r2);
        let half = 0.5 * (r1 - r2);
        let dist = segment_distance(m, x_end, 1.0);
        let int_inv = if half.norm() < 0.1 * dist {
            // near double root: expand 1/((x-m)^2 - half^2) in powers of half^2
            let h2 = half * half;
            let (u0, u1) = (1.0 - m, x_end - m);
            let mut acc = c(0.0);
            let mut hp = c(1.0);
            for k in 0..12 {
                let e = 2 * k + 1;
                acc += hp / (e as f64) * (u0.powi(-e) - u1.powi(-e));
                hp *= h2;
            }
            acc / b2
        } else {
            (l1 - l2) / (b2 * (r1 - r2))
        };
        (l1 + l2, int_inv)
    };
    Ok((2.0 * a * t - 0.5 * log_ratio - 0.5 * b1 * int_inv) / (2.0 * a * b0))
}

fn check_cut(w: Complex64) -> Result<()> {
    if w.im == 0.0 && w.re <= 0.0 {
        return Err(Error::Branch(format!("determinant changes sign along the path (ratio {w})")));
    }
    Ok(())
}

/// Distance from `z` to the real segment between `lo` and `hi`.
fn segment_distance(z: Complex64, lo: f64, hi: f64) -> f64 {
    let x = z.re.clamp(lo.min(hi), lo.max(hi));
    ((z.re - x).powi(2) + z.im * z.im).sqrt()
}
