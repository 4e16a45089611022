//! Fourier-inversion pricing of European payoffs on `S = S0 e^Y`.
//!
//! With `s = -log S0` and damping `R`,
//! `price = e^{-<R,s> - rT} / (2 pi)^d * int e^{-i<u,s>} Phi(R + iu) fhat(iR - u) du`.
//! Integrands are conjugate-symmetric, so only half of the domain is integrated.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::gamma::ln_gamma;
use crate::model::{DomainGate, ModelParams};
use crate::ou_wishart::OUW2Params;
use crate::quad::{integrate, integrate_vec, QuadConfig};

type MgfFn<'a> = dyn Fn(&[Complex64]) -> Result<Complex64> + Send + Sync + 'a;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A log moment generating function of `Y_T` at a fixed maturity, together
/// with the Gaussian envelope matrix `M` such that
/// `|Phi(R + iu)| <= Phi(R) exp(-u^T M u / 2)`.
pub struct MgfEval<'a> {
    dim: usize,
    eval: Box<MgfFn<'a>>,
    envelope: DMatrix<f64>,
}

impl<'a> MgfEval<'a> {
    pub fn new(dim: usize, eval: Box<MgfFn<'a>>, envelope: DMatrix<f64>) -> Result<Self> {
        if envelope.nrows() != dim || envelope.ncols() != dim {
            return Err(Error::Shape(format!("envelope must be {dim}x{dim}")));
        }
        Ok(Self { dim, eval, envelope })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn envelope(&self) -> &DMatrix<f64> {
        &self.envelope
    }

    pub fn log_mgf(&self, y: &[Complex64]) -> Result<Complex64> {
        if y.len() != self.dim {
            return Err(Error::Shape(format!("argument of length {} for a {}-dimensional transform", y.len(), self.dim)));
        }
        (self.eval)(y)
    }

    /// Marginal of asset `i` of a two-asset OU-Wishart model.
    pub fn ouw2_marginal(p: &'a OUW2Params, i: usize, t: f64) -> Result<Self> {
        let m = p.to_model()?.gaussian_envelope(t)?;
        let cfg = QuadConfig::default();
        let env = DMatrix::from_element(1, 1, m.get(i, i));
        Self::new(1, Box::new(move |y| p.log_mgf1(i, y[0], t, &cfg)), env)
    }

    /// Joint transform of a two-asset OU-Wishart model.
    pub fn ouw2_joint(p: &'a OUW2Params, t: f64) -> Result<Self> {
        let m = p.to_model()?.gaussian_envelope(t)?;
        let cfg = QuadConfig::default();
        Self::new(2, Box::new(move |y| p.log_mgf2([y[0], y[1]], t, &cfg)), m.into_inner())
    }

    /// Joint transform of a general model.
    pub fn model_joint(p: &'a ModelParams, t: f64) -> Result<Self> {
        let m = p.gaussian_envelope(t)?;
        let cfg = QuadConfig::default();
        Self::new(p.dim(), Box::new(move |y| p.log_mgf_with(y, t, DomainGate::Driver, &cfg)), m.into_inner())
    }

    /// Marginal of asset `i` of a general model.
    pub fn model_marginal(p: &'a ModelParams, i: usize, t: f64) -> Result<Self> {
        let m = p.gaussian_envelope(t)?;
        let cfg = QuadConfig::default();
        let env = DMatrix::from_element(1, 1, m.get(i, i));
        Self::new(1, Box::new(move |y| Ok(p.marginal_mgf_quadrature(i, y[0], t, &cfg)?.ln())), env)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payoff {
    /// `(e^x - K)^+`
    Call { strike: f64 },
    /// `(K - sum_j e^{x_j})^+`
    BasketPut { strike: f64, dim: usize },
    /// `(e^{x_1} - e^{x_2} - K)^+`
    SpreadCall { strike: f64 },
}

/// Fourier transform `fhat(z) = int e^{i<z,x>} f(x) dx` of a payoff and its
/// damping region.
#[derive(Clone, Debug, PartialEq)]
pub struct PayoffTransform {
    pub payoff: Payoff,
    pub description: String,
}

const MARGIN: f64 = 1e-3;

fn check_strike(k: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!("strike must be positive, got {k}")));
    }
    Ok(())
}

pub fn transform_call(strike: f64) -> Result<PayoffTransform> {
    check_strike(strike)?;
    Ok(PayoffTransform { payoff: Payoff::Call { strike }, description: format!("call K={strike}") })
}

pub fn transform_basket_put(strike: f64, dim: usize) -> Result<PayoffTransform> {
    check_strike(strike)?;
    if dim == 0 {
        return Err(Error::Domain("basket needs at least one asset".into()));
    }
    Ok(PayoffTransform { payoff: Payoff::BasketPut { strike, dim }, description: format!("basket put K={strike} d={dim}") })
}

pub fn transform_spread_call(strike: f64) -> Result<PayoffTransform> {
    check_strike(strike)?;
    Ok(PayoffTransform { payoff: Payoff::SpreadCall { strike }, description: format!("spread call K={strike}") })
}

impl PayoffTransform {
    pub fn dim(&self) -> usize {
        match self.payoff {
            Payoff::Call { .. } => 1,
            Payoff::BasketPut { dim, .. } => dim,
            Payoff::SpreadCall { .. } => 2,
        }
    }

    /// Damping vectors `R = Im z` for which `fhat` exists.
    pub fn admits(&self, r: &[f64]) -> bool {
        if r.len() != self.dim() || r.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self.payoff {
            Payoff::Call { .. } => r[0] > 1.0,
            Payoff::BasketPut { .. } => r.iter().all(|&v| v < -MARGIN),
            Payoff::SpreadCall { .. } => r[0] > 1.0 && r[1] < 0.0 && r[0] + r[1] > 1.0,
        }
    }

    pub fn default_damping(&self) -> Vec<f64> {
        match self.payoff {
            Payoff::Call { .. } => vec![1.75],
            Payoff::BasketPut { dim, .. } => vec![-0.75; dim],
            Payoff::SpreadCall { .. } => vec![2.0, -0.5],
        }
    }

    /// `log fhat(z)`, modulo `2 pi i`.
    pub fn log_fhat(&self, z: &[Complex64]) -> Complex64 {
        let i = Complex64::i();
        match self.payoff {
            Payoff::Call { strike } => {
                let iz = i * z[0];
                (1.0 + iz) * strike.ln() - iz.ln() - (1.0 + iz).ln()
            }
            Payoff::BasketPut { strike, .. } => {
                let sum: Complex64 = z.iter().map(|&v| i * v).sum();
                let mut acc = (1.0 + sum) * strike.ln() - ln_gamma(2.0 + sum);
                for &v in z {
                    acc += ln_gamma(i * v);
                }
                acc
            }
            Payoff::SpreadCall { strike } => {
                let (iz1, iz2) = (i * z[0], i * z[1]);
                (1.0 + iz1 + iz2) * strike.ln() - iz1.ln() - (1.0 + iz1).ln() + ln_gamma(iz2) + ln_gamma(-iz1 - iz2 - 1.0)
                    - ln_gamma(-iz1 - 1.0)
            }
        }
    }

    pub fn fhat(&self, z: &[Complex64]) -> Complex64 {
        self.log_fhat(z).exp()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PricingConfig {
    /// Target absolute price accuracy (quadrature plus truncation).
    pub tol: f64,
    pub max_evals: usize,
    /// Largest truncation radius tried before giving up.
    pub u_max: f64,
    pub initial_panels: usize,
}

impl Default for PricingConfig {
    fn default() -> Self {
        Self { tol: 1e-9, max_evals: 1 << 22, u_max: 1e7, initial_panels: 16 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PriceResult {
    pub price: f64,
    pub quad_error: f64,
    pub evaluations: usize,
}

/// `int_U^inf exp(-m u^2 / 2) du`.
fn gauss_tail(u: f64, m: f64) -> f64 {
    (PI / (2.0 * m)).sqrt() * erfc(u * (m / 2.0).sqrt())
}

/// Smallest doubling of a start radius with `bound(U) <= target`.
fn truncation_radius(bound: impl Fn(f64) -> f64, start: f64, target: f64, u_max: f64) -> Result<f64> {
    let mut u = start.max(1.0);
    while bound(u) > target {
        u *= 2.0;
        if u > u_max {
            return Err(Error::Quadrature(format!("truncation bound {target:e} unattainable below U = {u_max}")));
        }
    }
    Ok(u)
}

fn damped_mgf(mgf: &MgfEval, r: &[f64]) -> Result<f64> {
    let y: Vec<Complex64> = r.iter().map(|&v| c(v)).collect();
    let v = mgf.log_mgf(&y).map_err(|e| Error::Damping(format!("Phi(R) not finite for R = {r:?}: {e}")))?;
    let phi = v.re.exp();
    if !phi.is_finite() || phi <= 0.0 {
        return Err(Error::Damping(format!("Phi(R) not finite for R = {r:?}")));
    }
    Ok(phi)
}

fn quad_cfg(tol: f64, panels: usize, max_evals: usize) -> QuadConfig {
    QuadConfig { abs_tol: tol, rel_tol: 0.0, max_evals, initial_panels: panels }
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Generic Fourier price for `d = 1` or `d = 2`.
pub fn price(
    mgf: &MgfEval,
    payoff: &PayoffTransform,
    r: &[f64],
    s: &[f64],
    t: f64,
    r_dom: f64,
    cfg: &PricingConfig,
) -> Result<PriceResult> {
    let d = payoff.dim();
    if mgf.dim() != d || r.len() != d || s.len() != d {
        return Err(Error::Shape(format!("payoff dimension {d} does not match inputs")));
    }
    if !payoff.admits(r) {
        return Err(Error::Damping(format!("R = {r:?} outside the damping region of {}", payoff.description)));
    }
    let phi_r = damped_mgf(mgf, r)?;
    let pre = (-r.iter().zip(s).map(|(a, b)| a * b).sum::<f64>() - r_dom * t).exp() / (2.0 * PI).powi(d as i32);
    let integrand = |u: &[f64]| -> Result<Complex64> {
        let y: Vec<Complex64> = r.iter().zip(u).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let z: Vec<Complex64> = r.iter().zip(u).map(|(&a, &b)| Complex64::new(-b, a)).collect();
        let phase: f64 = u.iter().zip(s).map(|(a, b)| a * b).sum();
        Ok((mgf.log_mgf(&y)? + payoff.log_fhat(&z) - Complex64::new(0.0, phase)).exp())
    };
    // sup of |fhat| along the damped line, sampled with a safety factor
    let mut f0 = 0.0f64;
    for k in 0..=8 {
        for axis in 0..d {
            let mut z: Vec<Complex64> = r.iter().map(|&a| Complex64::new(0.0, a)).collect();
            z[axis] = Complex64::new(-(k as f64) * 0.5, r[axis]);
            f0 = f0.max(payoff.fhat(&z).norm());
        }
    }
    f0 *= 2.0;
    let m = min_eigenvalue(mgf.envelope()).max(0.0);
    let target = 0.01 * cfg.tol;
    match d {
        1 => {
            let poly = match payoff.payoff {
                Payoff::Call { strike } => Some(strike.powf(1.0 - r[0])),
                _ => None,
            };
            let bound = |u: f64| {
                let g = if m > 0.0 { 2.0 * pre * phi_r * f0 * gauss_tail(u, m) } else { f64::INFINITY };
                let p = poly.map_or(f64::INFINITY, |k| 2.0 * pre * phi_r * k / u);
                g.min(p)
            };
            let u_cut = truncation_radius(bound, 4.0 / m.sqrt(), target, cfg.u_max)?;
            let qc = quad_cfg(0.5 * cfg.tol / (2.0 * pre), cfg.initial_panels, cfg.max_evals);
            let res = integrate(|u| integrand(&[u]), 0.0, u_cut, &qc)?;
            Ok(PriceResult { price: 2.0 * pre * res.value.re, quad_error: 2.0 * pre * res.error + bound(u_cut), evaluations: res.evals })
        }
        2 => {
            if m <= 0.0 {
                return Err(Error::Quadrature("degenerate Gaussian envelope for a two-dimensional payoff".into()));
            }
            let side = (2.0 * PI / m).sqrt();
            let bound = |u: f64| 2.0 * pre * phi_r * f0 * 4.0 * gauss_tail(u, m) * side;
            let u_cut = truncation_radius(bound, 4.0 / m.sqrt(), target, cfg.u_max)?;
            let outer_tol = 0.5 * cfg.tol / (2.0 * pre);
            let inner_tol = outer_tol / (2.0 * u_cut);
            let mut evals = 0usize;
            let mut inner_err = 0.0f64;
            let res = integrate(
                |u1| {
                    let r = integrate(
                        |u2| integrand(&[u1, u2]),
                        -u_cut,
                        u_cut,
                        &quad_cfg(inner_tol, cfg.initial_panels, cfg.max_evals),
                    )?;
                    evals += r.evals;
                    inner_err = inner_err.max(r.error);
                    Ok(r.value)
                },
                0.0,
                u_cut,
                &quad_cfg(outer_tol, cfg.initial_panels.min(8), cfg.max_evals),
            )?;
            Ok(PriceResult {
                price: 2.0 * pre * res.value.re,
                quad_error: 2.0 * pre * (res.error + inner_err * u_cut) + bound(u_cut),
                evaluations: evals,
            })
        }
        _ => Err(Error::Quadrature(format!("Fourier pricing supports d <= 2, got {d}"))),
    }
}

/// Calls on one asset for several strikes, sharing the transform evaluations.
pub fn price_calls(
    mgf: &MgfEval,
    strikes: &[f64],
    r: f64,
    s: f64,
    t: f64,
    r_dom: f64,
    cfg: &PricingConfig,
) -> Result<Vec<PriceResult>> {
    if mgf.dim() != 1 {
        return Err(Error::Shape("call ladder needs a one-dimensional transform".into()));
    }
    for &k in strikes {
        check_strike(k)?;
    }
    if !(r > 1.0) {
        return Err(Error::Damping(format!("call damping must exceed 1, got {r}")));
    }
    if strikes.is_empty() {
        return Ok(Vec::new());
    }
    let phi_r = damped_mgf(mgf, &[r])?;
    let pre = (-r * s - r_dom * t).exp() / (2.0 * PI);
    let m = mgf.envelope()[(0, 0)].max(0.0);
    let kmax = strikes.iter().map(|&k| k.powf(1.0 - r)).fold(0.0, f64::max);
    let f0 = kmax / (r * (r - 1.0));
    let bound = |u: f64| {
        let g = if m > 0.0 { 2.0 * pre * phi_r * f0 * gauss_tail(u, m) } else { f64::INFINITY };
        g.min(2.0 * pre * phi_r * kmax / u)
    };
    let u_cut = truncation_radius(bound, 4.0 / m.sqrt(), 0.01 * cfg.tol, cfg.u_max)?;
    let log_k: Vec<f64> = strikes.iter().map(|k| k.ln()).collect();
    let qc = quad_cfg(0.5 * cfg.tol / (2.0 * pre), cfg.initial_panels, cfg.max_evals);
    let res = integrate_vec(
        |u, out| {
            let y = Complex64::new(r, u);
            // iz at z = iR - u
            let iz = Complex64::new(-r, -u);
            let base = mgf.log_mgf(&[y])? - iz.ln() - (1.0 + iz).ln() - Complex64::new(0.0, u * s);
            for (o, &lk) in out.iter_mut().zip(&log_k) {
                *o = (base + (1.0 + iz) * lk).exp();
            }
            Ok(())
        },
        0.0,
        u_cut,
        strikes.len(),
        &qc,
    )?;
    let tail = bound(u_cut);
    Ok(res
        .value
        .iter()
        .map(|v| PriceResult { price: 2.0 * pre * v.re, quad_error: 2.0 * pre * res.error + tail, evaluations: res.evals })
        .collect())
}

/// Zero-strike spread `(S^1_T - S^2_T)^+` with `s_i = -log S^i_0`, `R > 1`.
pub fn price_zero_strike_spread(mgf2: &MgfEval, r: f64, s1: f64, s2: f64, t: f64, r_dom: f64, cfg: &PricingConfig) -> Result<PriceResult> {
    Ok(price_zero_strike_spreads(mgf2, r, s1, &[s2], t, r_dom, cfg)?.remove(0))
}

/// Zero-strike spreads against several second initial values.
pub fn price_zero_strike_spreads(
    mgf2: &MgfEval,
    r: f64,
    s1: f64,
    s2: &[f64],
    t: f64,
    r_dom: f64,
    cfg: &PricingConfig,
) -> Result<Vec<PriceResult>> {
    if mgf2.dim() != 2 {
        return Err(Error::Shape("zero-strike spread needs a two-dimensional transform".into()));
    }
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::Damping(format!("zero-strike spread damping must exceed 1, got {r}")));
    }
    if s2.is_empty() {
        return Ok(Vec::new());
    }
    let phi_r = damped_mgf(mgf2, &[r, 1.0 - r])?;
    let pres: Vec<f64> = s2.iter().map(|&b| (r * (b - s1) - b - r_dom * t).exp() / (2.0 * PI)).collect();
    let pre = pres.iter().cloned().fold(0.0, f64::max);
    let env = mgf2.envelope();
    let m = (env[(0, 0)] - env[(0, 1)] - env[(1, 0)] + env[(1, 1)]).max(0.0);
    let f0 = 1.0 / (r * (r - 1.0));
    let bound = |u: f64| {
        let g = if m > 0.0 { 2.0 * pre * phi_r * f0 * gauss_tail(u, m) } else { f64::INFINITY };
        g.min(2.0 * pre * phi_r / u)
    };
    let start = if m > 0.0 { 4.0 / m.sqrt() } else { 16.0 };
    let u_cut = truncation_radius(bound, start, 0.01 * cfg.tol, cfg.u_max)?;
    let qc = quad_cfg(0.5 * cfg.tol / (2.0 * pre), cfg.initial_panels, cfg.max_evals);
    let res = integrate_vec(
        |u, out| {
            let y = Complex64::new(r, u);
            let base = mgf2.log_mgf(&[y, 1.0 - y])? - y.ln() - (y - 1.0).ln();
            for (o, &b) in out.iter_mut().zip(s2) {
                *o = (base + Complex64::new(0.0, u * (b - s1))).exp();
            }
            Ok(())
        },
        0.0,
        u_cut,
        s2.len(),
        &qc,
    )?;
    let tail = bound(u_cut);
    Ok(res
        .value
        .iter()
        .zip(&pres)
        .map(|(v, &p)| PriceResult { price: 2.0 * p * v.re, quad_error: 2.0 * p * res.error + tail, evaluations: res.evals })
        .collect())
}

/// First damping in `candidates` with a finite transform.
pub fn pick_damping(mgf: &MgfEval, payoff: &PayoffTransform, candidates: &[Vec<f64>]) -> Result<Vec<f64>> {
    for r in candidates {
        if payoff.admits(r) && damped_mgf(mgf, r).is_ok() {
            return Ok(r.clone());
        }
    }
    Err(Error::Damping(format!("no admissible damping among {candidates:?} for {}", payoff.description)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::SubordinatorSpec;
    use crate::matrix::{MeanReversionMatrix, SymMat};
    use crate::model::LinOpToVec;
    use nalgebra::DVector;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn bs_call(s: f64, k: f64, r_dom: f64, r_for: f64, vol: f64, t: f64) -> f64 {
        let n = Normal::new(0.0, 1.0).unwrap();
        let sd = vol * t.sqrt();
        let d1 = ((s / k).ln() + (r_dom - r_for) * t) / sd + 0.5 * sd;
        s * (-r_for * t).exp() * n.cdf(d1) - k * (-r_dom * t).exp() * n.cdf(d1 - sd)
    }

    fn step_a() -> OUW2Params {
        OUW2Params::diagonal(
            0.774,
            -2.392,
            [-3.741, -0.494],
            [0.027, 0.0],
            SymMat::from_2x2(0.011, 0.022, 0.063),
            SymMat::from_2x2(0.019, 0.013, 0.017),
            [0.00676, 0.00604, 0.00344],
        )
        .unwrap()
    }

    #[test]
    fn call_transform_values() {
        let f = transform_call(1.0).unwrap();
        assert!((f.fhat(&[Complex64::new(0.0, 2.0)]) - 0.5).norm() < 1e-15);
        let k = 1.3249;
        let fk = transform_call(k).unwrap();
        for z in [Complex64::new(0.3, 1.5), Complex64::new(-7.0, 2.5)] {
            let expected = (Complex64::new(1.0, 0.0) + Complex64::i() * z) * k.ln();
            assert!((fk.fhat(&[z]) - expected.exp() * f.fhat(&[z])).norm() < 1e-14);
        }
        assert!(transform_call(0.0).is_err());
        assert!(f.admits(&[1.5]) && !f.admits(&[1.0]));
    }

    #[test]
    fn basket_reduces_to_put_in_one_dimension() {
        let b = transform_basket_put(1.2, 1).unwrap();
        let call = transform_call(1.2).unwrap();
        for z in [Complex64::new(0.4, -0.5), Complex64::new(-12.0, -2.0)] {
            assert!((b.fhat(&[z]) - call.fhat(&[z])).norm() < 1e-12 * call.fhat(&[z]).norm());
        }
        let b2 = transform_basket_put(1.0, 2).unwrap();
        let z = [Complex64::new(0.3, -0.4), Complex64::new(-1.1, -0.7)];
        let zs = [z[1], z[0]];
        assert!((b2.fhat(&z) - b2.fhat(&zs)).norm() < 1e-14);
    }

    #[test]
    fn spread_region() {
        let s = transform_spread_call(0.1).unwrap();
        assert!(s.admits(&[2.0, -0.5]));
        assert!(!s.admits(&[1.2, -0.5]));
        for u in [0.0, 1.0, 30.0] {
            let v = s.fhat(&[Complex64::new(-u, 2.0), Complex64::new(0.5 * u, -0.5)]);
            assert!(v.re.is_finite() && v.im.is_finite());
        }
    }

    fn gaussian_model(sig: f64, a: f64) -> ModelParams {
        let sub = SubordinatorSpec::new(SymMat::zeros(1), None).unwrap();
        let mut p = ModelParams::new(
            DVector::zeros(1),
            MeanReversionMatrix::from_diagonal(&[a]).unwrap(),
            LinOpToVec::martingale_beta(1),
            LinOpToVec::zero(1),
            SymMat::from_diagonal(&[sig]),
            DVector::zeros(1),
            sub,
        )
        .unwrap();
        p.mu = p.martingale_mu(0.01, &[0.0]).unwrap();
        p
    }

    #[test]
    fn gaussian_limit_black_scholes() {
        let p = gaussian_model(0.04, -1.0);
        let view = MgfEval::model_joint(&p, 1.0).unwrap();
        let f = transform_call(1.0).unwrap();
        let res = price(&view, &f, &[1.75], &[0.0], 1.0, 0.01, &PricingConfig::default()).unwrap();
        let var: f64 = 0.04 * (-2.0f64).exp_m1() / -2.0;
        assert!((var - 0.017293).abs() < 1e-6);
        let bs = bs_call(1.0, 1.0, 0.01, 0.0, var.sqrt(), 1.0);
        assert!((res.price - bs).abs() < 1e-8 * bs, "{} {bs}", res.price);
        assert!(res.quad_error >= 0.0);
    }

    #[test]
    fn ladder_matches_single_prices_and_parity() {
        let p = step_a();
        let t = 0.5;
        let view = MgfEval::ouw2_marginal(&p, 0, t).unwrap();
        let s0: f64 = 1.3249;
        let strikes = [1.2, 1.3, 1.45];
        let cfg = PricingConfig::default();
        let ladder = price_calls(&view, &strikes, 1.75, -s0.ln(), t, p.r_dom, &cfg).unwrap();
        for (k, lp) in strikes.iter().zip(&ladder) {
            let single = price(&view, &transform_call(*k).unwrap(), &[1.75], &[-s0.ln()], t, p.r_dom, &cfg).unwrap();
            assert!((single.price - lp.price).abs() < 1e-9);
            let put = price(&view, &transform_basket_put(*k, 1).unwrap(), &[-0.75], &[-s0.ln()], t, p.r_dom, &cfg).unwrap();
            let parity = s0 * (-p.r_for1 * t).exp() - k * (-p.r_dom * t).exp();
            assert!((lp.price - put.price - parity).abs() < 1e-8, "{} {} {parity}", lp.price, put.price);
        }
        assert!(ladder[0].price > ladder[1].price && ladder[1].price > ladder[2].price);
        let deep = price_calls(&view, &[1e-6], 1.75, -s0.ln(), t, p.r_dom, &cfg).unwrap();
        assert!((deep[0].price - (s0 * (-p.r_for1 * t).exp() - 1e-6 * (-p.r_dom * t).exp())).abs() < 1e-7);
    }

    #[test]
    fn damping_invariance_calls_and_zero_strike() {
        let p = step_a();
        let t = 0.5;
        let cfg = PricingConfig::default();
        let view = MgfEval::ouw2_marginal(&p, 0, t).unwrap();
        let s1 = -(1.3249f64).ln();
        let v: Vec<f64> = [1.5, 1.75, 2.5].iter().map(|&r| price_calls(&view, &[1.3], r, s1, t, p.r_dom, &cfg).unwrap()[0].price).collect();
        assert!((v[0] - v[1]).abs() < 1e-7 && (v[1] - v[2]).abs() < 1e-7, "{v:?}");
        let joint = MgfEval::ouw2_joint(&p, t).unwrap();
        let s2 = -(0.86 * 1.5333f64).ln();
        let z: Vec<f64> = [1.5, 2.5, 5.0].iter().map(|&r| price_zero_strike_spread(&joint, r, s1, s2, t, p.r_dom, &cfg).unwrap().price).collect();
        assert!((z[0] - z[1]).abs() < 1e-7 && (z[1] - z[2]).abs() < 1e-7, "{z:?}");
    }

    #[test]
    fn spread_continuity_at_zero_strike() {
        let p = step_a();
        let t = 0.5;
        let cfg = PricingConfig { tol: 1e-8, ..Default::default() };
        let joint = MgfEval::ouw2_joint(&p, t).unwrap();
        let (s1, s2) = (-(1.3249f64).ln(), -(0.8 * 1.5333f64).ln());
        let zero = price_zero_strike_spread(&joint, 1.5, s1, s2, t, p.r_dom, &cfg).unwrap().price;
        let spread = price(&joint, &transform_spread_call(1e-8).unwrap(), &[2.0, -0.5], &[s1, s2], t, p.r_dom, &cfg).unwrap();
        assert!((zero - spread.price).abs() < 1e-4, "{zero} {}", spread.price);
        let wider = price(&joint, &transform_spread_call(0.05).unwrap(), &[2.0, -0.5], &[s1, s2], t, p.r_dom, &cfg).unwrap();
        assert!(wider.price < spread.price && wider.price >= 0.0);
    }

    #[test]
    fn identical_assets_zero_spread() {
        // S^1 = S^2 pathwise: the joint transform is Phi_1(y1 + y2)
        let sub = SubordinatorSpec::wishart(SymMat::zeros(1), 0.5, 2.0, SymMat::from_diagonal(&[0.02])).unwrap();
        let mut p = ModelParams::new(
            DVector::zeros(1),
            MeanReversionMatrix::from_diagonal(&[-1.0]).unwrap(),
            LinOpToVec::martingale_beta(1),
            LinOpToVec::Diagonal(vec![-1.0]),
            SymMat::from_diagonal(&[0.03]),
            DVector::zeros(1),
            sub,
        )
        .unwrap();
        p.mu = p.martingale_mu(0.01, &[0.0]).unwrap();
        let m = p.gaussian_envelope(1.0).unwrap().get(0, 0);
        let cfg = QuadConfig::default();
        let view = MgfEval::new(
            2,
            Box::new(|y: &[Complex64]| p.log_mgf_with(&[y[0] + y[1]], 1.0, DomainGate::Driver, &cfg)),
            DMatrix::from_element(2, 2, m),
        )
        .unwrap();
        let cfg = PricingConfig { tol: 1e-6, u_max: 1e9, ..Default::default() };
        let v = price_zero_strike_spread(&view, 1.5, 0.1, 0.1, 1.0, 0.01, &cfg).unwrap();
        assert!(v.price.abs() < 1e-6, "{}", v.price);
    }

    #[test]
    fn damping_errors() {
        let p = step_a();
        let view = MgfEval::ouw2_marginal(&p, 0, 0.5).unwrap();
        let f = transform_call(1.3).unwrap();
        assert!(matches!(price(&view, &f, &[0.8], &[0.0], 0.5, 0.0, &PricingConfig::default()), Err(Error::Damping(_))));
        assert!(matches!(price(&view, &f, &[60.0], &[0.0], 0.5, 0.0, &PricingConfig::default()), Err(Error::Damping(_))));
        assert_eq!(pick_damping(&view, &f, &[vec![60.0], vec![1.75]]).unwrap(), vec![1.75]);
    }
}
