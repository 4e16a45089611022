//! Benchmark models: bivariate Variance Gamma with a common Gamma clock, and
//! two independent VG processes run on an integrated Gamma-OU clock.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, Poisson, StandardNormal};

use crate::error::{Error, Result};

/// `r_dom` and the two foreign rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rates {
    pub r_dom: f64,
    pub r_for: [f64; 2],
}

impl Rates {
    fn log_carry(&self, y: [Complex64; 2], t: f64) -> Complex64 {
        (y[0] * (self.r_dom - self.r_for[0]) + y[1] * (self.r_dom - self.r_for[1])) * t
    }
}

/// Common-clock VG: `Y^i = (r_dom - r_for_i + w_i) t + theta_i G_t + sigma_i W^i_{G_t}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VgParams {
    pub theta: [f64; 2],
    pub sigma: [f64; 2],
    pub nu: f64,
}

/// `Y^i_t = X^i_{Z_t}` with independent VG processes `X^i` and
/// `Z_t = int_0^t z_s ds`, `dz = 2 alpha z ds + dN_{-2 alpha s}`, `z_0 = 1`,
/// `N` compound Poisson with intensity `vartheta` and `Exp(xi)` jumps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VgOuParams {
    pub theta: [f64; 2],
    pub sigma: [f64; 2],
    pub nu: [f64; 2],
    pub vartheta: f64,
    pub alpha: f64,
    pub xi: f64,
}

impl VgParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.iter().all(|s| *s > 0.0) && self.nu > 0.0) || !self.theta.iter().all(|v| v.is_finite()) {
            return Err(Error::Validation("VG needs sigma > 0 and nu > 0".into()));
        }
        for i in 0..2 {
            if !(1.0 - self.theta[i] * self.nu - 0.5 * self.sigma[i].powi(2) * self.nu > 0.0) {
                return Err(Error::MartingaleInfeasible(format!("asset {}: E e^{{X}} does not exist", i + 1)));
            }
        }
        Ok(())
    }

    /// `w_i = log(1 - theta_i nu - sigma_i^2 nu / 2) / nu`.
    pub fn w(&self, i: usize) -> f64 {
        (1.0 - self.theta[i] * self.nu - 0.5 * self.sigma[i].powi(2) * self.nu).ln() / self.nu
    }

    /// One draw of `Y_t`.
    pub fn sample<R: Rng + ?Sized>(&self, rates: &Rates, t: f64, rng: &mut R) -> Result<[f64; 2]> {
        let g = Gamma::new(t / self.nu, self.nu).map_err(|e| Error::Domain(e.to_string()))?.sample(rng);
        let mut y = [0.0; 2];
        for (i, yi) in y.iter_mut().enumerate() {
            let z: f64 = StandardNormal.sample(rng);
            *yi = (rates.r_dom - rates.r_for[i] + self.w(i)) * t + self.theta[i] * g + self.sigma[i] * g.sqrt() * z;
        }
        Ok(y)
    }
}

impl VgOuParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.iter().all(|s| *s > 0.0) && self.nu.iter().all(|n| *n > 0.0)) {
            return Err(Error::Validation("VG needs sigma > 0 and nu > 0".into()));
        }
        if !(self.alpha < 0.0 && self.xi > 0.0 && self.vartheta > 0.0) {
            return Err(Error::Validation("clock needs alpha < 0, xi > 0, vartheta > 0".into()));
        }
        Ok(())
    }

    /// One draw of `Y_t` without drift normalization.
    pub fn sample_raw<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> Result<[f64; 2]> {
        let z = self.sample_clock(t, rng)?;
        let mut y = [0.0; 2];
        if z <= 0.0 {
            return Ok(y);
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let g = Gamma::new(z / self.nu[i], self.nu[i]).map_err(|e| Error::Domain(e.to_string()))?.sample(rng);
            let n: f64 = StandardNormal.sample(rng);
            *yi = self.theta[i] * g + self.sigma[i] * g.sqrt() * n;
        }
        Ok(y)
    }

    /// Exact draw of the integrated clock `Z_t`.
    pub fn sample_clock<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> Result<f64> {
        let k = -2.0 * self.alpha;
        let mut z = -(-k * t).exp_m1() / k;
        let rate = self.vartheta * k * t;
        let count = if rate > 0.0 { Poisson::new(rate).map_err(|e| Error::Domain(e.to_string()))?.sample(rng) as usize } else { 0 };
        let size = Exp::new(self.xi).map_err(|e| Error::Domain(e.to_string()))?;
        for _ in 0..count {
            let tau: f64 = rng.random::<f64>() * t;
            let j: f64 = size.sample(rng);
            z += j * -(-k * (t - tau)).exp_m1() / k;
        }
        Ok(z)
    }

    /// `log E e^{y Z_t}`, analytic for `Re y < -2 alpha xi / (1 - e^{2 alpha t})`.
    pub fn log_clock_mgf(&self, y: Complex64, t: f64) -> Result<Complex64> {
        let (a, xi, vt) = (self.alpha, self.xi, self.vartheta);
        let q = -(2.0 * a * t).exp_m1();
        let cpt = -2.0 * a * xi;
        let arg = cpt - q * y;
        if !(arg.re > 0.0) {
            return Err(Error::OutOfStrip(format!("clock transform undefined at y = {y}")));
        }
        let lin = y * q / (-2.0 * a);
        let w = y - cpt;
        let jump = if w.norm() < 1e-6 * cpt {
            // removable singularity at y = -2 alpha xi
            let g1 = t - xi * q / arg;
            let g2 = -xi * q * q / (arg * arg);
            2.0 * a * vt * (g1 + 0.5 * g2 * w)
        } else {
            2.0 * a * vt * (t * y - xi * cpt.ln() + xi * arg.ln()) / w
        };
        Ok(lin + jump)
    }
}

fn vg_base(theta: f64, sigma: f64, nu: f64, y: Complex64) -> Result<Complex64> {
    let b = 1.0 - nu * (y * theta + 0.5 * y * y * sigma * sigma);
    if !(b.re > 0.0) {
        return Err(Error::OutOfStrip(format!("VG transform undefined at y = {y}")));
    }
    Ok(b)
}

/// Log of the common-clock VG moment generating function.
pub fn vg_log_mgf(p: &VgParams, rates: &Rates, y: [Complex64; 2], t: f64) -> Result<Complex64> {
    let b = 1.0 - p.nu * (0..2).map(|i| y[i] * p.theta[i] + 0.5 * y[i] * y[i] * p.sigma[i].powi(2)).sum::<Complex64>();
    if !(b.re > 0.0) {
        return Err(Error::OutOfStrip(format!("VG transform undefined at y = ({}, {})", y[0], y[1])));
    }
    Ok(rates.log_carry(y, t) + (y[0] * p.w(0) + y[1] * p.w(1)) * t - t / p.nu * b.ln())
}

pub fn vg_mgf(p: &VgParams, rates: &Rates, y: [Complex64; 2], t: f64) -> Result<Complex64> {
    Ok(vg_log_mgf(p, rates, y, t)?.exp())
}

/// `log E e^{<y, Y_t>}` of the time-changed model before normalization.
pub fn vgou_log_mgf_raw(p: &VgOuParams, y: [Complex64; 2], t: f64) -> Result<Complex64> {
    let mut kappa = Complex64::new(0.0, 0.0);
    for i in 0..2 {
        kappa -= vg_base(p.theta[i], p.sigma[i], p.nu[i], y[i])?.ln() / p.nu[i];
    }
    p.log_clock_mgf(kappa, t)
}

/// Risk-neutral transform `e^{<y, r_dom - r_for> t} Phi(1,0)^{-y1} Phi(0,1)^{-y2} Phi(y1,y2)`.
pub fn vgou_log_mgf(p: &VgOuParams, rates: &Rates, y: [Complex64; 2], t: f64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let n1 = vgou_log_mgf_raw(p, [one, zero], t)?;
    let n2 = vgou_log_mgf_raw(p, [zero, one], t)?;
    Ok(rates.log_carry(y, t) - y[0] * n1 - y[1] * n2 + vgou_log_mgf_raw(p, y, t)?)
}

pub fn vgou_mgf(p: &VgOuParams, rates: &Rates, y: [Complex64; 2], t: f64) -> Result<Complex64> {
    Ok(vgou_log_mgf(p, rates, y, t)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const RATES: Rates = Rates { r_dom: 0.00676, r_for: [0.00604, 0.00344] };

    fn row1() -> VgParams {
        VgParams { theta: [-0.360, -0.327], sigma: [0.090, 0.093], nu: 0.106 }
    }

    fn row2() -> VgOuParams {
        VgOuParams { theta: [-1.470, -2.190], sigma: [0.001, 0.050], nu: [0.022, 0.001], vartheta: 0.468, alpha: -42.140, xi: 1.747 }
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn normalizations() {
        let t = 0.7;
        let p = row1();
        p.validate().unwrap();
        assert!((vg_mgf(&p, &RATES, [c(0.0), c(0.0)], t).unwrap() - 1.0).norm() < 1e-15);
        let e1 = vg_mgf(&p, &RATES, [c(1.0), c(0.0)], t).unwrap();
        assert!((e1 - ((RATES.r_dom - RATES.r_for[0]) * t).exp()).norm() < 1e-14);
        let e2 = vg_mgf(&p, &RATES, [c(0.0), c(1.0)], t).unwrap();
        assert!((e2 - ((RATES.r_dom - RATES.r_for[1]) * t).exp()).norm() < 1e-14);
        let q = row2();
        q.validate().unwrap();
        assert!((vgou_mgf(&q, &RATES, [c(0.0), c(0.0)], t).unwrap() - 1.0).norm() < 1e-15);
        let e1 = vgou_mgf(&q, &RATES, [c(1.0), c(0.0)], t).unwrap();
        assert!((e1 - ((RATES.r_dom - RATES.r_for[0]) * t).exp()).norm() < 1e-13);
        let e2 = vgou_mgf(&q, &RATES, [c(0.0), c(1.0)], t).unwrap();
        assert!((e2 - ((RATES.r_dom - RATES.r_for[1]) * t).exp()).norm() < 1e-13);
        let v = vg_mgf(&p, &RATES, [c(0.5), c(0.5)], 1.0).unwrap();
        assert!(v.re > 0.0 && v.re.is_finite() && v.im == 0.0);
    }

    #[test]
    fn clock_mean_and_singularity() {
        let q = row2();
        let t = 0.5;
        // E Z_t = (1 - e^{-kt})/k + vartheta/xi (t - (1 - e^{-kt})/k), k = -2 alpha
        let k = -2.0 * q.alpha;
        let g = -(-k * t).exp_m1() / k;
        let mean = g + q.vartheta / q.xi * (t - g);
        let h = 1e-5;
        let d = (q.log_clock_mgf(c(h), t).unwrap() - q.log_clock_mgf(c(-h), t).unwrap()).re / (2.0 * h);
        assert!((d - mean).abs() < 1e-8, "{d} {mean}");
        let cpt = -2.0 * q.alpha * q.xi;
        let ts = 0.01;
        let at = q.log_clock_mgf(c(cpt), ts).unwrap();
        let near = q.log_clock_mgf(c(cpt * (1.0 + 1e-4)), ts).unwrap();
        assert!((at - near).norm() < 1e-3 * at.norm());
        assert!(matches!(q.log_clock_mgf(c(1e4), t), Err(Error::OutOfStrip(_))));
    }

    #[test]
    fn clock_matches_monte_carlo() {
        let q = row2();
        let t = 0.5;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let v = (-2.0 * q.sample_clock(t, &mut rng).unwrap()).exp();
            s += v;
            s2 += v * v;
        }
        let m = s / n as f64;
        let se = ((s2 / n as f64 - m * m) / n as f64).sqrt();
        let exact = q.log_clock_mgf(c(-2.0), t).unwrap().re.exp();
        assert!((m - exact).abs() < 4.0 * se, "{m} {exact} {se}");
    }

    #[test]
    fn strip_errors() {
        assert!(matches!(vg_mgf(&row1(), &RATES, [c(-40.0), c(0.0)], 1.0), Err(Error::OutOfStrip(_))));
        assert!(matches!(vgou_mgf(&row2(), &RATES, [c(0.0), c(-400.0)], 1.0), Err(Error::OutOfStrip(_))));
    }
}
