//! Two-rate Black-Scholes (Garman-Kohlhagen) calls and implied volatility.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

const VOL_LO: f64 = 1e-6;
const VOL_HI: f64 = 5.0;

fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Call price in domestic currency per unit of foreign.
pub fn gk_call(s0: f64, k: f64, t: f64, r_dom: f64, r_for: f64, sigma: f64) -> f64 {
    let df = (-r_dom * t).exp();
    let fwd = s0 * ((r_dom - r_for) * t).exp();
    let sd = sigma * t.sqrt();
    if sd <= 0.0 {
        return df * (fwd - k).max(0.0);
    }
    let d1 = ((fwd / k).ln() + 0.5 * sd * sd) / sd;
    df * (fwd * norm_cdf(d1) - k * norm_cdf(d1 - sd))
}

pub fn gk_vega(s0: f64, k: f64, t: f64, r_dom: f64, r_for: f64, sigma: f64) -> f64 {
    let fwd = s0 * ((r_dom - r_for) * t).exp();
    let sd = sigma * t.sqrt();
    if sd <= 0.0 {
        return 0.0;
    }
    let d1 = ((fwd / k).ln() + 0.5 * sd * sd) / sd;
    (-r_dom * t).exp() * fwd * norm_pdf(d1) * t.sqrt()
}

/// No-arbitrage band `(max(S0 e^{-r_f T} - K e^{-r_d T}, 0), S0 e^{-r_f T})`.
pub fn call_bounds(s0: f64, k: f64, t: f64, r_dom: f64, r_for: f64) -> (f64, f64) {
    let upper = s0 * (-r_for * t).exp();
    (((upper - k * (-r_dom * t).exp()).max(0.0)), upper)
}

/// Volatility reproducing `price`, by Newton steps kept inside a bisection
/// bracket on `[1e-6, 5]`.
pub fn implied_vol(price: f64, s0: f64, k: f64, t: f64, r_dom: f64, r_for: f64) -> Result<f64> {
    if !(s0 > 0.0 && k > 0.0 && t > 0.0) || !price.is_finite() {
        return Err(Error::Domain(format!("implied vol needs S0, K, T > 0 and a finite price (S0={s0}, K={k}, T={t}, price={price})")));
    }
    let (lo_p, hi_p) = call_bounds(s0, k, t, r_dom, r_for);
    let edge = 1e-14 * hi_p;
    if (price - lo_p).abs() <= edge {
        return Ok(0.0);
    }
    if price < lo_p || price >= hi_p {
        return Err(Error::Arbitrage(format!("call price {price} outside ({lo_p}, {hi_p}) for K={k}, T={t}")));
    }
    let f = |v: f64| gk_call(s0, k, t, r_dom, r_for, v) - price;
    let (mut lo, mut hi) = (VOL_LO, VOL_HI);
    if f(lo) >= 0.0 {
        return Ok(lo);
    }
    if f(hi) < 0.0 {
        return Err(Error::Numeric(format!("implied vol above {VOL_HI} for price {price}, K={k}, T={t}")));
    }
    let fwd = s0 * ((r_dom - r_for) * t).exp();
    let mut v = (2.0 * (fwd / k).ln().abs() / t).sqrt().clamp(0.1, 1.0);
    for _ in 0..200 {
        let fv = f(v);
        if fv == 0.0 {
            return Ok(v);
        }
        if fv < 0.0 {
            lo = v;
        } else {
            hi = v;
        }
        let vega = gk_vega(s0, k, t, r_dom, r_for, v);
        let mut next = if vega > 0.0 { v - fv / vega } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - v).abs() <= 1e-14 * v.max(1e-3) || hi - lo <= 1e-15 {
            return Ok(next);
        }
        v = next;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atm_value_and_inversion() {
        let p = gk_call(1.0, 1.0, 1.0, 0.0, 0.0, 0.2);
        assert!((p - 0.0796557).abs() < 1e-7);
        assert!((implied_vol(p, 1.0, 1.0, 1.0, 0.0, 0.0).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn round_trip_ladder() {
        let (s, t, rd, rf) = (1.3249, 0.75, 0.00676, 0.00604);
        for &k in &[0.9, 1.1, 1.3, 1.5, 1.8] {
            let mut last = 0.0;
            for &v in &[0.02, 0.08, 0.15, 0.4, 1.2] {
                let p = gk_call(s, k, t, rd, rf, v);
                let iv = implied_vol(p, s, k, t, rd, rf).unwrap();
                let back = gk_call(s, k, t, rd, rf, iv);
                assert!((back - p).abs() < 1e-10, "K={k} v={v}");
                if gk_vega(s, k, t, rd, rf, v) > 1e-6 {
                    assert!((iv - v).abs() < 1e-8, "K={k} v={v} iv={iv}");
                }
                assert!(iv >= last);
                last = iv;
            }
        }
    }

    #[test]
    fn band_edges() {
        let (lo, hi) = call_bounds(1.0, 0.9, 1.0, 0.01, 0.0);
        assert_eq!(implied_vol(lo, 1.0, 0.9, 1.0, 0.01, 0.0).unwrap(), 0.0);
        assert!(matches!(implied_vol(lo - 1e-6, 1.0, 0.9, 1.0, 0.01, 0.0), Err(Error::Arbitrage(_))));
        assert!(matches!(implied_vol(hi, 1.0, 0.9, 1.0, 0.01, 0.0), Err(Error::Arbitrage(_))));
    }

    #[test]
    fn zero_vol_hits_lower_bound() {
        let (s, k, t, rd, rf) = (0.8641, 0.85, 2.0, 0.00344, 0.00604);
        let c = gk_call(s, k, t, rd, rf, 1e-9);
        assert!((c - call_bounds(s, k, t, rd, rf).0).abs() < 1e-12);
    }
}
