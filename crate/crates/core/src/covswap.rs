//! Covariance swap rates `E[Y^i, Y^j]_T`.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::SymMat;
use crate::model::{LinOpToVec, ModelParams};
use crate::ou_wishart::OUW2Params;

/// `E(Sigma_T) = e^{AT} Sigma0 e^{A^T T} + e^{AT} A^{-1}(E L_1) e^{A^T T} - A^{-1}(E L_1)`.
pub fn expected_sigma(p: &ModelParams, t: f64) -> Result<SymMat> {
    check_t(t)?;
    let el = p.sub.mean();
    let x = p.a.sylvester_solve(el.as_matrix(), false)?;
    let v = p.a.congruence(&(p.sigma0.as_matrix() + &x), t, false)? - x;
    Ok(SymMat::symmetrize(&v))
}

/// `E(Sigma_T^+) = A^{-1}(E(Sigma_T) - T E(L_1) - Sigma0)`.
pub fn expected_integrated_sigma(p: &ModelParams, t: f64) -> Result<SymMat> {
    let es = expected_sigma(p, t)?;
    let el = p.sub.mean();
    let v = p.a.sylvester_solve(&(es.as_matrix() - el.as_matrix() * t - p.sigma0.as_matrix()), false)?;
    Ok(SymMat::symmetrize(&v))
}

/// Row `i` of the leverage operator as a `d x d` coefficient matrix `G` with
/// `rho^i(X) = sum_kl G_kl X_kl`.
fn leverage_row(rho: &LinOpToVec, i: usize, d: usize) -> DMatrix<f64> {
    match rho {
        LinOpToVec::Diagonal(c) => DMatrix::from_fn(d, d, |k, l| if k == i && l == i { c[i] } else { 0.0 }),
        LinOpToVec::General(g) => DMatrix::from_fn(d, d, |k, l| g[(i, l * d + k)]),
    }
}

/// `int rho^i(X) rho^j(X) kappa_L(dX)` from the Wishart raw moments.
pub fn jump_leverage_moment(p: &ModelParams, i: usize, j: usize) -> f64 {
    let Some(w) = p.sub.jumps() else { return 0.0 };
    let d = p.dim();
    let gi = leverage_row(&p.rho, i, d);
    let gj = leverage_row(&p.rho, j, d);
    let mut acc = 0.0;
    for k in 0..d {
        for l in 0..d {
            if gi[(k, l)] == 0.0 {
                continue;
            }
            for m in 0..d {
                for n in 0..d {
                    if gj[(m, n)] != 0.0 {
                        acc += gi[(k, l)] * gj[(m, n)] * w.raw_moment(k, l, m, n);
                    }
                }
            }
        }
    }
    w.lambda() * acc
}

/// Fair rate `E[Y^i, Y^j]_T = E(Sigma_T^+)_{ij} + T int rho^i rho^j d kappa_L`.
pub fn swap_rate(p: &ModelParams, i: usize, j: usize, t: f64) -> Result<f64> {
    let d = p.dim();
    if i >= d || j >= d {
        return Err(Error::Shape(format!("indices ({i}, {j}) out of range for d = {d}")));
    }
    let es = expected_integrated_sigma(p, t)?;
    Ok(es.get(i, j) + t * jump_leverage_moment(p, i, j))
}

/// Cross rate of the two-asset OU-Wishart model in closed form; `a1 != a2`
/// is allowed.
pub fn ouw2_cross_rate(p: &OUW2Params, t: f64) -> Result<f64> {
    check_t(t)?;
    let k = p.a1 + p.a2;
    if k == 0.0 {
        return Err(Error::SingularOperator("a1 + a2 = 0".into()));
    }
    let th = &p.theta;
    let ln = p.lambda * p.n;
    let base = ((k * t).exp_m1() * (p.sigma0.get(0, 1) + ln * th.get(0, 1) / k) - t * ln * th.get(0, 1)) / k;
    if p.rho12 == 0.0 && p.rho21 == 0.0 {
        let jump = t * p.rho1 * p.rho2 * ln * (2.0 * th.get(0, 1).powi(2) + p.n * th.get(0, 0) * th.get(1, 1));
        Ok(base + jump)
    } else {
        let m = p.to_model()?;
        Ok(base + t * jump_leverage_moment(&m, 0, 1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub t: f64,
    /// `sign(K) sqrt(|K| / T)`.
    pub value: f64,
    pub negative: bool,
}

/// `T -> sqrt(K(T) / T)` on a maturity grid; negative rates give a signed
/// root with the flag set.
pub fn normalized_rate_curve(p: &ModelParams, i: usize, j: usize, grid: &[f64]) -> Result<Vec<CurvePoint>> {
    grid.iter()
        .map(|&t| {
            if !(t > 0.0) {
                return Err(Error::Domain(format!("curve maturities must be positive, got {t}")));
            }
            let k = swap_rate(p, i, j, t)?;
            Ok(CurvePoint { t, value: k.signum() * (k.abs() / t).sqrt(), negative: k < 0.0 })
        })
        .collect()
}

pub fn write_curve_csv<W: Write>(curve: &[CurvePoint], out: &mut W) -> Result<()> {
    writeln!(out, "T,normalized_rate")?;
    for c in curve {
        writeln!(out, "{},{}", c.t, c.value)?;
    }
    Ok(())
}

pub fn read_curve_csv<R: BufRead>(input: R) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != "T,normalized_rate" {
                return Err(Error::Parse { line: 1, msg: format!("unexpected header {line}") });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let (a, b) = line.split_once(',').ok_or_else(|| err("expected two fields".into()))?;
        let t = a.trim().parse::<f64>().map_err(|e| err(format!("T: {e}")))?;
        let v = b.trim().parse::<f64>().map_err(|e| err(format!("rate: {e}")))?;
        out.push((t, v));
    }
    Ok(out)
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("maturity must be finite and non-negative, got {t}")));
    }
    Ok(())
}
