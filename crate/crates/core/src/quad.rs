//! Adaptive Gauss-Kronrod (10/21 point) quadrature for complex, optionally
//! vector-valued integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_280_069_240,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Points per Gauss-Kronrod panel.
pub const POINTS_PER_PANEL: usize = 21;

#[derive(Clone, Copy, Debug)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
    /// Number of equal panels the interval is split into before adapting.
    pub initial_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-11,
            rel_tol: 1e-12,
            max_evals: 1 << 15,
            initial_panels: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<Complex64>,
    error: f64,
}

fn gk21<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [Complex64]) -> Result<(Vec<Complex64>, f64)>
where
    F: FnMut(f64, &mut [Complex64]) -> Result<()>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = vec![Complex64::new(0.0, 0.0); dim];
    let mut gauss = vec![Complex64::new(0.0, 0.0); dim];
    for (k, (&x, &w)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for &sign in nodes {
            f(center + sign * half * x, buf)?;
            for c in 0..dim {
                kron[c] += buf[c] * w;
                if k % 2 == 1 {
                    gauss[c] += buf[c] * WG[k / 2];
                }
            }
        }
    }
    let mut err = 0.0f64;
    for c in 0..dim {
        kron[c] *= half;
        gauss[c] *= half;
        err = err.max((kron[c] - gauss[c]).norm());
    }
    if kron.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
    }
    Ok((kron, err))
}

/// Integrates a vector-valued integrand on `[a, b]`. The integrand writes its
/// `dim` components into the supplied buffer; the error control uses the
/// largest component error.
pub fn integrate_vec<F>(mut f: F, a: f64, b: f64, dim: usize, cfg: &QuadConfig) -> Result<QuadResult<Vec<Complex64>>>
where
    F: FnMut(f64, &mut [Complex64]) -> Result<()>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("infinite interval [{a}, {b}]")));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    if a == b {
        return Ok(QuadResult { value: buf, error: 0.0, evals: 0 });
    }
    let n0 = cfg.initial_panels.max(1);
    let mut panels = Vec::with_capacity(n0 + 16);
    let mut evals = 0;
    for i in 0..n0 {
        let pa = a + (b - a) * i as f64 / n0 as f64;
        let pb = if i + 1 == n0 { b } else { a + (b - a) * (i + 1) as f64 / n0 as f64 };
        let (value, error) = gk21(&mut f, pa, pb, dim, &mut buf)?;
        evals += POINTS_PER_PANEL;
        panels.push(Panel { a: pa, b: pb, value, error });
    }
    loop {
        let mut total = vec![Complex64::new(0.0, 0.0); dim];
        let mut total_err = 0.0;
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            for c in 0..dim {
                total[c] += p.value[c];
            }
            total_err += p.error;
            if p.error > panels[worst].error {
                worst = i;
            }
        }
        let scale = total.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if total_err <= cfg.abs_tol.max(cfg.rel_tol * scale) {
            return Ok(QuadResult { value: total, error: total_err, evals });
        }
        if evals + 2 * POINTS_PER_PANEL > cfg.max_evals {
            return Err(Error::Quadrature(format!(
                "evaluation budget {} exhausted with error estimate {total_err:e}",
                cfg.max_evals
            )));
        }
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::Quadrature(format!("cannot subdivide [{}, {}] further", p.a, p.b)));
        }
        let (lv, le) = gk21(&mut f, p.a, mid, dim, &mut buf)?;
        let (rv, re) = gk21(&mut f, mid, p.b, dim, &mut buf)?;
        evals += 2 * POINTS_PER_PANEL;
        panels.push(Panel { a: p.a, b: mid, value: lv, error: le });
        panels.push(Panel { a: mid, b: p.b, value: rv, error: re });
    }
}

/// Scalar complex integrand on `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult<Complex64>>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let r = integrate_vec(
        |x, out| {
            out[0] = f(x)?;
            Ok(())
        },
        a,
        b,
        1,
        cfg,
    )?;
    Ok(QuadResult { value: r.value[0], error: r.error, evals: r.evals })
}

/// Real integrand on `[a, b]`.
pub fn integrate_real<F>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let r = integrate(|x| Ok(Complex64::new(f(x)?, 0.0)), a, b, cfg)?;
    Ok(QuadResult { value: r.value.re, error: r.error, evals: r.evals })
}
