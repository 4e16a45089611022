//! Complex log-Gamma via the Lanczos approximation (g = 7, 9 terms).

use num_complex::Complex64;
use std::f64::consts::PI;

const G: f64 = 7.0;
const COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `log Gamma(z)` up to an additive multiple of `2 pi i`; intended for use
/// under `exp`. Poles at non-positive integers give non-finite values.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return ln_gamma(z.conj()).conj();
    }
    if z.re < 0.5 {
        // reflection, with log sin(pi z) written to avoid overflow for large Im z
        let w = PI * z;
        let e = (Complex64::i() * 2.0 * w).exp();
        let ln_sin = -Complex64::i() * w + (1.0 - e).ln() + Complex64::new(0.5, 0.0).ln() + Complex64::new(0.0, PI / 2.0);
        return Complex64::new(PI.ln(), 0.0) - ln_sin - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(COEF[0], 0.0);
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}
