use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

// ln √(2π)
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln Γ(x)` for `x > 0` without argument checks.
pub(crate) fn lgamma(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    if x < 0.5 {
        return lgamma(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let mut sum = LANCZOS[0];
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + sum.ln()
}

/// Natural log of Γ(x), `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("ln_gamma", format!("argument must be positive, got {x}")));
    }
    Ok(lgamma(x))
}

/// `ln sin(z)`, with the imaginary part only defined modulo 2π.
fn ln_sin(z: Complex64) -> Complex64 {
    if z.im.abs() < 20.0 {
        return z.sin().ln();
    }
    // sin z ≈ ±e^{∓iz}/(2i) once e^{-2|Im z|} is below double precision
    let half_i = Complex64::new(0.5f64.ln(), PI / 2.0);
    if z.im > 0.0 {
        -Complex64::i() * z + half_i
    } else {
        (-Complex64::i() * z.conj() + half_i).conj()
    }
}

/// Complex `ln Γ(z)`. The imaginary part is not on the principal branch; only
/// `exp(ln_gamma_complex(z))` is meaningful.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        return Complex64::new(PI.ln(), 0.0) - ln_sin(PI * z) - ln_gamma_complex(1.0 - z);
    }
    let z = z - 1.0;
    let mut sum = Complex64::new(LANCZOS[0], 0.0);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + sum.ln()
}

/// `ln (a)_n = ln Γ(a+n) − ln Γ(a)` for `a > 0`, `a + n > 0`.
pub fn ln_pochhammer(a: f64, n: f64) -> Result<f64> {
    if !(a > 0.0) || !(a + n > 0.0) {
        return Err(domain(
            "pochhammer",
            format!("need a > 0 and a + n > 0, got a = {a}, n = {n}"),
        ));
    }
    if n == 0.0 {
        return Ok(0.0);
    }
    if n.fract() == 0.0 && (1.0..=32.0).contains(&n) {
        let mut p = 1.0;
        for k in 0..n as usize {
            p *= a + k as f64;
        }
        return Ok(p.ln());
    }
    Ok(lgamma(a + n) - lgamma(a))
}

/// Rising factorial `Γ(a+n)/Γ(a)` for real `n`.
pub fn pochhammer(a: f64, n: f64) -> Result<f64> {
    ln_pochhammer(a, n).map(f64::exp)
}

pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(domain("beta", format!("arguments must be positive, got ({a}, {b})")));
    }
    Ok(lgamma(a) + lgamma(b) - lgamma(a + b))
}

/// Beta function `Γ(a)Γ(b)/Γ(a+b)`.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    ln_beta(a, b).map(f64::exp)
}

/// Digamma function ψ(x) for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("digamma", format!("argument must be positive, got {x}")));
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    // Bernoulli-number tail: B_{2k}/(2k)
    let tail = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0
                - r * (1.0 / 252.0
                    - r * (1.0 / 240.0 - r * (1.0 / 132.0 - r * (691.0 / 32_760.0 - r / 12.0))))));
    Ok(shift + x.ln() - 0.5 / x - tail)
}
