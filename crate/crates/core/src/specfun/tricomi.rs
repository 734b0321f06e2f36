//! Tricomi confluent hypergeometric function U(a; b; z) for a > 0, z > 0.
//!
//! Uses U = z^{-a}/Γ(a) ∫₀^∞ e^{-τ} τ^{a-1} (1 + τ/z)^{b-a-1} dτ with τ = e^x.
//! The transformed integrand is analytic in a strip and decays
//! double-exponentially on the right, so the trapezoidal rule converges
//! geometrically in the step; the step is halved until successive sums agree.

use super::gamma::lgamma;
use crate::error::{domain, numeric, Result};

const ASYMPTOTIC_Z: f64 = 1e4;

/// `ln U(a; b; z)`.
pub fn ln_tricomi_u(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(domain("tricomi_u", format!("need a > 0, finite b; got a = {a}, b = {b}")));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(domain("tricomi_u", format!("z must be positive, got {z}")));
    }
    if z > ASYMPTOTIC_Z {
        if let Some(v) = asymptotic(a, b, z) {
            return Ok(v);
        }
    }
    quadrature(a, b, z)
}

/// Tricomi U(a; b; z).
pub fn tricomi_u(a: f64, b: f64, z: f64) -> Result<f64> {
    ln_tricomi_u(a, b, z).map(f64::exp)
}

/// `ln lim_{z→0⁺} U(a; b; z) = ln Γ(1-b) − ln Γ(a-b+1)`, finite for b < 1.
pub(crate) fn ln_tricomi_u_at_zero(a: f64, b: f64) -> Result<f64> {
    if !(b < 1.0) || !(a > 0.0) {
        return Err(domain("tricomi_u", format!("U({a}; {b}; 0) is infinite")));
    }
    Ok(lgamma(1.0 - b) - lgamma(a - b + 1.0))
}

fn asymptotic(a: f64, b: f64, z: f64) -> Option<f64> {
    let c = a - b + 1.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..200 {
        let kf = k as f64;
        let next = -term * (a + kf) * (c + kf) / ((kf + 1.0) * z);
        if next.abs() > term.abs() && next != 0.0 {
            return None;
        }
        term = next;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            return (sum > 0.0).then(|| -a * z.ln() + sum.ln());
        }
    }
    None
}

fn softplus(y: f64) -> f64 {
    if y > 0.0 {
        y + (-y).exp().ln_1p()
    } else {
        y.exp().ln_1p()
    }
}

fn quadrature(a: f64, b: f64, z: f64) -> Result<f64> {
    let lnz = z.ln();
    let p = b - a - 1.0;
    let g = |x: f64| a * x - x.exp() + p * softplus(x - lnz);

    // locate the peak on a coarse grid
    let lo = lnz.min(0.0) - 30.0;
    let hi = (a + b.abs() + 10.0).ln() + 4.0;
    let n = ((hi - lo) / 0.05).ceil() as usize;
    let mut peak = f64::NEG_INFINITY;
    for i in 0..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        peak = peak.max(g(x));
    }
    let thresh = peak - 42.0;
    let mut left = lo;
    let mut guard = 0;
    while g(left) > thresh {
        left -= 1.0;
        guard += 1;
        if guard > 100_000 {
            return Err(numeric("tricomi_u", "integrand does not decay on the left"));
        }
    }
    let mut right = hi;
    while g(right) > thresh {
        right += 0.5;
    }
    // trim flat tails so the trapezoid works on the significant region
    while g(left + 1.0) < thresh && left + 1.0 < right {
        left += 1.0;
    }
    while g(right - 0.5) < thresh && right - 0.5 > left {
        right -= 0.5;
    }

    let f = |x: f64| (g(x) - peak).exp();
    let mut h = 0.25;
    let mut count = ((right - left) / h).ceil() as usize;
    h = (right - left) / count as f64;
    let mut sum: f64 = (0..=count).map(|i| f(left + h * i as f64)).sum();
    let mut total = sum * h;
    for level in 0..12 {
        let mid: f64 = (0..count).map(|i| f(left + h * (i as f64 + 0.5))).sum();
        sum += mid;
        count *= 2;
        h *= 0.5;
        let next = sum * h;
        let done = (next - total).abs() <= 1e-14 * next && level >= 1;
        total = next;
        if done {
            return Ok(-a * lnz - lgamma(a) + peak + total.ln());
        }
    }
    Err(numeric(
        "tricomi_u",
        format!("trapezoid did not converge for U({a}; {b}; {z})"),
    ))
}
