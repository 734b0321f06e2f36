use std::f64::consts::PI;

use super::gamma::lgamma;
use crate::error::{domain, numeric, Result};

/// `ln I_ν(x)`; stays finite where `I_ν(x)` itself overflows.
pub fn ln_bessel_i(nu: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain("bessel_i", format!("x must be finite and >= 0, got {x}")));
    }
    if !(nu > -1.0) || !nu.is_finite() {
        return Err(domain("bessel_i", format!("order must exceed -1, got {nu}")));
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 { 0.0 } else { f64::NEG_INFINITY });
    }
    if x <= 40f64.max(2.0 * nu * nu) {
        series(nu, x)
    } else {
        asymptotic(nu, x)
    }
}

/// Modified Bessel function of the first kind.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    ln_bessel_i(nu, x).map(f64::exp)
}

fn series(nu: f64, x: f64) -> Result<f64> {
    const RESCALE: f64 = 1e250;
    let ln_t0 = nu * (0.5 * x).ln() - lgamma(nu + 1.0);
    let q = 0.25 * x * x;
    let mut offset = 0.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..100_000 {
        let kf = k as f64;
        term *= q / ((kf + 1.0) * (kf + 1.0 + nu));
        sum += term;
        if sum > RESCALE {
            sum /= RESCALE;
            term /= RESCALE;
            offset += RESCALE.ln();
        }
        // terms decrease once k exceeds x/2, after which the tail is geometric
        if term < 1e-17 * sum && kf > 0.5 * x {
            return Ok(ln_t0 + offset + sum.ln());
        }
    }
    Err(numeric("bessel_i", format!("series did not converge for nu = {nu}, x = {x}")))
}

fn asymptotic(nu: f64, x: f64) -> Result<f64> {
    let mu4 = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu4 - odd * odd) / (8.0 * k as f64 * x);
        if next == 0.0 {
            break;
        }
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    if !(sum > 0.0) {
        return Err(numeric("bessel_i", format!("asymptotic series failed at nu = {nu}, x = {x}")));
    }
    Ok(x - 0.5 * (2.0 * PI * x).ln() + sum.ln())
}
