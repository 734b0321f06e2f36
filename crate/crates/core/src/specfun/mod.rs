//! Special functions used by the closed-form metrics.

mod bessel;
mod gamma;
mod hyp2f1;
mod laguerre;
mod meijer;
mod tricomi;

pub use bessel::{bessel_i, ln_bessel_i};
pub use gamma::{beta, digamma, ln_beta, ln_gamma, ln_gamma_complex, ln_pochhammer, pochhammer};
pub use hyp2f1::{gauss_2f1, gauss_2f1_scaled};
pub use laguerre::{gauss_laguerre, QuadratureRule};
pub use meijer::{meijer_g, meijer_g_detailed, MeijerGEval, MeijerGSpec};
pub use tricomi::{ln_tricomi_u, tricomi_u};

pub(crate) use gamma::lgamma;
pub(crate) use tricomi::ln_tricomi_u_at_zero;

/// `ln(Σ exp(v))` over the finite entries of `v`.
pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
