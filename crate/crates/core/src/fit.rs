//! Mixture-Gamma representations of physical channels.
//!
//! The double-shadowed α-κ-μ channel (α-κ-μ multipath whose mean SNR is
//! scaled by a unit-mean Gamma variate of shape m) is fitted by Gauss-Laguerre
//! quadrature of the shadowing integral after the substitution
//! y = (1+κ)μ x^{α/2} / (γ̄z)^{α/2}. Each node becomes one Gamma term with
//! shape m, so the fit is exact in the limit K → ∞.

use serde::{Deserialize, Serialize};

use crate::error::{domain, numeric, Error, Result};
use crate::mg::{mg_mse_values, GammaTerm, GridSpec, MixtureGamma};
use crate::quad::integrate_exp;
use crate::specfun::{gauss_laguerre, lgamma, ln_bessel_i};

/// Physical parameters of the double-shadowed α-κ-μ channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel")]
pub struct DoubleShadowedAkm {
    /// Non-linearity of the propagation medium.
    pub alpha: f64,
    /// Dominant-to-scattered power ratio.
    pub kappa: f64,
    /// Number of multipath clusters.
    pub mu: f64,
    /// Nakagami-m index of the shadowing on the mean SNR.
    pub m: f64,
    /// Inverse-Nakagami-m index of the multiplicative shadowing.
    pub m_s: f64,
    /// Average-SNR scale, linear.
    pub gamma_bar: f64,
}

#[derive(Deserialize)]
struct RawChannel {
    alpha: f64,
    kappa: f64,
    mu: f64,
    m: f64,
    m_s: f64,
    gamma_bar: f64,
}

impl TryFrom<RawChannel> for DoubleShadowedAkm {
    type Error = Error;
    fn try_from(r: RawChannel) -> Result<Self> {
        DoubleShadowedAkm::new(r.alpha, r.kappa, r.mu, r.m, r.m_s, r.gamma_bar)
    }
}

impl DoubleShadowedAkm {
    pub fn new(alpha: f64, kappa: f64, mu: f64, m: f64, m_s: f64, gamma_bar: f64) -> Result<Self> {
        let named = [
            ("alpha", alpha),
            ("kappa", kappa),
            ("mu", mu),
            ("m", m),
            ("gamma_bar", gamma_bar),
        ];
        for (name, v) in named {
            if !(v > 0.0) || !v.is_finite() {
                return Err(domain("DoubleShadowedAkm", format!("{name} must be positive, got {v}")));
            }
        }
        if !(m_s > 1.0) || !m_s.is_finite() {
            return Err(domain("DoubleShadowedAkm", format!("m_s must exceed 1, got {m_s}")));
        }
        Ok(Self {
            alpha,
            kappa,
            mu,
            m,
            m_s,
            gamma_bar,
        })
    }

    /// Copy with a different average SNR.
    pub fn with_gamma_bar(&self, gamma_bar: f64) -> Result<Self> {
        Self::new(self.alpha, self.kappa, self.mu, self.m, self.m_s, gamma_bar)
    }
}

/// Which y-exponent the quadrature weights use.
///
/// `Derived` follows from the change of variables; `Printed` is
/// α(1+μ)/4 − 2m/α − 1, which coincides with it only at α = 2 and is kept for
/// comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExponentVariant {
    #[default]
    Derived,
    Printed,
}

impl ExponentVariant {
    fn exponent(self, ch: &DoubleShadowedAkm) -> f64 {
        let (alpha, mu, m) = (ch.alpha, ch.mu, ch.m);
        match self {
            Self::Derived => 0.5 * (mu - 1.0) - 2.0 * m / alpha,
            Self::Printed => alpha * (1.0 + mu) / 4.0 - 2.0 * m / alpha - 1.0,
        }
    }
}

/// A fitted mixture together with its score against the reference density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub mg: MixtureGamma,
    pub k: usize,
    pub mse: f64,
    pub grid_spec: GridSpec,
    pub grid: String,
    pub used_exponent_variant: ExponentVariant,
    /// Σ θ_j Γ(m) ζ_j^{−m} before renormalization; 1 up to quadrature error for
    /// the derived exponent.
    pub raw_mass: f64,
}

/// `ln` of the composite (α-κ-μ × Gamma-shadowed mean) SNR density at `x`.
/// `ch.m_s` is not used.
pub fn ln_composite_pdf_reference(ch: &DoubleShadowedAkm, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("composite_pdf_reference", format!("x must be positive, got {x}")));
    }
    let DoubleShadowedAkm {
        alpha,
        kappa,
        mu,
        m,
        gamma_bar,
        ..
    } = *ch;
    let a = alpha * (1.0 + mu) / 4.0;
    let ln_c = (alpha * mu / 2.0).ln() + m * m.ln() + 0.5 * (1.0 - mu) * kappa.ln()
        + 0.5 * (1.0 + mu) * kappa.ln_1p()
        - lgamma(m)
        - mu * kappa
        - a * gamma_bar.ln();
    let lnx = x.ln();
    let base = ln_c + (a - 1.0) * lnx;
    let bessel_scale = 2.0 * mu * (kappa * (1.0 + kappa)).sqrt();
    let ln_f = |t: f64| {
        // u = (x / (γ̄ e^t))^{α/2}
        let ln_u = 0.5 * alpha * (lnx - gamma_bar.ln() - t);
        if ln_u > 700.0 || t > 700.0 {
            return f64::NEG_INFINITY;
        }
        let u = ln_u.exp();
        let arg = bessel_scale * u.sqrt();
        let ln_i = ln_bessel_i(mu - 1.0, arg).unwrap_or(f64::NEG_INFINITY);
        base + (m - a) * t - (1.0 + kappa) * mu * u - m * t.exp() + ln_i
    };
    let step = 0.25f64.min(0.5 / m.sqrt());
    let r = integrate_exp(ln_f, -40.0, 40.0, step, 50.0, 1e-11).map_err(|e| match e {
        Error::Numeric { msg, .. } => numeric(
            "composite_pdf_reference",
            format!("at x = {x}, channel {ch:?}: {msg}"),
        ),
        other => other,
    })?;
    Ok(r.ln_value())
}

/// Composite SNR density by direct quadrature over the shadowing variable.
pub fn composite_pdf_reference(ch: &DoubleShadowedAkm, x: f64) -> Result<f64> {
    ln_composite_pdf_reference(ch, x).map(f64::exp)
}

/// Reference density sampled on the scoring grid of a channel.
#[derive(Debug, Clone)]
pub struct ReferenceGrid {
    pub spec: GridSpec,
    pub points: Vec<f64>,
    pub values: Vec<f64>,
}

impl ReferenceGrid {
    pub fn new(ch: &DoubleShadowedAkm) -> Result<Self> {
        let log_pts = GridSpec::log_grid(ch.gamma_bar);
        let log_vals = log_pts
            .iter()
            .map(|&x| composite_pdf_reference(ch, x))
            .collect::<Result<Vec<_>>>()?;
        let (imax, _) = log_vals
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let spec = GridSpec::with_mode(ch.gamma_bar, log_pts[imax]);
        let points = spec.points();
        let values = points
            .iter()
            .map(|&x| match log_pts.iter().position(|&p| p == x) {
                Some(i) => Ok(log_vals[i]),
                None => composite_pdf_reference(ch, x),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec,
            points,
            values,
        })
    }
}

/// Mixture from the K-node Gauss-Laguerre rule, plus the raw mass Σθ Γ ζ^{-β}.
pub fn fit_mixture(
    ch: &DoubleShadowedAkm,
    k: usize,
    variant: ExponentVariant,
) -> Result<(MixtureGamma, f64)> {
    let rule = gauss_laguerre(k)?;
    let DoubleShadowedAkm {
        alpha,
        kappa,
        mu,
        m,
        gamma_bar,
        ..
    } = *ch;
    let two_over_alpha = 2.0 / alpha;
    let ln_xi = m * m.ln() + (two_over_alpha * m - 0.5 * (mu - 1.0)) * mu.ln()
        + 0.5 * (1.0 - mu) * kappa.ln()
        + two_over_alpha * m * kappa.ln_1p()
        - lgamma(m)
        - mu * kappa
        - m * gamma_bar.ln();
    let p = variant.exponent(ch);
    let zeta_scale = m * ((1.0 + kappa) * mu).powf(two_over_alpha) / gamma_bar;
    let mut ln_theta = Vec::with_capacity(k);
    let mut zeta = Vec::with_capacity(k);
    for (&y, &w) in rule.nodes.iter().zip(&rule.weights) {
        zeta.push(zeta_scale / y.powf(two_over_alpha));
        let ln_i = ln_bessel_i(mu - 1.0, 2.0 * (kappa * mu * y).sqrt())?;
        ln_theta.push(ln_xi + w.ln() + p * y.ln() + ln_i);
    }
    let beta = vec![m; k];
    let ln_mass: Vec<f64> = ln_theta
        .iter()
        .zip(&zeta)
        .map(|(&t, &z)| t + lgamma(m) - m * z.ln())
        .collect();
    let raw_mass = crate::specfun::log_sum_exp(&ln_mass).exp();
    let mg = MixtureGamma::from_ln_weights(&ln_theta, &beta, &zeta)?;
    Ok((mg, raw_mass))
}

/// Fit with K terms, scored against the reference density on a precomputed grid.
pub fn fit_with_reference(
    ch: &DoubleShadowedAkm,
    k: usize,
    variant: ExponentVariant,
    reference: &ReferenceGrid,
) -> Result<FitReport> {
    let (mg, raw_mass) = fit_mixture(ch, k, variant)?;
    let mse = mg_mse_values(&mg, &reference.points, &reference.values)?;
    Ok(FitReport {
        k: mg.k(),
        mg,
        mse,
        grid: reference.spec.describe(),
        grid_spec: reference.spec.clone(),
        used_exponent_variant: variant,
        raw_mass,
    })
}

/// K-term Gauss-Laguerre fit using the derived exponent.
pub fn fit_akm_nakagami(ch: &DoubleShadowedAkm, k: usize) -> Result<FitReport> {
    fit_akm_nakagami_variant(ch, k, ExponentVariant::Derived)
}

pub fn fit_akm_nakagami_variant(
    ch: &DoubleShadowedAkm,
    k: usize,
    variant: ExponentVariant,
) -> Result<FitReport> {
    let reference = ReferenceGrid::new(ch)?;
    fit_with_reference(ch, k, variant, &reference)
}

/// Smallest K ≤ `k_max` whose fit reaches `mse_target`.
pub fn select_k(ch: &DoubleShadowedAkm, mse_target: f64, k_max: usize) -> Result<FitReport> {
    select_k_variant(ch, mse_target, k_max, ExponentVariant::Derived)
}

pub fn select_k_variant(
    ch: &DoubleShadowedAkm,
    mse_target: f64,
    k_max: usize,
    variant: ExponentVariant,
) -> Result<FitReport> {
    if !(mse_target > 0.0) {
        return Err(domain("select_k", format!("MSE target must be positive, got {mse_target}")));
    }
    if !(1..=64).contains(&k_max) {
        return Err(domain("select_k", format!("k_max must be in 1..=64, got {k_max}")));
    }
    let reference = ReferenceGrid::new(ch)?;
    let mut best: Option<FitReport> = None;
    for k in 1..=k_max {
        let report = fit_with_reference(ch, k, variant, &reference)?;
        if report.mse <= mse_target {
            return Ok(report);
        }
        if best.as_ref().is_none_or(|b| report.mse < b.mse) {
            best = Some(report);
        }
    }
    Err(Error::TargetUnreachable {
        target: mse_target,
        k_max,
        best: Box::new(best.expect("k_max >= 1")),
    })
}

/// κ-μ multipath with inverse-Gamma shadowing, truncated to K Poisson terms.
pub fn map_kappa_mu_inverse_gamma(
    kappa: f64,
    mu: f64,
    gamma_bar: f64,
    k: usize,
) -> Result<MixtureGamma> {
    for (name, v) in [("kappa", kappa), ("mu", mu), ("gamma_bar", gamma_bar)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(domain("map_kappa_mu_inverse_gamma", format!("{name} must be positive, got {v}")));
        }
    }
    if k == 0 {
        return Err(domain("map_kappa_mu_inverse_gamma", "K must be at least 1"));
    }
    let zeta = mu * (1.0 + kappa) / gamma_bar;
    let mut ln_theta = Vec::with_capacity(k);
    let mut beta = Vec::with_capacity(k);
    for j in 0..k {
        let jf = j as f64;
        let b = mu + jf;
        // (j−1) ln κ with 0·ln κ = 0 for the leading term
        let kappa_pow = if j == 0 { 0.0 } else { jf * kappa.ln() };
        ln_theta.push(
            -mu * kappa + (mu + 2.0 * jf) * mu.ln() + kappa_pow + b * kappa.ln_1p()
                - lgamma(b)
                - lgamma(jf + 1.0)
                - b * gamma_bar.ln(),
        );
        beta.push(b);
    }
    MixtureGamma::from_ln_weights(&ln_theta, &beta, &vec![zeta; k])
}

/// Fisher-Snedecor F composite fading as a one-term mixture.
pub fn map_fisher_f(m: f64, gamma_bar: f64) -> Result<MixtureGamma> {
    if !(m > 0.0 && gamma_bar > 0.0) || !m.is_finite() || !gamma_bar.is_finite() {
        return Err(domain("map_fisher_f", format!("need m, gamma_bar > 0, got ({m}, {gamma_bar})")));
    }
    let sigma = (m * m.ln() - lgamma(m) - m * gamma_bar.ln()).exp();
    MixtureGamma::new(vec![GammaTerm {
        sigma,
        beta: m,
        zeta: m / gamma_bar,
    }])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mg::mg_pdf;
    use crate::quad::{integrate, QuadOptions};
    use approx::assert_relative_eq;

    fn base(gamma_bar: f64) -> DoubleShadowedAkm {
        DoubleShadowedAkm::new(2.0, 1.5, 2.0, 2.5, 5.5, gamma_bar).unwrap()
    }

    #[test]
    fn channel_validation() {
        assert!(DoubleShadowedAkm::new(2.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(DoubleShadowedAkm::new(0.0, 1.0, 1.0, 1.0, 2.0, 1.0).is_err());
        assert!(DoubleShadowedAkm::new(2.0, 1.0, 1.0, 1.0, 2.0, -1.0).is_err());
        let bad = r#"{"alpha":2,"kappa":1,"mu":1,"m":1,"m_s":0.5,"gamma_bar":1}"#;
        assert!(serde_json::from_str::<DoubleShadowedAkm>(bad).is_err());
    }

    #[test]
    fn rayleigh_limit_of_reference() {
        let ch = DoubleShadowedAkm::new(2.0, 1e-6, 1.0, 500.0, 2.0, 1.0).unwrap();
        for &x in &[0.1f64, 0.5, 1.0, 2.0, 4.0] {
            let f = composite_pdf_reference(&ch, x).unwrap();
            // exponential density plus the O(1/m) spread of the shadowed mean
            let expect = (-x).exp() * (1.0 + (x * x - 4.0 * x + 2.0) / (2.0 * ch.m));
            assert!((f - expect).abs() < 2e-5, "x = {x}: {f} vs {expect}");
        }
    }

    #[test]
    fn reference_integrates_to_one() {
        let ch = DoubleShadowedAkm::new(2.5, 2.0, 1.5, 3.0, 2.0, 1.0).unwrap();
        let r = integrate_exp(
            |u| ln_composite_pdf_reference(&ch, u.exp()).unwrap() + u,
            -30.0,
            10.0,
            0.25,
            50.0,
            1e-10,
        )
        .unwrap();
        assert!((r.value() - 1.0).abs() < 1e-6, "{}", r.value());
    }

    #[test]
    fn normalization_and_raw_mass() {
        let (mg, raw) = fit_mixture(&base(10.0), 15, ExponentVariant::Derived).unwrap();
        assert!((mg.total_mass() - 1.0).abs() < 1e-12);
        assert!((raw - 1.0).abs() < 1e-6, "raw mass {raw}");
        let (_, raw_printed) =
            fit_mixture(&DoubleShadowedAkm::new(3.0, 1.5, 2.0, 2.5, 5.5, 10.0).unwrap(), 15, ExponentVariant::Printed)
                .unwrap();
        assert!((raw_printed - 1.0).abs() > 1e-3);
    }

    #[test]
    fn variants_agree_at_alpha_two() {
        let ch = base(3.0);
        let (a, _) = fit_mixture(&ch, 10, ExponentVariant::Derived).unwrap();
        let (b, _) = fit_mixture(&ch, 10, ExponentVariant::Printed).unwrap();
        for (s, t) in a.terms().iter().zip(b.terms()) {
            assert_relative_eq!(s.sigma, t.sigma, max_relative = 1e-12);
        }
    }

    #[test]
    fn zeta_scales_inversely_with_gamma_bar() {
        let (a, _) = fit_mixture(&base(2.0), 15, ExponentVariant::Derived).unwrap();
        let (b, _) = fit_mixture(&base(20.0), 15, ExponentVariant::Derived).unwrap();
        for (s, t) in a.terms().iter().zip(b.terms()) {
            assert_relative_eq!(s.zeta / 10.0, t.zeta, max_relative = 1e-13);
        }
        let (lo, _) = fit_mixture(&base(1e2), 15, ExponentVariant::Derived).unwrap();
        let (hi, _) = fit_mixture(&base(1e6), 15, ExponentVariant::Derived).unwrap();
        for (s, t) in lo.terms().iter().zip(hi.terms()) {
            assert!(t.zeta < 1e-4 * s.zeta * 1.000_001);
        }
    }

    #[test]
    fn fitted_mixture_integrates_to_one() {
        let (mg, _) = fit_mixture(&base(10.0), 15, ExponentVariant::Derived).unwrap();
        let r = integrate(|x| mg_pdf(&mg, x).unwrap(), 0.0, 2000.0, &[1.0, 10.0, 100.0], QuadOptions::rel(1e-12))
            .unwrap();
        assert!((r.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn fisher_f_mapping() {
        let mg = map_fisher_f(1.0, 1.0).unwrap();
        let t = mg.terms()[0];
        assert_relative_eq!(t.sigma, 1.0, max_relative = 1e-14);
        assert_eq!((t.beta, t.zeta), (1.0, 1.0));
        let mg = map_fisher_f(2.7, 13.0).unwrap();
        assert!((mg.total_mass() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn kappa_mu_rayleigh_limit() {
        let mg = map_kappa_mu_inverse_gamma(1e-12, 1.0, 2.0, 1).unwrap();
        let t = mg.terms()[0];
        assert_eq!(t.beta, 1.0);
        assert_relative_eq!(t.zeta, 0.5, max_relative = 1e-11);
        assert_relative_eq!(t.sigma, 0.5, max_relative = 1e-11);
    }

    #[test]
    fn kappa_mu_matches_bessel_density() {
        let (kappa, mu, gb) = (1.0f64, 2.0f64, 1.0f64);
        let mg = map_kappa_mu_inverse_gamma(kappa, mu, gb, 25).unwrap();
        assert!((mg.total_mass() - 1.0).abs() < 1e-12);
        for &x in &[0.05, 0.3, 1.0, 2.5, 6.0] {
            let ln_f = mu.ln() + 0.5 * (mu + 1.0) * kappa.ln_1p() - 0.5 * (mu - 1.0) * kappa.ln()
                - mu * kappa
                + 0.5 * (mu - 1.0) * (x / gb).ln()
                - mu * (1.0 + kappa) * x / gb
                - gb.ln()
                + ln_bessel_i(mu - 1.0, 2.0 * mu * (kappa * (1.0 + kappa) * x / gb).sqrt()).unwrap();
            let exact = ln_f.exp();
            assert!((mg_pdf(&mg, x).unwrap() - exact).abs() < 1e-6, "x = {x}");
        }
    }
}
