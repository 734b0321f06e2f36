//! Outage, bit-error, capacity, effective-capacity and energy-detection AUC
//! over an MGS distribution.
//!
//! Every closed form has a direct-integral twin (`Mode::Integral`) computed by
//! quadrature of the exact density; the two are independent code paths.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, numeric, Error, Result};
use crate::fit::{fit_mixture, DoubleShadowedAkm, ExponentVariant};
use crate::mgs::{EvalMode, MgsDistribution};
use crate::quad::{integrate, QuadOptions};
use crate::specfun::{
    digamma, gauss_2f1_scaled, lgamma, ln_beta, ln_tricomi_u, log_sum_exp, meijer_g_detailed, MeijerGSpec,
};

const INTEGRAL_EPSREL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Asymptotic,
    Integral,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Exact, Mode::Asymptotic, Mode::Integral];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Asymptotic => "asymptotic",
            Mode::Integral => "integral",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "asymptotic" => Ok(Mode::Asymptotic),
            "integral" => Ok(Mode::Integral),
            _ => Err(domain("mode", format!("unknown mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub value: f64,
    pub mode: Mode,
    /// Quadrature and contour residuals, fallback flags and similar.
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl MetricResult {
    fn new(value: f64, mode: Mode) -> Self {
        Self {
            value,
            mode,
            diagnostics: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    fn diag(mut self, key: &str, v: f64) -> Self {
        self.diagnostics.insert(key.to_string(), v);
        self
    }
}

/// Modulation coefficient ρ in the bit-error kernel Q(√(2ργ)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationCoeff(pub f64);

impl ModulationCoeff {
    pub const BPSK: Self = Self(1.0);
    pub const BFSK: Self = Self(0.5);
    /// Coherent BFSK with minimum correlation.
    pub const BFSK_MIN_CORR: Self = Self(0.715);

    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(domain("ModulationCoeff", format!("rho must be positive, got {rho}")));
        }
        Ok(Self(rho))
    }

    pub fn rho(self) -> f64 {
        self.0
    }
}

fn check_probability(op: &'static str, v: f64) -> Result<f64> {
    if !(-1e-8..=1.0 + 1e-8).contains(&v) {
        return Err(numeric(op, format!("probability {v} outside [0, 1]")));
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Runs the closed form; a degenerate contour falls back to the integral.
fn with_fallback(
    closed: impl FnOnce() -> Result<MetricResult>,
    integral: impl FnOnce() -> Result<MetricResult>,
) -> Result<MetricResult> {
    match closed() {
        Err(Error::Degenerate(msg)) => {
            let mut r = integral()?;
            r.diagnostics.insert("fallback_integral".into(), 1.0);
            r.warnings.push(format!("closed form not evaluable ({msg}); used direct integral"));
            Ok(r)
        }
        other => other,
    }
}

/// P(γ < threshold).
pub fn outage_probability(d: &MgsDistribution, threshold: f64, mode: Mode) -> Result<MetricResult> {
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(domain("outage_probability", format!("threshold must be positive, got {threshold}")));
    }
    match mode {
        Mode::Exact => Ok(MetricResult::new(d.cdf(threshold, EvalMode::Exact)?, mode)),
        Mode::Asymptotic => Ok(MetricResult::new(d.cdf(threshold, EvalMode::Asymptotic)?, mode)),
        Mode::Integral => {
            // ∫₀^φ f, in u = ln γ
            let lnt = threshold.ln();
            let lo = lowest_significant(d, lnt)?;
            let ln_g = |u: f64| d.ln_pdf(u.exp(), EvalMode::Exact).map(|lp| lp + u);
            let steps = ((lnt - lo) / 0.5).ceil() as usize;
            let mut ln_scale = ln_g(lnt)?;
            for i in 0..steps {
                ln_scale = ln_scale.max(ln_g(lo + 0.5 * i as f64)?);
            }
            let f = |u: f64| match ln_g(u) {
                Ok(v) => (v - ln_scale).exp(),
                Err(_) => f64::NAN,
            };
            let breaks: Vec<f64> = (1..16).map(|i| lo + (lnt - lo) * i as f64 / 16.0).collect();
            let q = integrate(f, lo, lnt, &breaks, QuadOptions::rel(INTEGRAL_EPSREL))?;
            let v = check_probability("outage_probability", q.value * ln_scale.exp())?;
            Ok(MetricResult::new(v, mode).diag("quad_error", q.error * ln_scale.exp()))
        }
    }
}

/// Lower end of the u = ln γ range below which the density is negligible
/// relative to its value at `u_hi`.
fn lowest_significant(d: &MgsDistribution, u_hi: f64) -> Result<f64> {
    let beta_min = d.mg().terms().iter().map(|t| t.beta).fold(f64::INFINITY, f64::min);
    // γ f(γ) behaves like γ^{β_min} near zero
    Ok(u_hi - 60.0 / beta_min.max(1e-3))
}

/// Average bit-error probability E[Q(√(2ργ))].
pub fn abep(d: &MgsDistribution, rho: ModulationCoeff, mode: Mode) -> Result<MetricResult> {
    let rho = ModulationCoeff::new(rho.0)?.0;
    let ms = d.m_s();
    let ms1 = ms - 1.0;
    match mode {
        Mode::Exact => with_fallback(|| abep_exact(d, rho), || abep_integral(d, rho)),
        Mode::Asymptotic => {
            let logs: Vec<f64> = d
                .terms()
                .map(|(t, ln_s, ln_p, _)| {
                    ln_s + ln_p + lgamma(t.beta + 0.5) - t.beta.ln() - t.beta * (ms1 * rho).ln()
                })
                .collect();
            let v = log_sum_exp(&logs).exp() / (2.0 * PI.sqrt());
            Ok(MetricResult::new(v, mode))
        }
        Mode::Integral => abep_integral(d, rho),
    }
}

fn abep_exact(d: &MgsDistribution, rho: f64) -> Result<MetricResult> {
    let ms = d.m_s();
    let ms1 = ms - 1.0;
    let mut acc = 0.0;
    let mut worst_err: f64 = 0.0;
    let mut worst_cancel: f64 = 1.0;
    for (t, ln_s, _, _) in d.terms() {
        let spec = MeijerGSpec::new(&[1.0 - t.beta], &[1.0], &[0.0, ms, 0.5], &[]);
        let g = meijer_g_detailed(&spec, ms1 * rho / t.zeta)?;
        let w = (ln_s - t.beta * t.zeta.ln() - lgamma(ms)).exp() / (2.0 * PI.sqrt());
        acc += w * g.value;
        worst_err = worst_err.max(g.error / g.value.abs());
        worst_cancel = worst_cancel.max(g.cancellation);
    }
    let v = check_probability("abep", acc)?;
    Ok(MetricResult::new(v, Mode::Exact)
        .diag("contour_rel_error", worst_err)
        .diag("contour_cancellation", worst_cancel))
}

fn abep_integral(d: &MgsDistribution, rho: f64) -> Result<MetricResult> {
    let f = |phi: f64| {
        let s = phi.sin();
        if s == 0.0 {
            return 0.0;
        }
        d.mgf(rho / (s * s), EvalMode::Exact).unwrap_or(f64::NAN)
    };
    let q = integrate(f, 0.0, PI / 2.0, &[], QuadOptions::rel(INTEGRAL_EPSREL))?;
    let v = check_probability("abep", q.value / PI)?;
    Ok(MetricResult::new(v, Mode::Integral).diag("quad_error", q.error / PI))
}

/// Ergodic capacity E[log₂(1+γ)] in bits/s/Hz.
pub fn avg_capacity(d: &MgsDistribution, mode: Mode) -> Result<MetricResult> {
    let ms = d.m_s();
    let ms1 = ms - 1.0;
    match mode {
        Mode::Exact => with_fallback(|| acc_exact(d), || acc_integral(d)),
        Mode::Asymptotic => {
            let psi_ms = digamma(ms)?;
            let mut v = 0.0;
            for (t, ln_s, _, ln_g) in d.terms() {
                let w = (ln_s + ln_g - t.beta * t.zeta.ln()).exp();
                v += w * ((ms1 / t.zeta).ln() + digamma(t.beta)? - psi_ms);
            }
            let mut r = MetricResult::new(v / LN_2, Mode::Asymptotic);
            if v < 0.0 {
                r.warnings
                    .push("asymptotic capacity is negative; average SNR is outside its range of validity".into());
                r.diagnostics.insert("negative".into(), 1.0);
            }
            Ok(r)
        }
        Mode::Integral => acc_integral(d),
    }
}

fn acc_exact(d: &MgsDistribution) -> Result<MetricResult> {
    let ms = d.m_s();
    let ms1 = ms - 1.0;
    let mut acc = 0.0;
    let mut worst_err: f64 = 0.0;
    let mut worst_cancel: f64 = 1.0;
    for (t, ln_s, _, _) in d.terms() {
        let spec = MeijerGSpec::new(&[1.0 - t.beta, 1.0, 1.0], &[], &[ms, 1.0], &[0.0]);
        let g = meijer_g_detailed(&spec, ms1 / t.zeta)?;
        acc += (ln_s - t.beta * t.zeta.ln() - lgamma(ms)).exp() * g.value;
        worst_err = worst_err.max(g.error / g.value.abs());
        worst_cancel = worst_cancel.max(g.cancellation);
    }
    Ok(MetricResult::new(acc / LN_2, Mode::Exact)
        .diag("contour_rel_error", worst_err)
        .diag("contour_cancellation", worst_cancel))
}

fn acc_integral(d: &MgsDistribution) -> Result<MetricResult> {
    let r = d.expectation(|g| g.ln_1p().ln(), INTEGRAL_EPSREL)?;
    Ok(MetricResult::new(r.value() / LN_2, Mode::Integral).diag("quad_rel_error", r.error / r.value.abs()))
}

/// Effective capacity −(1/A)·log₂ E[(1+γ)^{−A}].
pub fn effective_capacity(d: &MgsDistribution, a: f64, mode: Mode) -> Result<MetricResult> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain("effective_capacity", format!("A must be positive, got {a}")));
    }
    let ms = d.m_s();
    let ms1 = ms - 1.0;
    let ln_ms1 = ms1.ln();
    let finish = |ln_e: f64, mode: Mode| MetricResult::new(-ln_e / (a * LN_2), mode);
    match mode {
        Mode::Exact => {
            let mut logs = Vec::with_capacity(d.mg().k());
            for (t, ln_s, ln_p, _) in d.terms() {
                let b = t.beta;
                let (ln_f, v) = gauss_2f1_scaled(b + ms, b, b + ms + a, 1.0 - t.zeta / ms1)?;
                if !(v > 0.0) {
                    return Err(numeric("effective_capacity", format!("hypergeometric factor {v} is not positive")));
                }
                logs.push(ln_s + ln_p + ln_beta(b, ms + a)? + ln_f + v.ln() - b * ln_ms1);
            }
            Ok(finish(log_sum_exp(&logs), mode))
        }
        Mode::Asymptotic => {
            let beta_max = d.mg().terms().iter().map(|t| t.beta).fold(0.0, f64::max);
            if a <= beta_max {
                return Err(domain(
                    "effective_capacity",
                    format!("asymptotic form needs A > max beta = {beta_max}, got A = {a}"),
                ));
            }
            let mut logs = Vec::with_capacity(d.mg().k());
            for (t, ln_s, ln_p, _) in d.terms() {
                logs.push(ln_s + ln_p + ln_beta(t.beta, a - t.beta)? - t.beta * ln_ms1);
            }
            Ok(finish(log_sum_exp(&logs), mode))
        }
        Mode::Integral => {
            let r = d.expectation(|g| -a * g.ln_1p(), INTEGRAL_EPSREL)?;
            Ok(finish(r.ln_value(), mode).diag("quad_rel_error", r.error / r.value.abs()))
        }
    }
}

/// Binomial coefficient C(n, k) for small integers.
fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Weights c_i = Σ_{l=i}^{u−1} C(l+u−1, l−i) 2^{−(l+i+u)} / i! of the moments
/// E[γ^i e^{−γ/2}], i = 0..u−1.
pub(crate) fn auc_weights(u: u32) -> Vec<f64> {
    let mut fact = 1.0;
    (0..u)
        .map(|i| {
            if i > 0 {
                fact *= i as f64;
            }
            (i..u)
                .map(|l| binomial(l + u - 1, l - i) * 2f64.powi(-((l + i + u) as i32)))
                .sum::<f64>()
                / fact
        })
        .collect()
}

/// Average area under the energy-detector ROC curve for time-bandwidth
/// product `u`. `diagnostics["complement"]` carries 1 − AUC without
/// cancellation.
pub fn avg_auc(d: &MgsDistribution, u: u32, mode: Mode) -> Result<MetricResult> {
    if u == 0 {
        return Err(domain("avg_auc", "u must be a positive integer"));
    }
    let ms = d.m_s();
    let ms1 = ms - 1.0;
    let ln_ms1 = ms1.ln();
    let weights = auc_weights(u);
    let mut diag_err: f64 = 0.0;
    let mut complement = 0.0;
    for (i, w) in weights.iter().enumerate() {
        let fi = i as f64;
        // E[γ^i e^{−γ/2}]
        let moment = match mode {
            Mode::Exact => {
                let mut logs = Vec::with_capacity(d.mg().k());
                for (t, ln_s, ln_p, _) in d.terms() {
                    let b = t.beta + fi;
                    let ln_u = ln_tricomi_u(b, fi - ms + 1.0, ms1 / (2.0 * t.zeta))?;
                    logs.push(ln_s + ln_p + fi * ln_ms1 + lgamma(b) + ln_u - b * t.zeta.ln());
                }
                log_sum_exp(&logs).exp()
            }
            Mode::Asymptotic => {
                let mut logs = Vec::with_capacity(d.mg().k());
                for (t, ln_s, ln_p, _) in d.terms() {
                    let b = t.beta + fi;
                    logs.push(ln_s + ln_p + lgamma(b) + b * LN_2 - t.beta * ln_ms1);
                }
                log_sum_exp(&logs).exp()
            }
            Mode::Integral => {
                let r = d.expectation(|g| fi * g.ln() - 0.5 * g, INTEGRAL_EPSREL)?;
                diag_err = diag_err.max(r.error / r.value.abs());
                r.value()
            }
        };
        complement += w * moment;
    }
    let value = 1.0 - complement;
    let mut r = MetricResult::new(value, mode).diag("complement", complement);
    if mode == Mode::Integral {
        r = r.diag("quad_rel_error", diag_err);
    }
    if mode != Mode::Asymptotic {
        r.value = check_probability("avg_auc", value)?;
    }
    Ok(r)
}

/// Metric whose high-SNR slope is estimated by [`diversity_gain_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiversityMetric {
    /// Outage at a threshold given in linear units.
    Outage { threshold: f64 },
    Abep { rho: ModulationCoeff },
}

/// Least-squares slope of −log₁₀(metric) against log₁₀(γ̄) over `db_range`,
/// sampled at 1 dB spacing.
pub fn diversity_gain_estimate(
    ch: &DoubleShadowedAkm,
    metric: DiversityMetric,
    db_range: (f64, f64),
    mode: Mode,
) -> Result<f64> {
    let n = ((db_range.1 - db_range.0).round() as usize).max(2) + 1;
    diversity_gain_with_points(ch, metric, db_range, mode, n)
}

/// As [`diversity_gain_estimate`] with `points` equally spaced dB values.
pub fn diversity_gain_with_points(
    ch: &DoubleShadowedAkm,
    metric: DiversityMetric,
    db_range: (f64, f64),
    mode: Mode,
    points: usize,
) -> Result<f64> {
    let (lo, hi) = db_range;
    if !(lo < hi) || points < 2 {
        return Err(domain("diversity_gain_estimate", "need lo < hi and at least two points"));
    }
    let gb0 = crate::db_to_linear(lo);
    let base = ch.with_gamma_bar(gb0)?;
    let (mg, _) = fit_mixture(&base, 15, ExponentVariant::Derived)?;
    let d0 = MgsDistribution::new(mg, ch.m_s)?;
    let mut xs = Vec::with_capacity(points);
    let mut ys = Vec::with_capacity(points);
    for i in 0..points {
        let db = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        // ζ_j ∝ 1/γ̄
        let d = d0.rescale_rates(gb0 / crate::db_to_linear(db))?;
        let v = match metric {
            DiversityMetric::Outage { threshold } => outage_probability(&d, threshold, mode)?.value,
            DiversityMetric::Abep { rho } => abep(&d, rho, mode)?.value,
        };
        if !(v > 0.0) {
            return Err(numeric("diversity_gain_estimate", format!("metric {v} is not positive at {db} dB")));
        }
        xs.push(db / 10.0);
        ys.push(-v.log10());
    }
    if !ys.windows(2).all(|w| w[1] > w[0]) {
        return Err(numeric(
            "diversity_gain_estimate",
            "metric is not monotone decreasing over the range; not in the asymptotic regime",
        ));
    }
    let nf = points as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mg::{GammaTerm, MixtureGamma};
    use approx::assert_relative_eq;

    fn hand(beta: f64, m_s: f64) -> MgsDistribution {
        let sigma = (-lgamma(beta)).exp();
        MgsDistribution::new(MixtureGamma::new(vec![GammaTerm { sigma, beta, zeta: 1.0 }]).unwrap(), m_s).unwrap()
    }

    #[test]
    fn hand_outage() {
        let d = hand(1.0, 2.0);
        let phi = 10f64.powf(0.5);
        let expect = 1.0 - (1.0 + phi).powi(-2);
        for mode in Mode::ALL.into_iter().filter(|m| *m != Mode::Asymptotic) {
            assert_relative_eq!(outage_probability(&d, phi, mode).unwrap().value, expect, max_relative = 1e-10);
        }
    }

    #[test]
    fn hand_capacity() {
        let d = hand(1.0, 2.0);
        for mode in [Mode::Exact, Mode::Integral] {
            assert_relative_eq!(avg_capacity(&d, mode).unwrap().value, 0.5 / LN_2, max_relative = 1e-9);
            assert_relative_eq!(effective_capacity(&d, 1.0, mode).unwrap().value, 1.5f64.log2(), max_relative = 1e-9);
        }
    }

    #[test]
    fn hand_abep() {
        let d = hand(1.0, 2.0);
        let e = abep(&d, ModulationCoeff::BPSK, Mode::Exact).unwrap().value;
        let i = abep(&d, ModulationCoeff::BPSK, Mode::Integral).unwrap().value;
        assert_relative_eq!(e, i, max_relative = 1e-8);
        assert_relative_eq!(abep(&d, ModulationCoeff::BPSK, Mode::Asymptotic).unwrap().value, 0.5, max_relative = 1e-14);
    }

    #[test]
    fn auc_u1_is_half_mgf() {
        let d = hand(2.0, 3.0);
        let m = d.mgf(0.5, EvalMode::Exact).unwrap();
        assert_relative_eq!(avg_auc(&d, 1, Mode::Exact).unwrap().value, 1.0 - 0.5 * m, max_relative = 1e-12);
    }

    #[test]
    fn auc_weights_u1() {
        assert_eq!(auc_weights(1), vec![0.5]);
        // u = 2: c_0 = C(1,0)/4 + C(2,1)/8, c_1 = C(2,0)/16
        assert_eq!(auc_weights(2), vec![0.25 + 0.25, 1.0 / 16.0]);
    }

    #[test]
    fn ec_asymptotic_domain() {
        let d = hand(2.0, 3.0);
        assert!(effective_capacity(&d, 1.5, Mode::Asymptotic).is_err());
        assert!(effective_capacity(&d, 2.5, Mode::Asymptotic).is_ok());
        assert!(avg_auc(&d, 0, Mode::Exact).is_err());
    }
}
