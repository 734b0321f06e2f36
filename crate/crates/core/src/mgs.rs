//! The MGS distribution: a Gamma mixture mixed over inverse-Nakagami-m
//! multiplicative shadowing with index `m_s`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, numeric, Error, Result};
use crate::fit::{fit_mixture, DoubleShadowedAkm, ExponentVariant};
use crate::mg::{GammaTerm, MixtureGamma};
use crate::quad::{integrate_exp, ScaledIntegral};
use crate::specfun::{
    gauss_2f1_scaled, lgamma, ln_beta, ln_pochhammer, ln_tricomi_u, ln_tricomi_u_at_zero, log_sum_exp,
};

/// Exact closed forms or their high-SNR (ζ → 0) limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    #[default]
    Exact,
    /// High average-SNR approximation; not a substitute for the exact value.
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct TermLogs {
    ln_sigma: f64,
    /// ln (m_s)_β
    ln_poch: f64,
    ln_gamma_beta: f64,
}

/// MGS distribution. JSON form is the mixture object plus `"m_s"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMgs")]
pub struct MgsDistribution {
    #[serde(flatten)]
    mg: MixtureGamma,
    m_s: f64,
    #[serde(skip)]
    logs: Vec<TermLogs>,
}

#[derive(Deserialize)]
struct RawMgs {
    terms: Vec<GammaTerm>,
    m_s: f64,
}

impl TryFrom<RawMgs> for MgsDistribution {
    type Error = Error;
    fn try_from(raw: RawMgs) -> Result<Self> {
        MgsDistribution::new(MixtureGamma::new(raw.terms)?, raw.m_s)
    }
}

impl MgsDistribution {
    pub fn new(mg: MixtureGamma, m_s: f64) -> Result<Self> {
        if !(m_s > 1.0) || !m_s.is_finite() {
            return Err(domain("MgsDistribution", format!("m_s must exceed 1, got {m_s}")));
        }
        let logs = mg
            .terms()
            .iter()
            .map(|t| {
                Ok(TermLogs {
                    ln_sigma: t.sigma.ln(),
                    ln_poch: ln_pochhammer(m_s, t.beta)?,
                    ln_gamma_beta: lgamma(t.beta),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { mg, m_s, logs })
    }

    /// Fitted double-shadowed α-κ-μ channel with K terms.
    pub fn from_channel(ch: &DoubleShadowedAkm, k: usize) -> Result<Self> {
        let (mg, _) = fit_mixture(ch, k, ExponentVariant::Derived)?;
        Self::new(mg, ch.m_s)
    }

    pub fn mg(&self) -> &MixtureGamma {
        &self.mg
    }

    pub fn m_s(&self) -> f64 {
        self.m_s
    }

    pub(crate) fn terms(&self) -> impl Iterator<Item = (&GammaTerm, f64, f64, f64)> {
        self.mg
            .terms()
            .iter()
            .zip(&self.logs)
            .map(|(t, l)| (t, l.ln_sigma, l.ln_poch, l.ln_gamma_beta))
    }

    /// Same distribution with every rate multiplied by `factor`.
    pub fn rescale_rates(&self, factor: f64) -> Result<Self> {
        Self::new(self.mg.rescale_rates(factor)?, self.m_s)
    }

    /// Natural log of the density.
    pub fn ln_pdf(&self, gamma: f64, mode: EvalMode) -> Result<f64> {
        if !(gamma >= 0.0) || gamma.is_infinite() {
            return Err(domain("pdf", format!("gamma must be finite and >= 0, got {gamma}")));
        }
        let ms1 = self.m_s - 1.0;
        let ln_ms1 = ms1.ln();
        if gamma == 0.0 {
            let mut acc = 0.0;
            for (t, ln_s, ln_p, _) in self.terms() {
                if t.beta < 1.0 {
                    return Ok(f64::INFINITY);
                }
                if t.beta == 1.0 {
                    acc += (ln_s + ln_p - ln_ms1).exp();
                }
            }
            return Ok(acc.ln());
        }
        let lng = gamma.ln();
        let logs: Vec<f64> = match mode {
            EvalMode::Exact => self
                .terms()
                .map(|(t, ln_s, ln_p, _)| {
                    ln_s + ln_p + (t.beta - 1.0) * lng
                        - (t.beta + self.m_s) * (ms1 + t.zeta * gamma).ln()
                        + self.m_s * ln_ms1
                })
                .collect(),
            EvalMode::Asymptotic => self
                .terms()
                .map(|(t, ln_s, ln_p, _)| ln_s + ln_p + (t.beta - 1.0) * lng - t.beta * ln_ms1)
                .collect(),
        };
        Ok(log_sum_exp(&logs))
    }

    pub fn pdf(&self, gamma: f64, mode: EvalMode) -> Result<f64> {
        self.ln_pdf(gamma, mode).map(f64::exp)
    }

    /// Distribution function. The asymptotic form is a power law and is
    /// returned unclamped.
    pub fn cdf(&self, gamma: f64, mode: EvalMode) -> Result<f64> {
        if !(gamma >= 0.0) || gamma.is_nan() {
            return Err(domain("cdf", format!("gamma must be >= 0, got {gamma}")));
        }
        if gamma == 0.0 {
            return Ok(0.0);
        }
        if gamma.is_infinite() {
            return Ok(1.0);
        }
        let ms1 = self.m_s - 1.0;
        let lng = gamma.ln();
        let ln_ms1 = ms1.ln();
        let mut logs = Vec::with_capacity(self.mg.k());
        for (t, ln_s, ln_p, _) in self.terms() {
            let b = t.beta;
            let common = ln_s + ln_p + b * lng - b.ln() - b * ln_ms1;
            match mode {
                EvalMode::Exact => {
                    let (ln_f, v) = gauss_2f1_scaled(b + self.m_s, b, b + 1.0, -t.zeta * gamma / ms1)?;
                    if !(v > 0.0) {
                        return Err(numeric("cdf", format!("hypergeometric factor {v} is not positive")));
                    }
                    logs.push(common + ln_f + v.ln());
                }
                EvalMode::Asymptotic => logs.push(common),
            }
        }
        let value = log_sum_exp(&logs).exp();
        if mode == EvalMode::Asymptotic {
            return Ok(value);
        }
        if !(-1e-8..=1.0 + 1e-8).contains(&value) {
            return Err(numeric("cdf", format!("CDF {value} outside [0, 1] at gamma = {gamma}")));
        }
        Ok(value.clamp(0.0, 1.0))
    }

    /// Laplace transform E[e^{−sγ}].
    pub fn mgf(&self, s: f64, mode: EvalMode) -> Result<f64> {
        if !(s >= 0.0) || s.is_infinite() {
            return Err(domain("mgf", format!("s must be finite and >= 0, got {s}")));
        }
        let ms1 = self.m_s - 1.0;
        let mut logs = Vec::with_capacity(self.mg.k());
        for (t, ln_s, ln_p, ln_g) in self.terms() {
            let b = t.beta;
            match mode {
                EvalMode::Exact => {
                    let ln_u = if s == 0.0 {
                        ln_tricomi_u_at_zero(b, 1.0 - self.m_s)?
                    } else {
                        ln_tricomi_u(b, 1.0 - self.m_s, ms1 * s / t.zeta)?
                    };
                    logs.push(ln_s + ln_p + ln_g + ln_u - b * t.zeta.ln());
                }
                EvalMode::Asymptotic => {
                    if s == 0.0 {
                        return Err(domain("mgf", "asymptotic MGF diverges at s = 0"));
                    }
                    logs.push(ln_s + ln_p + ln_g - b * (ms1 * s).ln());
                }
            }
        }
        Ok(log_sum_exp(&logs).exp())
    }

    /// E[γ^n] for 0 ≤ n < m_s.
    pub fn moment(&self, n: f64) -> Result<f64> {
        if !(n >= 0.0) {
            return Err(domain("moment", format!("order must be >= 0, got {n}")));
        }
        if n >= self.m_s {
            return Err(domain(
                "moment",
                format!("moment of order {n} does not exist for m_s = {}", self.m_s),
            ));
        }
        let ln_ms1 = (self.m_s - 1.0).ln();
        let mut logs = Vec::with_capacity(self.mg.k());
        for (t, ln_s, ln_p, _) in self.terms() {
            logs.push(
                n * ln_ms1 + ln_s + ln_p + ln_beta(t.beta + n, self.m_s - n)?
                    - (t.beta + n) * t.zeta.ln(),
            );
        }
        Ok(log_sum_exp(&logs).exp())
    }

    /// ∫ g(γ) f(γ) dγ for a positive kernel given as `ln g`, by quadrature over
    /// u = ln γ of the exact density.
    pub fn expectation<G: Fn(f64) -> f64>(&self, ln_kernel: G, epsrel: f64) -> Result<ScaledIntegral> {
        let ln_f = |u: f64| {
            let g = u.exp();
            if g == 0.0 || g.is_infinite() {
                return f64::NEG_INFINITY;
            }
            match self.ln_pdf(g, EvalMode::Exact) {
                Ok(lp) => lp + ln_kernel(g) + u,
                Err(_) => f64::NAN,
            }
        };
        integrate_exp(ln_f, -120.0, 120.0, 0.5, 50.0, epsrel)
    }
}

pub fn pdf(d: &MgsDistribution, gamma: f64, mode: EvalMode) -> Result<f64> {
    d.pdf(gamma, mode)
}

pub fn cdf(d: &MgsDistribution, gamma: f64, mode: EvalMode) -> Result<f64> {
    d.cdf(gamma, mode)
}

pub fn mgf(d: &MgsDistribution, s: f64, mode: EvalMode) -> Result<f64> {
    d.mgf(s, mode)
}

pub fn moment(d: &MgsDistribution, n: f64) -> Result<f64> {
    d.moment(n)
}
