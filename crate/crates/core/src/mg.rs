//! Mixture-Gamma densities f(x) = Σ σ_j x^{β_j−1} e^{−ζ_j x}.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;

use crate::error::{domain, Error, Result};
use crate::specfun::{lgamma, log_sum_exp};

/// One Gamma component `σ x^{β−1} e^{−ζx}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaTerm {
    pub sigma: f64,
    pub beta: f64,
    pub zeta: f64,
}

impl GammaTerm {
    /// `ln(σ Γ(β) ζ^{−β})`, the log of the probability mass carried by the term.
    pub fn ln_mass(&self) -> f64 {
        self.sigma.ln() + lgamma(self.beta) - self.beta * self.zeta.ln()
    }
}

/// Normalized mixture of Gamma terms. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMixture")]
pub struct MixtureGamma {
    terms: Vec<GammaTerm>,
}

#[derive(Deserialize)]
struct RawMixture {
    terms: Vec<GammaTerm>,
}

impl TryFrom<RawMixture> for MixtureGamma {
    type Error = Error;
    fn try_from(raw: RawMixture) -> Result<Self> {
        MixtureGamma::new(raw.terms)
    }
}

const NORM_TOL: f64 = 1e-9;

impl MixtureGamma {
    /// Validates positivity of every parameter and the normalization
    /// Σ σ_j Γ(β_j) ζ_j^{−β_j} = 1 (within 1e-9).
    pub fn new(terms: Vec<GammaTerm>) -> Result<Self> {
        check_terms(&terms)?;
        let mg = Self { terms };
        let total = mg.total_mass();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(domain(
                "MixtureGamma",
                format!("weights are not normalized: Σ σΓ(β)ζ^-β = {total}"),
            ));
        }
        Ok(mg)
    }

    /// Builds a mixture from unnormalized log-weights `ln θ_j`, rescaling so
    /// that σ_j = θ_j / Σ_l θ_l Γ(β_l) ζ_l^{−β_l}.
    pub fn from_ln_weights(ln_theta: &[f64], beta: &[f64], zeta: &[f64]) -> Result<Self> {
        if ln_theta.len() != beta.len() || beta.len() != zeta.len() {
            return Err(domain("MixtureGamma", "parameter lists differ in length"));
        }
        if ln_theta.is_empty() {
            return Err(domain("MixtureGamma", "at least one term is required"));
        }
        for (&b, &z) in beta.iter().zip(zeta) {
            if !(b > 0.0 && z > 0.0 && b.is_finite() && z.is_finite()) {
                return Err(domain("MixtureGamma", format!("need β, ζ > 0, got ({b}, {z})")));
            }
        }
        let ln_mass: Vec<f64> = ln_theta
            .iter()
            .zip(beta.iter().zip(zeta))
            .map(|(&t, (&b, &z))| t + lgamma(b) - b * z.ln())
            .collect();
        let ln_norm = log_sum_exp(&ln_mass);
        if !ln_norm.is_finite() {
            return Err(domain("MixtureGamma", "weights vanish or overflow"));
        }
        // terms whose weight underflows carry no representable mass and are dropped
        let terms = ln_theta
            .iter()
            .zip(beta.iter().zip(zeta))
            .map(|(&t, (&b, &z))| GammaTerm {
                sigma: (t - ln_norm).exp(),
                beta: b,
                zeta: z,
            })
            .filter(|t| t.sigma > 0.0)
            .collect();
        Self::new(terms)
    }

    pub fn terms(&self) -> &[GammaTerm] {
        &self.terms
    }

    pub fn k(&self) -> usize {
        self.terms.len()
    }

    /// Σ σ_j Γ(β_j) ζ_j^{−β_j}.
    pub fn total_mass(&self) -> f64 {
        self.terms.iter().map(|t| t.ln_mass().exp()).sum()
    }

    /// Same weights and shapes with every rate multiplied by `factor` and the
    /// weights rescaled to keep the normalization.
    pub fn rescale_rates(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(domain("MixtureGamma", format!("rate factor must be positive, got {factor}")));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| GammaTerm {
                sigma: t.sigma * factor.powf(t.beta),
                beta: t.beta,
                zeta: t.zeta * factor,
            })
            .collect();
        Self::new(terms)
    }
}

fn check_terms(terms: &[GammaTerm]) -> Result<()> {
    if terms.is_empty() {
        return Err(domain("MixtureGamma", "at least one term is required"));
    }
    for (j, t) in terms.iter().enumerate() {
        let ok = [t.sigma, t.beta, t.zeta]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !ok {
            return Err(domain(
                "MixtureGamma",
                format!("term {j} has a non-positive parameter: {t:?}"),
            ));
        }
    }
    Ok(())
}

/// Mixture density at `x ≥ 0`.
pub fn mg_pdf(mg: &MixtureGamma, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(domain("mg_pdf", format!("x must be >= 0, got {x}")));
    }
    if x == 0.0 {
        let mut s = 0.0;
        for t in &mg.terms {
            if t.beta < 1.0 {
                return Ok(f64::INFINITY);
            }
            if t.beta == 1.0 {
                s += t.sigma;
            }
        }
        return Ok(s);
    }
    let lnx = x.ln();
    let logs: Vec<f64> = mg
        .terms
        .iter()
        .map(|t| t.sigma.ln() + (t.beta - 1.0) * lnx - t.zeta * x)
        .collect();
    Ok(log_sum_exp(&logs).exp())
}

/// Mixture CDF Σ σ_j ζ_j^{−β_j} γ_inc(β_j, ζ_j x).
pub fn mg_cdf(mg: &MixtureGamma, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(domain("mg_cdf", format!("x must be >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let s: f64 = mg
        .terms
        .iter()
        .map(|t| t.ln_mass().exp() * gamma_lr(t.beta, t.zeta * x))
        .sum();
    Ok(s.clamp(0.0, 1.0))
}

/// Mean squared difference between the mixture and `reference` on `grid`.
pub fn mg_mse<F: Fn(f64) -> f64>(mg: &MixtureGamma, reference: F, grid: &[f64]) -> Result<f64> {
    check_grid(grid)?;
    let mut acc = 0.0;
    for &x in grid {
        let d = mg_pdf(mg, x)? - reference(x);
        acc += d * d;
    }
    Ok(acc / grid.len() as f64)
}

/// MSE against precomputed reference values `reference[i]` at `grid[i]`.
pub fn mg_mse_values(mg: &MixtureGamma, grid: &[f64], reference: &[f64]) -> Result<f64> {
    if grid.len() != reference.len() {
        return Err(domain("mg_mse", "grid and reference values differ in length"));
    }
    check_grid(grid)?;
    let mut acc = 0.0;
    for (&x, &r) in grid.iter().zip(reference) {
        let d = mg_pdf(mg, x)? - r;
        acc += d * d;
    }
    Ok(acc / grid.len() as f64)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(domain("mg_mse", "grid is empty"));
    }
    if grid[0] < 0.0 || !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(domain("mg_mse", "grid must be non-negative and strictly increasing"));
    }
    Ok(())
}

/// Layout of the grid on which fits are scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub gamma_bar: f64,
    pub log_points: usize,
    pub log_lo: f64,
    pub log_hi: f64,
    pub linear_points: usize,
    pub linear_lo: f64,
    pub linear_hi: f64,
}

impl GridSpec {
    pub const LOG_POINTS: usize = 200;
    pub const LINEAR_POINTS: usize = 50;

    /// Log-spaced body of the grid: 200 points on [1e-3 γ̄, 20 γ̄].
    pub fn log_grid(gamma_bar: f64) -> Vec<f64> {
        log_space(1e-3 * gamma_bar, 20.0 * gamma_bar, Self::LOG_POINTS)
    }

    /// Full grid description once the density mode is known.
    pub fn with_mode(gamma_bar: f64, mode: f64) -> Self {
        Self {
            gamma_bar,
            log_points: Self::LOG_POINTS,
            log_lo: 1e-3 * gamma_bar,
            log_hi: 20.0 * gamma_bar,
            linear_points: Self::LINEAR_POINTS,
            linear_lo: 0.5 * mode,
            linear_hi: 2.0 * mode,
        }
    }

    /// Sorted, de-duplicated grid points.
    pub fn points(&self) -> Vec<f64> {
        let mut v = log_space(self.log_lo, self.log_hi, self.log_points);
        let n = self.linear_points;
        v.extend((0..n).map(|i| {
            self.linear_lo + (self.linear_hi - self.linear_lo) * i as f64 / (n - 1).max(1) as f64
        }));
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn describe(&self) -> String {
        format!(
            "{} log-spaced points on [{:e}, {:e}] + {} linear points on [{:e}, {:e}] (SNR-domain pdf)",
            self.log_points, self.log_lo, self.log_hi, self.linear_points, self.linear_lo, self.linear_hi
        )
    }
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}
