//! Metric sweeps over average SNR (or outage threshold) and Monte Carlo
//! validation tables.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::fit::{fit_mixture, DoubleShadowedAkm, ExponentVariant};
use crate::metrics::{self, MetricResult, Mode, ModulationCoeff};
use crate::mgs::MgsDistribution;
use crate::montecarlo::{self, McEstimate, SamplerModel, SimConfig};
use crate::{db_to_linear, linear_to_db};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Op,
    Abep,
    Acc,
    Ec,
    Auc,
    /// 1 − AUC, computed without the cancellation of `1 − auc`.
    Cauc,
}

impl MetricKind {
    pub const PRIMARY: [MetricKind; 5] = [Self::Op, Self::Abep, Self::Acc, Self::Ec, Self::Auc];

    pub fn name(self) -> &'static str {
        match self {
            Self::Op => "op",
            Self::Abep => "abep",
            Self::Acc => "acc",
            Self::Ec => "ec",
            Self::Auc => "auc",
            Self::Cauc => "cauc",
        }
    }
}

impl std::str::FromStr for MetricKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "op" => Ok(Self::Op),
            "abep" => Ok(Self::Abep),
            "acc" => Ok(Self::Acc),
            "ec" => Ok(Self::Ec),
            "auc" => Ok(Self::Auc),
            "cauc" => Ok(Self::Cauc),
            _ => Err(domain("metric", format!("unknown metric '{s}'"))),
        }
    }
}

/// Per-metric arguments; only those the metric needs must be present.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricArgs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, rename = "A", alias = "a", skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<u32>,
}

impl MetricArgs {
    /// Threshold 5 dB, BPSK, A = 3.5, u = 3.
    pub fn figure_defaults() -> Self {
        Self {
            threshold_db: Some(5.0),
            rho: Some(1.0),
            a: Some(3.5),
            u: Some(3),
        }
    }

    pub fn check(&self, kind: MetricKind) -> Result<()> {
        let missing = match kind {
            MetricKind::Op if self.threshold_db.is_none() => Some("threshold_db"),
            MetricKind::Abep if self.rho.is_none() => Some("rho"),
            MetricKind::Ec if self.a.is_none() => Some("A"),
            MetricKind::Auc | MetricKind::Cauc if self.u.is_none() => Some("u"),
            _ => None,
        };
        match missing {
            Some(name) => Err(domain("metric_args", format!("metric {} needs {name}", kind.name()))),
            None => Ok(()),
        }
    }
}

/// Evaluates one metric; for `Cauc` the value is the AUC complement.
pub fn evaluate(d: &MgsDistribution, kind: MetricKind, args: &MetricArgs, mode: Mode) -> Result<MetricResult> {
    args.check(kind)?;
    match kind {
        MetricKind::Op => metrics::outage_probability(d, db_to_linear(args.threshold_db.unwrap_or_default()), mode),
        MetricKind::Abep => metrics::abep(d, ModulationCoeff::new(args.rho.unwrap_or_default())?, mode),
        MetricKind::Acc => metrics::avg_capacity(d, mode),
        MetricKind::Ec => metrics::effective_capacity(d, args.a.unwrap_or_default(), mode),
        MetricKind::Auc => metrics::avg_auc(d, args.u.unwrap_or_default(), mode),
        MetricKind::Cauc => {
            let mut r = metrics::avg_auc(d, args.u.unwrap_or_default(), mode)?;
            r.value = r.diagnostics["complement"];
            Ok(r)
        }
    }
}

/// Monte Carlo estimate of one metric from SNR samples.
pub fn estimate(samples: &[f64], kind: MetricKind, args: &MetricArgs) -> Result<McEstimate> {
    args.check(kind)?;
    match kind {
        MetricKind::Op => montecarlo::mc_outage(samples, db_to_linear(args.threshold_db.unwrap_or_default())),
        MetricKind::Abep => montecarlo::mc_abep(samples, args.rho.unwrap_or_default()),
        MetricKind::Acc => montecarlo::mc_capacity(samples),
        MetricKind::Ec => montecarlo::mc_effective_capacity(samples, args.a.unwrap_or_default()),
        MetricKind::Auc => montecarlo::mc_auc(samples, args.u.unwrap_or_default()),
        MetricKind::Cauc => montecarlo::mc_auc(samples, args.u.unwrap_or_default()).map(|e| McEstimate {
            estimate: 1.0 - e.estimate,
            stderr: e.stderr,
        }),
    }
}

/// Sampler settings; the channel comes from the sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSettings {
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_streams")]
    pub streams: usize,
    #[serde(default)]
    pub sampler: SamplerModel,
}

fn default_streams() -> usize {
    16
}

impl McSettings {
    pub fn config(&self, channel: DoubleShadowedAkm) -> Result<SimConfig> {
        let mut cfg = SimConfig::new(channel, self.n_samples, self.seed, self.streams)?;
        cfg.sampler = self.sampler;
        Ok(cfg)
    }
}

/// Quantity on the first CSV column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// Average SNR in dB.
    #[default]
    Snr,
    /// Outage threshold in dB at the channel's fixed average SNR.
    Threshold,
}

fn default_k() -> usize {
    15
}

fn default_modes() -> Vec<Mode> {
    vec![Mode::Exact]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub channel: DoubleShadowedAkm,
    pub metric: MetricKind,
    #[serde(default)]
    pub metric_args: MetricArgs,
    /// `(start, stop, step)` in dB. With the threshold axis these are
    /// threshold values instead of average SNRs.
    pub gamma_bar_db: (f64, f64, f64),
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSettings>,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Fit once at the first grid point and scale the rates by γ̄₀/γ̄
    /// instead of re-fitting at every point.
    #[serde(default)]
    pub rescale_zeta: bool,
    #[serde(default)]
    pub axis: SweepAxis,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let (start, stop, step) = self.gamma_bar_db;
        if !(step > 0.0) || !step.is_finite() {
            return Err(domain("sweep", format!("step must be positive, got {step}")));
        }
        if !(start < stop) || !stop.is_finite() {
            return Err(domain("sweep", format!("start must be below stop, got ({start}, {stop})")));
        }
        if self.modes.is_empty() {
            return Err(domain("sweep", "at least one mode is required"));
        }
        if !(1..=64).contains(&self.k) {
            return Err(domain("sweep", format!("K must be in 1..=64, got {}", self.k)));
        }
        if self.axis == SweepAxis::Threshold && self.metric != MetricKind::Op {
            return Err(domain("sweep", "the threshold axis applies to the outage metric only"));
        }
        let mut args = self.metric_args;
        if self.axis == SweepAxis::Threshold {
            args.threshold_db = Some(0.0);
        }
        args.check(self.metric)?;
        if let Some(mc) = &self.mc {
            mc.config(self.channel)?;
        }
        Ok(())
    }

    /// Grid values in dB, `start, start + step, …` up to `stop` inclusive.
    pub fn grid(&self) -> Vec<f64> {
        let (start, stop, step) = self.gamma_bar_db;
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| start + step * i as f64).collect()
    }

    /// Selected modes in canonical column order.
    pub fn ordered_modes(&self) -> Vec<Mode> {
        Mode::ALL.into_iter().filter(|m| self.modes.contains(m)).collect()
    }

    pub fn header(&self) -> Vec<String> {
        let first = match self.axis {
            SweepAxis::Snr => "gamma_bar_db",
            SweepAxis::Threshold => "threshold_db",
        };
        let mut h = vec![first.to_string()];
        for m in self.ordered_modes() {
            h.push(format!("{}_{}", self.metric.name(), m.as_str()));
        }
        if self.mc.is_some() {
            h.push("mc_estimate".into());
            h.push("mc_stderr".into());
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x_db: f64,
    /// One value per mode in [`SweepSpec::ordered_modes`] order; NaN on failure.
    pub values: Vec<f64>,
    pub mc: Option<McEstimate>,
    /// Messages for the entries that failed.
    pub notes: Vec<String>,
}

fn fit_at(ch: &DoubleShadowedAkm, k: usize) -> Result<MgsDistribution> {
    let (mg, _) = fit_mixture(ch, k, ExponentVariant::Derived)?;
    MgsDistribution::new(mg, ch.m_s)
}

/// Evaluates every grid point (in parallel) and returns rows in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let grid = spec.grid();
    let modes = spec.ordered_modes();
    let base = match (spec.axis, spec.rescale_zeta) {
        (SweepAxis::Threshold, _) => Some(fit_at(&spec.channel, spec.k)),
        (SweepAxis::Snr, true) => Some(
            spec.channel
                .with_gamma_bar(db_to_linear(grid[0]))
                .and_then(|c| fit_at(&c, spec.k)),
        ),
        (SweepAxis::Snr, false) => None,
    };
    // a single batch serves the whole threshold sweep
    let fixed_batch = match (spec.axis, &spec.mc) {
        (SweepAxis::Threshold, Some(mc)) => Some(montecarlo::sample_snr(&mc.config(spec.channel)?)),
        _ => None,
    };
    let rows = grid
        .par_iter()
        .map(|&x| {
            let mut notes = Vec::new();
            let mut args = spec.metric_args;
            let channel = match spec.axis {
                SweepAxis::Snr => spec.channel.with_gamma_bar(db_to_linear(x)),
                SweepAxis::Threshold => {
                    args.threshold_db = Some(x);
                    Ok(spec.channel)
                }
            };
            let dist = match (&base, &channel) {
                (_, Err(e)) => Err(e.to_string()),
                (Some(Ok(d0)), Ok(ch)) => match spec.axis {
                    SweepAxis::Threshold => Ok(d0.clone()),
                    SweepAxis::Snr => d0
                        .rescale_rates(db_to_linear(grid[0]) / ch.gamma_bar)
                        .map_err(|e| e.to_string()),
                },
                (Some(Err(e)), _) => Err(e.to_string()),
                (None, Ok(ch)) => fit_at(ch, spec.k).map_err(|e| e.to_string()),
            };
            let values = modes
                .iter()
                .map(|&m| {
                    let r = dist
                        .as_ref()
                        .map_err(|e| e.clone())
                        .and_then(|d| evaluate(d, spec.metric, &args, m).map_err(|e| e.to_string()));
                    match r {
                        Ok(r) => r.value,
                        Err(e) => {
                            notes.push(format!("{} {} at {x} dB: {e}", spec.metric.name(), m.as_str()));
                            f64::NAN
                        }
                    }
                })
                .collect();
            let mc = spec.mc.as_ref().map(|mc| {
                let est = match (&fixed_batch, &channel) {
                    (Some(b), _) => b
                        .as_ref()
                        .map_err(|e| e.to_string())
                        .and_then(|b| estimate(&b.snr_samples, spec.metric, &args).map_err(|e| e.to_string())),
                    (None, Ok(ch)) => mc
                        .config(*ch)
                        .and_then(|c| montecarlo::sample_snr(&c))
                        .and_then(|b| estimate(&b.snr_samples, spec.metric, &args))
                        .map_err(|e| e.to_string()),
                    (None, Err(e)) => Err(e.to_string()),
                };
                est.unwrap_or_else(|e| {
                    notes.push(format!("monte carlo at {x} dB: {e}"));
                    McEstimate {
                        estimate: f64::NAN,
                        stderr: f64::NAN,
                    }
                })
            });
            SweepRow {
                x_db: x,
                values,
                mc,
                notes,
            }
        })
        .collect();
    Ok(rows)
}

/// Writes the header and rows as CSV.
pub fn write_csv<W: Write>(spec: &SweepSpec, rows: &[SweepRow], mut w: W) -> Result<()> {
    writeln!(w, "{}", spec.header().join(","))?;
    for r in rows {
        let mut cells = vec![format!("{}", r.x_db)];
        cells.extend(r.values.iter().map(|v| format!("{v}")));
        if let Some(mc) = r.mc {
            cells.push(format!("{}", mc.estimate));
            cells.push(format!("{}", mc.stderr));
        }
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Analytic value against the simulator at the channel's own average SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub metric: MetricKind,
    pub gamma_bar_db: f64,
    pub analytic: f64,
    pub mc: f64,
    pub stderr: f64,
    pub z: f64,
    /// |z| > 3
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateSpec {
    pub channel: DoubleShadowedAkm,
    pub metrics: Vec<MetricKind>,
    pub metric_args: MetricArgs,
    pub mc: McSettings,
    #[serde(default = "default_k")]
    pub k: usize,
}

/// Runs the sampler once and compares every requested metric (exact mode).
pub fn run_validation(spec: &ValidateSpec) -> Result<Vec<ValidationRow>> {
    for &m in &spec.metrics {
        spec.metric_args.check(m)?;
    }
    let cfg = spec.mc.config(spec.channel)?;
    let batch = montecarlo::sample_snr(&cfg)?;
    let d = fit_at(&spec.channel, spec.k)?;
    spec.metrics
        .iter()
        .map(|&m| {
            let analytic = evaluate(&d, m, &spec.metric_args, Mode::Exact)?.value;
            let e = estimate(&batch.snr_samples, m, &spec.metric_args)?;
            let z = if e.stderr > 0.0 {
                (e.estimate - analytic) / e.stderr
            } else if e.estimate == analytic {
                0.0
            } else {
                f64::INFINITY.copysign(e.estimate - analytic)
            };
            Ok(ValidationRow {
                metric: m,
                gamma_bar_db: linear_to_db(spec.channel.gamma_bar),
                analytic,
                mc: e.estimate,
                stderr: e.stderr,
                z,
                flagged: !(z.abs() <= 3.0),
            })
        })
        .collect()
}

pub fn write_validation_csv<W: Write>(rows: &[ValidationRow], mut w: W) -> Result<()> {
    writeln!(w, "metric,gamma_bar_db,analytic,mc,stderr,z,flag")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.metric.name(),
            r.gamma_bar_db,
            r.analytic,
            r.mc,
            r.stderr,
            r.z,
            if r.flagged { "FLAG" } else { "ok" }
        )?;
    }
    Ok(())
}
