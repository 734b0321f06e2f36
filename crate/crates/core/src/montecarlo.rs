//! Monte Carlo simulator of the double-shadowed α-κ-μ channel.
//!
//! Each of `streams` substreams owns a ChaCha8 generator seeded with `seed`
//! and stream index `s`, and draws a fixed contiguous share of the samples,
//! so the batch is bit-identical for any worker count.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use libm::erfc;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{domain, numeric, Result};
use crate::fit::DoubleShadowedAkm;
use crate::metrics::auc_weights;

/// How the two shadowing variates enter the SNR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerModel {
    /// γ = γ̄·ξ²·ϑ²·S^{2/α}: Gamma shadowing of the mean SNR and
    /// inverse-Nakagami shadowing of the SNR. This is the model the Gamma
    /// mixture fit represents.
    #[default]
    Multiplicative,
    /// γ = γ̄·(ξ²·S)^{2/α} with ϑ scaling the dominant component inside S.
    DominantComponent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub channel: DoubleShadowedAkm,
    pub n_samples: usize,
    pub seed: u64,
    pub streams: usize,
    #[serde(default)]
    pub sampler: SamplerModel,
}

impl SimConfig {
    pub fn new(channel: DoubleShadowedAkm, n_samples: usize, seed: u64, streams: usize) -> Result<Self> {
        let cfg = Self {
            channel,
            n_samples,
            seed,
            streams,
            sampler: SamplerModel::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mu = self.channel.mu;
        if mu.fract() != 0.0 || mu < 1.0 {
            return Err(domain(
                "sample_snr",
                format!("the simulator needs an integer number of clusters, got mu = {mu}"),
            ));
        }
        if self.n_samples == 0 {
            return Err(domain("sample_snr", "n_samples must be positive"));
        }
        if self.streams == 0 {
            return Err(domain("sample_snr", "streams must be positive"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("SimConfig serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub snr_samples: Vec<f64>,
    pub config_digest: String,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    config: SimConfig,
    config_digest: String,
    n_samples: usize,
    format: String,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

impl SampleBatch {
    /// Writes the samples as little-endian f64 to `path` and the config to
    /// `<path>.json`.
    pub fn save(&self, path: &Path, cfg: &SimConfig) -> Result<()> {
        if cfg.digest() != self.config_digest {
            return Err(domain("SampleBatch::save", "config does not match the batch digest"));
        }
        let mut w = BufWriter::new(File::create(path)?);
        for v in &self.snr_samples {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        let side = Sidecar {
            config: cfg.clone(),
            config_digest: self.config_digest.clone(),
            n_samples: self.snr_samples.len(),
            format: "f64-le".into(),
        };
        std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)?)?;
        Ok(())
    }

    /// Reads a batch written by [`SampleBatch::save`], checking the digest.
    pub fn load(path: &Path) -> Result<(Self, SimConfig)> {
        let side: Sidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
        if side.config.digest() != side.config_digest {
            return Err(numeric("SampleBatch::load", "sidecar digest does not match its config"));
        }
        let mut bytes = Vec::new();
        BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
        if bytes.len() != 8 * side.n_samples {
            return Err(numeric(
                "SampleBatch::load",
                format!("expected {} samples, file holds {} bytes", side.n_samples, bytes.len()),
            ));
        }
        let snr_samples = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok((
            Self {
                snr_samples,
                config_digest: side.config_digest,
            },
            side.config,
        ))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "gamma")?;
        for v in &self.snr_samples {
            writeln!(w, "{v:e}")?;
        }
        Ok(())
    }
}

struct Sampler {
    model: SamplerModel,
    gamma_bar: f64,
    inv_half_alpha: f64,
    mu: usize,
    p: f64,
    shadow_mean: Gamma<f64>,
    shadow_snr: Gamma<f64>,
    ms1: f64,
    scatter: Normal<f64>,
}

impl Sampler {
    fn new(cfg: &SimConfig) -> Result<Self> {
        let ch = &cfg.channel;
        let bad = |e: rand_distr::GammaError| domain("sample_snr", format!("{e}"));
        Ok(Self {
            model: cfg.sampler,
            gamma_bar: ch.gamma_bar,
            inv_half_alpha: 2.0 / ch.alpha,
            mu: ch.mu as usize,
            // per-cluster in-phase and quadrature dominant amplitude, d²/(2μ) each
            p: (ch.kappa / ((1.0 + ch.kappa) * 2.0 * ch.mu)).sqrt(),
            shadow_mean: Gamma::new(ch.m, 1.0 / ch.m).map_err(bad)?,
            shadow_snr: Gamma::new(ch.m_s, 1.0).map_err(bad)?,
            ms1: ch.m_s - 1.0,
            scatter: Normal::new(0.0, (1.0 / (2.0 * ch.mu * (1.0 + ch.kappa))).sqrt())
                .map_err(|e| domain("sample_snr", format!("{e}")))?,
        })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let theta2 = self.shadow_mean.sample(rng);
        let xi2 = self.ms1 / self.shadow_snr.sample(rng);
        let amp = match self.model {
            SamplerModel::Multiplicative => self.p,
            SamplerModel::DominantComponent => theta2.sqrt() * self.p,
        };
        let mut s = 0.0;
        for _ in 0..self.mu {
            let x = self.scatter.sample(rng) + amp;
            let y = self.scatter.sample(rng) + amp;
            s += x * x + y * y;
        }
        match self.model {
            SamplerModel::Multiplicative => self.gamma_bar * xi2 * theta2 * s.powf(self.inv_half_alpha),
            SamplerModel::DominantComponent => self.gamma_bar * (xi2 * s).powf(self.inv_half_alpha),
        }
    }
}

/// Draws `cfg.n_samples` instantaneous SNR values.
pub fn sample_snr(cfg: &SimConfig) -> Result<SampleBatch> {
    cfg.validate()?;
    let sampler = Sampler::new(cfg)?;
    let n = cfg.n_samples;
    let streams = cfg.streams;
    let chunks: Vec<Vec<f64>> = (0..streams)
        .into_par_iter()
        .map(|s| {
            let count = n / streams + usize::from(s < n % streams);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(s as u64);
            (0..count).map(|_| sampler.draw(&mut rng)).collect()
        })
        .collect();
    let snr_samples: Vec<f64> = chunks.concat();
    if let Some(bad) = snr_samples.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(numeric("sample_snr", format!("sampler produced {bad}")));
    }
    Ok(SampleBatch {
        snr_samples,
        config_digest: cfg.digest(),
    })
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 64 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn mean_stderr(values: &[f64]) -> Result<McEstimate> {
    if values.is_empty() {
        return Err(domain("monte carlo", "empty batch"));
    }
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = if values.len() > 1 {
        pairwise_sum(&sq) / (n - 1.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        estimate: mean,
        stderr: (var / n).sqrt(),
    })
}

/// Fraction of samples below `threshold` with its binomial standard error.
pub fn mc_outage(samples: &[f64], threshold: f64) -> Result<McEstimate> {
    if samples.is_empty() {
        return Err(domain("mc_outage", "empty batch"));
    }
    let n = samples.len() as f64;
    let p = samples.iter().filter(|&&g| g < threshold).count() as f64 / n;
    Ok(McEstimate {
        estimate: p,
        stderr: (p * (1.0 - p) / n).sqrt(),
    })
}

/// Q-function tail Q(x) = P(N(0,1) > x).
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

pub fn mc_abep(samples: &[f64], rho: f64) -> Result<McEstimate> {
    let k: Vec<f64> = samples.iter().map(|&g| q_function((2.0 * rho * g).sqrt())).collect();
    mean_stderr(&k)
}

pub fn mc_capacity(samples: &[f64]) -> Result<McEstimate> {
    let k: Vec<f64> = samples.iter().map(|&g| g.ln_1p() / std::f64::consts::LN_2).collect();
    mean_stderr(&k)
}

/// −(1/A)·log₂ of the mean of (1+γ)^{−A}; delta-method standard error.
pub fn mc_effective_capacity(samples: &[f64], a: f64) -> Result<McEstimate> {
    if !(a > 0.0) {
        return Err(domain("mc_effective_capacity", format!("A must be positive, got {a}")));
    }
    let k: Vec<f64> = samples.iter().map(|&g| (-a * g.ln_1p()).exp()).collect();
    let m = mean_stderr(&k)?;
    let scale = a * std::f64::consts::LN_2;
    Ok(McEstimate {
        estimate: -m.estimate.log2() / a,
        stderr: m.stderr / (scale * m.estimate),
    })
}

/// Mean of the conditional AUC 1 − Σ_i c_i γ^i e^{−γ/2}.
pub fn mc_auc(samples: &[f64], u: u32) -> Result<McEstimate> {
    if u == 0 {
        return Err(domain("mc_auc", "u must be a positive integer"));
    }
    let w = auc_weights(u);
    let k: Vec<f64> = samples
        .iter()
        .map(|&g| {
            let e = (-0.5 * g).exp();
            let mut pow = 1.0;
            let mut acc = 0.0;
            for c in &w {
                acc += c * pow * e;
                pow *= g;
            }
            1.0 - acc
        })
        .collect();
    mean_stderr(&k)
}
