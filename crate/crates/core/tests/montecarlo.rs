//! Simulator checks. The composite CDF oracle here mixes the noncentral
//! chi-square law of the multipath power over both shadowing variates on a
//! log grid; it shares nothing with the Gamma-mixture fit.

use fading_core::montecarlo::{mc_abep, mc_capacity, mc_outage, sample_snr};
use fading_core::{db_to_linear, DoubleShadowedAkm, EvalMode, MgsDistribution, SampleBatch, SamplerModel, SimConfig};
use statrs::distribution::{Discrete, Poisson};
use statrs::function::gamma::{gamma_lr, ln_gamma};

fn channel(alpha: f64, kappa: f64, mu: f64, m: f64, m_s: f64, db: f64) -> DoubleShadowedAkm {
    DoubleShadowedAkm::new(alpha, kappa, mu, m, m_s, db_to_linear(db)).unwrap()
}

/// P(S ≤ s) for the unit-mean κ-μ power S: 2(1+κ)μS is noncentral χ² with
/// 2μ degrees of freedom and noncentrality 2κμ.
fn kappa_mu_power_cdf(kappa: f64, mu: f64, s: f64) -> f64 {
    let pois = Poisson::new(kappa * mu).unwrap();
    let x = (1.0 + kappa) * mu * s;
    let mut total = 0.0;
    for j in 0..400u64 {
        let p = pois.pmf(j);
        total += p * gamma_lr(mu + j as f64, x);
        if j as f64 > kappa * mu && p < 1e-18 {
            break;
        }
    }
    total
}

/// Discretized density of ln(θ²ξ²) on a uniform grid with step `h`, as
/// (first abscissa, masses).
fn log_shadow_masses(m: f64, m_s: f64, h: f64) -> (f64, Vec<f64>) {
    let (lo, hi) = (-45.0, 45.0);
    let n = ((hi - lo) / h) as usize + 1;
    let grid = |i: usize| lo + h * i as f64;
    // Gamma(m, 1/m) and InvGamma(m_s, m_s − 1), both in the log variable
    let theta: Vec<f64> = (0..n)
        .map(|i| {
            let u = grid(i);
            (m * m.ln() - ln_gamma(m) + m * u - m * u.exp()).exp() * h
        })
        .collect();
    let xi: Vec<f64> = (0..n)
        .map(|i| {
            let u = grid(i);
            let b = m_s - 1.0;
            (m_s * b.ln() - ln_gamma(m_s) - m_s * u - b * (-u).exp()).exp() * h
        })
        .collect();
    let nz_t: Vec<usize> = (0..n).filter(|&i| theta[i] > 1e-300).collect();
    let nz_x: Vec<usize> = (0..n).filter(|&i| xi[i] > 1e-300).collect();
    let mut out = vec![0.0; 2 * n - 1];
    for &i in &nz_t {
        for &j in &nz_x {
            out[i + j] += theta[i] * xi[j];
        }
    }
    (2.0 * lo, out)
}

/// P(γ ≤ t) with γ = γ̄·θ²ξ²·S^{2/α}.
fn oracle_cdf(ch: &DoubleShadowedAkm, ts: &[f64]) -> Vec<f64> {
    let h = 0.01;
    let (start, masses) = log_shadow_masses(ch.m, ch.m_s, h);
    ts.iter()
        .map(|&t| {
            masses
                .iter()
                .enumerate()
                .filter(|(_, w)| **w > 1e-18)
                .map(|(i, w)| {
                    let z = (start + h * i as f64).exp();
                    w * kappa_mu_power_cdf(ch.kappa, ch.mu, (t / (ch.gamma_bar * z)).powf(ch.alpha / 2.0))
                })
                .sum()
        })
        .collect()
}

fn empirical_cdf(sorted: &[f64], t: f64) -> f64 {
    sorted.partition_point(|&v| v <= t) as f64 / sorted.len() as f64
}

#[test]
fn oracle_is_a_distribution() {
    let ch = channel(2.0, 1.5, 2.0, 2.5, 5.5, 10.0);
    let v = oracle_cdf(&ch, &[1e-6, 1e8]);
    assert!(v[0] < 1e-6 && (v[1] - 1.0).abs() < 1e-6, "{v:?}");
}

fn thresholds() -> Vec<f64> {
    [-10.0, 0.0, 5.0, 10.0, 15.0, 25.0].iter().map(|&db| db_to_linear(db)).collect()
}

#[test]
fn fitted_cdf_matches_double_mixing_oracle() {
    let ch = channel(2.0, 1.5, 2.0, 2.5, 5.5, 10.0);
    let d = MgsDistribution::from_channel(&ch, 40).unwrap();
    let ts = thresholds();
    for (t, o) in ts.iter().zip(oracle_cdf(&ch, &ts)) {
        let f = d.cdf(*t, EvalMode::Exact).unwrap();
        assert!((f - o).abs() < 1e-5, "at {t}: fit {f}, oracle {o}");
    }
}

#[test]
fn fitted_cdf_converges_to_oracle_for_singular_weight() {
    // α = 3, μ = 1: the Laguerre weight y^{−2m/α} is singular at the origin
    // and the fit converges slowly in the lower tail
    let ch = channel(3.0, 0.5, 1.0, 1.5, 1.5, 5.0);
    let ts = thresholds();
    let oracle = oracle_cdf(&ch, &ts);
    let worst = |k| {
        let d = MgsDistribution::from_channel(&ch, k).unwrap();
        ts.iter()
            .zip(&oracle)
            .map(|(t, o)| (d.cdf(*t, EvalMode::Exact).unwrap() - o).abs())
            .fold(0.0, f64::max)
    };
    let errs: Vec<f64> = [10, 20, 40, 64].into_iter().map(worst).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[3] < 5e-4, "{errs:?}");
}

#[test]
fn samples_follow_the_double_mixing_oracle() {
    let ch = channel(3.0, 0.5, 1.0, 1.5, 1.5, 5.0);
    let mut s = sample_snr(&SimConfig::new(ch, 1_000_000, 11, 8).unwrap()).unwrap().snr_samples;
    s.sort_by(f64::total_cmp);
    let ts: Vec<f64> = (-20..=30).map(|db| db_to_linear(db as f64)).collect();
    let oracle = oracle_cdf(&ch, &ts);
    let sup = ts
        .iter()
        .zip(&oracle)
        .map(|(t, o)| (empirical_cdf(&s, *t) - o).abs())
        .fold(0.0, f64::max);
    assert!(sup < 0.003, "sup distance {sup}");
}

#[test]
fn empirical_cdf_matches_analytic() {
    let ch = channel(2.0, 1.5, 2.0, 2.5, 5.5, 10.0);
    let d = MgsDistribution::from_channel(&ch, 30).unwrap();
    let mut s = sample_snr(&SimConfig::new(ch, 1_000_000, 5, 16).unwrap()).unwrap().snr_samples;
    s.sort_by(f64::total_cmp);
    let mut sup: f64 = 0.0;
    for i in 0..200 {
        let t = db_to_linear(-15.0 + 0.25 * i as f64);
        sup = sup.max((empirical_cdf(&s, t) - d.cdf(t, EvalMode::Exact).unwrap()).abs());
    }
    assert!(sup < 0.01, "sup distance {sup}");
}

#[test]
fn rayleigh_limit() {
    // κ → 0, μ = 1, α = 2 with negligible shadowing: exponential SNR
    let ch = DoubleShadowedAkm::new(2.0, 1e-6, 1.0, 200.0, 200.0, 1.0).unwrap();
    let mut s = sample_snr(&SimConfig::new(ch, 100_000, 3, 4).unwrap()).unwrap().snr_samples;
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let ks = s
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-x).exp();
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.01, "KS statistic {ks}");
}

#[test]
fn mean_snr_at_alpha_two() {
    let ch = channel(2.0, 1.5, 2.0, 2.5, 5.5, 10.0);
    let s = sample_snr(&SimConfig::new(ch, 400_000, 9, 8).unwrap()).unwrap().snr_samples;
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let var = s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let z = (mean - ch.gamma_bar) / (var / n).sqrt();
    assert!(z.abs() < 3.0, "mean {mean}, z {z}");
}

#[test]
fn deterministic_across_thread_pools() {
    let cfg = SimConfig::new(channel(1.5, 5.0, 2.0, 1.5, 50.0, 20.0), 10_007, 42, 7).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_snr(&cfg).unwrap())
    };
    let one = run(1);
    assert_eq!(one.snr_samples.len(), 10_007);
    assert_eq!(one, run(4));
    assert_eq!(one, run(13));
    let other = sample_snr(&SimConfig { seed: 43, ..cfg.clone() }).unwrap();
    assert_ne!(one.snr_samples, other.snr_samples);
    assert_ne!(one.config_digest, other.config_digest);
}

#[test]
fn config_validation() {
    let ch = channel(2.0, 1.0, 1.5, 2.0, 3.0, 0.0);
    assert!(SimConfig::new(ch, 10, 0, 1).is_err());
    let ch = channel(2.0, 1.0, 1.0, 2.0, 3.0, 0.0);
    assert!(SimConfig::new(ch, 0, 0, 1).is_err());
    assert!(SimConfig::new(ch, 10, 0, 0).is_err());
}

#[test]
fn save_and_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("batch.bin");
    let mut cfg = SimConfig::new(channel(2.5, 1.5, 2.0, 2.5, 5.5, 7.3), 1000, 1, 3).unwrap();
    cfg.sampler = SamplerModel::DominantComponent;
    let batch = sample_snr(&cfg).unwrap();
    batch.save(&path, &cfg).unwrap();
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 8000);
    let (back, back_cfg) = SampleBatch::load(&path).unwrap();
    assert_eq!(back, batch);
    assert_eq!(back_cfg, cfg);

    let other = SimConfig { seed: 2, ..cfg.clone() };
    assert!(batch.save(&dir.path().join("x.bin"), &other).is_err());

    // a sidecar edited after the fact no longer matches the digest
    let sidecar = dir.path().join("batch.bin.json");
    let text = std::fs::read_to_string(&sidecar).unwrap();
    std::fs::write(&sidecar, text.replace("\"seed\": 1,", "\"seed\": 5,")).unwrap();
    assert!(SampleBatch::load(&path).is_err());
    std::fs::write(&sidecar, text).unwrap();

    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..7992]).unwrap();
    assert!(SampleBatch::load(&path).is_err());
}

#[test]
fn csv_export() {
    let cfg = SimConfig::new(channel(2.0, 1.0, 1.0, 2.0, 3.0, 0.0), 5, 0, 1).unwrap();
    let batch = sample_snr(&cfg).unwrap();
    let mut out = Vec::new();
    batch.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "gamma");
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[1].parse::<f64>().unwrap(), batch.snr_samples[0]);
}

#[test]
fn estimators_on_known_samples() {
    let s = [0.5, 1.0, 2.0, 4.0];
    let op = mc_outage(&s, 1.5).unwrap();
    assert_eq!(op.estimate, 0.5);
    assert!((op.stderr - (0.25f64 / 4.0).sqrt()).abs() < 1e-15);
    let acc = mc_capacity(&s).unwrap();
    let want = s.iter().map(|g: &f64| g.ln_1p() / std::f64::consts::LN_2).sum::<f64>() / 4.0;
    assert!((acc.estimate - want).abs() < 1e-15);
    assert!(mc_abep(&s, 1.0).unwrap().estimate < 0.5);
    assert!(mc_outage(&[], 1.0).is_err());
}
