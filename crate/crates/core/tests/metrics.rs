use std::f64::consts::LN_2;

use fading_core::metrics::{
    abep, avg_auc, avg_capacity, diversity_gain_estimate, effective_capacity, outage_probability, DiversityMetric,
};
use fading_core::{
    db_to_linear, DoubleShadowedAkm, EvalMode, GammaTerm, MetricResult, MgsDistribution, MixtureGamma, Mode,
    ModulationCoeff,
};

/// K = 1, σ = β = ζ = 1, m_s = 2: f(γ) = 2/(1+γ)³.
fn hand() -> MgsDistribution {
    let mg = MixtureGamma::new(vec![GammaTerm {
        sigma: 1.0,
        beta: 1.0,
        zeta: 1.0,
    }])
    .unwrap();
    MgsDistribution::new(mg, 2.0).unwrap()
}

fn fitted(alpha: f64, kappa: f64, mu: f64, m: f64, m_s: f64, db: f64) -> MgsDistribution {
    let ch = DoubleShadowedAkm::new(alpha, kappa, mu, m, m_s, db_to_linear(db)).unwrap();
    MgsDistribution::from_channel(&ch, 15).unwrap()
}

#[test]
fn hand_distribution_closed_forms() {
    let d = hand();
    assert!((d.pdf(1.0, EvalMode::Exact).unwrap() - 0.25).abs() < 1e-14);
    assert!((d.cdf(1.0, EvalMode::Exact).unwrap() - 0.75).abs() < 1e-12);
    assert!((d.moment(1.0).unwrap() - 1.0).abs() < 1e-12);
    // 1 − (1 + 10^{0.5})^{−2}
    let op = outage_probability(&d, db_to_linear(5.0), Mode::Exact).unwrap().value;
    assert!((op - 0.942_278_460_744_898_3).abs() < 1e-12, "{op}");
    for mode in [Mode::Exact, Mode::Integral] {
        assert!((avg_capacity(&d, mode).unwrap().value - 0.5 / LN_2).abs() < 1e-10);
        assert!((effective_capacity(&d, 1.0, mode).unwrap().value - 1.5f64.log2()).abs() < 1e-10);
    }
}

#[test]
fn hand_distribution_asymptotic_forms() {
    let d = hand();
    // pdf → 2, cdf → 2γ and mgf → 2/s as ζ → 0
    assert!((d.pdf(0.3, EvalMode::Asymptotic).unwrap() - 2.0).abs() < 1e-14);
    assert!((d.cdf(0.3, EvalMode::Asymptotic).unwrap() - 0.6).abs() < 1e-14);
    assert!((d.mgf(4.0, EvalMode::Asymptotic).unwrap() - 0.5).abs() < 1e-14);
    assert!(d.mgf(0.0, EvalMode::Asymptotic).is_err());
}

#[test]
fn asymptotic_capacity_warns_when_negative() {
    let r = avg_capacity(&fitted(2.0, 1.5, 2.0, 2.5, 1.5, -10.0), Mode::Asymptotic).unwrap();
    assert!(r.value < 0.0);
    assert_eq!(r.diagnostics.get("negative"), Some(&1.0));
    assert!(!r.warnings.is_empty());
}

#[test]
fn asymptotic_forms_converge_at_high_snr() {
    let d = fitted(2.0, 1.5, 2.0, 2.5, 5.5, 60.0);
    let gap = |e: f64, a: f64| ((e - a) / e).abs();
    let op = |m| outage_probability(&d, db_to_linear(5.0), m).unwrap().value;
    assert!(gap(op(Mode::Exact), op(Mode::Asymptotic)) < 1e-2);
    let ab = |m| abep(&d, ModulationCoeff::BPSK, m).unwrap().value;
    assert!(gap(ab(Mode::Exact), ab(Mode::Asymptotic)) < 1e-2);
    let acc = |m| avg_capacity(&d, m).unwrap().value;
    assert!(gap(acc(Mode::Exact), acc(Mode::Asymptotic)) < 1e-2);
}

#[test]
fn diversity_gain_follows_shadowing_index() {
    for m in [1.5, 3.0] {
        let ch = DoubleShadowedAkm::new(2.0, 1.5, 2.0, m, 5.5, 1.0).unwrap();
        let op = DiversityMetric::Outage {
            threshold: db_to_linear(5.0),
        };
        let g = diversity_gain_estimate(&ch, op, (40.0, 60.0), Mode::Asymptotic).unwrap();
        assert!((g - m).abs() < 1e-6 * m, "OP slope {g} for m = {m}");
        let ab = DiversityMetric::Abep {
            rho: ModulationCoeff::BPSK,
        };
        let g = diversity_gain_estimate(&ch, ab, (40.0, 60.0), Mode::Exact).unwrap();
        assert!((g - m).abs() < 0.1 * m, "ABEP slope {g} for m = {m}");
    }
}

#[test]
fn diversity_gain_rejects_bad_range() {
    let ch = DoubleShadowedAkm::new(2.0, 1.5, 2.0, 2.0, 5.5, 1.0).unwrap();
    let op = DiversityMetric::Outage { threshold: 1.0 };
    assert!(diversity_gain_estimate(&ch, op, (50.0, 40.0), Mode::Exact).is_err());
}

#[test]
fn metric_domains() {
    let d = hand();
    assert!(outage_probability(&d, 0.0, Mode::Exact).is_err());
    assert!(abep(&d, ModulationCoeff(-1.0), Mode::Exact).is_err());
    assert!(effective_capacity(&d, 0.0, Mode::Exact).is_err());
    assert!(ModulationCoeff::new(f64::NAN).is_err());
    assert_eq!(ModulationCoeff::BFSK.rho(), 0.5);
    assert!("bogus".parse::<Mode>().is_err());
    assert_eq!("integral".parse::<Mode>().unwrap(), Mode::Integral);
}

#[test]
fn auc_complement_is_reported() {
    let d = fitted(2.0, 1.5, 2.0, 2.5, 5.5, 30.0);
    let r = avg_auc(&d, 3, Mode::Exact).unwrap();
    let c = r.diagnostics["complement"];
    assert!(c > 0.0 && c < 1e-2);
    assert!((r.value + c - 1.0).abs() < 1e-15);
}

#[test]
fn integral_mode_reports_quadrature_error() {
    let d = fitted(2.0, 1.5, 2.0, 2.5, 5.5, 10.0);
    let r = abep(&d, ModulationCoeff::BPSK, Mode::Integral).unwrap();
    assert!(r.diagnostics["quad_error"] < 1e-10 * r.value.max(1e-300) + 1e-14);
    let e = abep(&d, ModulationCoeff::BPSK, Mode::Exact).unwrap();
    assert!(e.diagnostics.contains_key("contour_rel_error"));
}

#[test]
fn metric_result_serializes_mode_in_lowercase() {
    let r = avg_capacity(&hand(), Mode::Exact).unwrap();
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains("\"mode\":\"exact\""), "{json}");
    let back: MetricResult = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r);
}

#[test]
fn performance_improves_with_every_parameter() {
    let base = [2.0, 1.5, 2.0, 2.5, 5.5];
    let bumped = [3.0, 5.0, 3.0, 4.0, 50.0];
    let eval = |p: [f64; 5]| {
        let d = fitted(p[0], p[1], p[2], p[3], p[4], 15.0);
        (
            outage_probability(&d, db_to_linear(5.0), Mode::Exact).unwrap().value,
            abep(&d, ModulationCoeff::BPSK, Mode::Exact).unwrap().value,
            avg_capacity(&d, Mode::Exact).unwrap().value,
            effective_capacity(&d, 3.5, Mode::Exact).unwrap().value,
            avg_auc(&d, 3, Mode::Exact).unwrap().value,
        )
    };
    let b = eval(base);
    for i in 0..5 {
        let mut p = base;
        p[i] = bumped[i];
        let v = eval(p);
        assert!(v.0 < b.0 && v.1 < b.1, "parameter {i}: {v:?} vs {b:?}");
        assert!(v.2 > b.2 && v.3 > b.3 && v.4 > b.4, "parameter {i}: {v:?} vs {b:?}");
    }
}
