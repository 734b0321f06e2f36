//! Mixture-Gamma-Shadowed (MGS) fading models.
//!
//! Fits double-shadowed α-κ-μ channels into a mixture of Gamma densities mixed
//! over inverse-Nakagami-m shadowing, evaluates outage, bit-error, capacity,
//! effective-capacity and energy-detection AUC metrics in exact, asymptotic and
//! direct-integral form, and cross-checks them with a Monte Carlo simulator of
//! the physical channel.

pub mod error;
pub mod fit;
pub mod metrics;
pub mod mg;
pub mod mgs;
pub mod montecarlo;
pub mod quad;
pub mod specfun;
pub mod sweep;

pub use error::{Error, Result};
pub use fit::{DoubleShadowedAkm, ExponentVariant, FitReport};
pub use metrics::{MetricResult, Mode, ModulationCoeff};
pub use mg::{GammaTerm, MixtureGamma};
pub use mgs::{EvalMode, MgsDistribution};
pub use montecarlo::{SampleBatch, SamplerModel, SimConfig};

/// Converts decibels to a linear power ratio (`10^{dB/10}`).
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
