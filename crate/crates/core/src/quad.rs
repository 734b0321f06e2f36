//! Adaptive Gauss-Kronrod quadrature.
//!
//! The 21-point Kronrod extension of the 10-point Gauss-Legendre rule with a
//! global error heap, plus a helper for integrating `exp(ln_f(u))` over a line
//! where the integrand is only known in log form (all the semi-infinite
//! integrals in this crate are mapped to the real line by `γ = e^u`).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{numeric, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_351_996,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    /// Integral of |f|, used to judge cancellation.
    pub abs_value: f64,
    pub evals: usize,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub epsabs: f64,
    pub epsrel: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            epsabs: 0.0,
            epsrel: 1e-12,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    pub fn rel(epsrel: f64) -> Self {
        Self {
            epsrel,
            ..Self::default()
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[10];
    let mut resg = 0.0;
    let mut resabs = fc.abs() * WGK[10];
    for (j, (&x, &w)) in XGK[..10].iter().zip(WGK[..10].iter()).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        resk += w * (f1 + f2);
        resabs += w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let value = resk * half;
    let abs_value = resabs * half.abs();
    let mut error = ((resk - resg) * half).abs();
    // QUADPACK's sharpening of the raw Gauss/Kronrod difference.
    if error > 0.0 && abs_value > 0.0 {
        let mean = resk * 0.5;
        let mut resasc = WGK[10] * (fc - mean).abs();
        for (&x, &w) in XGK[..10].iter().zip(WGK[..10].iter()) {
            let dx = half * x;
            resasc += w * ((f(center - dx) - mean).abs() + (f(center + dx) - mean).abs());
        }
        let resasc = resasc * half.abs();
        if resasc > 0.0 {
            error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
        }
        let floor = 50.0 * f64::EPSILON * abs_value;
        if floor > error {
            error = floor;
        }
    }
    Segment {
        a,
        b,
        value,
        error,
        abs_value,
    }
}

/// Integrates `f` over `[a, b]`, splitting first at the given interior breakpoints.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(numeric("quad", format!("non-finite bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            abs_value: 0.0,
            evals: 0,
            intervals: 0,
        });
    }
    let mut cuts: Vec<f64> = Vec::with_capacity(breakpoints.len() + 2);
    cuts.push(a);
    cuts.extend(
        breakpoints
            .iter()
            .copied()
            .filter(|&x| (x - a) * (x - b) < 0.0),
    );
    cuts.push(b);
    if a < b {
        cuts.sort_by(f64::total_cmp);
    } else {
        cuts.sort_by(|x, y| y.total_cmp(x));
    }
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for w in cuts.windows(2) {
        heap.push(kronrod21(&f, w[0], w[1]));
        evals += 21;
    }
    loop {
        let (value, error, abs_value) = heap.iter().fold((0.0, 0.0, 0.0), |acc, s| {
            (acc.0 + s.value, acc.1 + s.error, acc.2 + s.abs_value)
        });
        if !value.is_finite() {
            return Err(numeric("quad", "integrand produced a non-finite value"));
        }
        let tol = opts.epsabs.max(opts.epsrel * value.abs());
        if error <= tol || heap.len() >= opts.max_intervals {
            if error > tol && error > 1e3 * tol.max(1e-300) {
                return Err(numeric(
                    "quad",
                    format!(
                        "no convergence after {} intervals: value {value:e}, error {error:e}",
                        heap.len()
                    ),
                ));
            }
            return Ok(QuadResult {
                value,
                error,
                abs_value,
                evals,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid == worst.a || mid == worst.b {
            // interval exhausted at machine resolution; keep it and stop refining
            heap.push(worst);
            let (value, error, abs_value) = heap.iter().fold((0.0, 0.0, 0.0), |acc, s| {
                (acc.0 + s.value, acc.1 + s.error, acc.2 + s.abs_value)
            });
            return Ok(QuadResult {
                value,
                error,
                abs_value,
                evals,
                intervals: heap.len(),
            });
        }
        heap.push(kronrod21(&f, worst.a, mid));
        heap.push(kronrod21(&f, mid, worst.b));
        evals += 42;
    }
}

/// Result of [`integrate_exp`]: the integral equals `value * exp(ln_scale)`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledIntegral {
    pub ln_scale: f64,
    pub value: f64,
    pub error: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ScaledIntegral {
    pub fn ln_value(&self) -> f64 {
        self.ln_scale + self.value.ln()
    }

    pub fn value(&self) -> f64 {
        self.value * self.ln_scale.exp()
    }
}

/// Integrates `exp(ln_f(u))` over the real line.
///
/// `ln_f` is scanned on `[lo, hi]` with spacing `step` to locate its maximum;
/// the integration range is then the region where `ln_f` is within `drop`
/// nats of the maximum (extended beyond the scan window if needed). The
/// integrand must decay at least exponentially outside the range.
pub fn integrate_exp<F: Fn(f64) -> f64>(
    ln_f: F,
    lo: f64,
    hi: f64,
    step: f64,
    drop: f64,
    epsrel: f64,
) -> Result<ScaledIntegral> {
    let clean = |u: f64| {
        let v = ln_f(u);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    let grid: Vec<(f64, f64)> = (0..=n)
        .map(|i| {
            let u = lo + (hi - lo) * i as f64 / n as f64;
            (u, clean(u))
        })
        .collect();
    let peak = grid
        .iter()
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::INFINITY {
        return Err(numeric("integrate_exp", "integrand is infinite"));
    }
    if peak == f64::NEG_INFINITY {
        return Ok(ScaledIntegral {
            ln_scale: f64::NEG_INFINITY,
            value: 0.0,
            error: 0.0,
            lo,
            hi,
        });
    }
    let thresh = peak - drop;
    let first = grid.iter().position(|p| p.1 > thresh).unwrap_or(0);
    let last = grid.iter().rposition(|p| p.1 > thresh).unwrap_or(n);
    let h = (hi - lo) / n as f64;
    let mut a = grid[first.saturating_sub(1)].0;
    let mut b = grid[(last + 1).min(n)].0;
    let mut ln_peak = peak;
    // extend beyond the scan window while the integrand is still significant
    let mut guard = 0;
    while clean(a) > thresh && guard < 4000 {
        a -= h;
        ln_peak = ln_peak.max(clean(a));
        guard += 1;
    }
    guard = 0;
    while clean(b) > thresh && guard < 4000 {
        b += h;
        ln_peak = ln_peak.max(clean(b));
        guard += 1;
    }
    if guard >= 4000 {
        return Err(numeric("integrate_exp", "integrand does not decay"));
    }
    let pieces = (((b - a) / h).round() as usize).clamp(1, 64);
    let breaks: Vec<f64> = (1..pieces)
        .map(|i| a + (b - a) * i as f64 / pieces as f64)
        .collect();
    let res = integrate(
        |u| (clean(u) - ln_peak).exp(),
        a,
        b,
        &breaks,
        QuadOptions {
            epsabs: 0.0,
            epsrel,
            max_intervals: 4000,
        },
    )?;
    Ok(ScaledIntegral {
        ln_scale: ln_peak,
        value: res.value,
        error: res.error,
        lo: a,
        hi: b,
    })
}
