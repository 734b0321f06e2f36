//! Meijer G-function by direct Mellin-Barnes quadrature.
//!
//! G(x) = (1/2πi) ∫ Φ(s) x^{-s} ds with
//! Φ(s) = Π Γ(b_top + s) Π Γ(1 − a_top − s) / (Π Γ(1 − b_bot − s) Π Γ(a_bot + s)),
//! integrated along the vertical line Re s = c inside the strip that separates
//! the left pole family of Γ(b_top + s) from the right family of Γ(1 − a_top − s).
//! The line converges exponentially whenever δ = m + n − (p + q)/2 > 0.
//! `c` is placed where |Φ(c)| x^{-c} is smallest, which keeps the oscillatory
//! cancellation along the line small.

use num_complex::Complex64;

use super::gamma::ln_gamma_complex;
use crate::error::{domain, numeric, Error, Result};
use crate::quad::{integrate, QuadOptions};

/// Parameters of G^{m,n}_{p,q}: `a_top` = a_1..a_n, `a_bot` = a_{n+1}..a_p,
/// `b_top` = b_1..b_m, `b_bot` = b_{m+1}..b_q.
#[derive(Debug, Clone, PartialEq)]
pub struct MeijerGSpec {
    pub a_top: Vec<f64>,
    pub a_bot: Vec<f64>,
    pub b_top: Vec<f64>,
    pub b_bot: Vec<f64>,
}

/// Contour evaluation with its diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct MeijerGEval {
    pub value: f64,
    /// Estimated absolute quadrature error.
    pub error: f64,
    /// Abscissa of the vertical contour.
    pub contour_c: f64,
    /// ∫|integrand| / |∫ integrand|; 1 means no cancellation.
    pub cancellation: f64,
    pub t_max: f64,
}

impl MeijerGSpec {
    pub fn new(a_top: &[f64], a_bot: &[f64], b_top: &[f64], b_bot: &[f64]) -> Self {
        Self {
            a_top: a_top.to_vec(),
            a_bot: a_bot.to_vec(),
            b_top: b_top.to_vec(),
            b_bot: b_bot.to_vec(),
        }
    }

    /// `(m, n, p, q)`.
    pub fn orders(&self) -> (usize, usize, usize, usize) {
        let m = self.b_top.len();
        let n = self.a_top.len();
        (m, n, n + self.a_bot.len(), m + self.b_bot.len())
    }

    pub fn delta(&self) -> f64 {
        let (m, n, p, q) = self.orders();
        (m + n) as f64 - 0.5 * (p + q) as f64
    }

    /// Open interval of admissible contour abscissas.
    pub fn strip(&self) -> (f64, f64) {
        let lo = self
            .b_top
            .iter()
            .map(|b| -b)
            .fold(f64::NEG_INFINITY, f64::max);
        let hi = self
            .a_top
            .iter()
            .map(|a| 1.0 - a)
            .fold(f64::INFINITY, f64::min);
        (lo, hi)
    }

    fn validate(&self) -> Result<()> {
        let all = self
            .a_top
            .iter()
            .chain(&self.a_bot)
            .chain(&self.b_top)
            .chain(&self.b_bot);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(domain("meijer_g", "non-finite parameter"));
        }
        if !(self.delta() > 0.0) {
            return Err(domain(
                "meijer_g",
                format!(
                    "orders {:?} give delta = {} <= 0; the vertical contour does not converge",
                    self.orders(),
                    self.delta()
                ),
            ));
        }
        let (lo, hi) = self.strip();
        if !(hi - lo > 1e-9) {
            return Err(Error::Degenerate(format!(
                "pole families of Γ(b_top + s) and Γ(1 - a_top - s) overlap (strip [{lo}, {hi}])"
            )));
        }
        Ok(())
    }

    fn ln_phi(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &b in &self.b_top {
            acc += ln_gamma_complex(s + b);
        }
        for &a in &self.a_top {
            acc += ln_gamma_complex(1.0 - a - s);
        }
        for &b in &self.b_bot {
            acc -= ln_gamma_complex(1.0 - b - s);
        }
        for &a in &self.a_bot {
            acc -= ln_gamma_complex(s + a);
        }
        acc
    }
}

/// G^{m,n}_{p,q}(x) for x > 0.
pub fn meijer_g(spec: &MeijerGSpec, x: f64) -> Result<f64> {
    meijer_g_detailed(spec, x).map(|e| e.value)
}

pub fn meijer_g_detailed(spec: &MeijerGSpec, x: f64) -> Result<MeijerGEval> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("meijer_g", format!("x must be positive, got {x}")));
    }
    spec.validate()?;
    let lnx = x.ln();
    let (c, h0) = choose_abscissa(spec, lnx)?;

    let log_mag = |t: f64| {
        let s = Complex64::new(c, t);
        (spec.ln_phi(s) - s * lnx).re - h0
    };
    // truncate where the integrand has dropped 45 nats below its running maximum
    let mut running = log_mag(0.0);
    let mut t_max = 0.0;
    let mut below = 0;
    let mut t = 0.0;
    while t < 4000.0 {
        t += 0.5;
        let v = log_mag(t);
        if v.is_nan() {
            continue;
        }
        running = running.max(v);
        if v < running - 45.0 {
            below += 1;
            if below >= 2 {
                t_max = t;
                break;
            }
        } else {
            below = 0;
        }
    }
    if t_max == 0.0 {
        return Err(numeric("meijer_g", "contour integrand does not decay"));
    }

    let integrand = |t: f64| {
        let s = Complex64::new(c, t);
        let v = (spec.ln_phi(s) - s * lnx - h0).exp().re;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let spacing = 0.5f64.min(std::f64::consts::PI / lnx.abs().max(1e-3));
    let pieces = ((t_max / spacing).ceil() as usize).clamp(1, 400);
    let breaks: Vec<f64> = (1..pieces)
        .map(|i| t_max * i as f64 / pieces as f64)
        .collect();
    let r = integrate(
        integrand,
        0.0,
        t_max,
        &breaks,
        QuadOptions {
            epsabs: 0.0,
            epsrel: 1e-12,
            max_intervals: 20_000,
        },
    )
    .or_else(|_| {
        // heavy cancellation: settle for an absolute tolerance relative to ∫|f|
        let probe = integrate(
            |t| integrand(t).abs(),
            0.0,
            t_max,
            &breaks,
            QuadOptions::rel(1e-6),
        )?;
        integrate(
            integrand,
            0.0,
            t_max,
            &breaks,
            QuadOptions {
                epsabs: 1e-14 * probe.value,
                epsrel: 1e-12,
                max_intervals: 20_000,
            },
        )
    })?;
    let scale = h0.exp() / std::f64::consts::PI;
    let value = r.value * scale;
    if !value.is_finite() {
        return Err(numeric("meijer_g", format!("result overflows at x = {x}")));
    }
    Ok(MeijerGEval {
        value,
        error: r.error * scale,
        contour_c: c,
        cancellation: if r.value != 0.0 {
            r.abs_value / r.value.abs()
        } else {
            f64::INFINITY
        },
        t_max,
    })
}

/// Minimises `ln|Φ(c)| − c ln x` over the strip; returns `(c, minimum)`.
fn choose_abscissa(spec: &MeijerGSpec, lnx: f64) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = spec.strip();
    if !lo.is_finite() && !hi.is_finite() {
        lo = -60.0;
        hi = 60.0;
    } else if !lo.is_finite() {
        lo = hi - 60.0;
    } else if !hi.is_finite() {
        hi = lo + 60.0;
    }
    let width = hi - lo;
    let objective = |c: f64| {
        let v = spec.ln_phi(Complex64::new(c, 0.0)).re - c * lnx;
        // a zero of Φ on the real axis says nothing about the rest of the line
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    // cosine-clustered grid resolves minima hugging a pole at either edge
    const N: usize = 400;
    let node = |i: f64| lo + width * 0.5 * (1.0 - (std::f64::consts::PI * i / N as f64).cos());
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 1..N {
        let v = objective(node(i as f64));
        if v < best {
            best = v;
            best_i = i;
        }
    }
    if !best.is_finite() {
        return Err(numeric("meijer_g", "no admissible contour abscissa"));
    }
    // golden-section refinement between the neighbouring grid nodes
    let (mut a, mut b) = (node(best_i as f64 - 1.0), node(best_i as f64 + 1.0));
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - gr * (b - a);
    let mut x2 = a + gr * (b - a);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    for _ in 0..60 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = objective(x2);
        }
    }
    let (c, v) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    if v <= best {
        Ok((c, v))
    } else {
        Ok((node(best_i as f64), best))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn logarithm_instance() {
        let spec = MeijerGSpec::new(&[1.0, 1.0], &[], &[1.0], &[0.0]);
        for &x in &[0.1f64, 1.0, 10.0] {
            let g = meijer_g(&spec, x).unwrap();
            assert!((g - x.ln_1p()).abs() <= 1e-8, "x = {x}: {g}");
            assert!(rel(g, x.ln_1p()) < 1e-10);
        }
    }

    #[test]
    fn abep_instance() {
        let spec = MeijerGSpec::new(&[1.0 - 2.5], &[1.0], &[0.0, 5.5, 0.5], &[]);
        let cases = [
            (1e-3, 120.294_736_706_805_91),
            (0.7, 54.174_754_357_809_78),
            (3.0, 18.947_407_229_080_405),
            (250.0, 0.003_815_177_123_611_757),
        ];
        for (x, expect) in cases {
            let g = meijer_g(&spec, x).unwrap();
            assert!(rel(g, expect) < 1e-10, "x = {x}: {g} vs {expect}");
        }
        let spec = MeijerGSpec::new(&[1.0 - 0.7], &[1.0], &[0.0, 1.3, 0.5], &[]);
        assert!(rel(meijer_g(&spec, 0.7).unwrap(), 0.911_879_174_968_740_8) < 1e-10);
        assert!(rel(meijer_g(&spec, 40.0).unwrap(), 0.096_838_669_551_631_9) < 1e-10);
    }

    #[test]
    fn capacity_instance() {
        let spec = MeijerGSpec::new(&[1.0 - 2.5, 1.0, 1.0], &[], &[5.5, 1.0], &[0.0]);
        let cases = [
            (0.7, 21.206_563_452_853_44),
            (1e-4, 0.003_865_438_327_079_96),
            (12.0, 126.397_353_621_888_01),
            (1e7, 1_058.343_714_372_876_7),
        ];
        for (x, expect) in cases {
            let g = meijer_g(&spec, x).unwrap();
            assert!(rel(g, expect) < 1e-10, "x = {x}: {g} vs {expect}");
        }
        // integer β: coincident poles on the same side of the contour
        let spec = MeijerGSpec::new(&[-1.0, 1.0, 1.0], &[], &[2.0, 1.0], &[0.0]);
        assert!(rel(meijer_g(&spec, 0.7).unwrap(), 0.667_679_191_890_689_2) < 1e-10);
        assert!(rel(meijer_g(&spec, 300.0).unwrap(), 5.710_301_982_270_041) < 1e-10);
    }

    #[test]
    fn mgf_instance() {
        let spec = MeijerGSpec::new(&[0.0], &[], &[0.0, 2.0], &[]);
        for (x, expect) in [
            (1.0, 0.596_347_362_323_194_1),
            (0.7, 0.668_812_229_814_497_7),
            (30.0, 0.060_764_883_082_112_69),
        ] {
            assert!(rel(meijer_g(&spec, x).unwrap(), expect) < 1e-10);
        }
        let spec = MeijerGSpec::new(&[1.0 - 3.3], &[], &[0.0, 50.0], &[]);
        assert!(rel(meijer_g(&spec, 0.7).unwrap(), 1.557_686_380_396_325_2e63) < 1e-10);
        assert!(rel(meijer_g(&spec, 8.0).unwrap(), 9.937_964_891_758_562e62) < 1e-10);
    }

    #[test]
    fn degenerate_and_invalid() {
        // Γ(1+s) and Γ(-s - 1) leave no separating strip
        let spec = MeijerGSpec::new(&[2.0], &[], &[1.0], &[]);
        assert!(matches!(meijer_g(&spec, 1.0), Err(Error::Degenerate(_))));
        let spec = MeijerGSpec::new(&[], &[0.5], &[0.0], &[]);
        assert!(matches!(meijer_g(&spec, 1.0), Err(Error::Domain { .. })));
        let spec = MeijerGSpec::new(&[1.0, 1.0], &[], &[1.0], &[0.0]);
        assert!(meijer_g(&spec, 0.0).is_err());
    }

    #[test]
    fn orders_and_strip() {
        let spec = MeijerGSpec::new(&[1.0 - 2.5, 1.0, 1.0], &[], &[5.5, 1.0], &[0.0]);
        assert_eq!(spec.orders(), (2, 3, 3, 3));
        assert_eq!(spec.delta(), 2.0);
        assert_eq!(spec.strip(), (-1.0, 0.0));
    }
}
