use serde::{Deserialize, Serialize};

use crate::error::{domain, numeric, Result};

/// Gauss-Laguerre rule for ∫₀^∞ e^{-y} f(y) dy ≈ Σ w_j f(y_j).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

/// Evaluates `(L_k(x), L_{k-1}(x))` by the three-term recurrence.
fn laguerre_pair(k: usize, x: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 1..=k {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = ((2.0 * jf - 1.0 - x) * p2 - (jf - 1.0) * p3) / jf;
    }
    (p1, p2)
}

/// Nodes and weights of the `k`-point Gauss-Laguerre rule, `1 ≤ k ≤ 64`.
pub fn gauss_laguerre(k: usize) -> Result<QuadratureRule> {
    if !(1..=64).contains(&k) {
        return Err(domain("gauss_laguerre", format!("order must be in 1..=64, got {k}")));
    }
    let n = k as f64;
    let mut nodes: Vec<f64> = Vec::with_capacity(k);
    let mut weights = Vec::with_capacity(k);
    let mut z = 0.0;
    for i in 0..k {
        // classical initial guesses for the i-th root
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * n),
            1 => z + 15.0 / (1.0 + 2.5 * n),
            _ => {
                let ai = (i - 1) as f64;
                z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
            }
        };
        let mut converged = false;
        let mut last_step = f64::INFINITY;
        for _ in 0..100 {
            let (p1, p2) = laguerre_pair(k, z);
            let pp = (n * p1 - n * p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            last_step = (z - z1).abs();
            if last_step <= 4.0 * f64::EPSILON * z.abs() {
                converged = true;
                break;
            }
        }
        // rounding can leave Newton cycling at the last couple of ulps
        converged |= last_step <= 1e-13 * z.abs();
        if !converged {
            return Err(numeric("gauss_laguerre", format!("root {i} of L_{k} did not converge")));
        }
        let (p1, p2) = laguerre_pair(k, z);
        let pp = (n * p1 - n * p2) / z;
        nodes.push(z);
        weights.push(-1.0 / (pp * n * p2));
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        order: k,
    })
}
