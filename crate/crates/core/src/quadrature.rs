//! Quadrature rules: Gauss–Laguerre nodes with log-weights, and an adaptive
//! Gauss–Kronrod integrator for smooth one-dimensional integrals.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{CasimirError, Result};

/// Gauss–Laguerre rule for `∫_0^∞ e^{-t} f(t) dt ≈ Σ w_j f(t_j)`.
///
/// Weights are kept as logarithms; the large-node weights underflow long
/// before the polynomial factors they multiply stop mattering.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub ln_weights: Vec<f64>,
}

/// `(L_n(t), L_{n-1}(t), ln_scale)` by the three-term recurrence, rescaled.
fn laguerre_pair(n: usize, t: f64) -> (f64, f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = 1.0 - t;
    let mut scale = 0.0;
    if n == 0 {
        return (p0, 0.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0 - t) * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
        let a = p1.abs();
        if a > 1e150 {
            p0 /= a;
            p1 /= a;
            scale += a.ln();
        }
    }
    (p1, p0, scale)
}

impl GaussLaguerre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        // Golub–Welsch for starting values
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            jac[(i, i)] = (2 * i + 1) as f64;
            if i + 1 < n {
                jac[(i, i + 1)] = (i + 1) as f64;
                jac[(i + 1, i)] = (i + 1) as f64;
            }
        }
        let eig = SymmetricEigen::new(jac);
        let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let nf = n as f64;
        let mut ln_weights = Vec::with_capacity(n);
        for t in nodes.iter_mut() {
            // Newton polish on L_n
            for _ in 0..8 {
                let (ln, lnm1, _) = laguerre_pair(n, *t);
                let d = nf * (ln - lnm1) / *t;
                let step = ln / d;
                *t -= step;
                if step.abs() <= 1e-16 * t.abs() {
                    break;
                }
            }
            // w = t / ((n+1)^2 L_{n+1}(t)^2)
            let (lnp1, _, scale) = laguerre_pair(n + 1, *t);
            ln_weights.push(t.ln() - 2.0 * (nf + 1.0).ln() - 2.0 * (lnp1.abs().ln() + scale));
        }
        GaussLaguerre { nodes, ln_weights }
    }

    /// Shared instance per node count.
    pub fn cached(n: usize) -> Arc<GaussLaguerre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLaguerre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(rule) = cache.lock().unwrap().get(&n) {
            return rule.clone();
        }
        let rule = Arc::new(GaussLaguerre::new(n));
        cache.lock().unwrap().entry(n).or_insert(rule).clone()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_j f(t_j)`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.ln_weights)
            .map(|(&t, &lw)| lw.exp() * f(t))
            .sum()
    }
}

// Kronrod 15 / Gauss 7 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        resk += WGK[j] * s;
        if j % 2 == 1 {
            resg += WG[j / 2] * s;
        }
    }
    (resk * h, ((resk - resg) * h).abs())
}

/// Adaptive Gauss–Kronrod on a finite interval with global error control.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&mut f, a, b);
    segs.push((a, b, v, e));
    for _ in 0..2000 {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if !total.is_finite() {
            return Err(CasimirError::NonFinite("integrand".into()));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (lo, hi, _, _) = segs.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        segs.push((lo, mid, v1, e1));
        segs.push((mid, hi, v2, e2));
    }
    Err(CasimirError::Quadrature(format!(
        "adaptive Gauss-Kronrod on [{a}, {b}] exhausted its subdivision budget"
    )))
}

/// `∫_a^∞ f(x) dx` through the map `x = a + scale · t/(1-t)`.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let one_m = 1.0 - t;
            let x = a + scale * t / one_m;
            let v = f(x) * scale / (one_m * one_m);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        rel_tol,
        abs_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::ln_factorial;

    #[test]
    fn laguerre_moments_exact() {
        for &n in &[5usize, 40, 160, 300] {
            let rule = GaussLaguerre::new(n);
            for k in [0usize, 1, 7, n, 2 * n - 1] {
                // Σ w t^k = k!, evaluated in log space
                let terms: Vec<f64> = rule
                    .nodes
                    .iter()
                    .zip(&rule.ln_weights)
                    .map(|(&t, &lw)| lw + k as f64 * t.ln())
                    .collect();
                let mx = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let ln_sum = mx + terms.iter().map(|v| (v - mx).exp()).sum::<f64>().ln();
                let rel = (ln_sum - ln_factorial(k)).abs();
                assert!(rel < 1e-11, "n={n} k={k} err={rel}");
            }
        }
    }

    #[test]
    fn kronrod_integrates_smooth_functions() {
        let v = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-13, 0.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate_semi_infinite(|x| (-x).exp() * x * x, 0.0, 1.0, 1e-12, 0.0).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
        let v = integrate(|x| x.sqrt().ln(), 0.0, 1.0, 1e-10, 0.0).unwrap();
        assert!((v + 0.5).abs() < 1e-9);
    }
}
