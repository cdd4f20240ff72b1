//! Modified spherical Bessel functions and hyperbolic angular functions in
//! log-scaled form.
//!
//! Everything here lives on the imaginary frequency axis: the radial
//! functions are `i_ℓ(x) = √(π/2x) I_{ℓ+1/2}(x)` and
//! `k_ℓ(x) = √(π/2x) K_{ℓ+1/2}(x)`, and the angular functions are evaluated
//! at `u = cκ/ξ ≥ 1`. Values are returned as a mantissa plus a natural-log
//! scale so that products of very large and very small factors can be
//! combined before exponentiation.

use std::sync::OnceLock;

use crate::error::{domain, Result};

/// Largest multipole order accepted by the single-value entry points.
pub const L_CAP: usize = 256;

const LN_FACTORIAL_TABLE: usize = 4096;

/// `ln n!` for `n < 4096`, cumulative sum of logs.
pub fn ln_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACTORIAL_TABLE);
        let mut acc = 0.0;
        t.push(0.0);
        for k in 1..LN_FACTORIAL_TABLE {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    });
    assert!(n < LN_FACTORIAL_TABLE, "ln_factorial argument {n} out of table");
    table[n]
}

/// `ln (2n-1)!!` with the convention `(-1)!! = 1`.
pub fn ln_double_factorial_odd(n: usize) -> f64 {
    // (2n-1)!! = (2n)! / (2^n n!)
    ln_factorial(2 * n) - n as f64 * std::f64::consts::LN_2 - ln_factorial(n)
}

/// A positive real stored as `value * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledBessel {
    pub order: usize,
    pub x: f64,
    pub value: f64,
    pub log_scale: f64,
}

impl ScaledBessel {
    fn from_ln(order: usize, x: f64, ln: f64) -> Self {
        let log_scale = ln.floor();
        ScaledBessel {
            order,
            x,
            value: (ln - log_scale).exp(),
            log_scale,
        }
    }

    /// Natural logarithm of the represented value.
    pub fn ln(&self) -> f64 {
        self.value.ln() + self.log_scale
    }

    /// Plain `f64` value; overflows to `inf` or underflows to `0` when the
    /// magnitude is out of range.
    pub fn to_f64(&self) -> f64 {
        self.value * self.log_scale.exp()
    }
}

fn check_arg(l: usize, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("Bessel argument must be positive and finite, got {x}"));
    }
    if l > L_CAP {
        return domain(format!("Bessel order {l} exceeds cap {L_CAP}"));
    }
    Ok(())
}

/// `ln(sinh(x)/x)` without overflow.
fn ln_sinhc(x: f64) -> f64 {
    if x < 1e-4 {
        x * x / 6.0
    } else if x < 20.0 {
        (x.sinh() / x).ln()
    } else {
        x - (2.0 * x).ln() + (-(-2.0 * x).exp()).ln_1p()
    }
}

/// Ratio `i_ℓ(x)/i_{ℓ-1}(x)` from the continued fraction
/// `1/((2ℓ+1)/x + 1/((2ℓ+3)/x + ...))`, modified Lentz.
fn i_ratio_cf(l: usize, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = TINY;
    let mut c = f;
    let mut d = 0.0;
    for j in 0..200_000usize {
        let b = (2 * (l + j) + 1) as f64 / x;
        d += b;
        if d == 0.0 {
            d = TINY;
        }
        c = b + 1.0 / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    f
}

/// First-kind sequence `i_0 ..= i_{ℓ_max+1}` at one argument.
///
/// Stores `ln i_ℓ` and the ratios `r_ℓ = i_ℓ / i_{ℓ-1}` (index 0 unused).
#[derive(Debug, Clone)]
pub struct BesselISeq {
    pub x: f64,
    ln: Vec<f64>,
    ratio: Vec<f64>,
}

impl BesselISeq {
    pub fn new(l_max: usize, x: f64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return domain(format!("Bessel argument must be positive and finite, got {x}"));
        }
        let top = l_max + 1;
        let mut ratio = vec![0.0; top + 1];
        ratio[top] = i_ratio_cf(top, x);
        // downward: 1/r_ℓ = (2ℓ+1)/x + r_{ℓ+1}
        for l in (1..top).rev() {
            ratio[l] = 1.0 / ((2 * l + 1) as f64 / x + ratio[l + 1]);
        }
        let mut ln = Vec::with_capacity(top + 1);
        ln.push(ln_sinhc(x));
        for l in 1..=top {
            let prev = ln[l - 1];
            ln.push(prev + ratio[l].ln());
        }
        Ok(BesselISeq { x, ln, ratio })
    }

    pub fn ln(&self, l: usize) -> f64 {
        self.ln[l]
    }

    /// `i_ℓ / i_{ℓ-1}` for `ℓ ≥ 1`.
    pub fn ratio(&self, l: usize) -> f64 {
        self.ratio[l]
    }

    /// Logarithmic derivative `d ln(x i_ℓ(x)) / dx`, computed as
    /// `(ℓ + 1 + x r_{ℓ+1}) / x` so that no cancellation occurs.
    pub fn riccati_log_derivative(&self, l: usize) -> f64 {
        (l as f64 + 1.0 + self.x * self.ratio[l + 1]) / self.x
    }

    /// `i_ℓ'(x) / i_ℓ(x)`.
    pub fn log_derivative(&self, l: usize) -> f64 {
        self.riccati_log_derivative(l) - 1.0 / self.x
    }
}

/// Second-kind sequence `k_0 ..= k_{ℓ_max}` built by upward recurrence.
#[derive(Debug, Clone)]
pub struct BesselKSeq {
    pub x: f64,
    ln: Vec<f64>,
    ratio: Vec<f64>,
}

impl BesselKSeq {
    pub fn new(l_max: usize, x: f64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return domain(format!("Bessel argument must be positive and finite, got {x}"));
        }
        let mut ratio = vec![0.0; l_max + 1];
        let mut ln = Vec::with_capacity(l_max + 1);
        ln.push((std::f64::consts::FRAC_PI_2 / x).ln() - x);
        // q_ℓ = k_ℓ/k_{ℓ-1}; q_1 = 1 + 1/x, q_{ℓ+1} = (2ℓ+1)/x + 1/q_ℓ
        for l in 1..=l_max {
            let q = if l == 1 {
                1.0 + 1.0 / x
            } else {
                (2 * l - 1) as f64 / x + 1.0 / ratio[l - 1]
            };
            ratio[l] = q;
            let prev = ln[l - 1];
            ln.push(prev + q.ln());
        }
        Ok(BesselKSeq { x, ln, ratio })
    }

    pub fn ln(&self, l: usize) -> f64 {
        self.ln[l]
    }

    /// `k_ℓ / k_{ℓ-1}` for `ℓ ≥ 1`.
    pub fn ratio(&self, l: usize) -> f64 {
        self.ratio[l]
    }

    /// `d ln(x k_ℓ(x)) / dx = -(ℓ + x k_{ℓ-1}/k_ℓ) / x`, negative. Requires `ℓ ≥ 1`.
    pub fn riccati_log_derivative(&self, l: usize) -> f64 {
        -(l as f64 + self.x / self.ratio[l]) / self.x
    }

    /// `k_ℓ'(x) / k_ℓ(x)`.
    pub fn log_derivative(&self, l: usize) -> f64 {
        if l == 0 {
            -self.ratio.get(1).copied().unwrap_or(1.0 + 1.0 / self.x)
        } else {
            self.riccati_log_derivative(l) - 1.0 / self.x
        }
    }
}

/// Modified spherical Bessel function of the first kind, `i_ℓ(x)`.
pub fn bessel_i_scaled(l: usize, x: f64) -> Result<ScaledBessel> {
    check_arg(l, x)?;
    let seq = BesselISeq::new(l, x)?;
    Ok(ScaledBessel::from_ln(l, x, seq.ln(l)))
}

/// Modified spherical Bessel function of the second kind,
/// `k_ℓ(x) = √(π/2x) K_{ℓ+1/2}(x)`.
pub fn bessel_k_scaled(l: usize, x: f64) -> Result<ScaledBessel> {
    check_arg(l, x)?;
    let seq = BesselKSeq::new(l.max(1), x)?;
    Ok(ScaledBessel::from_ln(l, x, seq.ln(l)))
}

/// Normalized hyperbolic angular functions for one `(ℓ, m)` at `u ≥ 1`.
///
/// With `s = √(u²-1)`, `P̂_ℓ^m(u) = s^m d^m P_ℓ/du^m` and
/// `N_ℓm = √((2ℓ+1)(ℓ-|m|)!/(ℓ+|m|)!)`:
/// `pi = N m P̂/s`, `tau = N s dP̂/du`. Both carry the same `log_scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularFunctions {
    pub l: usize,
    pub m: i64,
    pub u: f64,
    pub pi: f64,
    pub tau: f64,
    pub log_scale: f64,
}

impl AngularFunctions {
    pub fn pi_f64(&self) -> f64 {
        self.pi * self.log_scale.exp()
    }

    pub fn tau_f64(&self) -> f64 {
        self.tau * self.log_scale.exp()
    }
}

/// One row of an angular table: mantissas and a shared log scale.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AngularEntry {
    pub pi: f64,
    pub tau: f64,
    pub log_scale: f64,
}

const RESCALE_HI: f64 = 1e120;

/// Normalized `(pi, tau)` for `ℓ = max(1, m) ..= l_max` at fixed `m ≥ 0`.
///
/// Index `i` of the result corresponds to `ℓ = max(1, m) + i`. Upward
/// recurrence in `ℓ` is the stable direction for `u > 1`.
pub fn angular_table(m: usize, u: f64, l_max: usize) -> Vec<AngularEntry> {
    debug_assert!(u >= 1.0);
    let s2 = (u - 1.0) * (u + 1.0);
    let s = s2.sqrt();
    let l_min = m.max(1);
    if l_max < l_min {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(l_max + 1 - l_min);

    if m == 0 {
        // tau_ℓ^0 = √(2ℓ+1) s dP_ℓ/du = s √(ℓ(ℓ+1)) p_ℓ^(1), with p^(1) the
        // normalized m = 1 pi function; pi^0 vanishes.
        let one = angular_table(1, u, l_max);
        for (i, e) in one.iter().enumerate() {
            let l = (i + 1) as f64;
            out.push(AngularEntry {
                pi: 0.0,
                tau: s * (l * (l + 1.0)).sqrt() * e.pi,
                log_scale: e.log_scale,
            });
        }
        return out;
    }

    let mf = m as f64;
    // p_m = N_mm m (2m-1)!! s^(m-1), N_mm = √((2m+1)/(2m)!)
    let ln_seed = 0.5 * ((2 * m + 1) as f64).ln() - 0.5 * ln_factorial(2 * m)
        + ln_double_factorial_odd(m)
        + mf.ln();
    let (mut log_scale, mut p_cur) = if m == 1 {
        (ln_seed, 1.0)
    } else if s > 0.0 {
        (ln_seed + (mf - 1.0) * s.ln(), 1.0)
    } else {
        (0.0, 0.0)
    };
    let mut p_prev = 0.0;
    for l in m..=l_max {
        if l > m {
            let lf = (l - 1) as f64;
            // normalized recurrence from ℓ-1 to ℓ
            let a = (((2.0 * lf + 3.0) * (2.0 * lf + 1.0)) / ((lf + 1.0 - mf) * (lf + 1.0 + mf))).sqrt();
            let b = (((2.0 * lf + 3.0) * (lf - mf) * (lf + mf))
                / ((2.0 * lf - 1.0) * (lf + 1.0 - mf) * (lf + 1.0 + mf)))
                .sqrt();
            let next = a * u * p_cur - if l - 1 > m { b * p_prev } else { 0.0 };
            p_prev = p_cur;
            p_cur = next;
        }
        let lf = l as f64;
        // tau_ℓ = (ℓ u p_ℓ - √((2ℓ+1)(ℓ-m)(ℓ+m)/(2ℓ-1)) p_{ℓ-1}) / m
        let c = if l > m {
            ((2.0 * lf + 1.0) * (lf - mf) * (lf + mf) / (2.0 * lf - 1.0)).sqrt()
        } else {
            0.0
        };
        let tau = (lf * u * p_cur - c * p_prev) / mf;
        out.push(AngularEntry {
            pi: p_cur,
            tau,
            log_scale,
        });
        let mag = p_cur.abs().max(tau.abs());
        if mag > RESCALE_HI {
            let f = mag.ln();
            p_cur /= mag;
            p_prev /= mag;
            log_scale += f;
        }
    }
    out
}

/// Normalized angular pair `(π_ℓm, τ_ℓm)` at hyperbolic argument `u ≥ 1`.
///
/// Negative `m` follows from `P̂^{-m} ∝ P̂^m`: `pi` changes sign and `tau`
/// is unchanged.
pub fn angular_pair(l: usize, m: i64, u: f64) -> Result<AngularFunctions> {
    let am = m.unsigned_abs() as usize;
    if l == 0 || am > l {
        return domain(format!("angular_pair requires 1 <= ℓ and |m| <= ℓ, got ℓ={l}, m={m}"));
    }
    if !(u >= 1.0) || !u.is_finite() {
        return domain(format!("angular_pair requires finite u >= 1, got {u}"));
    }
    let table = angular_table(am, u, l);
    let e = table[l - am.max(1)];
    let sign = if m < 0 { -1.0 } else { 1.0 };
    Ok(AngularFunctions {
        l,
        m,
        u,
        pi: sign * e.pi,
        tau: e.tau,
        log_scale: e.log_scale,
    })
}
