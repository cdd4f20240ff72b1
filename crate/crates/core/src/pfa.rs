//! Plane-plane Lifshitz energies, the proximity force approximation and the
//! closed-form long-distance limits.

use std::f64::consts::PI;

use serde::Serialize;

use crate::constants::{matsubara_step, thermal_wavelength, C, HBAR, K_B};
use crate::error::{domain, CasimirError, Result};
use crate::materials::{fresnel_kappa, fresnel_static, FresnelPair, MirrorSpec};
use crate::quadrature::{integrate, integrate_semi_infinite};
use crate::roundtrip::Geometry;

/// Relative accuracy of the plane-plane integrals.
pub const PP_TOL: f64 = 1e-11;
/// Matsubara terms allowed before giving up.
const PP_MAX_TERMS: usize = 1_000_000;

/// Plane-plane energy per unit area.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanePlaneResult {
    /// J/m², negative.
    pub energy_per_area: f64,
    pub gap: f64,
    pub temperature: f64,
    /// Contribution of each Matsubara term (J/m², `n = 0` already halved).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_matsubara: Vec<f64>,
}

/// Dimensionless parameters of the long-distance limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitParams {
    /// `ν = 2π𝓛/λ_T`.
    pub nu: f64,
    /// `α = 2πR/λ_P`, when a plasma wavelength is given.
    pub alpha: Option<f64>,
    /// `λ_T = ħc/(k_B T)` (m).
    pub lambda_t: f64,
}

impl LimitParams {
    pub fn new(geom: &Geometry, temperature: f64, lambda_p: Option<f64>) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return domain(format!("temperature must be positive, got {temperature}"));
        }
        let lambda_t = thermal_wavelength(temperature);
        Ok(LimitParams {
            nu: 2.0 * PI * geom.center_distance / lambda_t,
            alpha: lambda_p.map(|lp| 2.0 * PI * geom.radius / lp),
            lambda_t,
        })
    }
}

fn reflection(spec: &MirrorSpec, xi: f64, kappa: f64) -> FresnelPair {
    if xi == 0.0 {
        fresnel_static(spec, kappa)
    } else {
        fresnel_kappa(spec, xi, kappa)
    }
}

/// `∫_{ξ/c}^∞ κ dκ/(2π) Σ_p ln(1 - r_p r_p' e^{-2κL})` in 1/m².
///
/// The factor `e^{-2ξL/c}` is pulled out of the integrand so that far
/// Matsubara terms do not sink into subnormal numbers.
fn kappa_integral(p1: &MirrorSpec, p2: &MirrorSpec, gap: f64, xi: f64) -> Result<f64> {
    let q = xi / C;
    let shift = 2.0 * q * gap;
    let scaled_log = |rr: f64, d: f64| {
        let y_scaled = rr * (-d).exp();
        if shift + d > 18.0 {
            // ln(1 - y) = -y (1 + y/2 + …) with y = y_scaled e^{-shift} < 1e-8
            let y = y_scaled * (-shift).exp();
            -y_scaled * (1.0 + 0.5 * y)
        } else {
            (-y_scaled * (-shift).exp()).ln_1p() * shift.exp()
        }
    };
    let f = |kappa: f64| {
        let a = reflection(p1, xi, kappa);
        let b = reflection(p2, xi, kappa);
        let d = 2.0 * (kappa - q) * gap;
        kappa * (scaled_log(a.r_te * b.r_te, d) + scaled_log(a.r_tm * b.r_tm, d))
    };
    let scale = 1.0 / (2.0 * gap);
    Ok(integrate_semi_infinite(f, q, scale, PP_TOL, 0.0)? * (-shift).exp() / (2.0 * PI))
}

/// Lifshitz energy per unit area between two planes at separation `gap`.
/// `T = 0` integrates over frequency, `T > 0` sums over Matsubara terms.
pub fn pp_energy_per_area(p1: &MirrorSpec, p2: &MirrorSpec, gap: f64, temperature: f64) -> Result<PlanePlaneResult> {
    if !(gap > 0.0 && gap.is_finite()) {
        return domain(format!("plate separation must be positive, got {gap}"));
    }
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return domain(format!("temperature must be non-negative, got {temperature}"));
    }
    if temperature == 0.0 {
        if let (MirrorSpec::Perfect, MirrorSpec::Perfect) = (p1, p2) {
            return Ok(PlanePlaneResult {
                energy_per_area: perfect_pp_energy(gap),
                gap,
                temperature,
                per_matsubara: Vec::new(),
            });
        }
        // ξ = c q, scale 1/(2L) matches the decay of the integrand
        let mut err = None;
        let v = integrate_semi_infinite(
            |q| match kappa_integral(p1, p2, gap, q * C) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            1.0 / (2.0 * gap),
            PP_TOL * 10.0,
            0.0,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        return Ok(PlanePlaneResult {
            energy_per_area: HBAR * C / (2.0 * PI) * v,
            gap,
            temperature,
            per_matsubara: Vec::new(),
        });
    }

    let xi1 = matsubara_step(temperature);
    let kt = K_B * temperature;
    let mut terms = vec![0.5 * kt * kappa_integral(p1, p2, gap, 0.0)?];
    let mut sum = terms[0];
    let mut small = 0;
    for n in 1..PP_MAX_TERMS {
        let t = kt * kappa_integral(p1, p2, gap, n as f64 * xi1)?;
        sum += t;
        terms.push(t);
        if t.abs() <= PP_TOL * sum.abs() {
            small += 1;
            if small >= 3 {
                return Ok(PlanePlaneResult { energy_per_area: sum, gap, temperature, per_matsubara: terms });
            }
        } else {
            small = 0;
        }
    }
    Err(CasimirError::MatsubaraTail { terms: PP_MAX_TERMS })
}

/// `-π²ħc/(720 L³)`, ideal mirrors at zero temperature.
pub fn perfect_pp_energy(gap: f64) -> f64 {
    -PI * PI * HBAR * C / (720.0 * gap.powi(3))
}

fn pp(p1: &MirrorSpec, p2: &MirrorSpec, gap: f64, temperature: f64) -> Result<f64> {
    Ok(pp_energy_per_area(p1, p2, gap, temperature)?.energy_per_area)
}

/// PFA force `-2πR E_PP(L)` (N), positive for attraction.
pub fn pfa_force(geom: &Geometry, p1: &MirrorSpec, p2: &MirrorSpec, temperature: f64) -> Result<f64> {
    Ok(-2.0 * PI * geom.radius * pp(p1, p2, geom.gap, temperature)?)
}

/// PFA energy `2πR ∫_L^∞ E_PP(ℓ) dℓ` (J). The range beyond `100 L` is
/// added as a power-law tail fitted to the integrand there.
pub fn pfa_energy(geom: &Geometry, p1: &MirrorSpec, p2: &MirrorSpec, temperature: f64) -> Result<f64> {
    if temperature == 0.0 {
        if let (MirrorSpec::Perfect, MirrorSpec::Perfect) = (p1, p2) {
            return Ok(-PI.powi(3) * HBAR * C * geom.radius / (720.0 * geom.gap.powi(2)));
        }
    }
    let l0 = geom.gap;
    let l_tail = 100.0 * l0;
    let mut err = None;
    // ℓ = L e^s, dℓ = ℓ ds
    let body = integrate(
        |s| {
            let l = l0 * s.exp();
            match pp(p1, p2, l, temperature) {
                Ok(v) => v * l,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        100f64.ln(),
        1e-9,
        0.0,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    let e1 = pp(p1, p2, l_tail, temperature)?;
    let e2 = pp(p1, p2, 2.0 * l_tail, temperature)?;
    let p = (e1 / e2).ln() / 2f64.ln();
    if !(p > 1.5) {
        return Err(CasimirError::Quadrature(format!(
            "PFA energy tail decays too slowly (local exponent {p:.3})"
        )));
    }
    let tail = e1 * l_tail / (p - 1.0);
    Ok(2.0 * PI * geom.radius * (body + tail))
}

/// PFA force gradient `2πR ∂E_PP/∂L` (N/m), positive for attraction.
/// Central differences at `h = 10⁻³ L` and `h/2`, Richardson-combined.
pub fn pfa_gradient(geom: &Geometry, p1: &MirrorSpec, p2: &MirrorSpec, temperature: f64) -> Result<f64> {
    let l = geom.gap;
    let h = 1e-3 * l;
    let e = |x: f64| pp(p1, p2, x, temperature);
    let d_h = (e(l + h)? - e(l - h)?) / (2.0 * h);
    let d_h2 = (e(l + 0.5 * h)? - e(l - 0.5 * h)?) / h;
    Ok(2.0 * PI * geom.radius * (4.0 * d_h2 - d_h) / 3.0)
}

/// `φ(ν) = [ν sinh ν + cosh ν (ν² + sinh² ν)] / (2 sinh³ ν)`.
pub fn phi(nu: f64) -> Result<f64> {
    if !(nu > 0.0) || nu.is_nan() {
        return domain(format!("phi requires nu > 0, got {nu}"));
    }
    if nu.is_infinite() {
        return Ok(0.5);
    }
    if nu <= 30.0 {
        let (s, c) = (nu.sinh(), nu.cosh());
        return Ok((nu * s + c * (nu * nu + s * s)) / (2.0 * s * s * s));
    }
    // sinh, cosh scaled by e^{-ν}; numerator and denominator by e^{-3ν}
    let e2 = (-2.0 * nu).exp();
    let s = 0.5 * (1.0 - e2);
    let c = 0.5 * (1.0 + e2);
    Ok((nu * s * e2 + c * (nu * nu * e2 + s * s)) / (2.0 * s * s * s))
}

/// Small-sphere free energy for ideal mirrors,
/// `ℱ_LD = -(3/4) k_B T (R/𝓛)³ φ(2π𝓛/λ_T)` (J).
pub fn ld_free_energy_perfect(geom: &Geometry, temperature: f64) -> Result<f64> {
    let p = LimitParams::new(geom, temperature, None)?;
    Ok(-0.75 * K_B * temperature * (geom.radius / geom.center_distance).powi(3) * phi(p.nu)?)
}

/// `f(α) = (3/2)(1 + 1/α² - coth α / α)`, between 1 and 3/2.
pub fn f_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || alpha.is_nan() {
        return domain(format!("f_alpha requires alpha > 0, got {alpha}"));
    }
    if alpha < 1e-2 {
        return Ok(1.0 + alpha * alpha / 30.0);
    }
    if alpha.is_infinite() {
        return Ok(1.5);
    }
    let coth = 1.0 / alpha.tanh();
    Ok(1.5 * (1.0 + 1.0 / (alpha * alpha) - coth / alpha))
}
