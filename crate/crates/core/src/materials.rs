//! Dielectric response at imaginary frequency and planar Fresnel amplitudes.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constants::C;
use crate::error::{domain, CasimirError, Result};

/// Optical model of one mirror.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MirrorConfig", into = "MirrorConfig")]
pub enum MirrorSpec {
    /// Ideal conductor.
    Perfect,
    /// Lossless plasma model, `ε(iξ) = 1 + ω_P²/ξ²`.
    Plasma { omega_p: f64 },
    /// Drude model, `ε(iξ) = 1 + ω_P²/(ξ(ξ+γ))`.
    Drude { omega_p: f64, gamma: f64 },
}

impl MirrorSpec {
    pub fn plasma(omega_p: f64) -> Result<Self> {
        if !(omega_p > 0.0 && omega_p.is_finite()) {
            return domain(format!("plasma frequency must be positive, got {omega_p}"));
        }
        Ok(MirrorSpec::Plasma { omega_p })
    }

    pub fn drude(omega_p: f64, gamma: f64) -> Result<Self> {
        if !(omega_p > 0.0 && omega_p.is_finite()) {
            return domain(format!("plasma frequency must be positive, got {omega_p}"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return domain(format!("relaxation frequency must be positive, got {gamma}"));
        }
        Ok(MirrorSpec::Drude { omega_p, gamma })
    }

    /// Plasma model from the plasma wavelength `λ_P = 2πc/ω_P` (metres).
    pub fn plasma_from_wavelength(lambda_p: f64) -> Result<Self> {
        Self::plasma(wavelength_to_omega(lambda_p)?)
    }

    /// Drude model from `λ_P` and `λ_γ = 2πc/γ` (metres).
    pub fn drude_from_wavelengths(lambda_p: f64, lambda_gamma: f64) -> Result<Self> {
        Self::drude(wavelength_to_omega(lambda_p)?, wavelength_to_omega(lambda_gamma)?)
    }

    pub fn omega_p(&self) -> Option<f64> {
        match *self {
            MirrorSpec::Perfect => None,
            MirrorSpec::Plasma { omega_p } | MirrorSpec::Drude { omega_p, .. } => Some(omega_p),
        }
    }

    pub fn lambda_p(&self) -> Option<f64> {
        self.omega_p().map(|w| 2.0 * PI * C / w)
    }

    pub fn lambda_gamma(&self) -> Option<f64> {
        match *self {
            MirrorSpec::Drude { gamma, .. } => Some(2.0 * PI * C / gamma),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MirrorSpec::Perfect => "perfect",
            MirrorSpec::Plasma { .. } => "plasma",
            MirrorSpec::Drude { .. } => "drude",
        }
    }
}

impl fmt::Display for MirrorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MirrorSpec::Perfect => write!(f, "perfect"),
            MirrorSpec::Plasma { omega_p } => write!(f, "plasma(omega_P={omega_p:e})"),
            MirrorSpec::Drude { omega_p, gamma } => {
                write!(f, "drude(omega_P={omega_p:e},gamma={gamma:e})")
            }
        }
    }
}

fn wavelength_to_omega(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return domain(format!("wavelength must be positive, got {lambda}"));
    }
    Ok(2.0 * PI * C / lambda)
}

/// Serialized form of [`MirrorSpec`]. Either lengths (`lambda_*`) or angular
/// frequencies (`omega_P`, `gamma`, rad/s) may be given; lengths win when both
/// are present.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MirrorConfig {
    pub kind: String,
    #[serde(rename = "lambda_P_nm", skip_serializing_if = "Option::is_none", default)]
    pub lambda_p_nm: Option<f64>,
    #[serde(rename = "lambda_P_um", skip_serializing_if = "Option::is_none", default)]
    pub lambda_p_um: Option<f64>,
    #[serde(rename = "lambda_gamma_um", skip_serializing_if = "Option::is_none", default)]
    pub lambda_gamma_um: Option<f64>,
    #[serde(rename = "lambda_gamma_nm", skip_serializing_if = "Option::is_none", default)]
    pub lambda_gamma_nm: Option<f64>,
    #[serde(rename = "omega_P", skip_serializing_if = "Option::is_none", default)]
    pub omega_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma: Option<f64>,
}

impl TryFrom<MirrorConfig> for MirrorSpec {
    type Error = CasimirError;

    fn try_from(cfg: MirrorConfig) -> Result<Self> {
        let omega_p = match (cfg.lambda_p_nm, cfg.lambda_p_um, cfg.omega_p) {
            (Some(nm), _, _) => Some(wavelength_to_omega(nm * 1e-9)?),
            (None, Some(um), _) => Some(wavelength_to_omega(um * 1e-6)?),
            (None, None, w) => w,
        };
        let gamma = match (cfg.lambda_gamma_um, cfg.lambda_gamma_nm, cfg.gamma) {
            (Some(um), _, _) => Some(wavelength_to_omega(um * 1e-6)?),
            (None, Some(nm), _) => Some(wavelength_to_omega(nm * 1e-9)?),
            (None, None, g) => g,
        };
        let missing = |what: &str| CasimirError::Config(format!("{} mirror requires {what}", cfg.kind));
        match cfg.kind.to_ascii_lowercase().as_str() {
            "perfect" => Ok(MirrorSpec::Perfect),
            "plasma" => MirrorSpec::plasma(omega_p.ok_or_else(|| missing("lambda_P or omega_P"))?),
            "drude" => MirrorSpec::drude(
                omega_p.ok_or_else(|| missing("lambda_P or omega_P"))?,
                gamma.ok_or_else(|| missing("lambda_gamma or gamma"))?,
            ),
            other => Err(CasimirError::Config(format!("unknown mirror kind '{other}'"))),
        }
    }
}

impl From<MirrorSpec> for MirrorConfig {
    fn from(spec: MirrorSpec) -> Self {
        MirrorConfig {
            kind: spec.kind().to_string(),
            omega_p: spec.omega_p(),
            gamma: match spec {
                MirrorSpec::Drude { gamma, .. } => Some(gamma),
                _ => None,
            },
            ..Default::default()
        }
    }
}

/// `ε(iξ)`. Perfect mirrors report `+∞`; callers branch on the kind.
pub fn epsilon(spec: &MirrorSpec, xi: f64) -> Result<f64> {
    if !(xi > 0.0) || !xi.is_finite() {
        return domain(format!("epsilon requires xi > 0, got {xi}"));
    }
    Ok(1.0 + epsilon_minus_one(spec, xi))
}

/// `ε(iξ) - 1`, kept separate to avoid cancellation at high frequency.
pub(crate) fn epsilon_minus_one(spec: &MirrorSpec, xi: f64) -> f64 {
    match *spec {
        MirrorSpec::Perfect => f64::INFINITY,
        MirrorSpec::Plasma { omega_p } => (omega_p / xi).powi(2),
        MirrorSpec::Drude { omega_p, gamma } => omega_p * omega_p / (xi * (xi + gamma)),
    }
}

/// Specular reflection amplitudes at imaginary frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelPair {
    pub r_te: f64,
    pub r_tm: f64,
}

impl FresnelPair {
    pub const PERFECT: FresnelPair = FresnelPair { r_te: -1.0, r_tm: 1.0 };
}

/// Fresnel amplitudes at frequency `xi` (rad/s) and transverse wavevector
/// `k` (1/m).
pub fn fresnel(spec: &MirrorSpec, xi: f64, k: f64) -> Result<FresnelPair> {
    if !(xi > 0.0) || !xi.is_finite() {
        return domain(format!("fresnel requires xi > 0, got {xi}"));
    }
    if !(k >= 0.0) || !k.is_finite() {
        return domain(format!("fresnel requires k >= 0, got {k}"));
    }
    let q = xi / C;
    let kappa = (k * k + q * q).sqrt();
    Ok(fresnel_kappa(spec, xi, kappa))
}

/// Same as [`fresnel`] with the vacuum decay constant `κ = √(k² + ξ²/c²)`
/// already known. No argument checks.
pub(crate) fn fresnel_kappa(spec: &MirrorSpec, xi: f64, kappa: f64) -> FresnelPair {
    if let MirrorSpec::Perfect = spec {
        return FresnelPair::PERFECT;
    }
    let q2 = (xi / C).powi(2);
    let em1 = epsilon_minus_one(spec, xi);
    let eps = 1.0 + em1;
    let kappa_t = (kappa * kappa + em1 * q2).sqrt();
    // κ - κ_t and εκ - κ_t written without subtraction of nearly equal terms
    let te_num = -em1 * q2 / (kappa + kappa_t);
    let r_te = te_num / (kappa + kappa_t);
    let tm_num = em1 * ((eps + 1.0) * kappa * kappa - q2) / (eps * kappa + kappa_t);
    let r_tm = tm_num / (eps * kappa + kappa_t);
    FresnelPair { r_te, r_tm }
}

/// Zero-frequency limit of the Fresnel amplitudes at transverse wavevector
/// `k` (1/m). Plasma keeps a finite TE amplitude; Drude TE vanishes.
pub fn fresnel_static(spec: &MirrorSpec, k: f64) -> FresnelPair {
    match *spec {
        MirrorSpec::Perfect => FresnelPair::PERFECT,
        MirrorSpec::Plasma { omega_p } => {
            let kp = omega_p / C;
            let root = (k * k + kp * kp).sqrt();
            // (k - root)/(k + root) = -kp²/(k + root)²
            FresnelPair {
                r_te: -(kp * kp) / ((k + root) * (k + root)),
                r_tm: 1.0,
            }
        }
        MirrorSpec::Drude { .. } => FresnelPair { r_te: 0.0, r_tm: 1.0 },
    }
}
