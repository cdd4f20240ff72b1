//! Mie scattering amplitudes of a sphere at imaginary frequency.
//!
//! For size parameter `y = ξR/c` and refractive index `n = √ε(iξ)` the
//! amplitudes are
//!
//! ```text
//! a_ℓ = (π/2) (i_ℓ(y)/k_ℓ(y)) [n D₁(y) - D₁(ny)] / [n D₃(y) - D₁(ny)]
//! b_ℓ = (π/2) (i_ℓ(y)/k_ℓ(y)) [D₁(y) - n D₁(ny)] / [D₃(y) - n D₁(ny)]
//! ```
//!
//! with `D₁ = (x i_ℓ)'/(x i_ℓ)` and `D₃ = (x k_ℓ)'/(x k_ℓ)`. Electric
//! amplitudes are negative, magnetic ones positive; for a small perfectly
//! conducting sphere `a₁/b₁ → -2`.

use std::f64::consts::FRAC_PI_2;

use crate::constants::C;
use crate::error::{domain, Result};
use crate::materials::{epsilon_minus_one, MirrorSpec};
use crate::specfun::{ln_double_factorial_odd, BesselISeq, BesselKSeq};

/// Multipole type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Polarization {
    /// Electric multipole (TM-like at the sphere).
    E,
    /// Magnetic multipole.
    M,
}

/// One Mie amplitude stored as `value * exp(log_scale)`, `value` signed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MieCoefficient {
    pub l: usize,
    pub polarization: Polarization,
    pub x: f64,
    pub value: f64,
    pub log_scale: f64,
}

impl MieCoefficient {
    fn new(l: usize, polarization: Polarization, x: f64, sign: f64, ln_abs: f64) -> Self {
        if ln_abs == f64::NEG_INFINITY {
            return MieCoefficient { l, polarization, x, value: 0.0, log_scale: 0.0 };
        }
        let log_scale = ln_abs.floor();
        MieCoefficient {
            l,
            polarization,
            x,
            value: sign * (ln_abs - log_scale).exp(),
            log_scale,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.value * self.log_scale.exp()
    }

    pub fn ln_abs(&self) -> f64 {
        self.value.abs().ln() + self.log_scale
    }
}

/// `ln |coefficient|` and sign for one order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSigned {
    pub ln_abs: f64,
    pub sign: f64,
}

impl LogSigned {
    pub const ZERO: LogSigned = LogSigned { ln_abs: f64::NEG_INFINITY, sign: 0.0 };

    pub fn to_f64(self) -> f64 {
        self.sign * self.ln_abs.exp()
    }
}

/// Electric and magnetic amplitudes for `ℓ = 1 ..= l_max` at one frequency.
/// Index `ℓ - 1`.
#[derive(Debug, Clone)]
pub struct MieTable {
    pub electric: Vec<LogSigned>,
    pub magnetic: Vec<LogSigned>,
}

impl MieTable {
    /// Amplitudes at `ξ > 0` for a sphere of radius `radius` (m).
    pub fn new(spec: &MirrorSpec, radius: f64, xi: f64, l_max: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return domain(format!("sphere radius must be positive, got {radius}"));
        }
        if !(xi > 0.0 && xi.is_finite()) {
            return domain(format!("Mie amplitudes need xi > 0, got {xi}"));
        }
        if l_max == 0 {
            return domain("l_max must be at least 1");
        }
        let y = xi * radius / C;
        let iy = BesselISeq::new(l_max + 1, y)?;
        let ky = BesselKSeq::new(l_max, y)?;
        let ln_pi2 = FRAC_PI_2.ln();
        let mut electric = Vec::with_capacity(l_max);
        let mut magnetic = Vec::with_capacity(l_max);

        match spec {
            MirrorSpec::Perfect => {
                for l in 1..=l_max {
                    let base = ln_pi2 + iy.ln(l) - ky.ln(l);
                    let d1 = iy.riccati_log_derivative(l);
                    let d3 = ky.riccati_log_derivative(l);
                    electric.push(LogSigned { ln_abs: base + (d1 / -d3).ln(), sign: -1.0 });
                    magnetic.push(LogSigned { ln_abs: base, sign: 1.0 });
                }
            }
            _ => {
                let em1 = epsilon_minus_one(spec, xi);
                let n = (1.0 + em1).sqrt();
                let z = n * y;
                let iz = BesselISeq::new(l_max + 1, z)?;
                for l in 1..=l_max {
                    let lf = l as f64;
                    let base = ln_pi2 + iy.ln(l) - ky.ln(l);
                    let d3y = ky.riccati_log_derivative(l);
                    let d1z = iz.riccati_log_derivative(l);
                    let ry = iy.ratio(l + 1);
                    let rz = iz.ratio(l + 1);
                    // n D1(y) - D1(z) = (ℓ+1)(n²-1)/(n y) + n r(y) - r(z)
                    let a_num = (lf + 1.0) * em1 / z + n * ry - rz;
                    let a_den = n * d3y - d1z;
                    // D1(y) - n D1(z) = r(y) - n r(z)
                    let b_num = ry - n * rz;
                    let b_den = d3y - n * d1z;
                    electric.push(signed(base, a_num / a_den));
                    magnetic.push(signed(base, b_num / b_den));
                }
            }
        }
        Ok(MieTable { electric, magnetic })
    }

    /// Zero-frequency coefficients `γ_ℓ` defined by `a_ℓ ≈ γ_ℓ^E y^{2ℓ+1}`,
    /// `b_ℓ ≈ γ_ℓ^M y^{2ℓ+1}` as `y = ξR/c → 0`.
    ///
    /// Perfect and plasma spheres keep the conductor's electric response;
    /// the plasma magnetic response is reduced by
    /// `α r_{ℓ+1}(α) / (2ℓ+1 + α r_{ℓ+1}(α))` with `α = ω_P R/c`; a Drude
    /// sphere has no static magnetic response.
    pub fn static_limit(spec: &MirrorSpec, radius: f64, l_max: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return domain(format!("sphere radius must be positive, got {radius}"));
        }
        if l_max == 0 {
            return domain("l_max must be at least 1");
        }
        let alpha_seq = match spec {
            MirrorSpec::Plasma { omega_p } => Some(BesselISeq::new(l_max + 1, omega_p * radius / C)?),
            _ => None,
        };
        let mut electric = Vec::with_capacity(l_max);
        let mut magnetic = Vec::with_capacity(l_max);
        for l in 1..=l_max {
            let lf = l as f64;
            let ln_g = -ln_double_factorial_odd(l + 1) - ln_double_factorial_odd(l);
            electric.push(LogSigned { ln_abs: ln_g + ((lf + 1.0) / lf).ln(), sign: -1.0 });
            let mag = match spec {
                MirrorSpec::Perfect => LogSigned { ln_abs: ln_g, sign: 1.0 },
                MirrorSpec::Plasma { .. } => {
                    let seq = alpha_seq.as_ref().unwrap();
                    let ar = seq.x * seq.ratio(l + 1);
                    LogSigned { ln_abs: ln_g + (ar / (2.0 * lf + 1.0 + ar)).ln(), sign: 1.0 }
                }
                MirrorSpec::Drude { .. } => LogSigned::ZERO,
            };
            magnetic.push(mag);
        }
        Ok(MieTable { electric, magnetic })
    }

    pub fn l_max(&self) -> usize {
        self.electric.len()
    }

    pub fn get(&self, l: usize, p: Polarization) -> LogSigned {
        match p {
            Polarization::E => self.electric[l - 1],
            Polarization::M => self.magnetic[l - 1],
        }
    }
}

fn signed(base: f64, ratio: f64) -> LogSigned {
    if ratio == 0.0 {
        LogSigned::ZERO
    } else {
        LogSigned { ln_abs: base + ratio.abs().ln(), sign: ratio.signum() }
    }
}

/// Electric (`a_ℓ`) and magnetic (`b_ℓ`) amplitudes of a sphere of radius
/// `radius` (m) at imaginary frequency `xi` (rad/s).
pub fn mie(spec: &MirrorSpec, radius: f64, xi: f64, l: usize) -> Result<(MieCoefficient, MieCoefficient)> {
    if l == 0 || l > crate::specfun::L_CAP {
        return domain(format!("multipole order {l} out of range"));
    }
    let table = MieTable::new(spec, radius, xi, l)?;
    let x = xi * radius / C;
    let a = table.get(l, Polarization::E);
    let b = table.get(l, Polarization::M);
    Ok((
        MieCoefficient::new(l, Polarization::E, x, a.sign, a.ln_abs),
        MieCoefficient::new(l, Polarization::M, x, b.sign, b.ln_abs),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const R: f64 = 1e-6;

    fn xi_for(x: f64) -> f64 {
        x * C / R
    }

    fn materials() -> Vec<MirrorSpec> {
        vec![
            MirrorSpec::Perfect,
            MirrorSpec::plasma_from_wavelength(136e-9).unwrap(),
            MirrorSpec::drude_from_wavelengths(136e-9, 34e-6).unwrap(),
        ]
    }

    #[test]
    fn vanishing_sphere() {
        for spec in materials() {
            let (a, b) = mie(&spec, R, xi_for(1e-5), 1).unwrap();
            assert!(a.to_f64().abs() < 1e-14 && b.to_f64().abs() < 1e-14);
        }
    }

    #[test]
    fn perfect_dipole_ratio() {
        // small-x series of the implemented formulas: a1 = -(2/3)y³(1 - ...), b1 = y³/3 (1 - ...)
        let (a, b) = mie(&MirrorSpec::Perfect, R, xi_for(1e-4), 1).unwrap();
        assert_relative_eq!(a.to_f64() / b.to_f64(), -2.0, max_relative = 1e-7);
        assert_relative_eq!(b.to_f64(), 1e-12 / 3.0, max_relative = 1e-7);
    }

    #[test]
    fn closed_form_dipole() {
        // perfect conductor dipole with i_1, k_1 written out explicitly
        for &y in &[0.05f64, 0.8, 3.0, 12.0] {
            let i1 = y.cosh() / y - y.sinh() / (y * y);
            let k1 = FRAC_PI_2 * (-y).exp() * (1.0 / y + 1.0 / (y * y));
            let di = y.sinh() - i1; // (y i1)' = i0 y - i1 ... (y i_1)' = y i_0 - i_1
            let dk = -FRAC_PI_2 * (-y).exp() * (1.0 + 1.0 / y + 1.0 / (y * y)); // (y k_1)'
            let (a, b) = mie(&MirrorSpec::Perfect, R, xi_for(y), 1).unwrap();
            assert_relative_eq!(b.to_f64(), FRAC_PI_2 * i1 / k1, max_relative = 1e-9);
            assert_relative_eq!(a.to_f64(), FRAC_PI_2 * di / dk, max_relative = 1e-9);
        }
    }

    #[test]
    fn small_size_slopes() {
        for spec in materials() {
            // a Drude sphere is still opaque at y = 1e-2; its quasi-static regime starts lower
            let (lo, hi) = if matches!(spec, MirrorSpec::Drude { .. }) { (1e-10, 1e-8) } else { (1e-4, 1e-2) };
            for l in 1..=5usize {
                let (a1, b1) = mie(&spec, R, xi_for(lo), l).unwrap();
                let (a2, b2) = mie(&spec, R, xi_for(hi), l).unwrap();
                let slope_a = (a2.ln_abs() - a1.ln_abs()) / 100f64.ln();
                let slope_b = (b2.ln_abs() - b1.ln_abs()) / 100f64.ln();
                let expect = (2 * l + 1) as f64;
                assert!((slope_a - expect).abs() < 1e-2, "{spec} l={l} slope_a={slope_a}");
                // a Drude sphere's magnetic response dies with one extra power of ξ
                let expect_b = if matches!(spec, MirrorSpec::Drude { .. }) { expect + 1.0 } else { expect };
                assert!((slope_b - expect_b).abs() < 2e-2, "{spec} l={l} slope_b={slope_b}");
            }
        }
    }

    #[test]
    fn plasma_tends_to_perfect() {
        let alpha = 1e4;
        let plasma = MirrorSpec::plasma(alpha * C / R).unwrap();
        let mut sup = 0.0f64;
        for &x in &[1e-3, 0.1, 1.0, 10.0] {
            let p = MieTable::new(&plasma, R, xi_for(x), 20).unwrap();
            let q = MieTable::new(&MirrorSpec::Perfect, R, xi_for(x), 20).unwrap();
            for l in 1..=20 {
                for pol in [Polarization::E, Polarization::M] {
                    let (vp, vq) = (p.get(l, pol).to_f64(), q.get(l, pol).to_f64());
                    if x <= 1.0 {
                        sup = sup.max((vp - vq).abs());
                    }
                    // the skin-depth correction is of relative size (2ℓ+1+x)/α
                    let bound = 2.0 * ((2 * l + 1) as f64 + x) / alpha;
                    assert!((vp / vq - 1.0).abs() < bound, "x={x} l={l} {pol:?} {}", vp / vq - 1.0);
                }
            }
        }
        assert!(sup < 1e-3, "sup = {sup}");
    }

    #[test]
    fn static_limit_matches_small_frequency() {
        for spec in materials() {
            let st = MieTable::static_limit(&spec, R, 6).unwrap();
            let y = 1e-5;
            let dy = MieTable::new(&spec, R, xi_for(y), 6).unwrap();
            for l in 1..=6 {
                let scale = (2 * l + 1) as f64 * y.ln();
                let e = dy.get(l, Polarization::E);
                assert_relative_eq!(e.ln_abs - scale, st.get(l, Polarization::E).ln_abs, epsilon = 1e-6);
                assert_eq!(e.sign, st.get(l, Polarization::E).sign);
                let m = st.get(l, Polarization::M);
                if m.sign != 0.0 {
                    let got = dy.get(l, Polarization::M).ln_abs - scale;
                    assert_relative_eq!(got, m.ln_abs, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn plasma_static_dipole_ratio() {
        // magnetic/electric static ratio reduces to 1 + 3/α² - 3 coth(α)/α times the conductor value
        for &alpha in &[0.3f64, 1.0, 4.6, 30.0] {
            let spec = MirrorSpec::plasma(alpha * C / R).unwrap();
            let st = MieTable::static_limit(&spec, R, 1).unwrap();
            let perf = MieTable::static_limit(&MirrorSpec::Perfect, R, 1).unwrap();
            let ratio = st.get(1, Polarization::M).to_f64() / perf.get(1, Polarization::M).to_f64();
            let expect = 1.0 + 3.0 / (alpha * alpha) - 3.0 / (alpha * alpha.tanh());
            assert_relative_eq!(ratio, expect, max_relative = 1e-9);
        }
    }

    #[test]
    fn bad_inputs() {
        assert!(mie(&MirrorSpec::Perfect, -1.0, 1e14, 1).is_err());
        assert!(mie(&MirrorSpec::Perfect, R, 0.0, 1).is_err());
        assert!(mie(&MirrorSpec::Perfect, R, 1e14, 0).is_err());
    }
}
