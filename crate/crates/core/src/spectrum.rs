//! Free energy, zero-temperature energy and their derivatives.
//!
//! Finite temperature uses the Matsubara sum
//! `ℱ = k_B T Σ'_n Σ_m w_m ln det(I - M^(m)(ξ_n))` with the `n = 0` term
//! halved. At `T = 0` the sum becomes `E = (ħ/2π) ∫_0^∞ dξ (…)`, evaluated by
//! Gauss–Laguerre quadrature in `v = 2ξL/c`.
//!
//! Sign conventions: `ℱ, E < 0`; the force `F = ∂ℱ/∂L` is positive for
//! attraction and the gradient is `G = -∂F/∂L`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{matsubara_step, C, HBAR, K_B};
use crate::error::{domain, CasimirError, Result};
use crate::materials::MirrorSpec;
use crate::quadrature::GaussLaguerre;
use crate::roundtrip::{logdet_frequency, ComputeConfig, Geometry, LogdetRecord};

/// Which quantity a [`CasimirResult`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantityKind {
    FreeEnergy,
    EnergyT0,
    Force,
    Gradient,
    Entropy,
}

impl QuantityKind {
    pub fn unit(&self) -> &'static str {
        match self {
            QuantityKind::FreeEnergy | QuantityKind::EnergyT0 => "J",
            QuantityKind::Force => "N",
            QuantityKind::Gradient => "N/m",
            QuantityKind::Entropy => "J/K",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            QuantityKind::FreeEnergy => "free_energy",
            QuantityKind::EnergyT0 => "energy_t0",
            QuantityKind::Force => "force",
            QuantityKind::Gradient => "gradient",
            QuantityKind::Entropy => "entropy",
        }
    }
}

/// Truncation parameters actually used and an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub lmax: usize,
    /// Last Matsubara index, or the number of frequency nodes at `T = 0`.
    pub nmax: usize,
    pub nk: usize,
    pub est_rel_err: f64,
}

/// A computed quantity in SI units together with its inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CasimirResult {
    pub kind: QuantityKind,
    pub value: f64,
    pub unit: &'static str,
    pub geometry: Geometry,
    pub temperature: f64,
    pub sphere: MirrorSpec,
    pub plane: MirrorSpec,
    pub diagnostics: Diagnostics,
    /// Per-(ξ, m) log-determinants of the central evaluation, when requested.
    #[serde(skip)]
    pub logdets: Vec<LogdetRecord>,
}

/// Relative step for the first derivative in `L`.
pub const FORCE_STEP: f64 = 1e-3;
/// Relative step for the second derivative in `L`.
pub const GRADIENT_STEP: f64 = 1e-2;
/// Relative temperature step for the entropy.
pub const ENTROPY_STEP: f64 = 1e-2;
/// Floor for the finite-difference breakdown threshold.
pub const FD_TOL_FLOOR: f64 = 1e-4;

/// Energy-like evaluation at a fixed truncation.
struct Engine<'a> {
    sphere: &'a MirrorSpec,
    plane: &'a MirrorSpec,
    cfg: &'a ComputeConfig,
    l_max: usize,
    n_k: usize,
    keep_records: bool,
}

struct Sum {
    value: f64,
    n: usize,
    est_rel_err: f64,
    records: Vec<LogdetRecord>,
}

impl<'a> Engine<'a> {
    fn new(geom: &Geometry, sphere: &'a MirrorSpec, plane: &'a MirrorSpec, cfg: &'a ComputeConfig) -> Result<Self> {
        let l_max = cfg.l_max_for(geom)?;
        let n_k = cfg.n_k_for(l_max);
        Ok(Engine { sphere, plane, cfg, l_max, n_k, keep_records: false })
    }

    fn diagnostics(&self, nmax: usize, est_rel_err: f64) -> Diagnostics {
        Diagnostics { lmax: self.l_max, nmax, nk: self.n_k, est_rel_err }
    }

    fn term(&self, geom: &Geometry, xi: f64, tol: f64) -> Result<(f64, Vec<LogdetRecord>)> {
        let f = logdet_frequency(geom, self.sphere, self.plane, xi, self.l_max, self.n_k, tol)?;
        let recs = if self.keep_records { f.per_m } else { Vec::new() };
        Ok((f.total, recs))
    }

    fn terms(&self, geom: &Geometry, xis: &[f64], tol: f64) -> Result<Vec<(f64, Vec<LogdetRecord>)>> {
        xis.par_iter().map(|&xi| self.term(geom, xi, tol)).collect()
    }

    /// `Σ'_n Σ_m w_m ln det` (dimensionless). With `fixed = Some(n)` the sum
    /// runs over exactly `0..=n`; otherwise it stops once three successive
    /// terms fall below `tol` relative to the partial sum.
    fn matsubara(&self, geom: &Geometry, temperature: f64, fixed: Option<usize>, tol: f64) -> Result<Sum> {
        let xi1 = matsubara_step(temperature);
        let mut records = Vec::new();
        let push = |recs: Vec<LogdetRecord>, records: &mut Vec<LogdetRecord>| records.extend(recs);

        if let Some(n_max) = fixed {
            let xis: Vec<f64> = (0..=n_max).map(|n| n as f64 * xi1).collect();
            let mut value = 0.0;
            for (n, (t, recs)) in self.terms(geom, &xis, tol)?.into_iter().enumerate() {
                value += if n == 0 { 0.5 * t } else { t };
                push(recs, &mut records);
            }
            return Ok(Sum { value, n: n_max, est_rel_err: tol, records });
        }

        let (t0, recs) = self.term(geom, 0.0, tol)?;
        push(recs, &mut records);
        let mut value = 0.5 * t0;
        let chunk = rayon::current_num_threads().max(4);
        let mut n = 1;
        let mut small = 0;
        let mut last = (0.0f64, 0.0f64);
        loop {
            if n > self.cfg.max_matsubara {
                return Err(CasimirError::MatsubaraTail { terms: self.cfg.max_matsubara });
            }
            let xis: Vec<f64> = (n..n + chunk).map(|k| k as f64 * xi1).collect();
            for (t, recs) in self.terms(geom, &xis, tol)? {
                value += t;
                push(recs, &mut records);
                last = (last.1, t);
                if t.abs() <= tol * value.abs() {
                    small += 1;
                } else {
                    small = 0;
                }
                if small >= 3 {
                    // geometric tail estimate from the last two terms
                    let q = if last.0 != 0.0 { (last.1 / last.0).abs().min(0.999) } else { 0.0 };
                    let tail = last.1.abs() * q / (1.0 - q);
                    let est = if value != 0.0 { tail / value.abs() } else { 0.0 };
                    return Ok(Sum { value, n, est_rel_err: est, records });
                }
                n += 1;
            }
        }
    }

    /// `∫_0^∞ dv Σ_m w_m ln det(ξ = c v / 2L)` with `n` Gauss–Laguerre nodes.
    fn frequency_integral(&self, geom: &Geometry, n: usize, tol: f64) -> Result<(f64, Vec<LogdetRecord>)> {
        let rule = GaussLaguerre::cached(n);
        let scale = C / (2.0 * geom.gap);
        let xis: Vec<f64> = rule.nodes.iter().map(|v| v * scale).collect();
        let terms = self.terms(geom, &xis, tol)?;
        let mut value = 0.0;
        let mut records = Vec::new();
        for ((t, recs), (&v, &lw)) in terms.into_iter().zip(rule.nodes.iter().zip(&rule.ln_weights)) {
            value += (lw + v).exp() * t;
            records.extend(recs);
        }
        Ok((value, records))
    }

    fn n_xi(&self) -> usize {
        self.cfg.n_xi.unwrap_or_else(|| (self.l_max / 2).clamp(40, 80))
    }

    /// Zero-temperature energy in joules.
    fn energy_t0(&self, geom: &Geometry, n: usize, tol: f64) -> Result<(f64, Vec<LogdetRecord>)> {
        let (v, recs) = self.frequency_integral(geom, n, tol)?;
        Ok((HBAR * C / (4.0 * PI * geom.gap) * v, recs))
    }

    /// Free energy in joules at `T > 0`.
    fn free_energy(&self, geom: &Geometry, temperature: f64, fixed: Option<usize>, tol: f64) -> Result<Sum> {
        let mut s = self.matsubara(geom, temperature, fixed, tol)?;
        s.value *= K_B * temperature;
        Ok(s)
    }

    /// Energy (T = 0) or free energy at several gaps with a shared
    /// truncation; returns values and the Matsubara index used.
    fn energies(&self, geoms: &[Geometry], temperature: f64, tol: f64) -> Result<(Vec<f64>, usize)> {
        if temperature == 0.0 {
            let n = self.n_xi();
            let vals = geoms
                .iter()
                .map(|g| self.energy_t0(g, n, tol).map(|v| v.0))
                .collect::<Result<Vec<_>>>()?;
            return Ok((vals, n));
        }
        // the smallest gap needs the most Matsubara terms
        let (i_min, _) = geoms
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.gap.partial_cmp(&b.1.gap).unwrap())
            .unwrap();
        let first = self.free_energy(&geoms[i_min], temperature, None, tol)?;
        let n_max = first.n;
        let mut vals = vec![0.0; geoms.len()];
        for (i, g) in geoms.iter().enumerate() {
            vals[i] = if i == i_min {
                first.value
            } else {
                self.free_energy(g, temperature, Some(n_max), tol)?.value
            };
        }
        Ok((vals, n_max))
    }
}

fn check_temperature(temperature: f64) -> Result<()> {
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return domain(format!("temperature must be finite and non-negative, got {temperature}"));
    }
    if temperature > 1e4 {
        return domain(format!("temperatures above 1e4 K are not supported, got {temperature}"));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn result(
    kind: QuantityKind,
    value: f64,
    geom: &Geometry,
    temperature: f64,
    sphere: &MirrorSpec,
    plane: &MirrorSpec,
    diagnostics: Diagnostics,
    logdets: Vec<LogdetRecord>,
) -> Result<CasimirResult> {
    if !value.is_finite() {
        return Err(CasimirError::NonFinite(format!("{} at L = {:e} m", kind.name(), geom.gap)));
    }
    Ok(CasimirResult {
        kind,
        value,
        unit: kind.unit(),
        geometry: *geom,
        temperature,
        sphere: *sphere,
        plane: *plane,
        diagnostics,
        logdets,
    })
}

/// Free energy `ℱ` (J) at temperature `T > 0`.
pub fn free_energy(
    geom: &Geometry,
    sphere: &MirrorSpec,
    plane: &MirrorSpec,
    temperature: f64,
    cfg: &ComputeConfig,
) -> Result<CasimirResult> {
    free_energy_with(geom, sphere, plane, temperature, cfg, false)
}

/// As [`free_energy`], optionally keeping the per-(ξ, m) log-determinants.
pub fn free_energy_with(
    geom: &Geometry,
    sphere: &MirrorSpec,
    plane: &MirrorSpec,
    temperature: f64,
    cfg: &ComputeConfig,
    keep_logdets: bool,
) -> Result<CasimirResult> {
    check_temperature(temperature)?;
    if temperature == 0.0 {
        return domain("free_energy needs T > 0; use energy_t0 for T = 0");
    }
    let mut eng = Engine::new(geom, sphere, plane, cfg)?;
    eng.keep_records = keep_logdets;
    let s = eng.free_energy(geom, temperature, None, cfg.rel_tol)?;
    let diag = eng.diagnostics(s.n, s.est_rel_err.max(cfg.rel_tol));
    result(QuantityKind::FreeEnergy, s.value, geom, temperature, sphere, plane, diag, s.records)
}

/// Zero-temperature energy `E` (J).
pub fn energy_t0(geom: &Geometry, sphere: &MirrorSpec, plane: &MirrorSpec, cfg: &ComputeConfig) -> Result<CasimirResult> {
    energy_t0_with(geom, sphere, plane, cfg, false)
}

/// As [`energy_t0`], optionally keeping the per-(ξ, m) log-determinants.
/// The error estimate compares against a rule with half as many nodes.
pub fn energy_t0_with(
    geom: &Geometry,
    sphere: &MirrorSpec,
    plane: &MirrorSpec,
    cfg: &ComputeConfig,
    keep_logdets: bool,
) -> Result<CasimirResult> {
    let mut eng = Engine::new(geom, sphere, plane, cfg)?;
    eng.keep_records = keep_logdets;
    let n = eng.n_xi();
    let (value, recs) = eng.energy_t0(geom, n, cfg.rel_tol)?;
    eng.keep_records = false;
    let (coarse, _) = eng.energy_t0(geom, n / 2, cfg.rel_tol)?;
    let est = ((value - coarse) / value).abs();
    let diag = eng.diagnostics(n, est);
    result(QuantityKind::EnergyT0, value, geom, 0.0, sphere, plane, diag, recs)
}

/// Energy at `T = 0`, free energy otherwise.
pub fn energy(
    geom: &Geometry,
    sphere: &MirrorSpec,
    plane: &MirrorSpec,
    temperature: f64,
    cfg: &ComputeConfig,
) -> Result<CasimirResult> {
    if temperature == 0.0 {
        energy_t0(geom, sphere, plane, cfg)
    } else {
        free_energy(geom, sphere, plane, temperature, cfg)
    }
}

fn stencil(geom: &Geometry, offsets: &[f64], h: f64) -> Result<Vec<Geometry>> {
    offsets.iter().map(|k| geom.with_gap(geom.gap + k * h)).collect()
}

fn breakdown(est_abs: f64, value: f64, scale: f64, rel_tol: f64) -> Result<f64> {
    let limit = (10.0 * rel_tol).max(FD_TOL_FLOOR);
    let reference = value.abs().max(scale);
    let est = est_abs / reference;
    if est > limit {
        return Err(CasimirError::StepSize { est, limit });
    }
    Ok(est_abs / value.abs().max(f64::MIN_POSITIVE))
}

/// Force `F = ∂ℱ/∂L` (N), positive for attraction. `T = 0` selects the
/// zero-temperature energy.
///
/// Central differences with steps `h = 10⁻³ L` and `h/2`, combined by
/// Richardson extrapolation; their difference gives `est_rel_err`.
pub fn force(
    geom: &Geometry,
    sphere: &MirrorSpec,
    plane: &MirrorSpec,
    temperature: f64,
    cfg: &ComputeConfig,
) -> Result<CasimirResult> {
    check_temperature(temperature)?;
    let eng = Engine::new(geom, sphere, plane, cfg)?;
    let h = FORCE_STEP * geom.gap;
    let pts = stencil(geom, &[-1.0, -0.5, 0.5, 1.0], h)?;
    let tol = cfg.rel_tol * 1e-2;
    let (e, n) = eng.energies(&pts, temperature, tol)?;
    let f_h = (e[3] - e[0]) / (2.0 * h);
    let f_h2 = (e[2] - e[1]) / h;
    let value = (4.0 * f_h2 - f_h) / 3.0;
    let est_abs = (f_h2 - f_h).abs() / 3.0;
    let scale = 0.5 * (e[0].abs() + e[3].abs()) / geom.gap;
    let est = breakdown(est_abs, value, scale, cfg.rel_tol)?;
    result(QuantityKind::Force, value, geom, temperature, sphere, plane, eng.diagnostics(n, est), Vec::new())
}

/// Force gradient `G = -∂F/∂L = -∂²ℱ/∂L²` (N/m) from five-point stencils
/// with `h = 10⁻² L` and `h/2`, Richardson-combined.
pub fn gradient(
    geom: &Geometry,
    sphere: &MirrorSpec,
    plane: &MirrorSpec,
    temperature: f64,
    cfg: &ComputeConfig,
) -> Result<CasimirResult> {
    check_temperature(temperature)?;
    let eng = Engine::new(geom, sphere, plane, cfg)?;
    let h = GRADIENT_STEP * geom.gap;
    if geom.gap - 2.0 * h <= 0.0 {
        return domain("gap too small for the gradient stencil");
    }
    let offsets = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
    let pts = stencil(geom, &offsets, h)?;
    let tol = cfg.rel_tol * 1e-2;
    let (e, n) = eng.energies(&pts, temperature, tol)?;
    let five = |m2: f64, m1: f64, c: f64, p1: f64, p2: f64, step: f64| {
        (-p2 + 16.0 * p1 - 30.0 * c + 16.0 * m1 - m2) / (12.0 * step * step)
    };
    let d2_h = five(e[0], e[1], e[3], e[5], e[6], h);
    let d2_h2 = five(e[1], e[2], e[3], e[4], e[5], 0.5 * h);
    let d2 = (16.0 * d2_h2 - d2_h) / 15.0;
    let value = -d2;
    let est_abs = (d2_h2 - d2_h).abs() / 15.0;
    let scale = e[3].abs() / (geom.gap * geom.gap);
    let est = breakdown(est_abs, value, scale, cfg.rel_tol)?;
    result(QuantityKind::Gradient, value, geom, temperature, sphere, plane, eng.diagnostics(n, est), Vec::new())
}

/// Entropy `S = -∂ℱ/∂T` (J/K) by central differences with `ΔT = T/100` and
/// `ΔT/2`; each temperature gets its own Matsubara grid.
pub fn entropy(
    geom: &Geometry,
    sphere: &MirrorSpec,
    plane: &MirrorSpec,
    temperature: f64,
    cfg: &ComputeConfig,
) -> Result<CasimirResult> {
    check_temperature(temperature)?;
    let dt = ENTROPY_STEP * temperature;
    if !(temperature > 2.0 * dt) || temperature == 0.0 {
        return domain("entropy needs T > 0");
    }
    let eng = Engine::new(geom, sphere, plane, cfg)?;
    let tol = cfg.rel_tol * 1e-3;
    let mut f = Vec::with_capacity(4);
    let mut n_max = 0;
    for k in [-1.0, -0.5, 0.5, 1.0] {
        let s = eng.free_energy(geom, temperature + k * dt, None, tol)?;
        n_max = n_max.max(s.n);
        f.push(s.value);
    }
    let d_h = (f[3] - f[0]) / (2.0 * dt);
    let d_h2 = (f[2] - f[1]) / dt;
    let value = -(4.0 * d_h2 - d_h) / 3.0;
    let est_abs = (d_h2 - d_h).abs() / 3.0;
    let scale = 0.5 * (f[0].abs() + f[3].abs()) / temperature;
    let est = breakdown(est_abs, value, scale, cfg.rel_tol)?;
    result(QuantityKind::Entropy, value, geom, temperature, sphere, plane, eng.diagnostics(n_max, est), Vec::new())
}
