//! Ratios to the proximity force approximation, extraction of the linear
//! correction coefficient β, thermal factors and plasma/Drude ratios.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{CasimirError, Result};
use crate::materials::MirrorSpec;
use crate::pfa::{pfa_energy, pfa_force, pfa_gradient};
use crate::roundtrip::{ComputeConfig, Geometry};
use crate::spectrum::{self, CasimirResult, QuantityKind};

/// Quantity compared with its PFA counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RhoKind {
    E,
    F,
    G,
}

impl RhoKind {
    pub fn matches(&self, kind: QuantityKind) -> bool {
        matches!(
            (self, kind),
            (RhoKind::E, QuantityKind::FreeEnergy | QuantityKind::EnergyT0)
                | (RhoKind::F, QuantityKind::Force)
                | (RhoKind::G, QuantityKind::Gradient)
        )
    }
}

/// A PFA value tagged with the configuration it was computed for.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PfaResult {
    pub kind: RhoKind,
    pub value: f64,
    pub geometry: Geometry,
    pub temperature: f64,
    pub sphere: MirrorSpec,
    pub plane: MirrorSpec,
}

/// PFA energy, force or gradient for a sphere-plane configuration. The
/// plane-plane energy uses the two mirror models as given.
pub fn pfa_result(
    kind: RhoKind,
    geom: &Geometry,
    sphere: &MirrorSpec,
    plane: &MirrorSpec,
    temperature: f64,
) -> Result<PfaResult> {
    let value = match kind {
        RhoKind::E => pfa_energy(geom, sphere, plane, temperature)?,
        RhoKind::F => pfa_force(geom, sphere, plane, temperature)?,
        RhoKind::G => pfa_gradient(geom, sphere, plane, temperature)?,
    };
    Ok(PfaResult { kind, value, geometry: *geom, temperature, sphere: *sphere, plane: *plane })
}

/// `exact / PFA` after checking that both describe the same configuration.
pub fn rho(exact: &CasimirResult, pfa: &PfaResult) -> Result<f64> {
    if !pfa.kind.matches(exact.kind) {
        return Err(CasimirError::Provenance(format!(
            "cannot compare {} with a PFA {:?}",
            exact.kind.name(),
            pfa.kind
        )));
    }
    if exact.geometry != pfa.geometry {
        return Err(CasimirError::Provenance(format!(
            "geometry differs: R = {:e}, L = {:e} vs R = {:e}, L = {:e}",
            exact.geometry.radius, exact.geometry.gap, pfa.geometry.radius, pfa.geometry.gap
        )));
    }
    if exact.temperature != pfa.temperature {
        return Err(CasimirError::Provenance(format!(
            "temperature differs: {} K vs {} K",
            exact.temperature, pfa.temperature
        )));
    }
    if exact.sphere != pfa.sphere || exact.plane != pfa.plane {
        return Err(CasimirError::Provenance("mirror models differ".into()));
    }
    if pfa.value == 0.0 {
        return Err(CasimirError::Provenance("PFA value is zero".into()));
    }
    let r = exact.value / pfa.value;
    if !(r > 0.0) {
        return Err(CasimirError::Provenance(format!(
            "exact and PFA values have opposite signs ({:e} vs {:e})",
            exact.value, pfa.value
        )));
    }
    Ok(r)
}

/// `(x = L/R, ρ)` pairs, strictly increasing in `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoSeries {
    pub kind: RhoKind,
    pub points: Vec<(f64, f64)>,
}

impl RhoSeries {
    pub fn new(kind: RhoKind, mut points: Vec<(f64, f64)>) -> Result<Self> {
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(CasimirError::Fit(format!("aspect ratios must be distinct, got {} twice", w[0].0)));
            }
        }
        if let Some(&(x, r)) = points.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0)) {
            return Err(CasimirError::Fit(format!("invalid point x = {x}, rho = {r}")));
        }
        Ok(RhoSeries { kind, points })
    }

    fn window(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        // a relative slack keeps points sitting exactly on the edges
        let eps = 1e-12 * hi.abs();
        self.points
            .iter()
            .copied()
            .filter(|p| p.0 >= lo - eps && p.0 <= hi + eps)
            .collect()
    }

    /// Second differences on the (possibly non-uniform) grid.
    pub fn second_differences(&self) -> Vec<f64> {
        self.points
            .windows(3)
            .map(|w| {
                let (x0, y0) = w[0];
                let (x1, y1) = w[1];
                let (x2, y2) = w[2];
                2.0 * ((y2 - y1) / (x2 - x1) - (y1 - y0) / (x1 - x0)) / (x2 - x0)
            })
            .collect()
    }

    /// True when the discrete second derivative changes sign.
    pub fn has_inflection(&self) -> bool {
        let d = self.second_differences();
        d.windows(2).any(|w| w[0] * w[1] < 0.0)
    }
}

/// Result of the constrained fit `ρ = 1 + βx + γx²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaFit {
    pub beta: f64,
    pub gamma: f64,
    pub window: [f64; 2],
    pub n_points: usize,
    /// Root-mean-square residual.
    pub residual: f64,
    pub sensitivity: Sensitivity,
}

/// Stability of β under shrinking of the fit window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sensitivity {
    /// β on the window with its upper edge pulled in by 25% of the width.
    pub beta_shrunk: Option<f64>,
    /// β on the window of half the width.
    pub beta_half: Option<f64>,
    /// Least-squares standard error plus the largest window shift.
    pub uncertainty: f64,
    /// Halving the window moved β by less than 10%.
    pub stable: bool,
}

fn solve_quadratic(points: &[(f64, f64)]) -> Result<(f64, f64, f64, f64)> {
    if points.len() < 4 {
        return Err(CasimirError::Fit(format!("need at least 4 points in the window, got {}", points.len())));
    }
    let (mut s2, mut s3, mut s4, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, r) in points {
        let y = r - 1.0;
        s2 += x * x;
        s3 += x * x * x;
        s4 += x * x * x * x;
        b1 += x * y;
        b2 += x * x * y;
    }
    let a = Matrix2::new(s2, s3, s3, s4);
    let det = a.determinant();
    if !(det.abs() > 1e-12 * s2 * s4) {
        return Err(CasimirError::Fit("degenerate design: points do not resolve x and x²".into()));
    }
    let inv = a.try_inverse().ok_or_else(|| CasimirError::Fit("singular normal equations".into()))?;
    let sol = inv * Vector2::new(b1, b2);
    let (beta, gamma) = (sol[0], sol[1]);
    let ss: f64 = points
        .iter()
        .map(|&(x, r)| (r - 1.0 - beta * x - gamma * x * x).powi(2))
        .sum();
    let n = points.len() as f64;
    let rms = (ss / n).sqrt();
    let se = (ss / (n - 2.0) * inv[(0, 0)]).sqrt();
    Ok((beta, gamma, rms, se))
}

/// Least-squares fit of `ρ = 1 + βx + γx²` over `window` with the
/// intercept held at 1.
pub fn fit_beta(series: &RhoSeries, window: (f64, f64)) -> Result<BetaFit> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(CasimirError::Fit(format!("empty window [{lo}, {hi}]")));
    }
    let pts = series.window(lo, hi);
    let (beta, gamma, residual, se) = solve_quadratic(&pts)?;
    let width = hi - lo;
    let sub = |frac: f64| solve_quadratic(&series.window(lo, lo + frac * width)).ok().map(|s| s.0);
    let beta_shrunk = sub(0.75);
    let beta_half = sub(0.5);
    let shift = [beta_shrunk, beta_half]
        .iter()
        .flatten()
        .map(|b| (b - beta).abs())
        .fold(0.0, f64::max);
    let stable = beta_half.map(|b| (b - beta).abs() < 0.1 * beta.abs()).unwrap_or(false);
    Ok(BetaFit {
        beta,
        gamma,
        window: [lo, hi],
        n_points: pts.len(),
        residual,
        sensitivity: Sensitivity { beta_shrunk, beta_half, uncertainty: se + shift, stable },
    })
}

/// Smallest aspect ratio for which `l_max` satisfies `l_max ≥ 10 + 7/x`.
pub fn trusted_aspect(l_max: usize) -> f64 {
    if l_max <= 10 {
        f64::INFINITY
    } else {
        7.0 / (l_max as f64 - 10.0)
    }
}

/// `ϑ = F(T)/F(0)` with both forces attached.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaResult {
    pub theta: f64,
    pub force_t: CasimirResult,
    pub force_0: CasimirResult,
}

/// Thermal correction factor of the force.
pub fn theta_factor(
    geom: &Geometry,
    sphere: &MirrorSpec,
    plane: &MirrorSpec,
    temperature: f64,
    cfg: &ComputeConfig,
) -> Result<ThetaResult> {
    let force_t = spectrum::force(geom, sphere, plane, temperature, cfg)?;
    let force_0 = spectrum::force(geom, sphere, plane, 0.0, cfg)?;
    Ok(ThetaResult { theta: force_t.value / force_0.value, force_t, force_0 })
}

/// PFA thermal factor `F_PFA(T)/F_PFA(0)`.
pub fn theta_pfa(geom: &Geometry, sphere: &MirrorSpec, plane: &MirrorSpec, temperature: f64) -> Result<f64> {
    Ok(pfa_force(geom, sphere, plane, temperature)? / pfa_force(geom, sphere, plane, 0.0)?)
}

fn check_pair(plasma: &MirrorSpec, drude: &MirrorSpec) -> Result<()> {
    match (plasma, drude) {
        (MirrorSpec::Plasma { omega_p: a }, MirrorSpec::Drude { omega_p: b, .. }) => {
            if (a - b).abs() > 1e-12 * a.abs() {
                return Err(CasimirError::Config(format!(
                    "plasma and Drude models must share omega_P ({a:e} vs {b:e})"
                )));
            }
            Ok(())
        }
        _ => Err(CasimirError::Config("dissipation ratio needs a plasma and a Drude model".into())),
    }
}

/// `F_plasma / F_Drude` for sphere and plane made of the same metal.
pub fn dissipation_ratio(
    geom: &Geometry,
    temperature: f64,
    plasma: &MirrorSpec,
    drude: &MirrorSpec,
    cfg: &ComputeConfig,
) -> Result<f64> {
    check_pair(plasma, drude)?;
    let fp = spectrum::force(geom, plasma, plasma, temperature, cfg)?;
    let fd = spectrum::force(geom, drude, drude, temperature, cfg)?;
    Ok(fp.value / fd.value)
}

/// The same ratio within PFA (plane-plane energies).
pub fn pfa_dissipation_ratio(geom: &Geometry, temperature: f64, plasma: &MirrorSpec, drude: &MirrorSpec) -> Result<f64> {
    check_pair(plasma, drude)?;
    Ok(pfa_force(geom, plasma, plasma, temperature)? / pfa_force(geom, drude, drude, temperature)?)
}
