//! Round-trip operator of the sphere-plane cavity in the multipole basis.
//!
//! At fixed imaginary frequency the operator splits into blocks labelled by
//! the azimuthal number `m`. Each block is indexed by `(ℓ, P)` with
//! `ℓ = max(1, m) ..= ℓ_max` and `P ∈ {M, E}`; rows are ordered
//! `(ℓ_min, M), (ℓ_min, E), (ℓ_min + 1, M), …`.
//!
//! The stored matrix is the symmetric form `B diag(ρ) Bᵀ` obtained by
//! splitting the Mie amplitudes evenly between the two sides of the
//! plane-wave expansion. It is similar to the round-trip operator itself, so
//! the log-determinant is unchanged, and it is positive semi-definite, which
//! makes `I - M` amenable to a Cholesky factorization.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};

use crate::constants::C;
use crate::error::{domain, CasimirError, Result};
use crate::materials::{fresnel_kappa, fresnel_static, MirrorSpec};
use crate::mie::{MieTable, Polarization};
use crate::quadrature::GaussLaguerre;
use crate::specfun::{angular_table, ln_factorial, L_CAP};

/// Sphere of radius `radius` whose surface sits a distance `gap` above the
/// plane; `center_distance = gap + radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Geometry {
    pub radius: f64,
    pub gap: f64,
    pub center_distance: f64,
}

impl Geometry {
    pub fn new(radius: f64, gap: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return domain(format!("sphere radius must be positive and finite, got {radius}"));
        }
        if !(gap > 0.0 && gap.is_finite()) {
            return domain(format!("surface separation must be positive and finite, got {gap}"));
        }
        Ok(Geometry { radius, gap, center_distance: gap + radius })
    }

    /// Copy with a different gap, same radius.
    pub fn with_gap(&self, gap: f64) -> Result<Self> {
        Geometry::new(self.radius, gap)
    }

    /// `L / R`.
    pub fn aspect(&self) -> f64 {
        self.gap / self.radius
    }
}

/// Truncation and accuracy settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComputeConfig {
    /// Multipole cutoff; `None` picks `ceil(10 + 7 R/L)`.
    pub l_max: Option<usize>,
    /// Gauss–Laguerre nodes for the wavevector integral; `None` picks
    /// `max(40, 2 ℓ_max)`.
    pub n_k: Option<usize>,
    /// Relative tolerance for frequency sums and integrals.
    pub rel_tol: f64,
    /// Nodes of the zero-temperature frequency integral; `None` picks a
    /// value from `ℓ_max`.
    pub n_xi: Option<usize>,
    /// Hard cap on the number of Matsubara terms.
    pub max_matsubara: usize,
    /// Recompute every block with `2 N_k` nodes and fail if an entry moves
    /// by more than `rel_tol`.
    pub verify_quadrature: bool,
}

impl Default for ComputeConfig {
    fn default() -> Self {
        ComputeConfig {
            l_max: None,
            n_k: None,
            rel_tol: 1e-8,
            n_xi: None,
            max_matsubara: 200_000,
            verify_quadrature: false,
        }
    }
}

impl ComputeConfig {
    pub fn with_l_max(mut self, l_max: usize) -> Self {
        self.l_max = Some(l_max);
        self
    }

    pub fn with_n_k(mut self, n_k: usize) -> Self {
        self.n_k = Some(n_k);
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(l) = self.l_max {
            if l == 0 || l > L_CAP {
                return Err(CasimirError::Config(format!("l_max must lie in 1..={L_CAP}, got {l}")));
            }
        }
        if let Some(n) = self.n_k {
            if n < 8 {
                return Err(CasimirError::Config(format!("n_k must be at least 8, got {n}")));
            }
        }
        if let Some(n) = self.n_xi {
            if n < 8 {
                return Err(CasimirError::Config(format!("n_xi must be at least 8, got {n}")));
            }
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1e-2) {
            return Err(CasimirError::Config(format!("rel_tol must lie in (0, 1e-2), got {}", self.rel_tol)));
        }
        if self.max_matsubara == 0 {
            return Err(CasimirError::Config("max_matsubara must be positive".into()));
        }
        Ok(())
    }

    /// Multipole cutoff for a geometry.
    pub fn l_max_for(&self, geom: &Geometry) -> Result<usize> {
        self.validate()?;
        if let Some(l) = self.l_max {
            return Ok(l);
        }
        let l = (10.0 + 7.0 * geom.radius / geom.gap).ceil();
        if l > L_CAP as f64 {
            return Err(CasimirError::Config(format!(
                "default l_max = {l} exceeds the supported {L_CAP}; R/L is too large"
            )));
        }
        Ok(l as usize)
    }

    pub fn n_k_for(&self, l_max: usize) -> usize {
        self.n_k.unwrap_or_else(|| (2 * l_max).max(40))
    }
}

/// One `m` block of the round-trip operator at frequency `xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTripBlock {
    pub m: i64,
    pub xi: f64,
    pub l_min: usize,
    pub matrix: DMatrix<f64>,
}

impl RoundTripBlock {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

struct Node {
    /// `u = cκ/ξ` (dynamic) or `t` (static).
    arg: f64,
    ln_w: f64,
    ln_rho_te: f64,
    ln_rho_tm: f64,
}

/// Everything at one frequency that does not depend on `m`.
pub struct FrequencyContext {
    pub xi: f64,
    pub l_max: usize,
    geom: Geometry,
    mie: MieTable,
    nodes: Vec<Node>,
    n_k: usize,
}

fn ln_pos(v: f64) -> f64 {
    if v > 0.0 {
        v.ln()
    } else {
        f64::NEG_INFINITY
    }
}

impl FrequencyContext {
    /// Prepare Mie amplitudes and plane reflection at the quadrature nodes.
    /// `xi = 0` selects the static limit.
    pub fn new(
        geom: &Geometry,
        sphere: &MirrorSpec,
        plane: &MirrorSpec,
        xi: f64,
        l_max: usize,
        n_k: usize,
    ) -> Result<Self> {
        if l_max == 0 || l_max > L_CAP {
            return domain(format!("l_max must lie in 1..={L_CAP}, got {l_max}"));
        }
        if n_k < 8 {
            return domain(format!("n_k must be at least 8, got {n_k}"));
        }
        if !(xi >= 0.0 && xi.is_finite()) {
            return domain(format!("frequency must be finite and non-negative, got {xi}"));
        }
        let rule: Arc<GaussLaguerre> = GaussLaguerre::cached(n_k);
        let two_l = 2.0 * geom.center_distance;
        let mut nodes = Vec::with_capacity(n_k);
        let mie = if xi == 0.0 {
            for (&t, &lw) in rule.nodes.iter().zip(&rule.ln_weights) {
                let r = fresnel_static(plane, t / two_l);
                nodes.push(Node { arg: t, ln_w: lw, ln_rho_te: ln_pos(-r.r_te), ln_rho_tm: ln_pos(r.r_tm) });
            }
            MieTable::static_limit(sphere, geom.radius, l_max)?
        } else {
            // t = 2ξ𝓛(u-1)/c, ∫₁^∞ du e^{-2ξ𝓛u/c} f(u) = e^{-a}/a Σ w_j f(1 + t_j/a)
            let a = xi * two_l / C;
            let shift = -a - a.ln();
            for (&t, &lw) in rule.nodes.iter().zip(&rule.ln_weights) {
                let u = 1.0 + t / a;
                let r = fresnel_kappa(plane, xi, xi * u / C);
                nodes.push(Node { arg: u, ln_w: lw + shift, ln_rho_te: ln_pos(-r.r_te), ln_rho_tm: ln_pos(r.r_tm) });
            }
            MieTable::new(sphere, geom.radius, xi, l_max)?
        };
        Ok(FrequencyContext { xi, l_max, geom: *geom, mie, nodes, n_k })
    }

    pub fn n_k(&self) -> usize {
        self.n_k
    }

    /// Factor `B` of the block `M = B Bᵀ`, one column per (node, TE/TM).
    fn factor(&self, m: i64) -> DMatrix<f64> {
        let am = m.unsigned_abs() as usize;
        let l_min = am.max(1);
        let dim = 2 * (self.l_max + 1 - l_min);
        let mut b = DMatrix::<f64>::zeros(dim, 2 * self.nodes.len());
        let pi_sign = if m < 0 { -1.0 } else { 1.0 };
        let half_ln_l: Vec<f64> = (l_min..=self.l_max)
            .map(|l| 0.5 * ((l * (l + 1)) as f64).ln())
            .collect();

        if self.xi == 0.0 {
            self.fill_static(&mut b, am, l_min);
            return b;
        }

        for (j, node) in self.nodes.iter().enumerate() {
            let table = angular_table(am, node.arg, self.l_max);
            for (i, e) in table.iter().enumerate() {
                let l = l_min + i;
                for (k, pol) in [Polarization::M, Polarization::E].into_iter().enumerate() {
                    let c = self.mie.get(l, pol);
                    if c.sign == 0.0 {
                        continue;
                    }
                    let base = 0.5 * (c.ln_abs + node.ln_w) - half_ln_l[i] + e.log_scale;
                    let pi = pi_sign * e.pi;
                    let (v, w) = match pol {
                        Polarization::M => (e.tau, pi),
                        Polarization::E => (-pi, -e.tau),
                    };
                    let row = 2 * i + k;
                    if v != 0.0 && node.ln_rho_te > f64::NEG_INFINITY {
                        b[(row, 2 * j)] = v * (base + 0.5 * node.ln_rho_te).exp();
                    }
                    if w != 0.0 && node.ln_rho_tm > f64::NEG_INFINITY {
                        b[(row, 2 * j + 1)] = w * (base + 0.5 * node.ln_rho_tm).exp();
                    }
                }
            }
        }
        b
    }

    /// Static limit: only the leading `u^ℓ` part of `τ` survives, so magnetic
    /// multipoles couple through TE and electric ones through TM.
    fn fill_static(&self, b: &mut DMatrix<f64>, m: usize, l_min: usize) {
        let ln_ratio = (self.geom.radius / (2.0 * self.geom.center_distance)).ln();
        for (j, node) in self.nodes.iter().enumerate() {
            let ln_t = node.arg.ln();
            for l in l_min..=self.l_max {
                let i = l - l_min;
                let lf = l as f64;
                // N_ℓm ℓ C_ℓm / √(ℓ(ℓ+1)), C_ℓm = (2ℓ)! / (2^ℓ ℓ! (ℓ-m)!)
                let ln_norm = 0.5 * ((2.0 * lf + 1.0).ln() + ln_factorial(l - m) - ln_factorial(l + m));
                let ln_c = ln_factorial(2 * l) - lf * std::f64::consts::LN_2 - ln_factorial(l) - ln_factorial(l - m);
                let ln_common = ln_norm + lf.ln() + ln_c - 0.5 * (lf * (lf + 1.0)).ln()
                    + (lf + 0.5) * ln_ratio
                    + 0.5 * node.ln_w
                    + lf * ln_t;
                let gm = self.mie.get(l, Polarization::M);
                if gm.sign != 0.0 && node.ln_rho_te > f64::NEG_INFINITY {
                    b[(2 * i, 2 * j)] = (ln_common + 0.5 * (gm.ln_abs + node.ln_rho_te)).exp();
                }
                let ge = self.mie.get(l, Polarization::E);
                if ge.sign != 0.0 && node.ln_rho_tm > f64::NEG_INFINITY {
                    b[(2 * i + 1, 2 * j + 1)] = -(ln_common + 0.5 * (ge.ln_abs + node.ln_rho_tm)).exp();
                }
            }
        }
    }

    /// Block for azimuthal number `m`; negative `m` is the mirror-image
    /// block, kept for consistency checks.
    pub fn block(&self, m: i64) -> Result<RoundTripBlock> {
        let am = m.unsigned_abs() as usize;
        if am > self.l_max {
            return domain(format!("|m| = {am} exceeds l_max = {}", self.l_max));
        }
        let b = self.factor(m);
        let matrix = &b * b.transpose();
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(CasimirError::NonFinite(format!("round-trip block at xi = {:e}, m = {m}", self.xi)));
        }
        Ok(RoundTripBlock { m, xi: self.xi, l_min: am.max(1), matrix })
    }
}

/// Assemble the round-trip block for `m` at frequency `xi` (`xi = 0` gives
/// the static limit).
pub fn assemble_block(
    geom: &Geometry,
    sphere: &MirrorSpec,
    plane: &MirrorSpec,
    xi: f64,
    m: i64,
    cfg: &ComputeConfig,
) -> Result<RoundTripBlock> {
    let l_max = cfg.l_max_for(geom)?;
    let n_k = cfg.n_k_for(l_max);
    let block = FrequencyContext::new(geom, sphere, plane, xi, l_max, n_k)?.block(m)?;
    if cfg.verify_quadrature {
        let fine = FrequencyContext::new(geom, sphere, plane, xi, l_max, 2 * n_k)?.block(m)?;
        check_quadrature(&block, &fine, cfg.rel_tol)?;
    }
    Ok(block)
}

/// Compare a block against the same block with doubled quadrature; entries
/// are measured relative to the largest entry of the block.
pub fn check_quadrature(coarse: &RoundTripBlock, fine: &RoundTripBlock, rel_tol: f64) -> Result<()> {
    let scale = fine.matrix.amax();
    if scale == 0.0 {
        return Ok(());
    }
    let diff = (&coarse.matrix - &fine.matrix).amax() / scale;
    if diff > rel_tol {
        return Err(CasimirError::Quadrature(format!(
            "block at xi = {:e}, m = {} moved by {diff:e} (relative) when N_k was doubled",
            coarse.xi, coarse.m
        )));
    }
    Ok(())
}

/// `ln det(I - M)` through a Cholesky factorization of `I - M`.
pub fn logdet_block(block: &RoundTripBlock) -> Result<f64> {
    let n = block.dim();
    if block.matrix.iter().any(|v| !v.is_finite()) {
        return Err(CasimirError::NonFinite(format!(
            "round-trip block at xi = {:e}, m = {}",
            block.xi, block.m
        )));
    }
    let a = DMatrix::<f64>::identity(n, n) - &block.matrix;
    let chol = Cholesky::new(a).ok_or_else(|| CasimirError::Factorization {
        xi: block.xi,
        m: block.m,
        reason: "I - M is not positive definite (spectral radius of M reached 1)".into(),
    })?;
    let l = chol.l_dirty();
    let v: f64 = 2.0 * (0..n).map(|i| l[(i, i)].ln()).sum::<f64>();
    if !v.is_finite() {
        return Err(CasimirError::Factorization {
            xi: block.xi,
            m: block.m,
            reason: "log-determinant is not finite".into(),
        });
    }
    Ok(v.min(0.0))
}

/// Per-(ξ, m) log-determinant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogdetRecord {
    pub xi: f64,
    pub m: usize,
    pub logdet: f64,
}

/// Weighted sum `Σ_m w_m ln det(I - M^(m))` at one frequency, with `w_0 = 1`
/// and `w_m = 2` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyLogdet {
    pub xi: f64,
    pub total: f64,
    pub per_m: Vec<LogdetRecord>,
}

/// Sum over `m`. Blocks are evaluated for increasing `m`; once two
/// successive weighted contributions fall below `1e-3 · rel_tol` of the
/// running total the remaining (monotonically smaller) blocks are dropped.
pub fn logdet_frequency(
    geom: &Geometry,
    sphere: &MirrorSpec,
    plane: &MirrorSpec,
    xi: f64,
    l_max: usize,
    n_k: usize,
    rel_tol: f64,
) -> Result<FrequencyLogdet> {
    let ctx = FrequencyContext::new(geom, sphere, plane, xi, l_max, n_k)?;
    let mut total = 0.0;
    let mut per_m = Vec::new();
    let mut small = 0;
    for m in 0..=l_max {
        let ld = logdet_block(&ctx.block(m as i64)?)?;
        let w = if m == 0 { 1.0 } else { 2.0 };
        total += w * ld;
        per_m.push(LogdetRecord { xi, m, logdet: ld });
        if (w * ld).abs() <= 1e-3 * rel_tol * total.abs() {
            small += 1;
            if small >= 2 {
                break;
            }
        } else {
            small = 0;
        }
    }
    Ok(FrequencyLogdet { xi, total, per_m })
}

/// Write log-determinants as CSV with header `xi_rad_s,m,logdet`.
pub fn write_logdet_csv<W: Write>(mut out: W, records: &[LogdetRecord]) -> std::io::Result<()> {
    writeln!(out, "xi_rad_s,m,logdet")?;
    for r in records {
        writeln!(out, "{:.10e},{},{:.15e}", r.xi, r.m, r.logdet)?;
    }
    Ok(())
}
