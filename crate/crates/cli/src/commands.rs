use std::fs;
use std::path::{Path, PathBuf};

use casimir_core::analysis::{fit_beta, pfa_result, rho, theta_factor, trusted_aspect, RhoKind, RhoSeries};
use casimir_core::pfa::{
    f_alpha, ld_free_energy_perfect, pfa_energy, pfa_force, pfa_gradient, phi, pp_energy_per_area, LimitParams,
    PP_TOL,
};
use casimir_core::roundtrip::{write_logdet_csv, LogdetRecord};
use casimir_core::spectrum::{energy_t0_with, entropy, force, free_energy_with, gradient};
use casimir_core::{CasimirResult, ComputeConfig, Diagnostics, Geometry, MirrorSpec};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{
    FitArgs, Format, LimitArgs, NumericArgs, PfaArgs, PfaQuantity, PointArgs, Quantity, RatioArgs, SweepArgs,
};
use crate::error::{CliError, CliResult};
use crate::output::{emit, material_label, open, write_csv, write_json, Row};
use crate::units::{parse_quantity, parse_range, parse_window, Dimension};

/// Settings that apply to every command.
pub struct Context {
    pub diagnostics_dir: Option<PathBuf>,
}

fn length(s: &str, what: &str) -> CliResult<f64> {
    parse_quantity(s, Dimension::Length, what)
}

fn temperature(s: &str) -> CliResult<f64> {
    parse_quantity(s, Dimension::Temperature, "T")
}

fn gaps(s: &str) -> CliResult<Vec<f64>> {
    parse_range(s, Dimension::Length, "L")
}

struct Evaluated {
    value: f64,
    unit: &'static str,
    diagnostics: Diagnostics,
    logdets: Vec<LogdetRecord>,
}

fn energy_with(
    geom: &Geometry,
    sphere: &MirrorSpec,
    plane: &MirrorSpec,
    t: f64,
    cfg: &ComputeConfig,
    keep: bool,
) -> CliResult<CasimirResult> {
    Ok(if t == 0.0 {
        energy_t0_with(geom, sphere, plane, cfg, keep)?
    } else {
        free_energy_with(geom, sphere, plane, t, cfg, keep)?
    })
}

fn evaluate(
    q: Quantity,
    geom: &Geometry,
    (sphere, plane): (&MirrorSpec, &MirrorSpec),
    t: f64,
    cfg: &ComputeConfig,
    keep: bool,
) -> CliResult<Evaluated> {
    let from = |r: CasimirResult| Evaluated { value: r.value, unit: r.unit, diagnostics: r.diagnostics, logdets: r.logdets };
    let mut out = match q {
        Quantity::Energy => from(energy_with(geom, sphere, plane, t, cfg, keep)?),
        Quantity::Force => from(force(geom, sphere, plane, t, cfg)?),
        Quantity::Gradient => from(gradient(geom, sphere, plane, t, cfg)?),
        Quantity::Entropy => from(entropy(geom, sphere, plane, t, cfg)?),
        Quantity::Theta => {
            let th = theta_factor(geom, sphere, plane, t, cfg)?;
            Evaluated { value: th.theta, unit: "1", diagnostics: th.force_t.diagnostics, logdets: Vec::new() }
        }
    };
    if keep && out.logdets.is_empty() {
        out.logdets = energy_with(geom, sphere, plane, t, cfg, true)?.logdets;
    }
    Ok(out)
}

fn dump_logdets(dir: &Path, index: usize, records: &[LogdetRecord]) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    let file = fs::File::create(dir.join(format!("point_{index:04}.csv")))?;
    write_logdet_csv(std::io::BufWriter::new(file), records)?;
    Ok(())
}

fn quantity_name(q: Quantity) -> &'static str {
    match q {
        Quantity::Energy => "energy",
        Quantity::Force => "force",
        Quantity::Gradient => "gradient",
        Quantity::Entropy => "entropy",
        Quantity::Theta => "theta",
    }
}

fn point_row(q: Quantity, geom: &Geometry, mirrors: (&MirrorSpec, &MirrorSpec), t: f64, e: &Evaluated) -> Row {
    Row::default()
        .text("quantity", quantity_name(q))
        .num("R_m", geom.radius)
        .num("L_m", geom.gap)
        .num("aspect", geom.aspect())
        .num("T_K", t)
        .text("sphere", material_label(mirrors.0))
        .text("plane", material_label(mirrors.1))
        .result(e.value, e.unit, &e.diagnostics)
}

/// Evaluate all geometries in parallel, keeping input order.
fn run_points(
    q: Quantity,
    geoms: &[Geometry],
    mirrors: (&MirrorSpec, &MirrorSpec),
    t: f64,
    cfg: &ComputeConfig,
    ctx: &Context,
) -> CliResult<Vec<Row>> {
    let keep = ctx.diagnostics_dir.is_some();
    let results: Vec<Evaluated> = geoms
        .par_iter()
        .map(|g| evaluate(q, g, mirrors, t, cfg, keep))
        .collect::<CliResult<_>>()?;
    if let Some(dir) = &ctx.diagnostics_dir {
        for (i, r) in results.iter().enumerate() {
            dump_logdets(dir, i, &r.logdets)?;
        }
    }
    Ok(geoms.iter().zip(&results).map(|(g, e)| point_row(q, g, mirrors, t, e)).collect())
}

pub fn compute(a: &PointArgs, ctx: &Context) -> CliResult<()> {
    let geom = Geometry::new(length(&a.radius, "R")?, length(&a.gap, "L")?)?;
    let (sphere, plane) = a.materials.specs()?;
    let cfg = a.numerics.config()?;
    let rows = run_points(a.quantity, &[geom], (&sphere, &plane), temperature(&a.temperature)?, &cfg, ctx)?;
    emit(&rows, a.output.format.unwrap_or(Format::Json), a.output.output.as_deref(), true)
}

pub fn sweep(a: &SweepArgs, ctx: &Context) -> CliResult<()> {
    let radius = length(&a.radius, "R")?;
    let gap_list = match (&a.gap, &a.aspect) {
        (Some(l), None) => gaps(l)?,
        (None, Some(x)) => parse_range(x, Dimension::Number, "aspect")?.into_iter().map(|x| x * radius).collect(),
        _ => return Err(CliError::Config("sweep needs exactly one of L or aspect".into())),
    };
    let geoms = gap_list.iter().map(|&l| Geometry::new(radius, l)).collect::<Result<Vec<_>, _>>()?;
    let (sphere, plane) = a.materials.specs()?;
    let cfg = a.numerics.config()?;
    let rows = run_points(a.quantity, &geoms, (&sphere, &plane), temperature(&a.temperature)?, &cfg, ctx)?;
    emit(&rows, a.output.format.unwrap_or(Format::Csv), a.output.output.as_deref(), false)
}

fn rho_kind(q: PfaQuantity) -> (RhoKind, Quantity) {
    match q {
        PfaQuantity::Energy => (RhoKind::E, Quantity::Energy),
        PfaQuantity::Force => (RhoKind::F, Quantity::Force),
        PfaQuantity::Gradient => (RhoKind::G, Quantity::Gradient),
    }
}

/// Truncation for one sweep point: explicit `--lmax` wins, otherwise the
/// automatic cutoff limited to `cap`.
fn capped_config(numerics: &NumericArgs, geom: &Geometry, cap: usize) -> CliResult<ComputeConfig> {
    let cfg = numerics.config()?;
    if cfg.l_max.is_some() {
        return Ok(cfg);
    }
    let auto = ComputeConfig { l_max: None, ..cfg.clone() }.l_max_for(geom).unwrap_or(cap);
    Ok(cfg.with_l_max(auto.min(cap)))
}

pub fn fit(a: &FitArgs, ctx: &Context) -> CliResult<()> {
    let radius = length(&a.radius, "R")?;
    let t = temperature(&a.temperature)?;
    let (sphere, plane) = a.materials.specs()?;
    let (kind, q) = rho_kind(a.quantity);
    let aspects = parse_range(&a.aspect, Dimension::Number, "aspect")?;
    let keep = ctx.diagnostics_dir.is_some();
    let points: Vec<(CasimirResult, f64, f64)> = aspects
        .par_iter()
        .map(|&x| {
            let geom = Geometry::new(radius, x * radius)?;
            let cfg = capped_config(&a.numerics, &geom, a.lmax_cap)?;
            let exact = match q {
                Quantity::Force => force(&geom, &sphere, &plane, t, &cfg)?,
                Quantity::Gradient => gradient(&geom, &sphere, &plane, t, &cfg)?,
                _ => energy_with(&geom, &sphere, &plane, t, &cfg, keep)?,
            };
            let pfa = pfa_result(kind, &geom, &sphere, &plane, t)?;
            let r = rho(&exact, &pfa)?;
            Ok((exact, pfa.value, r))
        })
        .collect::<CliResult<_>>()?;
    if let Some(dir) = &ctx.diagnostics_dir {
        for (i, (e, _, _)) in points.iter().enumerate() {
            let records = if e.logdets.is_empty() {
                energy_with(&e.geometry, &sphere, &plane, t, &capped_config(&a.numerics, &e.geometry, a.lmax_cap)?, true)?
                    .logdets
            } else {
                e.logdets.clone()
            };
            dump_logdets(dir, i, &records)?;
        }
    }
    let rows: Vec<Row> = points
        .iter()
        .map(|(e, pfa, r)| {
            let g = &e.geometry;
            Row::default()
                .text("quantity", quantity_name(q))
                .num("R_m", g.radius)
                .num("L_m", g.gap)
                .num("aspect", g.aspect())
                .num("T_K", t)
                .text("sphere", material_label(&sphere))
                .text("plane", material_label(&plane))
                .num("exact", e.value)
                .num("pfa", *pfa)
                .result(*r, "1", &e.diagnostics)
        })
        .collect();
    let series = RhoSeries::new(kind, points.iter().map(|(e, _, r)| (e.geometry.aspect(), *r)).collect())?;
    let window = match &a.window {
        Some(w) => parse_window(w)?,
        None => (trusted_aspect(a.lmax_cap), 0.33),
    };
    let fitted = fit_beta(&series, window)?;
    let mut out = open(a.output.output.as_deref())?;
    match a.output.format.unwrap_or(Format::Json) {
        Format::Json => {
            let report = json!({
                "quantity": quantity_name(q),
                "R_m": radius,
                "T_K": t,
                "sphere": material_label(&sphere),
                "plane": material_label(&plane),
                "lmax_cap": a.lmax_cap,
                "fit": fitted,
                "points": Value::Array(rows.iter().map(Row::to_json).collect()),
            });
            write_json(&mut out, &report)?;
        }
        Format::Csv => {
            write_csv(&mut out, &rows)?;
            eprintln!("{}", serde_json::to_string(&fitted)?);
        }
    }
    Ok(())
}

pub fn pfa(a: &PfaArgs) -> CliResult<()> {
    let radius = length(&a.radius, "R")?;
    let t = temperature(&a.temperature)?;
    let (sphere, plane) = a.materials.specs()?;
    let rows = gaps(&a.gap)?
        .par_iter()
        .map(|&l| {
            let geom = Geometry::new(radius, l)?;
            let pp = pp_energy_per_area(&sphere, &plane, l, t)?;
            let (value, unit) = match a.quantity {
                PfaQuantity::Energy => (pfa_energy(&geom, &sphere, &plane, t)?, "J"),
                PfaQuantity::Force => (pfa_force(&geom, &sphere, &plane, t)?, "N"),
                PfaQuantity::Gradient => (pfa_gradient(&geom, &sphere, &plane, t)?, "N/m"),
            };
            let d = Diagnostics { lmax: 0, nmax: pp.per_matsubara.len().saturating_sub(1), nk: 0, est_rel_err: PP_TOL };
            Ok(Row::default()
                .text("quantity", quantity_name(rho_kind(a.quantity).1))
                .num("R_m", radius)
                .num("L_m", l)
                .num("T_K", t)
                .text("sphere", material_label(&sphere))
                .text("plane", material_label(&plane))
                .num("pp_energy_J_m2", pp.energy_per_area)
                .result(value, unit, &d))
        })
        .collect::<CliResult<Vec<Row>>>()?;
    emit(&rows, a.output.format.unwrap_or(Format::Csv), a.output.output.as_deref(), false)
}

pub fn limits(a: &LimitArgs, ctx: &Context) -> CliResult<()> {
    let radius = length(&a.radius, "R")?;
    let t = temperature(&a.temperature)?;
    if t <= 0.0 {
        return Err(CliError::Config("the long-distance limit needs T > 0".into()));
    }
    let cfg = a.numerics.config()?;
    let p = MirrorSpec::Perfect;
    let geoms = gaps(&a.gap)?.into_iter().map(|l| Geometry::new(radius, l)).collect::<Result<Vec<_>, _>>()?;
    let keep = ctx.diagnostics_dir.is_some();
    let results: Vec<(CasimirResult, f64, f64)> = geoms
        .par_iter()
        .map(|g| {
            let exact = free_energy_with(g, &p, &p, t, &cfg, keep)?;
            let params = LimitParams::new(g, t, None)?;
            Ok((exact, params.nu, ld_free_energy_perfect(g, t)?))
        })
        .collect::<CliResult<_>>()?;
    if let Some(dir) = &ctx.diagnostics_dir {
        for (i, (r, _, _)) in results.iter().enumerate() {
            dump_logdets(dir, i, &r.logdets)?;
        }
    }
    let rows: Vec<Row> = results
        .iter()
        .map(|(r, nu, ld)| {
            Ok(Row::default()
                .text("quantity", "free_energy")
                .num("R_m", r.geometry.radius)
                .num("L_m", r.geometry.gap)
                .num("center_m", r.geometry.center_distance)
                .num("T_K", t)
                .num("nu", *nu)
                .num("phi", phi(*nu)?)
                .num("ld_value", *ld)
                .num("ratio_to_ld", r.value / ld)
                .result(r.value, r.unit, &r.diagnostics))
        })
        .collect::<CliResult<_>>()?;
    emit(&rows, a.output.format.unwrap_or(Format::Csv), a.output.output.as_deref(), false)
}

pub fn ratio(a: &RatioArgs) -> CliResult<()> {
    let radius = length(&a.radius, "R")?;
    let t = temperature(&a.temperature)?;
    let lp = length(&a.lambda_p, "lambdaP")?;
    let lg = length(&a.lambda_gamma, "lambdaGamma")?;
    let plasma = MirrorSpec::plasma_from_wavelength(lp)?;
    let drude = MirrorSpec::drude_from_wavelengths(lp, lg)?;
    let cfg = a.numerics.config()?;
    let alpha = 2.0 * std::f64::consts::PI * radius / lp;
    let f = f_alpha(alpha)?;
    let rows = gaps(&a.gap)?
        .par_iter()
        .map(|&l| {
            let geom = Geometry::new(radius, l)?;
            let fp = force(&geom, &plasma, &plasma, t, &cfg)?;
            let fd = force(&geom, &drude, &drude, t, &cfg)?;
            let pfa_ratio = pfa_force(&geom, &plasma, &plasma, t)? / pfa_force(&geom, &drude, &drude, t)?;
            let d = Diagnostics {
                lmax: fp.diagnostics.lmax,
                nmax: fp.diagnostics.nmax.max(fd.diagnostics.nmax),
                nk: fp.diagnostics.nk,
                est_rel_err: fp.diagnostics.est_rel_err + fd.diagnostics.est_rel_err,
            };
            Ok(Row::default()
                .text("quantity", "force_ratio")
                .num("R_m", radius)
                .num("L_m", l)
                .num("T_K", t)
                .num("lambdaP_m", lp)
                .num("lambdaGamma_m", lg)
                .num("alpha", alpha)
                .num("f_alpha", f)
                .num("pfa_ratio", pfa_ratio)
                .result(fp.value / fd.value, "1", &d))
        })
        .collect::<CliResult<Vec<Row>>>()?;
    emit(&rows, a.output.format.unwrap_or(Format::Csv), a.output.output.as_deref(), false)
}
