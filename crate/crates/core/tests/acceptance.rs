//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release -p casimir-core --test acceptance`.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use casimir_core::analysis::{
    dissipation_ratio, fit_beta, pfa_dissipation_ratio, pfa_result, rho, theta_factor, theta_pfa, trusted_aspect,
    RhoKind, RhoSeries,
};
use casimir_core::materials::MirrorSpec;
use casimir_core::pfa::{f_alpha, ld_free_energy_perfect, perfect_pp_energy, phi, pp_energy_per_area};
use casimir_core::roundtrip::{assemble_block, logdet_block, ComputeConfig, Geometry};
use casimir_core::spectrum::{energy_t0, entropy, force, free_energy, free_energy_with, gradient};
use rand::{rngs::StdRng, Rng, SeedableRng};

/// Multipole cap of the aspect-ratio sweeps.
const SWEEP_L_MAX: usize = 80;
const SWEEP_POINTS: usize = 20;
const SWEEP_RANGE: (f64, f64) = (0.05, 0.4);
/// Upper edge of the β fit window; the lower edge is `trusted_aspect(SWEEP_L_MAX)`.
const FIT_UPPER: f64 = 0.33;

const BETA_E: (f64, f64) = (-1.47, 0.15);
const BETA_G_PLASMA: (f64, f64) = (-0.2, 0.05);
const BETA_G_BOUND: f64 = 0.4;
const LMAX_TOL: f64 = 1e-3;
const LMAX_RATIO: (f64, f64) = (1.6, 2.6);
const LD_TOL: f64 = 0.05;
const RATIO_TOL: f64 = 0.03;
const PP_TOL: f64 = 1e-6;
const LIMIT_TOL: f64 = 1e-8;
const ORACLE_TOL: f64 = 1e-8;
const ORACLE_FORCE_TOL: f64 = 1e-5;
const PM_TOL: f64 = 1e-12;
/// `ϑ` must dip below `1 - THETA_MARGIN` to count as a repulsive window.
const THETA_MARGIN: f64 = 1e-5;

/// Criteria whose target is not reached; see the project notes.
const KNOWN_RED: &[u32] = &[1, 3];

const LAMBDA_P: f64 = 136e-9;
const LAMBDA_GAMMA: f64 = 34e-6;
const ROOM: f64 = 300.0;

type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn sweep_cfg(geom: &Geometry) -> ComputeConfig {
    let l_max = ComputeConfig::default().l_max_for(geom).unwrap().min(SWEEP_L_MAX);
    ComputeConfig::default().with_l_max(l_max)
}

fn within(v: f64, (target, tol): (f64, f64)) -> bool {
    (v - target).abs() <= tol
}

/// ρ_E for perfect mirrors at T = 0 over the standard sweep.
fn perfect_energy_sweep() -> RhoSeries {
    let p = MirrorSpec::Perfect;
    let radius = 1e-6;
    let pts = log_grid(SWEEP_RANGE.0, SWEEP_RANGE.1, SWEEP_POINTS)
        .into_iter()
        .map(|x| {
            let g = Geometry::new(radius, x * radius).unwrap();
            let e = energy_t0(&g, &p, &p, &sweep_cfg(&g)).unwrap();
            (x, rho(&e, &pfa_result(RhoKind::E, &g, &p, &p, 0.0).unwrap()).unwrap())
        })
        .collect();
    RhoSeries::new(RhoKind::E, pts).unwrap()
}

fn criterion_1(series: &RhoSeries) -> Outcome {
    let window = (trusted_aspect(SWEEP_L_MAX), FIT_UPPER);
    let fit = fit_beta(series, window).unwrap();
    outcome(
        within(fit.beta, BETA_E),
        format!(
            "beta_E = {:.4} (±{:.3}, {} points on [{:.3}, {:.2}], stable: {}); target {} ± {}",
            fit.beta, fit.sensitivity.uncertainty, fit.n_points, window.0, window.1, fit.sensitivity.stable, BETA_E.0,
            BETA_E.1
        ),
    )
}

fn criterion_2(series: &RhoSeries) -> Outcome {
    let worst = series.points.iter().map(|p| p.1).fold(f64::MIN, f64::max);
    outcome(
        series.points.iter().all(|p| p.1 < 1.0),
        format!("max rho_E = {worst:.6} over {} points", series.points.len()),
    )
}

fn criterion_3() -> Outcome {
    let p = MirrorSpec::Perfect;
    let radius = 1e-6;
    let energy = |x: f64, l_max: usize| {
        let g = Geometry::new(radius, x * radius).unwrap();
        energy_t0(&g, &p, &p, &ComputeConfig::default().with_l_max(l_max)).unwrap().value
    };
    let change = |x: f64, l: usize| (energy(x, l) / energy(x, l + 10) - 1.0).abs();
    let c20 = change(0.2, 20);
    let required = |x: f64| (2..).find(|&l| change(x, l) < LMAX_TOL).unwrap();
    let (r1, r2) = (required(0.1), required(0.2));
    let ratio = r1 as f64 / r2 as f64;
    outcome(
        c20 < LMAX_TOL && ratio >= LMAX_RATIO.0 && ratio <= LMAX_RATIO.1,
        format!("|dE/E| (l_max 20 -> 30, L/R = 0.2) = {c20:.2e}; required l_max {r1} (L/R = 0.1) vs {r2} (L/R = 0.2), ratio {ratio:.2}"),
    )
}

fn criterion_4() -> Outcome {
    let p = MirrorSpec::Perfect;
    let radius = 0.1e-6;
    let errs: Vec<f64> = [10.0, 20.0, 50.0]
        .iter()
        .map(|k| {
            let g = Geometry::new(radius, (k - 1.0) * radius).unwrap();
            let f = free_energy(&g, &p, &p, ROOM, &ComputeConfig::default()).unwrap().value;
            (f / ld_free_energy_perfect(&g, ROOM).unwrap() - 1.0).abs()
        })
        .collect();
    outcome(
        errs.iter().all(|e| *e < LD_TOL) && errs.windows(2).all(|w| w[1] < w[0]),
        format!("|F/F_LD - 1| at centre distance/R = 10, 20, 50: {:.2e}, {:.2e}, {:.2e}", errs[0], errs[1], errs[2]),
    )
}

fn criterion_5() -> Outcome {
    let p = MirrorSpec::plasma_from_wavelength(LAMBDA_P).unwrap();
    let radius = 100e-9;
    let pts = log_grid(SWEEP_RANGE.0, SWEEP_RANGE.1, SWEEP_POINTS)
        .into_iter()
        .map(|x| {
            let g = Geometry::new(radius, x * radius).unwrap();
            let gr = gradient(&g, &p, &p, 0.0, &sweep_cfg(&g)).unwrap();
            (x, rho(&gr, &pfa_result(RhoKind::G, &g, &p, &p, 0.0).unwrap()).unwrap())
        })
        .collect::<Vec<_>>();
    let x_acc = trusted_aspect(SWEEP_L_MAX);
    let series = RhoSeries::new(RhoKind::G, pts.clone()).unwrap();
    let trusted = RhoSeries::new(RhoKind::G, pts.into_iter().filter(|p| p.0 >= x_acc).collect()).unwrap();
    let fit = fit_beta(&series, (x_acc, FIT_UPPER)).unwrap();
    let inflection = trusted.has_inflection();
    outcome(
        within(fit.beta, BETA_G_PLASMA) && fit.beta.abs() <= BETA_G_BOUND && inflection,
        format!(
            "beta_G = {:.4} ({} points on [{:.3}, {:.2}]); target {} ± {}; inflection for L/R >= {:.3}: {inflection}",
            fit.beta, fit.n_points, x_acc, FIT_UPPER, BETA_G_PLASMA.0, BETA_G_PLASMA.1, x_acc
        ),
    )
}

fn criterion_6() -> Outcome {
    let p = MirrorSpec::Perfect;
    let cfg = ComputeConfig::default();
    let gaps = log_grid(0.2e-6, 3.2e-6, 9);
    let mut pass = true;
    let mut parts = Vec::new();
    for radius in [0.1e-6, 0.5e-6, 1e-6] {
        let mut min_theta = f64::INFINITY;
        let mut bound_ok = true;
        let mut negative_entropy = false;
        for &gap in &gaps {
            let g = Geometry::new(radius, gap).unwrap();
            let theta = theta_factor(&g, &p, &p, ROOM, &cfg).unwrap().theta;
            bound_ok &= theta <= theta_pfa(&g, &p, &p, ROOM).unwrap();
            min_theta = min_theta.min(theta);
            if theta < 1.0 - THETA_MARGIN {
                negative_entropy |= entropy(&g, &p, &p, ROOM, &cfg).unwrap().value < 0.0;
            }
        }
        let ok = min_theta < 1.0 - THETA_MARGIN && bound_ok && negative_entropy;
        pass &= ok;
        parts.push(format!(
            "R = {:.1} um: min theta {min_theta:.5}, theta <= theta_PFA {bound_ok}, S < 0 in window {negative_entropy}",
            radius * 1e6
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_7() -> Outcome {
    let plasma = MirrorSpec::plasma_from_wavelength(LAMBDA_P).unwrap();
    let drude = MirrorSpec::drude_from_wavelengths(LAMBDA_P, LAMBDA_GAMMA).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for gap in [20e-6, 50e-6] {
        let g = Geometry::new(1e-6, gap).unwrap();
        let r = pfa_dissipation_ratio(&g, ROOM, &plasma, &drude).unwrap();
        pass &= (r / 2.0 - 1.0).abs() < RATIO_TOL;
        parts.push(format!("PFA ratio at L = {:.0} um: {r:.4}", gap * 1e6));
    }
    for radius in [0.1e-6, 0.5e-6] {
        let g = Geometry::new(radius, 50e-6).unwrap();
        let r = dissipation_ratio(&g, ROOM, &plasma, &drude, &ComputeConfig::default()).unwrap();
        let f = f_alpha(2.0 * PI * radius / LAMBDA_P).unwrap();
        pass &= (r / f - 1.0).abs() < RATIO_TOL;
        parts.push(format!("R = {:.1} um, L = 50 um: {r:.4} vs f(alpha) = {f:.4}", radius * 1e6));
    }
    let fs: Vec<f64> = log_grid(1e-3, 1e4, 50).into_iter().map(|a| f_alpha(a).unwrap()).collect();
    let shape = fs.iter().all(|f| *f > 1.0 && *f < 1.5) && fs.windows(2).all(|w| w[1] > w[0]);
    pass &= shape;
    parts.push(format!("f in (1, 3/2) and increasing: {shape}"));
    outcome(pass, parts.join("; "))
}

fn criterion_8() -> Outcome {
    // λ_P = 1 pm: the plasma correction at 10 µm is below 1e-7
    let gap = 10e-6;
    let near_perfect = MirrorSpec::plasma_from_wavelength(1e-12).unwrap();
    let pp = pp_energy_per_area(&near_perfect, &near_perfect, gap, 0.0).unwrap().energy_per_area;
    let closed = -PI * PI * common::HBAR * common::C / (720.0 * gap.powi(3));
    let pp_err = (pp / closed - 1.0).abs().max((perfect_pp_energy(gap) / closed - 1.0).abs());
    let limits = [
        (1e-5 * phi(1e-5).unwrap(), 1.5),
        (phi(200.0).unwrap(), 0.5),
        (f_alpha(1e-6).unwrap(), 1.0),
        (f_alpha(1e10).unwrap(), 1.5),
    ];
    let lim_err = limits.iter().map(|(v, t)| (v - t).abs()).fold(0.0, f64::max);
    outcome(
        pp_err < PP_TOL && lim_err < LIMIT_TOL,
        format!("plane-plane energy rel. error {pp_err:.2e}; largest limit deviation {lim_err:.2e}"),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let cfg = ComputeConfig::default().with_l_max(1);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let radius = 10f64.powf(rng.gen_range(-7.0..-5.7));
        let gap = radius * 10f64.powf(rng.gen_range(-0.7..0.7));
        let g = Geometry::new(radius, gap).unwrap();
        let xi = 10f64.powf(rng.gen_range(-2.0..0.5)) * common::C / radius;
        let lib = assemble_block(&g, &MirrorSpec::Perfect, &MirrorSpec::Perfect, xi, 0, &cfg).unwrap();
        let oracle = common::dipole_block(radius, g.center_distance, &MirrorSpec::Perfect, xi, 0, false);
        let scale = oracle.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        for (i, row) in oracle.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                worst = worst.max((lib.matrix[(i, j)] - v).abs() / scale);
            }
        }
    }
    let g = Geometry::new(1e-6, 2e-6).unwrap();
    let (_, analytic) = common::dipole_free_energy_and_force(g.radius, g.gap, ROOM);
    let fd = force(&g, &MirrorSpec::Perfect, &MirrorSpec::Perfect, ROOM, &cfg).unwrap().value;
    let ferr = (fd / analytic - 1.0).abs();
    outcome(
        worst < ORACLE_TOL && ferr < ORACLE_FORCE_TOL,
        format!("dipole block max rel. deviation {worst:.2e} over 10 points; force FD vs analytic {ferr:.2e}"),
    )
}

fn criterion_10() -> Outcome {
    let p = MirrorSpec::Perfect;
    let cfg = ComputeConfig::default();
    let radius = 1e-6;
    let mut values = Vec::new();
    let mut non_positive = true;
    for gap in log_grid(0.3e-6, 5e-6, 8) {
        let g = Geometry::new(radius, gap).unwrap();
        let r = free_energy_with(&g, &p, &p, ROOM, &cfg, true).unwrap();
        non_positive &= r.logdets.iter().all(|rec| rec.logdet <= 0.0);
        values.push(r.value.abs());
    }
    let monotone = values.windows(2).all(|w| w[1] < w[0]);

    let plasma = MirrorSpec::plasma_from_wavelength(LAMBDA_P).unwrap();
    let g = Geometry::new(radius, 0.5e-6).unwrap();
    let small = ComputeConfig::default().with_l_max(20);
    let mut pm = 0.0f64;
    for xi in [0.0, 1e14, 1e15] {
        for m in 1..5 {
            let a = logdet_block(&assemble_block(&g, &plasma, &plasma, xi, m, &small).unwrap()).unwrap();
            let b = logdet_block(&assemble_block(&g, &plasma, &plasma, xi, -m, &small).unwrap()).unwrap();
            pm = pm.max((a - b).abs() / a.abs());
        }
    }

    let run = || serde_json::to_string(&free_energy(&g, &plasma, &plasma, ROOM, &cfg).unwrap()).unwrap();
    let identical = run() == run();
    outcome(
        monotone && non_positive && pm < PM_TOL && identical,
        format!("|F| monotone {monotone}; ln det <= 0 {non_positive}; max ±m deviation {pm:.1e}; byte-identical rerun {identical}"),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    println!("acceptance suite");
    let t = Instant::now();
    let energy_sweep = perfect_energy_sweep();
    println!("perfect-mirror energy sweep: {} points in {:.1} s", energy_sweep.points.len(), t.elapsed().as_secs_f64());
    let criteria: Vec<Criterion> = vec![
        (1, "beta_E reproduction", Box::new(|| criterion_1(&energy_sweep))),
        (2, "PFA overestimates |E|", Box::new(|| criterion_2(&energy_sweep))),
        (3, "l_max convergence law", Box::new(criterion_3)),
        (4, "long-distance oracle", Box::new(criterion_4)),
        (5, "plasma beta_G", Box::new(criterion_5)),
        (6, "thermal window", Box::new(criterion_6)),
        (7, "dissipation ratio", Box::new(criterion_7)),
        (8, "closed-form anchors", Box::new(criterion_8)),
        (9, "dipole oracle equivalence", Box::new(criterion_9)),
        (10, "property suite", Box::new(criterion_10)),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let t = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{id:>2}] {name}: {} ({:.1} s)", o.detail, t.elapsed().as_secs_f64());
        if o.pass == KNOWN_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    println!("rho_E sweep (L/R, rho_E):");
    for (x, r) in &energy_sweep.points {
        println!("  {x:.4} {r:.6}");
    }
    println!("total {:.1} s", start.elapsed().as_secs_f64());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("criteria deviating from the recorded status: {unexpected:?}");
        ExitCode::FAILURE
    }
}
