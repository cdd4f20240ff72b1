//! Dipole-order round trip written out by hand: explicit ℓ = 1 angular
//! functions, closed-form Mie amplitudes of a perfect sphere and plain
//! adaptive Simpson integration over the plane-wave decay constant.

#![allow(dead_code)]

use casimir_core::materials::MirrorSpec;

pub const C: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;

/// `(a₁, b₁)` of a perfectly conducting sphere at size parameter `y`.
pub fn perfect_dipole_mie(y: f64) -> (f64, f64) {
    let (sh, ch) = (y.sinh(), y.cosh());
    let b1 = y.exp() * (y * ch - sh) / (1.0 + y);
    let a1 = -y.exp() * (sh - ch / y + sh / (y * y)) / (1.0 + 1.0 / y + 1.0 / (y * y));
    (a1, b1)
}

/// `(ρ_TE, ρ_TM) = (-r_TE, r_TM)` of the plane at decay constant `κ`.
pub fn plane_rho(plane: &MirrorSpec, xi: f64, kappa: f64) -> (f64, f64) {
    match *plane {
        MirrorSpec::Perfect => (1.0, 1.0),
        MirrorSpec::Plasma { omega_p } => {
            let q = xi / C;
            let eps = 1.0 + (omega_p / xi).powi(2);
            let kt = (kappa * kappa + (eps - 1.0) * q * q).sqrt();
            ((kt - kappa) / (kt + kappa), (eps * kappa - kt) / (eps * kappa + kt))
        }
        MirrorSpec::Drude { .. } => unimplemented!("oracle covers perfect and plasma planes"),
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson on `[a, b]`, tolerance relative to a 64-panel
/// trapezoid estimate of `∫ |f|`.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let h = (b - a) / 64.0;
    let scale: f64 = (0..=64).map(|i| f(a + i as f64 * h).abs()).sum::<f64>() * h;
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(&f, a, b, fa, fm, fb, whole, rel_tol * scale.max(f64::MIN_POSITIVE), 24)
}

/// Dipole block for `m ∈ {0, 1}` in the basis `(M, E)`, together with its
/// derivative in the centre distance when `derivative` is set.
///
/// Entry `(P, P')`: `∫₁^∞ du e^{-2ξ𝓛u/c} √|c_P c_P'| Σ_pol ρ_pol v_P v_P' / 2`
/// with `v^TE = (τ, -π)`, `v^TM = (π, -τ)`; at ℓ = 1, `m = 0` has `π = 0`,
/// `τ = √3 s`, and `m = 1` has `π = √(3/2)`, `τ = √(3/2) u`.
pub fn dipole_block(radius: f64, center: f64, plane: &MirrorSpec, xi: f64, m: u32, derivative: bool) -> [[f64; 2]; 2] {
    let (a1, b1) = perfect_dipole_mie(xi * radius / C);
    let amp = [b1.abs(), a1.abs()];
    let a = 2.0 * xi * center / C;
    let mut out = [[0.0; 2]; 2];
    for p in 0..2 {
        for q in 0..2 {
            let integrand = |t: f64| {
                let u = 1.0 + t / a;
                let kappa = xi * u / C;
                let (rte, rtm) = plane_rho(plane, xi, kappa);
                let (pi, tau) = match m {
                    0 => (0.0, 3f64.sqrt() * (u * u - 1.0).sqrt()),
                    _ => (1.5f64.sqrt(), 1.5f64.sqrt() * u),
                };
                let te = [tau, -pi];
                let tm = [pi, -tau];
                let ang = rte * te[p] * te[q] + rtm * tm[p] * tm[q];
                let d = if derivative { -2.0 * kappa } else { 1.0 };
                // du = dt / a, e^{-a u} = e^{-a} e^{-t}
                d * (-t).exp() * ang / 2.0
            };
            let scale = (amp[p] * amp[q]).sqrt() * (-a).exp() / a;
            let v = simpson(integrand, 0.0, 60.0, 1e-12);
            out[p][q] = scale * v;
        }
    }
    out
}

pub fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// `ln det(I - M)` and `-tr((I - M)⁻¹ ∂M)` for a 2×2 block.
pub fn logdet_and_derivative(m: &[[f64; 2]; 2], dm: &[[f64; 2]; 2]) -> (f64, f64) {
    let a = [[1.0 - m[0][0], -m[0][1]], [-m[1][0], 1.0 - m[1][1]]];
    let det = det2(&a);
    let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
    let mut tr = 0.0;
    for i in 0..2 {
        for k in 0..2 {
            tr += inv[i][k] * dm[k][i];
        }
    }
    (det.ln(), -tr)
}

/// `ξ → 0` limit of [`dipole_block`] for a perfect plane: with
/// `b₁ ≈ y³/3`, `a₁ ≈ -2y³/3` the block is `diag(1/3, 2/3) · c_m (R/2𝓛)³`,
/// `c_0 = 3`, `c_1 = 3/2`.
pub fn static_dipole_block(radius: f64, center: f64, m: u32) -> [[f64; 2]; 2] {
    let x3 = (radius / (2.0 * center)).powi(3);
    let c = if m == 0 { 3.0 } else { 1.5 };
    [[c * x3 / 3.0, 0.0], [0.0, c * x3 * 2.0 / 3.0]]
}

/// Dipole free energy and its derivative in `L` for perfect mirrors,
/// summed over `m ∈ {-1, 0, 1}` and Matsubara frequencies.
pub fn dipole_free_energy_and_force(radius: f64, gap: f64, temperature: f64) -> (f64, f64) {
    let center = radius + gap;
    let kt = K_B * temperature;
    let xi1 = 2.0 * std::f64::consts::PI * kt / HBAR;
    let mut energy = 0.0;
    let mut force = 0.0;
    for m in 0..2u32 {
        let w = if m == 0 { 1.0 } else { 2.0 };
        let s = static_dipole_block(radius, center, m);
        let ds = s.map(|row| row.map(|v| -3.0 * v / center));
        let (ld, d) = logdet_and_derivative(&s, &ds);
        energy += 0.5 * w * ld;
        force += 0.5 * w * d;
    }
    for n in 1.. {
        let xi = n as f64 * xi1;
        let mut term = (0.0, 0.0);
        for m in 0..2u32 {
            let w = if m == 0 { 1.0 } else { 2.0 };
            let b = dipole_block(radius, center, &MirrorSpec::Perfect, xi, m, false);
            let db = dipole_block(radius, center, &MirrorSpec::Perfect, xi, m, true);
            let (ld, d) = logdet_and_derivative(&b, &db);
            term.0 += w * ld;
            term.1 += w * d;
        }
        energy += term.0;
        force += term.1;
        if term.0.abs() < 1e-16 * energy.abs() && n > 3 {
            break;
        }
    }
    (kt * energy, kt * force)
}
