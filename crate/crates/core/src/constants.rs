//! Physical constants (CODATA 2018, exact where the SI fixes them).

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// First Matsubara frequency 2π k_B T / ħ in rad/s.
pub fn matsubara_step(temperature: f64) -> f64 {
    2.0 * std::f64::consts::PI * K_B * temperature / HBAR
}

/// Thermal wavelength ħc/(k_B T) in metres.
pub fn thermal_wavelength(temperature: f64) -> f64 {
    HBAR * C / (K_B * temperature)
}
