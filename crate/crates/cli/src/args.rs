//! Command-line and configuration-file schema. Both share these types, so a
//! JSON config file uses the flag names as keys plus a `command` tag.

use std::path::PathBuf;

use casimir_core::{ComputeConfig, MirrorSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::units::{parse_quantity, Dimension};

#[derive(Debug, Parser)]
#[command(name = "casimir", version, about = "Sphere-plane Casimir interaction from the scattering formula")]
pub struct Cli {
    /// Worker threads shared by sweeps and per-point work (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write per-(xi, m) log-determinants of each point to this directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub emit_diagnostics: Option<PathBuf>,

    /// Read the whole run from a JSON file instead of a subcommand.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// One quantity at one geometry.
    Compute(PointArgs),
    /// One quantity over a range of gaps or aspect ratios.
    Sweep(SweepArgs),
    /// Correction factor rho over an aspect sweep and its linear coefficient.
    FitBeta(FitArgs),
    /// Plane-plane energy and proximity-force quantities.
    Pfa(PfaArgs),
    /// Small-sphere long-distance limit against the full computation.
    Limits(LimitArgs),
    /// Force ratio between plasma and Drude metals.
    Ratio(RatioArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Energy,
    Force,
    Gradient,
    Entropy,
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PfaQuantity {
    Energy,
    Force,
    Gradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaterialKind {
    Perfect,
    Plasma,
    Drude,
}

fn zero() -> String {
    "0".into()
}

fn energy() -> Quantity {
    Quantity::Energy
}

fn pfa_energy() -> PfaQuantity {
    PfaQuantity::Energy
}

fn perfect() -> MaterialKind {
    MaterialKind::Perfect
}

fn one_micron() -> String {
    "1um".into()
}

fn default_aspect() -> String {
    "0.05:0.4:log20".into()
}

fn default_cap() -> usize {
    80
}

/// Mirror materials. Model parameters apply to both mirrors.
#[derive(Debug, Clone, Args, Deserialize)]
pub struct MaterialArgs {
    /// Sphere material (and plane material unless --plane-material is given).
    #[arg(long, value_enum, default_value_t = MaterialKind::Perfect)]
    #[serde(default = "perfect")]
    pub material: MaterialKind,

    #[arg(long, value_enum)]
    #[serde(default)]
    pub plane_material: Option<MaterialKind>,

    /// Plasma wavelength, e.g. 136nm.
    #[arg(long = "lambdaP")]
    #[serde(rename = "lambdaP", default)]
    pub lambda_p: Option<String>,

    /// Relaxation wavelength 2πc/γ, e.g. 34um.
    #[arg(long = "lambdaGamma")]
    #[serde(rename = "lambdaGamma", default)]
    pub lambda_gamma: Option<String>,

    /// Plasma frequency as an energy ħω_P, e.g. 9eV.
    #[arg(long = "omegaP")]
    #[serde(rename = "omegaP", default)]
    pub omega_p: Option<String>,

    /// Relaxation rate as an energy ħγ, e.g. 0.035eV.
    #[arg(long)]
    #[serde(default)]
    pub gamma: Option<String>,
}

impl MaterialArgs {
    fn omega_p(&self) -> CliResult<Option<f64>> {
        match (&self.lambda_p, &self.omega_p) {
            (Some(_), Some(_)) => Err(CliError::Config("give either lambdaP or omegaP, not both".into())),
            (Some(l), None) => Ok(Some(to_omega(parse_quantity(l, Dimension::Length, "lambdaP")?))),
            (None, Some(w)) => Ok(Some(parse_quantity(w, Dimension::Energy, "omegaP")?)),
            (None, None) => Ok(None),
        }
    }

    fn gamma(&self) -> CliResult<Option<f64>> {
        match (&self.lambda_gamma, &self.gamma) {
            (Some(_), Some(_)) => Err(CliError::Config("give either lambdaGamma or gamma, not both".into())),
            (Some(l), None) => Ok(Some(to_omega(parse_quantity(l, Dimension::Length, "lambdaGamma")?))),
            (None, Some(g)) => Ok(Some(parse_quantity(g, Dimension::Energy, "gamma")?)),
            (None, None) => Ok(None),
        }
    }

    fn spec(&self, kind: MaterialKind) -> CliResult<MirrorSpec> {
        let need = |v: Option<f64>, what: &str| {
            v.ok_or_else(|| CliError::Config(format!("{} mirrors need {what}", format!("{kind:?}").to_lowercase())))
        };
        Ok(match kind {
            MaterialKind::Perfect => MirrorSpec::Perfect,
            MaterialKind::Plasma => MirrorSpec::plasma(need(self.omega_p()?, "lambdaP or omegaP")?)?,
            MaterialKind::Drude => MirrorSpec::drude(
                need(self.omega_p()?, "lambdaP or omegaP")?,
                need(self.gamma()?, "lambdaGamma or gamma")?,
            )?,
        })
    }

    /// `(sphere, plane)`.
    pub fn specs(&self) -> CliResult<(MirrorSpec, MirrorSpec)> {
        let sphere = self.spec(self.material)?;
        let plane = self.spec(self.plane_material.unwrap_or(self.material))?;
        Ok((sphere, plane))
    }
}

fn to_omega(lambda: f64) -> f64 {
    2.0 * std::f64::consts::PI * casimir_core::constants::C / lambda
}

/// Overrides of the automatic truncation.
#[derive(Debug, Clone, Default, Args, Deserialize)]
pub struct NumericArgs {
    /// Multipole cutoff (default 10 + 7R/L).
    #[arg(long)]
    #[serde(default)]
    pub lmax: Option<usize>,

    /// Wavevector quadrature nodes (default max(40, 2 lmax)).
    #[arg(long)]
    #[serde(default)]
    pub nk: Option<usize>,

    /// Frequency nodes at T = 0.
    #[arg(long)]
    #[serde(default)]
    pub nxi: Option<usize>,

    /// Relative tolerance of sums and integrals.
    #[arg(long)]
    #[serde(default)]
    pub rel_tol: Option<f64>,

    /// Check every round-trip block against a doubled wavevector rule.
    #[arg(long)]
    #[serde(default)]
    pub verify_quadrature: bool,
}

impl NumericArgs {
    pub fn config(&self) -> CliResult<ComputeConfig> {
        let defaults = ComputeConfig::default();
        let cfg = ComputeConfig {
            l_max: self.lmax,
            n_k: self.nk,
            n_xi: self.nxi,
            rel_tol: self.rel_tol.unwrap_or(defaults.rel_tol),
            verify_quadrature: self.verify_quadrature,
            ..defaults
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
pub struct OutputArgs {
    /// Output format (default: json for compute and fit-beta, csv otherwise).
    #[arg(long, value_enum)]
    #[serde(default)]
    pub format: Option<Format>,

    /// Output file (default: standard output).
    #[arg(long, short)]
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Deserialize)]
pub struct PointArgs {
    #[arg(long, value_enum, default_value_t = Quantity::Energy)]
    #[serde(default = "energy")]
    pub quantity: Quantity,

    /// Sphere radius, e.g. 0.2um.
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: String,

    /// Surface-to-surface gap, e.g. 1um.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub gap: String,

    /// Temperature, e.g. 300K.
    #[arg(long = "T", default_value = "0")]
    #[serde(rename = "T", default = "zero")]
    pub temperature: String,

    #[command(flatten)]
    #[serde(flatten)]
    pub materials: MaterialArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub numerics: NumericArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Deserialize)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value_t = Quantity::Energy)]
    #[serde(default = "energy")]
    pub quantity: Quantity,

    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: String,

    /// Gap range, e.g. 0.1:30um or 0.1:30um:log40.
    #[arg(long = "L", conflicts_with = "aspect", required_unless_present = "aspect")]
    #[serde(rename = "L", default)]
    pub gap: Option<String>,

    /// Aspect-ratio range L/R, e.g. 0.05:0.4:log20.
    #[arg(long)]
    #[serde(default)]
    pub aspect: Option<String>,

    #[arg(long = "T", default_value = "0")]
    #[serde(rename = "T", default = "zero")]
    pub temperature: String,

    #[command(flatten)]
    #[serde(flatten)]
    pub materials: MaterialArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub numerics: NumericArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Deserialize)]
pub struct FitArgs {
    #[arg(long, value_enum, default_value_t = PfaQuantity::Energy)]
    #[serde(default = "pfa_energy")]
    pub quantity: PfaQuantity,

    #[arg(long = "R", default_value = "1um")]
    #[serde(rename = "R", default = "one_micron")]
    pub radius: String,

    #[arg(long, default_value = "0.05:0.4:log20")]
    #[serde(default = "default_aspect")]
    pub aspect: String,

    #[arg(long = "T", default_value = "0")]
    #[serde(rename = "T", default = "zero")]
    pub temperature: String,

    /// Fit window lo:hi in L/R (default: smallest trusted aspect at the cap, up to 0.33).
    #[arg(long)]
    #[serde(default)]
    pub window: Option<String>,

    /// Upper bound on the automatic multipole cutoff.
    #[arg(long, default_value_t = 80)]
    #[serde(default = "default_cap")]
    pub lmax_cap: usize,

    #[command(flatten)]
    #[serde(flatten)]
    pub materials: MaterialArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub numerics: NumericArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Deserialize)]
pub struct PfaArgs {
    #[arg(long, value_enum, default_value_t = PfaQuantity::Energy)]
    #[serde(default = "pfa_energy")]
    pub quantity: PfaQuantity,

    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: String,

    /// Gap or gap range.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub gap: String,

    #[arg(long = "T", default_value = "0")]
    #[serde(rename = "T", default = "zero")]
    pub temperature: String,

    #[command(flatten)]
    #[serde(flatten)]
    pub materials: MaterialArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Deserialize)]
pub struct LimitArgs {
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: String,

    /// Gap or gap range.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub gap: String,

    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub temperature: String,

    #[command(flatten)]
    #[serde(flatten)]
    pub numerics: NumericArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Deserialize)]
pub struct RatioArgs {
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: String,

    /// Gap or gap range.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub gap: String,

    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub temperature: String,

    #[arg(long = "lambdaP")]
    #[serde(rename = "lambdaP")]
    pub lambda_p: String,

    #[arg(long = "lambdaGamma")]
    #[serde(rename = "lambdaGamma")]
    pub lambda_gamma: String,

    #[command(flatten)]
    #[serde(flatten)]
    pub numerics: NumericArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}
