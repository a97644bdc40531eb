use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use lenscoupled::coupling::{Axis, Plane};

use crate::config::{EstimatorArg, ModeArg};

#[derive(Debug, Parser)]
#[command(
    name = "lenscoupled",
    version,
    about = "Lens-mediated dipole-dipole coupling between two atoms at the foci of an aplanatic lens"
)]
pub struct Cli {
    /// JSON run configuration (`"schema": 1`); flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Point-spread tensor and its polar integrals between two focal-zone points (JSON).
    Psf(PsfArgs),
    /// Maximum dissipative coupling against the aperture half-angle (CSV).
    GammaSweep(GammaSweepArgs),
    /// Dispersive and dissipative coupling over a focal plane (CSV).
    CouplingMap(CouplingMapArgs),
    /// Normalized excitation spectrum of the undriven atom (CSV).
    Spectrum(SpectrumArgs),
    /// Mutual trap potential and heating along the optical axis (CSV and JSON summary).
    Trap(TrapArgs),
}

fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got {s:?}"));
    }
    let mut p = [0.0; 3];
    for (dst, raw) in p.iter_mut().zip(parts) {
        *dst = raw
            .trim()
            .parse()
            .map_err(|_| format!("{raw:?} is not a number"))?;
    }
    Ok(p)
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct PsfArgs {
    /// Position of atom i relative to its focus, in drive wavelengths.
    #[arg(long = "ri", value_name = "X,Y,Z", value_parser = parse_point, allow_hyphen_values = true)]
    pub r_i: Option<[f64; 3]>,
    /// Position of atom j relative to its focus, in drive wavelengths.
    #[arg(long = "rj", value_name = "X,Y,Z", value_parser = parse_point, allow_hyphen_values = true)]
    pub r_j: Option<[f64; 3]>,
    #[arg(long, value_name = "RAD")]
    pub theta_max: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct GammaSweepArgs {
    #[arg(long)]
    pub orientation: Option<Axis>,
    #[arg(long, value_name = "RAD")]
    pub theta_min: Option<f64>,
    #[arg(long, value_name = "RAD")]
    pub theta_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CouplingMapArgs {
    /// Dipole axis for both atoms, or `a1,a2`.
    #[arg(long, value_delimiter = ',')]
    pub orientation: Option<Vec<Axis>>,
    #[arg(long)]
    pub plane: Option<Plane>,
    /// Half-width of the square grid, in drive wavelengths.
    #[arg(long)]
    pub extent: Option<f64>,
    /// Samples per side.
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long, value_name = "RAD")]
    pub theta_max: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SpectrumArgs {
    /// Dispersive coupling `J₁₂/ħΓ`.
    #[arg(long, conflicts_with = "z")]
    pub j12: Option<f64>,
    /// Dissipative coupling `Γ₁₂/Γ`.
    #[arg(long, conflicts_with = "z")]
    pub gamma12: Option<f64>,
    /// On-axis position of atom 2, in drive wavelengths; couplings come from the lens.
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long)]
    pub orientation: Option<Axis>,
    #[arg(long, value_name = "RAD")]
    pub theta_max: Option<f64>,
    #[arg(long)]
    pub saturation: Option<f64>,
    /// Detuning range in units of Γ.
    #[arg(long)]
    pub delta_min: Option<f64>,
    #[arg(long)]
    pub delta_max: Option<f64>,
    #[arg(long)]
    pub delta_steps: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorArg>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct TrapArgs {
    #[arg(long, value_name = "LABEL")]
    pub species: Option<String>,
    #[arg(long, value_name = "RAD")]
    pub theta_max: Option<f64>,
    /// Focal length in m.
    #[arg(long)]
    pub focal_length: Option<f64>,
    /// Drive wavelength in m; the species line when omitted.
    #[arg(long)]
    pub wavelength: Option<f64>,
    #[arg(long)]
    pub orientation: Option<Axis>,
    #[arg(long)]
    pub saturation: Option<f64>,
    /// Drive detuning in units of Γ.
    #[arg(long)]
    pub detuning: Option<f64>,
    /// Scan range of atom 2 on the optical axis, in m (or wavelengths with `--lambda-units`).
    #[arg(long)]
    pub z_min: Option<f64>,
    #[arg(long)]
    pub z_max: Option<f64>,
    #[arg(long)]
    pub z_steps: Option<usize>,
    /// Read `--z-min`/`--z-max` in drive wavelengths instead of metres.
    #[arg(long)]
    pub lambda_units: bool,
    /// Number of driven atoms at the top focus.
    #[arg(long)]
    pub n_driven: Option<u32>,
    /// Gravitational acceleration in m/s², acting along −z.
    #[arg(long)]
    pub gravity: Option<f64>,
    /// Working-point landmarks for the lifetime estimate, in ħΓ and Γ.
    #[arg(long)]
    pub j_top: Option<f64>,
    #[arg(long)]
    pub j_min: Option<f64>,
    #[arg(long)]
    pub gamma12_min: Option<f64>,
    /// Initial energy above the well bottom, in recoil energies.
    #[arg(long)]
    pub e0_over_er: Option<f64>,
    /// JSON summary path; `<out>.summary.json` or standard error when omitted.
    #[arg(long, value_name = "PATH")]
    pub summary: Option<PathBuf>,
}
