//! Versioned JSON run configuration. Every field is optional; command-line
//! flags take precedence over values found here.

use std::path::Path;

use clap::ValueEnum;
use lenscoupled::coupling::{Axis, Plane};
use lenscoupled::dynamics::{AnalyticMode, CorrelationEstimator};
use lenscoupled::numerics::QuadratureSpec;
use lenscoupled::trap::AtomSpecies;
use serde::Deserialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema: u32,
    #[serde(default)]
    pub quadrature: Option<QuadratureSection>,
    /// Extra species presets, addressable by label.
    #[serde(default)]
    pub species: Vec<AtomSpecies>,
    #[serde(default)]
    pub psf: PsfSection,
    #[serde(default)]
    pub gamma_sweep: GammaSweepSection,
    #[serde(default)]
    pub coupling_map: CouplingMapSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub trap: TrapSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_refinements: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsfSection {
    pub r_i: Option<[f64; 3]>,
    pub r_j: Option<[f64; 3]>,
    pub theta_max: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaSweepSection {
    pub orientation: Option<Axis>,
    pub theta_min: Option<f64>,
    pub theta_max: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingMapSection {
    /// One axis for both atoms, or one per atom.
    pub orientation: Option<Vec<Axis>>,
    pub plane: Option<Plane>,
    pub extent: Option<f64>,
    pub resolution: Option<usize>,
    pub theta_max: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub j12: Option<f64>,
    pub gamma12: Option<f64>,
    pub z: Option<f64>,
    pub orientation: Option<Axis>,
    pub theta_max: Option<f64>,
    pub saturation: Option<f64>,
    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
    pub delta_steps: Option<usize>,
    pub mode: Option<ModeArg>,
    pub estimator: Option<EstimatorArg>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    pub species: Option<String>,
    pub theta_max: Option<f64>,
    pub focal_length: Option<f64>,
    pub wavelength: Option<f64>,
    pub orientation: Option<Axis>,
    pub saturation: Option<f64>,
    pub detuning: Option<f64>,
    pub z_min: Option<f64>,
    pub z_max: Option<f64>,
    pub z_steps: Option<usize>,
    pub lambda_units: Option<bool>,
    pub n_driven: Option<u32>,
    pub gravity: Option<f64>,
    pub j_top: Option<f64>,
    pub j_min: Option<f64>,
    pub gamma12_min: Option<f64>,
    pub e0_over_er: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    #[default]
    AsPrinted,
    FullDetuning,
}

impl From<ModeArg> for AnalyticMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::AsPrinted => AnalyticMode::AsPrinted,
            ModeArg::FullDetuning => AnalyticMode::FullDetuning,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorArg {
    #[default]
    Factorized,
    AlphaBeta,
}

impl From<EstimatorArg> for CorrelationEstimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Factorized => CorrelationEstimator::Factorized,
            EstimatorArg::AlphaBeta => CorrelationEstimator::AlphaBeta,
        }
    }
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        let err = |message: String| CliError::Config {
            path: path.to_path_buf(),
            message,
        };
        let cfg: ConfigFile = serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(err(format!(
                "schema {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    /// Missing file is an I/O error; malformed content is a usage error.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Environment default, then any config overrides.
    pub fn quadrature(&self) -> Result<QuadratureSpec, CliError> {
        let mut spec = QuadratureSpec::from_env().map_err(CliError::usage)?;
        if let Some(q) = &self.quadrature {
            spec.rel_tol = q.rel_tol.unwrap_or(spec.rel_tol);
            spec.abs_tol = q.abs_tol.unwrap_or(spec.abs_tol);
            spec.max_refinements = q.max_refinements.unwrap_or(spec.max_refinements);
            spec.validate().map_err(CliError::usage)?;
        }
        Ok(spec)
    }
}
