//! Trap analysis in SI units.
//!
//! A2 sits on the optical axis near its focus; `N` identical driven atoms sit
//! at the other focus. The interaction energy `U_dd = −N J₁₂ ξ` competes with
//! gravity and with recoil heating from A2's scattered light.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::coupling::{
    coupling_at, free_space_decay, nearest_local_max, nearest_local_min, Axis, CouplingError,
};
use crate::dynamics::{
    steady_state_analytic, AnalyticMode, CorrelationEstimator, DriveSpec, DynamicsError,
};
use crate::greens::{effective_coords, LensSpec, Vec3};
use crate::numerics::QuadratureSpec;
use crate::units::{ATOMIC_MASS_UNIT, HBAR, SPEED_OF_LIGHT, STANDARD_GRAVITY};

/// Position, in drive wavelengths, near which the trapping landmarks are
/// searched.
pub const LANDMARK_TARGET: f64 = 0.92;

/// Relative mismatch allowed between a species' decay rate and the one
/// implied by its dipole moment.
pub const DECAY_CONSISTENCY: f64 = 0.05;

pub const CS133_D2: &str = "Cs133-D2";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrapError {
    #[error("invalid species: {0}")]
    InvalidSpecies(String),
    #[error("unknown species {0:?}")]
    UnknownSpecies(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("division by zero: {0}")]
    Division(String),
    #[error("no {0} found near the landmark target")]
    NoLandmark(&'static str),
    #[error("malformed species registry: {0}")]
    Registry(String),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Two-level atom parameters in SI units.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpecies {
    pub label: String,
    /// C·m
    pub dipole_moment: f64,
    /// m
    pub lambda0: f64,
    /// rad/s
    pub gamma: f64,
    /// kg
    pub mass: f64,
}

impl AtomSpecies {
    /// Cesium D2 line with the full atomic mass.
    pub fn cs133_d2() -> Self {
        Self {
            label: CS133_D2.to_string(),
            dipole_moment: 2.69e-29,
            lambda0: 852e-9,
            gamma: 2.0 * PI * 5.23e6,
            mass: 133.0 * ATOMIC_MASS_UNIT,
        }
    }

    /// Positive finite fields and a decay rate within 5% of the dipole
    /// estimate.
    pub fn validate(&self) -> Result<(), TrapError> {
        let fields = [self.dipole_moment, self.lambda0, self.gamma, self.mass];
        if fields.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(TrapError::InvalidSpecies(format!("{self:?}")));
        }
        let omega0 = 2.0 * PI * SPEED_OF_LIGHT / self.lambda0;
        let implied = free_space_decay(self.dipole_moment, omega0)?;
        if (implied / self.gamma - 1.0).abs() > DECAY_CONSISTENCY {
            return Err(TrapError::InvalidSpecies(format!(
                "{}: decay rate {:e} rad/s disagrees with dipole estimate {implied:e} rad/s",
                self.label, self.gamma
            )));
        }
        Ok(())
    }
}

/// Species presets keyed by label.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesRegistry {
    entries: BTreeMap<String, AtomSpecies>,
}

impl Default for SpeciesRegistry {
    fn default() -> Self {
        let cs = AtomSpecies::cs133_d2();
        Self {
            entries: BTreeMap::from([(cs.label.clone(), cs)]),
        }
    }
}

impl SpeciesRegistry {
    /// Built-in presets plus a JSON array of additional species; later
    /// entries replace earlier ones with the same label.
    pub fn with_json(json: &str) -> Result<Self, TrapError> {
        let extra: Vec<AtomSpecies> =
            serde_json::from_str(json).map_err(|e| TrapError::Registry(e.to_string()))?;
        let mut reg = Self::default();
        for s in extra {
            reg.insert(s)?;
        }
        Ok(reg)
    }

    pub fn insert(&mut self, species: AtomSpecies) -> Result<(), TrapError> {
        species.validate()?;
        self.entries.insert(species.label.clone(), species);
        Ok(())
    }

    pub fn get(&self, label: &str) -> Result<&AtomSpecies, TrapError> {
        self.entries
            .get(label)
            .ok_or_else(|| TrapError::UnknownSpecies(label.to_string()))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// `E_r = ħ²k²/2m` in J.
pub fn recoil_energy(species: &AtomSpecies, lambda_d: f64) -> Result<f64, TrapError> {
    if !(lambda_d > 0.0 && lambda_d.is_finite() && species.mass > 0.0) {
        return Err(TrapError::InvalidArgument(format!(
            "wavelength {lambda_d}, mass {}",
            species.mass
        )));
    }
    let k = 2.0 * PI / lambda_d;
    Ok(HBAR * HBAR * k * k / (2.0 * species.mass))
}

/// `Γ_tot = Γ + Γ₁₂ Re(corr)/n₂`, in the units of `gamma`.
pub fn gamma_tot(gamma: f64, gamma12: f64, corr: Complex64, n2: f64) -> Result<f64, TrapError> {
    if n2 == 0.0 || !n2.is_finite() {
        return Err(TrapError::Division(format!("excited population n2 = {n2}")));
    }
    Ok(gamma + gamma12 * corr.re / n2)
}

/// Recoil heating `R = E_r Γ_tot n₂` in W.
pub fn heating_rate(
    species: &AtomSpecies,
    lambda_d: f64,
    gamma_tot: f64,
    n2: f64,
) -> Result<f64, TrapError> {
    if !(0.0..=1.0).contains(&n2) {
        return Err(TrapError::InvalidArgument(format!("n2 = {n2} outside [0, 1]")));
    }
    Ok(recoil_energy(species, lambda_d)? * gamma_tot * n2)
}

/// Heating-limited lifetime and its upper bound, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lifetime {
    pub t_trap: f64,
    /// `(1/ω_r)(Γ/Γ_tot)`
    pub bound: f64,
}

/// `ΔJ = J_top − J_min + E₀`.
pub fn well_energy(j_top: f64, j_min: f64, e0: f64) -> f64 {
    j_top - j_min + e0
}

/// `t = (ΔJ/E_r)(Γ/Γ_tot)(|Im G₁₂|/|G₁₂|²)` with `G₁₂` in rad/s and `ΔJ` in J.
pub fn trap_lifetime(
    delta_j: f64,
    species: &AtomSpecies,
    lambda_d: f64,
    gamma: f64,
    gamma_tot: f64,
    g12: Complex64,
) -> Result<Lifetime, TrapError> {
    if delta_j.is_nan() || delta_j <= 0.0 {
        return Err(TrapError::InvalidArgument(format!("well energy {delta_j}")));
    }
    if g12.norm() == 0.0 || !g12.is_finite() {
        return Err(TrapError::Division(format!("coupling G12 = {g12}")));
    }
    if gamma_tot == 0.0 {
        return Err(TrapError::Division("total decay rate is zero".into()));
    }
    let er = recoil_energy(species, lambda_d)?;
    let ratio = gamma / gamma_tot;
    Ok(Lifetime {
        t_trap: delta_j / er * ratio * g12.im.abs() / g12.norm_sqr(),
        bound: HBAR / er * ratio,
    })
}

/// Coupling landmarks that fix the trapping working point, in units of
/// `ħΓ` and `Γ`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkingPoint {
    pub j_top_over_hgamma: f64,
    pub j_min_over_hgamma: f64,
    pub gamma12_min_over_gamma: f64,
}

impl Default for WorkingPoint {
    fn default() -> Self {
        Self {
            j_top_over_hgamma: 0.5,
            j_min_over_hgamma: 0.4,
            gamma12_min_over_gamma: -0.15,
        }
    }
}

impl WorkingPoint {
    /// `G₁₂/Γ = J/ħΓ + iΓ₁₂/2Γ`.
    pub fn g12_over_gamma(&self) -> Complex64 {
        Complex64::new(self.j_min_over_hgamma, self.gamma12_min_over_gamma / 2.0)
    }
}

/// Decay and lifetime figures at a working point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkingPointSummary {
    pub gamma_tot_over_gamma: f64,
    pub lifetime: Lifetime,
}

/// `Γ_tot` from the low-saturation steady state at `wp` and the lifetime for
/// an atom starting with energy `e0` (J) above the well bottom.
pub fn working_point_summary(
    species: &AtomSpecies,
    lambda_d: f64,
    wp: &WorkingPoint,
    drive: &DriveSpec,
    e0: f64,
) -> Result<WorkingPointSummary, TrapError> {
    let g = wp.g12_over_gamma();
    let ss = steady_state_analytic(
        g,
        drive,
        1.0,
        AnalyticMode::AsPrinted,
        CorrelationEstimator::Factorized,
    )?;
    let gt = gamma_tot(1.0, wp.gamma12_min_over_gamma, ss.corr, ss.n2)?;
    let hg = HBAR * species.gamma;
    let dj = well_energy(wp.j_top_over_hgamma * hg, wp.j_min_over_hgamma * hg, e0);
    let lifetime = trap_lifetime(dj, species, lambda_d, species.gamma, gt * species.gamma, g * species.gamma)?;
    Ok(WorkingPointSummary {
        gamma_tot_over_gamma: gt,
        lifetime,
    })
}

/// Inputs of [`trap_profile`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrapConfig {
    /// Lens in SI units; its wavelength is the drive wavelength.
    pub lens: LensSpec,
    /// Drive on the `N` top atoms, with rates in units of `Γ`.
    pub drive: DriveSpec,
    pub orientation: Axis,
    /// A2 positions on the optical axis, in m.
    pub z_grid: Vec<f64>,
    pub n_driven: u32,
    /// Unit vector along the gravitational acceleration.
    pub gravity_axis: Vec3,
    /// m/s²
    pub gravity: f64,
}

impl TrapConfig {
    /// Cesium-style defaults: `θ_max = π/3`, red detuning `10Γ`, `s = 0.1`,
    /// x dipoles, gravity along `−z`, A2 scanned over `[0.3, 1.6] λ`.
    pub fn with_lens(lens: LensSpec) -> Result<Self, TrapError> {
        let lambda = lens.wavelength();
        Ok(Self {
            lens,
            drive: DriveSpec::from_saturation(-10.0, 0.1, 1.0)?,
            orientation: Axis::X,
            z_grid: crate::coupling::linspace(0.3 * lambda, 1.6 * lambda, 1301),
            n_driven: 1,
            gravity_axis: Vec3::new(0.0, 0.0, -1.0),
            gravity: STANDARD_GRAVITY,
        })
    }
}

/// Located features of a trap profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapLandmarks {
    /// Local maximum of `J₁₂` nearest the landmark target (m).
    pub z_working: f64,
    pub g12_working_over_gamma: Complex64,
    /// `Γ_tot/Γ` at `z_working`.
    pub gamma_tot_over_gamma: f64,
    /// Local minimum of `U_dd` nearest the landmark target (m).
    pub z_min: f64,
    /// Height of the lower barrier of `U_dd` around `z_min` (J).
    pub u_depth: f64,
}

/// Potentials and heating along the optical axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapProfile {
    pub z_grid: Vec<f64>,
    pub g12_over_gamma: Vec<Complex64>,
    pub xi: Vec<f64>,
    pub u_dd: Vec<f64>,
    pub u_g: Vec<f64>,
    pub u_total: Vec<f64>,
    pub gamma_tot_over_gamma: Vec<f64>,
    pub heating: Vec<f64>,
    pub landmarks: TrapLandmarks,
}

struct Sample {
    g: Complex64,
    xi: f64,
    gamma_tot: f64,
    n2: f64,
}

/// Evaluate the trap along the optical axis.
pub fn trap_profile(
    species: &AtomSpecies,
    cfg: &TrapConfig,
    spec: &QuadratureSpec,
) -> Result<TrapProfile, TrapError> {
    species.validate()?;
    if cfg.n_driven < 1 {
        return Err(TrapError::InvalidArgument("at least one driven atom".into()));
    }
    if cfg.z_grid.len() < 3 {
        return Err(TrapError::InvalidArgument("z grid needs at least 3 points".into()));
    }
    if (cfg.gravity_axis.norm() - 1.0).abs() > 1e-12 || cfg.gravity.is_nan() || cfg.gravity < 0.0 {
        return Err(TrapError::InvalidArgument(format!(
            "gravity {} along {:?}",
            cfg.gravity, cfg.gravity_axis
        )));
    }
    let lens = &cfg.lens;
    let lambda = lens.wavelength();
    for &z in &cfg.z_grid {
        lens.check_focal_zone(&Vec3::new(0.0, 0.0, z))
            .map_err(CouplingError::from)?;
    }
    let u = cfg.orientation.unit();

    let samples: Vec<Sample> = cfg
        .z_grid
        .par_iter()
        .map(|&z| {
            let fc = effective_coords(&Vec3::ZERO, &Vec3::new(0.0, 0.0, z));
            let c = coupling_at(&fc, &u, &u, lens, spec)?;
            let ss = steady_state_analytic(
                c.g12_over_gamma,
                &cfg.drive,
                1.0,
                AnalyticMode::AsPrinted,
                CorrelationEstimator::Factorized,
            )?;
            Ok(Sample {
                g: c.g12_over_gamma,
                xi: ss.xi,
                gamma_tot: gamma_tot(1.0, c.gamma12_over_gamma, ss.corr, ss.n2)?,
                n2: ss.n2,
            })
        })
        .collect::<Result<_, TrapError>>()?;

    let hg = HBAR * species.gamma;
    let n = f64::from(cfg.n_driven);
    let er = recoil_energy(species, lambda)?;
    let u_dd: Vec<f64> = samples
        .iter()
        .map(|s| crate::dynamics::potential_energy(n * s.g.re * hg, s.xi))
        .collect();
    let u_g: Vec<f64> = cfg
        .z_grid
        .iter()
        .map(|&z| -species.mass * cfg.gravity * cfg.gravity_axis.dot(&Vec3::new(0.0, 0.0, z)))
        .collect();
    let u_total: Vec<f64> = u_dd.iter().zip(&u_g).map(|(a, b)| a + b).collect();
    let heating: Vec<f64> = samples
        .iter()
        .map(|s| er * s.gamma_tot * species.gamma * s.n2)
        .collect();

    let z_units: Vec<f64> = cfg.z_grid.iter().map(|z| z / lambda).collect();
    let j: Vec<f64> = samples.iter().map(|s| s.g.re).collect();
    let iw = nearest_local_max(&z_units, &j, LANDMARK_TARGET)
        .ok_or(TrapError::NoLandmark("coupling maximum"))?;
    let im = nearest_local_min(&z_units, &u_dd, LANDMARK_TARGET)
        .ok_or(TrapError::NoLandmark("potential minimum"))?;

    Ok(TrapProfile {
        landmarks: TrapLandmarks {
            z_working: cfg.z_grid[iw],
            g12_working_over_gamma: samples[iw].g,
            gamma_tot_over_gamma: samples[iw].gamma_tot,
            z_min: cfg.z_grid[im],
            u_depth: barrier_depth(&u_dd, im),
        },
        z_grid: cfg.z_grid.clone(),
        g12_over_gamma: samples.iter().map(|s| s.g).collect(),
        xi: samples.iter().map(|s| s.xi).collect(),
        gamma_tot_over_gamma: samples.iter().map(|s| s.gamma_tot).collect(),
        u_dd,
        u_g,
        u_total,
        heating,
    })
}

/// Lower of the two enclosing barriers minus the value at the local minimum
/// `i`; a side that rises to the grid edge uses the edge value.
pub fn barrier_depth(values: &[f64], i: usize) -> f64 {
    let mut left = i;
    while left > 0 && values[left - 1] >= values[left] {
        left -= 1;
    }
    let mut right = i;
    while right + 1 < values.len() && values[right + 1] >= values[right] {
        right += 1;
    }
    values[left].min(values[right]) - values[i]
}
