use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::path::Path;

use lenscoupled::coupling::{
    coupling_at, coupling_map, gamma_max_sweep, linspace, Axis, MapGrid, Plane,
};
use lenscoupled::dynamics::{excitation_spectrum, AnalyticMode, CorrelationEstimator, DriveSpec};
use lenscoupled::greens::{
    effective_coords, g_from_integrals, psf_integrals, ComplexMat3, FocalCoords, LensSpec, Vec3,
};
use lenscoupled::numerics::QuadratureSpec;
use lenscoupled::trap::{
    recoil_energy, trap_profile, working_point_summary, SpeciesRegistry, TrapConfig, WorkingPoint,
    CS133_D2,
};
use lenscoupled::units::STANDARD_GRAVITY;
use num_complex::Complex64;
use serde::Serialize;

use crate::args::{CouplingMapArgs, GammaSweepArgs, PsfArgs, SpectrumArgs, TrapArgs};
use crate::config::ConfigFile;
use crate::error::CliError;
use crate::output::{csv_bytes, ensure_finite, json_bytes, Sink};

pub const DEFAULT_THETA_MAX: f64 = FRAC_PI_3;

/// Rendered primary output plus an optional secondary document.
pub struct Rendered {
    pub primary: Vec<u8>,
    pub summary: Option<Vec<u8>>,
}

impl Rendered {
    fn single(primary: Vec<u8>) -> Self {
        Self {
            primary,
            summary: None,
        }
    }
}

fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

fn to_vec3(p: [f64; 3]) -> Vec3 {
    Vec3::new(p[0], p[1], p[2])
}

#[derive(Debug, Clone, Copy, Serialize)]
struct JsonComplex {
    re: f64,
    im: f64,
}

impl From<Complex64> for JsonComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

fn json_matrix(m: &ComplexMat3) -> [[JsonComplex; 3]; 3] {
    m.0.map(|row| row.map(JsonComplex::from))
}

#[derive(Debug, Serialize)]
struct EffectiveCoords {
    rho: f64,
    phi: f64,
    z: f64,
}

#[derive(Debug, Serialize)]
struct PsfReport {
    theta_max: f64,
    length_unit: &'static str,
    r_i: [f64; 3],
    r_j: [f64; 3],
    effective: EffectiveCoords,
    #[serde(rename = "I1")]
    i1: JsonComplex,
    #[serde(rename = "I2")]
    i2: JsonComplex,
    #[serde(rename = "I3")]
    i3: JsonComplex,
    #[serde(rename = "I4")]
    i4: JsonComplex,
    /// Dimensionless tensor.
    g_bar: [[JsonComplex; 3]; 3],
    /// `(k/8π) ḡ` in inverse wavelengths.
    #[serde(rename = "G_psf")]
    g_psf: [[JsonComplex; 3]; 3],
}

pub fn psf(args: &PsfArgs, cfg: &ConfigFile, spec: &QuadratureSpec) -> Result<Rendered, CliError> {
    let sec = &cfg.psf;
    let theta = pick(args.theta_max, sec.theta_max, DEFAULT_THETA_MAX);
    let r_i = pick(args.r_i, sec.r_i, [0.0; 3]);
    let r_j = pick(args.r_j, sec.r_j, [0.0; 3]);
    let params = format!("theta_max={theta}, r_i={r_i:?}, r_j={r_j:?}");

    let lens = LensSpec::normalized(theta).map_err(CliError::usage)?;
    let (vi, vj) = (to_vec3(r_i), to_vec3(r_j));
    if !(vi.is_finite() && vj.is_finite()) {
        return Err(CliError::Usage(format!("non-finite position ({params})")));
    }
    lens.check_focal_zone(&vi).map_err(CliError::usage)?;
    lens.check_focal_zone(&vj).map_err(CliError::usage)?;

    let fc = effective_coords(&vi, &vj);
    let k = lens.wavenumber();
    let ints = psf_integrals(&fc, k, theta, spec).map_err(|e| CliError::runtime("greens", &params, e))?;
    let g = g_from_integrals(&ints, fc.phi);
    let g_psf = g.scale(Complex64::new(k / (8.0 * PI), 0.0));
    let all: Vec<f64> = ints
        .as_array()
        .iter()
        .chain(g.entries())
        .chain(g_psf.entries())
        .flat_map(|z| [z.re, z.im])
        .collect();
    ensure_finite("greens", &params, &all)?;

    let report = PsfReport {
        theta_max: theta,
        length_unit: "lambda",
        r_i,
        r_j,
        effective: EffectiveCoords {
            rho: fc.rho,
            phi: fc.phi,
            z: fc.z,
        },
        i1: ints.i1.into(),
        i2: ints.i2.into(),
        i3: ints.i3.into(),
        i4: ints.i4.into(),
        g_bar: json_matrix(&g),
        g_psf: json_matrix(&g_psf),
    };
    Ok(Rendered::single(json_bytes(&report)?))
}

pub fn gamma_sweep(
    args: &GammaSweepArgs,
    cfg: &ConfigFile,
    spec: &QuadratureSpec,
) -> Result<Rendered, CliError> {
    let sec = &cfg.gamma_sweep;
    let axis = pick(args.orientation, sec.orientation, Axis::X);
    let lo = pick(args.theta_min, sec.theta_min, 0.01);
    let hi = pick(args.theta_max, sec.theta_max, FRAC_PI_2);
    let steps = pick(args.steps, sec.steps, 100);
    let params = format!("orientation={axis:?}, theta=[{lo}, {hi}], steps={steps}");
    if !(lo > 0.0 && lo <= hi && hi <= FRAC_PI_2) || steps < 1 {
        return Err(CliError::Usage(format!(
            "need 0 < theta_min <= theta_max <= pi/2 and steps >= 1 ({params})"
        )));
    }
    let thetas = linspace(lo, hi, steps);
    let rows: Vec<[f64; 2]> = gamma_max_sweep(axis, &thetas, spec)
        .map_err(|e| CliError::runtime("coupling", &params, e))?
        .into_iter()
        .map(|(t, g)| [t, g])
        .collect();
    ensure_finite("coupling", &params, rows.iter().flatten())?;
    Ok(Rendered::single(csv_bytes(
        ["theta_max", "gamma12_over_gamma"],
        &rows,
    )?))
}

pub fn coupling_map_cmd(
    args: &CouplingMapArgs,
    cfg: &ConfigFile,
    spec: &QuadratureSpec,
) -> Result<Rendered, CliError> {
    let sec = &cfg.coupling_map;
    let axes = pick(args.orientation.clone(), sec.orientation.clone(), vec![Axis::X]);
    let orientations = match axes.as_slice() {
        [a] => (*a, *a),
        [a, b] => (*a, *b),
        _ => {
            return Err(CliError::Usage(format!(
                "orientation takes one or two axes, got {}",
                axes.len()
            )))
        }
    };
    let plane = pick(args.plane, sec.plane, Plane::Xz);
    let default = MapGrid::default();
    let grid = MapGrid {
        extent: pick(args.extent, sec.extent, default.extent),
        resolution: pick(args.resolution, sec.resolution, default.resolution),
    };
    let theta = pick(args.theta_max, sec.theta_max, DEFAULT_THETA_MAX);
    let params = format!(
        "orientations={orientations:?}, plane={plane:?}, extent={}, resolution={}, theta_max={theta}",
        grid.extent, grid.resolution
    );
    if grid.resolution < 2 || !(grid.extent > 0.0 && grid.extent.is_finite()) {
        return Err(CliError::Usage(format!(
            "need resolution >= 2 and a positive extent ({params})"
        )));
    }
    let lens = LensSpec::normalized(theta).map_err(CliError::usage)?;
    lens.check_focal_zone(&Vec3::new(grid.extent, 0.0, grid.extent))
        .map_err(CliError::usage)?;

    let map = coupling_map(orientations, plane, &grid, &lens, spec)
        .map_err(|e| CliError::runtime("coupling", &params, e))?;
    let rows: Vec<[f64; 4]> = map.rows().map(|(a, b, j, g)| [a, b, j, g]).collect();
    ensure_finite("coupling", &params, rows.iter().flatten())?;
    let (la, lb) = plane.axis_labels();
    Ok(Rendered::single(csv_bytes(
        [la, lb, "J_over_hGamma", "Gamma12_over_Gamma"],
        &rows,
    )?))
}

pub fn spectrum(
    args: &SpectrumArgs,
    cfg: &ConfigFile,
    spec: &QuadratureSpec,
) -> Result<Rendered, CliError> {
    let sec = &cfg.spectrum;
    let wp = WorkingPoint::default();
    let s = pick(args.saturation, sec.saturation, 0.1);
    let lo = pick(args.delta_min, sec.delta_min, -3.0);
    let hi = pick(args.delta_max, sec.delta_max, 3.0);
    let steps = pick(args.delta_steps, sec.delta_steps, 601);
    let mode: AnalyticMode = pick(args.mode, sec.mode, Default::default()).into();
    let estimator: CorrelationEstimator = pick(args.estimator, sec.estimator, Default::default()).into();

    // Explicit couplings on the command line outrank a configured position.
    let explicit = args.j12.is_some() || args.gamma12.is_some();
    let z = if explicit { None } else { args.z.or(sec.z) };
    let (g, source) = match z {
        Some(z) => {
            let axis = pick(args.orientation, sec.orientation, Axis::X);
            let theta = pick(args.theta_max, sec.theta_max, DEFAULT_THETA_MAX);
            let lens = LensSpec::normalized(theta).map_err(CliError::usage)?;
            lens.check_focal_zone(&Vec3::new(0.0, 0.0, z))
                .map_err(CliError::usage)?;
            let u = axis.unit();
            let params = format!("z={z}, orientation={axis:?}, theta_max={theta}");
            let c = coupling_at(&FocalCoords::on_axis(z), &u, &u, &lens, spec)
                .map_err(|e| CliError::runtime("coupling", &params, e))?;
            (c.g12_over_gamma, params)
        }
        None => {
            let j = pick(args.j12, sec.j12, wp.j_min_over_hgamma);
            let gm = pick(args.gamma12, sec.gamma12, wp.gamma12_min_over_gamma);
            (Complex64::new(j, gm / 2.0), format!("J12={j}, Gamma12={gm}"))
        }
    };
    let params = format!("{source}, s={s}, delta=[{lo}, {hi}], steps={steps}");
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) || steps < 1 {
        return Err(CliError::Usage(format!(
            "need a finite detuning range with delta_min <= delta_max and steps >= 1 ({params})"
        )));
    }
    DriveSpec::from_saturation(lo, s, 1.0).map_err(CliError::usage)?;

    let deltas = linspace(lo, hi, steps);
    let coupled = excitation_spectrum(g, s, &deltas, 1.0, mode, estimator)
        .map_err(|e| CliError::runtime("dynamics", &params, e))?;
    let free = excitation_spectrum(Complex64::new(0.0, 0.0), s, &deltas, 1.0, mode, estimator)
        .map_err(|e| CliError::runtime("dynamics", &params, e))?;
    let rows: Vec<[f64; 4]> = coupled
        .iter()
        .zip(&free)
        .map(|(c, f)| [c.delta, c.n1_over_s2, f.n1_over_s2, c.xi_over_s2])
        .collect();
    ensure_finite("dynamics", &params, rows.iter().flatten())?;
    Ok(Rendered::single(csv_bytes(
        ["delta_over_Gamma", "n1_over_s2", "n1_over_s2_nocoupling", "xi_over_s2"],
        &rows,
    )?))
}

#[derive(Debug, Serialize)]
struct TrapSummary {
    /// Potential minimum on the optical axis, m.
    z_min: f64,
    #[serde(rename = "depth_over_Er")]
    depth_over_er: f64,
    /// Working-point value used for the lifetime.
    #[serde(rename = "Gamma_tot_over_Gamma")]
    gamma_tot_over_gamma: f64,
    t_trap_s: f64,
    #[serde(rename = "t_trap_over_Gamma_inv")]
    t_trap_over_gamma_inv: f64,
    species: String,
    n_driven: u32,
    z_min_over_lambda: f64,
    z_working_over_lambda: f64,
    #[serde(rename = "Gamma_tot_over_Gamma_profile")]
    gamma_tot_over_gamma_profile: f64,
    t_trap_bound_s: f64,
    #[serde(rename = "recoil_energy_J")]
    recoil_energy_j: f64,
}

pub fn trap(
    args: &TrapArgs,
    cfg: &ConfigFile,
    spec: &QuadratureSpec,
    out: Option<&Path>,
) -> Result<(Rendered, Sink), CliError> {
    let sec = &cfg.trap;
    let mut registry = SpeciesRegistry::default();
    for s in &cfg.species {
        registry.insert(s.clone()).map_err(CliError::usage)?;
    }
    let label = pick(args.species.clone(), sec.species.clone(), CS133_D2.to_string());
    let species = registry.get(&label).map_err(|e| {
        let known: Vec<&str> = registry.labels().collect();
        CliError::Usage(format!("{e}; known species: {}", known.join(", ")))
    })?;

    let lambda = pick(args.wavelength, sec.wavelength, species.lambda0);
    let theta = pick(args.theta_max, sec.theta_max, DEFAULT_THETA_MAX);
    let focal = pick(args.focal_length, sec.focal_length, 1e-3);
    let lens = LensSpec::new(theta, focal, lambda).map_err(CliError::usage)?;
    let mut tc = TrapConfig::with_lens(lens).map_err(CliError::usage)?;

    let detuning = pick(args.detuning, sec.detuning, tc.drive.delta());
    let s = pick(args.saturation, sec.saturation, tc.drive.saturation().unwrap_or(0.1));
    tc.drive = DriveSpec::from_saturation(detuning, s, 1.0).map_err(CliError::usage)?;
    tc.orientation = pick(args.orientation, sec.orientation, tc.orientation);
    tc.n_driven = pick(args.n_driven, sec.n_driven, 1);
    tc.gravity = pick(args.gravity, sec.gravity, STANDARD_GRAVITY);

    let lambda_units = args.lambda_units || sec.lambda_units.unwrap_or(false);
    let scale = if lambda_units { lambda } else { 1.0 };
    let z_lo = args.z_min.or(sec.z_min).map_or(0.3 * lambda, |z| z * scale);
    let z_hi = args.z_max.or(sec.z_max).map_or(1.6 * lambda, |z| z * scale);
    let steps = pick(args.z_steps, sec.z_steps, 1301);
    if !(z_lo.is_finite() && z_hi.is_finite() && z_lo < z_hi) || steps < 3 {
        return Err(CliError::Usage(format!(
            "need z_min < z_max and at least 3 steps (z=[{z_lo}, {z_hi}] m, steps={steps})"
        )));
    }
    tc.z_grid = linspace(z_lo, z_hi, steps);

    let wp = WorkingPoint {
        j_top_over_hgamma: pick(args.j_top, sec.j_top, 0.5),
        j_min_over_hgamma: pick(args.j_min, sec.j_min, 0.4),
        gamma12_min_over_gamma: pick(args.gamma12_min, sec.gamma12_min, -0.15),
    };
    let e0_over_er = pick(args.e0_over_er, sec.e0_over_er, 1.0);
    let params = format!(
        "species={label}, theta_max={theta}, f={focal}, lambda={lambda}, delta={detuning}, s={s}, \
         N={}, z=[{z_lo}, {z_hi}] m, steps={steps}",
        tc.n_driven
    );

    let profile = trap_profile(species, &tc, spec).map_err(|e| CliError::runtime("trap", &params, e))?;
    let er = recoil_energy(species, lambda).map_err(|e| CliError::runtime("trap", &params, e))?;
    let wps = working_point_summary(species, lambda, &wp, &tc.drive, e0_over_er * er)
        .map_err(|e| CliError::runtime("trap", &format!("{params}, working point {wp:?}"), e))?;

    let rows: Vec<[f64; 5]> = (0..profile.z_grid.len())
        .map(|i| {
            [
                profile.z_grid[i] / lambda,
                profile.u_dd[i],
                profile.u_g[i],
                profile.u_total[i],
                profile.heating[i],
            ]
        })
        .collect();
    ensure_finite("trap", &params, rows.iter().flatten())?;

    let lm = profile.landmarks;
    let summary = TrapSummary {
        z_min: lm.z_min,
        depth_over_er: lm.u_depth / er,
        gamma_tot_over_gamma: wps.gamma_tot_over_gamma,
        t_trap_s: wps.lifetime.t_trap,
        t_trap_over_gamma_inv: wps.lifetime.t_trap * species.gamma,
        species: label.clone(),
        n_driven: tc.n_driven,
        z_min_over_lambda: lm.z_min / lambda,
        z_working_over_lambda: lm.z_working / lambda,
        gamma_tot_over_gamma_profile: lm.gamma_tot_over_gamma,
        t_trap_bound_s: wps.lifetime.bound,
        recoil_energy_j: er,
    };
    let numbers = [
        summary.z_min,
        summary.depth_over_er,
        summary.gamma_tot_over_gamma,
        summary.t_trap_s,
        summary.t_trap_over_gamma_inv,
        summary.gamma_tot_over_gamma_profile,
        summary.t_trap_bound_s,
    ];
    ensure_finite("trap", &params, &numbers)?;

    let summary_sink = match (&args.summary, out) {
        (Some(p), _) => Sink::File(p.clone()),
        (None, Some(o)) => Sink::File(o.with_extension("summary.json")),
        (None, None) => Sink::Stderr,
    };
    Ok((
        Rendered {
            primary: csv_bytes(["z_over_lambda", "U_dd_J", "U_g_J", "U_total_J", "heating_W"], &rows)?,
            summary: Some(json_bytes(&summary)?),
        },
        summary_sink,
    ))
}
