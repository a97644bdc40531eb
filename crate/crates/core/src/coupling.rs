//! Dipole-dipole coupling coefficients through the lens.
//!
//! Everything here is normalized by the single-atom decay rate `Γ`: the
//! dispersive coupling `J₁₂/ħΓ = (3/8) Re[u₁·ḡ·u₂]`, the dissipative
//! coupling `Γ₁₂/Γ = (3/4) Im[u₁·ḡ·u₂]`, and the complex coupling
//! `G₁₂/Γ = (3/8) u₁·ḡ·u₂`. Positions are in drive wavelengths.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::greens::{
    effective_coords, g_matrix, FocalCoords, GreensError, LensSpec, Vec3,
};
use crate::numerics::QuadratureSpec;
use crate::units::{EPSILON_0, HBAR, SPEED_OF_LIGHT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CouplingError {
    #[error("dipole orientation {0:?} is not a unit vector")]
    NotUnit(Vec3),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Greens(#[from] GreensError),
}

/// Cartesian dipole orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn unit(self) -> Vec3 {
        match self {
            Axis::X => Vec3::X,
            Axis::Y => Vec3::Y,
            Axis::Z => Vec3::Z,
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(format!("unknown axis {other:?} (expected x, y or z)")),
        }
    }
}

/// Two dipoles, one near each focus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipolePair {
    u1: Vec3,
    u2: Vec3,
    r1: Vec3,
    r2: Vec3,
}

impl DipolePair {
    pub fn new(u1: Vec3, u2: Vec3, r1: Vec3, r2: Vec3) -> Result<Self, CouplingError> {
        for u in [u1, u2] {
            if !u.is_finite() || (u.norm() - 1.0).abs() > 1e-12 {
                return Err(CouplingError::NotUnit(u));
            }
        }
        Ok(Self { u1, u2, r1, r2 })
    }

    pub fn aligned(axis: Axis, r1: Vec3, r2: Vec3) -> Self {
        Self {
            u1: axis.unit(),
            u2: axis.unit(),
            r1,
            r2,
        }
    }

    pub fn u1(&self) -> Vec3 {
        self.u1
    }
    pub fn u2(&self) -> Vec3 {
        self.u2
    }
    pub fn r1(&self) -> Vec3 {
        self.r1
    }
    pub fn r2(&self) -> Vec3 {
        self.r2
    }

    /// The same pair with the roles of the two atoms exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            u1: self.u2,
            u2: self.u1,
            r1: self.r2,
            r2: self.r1,
        }
    }
}

/// Normalized coupling coefficients, all derived from one `u₁·ḡ·u₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingResult {
    /// `J₁₂ / ħΓ`
    pub j_over_hgamma: f64,
    /// `Γ₁₂ / Γ`
    pub gamma12_over_gamma: f64,
    /// `G₁₂ / Γ = J₁₂/ħΓ + i Γ₁₂/2Γ`
    pub g12_over_gamma: Complex64,
}

impl CouplingResult {
    /// Build from the projected tensor element `u₁·ḡ·u₂`.
    pub fn from_projection(w: Complex64) -> Self {
        Self {
            j_over_hgamma: 0.375 * w.re,
            gamma12_over_gamma: 0.75 * w.im,
            g12_over_gamma: w * 0.375,
        }
    }
}

/// Single-atom spontaneous emission rate `|d|²ω³ / 3πħε₀c³` in 1/s.
pub fn free_space_decay(dipole_moment: f64, omega: f64) -> Result<f64, CouplingError> {
    if !(dipole_moment > 0.0 && omega > 0.0 && dipole_moment.is_finite() && omega.is_finite()) {
        return Err(CouplingError::InvalidArgument(format!(
            "dipole moment {dipole_moment} and angular frequency {omega} must be positive"
        )));
    }
    Ok(dipole_moment * dipole_moment * omega.powi(3)
        / (3.0 * PI * HBAR * EPSILON_0 * SPEED_OF_LIGHT.powi(3)))
}

/// Coupling coefficients for a dipole pair across the lens.
pub fn coupling_coefficients(
    pair: &DipolePair,
    lens: &LensSpec,
    spec: &QuadratureSpec,
) -> Result<CouplingResult, CouplingError> {
    lens.check_focal_zone(&pair.r1)?;
    lens.check_focal_zone(&pair.r2)?;
    let fc = effective_coords(&pair.r1, &pair.r2);
    let g = g_matrix(&fc, lens.wavenumber(), lens.theta_max(), spec)?;
    Ok(CouplingResult::from_projection(g.bilinear(&pair.u1, &pair.u2)))
}

/// Coupling coefficients for given effective coordinates (no focal-zone
/// guard; lengths in the lens units).
pub fn coupling_at(
    fc: &FocalCoords,
    u1: &Vec3,
    u2: &Vec3,
    lens: &LensSpec,
    spec: &QuadratureSpec,
) -> Result<CouplingResult, CouplingError> {
    let g = g_matrix(fc, lens.wavenumber(), lens.theta_max(), spec)?;
    Ok(CouplingResult::from_projection(g.bilinear(u1, u2)))
}

/// Maximum dissipative coupling `Γ₁₂ᵐᵃˣ/Γ` (both dipoles at their foci) as a
/// function of the aperture half-angle.
pub fn gamma_max_sweep(
    orientation: Axis,
    theta_grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<(f64, f64)>, CouplingError> {
    let u = orientation.unit();
    theta_grid
        .iter()
        .map(|&theta| {
            let lens = LensSpec::normalized(theta)?;
            let c = coupling_at(&FocalCoords::origin(), &u, &u, &lens, spec)?;
            Ok((theta, c.gamma12_over_gamma))
        })
        .collect()
}

/// Scan plane for [`coupling_map`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    Xz,
    Xy,
}

impl Plane {
    pub fn axis_labels(self) -> (&'static str, &'static str) {
        match self {
            Plane::Xz => ("x", "z"),
            Plane::Xy => ("x", "y"),
        }
    }

    fn point(self, a: f64, b: f64) -> Vec3 {
        match self {
            Plane::Xz => Vec3::new(a, 0.0, b),
            Plane::Xy => Vec3::new(a, b, 0.0),
        }
    }
}

impl std::str::FromStr for Plane {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "xz" => Ok(Plane::Xz),
            "xy" => Ok(Plane::Xy),
            other => Err(format!("unknown plane {other:?} (expected xz or xy)")),
        }
    }
}

/// Square grid `[-extent, extent]²` with `resolution` samples per side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapGrid {
    pub extent: f64,
    pub resolution: usize,
}

impl Default for MapGrid {
    fn default() -> Self {
        Self {
            extent: 3.0,
            resolution: 201,
        }
    }
}

impl MapGrid {
    pub fn coordinates(&self) -> Vec<f64> {
        linspace(-self.extent, self.extent, self.resolution)
    }
}

/// Evenly spaced samples including both endpoints (`n = 1` gives `start`).
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { end } else { start + step * i as f64 })
                .collect()
        }
    }
}

/// Row-major coupling fields over a plane: index `i * n + j` holds the
/// point `(a[i], b[j])`, with `a` the first plane axis.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMap {
    pub plane: Plane,
    pub coords: Vec<f64>,
    pub j_over_hgamma: Vec<f64>,
    pub gamma12_over_gamma: Vec<f64>,
}

impl CouplingMap {
    pub fn resolution(&self) -> usize {
        self.coords.len()
    }

    /// `(a, b, J/ħΓ, Γ₁₂/Γ)` in row-major order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        let n = self.coords.len();
        (0..n * n).map(move |idx| {
            let (i, j) = (idx / n, idx % n);
            (
                self.coords[i],
                self.coords[j],
                self.j_over_hgamma[idx],
                self.gamma12_over_gamma[idx],
            )
        })
    }
}

/// Coupling fields with atom 1 fixed at its focus and atom 2 scanned over
/// the plane of its own focal zone.
pub fn coupling_map(
    orientations: (Axis, Axis),
    plane: Plane,
    grid: &MapGrid,
    lens: &LensSpec,
    spec: &QuadratureSpec,
) -> Result<CouplingMap, CouplingError> {
    if grid.resolution < 2 {
        return Err(CouplingError::InvalidGrid(format!(
            "resolution {} must be at least 2",
            grid.resolution
        )));
    }
    if !(grid.extent > 0.0 && grid.extent.is_finite()) {
        return Err(CouplingError::InvalidGrid(format!("extent {}", grid.extent)));
    }
    let corner = plane.point(grid.extent, grid.extent).scale(lens.wavelength());
    lens.check_focal_zone(&corner)?;

    let coords = grid.coordinates();
    let n = coords.len();
    let (u1, u2) = (orientations.0.unit(), orientations.1.unit());
    let values: Vec<CouplingResult> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let r2 = plane
                .point(coords[idx / n], coords[idx % n])
                .scale(lens.wavelength());
            let fc = effective_coords(&Vec3::ZERO, &r2);
            coupling_at(&fc, &u1, &u2, lens, spec)
        })
        .collect::<Result<_, _>>()?;
    Ok(CouplingMap {
        plane,
        coords,
        j_over_hgamma: values.iter().map(|v| v.j_over_hgamma).collect(),
        gamma12_over_gamma: values.iter().map(|v| v.gamma12_over_gamma).collect(),
    })
}

/// Couplings along the optical axis for atom 2 at `(0, 0, z)` (z in drive
/// wavelengths), atom 1 at its focus.
pub fn on_axis_profile(
    orientation: Axis,
    z_grid: &[f64],
    lens: &LensSpec,
    spec: &QuadratureSpec,
) -> Result<Vec<CouplingResult>, CouplingError> {
    let u = orientation.unit();
    for &z in z_grid {
        lens.check_focal_zone(&Vec3::new(0.0, 0.0, z * lens.wavelength()))?;
    }
    z_grid
        .par_iter()
        .map(|&z| {
            let fc = FocalCoords::on_axis(z * lens.wavelength());
            coupling_at(&fc, &u, &u, lens, spec)
        })
        .collect()
}

/// Index of the interior local maximum of `values` closest to `target` on
/// the `grid`, if any.
pub fn nearest_local_max(grid: &[f64], values: &[f64], target: f64) -> Option<usize> {
    nearest_extremum(grid, values, target, |a, b| a > b)
}

/// Index of the interior local minimum of `values` closest to `target`.
pub fn nearest_local_min(grid: &[f64], values: &[f64], target: f64) -> Option<usize> {
    nearest_extremum(grid, values, target, |a, b| a < b)
}

fn nearest_extremum(
    grid: &[f64],
    values: &[f64],
    target: f64,
    better: impl Fn(f64, f64) -> bool,
) -> Option<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| better(values[i], values[i - 1]) && !better(values[i + 1], values[i]))
        .min_by(|&a, &b| {
            (grid[a] - target)
                .abs()
                .total_cmp(&(grid[b] - target).abs())
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::ComplexMat3;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn cesium_decay_rate() {
        let omega = 2.0 * PI * SPEED_OF_LIGHT / 852e-9;
        let gamma = free_space_decay(2.69e-29, omega).unwrap();
        let measured = 2.0 * PI * 5.23e6;
        assert!((gamma / measured - 1.0).abs() < 0.02, "Γ = {gamma}");
    }

    #[test]
    fn decay_scaling() {
        let g = free_space_decay(1e-29, 1e15).unwrap();
        assert!((free_space_decay(2e-29, 1e15).unwrap() / g - 4.0).abs() < 1e-12);
        assert!((free_space_decay(1e-29, 2e15).unwrap() / g - 8.0).abs() < 1e-12);
        assert!(free_space_decay(0.0, 1e15).is_err());
    }

    #[test]
    fn focus_closed_forms() {
        let lens = LensSpec::normalized(PI / 3.0).unwrap();
        let x = coupling_coefficients(&DipolePair::aligned(Axis::X, Vec3::ZERO, Vec3::ZERO), &lens, &spec())
            .unwrap();
        assert!((x.gamma12_over_gamma - 0.59375).abs() < 1e-9);
        assert!(x.j_over_hgamma.abs() < 1e-12);
        let z = coupling_coefficients(&DipolePair::aligned(Axis::Z, Vec3::ZERO, Vec3::ZERO), &lens, &spec())
            .unwrap();
        assert!((z.gamma12_over_gamma - 0.3125).abs() < 1e-9);

        let full = LensSpec::normalized(PI / 2.0).unwrap();
        let x = coupling_coefficients(&DipolePair::aligned(Axis::X, Vec3::ZERO, Vec3::ZERO), &full, &spec())
            .unwrap();
        assert!((x.gamma12_over_gamma - 1.0).abs() < 1e-9);
    }

    #[test]
    fn complex_coupling_identity() {
        let lens = LensSpec::normalized(1.1).unwrap();
        let pair = DipolePair::new(
            Vec3::new(0.6, 0.0, 0.8),
            Vec3::Y,
            Vec3::new(0.3, -0.2, 0.1),
            Vec3::new(-0.5, 0.4, 1.2),
        )
        .unwrap();
        let c = coupling_coefficients(&pair, &lens, &spec()).unwrap();
        let rhs = Complex64::new(c.j_over_hgamma, c.gamma12_over_gamma / 2.0);
        assert!((c.g12_over_gamma - rhs).norm() <= 1e-12 * c.g12_over_gamma.norm());
    }

    #[test]
    fn rejects_non_unit_orientation() {
        let err = DipolePair::new(Vec3::new(1.0, 1.0, 0.0), Vec3::X, Vec3::ZERO, Vec3::ZERO);
        assert!(matches!(err, Err(CouplingError::NotUnit(_))));
    }

    #[test]
    fn sweep_is_monotone_and_x_dominates() {
        let thetas = linspace(0.02, PI / 2.0, 40);
        let xs = gamma_max_sweep(Axis::X, &thetas, &spec()).unwrap();
        let zs = gamma_max_sweep(Axis::Z, &thetas, &spec()).unwrap();
        for w in xs.windows(2).chain(zs.windows(2)) {
            assert!(w[1].1 > w[0].1);
        }
        for (x, z) in xs.iter().zip(&zs) {
            assert!(x.1 >= z.1 - 1e-12);
        }
        let tiny = gamma_max_sweep(Axis::X, &[1e-4], &spec()).unwrap();
        assert!(tiny[0].1 < 1e-7);
    }

    #[test]
    fn map_origin_matches_coefficients() {
        let lens = LensSpec::normalized(PI / 3.0).unwrap();
        let grid = MapGrid { extent: 1.0, resolution: 5 };
        let map = coupling_map((Axis::X, Axis::X), Plane::Xz, &grid, &lens, &spec()).unwrap();
        assert_eq!(map.rows().count(), 25);
        let centre = map.rows().nth(12).unwrap();
        assert_eq!((centre.0, centre.1), (0.0, 0.0));
        assert!((centre.3 - 0.59375).abs() < 1e-9);
    }

    #[test]
    fn map_rejects_bad_grid() {
        let lens = LensSpec::normalized(PI / 3.0).unwrap();
        let bad = MapGrid { extent: 1.0, resolution: 1 };
        assert!(coupling_map((Axis::X, Axis::X), Plane::Xz, &bad, &lens, &spec()).is_err());
        let huge = MapGrid { extent: 25.0, resolution: 3 };
        assert!(coupling_map((Axis::X, Axis::X), Plane::Xz, &huge, &lens, &spec()).is_err());
    }

    #[test]
    fn bilinearity_in_orientations() {
        let lens = LensSpec::normalized(1.0).unwrap();
        let fc = effective_coords(&Vec3::new(0.4, 0.1, -0.3), &Vec3::new(-0.2, 0.5, 0.6));
        let g: ComplexMat3 = g_matrix(&fc, lens.wavenumber(), lens.theta_max(), &spec()).unwrap();
        let a = Vec3::new(0.3, -0.7, 0.2);
        let b = Vec3::new(-0.1, 0.4, 0.9);
        let v = Vec3::new(0.5, 0.5, -0.2);
        let lhs = g.bilinear(&(a.scale(2.0) + b.scale(-3.0)), &v);
        let rhs = g.bilinear(&a, &v) * 2.0 - g.bilinear(&b, &v) * 3.0;
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn extremum_search() {
        let grid = linspace(0.0, 6.0, 61);
        let values: Vec<f64> = grid.iter().map(|x| x.sin()).collect();
        let i = nearest_local_max(&grid, &values, 1.0).unwrap();
        assert!((grid[i] - 1.6).abs() < 1e-12);
        let j = nearest_local_min(&grid, &values, 5.0).unwrap();
        assert!((grid[j] - 4.7).abs() < 1e-12);
        assert_eq!(nearest_local_max(&grid[..3], &[0.0, 1.0, 2.0], 0.0), None);
    }
}
