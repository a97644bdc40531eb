//! Electromagnetic Green's tensors.
//!
//! Two families live here: the free-space dyadic Green's tensor (with its
//! near-, intermediate- and far-field split) and the point-spread tensor of
//! an aplanatic lens with equal focal lengths, which connects a point in one
//! focal zone to a point in the other.
//!
//! Lengths are dimensionless in units of the drive wavelength unless a
//! caller supplies a [`LensSpec`] with physical units.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{bessel_j012, integrate_polar_many, NumericsError, QuadratureSpec};

/// Largest distance from a focal origin (in drive wavelengths) for which the
/// focal-zone expansion is trusted.
pub const FOCAL_ZONE_LIMIT: f64 = 20.0;

/// Minimum focal length in units of the drive wavelength.
pub const MIN_FOCAL_RATIO: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreensError {
    #[error("source and field points coincide (R = 0)")]
    Singular,
    #[error("position {0:?} lies outside the focal zone (|r| > {1} wavelengths)")]
    OutsideFocalZone(Vec3, f64),
    #[error("invalid lens: {0}")]
    InvalidLens(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Quadrature(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const X: Vec3 = Vec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

/// 3×3 complex tensor, row-major over (x, y, z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMat3(pub [[Complex64; 3]; 3]);

impl Default for ComplexMat3 {
    fn default() -> Self {
        Self::zeros()
    }
}

impl ComplexMat3 {
    pub fn zeros() -> Self {
        ComplexMat3([[Complex64::new(0.0, 0.0); 3]; 3])
    }

    pub fn identity() -> Self {
        Self::diagonal([Complex64::new(1.0, 0.0); 3])
    }

    pub fn diagonal(d: [Complex64; 3]) -> Self {
        let mut m = Self::zeros();
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    /// Outer product `a bᵀ` of two real vectors.
    pub fn outer(a: &Vec3, b: &Vec3) -> Self {
        let (a, b) = (a.as_array(), b.as_array());
        Self(a.map(|ai| b.map(|bj| Complex64::new(ai * bj, 0.0))))
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|v| *v *= s);
        m
    }

    pub fn matmul(&self, other: &ComplexMat3) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        m
    }

    pub fn apply(&self, v: &Vec3) -> [Complex64; 3] {
        let v = v.as_array();
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = row.iter().zip(v).map(|(m, x)| m * x).sum();
        }
        out
    }

    /// The bilinear form `u · M · v` for real vectors.
    pub fn bilinear(&self, u: &Vec3, v: &Vec3) -> Complex64 {
        let mv = self.apply(v);
        u.as_array().iter().zip(mv).map(|(a, b)| b * a).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &ComplexMat3) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn entries(&self) -> impl Iterator<Item = &Complex64> {
        self.0.iter().flatten()
    }
}

impl Index<(usize, usize)> for ComplexMat3 {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMat3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.0[i][j]
    }
}

impl Add for ComplexMat3 {
    type Output = ComplexMat3;
    fn add(self, o: ComplexMat3) -> ComplexMat3 {
        let mut m = self;
        for (a, b) in m.0.iter_mut().flatten().zip(o.0.iter().flatten()) {
            *a += b;
        }
        m
    }
}

impl Sub for ComplexMat3 {
    type Output = ComplexMat3;
    fn sub(self, o: ComplexMat3) -> ComplexMat3 {
        let mut m = self;
        for (a, b) in m.0.iter_mut().flatten().zip(o.0.iter().flatten()) {
            *a -= b;
        }
        m
    }
}

impl Mul<Complex64> for ComplexMat3 {
    type Output = ComplexMat3;
    fn mul(self, s: Complex64) -> ComplexMat3 {
        self.scale(s)
    }
}

// ---------------------------------------------------------------------------
// Free space
// ---------------------------------------------------------------------------

/// Near-, intermediate- and far-field pieces of the free-space tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeSpaceParts {
    pub near: ComplexMat3,
    pub intermediate: ComplexMat3,
    pub far: ComplexMat3,
}

impl FreeSpaceParts {
    pub fn total(&self) -> ComplexMat3 {
        self.near + self.intermediate + self.far
    }
}

fn separation(r: &Vec3, r0: &Vec3, k: f64) -> Result<(Vec3, f64), GreensError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(GreensError::InvalidArgument(format!("wavenumber k = {k}")));
    }
    let d = *r - *r0;
    let dist = d.norm();
    if !dist.is_finite() {
        return Err(GreensError::InvalidArgument("non-finite position".into()));
    }
    if dist == 0.0 {
        return Err(GreensError::Singular);
    }
    Ok((d, dist))
}

/// Full free-space dyadic Green's tensor `G(r, r0)` at wavenumber `k`.
pub fn free_space_full(r: &Vec3, r0: &Vec3, k: f64) -> Result<ComplexMat3, GreensError> {
    let (d, dist) = separation(r, r0, k)?;
    let kr = k * dist;
    let i = Complex64::i();
    let pre = Complex64::from_polar(1.0 / (4.0 * PI * dist), kr);
    let kr2 = kr * kr;
    let a = Complex64::new(1.0, 0.0) + (i * kr - 1.0) / kr2;
    let b = (Complex64::new(3.0 - kr2, 0.0) - i * (3.0 * kr)) / kr2;
    let rr = ComplexMat3::outer(&d, &d).scale(Complex64::new(1.0 / (dist * dist), 0.0));
    Ok((ComplexMat3::identity().scale(a) + rr.scale(b)).scale(pre))
}

/// The free-space tensor split by its `1/(kR)³`, `1/(kR)²` and `1/(kR)`
/// dependence.
pub fn free_space_parts(r: &Vec3, r0: &Vec3, k: f64) -> Result<FreeSpaceParts, GreensError> {
    let (d, dist) = separation(r, r0, k)?;
    let kr = k * dist;
    let pre = Complex64::from_polar(1.0 / (4.0 * PI * dist), kr);
    let id = ComplexMat3::identity();
    let rr = ComplexMat3::outer(&d, &d).scale(Complex64::new(1.0 / (dist * dist), 0.0));
    let one = Complex64::new(1.0, 0.0);
    let three_rr_minus_id = rr.scale(Complex64::new(3.0, 0.0)) - id;
    let near = three_rr_minus_id.scale(pre / (kr * kr));
    let intermediate = three_rr_minus_id.scale(-pre * Complex64::i() / kr);
    let far = (id - rr).scale(pre * one);
    Ok(FreeSpaceParts {
        near,
        intermediate,
        far,
    })
}

/// `Im G(r, r)`: the coincident-point limit `(k / 6π) I` of the imaginary
/// part of the free-space tensor, returned as a real-valued tensor.
pub fn free_space_imag_coincident(k: f64) -> ComplexMat3 {
    ComplexMat3::identity().scale(Complex64::new(k / (6.0 * PI), 0.0))
}

// ---------------------------------------------------------------------------
// Lens point-spread tensor
// ---------------------------------------------------------------------------

/// Relative cylindrical coordinates between two focal-zone points, each
/// measured from its own focal origin.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FocalCoords {
    pub rho: f64,
    pub phi: f64,
    pub z: f64,
}

impl FocalCoords {
    pub fn origin() -> Self {
        Self::default()
    }

    pub fn on_axis(z: f64) -> Self {
        Self { rho: 0.0, phi: 0.0, z }
    }
}

/// Effective coordinates of `r_i` relative to `r_j`.
///
/// The azimuth is quadrant-correct and set to zero when `rho = 0`.
pub fn effective_coords(r_i: &Vec3, r_j: &Vec3) -> FocalCoords {
    let d = *r_i - *r_j;
    let rho = d.x.hypot(d.y);
    let phi = if rho == 0.0 { 0.0 } else { d.y.atan2(d.x) };
    FocalCoords { rho, phi, z: d.z }
}

/// The four polar integrals of the focal-field expansion at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsfIntegrals {
    pub i1: Complex64,
    pub i2: Complex64,
    pub i3: Complex64,
    pub i4: Complex64,
}

impl PsfIntegrals {
    pub fn as_array(&self) -> [Complex64; 4] {
        [self.i1, self.i2, self.i3, self.i4]
    }
}

/// Node count needed to resolve the fastest phase `k (|z| + rho)` over the
/// polar range.
fn oscillation_guard(fc: &FocalCoords, k: f64) -> usize {
    let periods = k * (fc.z.abs() + fc.rho) / (2.0 * PI);
    8 * periods.ceil() as usize + 16
}

fn check_aperture(theta_max: f64) -> Result<(), GreensError> {
    if !(theta_max > 0.0 && theta_max <= FRAC_PI_2 + 1e-15) {
        return Err(GreensError::InvalidLens(format!(
            "theta_max = {theta_max} outside (0, pi/2]"
        )));
    }
    Ok(())
}

/// Evaluate I₁…I₄ at effective coordinates `fc`, using `|z|` in the phase.
pub fn psf_integrals(
    fc: &FocalCoords,
    k: f64,
    theta_max: f64,
    spec: &QuadratureSpec,
) -> Result<PsfIntegrals, GreensError> {
    check_aperture(theta_max)?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(GreensError::InvalidArgument(format!("wavenumber k = {k}")));
    }
    if !(fc.rho >= 0.0 && fc.rho.is_finite() && fc.z.is_finite() && fc.phi.is_finite()) {
        return Err(GreensError::InvalidArgument(format!("focal coordinates {fc:?}")));
    }
    let kz = k * fc.z.abs();
    let krho = k * fc.rho;
    let kernel = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let phase = Complex64::from_polar(1.0, kz * c);
        let [j0, j1, j2] = bessel_j012(krho * s);
        [
            phase * (s * (1.0 + c * c) * j0),
            phase * (s * (1.0 - c * c) * j2),
            phase * (s * s * c * j1),
            phase * (s * s * s * j0),
        ]
    };
    let est = integrate_polar_many(kernel, theta_max, oscillation_guard(fc, k), spec)?;
    let [i1, i2, i3, i4] = est.value;
    Ok(PsfIntegrals { i1, i2, i3, i4 })
}

/// Assemble the dimensionless tensor `ḡ` from the four integrals and the
/// azimuth `phi`.
pub fn g_from_integrals(ints: &PsfIntegrals, phi: f64) -> ComplexMat3 {
    let i = Complex64::i();
    let (s1, c1) = phi.sin_cos();
    let (s2, c2) = (2.0 * phi).sin_cos();
    let PsfIntegrals { i1, i2, i3, i4 } = *ints;
    let xz = -2.0 * i * i3 * c1;
    let yz = -2.0 * i * i3 * s1;
    let m = ComplexMat3([
        [i1 + i2 * c2, i2 * s2, xz],
        [i2 * s2, i1 - i2 * c2, yz],
        [xz, yz, i4 * 2.0],
    ]);
    m.scale(i)
}

/// The dimensionless point-spread tensor `ḡ` at effective coordinates `fc`.
pub fn g_matrix(
    fc: &FocalCoords,
    k: f64,
    theta_max: f64,
    spec: &QuadratureSpec,
) -> Result<ComplexMat3, GreensError> {
    let ints = psf_integrals(fc, k, theta_max, spec)?;
    Ok(g_from_integrals(&ints, fc.phi))
}

/// An ideal aplanatic lens with equal focal lengths on both sides, in vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensSpec {
    theta_max: f64,
    focal_length: f64,
    wavelength: f64,
}

impl LensSpec {
    pub fn new(theta_max: f64, focal_length: f64, wavelength: f64) -> Result<Self, GreensError> {
        check_aperture(theta_max)?;
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(GreensError::InvalidLens(format!("wavelength = {wavelength}")));
        }
        if !(focal_length.is_finite() && focal_length / wavelength >= MIN_FOCAL_RATIO) {
            return Err(GreensError::InvalidLens(format!(
                "focal length {focal_length} must be at least {MIN_FOCAL_RATIO} wavelengths"
            )));
        }
        Ok(Self {
            theta_max,
            focal_length,
            wavelength,
        })
    }

    /// Lens in wavelength units (`λ_D = 1`) with a focal length of 10⁴ λ_D.
    pub fn normalized(theta_max: f64) -> Result<Self, GreensError> {
        Self::new(theta_max, 1e4, 1.0)
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn focal_length(&self) -> f64 {
        self.focal_length
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn numerical_aperture(&self) -> f64 {
        self.theta_max.sin()
    }

    /// Reject positions farther than [`FOCAL_ZONE_LIMIT`] wavelengths from
    /// their focal origin.
    pub fn check_focal_zone(&self, r: &Vec3) -> Result<(), GreensError> {
        if !r.is_finite() || r.norm() > FOCAL_ZONE_LIMIT * self.wavelength {
            return Err(GreensError::OutsideFocalZone(*r, FOCAL_ZONE_LIMIT));
        }
        Ok(())
    }
}

/// Point-spread Green's tensor `(k_D / 8π) ḡ` between `r_i` and `r_j`, in
/// inverse length units of the lens.
pub fn psf_green(
    r_i: &Vec3,
    r_j: &Vec3,
    lens: &LensSpec,
    spec: &QuadratureSpec,
) -> Result<ComplexMat3, GreensError> {
    lens.check_focal_zone(r_i)?;
    lens.check_focal_zone(r_j)?;
    let k = lens.wavenumber();
    let fc = effective_coords(r_i, r_j);
    let g = g_matrix(&fc, k, lens.theta_max(), spec)?;
    Ok(g.scale(Complex64::new(k / (8.0 * PI), 0.0)))
}

/// Rotation by `chi` about the optical axis.
pub fn rotation_about_axis(chi: f64) -> ComplexMat3 {
    let (s, c) = chi.sin_cos();
    let r = |v: f64| Complex64::new(v, 0.0);
    ComplexMat3([
        [r(c), r(-s), r(0.0)],
        [r(s), r(c), r(0.0)],
        [r(0.0), r(0.0), r(1.0)],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-6;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn full_tensor_on_axis_closed_form() {
        let k = 1.0;
        let r = Vec3::new(0.0, 0.0, 2.0 * PI);
        let g = free_space_full(&r, &Vec3::ZERO, k).unwrap();
        let kr: f64 = 2.0 * PI;
        let pre = Complex64::from_polar(1.0 / (4.0 * PI * kr), kr);
        let a = c(1.0, 0.0) + (c(0.0, kr) - 1.0) / (kr * kr);
        let b = c(3.0 - kr * kr, -3.0 * kr) / (kr * kr);
        let expected_zz = pre * (a + b);
        assert!((g[(2, 2)] - expected_zz).norm() < 1e-15);
        let expected_xx = pre * a;
        assert!((g[(0, 0)] - expected_xx).norm() < 1e-15);
        assert!(g[(0, 1)].norm() < 1e-18);
    }

    #[test]
    fn full_tensor_rejects_coincident_points() {
        let r = Vec3::new(0.3, 0.1, 0.0);
        assert_eq!(free_space_full(&r, &r, 1.0), Err(GreensError::Singular));
        assert!(matches!(free_space_parts(&r, &r, 2.0), Err(GreensError::Singular)));
    }

    #[test]
    fn far_field_on_axis_is_transverse_projector() {
        let k = 2.0 * PI;
        let r = Vec3::new(0.0, 0.0, 3.0);
        let ff = free_space_parts(&r, &Vec3::ZERO, k).unwrap().far;
        let pre = Complex64::from_polar(1.0 / (4.0 * PI * 3.0), k * 3.0);
        let expected = ComplexMat3::diagonal([pre, pre, c(0.0, 0.0)]);
        assert!(ff.max_abs_diff(&expected) < 1e-16);
    }

    #[test]
    fn near_field_fraction_at_large_distance() {
        let k = 1.0;
        let r = Vec3::new(1000.0, 0.0, 0.0);
        let parts = free_space_parts(&r, &Vec3::ZERO, k).unwrap();
        // ‖3R̂R̂ − I‖ = √6 and ‖I − R̂R̂‖ = √2 for any direction, so the ratio is √3/(kR)².
        let ratio_axis = parts.near.norm() / parts.far.norm();
        assert!((ratio_axis - 3f64.sqrt() * 1e-6).abs() < 1e-12);
        let diag = Vec3::new(1.0, 1.0, 1.0).scale(1000.0 / 3f64.sqrt());
        let pd = free_space_parts(&diag, &Vec3::ZERO, k).unwrap();
        let ratio = pd.near.norm() / pd.far.norm();
        assert!(ratio <= 2e-6);
    }

    #[test]
    fn coincident_imag_limit() {
        let k = 2.0 * PI;
        let lim = free_space_imag_coincident(k);
        // Im G along any direction approaches k/6π as R → 0.
        let g = free_space_full(&Vec3::new(1e-4, 0.0, 0.0), &Vec3::ZERO, k).unwrap();
        for i in 0..3 {
            assert!((g[(i, i)].im - lim[(i, i)].re).abs() < 1e-6);
        }
    }

    #[test]
    fn effective_coords_examples() {
        assert_eq!(effective_coords(&Vec3::ZERO, &Vec3::ZERO), FocalCoords::origin());
        let fc = effective_coords(&Vec3::X, &Vec3::ZERO);
        assert_eq!(fc, FocalCoords { rho: 1.0, phi: 0.0, z: 0.0 });
        let fc = effective_coords(&Vec3::ZERO, &Vec3::new(1.0, 1.0, 0.0));
        assert!((fc.rho - 2f64.sqrt()).abs() < 1e-15);
        assert!((fc.phi + 3.0 * PI / 4.0).abs() < 1e-15);
        assert_eq!(fc.z, 0.0);
    }

    #[test]
    fn integrals_at_focus_match_closed_forms() {
        let spec = QuadratureSpec::default();
        let k = 2.0 * PI;
        let ints = psf_integrals(&FocalCoords::origin(), k, PI / 3.0, &spec).unwrap();
        assert!((ints.i1 - c(19.0 / 24.0, 0.0)).norm() < TOL);
        assert!(ints.i2.norm() < 1e-15);
        assert!(ints.i3.norm() < 1e-15);
        assert!((ints.i4 - c(5.0 / 24.0, 0.0)).norm() < TOL);

        let full = psf_integrals(&FocalCoords::origin(), k, PI / 2.0, &spec).unwrap();
        assert!((full.i1 - c(4.0 / 3.0, 0.0)).norm() < 1e-12);
        assert!((full.i4 - c(2.0 / 3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn on_axis_transverse_integrals_vanish() {
        let spec = QuadratureSpec::default();
        for z in [-3.3, 0.7, 12.0] {
            let ints = psf_integrals(&FocalCoords::on_axis(z), 2.0 * PI, 1.0, &spec).unwrap();
            assert_eq!(ints.i2, c(0.0, 0.0));
            assert_eq!(ints.i3, c(0.0, 0.0));
        }
    }

    #[test]
    fn g_at_focus() {
        let spec = QuadratureSpec::default();
        let g = g_matrix(&FocalCoords::origin(), 2.0 * PI, PI / 3.0, &spec).unwrap();
        let expected = ComplexMat3::diagonal([c(0.0, 19.0 / 24.0), c(0.0, 19.0 / 24.0), c(0.0, 5.0 / 12.0)]);
        assert!(g.max_abs_diff(&expected) < TOL);
    }

    #[test]
    fn g_is_symmetric() {
        let spec = QuadratureSpec::default();
        let fc = FocalCoords { rho: 0.83, phi: 2.1, z: -1.4 };
        let g = g_matrix(&fc, 2.0 * PI, 1.2, &spec).unwrap();
        assert_eq!(g, g.transpose());
    }

    #[test]
    fn psf_green_at_focus() {
        let spec = QuadratureSpec::default();
        let lens = LensSpec::normalized(PI / 3.0).unwrap();
        let g = psf_green(&Vec3::ZERO, &Vec3::ZERO, &lens, &spec).unwrap();
        let kd = 2.0 * PI;
        let expected = kd / (8.0 * PI) * 19.0 / 24.0;
        assert!((g[(0, 0)] - c(0.0, expected)).norm() < TOL);
    }

    #[test]
    fn psf_green_vanishes_for_tiny_aperture() {
        let spec = QuadratureSpec::default();
        let lens = LensSpec::normalized(1e-3).unwrap();
        let g = psf_green(&Vec3::new(0.2, -0.1, 0.5), &Vec3::ZERO, &lens, &spec).unwrap();
        assert!(g.norm() <= 1e-6 * lens.wavenumber());
    }

    #[test]
    fn focal_zone_guard() {
        let spec = QuadratureSpec::default();
        let lens = LensSpec::normalized(1.0).unwrap();
        let far = Vec3::new(0.0, 0.0, 20.5);
        assert!(matches!(
            psf_green(&far, &Vec3::ZERO, &lens, &spec),
            Err(GreensError::OutsideFocalZone(..))
        ));
        assert!(psf_green(&Vec3::new(0.0, 0.0, 19.9), &Vec3::ZERO, &lens, &spec).is_ok());
    }

    #[test]
    fn lens_validation() {
        assert!(LensSpec::new(0.0, 1e4, 1.0).is_err());
        assert!(LensSpec::new(1.7, 1e4, 1.0).is_err());
        assert!(LensSpec::new(1.0, 50.0, 1.0).is_err());
        assert!(LensSpec::new(1.0, 1e-2, 852e-9).is_ok());
        let lens = LensSpec::normalized(PI / 3.0).unwrap();
        assert!((lens.numerical_aperture() - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn aperture_monotonicity_of_i1_at_focus() {
        let spec = QuadratureSpec::default();
        let mut last = 0.0;
        for i in 1..=30 {
            let theta = FRAC_PI_2 * i as f64 / 30.0;
            let v = psf_integrals(&FocalCoords::origin(), 2.0 * PI, theta, &spec)
                .unwrap()
                .i1
                .re;
            assert!(v > last);
            last = v;
        }
    }
}
