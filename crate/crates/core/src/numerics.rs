//! Special functions and quadrature shared by the physics modules.
//!
//! Bessel functions of the first kind are provided for orders 0, 1 and 2
//! only, which is all the focal-field kernels need. The polar integrals are
//! computed with composite Gauss-Legendre rules whose panel count doubles
//! until two successive estimates agree.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

/// Environment variable that overrides the default relative quadrature tolerance.
pub const QUAD_TOL_ENV: &str = "LENSCOUPLED_QUAD_TOL";

/// Number of Gauss-Legendre nodes per panel.
const GL_ORDER: usize = 16;

/// Below this argument the ascending series is used.
const SERIES_LIMIT: f64 = 1.0;
/// Above this argument the Hankel asymptotic expansion is used.
const ASYMPTOTIC_LIMIT: f64 = 25.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
    #[error(
        "quadrature did not converge after {refinements} refinements \
         (previous = {previous}, last = {last})"
    )]
    NonConvergence {
        refinements: u32,
        previous: Complex64,
        last: Complex64,
    },
}

/// Stopping rule for the adaptive polar quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub max_refinements: u32,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            max_refinements: 14,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
        }
    }
}

impl QuadratureSpec {
    pub fn new(max_refinements: u32, rel_tol: f64, abs_tol: f64) -> Result<Self, NumericsError> {
        let spec = Self {
            max_refinements,
            rel_tol,
            abs_tol,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        if self.max_refinements < 1 {
            return Err(NumericsError::InvalidSpec(
                "max_refinements must be at least 1".into(),
            ));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(NumericsError::InvalidSpec(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(NumericsError::InvalidSpec(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        Ok(())
    }

    /// Default spec with `rel_tol` taken from `LENSCOUPLED_QUAD_TOL` when set.
    pub fn from_env() -> Result<Self, NumericsError> {
        let mut spec = Self::default();
        if let Ok(raw) = std::env::var(QUAD_TOL_ENV) {
            spec.rel_tol = raw.trim().parse().map_err(|_| {
                NumericsError::InvalidSpec(format!("{QUAD_TOL_ENV}={raw:?} is not a number"))
            })?;
            spec.validate()?;
        }
        Ok(spec)
    }
}

/// Result of an adaptive integration: the finest estimate and the size of
/// the last refinement step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate<const N: usize> {
    pub value: [Complex64; N],
    pub error: f64,
    pub nodes: usize,
}

// ---------------------------------------------------------------------------
// Bessel functions
// ---------------------------------------------------------------------------

/// Bessel function of the first kind `J_n(x)` for `n` in {0, 1, 2}.
pub fn bessel_j(order: u32, x: f64) -> Result<f64, NumericsError> {
    if !x.is_finite() {
        return Err(NumericsError::Domain(format!("bessel_j argument {x}")));
    }
    if order > 2 {
        return Err(NumericsError::Domain(format!(
            "bessel_j order {order} not in {{0, 1, 2}}"
        )));
    }
    Ok(bessel_j012(x)[order as usize])
}

/// `[J_0(x), J_1(x), J_2(x)]` for finite `x`.
///
/// Ascending series for `|x| <= 1`, Miller backward recurrence up to
/// `|x| = 25`, Hankel asymptotic expansion beyond.
pub fn bessel_j012(x: f64) -> [f64; 3] {
    let ax = x.abs();
    let mut j = if ax <= SERIES_LIMIT {
        [series(0, ax), series(1, ax), series(2, ax)]
    } else if ax <= ASYMPTOTIC_LIMIT {
        miller(ax)
    } else {
        [hankel(0, ax), hankel(1, ax), hankel(2, ax)]
    };
    if x < 0.0 {
        j[1] = -j[1];
    }
    j
}

fn series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=order {
        term *= half / k as f64;
    }
    let q = half * half;
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * (k + order as f64));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || k > 60.0 {
            break;
        }
    }
    sum
}

fn miller(x: f64) -> [f64; 3] {
    // Even start order well above x keeps the recurrence in its stable regime.
    let start = ((x + 30.0 + (40.0 * x).sqrt()) as usize / 2) * 2;
    let mut next = 0.0_f64;
    let mut cur = 1e-30_f64;
    let mut norm = 0.0;
    let mut out = [0.0; 3];
    let mut k = start;
    loop {
        if k <= 2 {
            out[k] = cur;
        }
        if k.is_multiple_of(2) {
            norm += if k == 0 { cur } else { 2.0 * cur };
        }
        if k == 0 {
            break;
        }
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            for v in &mut out {
                *v *= 1e-250;
            }
        }
    }
    [out[0] / norm, out[1] / norm, out[2] / norm]
}

fn hankel(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut k = 1usize;
    loop {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() && k > 2 {
            break;
        }
        term = next;
        // P collects even k with alternating sign, Q collects odd k.
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
        k += 1;
    }
    let chi = x - order as f64 * FRAC_PI_2 - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

fn gauss_legendre() -> &'static ([f64; GL_ORDER], [f64; GL_ORDER]) {
    static RULE: OnceLock<([f64; GL_ORDER], [f64; GL_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut nodes = [0.0; GL_ORDER];
        let mut weights = [0.0; GL_ORDER];
        for i in 0..n {
            let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, t);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
                let dt = p1 / dp;
                t -= dt;
                if dt.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = t;
            weights[i] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
        (nodes, weights)
    })
}

fn composite<const N: usize, F>(kernel: &F, a: f64, b: f64, panels: usize) -> [Complex64; N]
where
    F: Fn(f64) -> [Complex64; N],
{
    let (nodes, weights) = gauss_legendre();
    let h = (b - a) / panels as f64;
    let mut acc = [Complex64::new(0.0, 0.0); N];
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (t, w) in nodes.iter().zip(weights) {
            let f = kernel(mid + 0.5 * h * t);
            for (s, v) in acc.iter_mut().zip(f) {
                *s += v * *w;
            }
        }
    }
    for s in &mut acc {
        *s *= 0.5 * h;
    }
    acc
}

fn max_norm<const N: usize>(v: &[Complex64; N]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Adaptive composite Gauss-Legendre integration of a vector-valued kernel
/// over `[a, b]`.
///
/// The panel count starts at `ceil(min_nodes / 16)` and doubles until all
/// components of two consecutive estimates agree within `rel_tol` (or
/// `abs_tol` near zero).
pub fn integrate_interval<const N: usize, F>(
    kernel: F,
    a: f64,
    b: f64,
    min_nodes: usize,
    spec: &QuadratureSpec,
) -> Result<QuadratureEstimate<N>, NumericsError>
where
    F: Fn(f64) -> [Complex64; N],
{
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(NumericsError::Domain(format!("interval [{a}, {b}]")));
    }
    let mut panels = min_nodes.div_ceil(GL_ORDER).max(1);
    let mut previous = composite(&kernel, a, b, panels);
    for _ in 0..spec.max_refinements {
        panels *= 2;
        let current = composite(&kernel, a, b, panels);
        let diff = previous
            .iter()
            .zip(&current)
            .map(|(p, c)| (c - p).norm())
            .fold(0.0, f64::max);
        let scale = max_norm(&current);
        if !diff.is_finite() || !scale.is_finite() {
            return Err(NumericsError::Domain("kernel produced a non-finite value".into()));
        }
        if diff <= spec.abs_tol.max(spec.rel_tol * scale) {
            return Ok(QuadratureEstimate {
                value: current,
                error: diff + 4.0 * f64::EPSILON * scale,
                nodes: panels * GL_ORDER,
            });
        }
        previous = current;
        if panels > (1 << 24) {
            break;
        }
    }
    let last = composite(&kernel, a, b, panels);
    Err(NumericsError::NonConvergence {
        refinements: spec.max_refinements,
        previous: previous[0],
        last: last[0],
    })
}

fn check_theta_max(theta_max: f64) -> Result<(), NumericsError> {
    if !(theta_max > 0.0 && theta_max <= FRAC_PI_2 + 1e-15) {
        return Err(NumericsError::Domain(format!(
            "theta_max = {theta_max} outside (0, pi/2]"
        )));
    }
    Ok(())
}

/// `∫₀^θmax kernel(θ) dθ` for a scalar complex kernel.
pub fn integrate_polar<F>(
    kernel: F,
    theta_max: f64,
    spec: &QuadratureSpec,
) -> Result<Complex64, NumericsError>
where
    F: Fn(f64) -> Complex64,
{
    check_theta_max(theta_max)?;
    integrate_interval(|t| [kernel(t)], 0.0, theta_max, GL_ORDER, spec).map(|e| e.value[0])
}

/// Polar integral of several kernels sharing one node set, with an explicit
/// minimum node count (used as an oscillation guard by the callers).
pub fn integrate_polar_many<const N: usize, F>(
    kernel: F,
    theta_max: f64,
    min_nodes: usize,
    spec: &QuadratureSpec,
) -> Result<QuadratureEstimate<N>, NumericsError>
where
    F: Fn(f64) -> [Complex64; N],
{
    check_theta_max(theta_max)?;
    integrate_interval(kernel, 0.0, theta_max, min_nodes, spec)
}

/// Deviation of a numerically integrated azimuthal Fourier-Bessel integral
/// from its closed form `2π iⁿ Jₙ(x) {cos, sin}(nφ)`; the larger of the
/// cosine and sine residuals is returned.
pub fn azimuthal_identity_residual(n: u32, x: f64, phi: f64) -> Result<f64, NumericsError> {
    if n > 2 {
        return Err(NumericsError::Domain(format!("order {n} not in {{0, 1, 2}}")));
    }
    if !(x.is_finite() && phi.is_finite()) {
        return Err(NumericsError::Domain(format!("x = {x}, phi = {phi}")));
    }
    let nf = n as f64;
    let spec = QuadratureSpec {
        max_refinements: 16,
        rel_tol: 1e-13,
        abs_tol: 1e-14,
    };
    let kernel = |p: f64| {
        let phase = Complex64::from_polar(1.0, x * (p - phi).cos());
        [phase * (nf * p).cos(), phase * (nf * p).sin()]
    };
    let min_nodes = 2 * GL_ORDER + 4 * x.abs().ceil() as usize;
    let est = integrate_interval(kernel, 0.0, 2.0 * PI, min_nodes, &spec)?;
    let base = Complex64::i().powu(n) * (2.0 * PI * bessel_j(n, x)?);
    let cos_res = (est.value[0] - base * (nf * phi).cos()).norm();
    let sin_res = (est.value[1] - base * (nf * phi).sin()).norm();
    Ok(cos_res.max(sin_res))
}
