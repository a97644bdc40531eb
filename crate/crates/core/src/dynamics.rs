//! Driven two-atom steady state.
//!
//! Atom A1 sits at one focus and is driven with Rabi frequency `Ω` at
//! detuning `δ = ω₀ − ω_D`; atom A2 at the other focus couples to it through
//! `G₁₂ = J₁₂/ħ + iΓ₁₂/2`. Rates are angular frequencies in any consistent
//! unit (rad/s, or multiples of `Γ` with `Γ = 1`).
//!
//! Two independent routes are provided: the closed-form low-saturation
//! solution and a dense Lindblad master-equation solve on the 4-level
//! product space, which serves as the oracle for the former.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Largest saturation parameter accepted by [`DriveSpec::from_saturation`].
pub const MAX_SATURATION: f64 = 0.3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("singular parameters: {0}")]
    Singular(String),
    #[error("invalid drive: {0}")]
    InvalidDrive(String),
    #[error("unphysical dissipator: |Γ12| = {gamma12} exceeds Γ = {gamma}")]
    Unphysical { gamma12: f64, gamma: f64 },
    #[error("Liouvillian null space is not one-dimensional (singular values {smallest:e}, {second:e})")]
    Rank { smallest: f64, second: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Drive on A1: detuning and Rabi frequency, optionally remembering the
/// saturation parameter it was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSpec {
    delta: f64,
    rabi: f64,
    saturation: Option<f64>,
}

impl DriveSpec {
    pub fn from_rabi(delta: f64, rabi: f64) -> Result<Self, DynamicsError> {
        if !(delta.is_finite() && rabi.is_finite() && rabi >= 0.0) {
            return Err(DynamicsError::InvalidDrive(format!(
                "detuning {delta}, Rabi frequency {rabi}"
            )));
        }
        Ok(Self {
            delta,
            rabi,
            saturation: None,
        })
    }

    /// Drive whose lone-atom excited population is `s²`; requires
    /// `0 < s ≤ 0.3`.
    pub fn from_saturation(delta: f64, s: f64, gamma: f64) -> Result<Self, DynamicsError> {
        if !(s > 0.0 && s <= MAX_SATURATION) {
            return Err(DynamicsError::InvalidDrive(format!(
                "saturation {s} outside (0, {MAX_SATURATION}]"
            )));
        }
        let rabi = omega_for_saturation(s, delta, gamma)?;
        Ok(Self {
            delta,
            rabi,
            saturation: Some(s),
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    pub fn saturation(&self) -> Option<f64> {
        self.saturation
    }
}

/// `Ω = s √(δ² + Γ²/4)`.
pub fn omega_for_saturation(s: f64, delta: f64, gamma: f64) -> Result<f64, DynamicsError> {
    if !(s > 0.0 && s.is_finite() && delta.is_finite() && gamma > 0.0 && gamma.is_finite()) {
        return Err(DynamicsError::InvalidDrive(format!(
            "saturation {s}, detuning {delta}, decay rate {gamma}"
        )));
    }
    Ok(s * delta.hypot(gamma / 2.0))
}

/// Steady-state expectation values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    /// `⟨σ₋⁽¹⁾⟩`
    pub sigma1: Complex64,
    /// `⟨σ₋⁽²⁾⟩`
    pub sigma2: Complex64,
    /// `⟨σ₊⁽¹⁾σ₋⁽¹⁾⟩`
    pub n1: f64,
    /// `⟨σ₊⁽²⁾σ₋⁽²⁾⟩`
    pub n2: f64,
    /// `⟨σ₊⁽¹⁾σ₋⁽²⁾⟩`
    pub corr: Complex64,
    /// `2 Re corr`
    pub xi: f64,
}

impl SteadyState {
    /// Largest coherence amplitude scaled by the slowest collective decay,
    /// `max(|σ₁|, |σ₂|) √(Γ / (Γ − |Γ₁₂|))`; the closed-form solution needs
    /// this small, not only `s`. Infinite when `|Γ₁₂| ≥ Γ`.
    pub fn collective_saturation(&self, g12_over_gamma: Complex64) -> f64 {
        let slowest = 1.0 - 2.0 * g12_over_gamma.im.abs();
        if slowest <= 0.0 {
            return f64::INFINITY;
        }
        self.sigma1.norm().max(self.sigma2.norm()) / slowest.sqrt()
    }
}

/// Which closed-form system to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnalyticMode {
    /// A2's coherence equation without a detuning term.
    #[default]
    AsPrinted,
    /// Both coherences rotate at the detuning.
    FullDetuning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrelationEstimator {
    /// `(αβ + 2|G|²β*) / (|α|² − 4|G|⁴)`
    AlphaBeta,
    /// `⟨σ₊⁽¹⁾⟩⟨σ₋⁽²⁾⟩`
    #[default]
    Factorized,
}

fn check_inputs(g12: Complex64, drive: &DriveSpec, gamma: f64) -> Result<(), DynamicsError> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(DynamicsError::InvalidArgument(format!("decay rate {gamma}")));
    }
    if !(g12.re.is_finite() && g12.im.is_finite()) {
        return Err(DynamicsError::InvalidArgument(format!("coupling {g12}")));
    }
    if !(drive.delta.is_finite() && drive.rabi.is_finite()) {
        return Err(DynamicsError::InvalidDrive(format!("{drive:?}")));
    }
    Ok(())
}

fn nonzero(z: Complex64, what: &str) -> Result<Complex64, DynamicsError> {
    if z.norm() <= f64::EPSILON * 1e3 || !z.is_finite() {
        return Err(DynamicsError::Singular(format!("{what} = {z}")));
    }
    Ok(z)
}

/// Coherences `(⟨σ₋⁽¹⁾⟩, ⟨σ₋⁽²⁾⟩)` of the linearized low-saturation system.
/// `g12` is in the same units as `gamma`.
fn coherences(
    g12: Complex64,
    drive: &DriveSpec,
    gamma: f64,
    mode: AnalyticMode,
) -> Result<(Complex64, Complex64), DynamicsError> {
    let omega = drive.rabi;
    let free = Complex64::new(-gamma / 2.0, drive.delta);
    match mode {
        AnalyticMode::AsPrinted => {
            let den = nonzero(free - 2.0 * g12 * g12 / gamma, "iδ − Γ/2 − 2G²/Γ")?;
            let s1 = -I * omega / den;
            Ok((s1, 2.0 * I * g12 * s1 / gamma))
        }
        AnalyticMode::FullDetuning => {
            let free = nonzero(free, "iδ − Γ/2")?;
            let den = nonzero(free + g12 * g12 / free, "(iδ − Γ/2) + G²/(iδ − Γ/2)")?;
            let s1 = -I * omega / den;
            Ok((s1, -I * g12 * s1 / free))
        }
    }
}

/// Cross-correlation `⟨σ₊⁽¹⁾σ₋⁽²⁾⟩` in the printed low-saturation model.
///
/// `g12_over_gamma` is `G₁₂/Γ`.
pub fn cross_correlation(
    g12_over_gamma: Complex64,
    drive: &DriveSpec,
    gamma: f64,
    estimator: CorrelationEstimator,
) -> Result<Complex64, DynamicsError> {
    check_inputs(g12_over_gamma, drive, gamma)?;
    let g = g12_over_gamma * gamma;
    let (s1, s2) = coherences(g, drive, gamma, AnalyticMode::AsPrinted)?;
    estimate(g, drive, gamma, s1, s2, estimator)
}

fn estimate(
    g: Complex64,
    drive: &DriveSpec,
    gamma: f64,
    s1: Complex64,
    s2: Complex64,
    estimator: CorrelationEstimator,
) -> Result<Complex64, DynamicsError> {
    match estimator {
        CorrelationEstimator::Factorized => Ok(s1.conj() * s2),
        CorrelationEstimator::AlphaBeta => {
            let g2 = g.norm_sqr();
            let alpha = Complex64::new(2.0 * (g * g).re, 0.0)
                + gamma * Complex64::new(gamma, -drive.delta);
            let beta = drive.rabi * g * (3.0 * s1 - s1.conj());
            let den = alpha.norm_sqr() - 4.0 * g2 * g2;
            if den.abs() <= f64::EPSILON * 1e3 * alpha.norm_sqr() {
                return Err(DynamicsError::Singular(format!("|α|² − 4|G|⁴ = {den:e}")));
            }
            Ok((alpha * beta + 2.0 * g2 * beta.conj()) / den)
        }
    }
}

/// Closed-form low-saturation steady state. `g12_over_gamma` is `G₁₂/Γ`.
pub fn steady_state_analytic(
    g12_over_gamma: Complex64,
    drive: &DriveSpec,
    gamma: f64,
    mode: AnalyticMode,
    estimator: CorrelationEstimator,
) -> Result<SteadyState, DynamicsError> {
    check_inputs(g12_over_gamma, drive, gamma)?;
    let g = g12_over_gamma * gamma;
    let (s1, s2) = coherences(g, drive, gamma, mode)?;
    let corr = estimate(g, drive, gamma, s1, s2, estimator)?;
    let n1 = -(2.0 / gamma) * (g * corr).im + (2.0 * drive.rabi / gamma) * s1.im;
    let n2 = (2.0 / gamma) * (g.conj() * corr).im;
    Ok(SteadyState {
        sigma1: s1,
        sigma2: s2,
        n1,
        n2,
        corr,
        xi: 2.0 * corr.re,
    })
}

/// Which atoms a Hamiltonian term acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Targets {
    #[default]
    A1,
    Both,
}

impl Targets {
    fn weights(self) -> [f64; 2] {
        match self {
            Targets::A1 => [1.0, 0.0],
            Targets::Both => [1.0, 1.0],
        }
    }
}

/// Which atoms the oracle drives and detunes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleTargets {
    pub drive: Targets,
    pub detuning: Targets,
}

impl Default for OracleTargets {
    fn default() -> Self {
        Self {
            drive: Targets::A1,
            detuning: Targets::Both,
        }
    }
}

fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

/// Single-atom lowering operator in the `(g, e)` basis.
fn lowering() -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 1)] = Complex64::new(1.0, 0.0);
    m
}

/// `(σ₋⁽¹⁾, σ₋⁽²⁾)` on the product space, atom 1 as the outer factor.
fn two_atom_lowering() -> [DMatrix<Complex64>; 2] {
    let id = DMatrix::<Complex64>::identity(2, 2);
    [kron(&lowering(), &id), kron(&id, &lowering())]
}

/// Steady-state density matrix of the two-atom master equation, in the
/// basis `|gg⟩, |ge⟩, |eg⟩, |ee⟩` (atom 1 first).
///
/// `j12` is `J₁₂/ħ`; `gamma12` and `gamma` are decay rates.
pub fn lindblad_density_matrix(
    j12: f64,
    gamma12: f64,
    drive: &DriveSpec,
    gamma: f64,
    targets: OracleTargets,
) -> Result<DMatrix<Complex64>, DynamicsError> {
    if !(gamma > 0.0 && gamma.is_finite() && j12.is_finite() && gamma12.is_finite()) {
        return Err(DynamicsError::InvalidArgument(format!(
            "J12 {j12}, Γ12 {gamma12}, Γ {gamma}"
        )));
    }
    if gamma12.abs() > gamma {
        return Err(DynamicsError::Unphysical { gamma12, gamma });
    }
    let sm = two_atom_lowering();
    let sp: Vec<DMatrix<Complex64>> = sm.iter().map(|m| m.adjoint()).collect();
    let c = |x: f64| Complex64::new(x, 0.0);

    let mut h = DMatrix::<Complex64>::zeros(4, 4);
    let det = targets.detuning.weights();
    let drv = targets.drive.weights();
    for a in 0..2 {
        h -= (&sp[a] * &sm[a]) * c(drive.delta * det[a]);
        h -= (&sp[a] + &sm[a]) * c(drive.rabi * drv[a]);
    }
    h -= (&sp[0] * &sm[1] + &sp[1] * &sm[0]) * c(j12);

    let id = DMatrix::<Complex64>::identity(4, 4);
    // Column stacking: vec(A X B) = (Bᵀ ⊗ A) vec X.
    let mut l = (kron(&id, &h) - kron(&h.transpose(), &id)) * (-I);
    let rates = [[gamma, gamma12], [gamma12, gamma]];
    for i in 0..2 {
        for j in 0..2 {
            let jump = kron(&sp[j].transpose(), &sm[i]);
            let number = &sp[j] * &sm[i];
            let anti = kron(&id, &number) + kron(&number.transpose(), &id);
            l += (jump - anti * c(0.5)) * c(rates[i][j]);
        }
    }

    let mut sv: Vec<f64> = l.clone().singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    if sv[1] <= 1e-10 * sv[15].max(gamma) {
        return Err(DynamicsError::Rank {
            smallest: sv[0],
            second: sv[1],
        });
    }

    let mut stacked = DMatrix::<Complex64>::zeros(17, 16);
    stacked.view_mut((0, 0), (16, 16)).copy_from(&l);
    for d in 0..4 {
        stacked[(16, d * 5)] = c(1.0);
    }
    let mut rhs = DVector::<Complex64>::zeros(17);
    rhs[16] = c(1.0);
    // Householder least squares: x = R⁻¹ Qᴴ b.
    let qr = stacked.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let solve = |b: &DVector<Complex64>| {
        r.solve_upper_triangular(&(q.adjoint() * b))
            .ok_or_else(|| DynamicsError::Singular("stacked Liouvillian is rank deficient".into()))
    };
    let mut x = solve(&rhs)?;
    for _ in 0..2 {
        let residual = &rhs - &stacked * &x;
        x += solve(&residual)?;
    }
    let rho = DMatrix::from_column_slice(4, 4, x.as_slice());
    // Symmetrize away round-off.
    Ok((&rho + rho.adjoint()) * c(0.5))
}

fn expect(rho: &DMatrix<Complex64>, op: &DMatrix<Complex64>) -> Complex64 {
    (rho * op).trace()
}

/// Exact steady state of the two-atom master equation.
pub fn lindblad_steady_state(
    j12: f64,
    gamma12: f64,
    drive: &DriveSpec,
    gamma: f64,
    targets: OracleTargets,
) -> Result<SteadyState, DynamicsError> {
    let rho = lindblad_density_matrix(j12, gamma12, drive, gamma, targets)?;
    let sm = two_atom_lowering();
    let sp: Vec<DMatrix<Complex64>> = sm.iter().map(|m| m.adjoint()).collect();
    let corr = expect(&rho, &(&sp[0] * &sm[1]));
    Ok(SteadyState {
        sigma1: expect(&rho, &sm[0]),
        sigma2: expect(&rho, &sm[1]),
        n1: expect(&rho, &(&sp[0] * &sm[0])).re,
        n2: expect(&rho, &(&sp[1] * &sm[1])).re,
        corr,
        xi: 2.0 * corr.re,
    })
}

/// Steady-state interaction energy `−J₁₂ ξ`.
pub fn potential_energy(j12: f64, xi: f64) -> f64 {
    -j12 * xi
}

/// One detuning sample of the normalized excitation spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub delta: f64,
    pub n1_over_s2: f64,
    pub xi_over_s2: f64,
}

/// `n₁/s²` and `ξ/s²` over a detuning grid at fixed saturation `s`.
pub fn excitation_spectrum(
    g12_over_gamma: Complex64,
    s: f64,
    delta_grid: &[f64],
    gamma: f64,
    mode: AnalyticMode,
    estimator: CorrelationEstimator,
) -> Result<Vec<SpectrumPoint>, DynamicsError> {
    delta_grid
        .par_iter()
        .map(|&delta| {
            let drive = DriveSpec::from_saturation(delta, s, gamma)?;
            let ss = steady_state_analytic(g12_over_gamma, &drive, gamma, mode, estimator)?;
            Ok(SpectrumPoint {
                delta,
                n1_over_s2: ss.n1 / (s * s),
                xi_over_s2: ss.xi / (s * s),
            })
        })
        .collect()
}
