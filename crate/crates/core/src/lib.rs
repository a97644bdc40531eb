//! Lens-mediated dipole-dipole interactions between two atoms placed at the
//! opposite foci of an ideal aplanatic lens system.
//!
//! The crate is organised bottom-up: [`numerics`] provides Bessel functions
//! and adaptive quadrature, [`greens`] the point-spread Green's tensor,
//! [`coupling`] the normalized coupling coefficients, [`dynamics`] the
//! weak-drive steady state with a full master-equation check, and [`trap`]
//! the resulting optical potential and its heating-limited lifetime.

pub mod coupling;
pub mod dynamics;
pub mod greens;
pub mod numerics;
pub mod trap;
pub mod units;

pub use coupling::{Axis, CouplingError, CouplingResult, DipolePair};
pub use greens::{ComplexMat3, GreensError, LensSpec, Vec3};
pub use numerics::{NumericsError, QuadratureSpec};
