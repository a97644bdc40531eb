//! Physical constants (SI, CODATA 2018 exact or recommended values).

pub const HBAR: f64 = 1.054_571_817e-34;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Standard gravity.
pub const STANDARD_GRAVITY: f64 = 9.806_65;
