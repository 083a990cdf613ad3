//! Physical constants (SI, CODATA 2018) and crate-wide numerical caps.

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge, C (exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Bohr radius, m.
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;

/// Mass-corrected Rydberg constant for Rb-85, cm^-1.
pub const RYDBERG_RB_CM: f64 = 109_736.605;

/// Exponent cap: e^(2*zeta) switches to log-magnitude evaluation past this.
pub const ZETA_CAP: f64 = 700.0;
/// Largest finite value the rate expressions are allowed to return.
pub const RATE_HUGE: f64 = 1e300;
