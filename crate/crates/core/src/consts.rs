//! Physical constants.
//!
//! All values are SI. Angular frequencies are rad/s throughout the crate;
//! conversion to Hz happens only at I/O boundaries.

/// Magnetic flux quantum h/2e (Wb), CODATA 2018.
pub const PHI0: f64 = 2.067_833_848e-15;

/// Elementary charge (C), exact since the 2019 SI revision.
pub const E_CHARGE: f64 = 1.602_176_634e-19;

/// Reduced Planck constant (J s), exact.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant (J/K), exact.
pub const K_B: f64 = 1.380_649e-23;

/// Vacuum permeability (N/A^2). The pre-2019 defined value 4*pi*1e-7 is
/// used on purpose: the kinetic-inductance fits were calibrated with it.
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

/// Convert a cyclic frequency in Hz to an angular frequency in rad/s.
#[inline]
pub fn hz_to_angular(f: f64) -> f64 {
    2.0 * std::f64::consts::PI * f
}

/// Convert an angular frequency in rad/s to a cyclic frequency in Hz.
#[inline]
pub fn angular_to_hz(omega: f64) -> f64 {
    omega / (2.0 * std::f64::consts::PI)
}
