//! Parameter sets of the three niobium nanobridge SQUID circuits used
//! throughout the regression and synthetic-data suites.
//!
//! The circuit inductances are derived from the film parameters through the
//! two-fluid chain rather than stored, so every preset is self-consistent
//! across temperature.

use crate::circuit::CircuitParams;
use crate::error::Result;
use crate::flux::SquidParams;
use crate::thermal::{
    bardeen_critical_current, llin_vs_temperature, loop_inductance, penetration_profile,
    resonance_at_temperature, ConstrictionThermal, FilmParams,
};

/// Everything needed to simulate or regression-test one device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DevicePreset {
    pub name: &'static str,
    pub film: FilmParams,
    /// Total capacitance C + C_c (F).
    pub c_tot: f64,
    /// Coupling capacitance (F).
    pub c_c: f64,
    /// Feedline impedance (Ohm).
    pub z0: f64,
    /// Sweetspot Josephson inductance at the 2.5 K reference point (H).
    pub l_j0_ref: f64,
    /// Linear constriction inductance at the reference point (H).
    pub l_lin_ref: f64,
    pub thermal: ConstrictionThermal,
    /// Pre-cut external / internal linewidths at 2.5 K (rad/s).
    pub kappa_e_b: f64,
    pub kappa_i_b: f64,
    /// Post-cut external / internal linewidths at the sweetspot, 2.5 K (rad/s).
    pub kappa_e: f64,
    pub kappa_i: f64,
}

/// Reference temperature of the tabulated parameters (K).
pub const T_REF: f64 = 2.5;

impl DevicePreset {
    /// Circuit electricals at temperature `t`, with L and L_loop from the
    /// two-fluid kinetic-inductance chain.
    pub fn circuit_at(&self, t: f64) -> Result<CircuitParams> {
        let p = penetration_profile(t, &self.film)?;
        Ok(CircuitParams {
            l: p.l_total,
            c: self.c_tot - self.c_c,
            c_c: self.c_c,
            z0: self.z0,
            l_loop: loop_inductance(t, &self.film)?,
            r: None,
        })
    }

    /// SQUID parameters at the 2.5 K reference point (the tabulated values).
    pub fn squid_ref(&self) -> Result<SquidParams> {
        let circuit = self.circuit_at(T_REF)?;
        SquidParams::from_l_j0(self.l_j0_ref, self.l_lin_ref, circuit.l_loop)
    }

    /// SQUID parameters at temperature `t` from the thermal models.
    pub fn squid_at(&self, t: f64) -> Result<SquidParams> {
        let i_0 = bardeen_critical_current(t, self.thermal.i_c, self.thermal.t_cc)?;
        let l_lin = llin_vs_temperature(t, &self.thermal)?;
        let l_loop = loop_inductance(t, &self.film)?;
        Ok(SquidParams { i_0, l_lin, l_loop })
    }

    /// Bare (pre-cut) resonance at temperature `t` (rad/s).
    pub fn omega_b_at(&self, t: f64) -> Result<f64> {
        resonance_at_temperature(t, &self.film, self.c_tot)
    }
}

/// Thermal constriction model that hits the reference-point inductance and
/// critical current and saturates at the requested zero-temperature
/// screening parameter.
fn constriction_model(
    film: &FilmParams,
    l_j0_ref: f64,
    l_lin_ref: f64,
    t_cc: f64,
    beta_at_zero: f64,
) -> ConstrictionThermal {
    use crate::consts::PHI0;
    let tau = std::f64::consts::TAU;
    let i_0_ref = PHI0 / (tau * l_j0_ref);
    let scale = (1.0 - (T_REF / t_cc).powi(2)).powf(1.5);
    let i_c = i_0_ref / scale;
    let l_loop0 = loop_inductance(0.0, film).expect("loop inductance at T = 0");
    let l_lin_at_zero = 0.5 * (beta_at_zero * PHI0 / (2.0 * i_c) - l_loop0);
    let enhancement = 1.0 / (1.0 - (T_REF / t_cc).powi(4));
    let l_lin0 = (l_lin_ref - l_lin_at_zero) / (enhancement - 1.0);
    ConstrictionThermal { i_c, t_cc, l_off: l_lin_at_zero - l_lin0, l_lin0 }
}

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// The 90 nm thick 2D-constriction circuit.
pub fn device_2d() -> DevicePreset {
    let film = FilmParams {
        lambda0: 157e-9,
        t_c: 8.6,
        d_nb: 90e-9,
        l_g: 535e-12,
        g: 164.0,
        l_loop_g: 12.8e-12,
        g_loop: 12.0,
    };
    DevicePreset {
        name: "2D",
        film,
        c_tot: 2.652e-12,
        c_c: 38e-15,
        z0: 50.0,
        l_j0_ref: 5e-12,
        l_lin_ref: 3e-12,
        thermal: constriction_model(&film, 5e-12, 3e-12, 3.96, 3.1),
        kappa_e_b: TWO_PI * 1.4e6,
        kappa_i_b: TWO_PI * 89e3,
        kappa_e: TWO_PI * 1.4e6,
        kappa_i: TWO_PI * 1.0e6,
    }
}

/// The ~30 nm thick 3D-constriction circuit.
pub fn device_3d1() -> DevicePreset {
    let film = FilmParams {
        lambda0: 153e-9,
        t_c: 8.6,
        d_nb: 90e-9,
        l_g: 511e-12,
        g: 156.0,
        l_loop_g: 12.8e-12,
        g_loop: 12.0,
    };
    DevicePreset {
        name: "3D1",
        film,
        c_tot: 2.404e-12,
        c_c: 31e-15,
        z0: 50.0,
        l_j0_ref: 33e-12,
        l_lin_ref: 28e-12,
        thermal: constriction_model(&film, 33e-12, 28e-12, 3.47, 1.8),
        kappa_e_b: TWO_PI * 1.2e6,
        kappa_i_b: TWO_PI * 73e3,
        kappa_e: TWO_PI * 1.4e6,
        kappa_i: TWO_PI * 6.5e6,
    }
}

/// The ~20 nm thick 3D-constriction circuit.
pub fn device_3d2() -> DevicePreset {
    let film = FilmParams {
        lambda0: 153e-9,
        t_c: 8.6,
        d_nb: 90e-9,
        l_g: 462e-12,
        g: 141.0,
        l_loop_g: 12.8e-12,
        g_loop: 12.0,
    };
    DevicePreset {
        name: "3D2",
        film,
        c_tot: 1.936e-12,
        c_c: 33e-15,
        z0: 50.0,
        l_j0_ref: 58e-12,
        l_lin_ref: 45e-12,
        thermal: constriction_model(&film, 58e-12, 45e-12, 3.31, 1.9),
        kappa_e_b: TWO_PI * 2.2e6,
        kappa_i_b: TWO_PI * 120e3,
        kappa_e: TWO_PI * 2.2e6,
        kappa_i: TWO_PI * 22.0e6,
    }
}

/// All three presets.
pub fn all_devices() -> [DevicePreset; 3] {
    [device_2d(), device_3d1(), device_3d2()]
}
