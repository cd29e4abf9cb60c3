//! Kerr nonlinearity of the flux-biased SQUID circuit from the quartic
//! Taylor expansion of the one-dimensional SQUID potential.
//!
//! Two equivalent routes are provided: the closed-form participation-ratio
//! expression with its screening correction, and the coefficient pipeline
//! (c2, c4, participation scaling). They agree to better than 1e-10
//! relative, which the test suite enforces.

use crate::circuit::CircuitParams;
use crate::consts::{E_CHARGE, HBAR};
use crate::error::{Error, Result};
use crate::flux::{solve_total_flux, FluxPoint, FluxStability, SquidParams};

/// Quartic Taylor expansion of the single-variable SQUID potential around
/// its minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialExpansion {
    /// Inductance ratio L_arm/L_J0 of the linear arm to the sweetspot
    /// Josephson inductance.
    pub zeta: f64,
    /// Junction phase at the potential minimum (rad).
    pub phi0: f64,
    pub c2: f64,
    /// Identically zero for the symmetric SQUID.
    pub c3: f64,
    pub c4: f64,
}

/// A Kerr value with optional photon-number-uncertainty bounds.
///
/// All three are negative for these circuits; the ordering convention is
/// |k_minus| >= |k| >= |k_plus|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrEstimate {
    /// Kerr constant (rad/s per photon).
    pub k: f64,
    pub k_plus: Option<f64>,
    pub k_minus: Option<f64>,
}

impl KerrEstimate {
    pub fn bare(k: f64) -> Self {
        Self { k, k_plus: None, k_minus: None }
    }
}

/// Closed-form Taylor coefficients of the arm-plus-junction potential:
/// c2 = 2 cos(phi0)/(1 + zeta cos(phi0)),
/// c4 = -2 [cos(phi0)(1 + zeta cos(phi0)) + 3 zeta sin^2(phi0)]
///      / (1 + zeta cos(phi0))^5.
pub fn potential_coefficients(zeta: f64, phi0: f64) -> Result<PotentialExpansion> {
    if zeta < 0.0 {
        return Err(Error::domain(format!("zeta must be >= 0, got {zeta}")));
    }
    let (s, c) = phi0.sin_cos();
    let denom = 1.0 + zeta * c;
    if denom.abs() < 1e-9 {
        return Err(Error::singular(format!(
            "potential expansion singular: 1 + zeta cos(phi0) = {denom:.3e}"
        )));
    }
    let c2 = 2.0 * c / denom;
    let c4 = -2.0 * (c * denom + 3.0 * zeta * s * s) / denom.powi(5);
    Ok(PotentialExpansion { zeta, phi0, c2, c3: 0.0, c4 })
}

/// SQUID inductance from the curvature, L_s = L_J0/c2.
pub fn squid_inductance(l_j0: f64, expansion: &PotentialExpansion) -> Result<f64> {
    if expansion.c2 <= 0.0 {
        return Err(Error::domain(format!(
            "L_s undefined for non-positive curvature c2 = {:.3e}",
            expansion.c2
        )));
    }
    Ok(l_j0 / expansion.c2)
}

fn charging_prefactor(c_tot: f64) -> f64 {
    E_CHARGE * E_CHARGE / (2.0 * HBAR * c_tot)
}

/// Kerr constant through the coefficient pipeline: K_s = (e^2/2 hbar C) c4/c2
/// for the bare SQUID, scaled by the cube of the inductance participation
/// ratio p = L_s/(L - L_loop/4 + L_s) once the series inductor is added.
pub fn kerr_from_coefficients(
    circuit: &CircuitParams,
    squid: &SquidParams,
    expansion: &PotentialExpansion,
) -> Result<f64> {
    circuit.validate()?;
    squid.validate()?;
    let l_s = squid_inductance(squid.l_j0(), expansion)?;
    let p = l_s / (circuit.l - 0.25 * circuit.l_loop + l_s);
    let k_squid = charging_prefactor(circuit.c_tot()) * expansion.c4 / expansion.c2;
    Ok(p.powi(3) * k_squid)
}

fn kerr_closed_form(
    circuit: &CircuitParams,
    squid: &SquidParams,
    junction_phase: f64,
    with_screening_term: bool,
) -> Result<f64> {
    let cos = junction_phase.cos();
    if cos.abs() < 1e-9 {
        return Err(Error::singular(
            "Josephson inductance diverges at this flux".to_string(),
        ));
    }
    let l_j = squid.l_j0() / cos;
    let l_arm = squid.l_arm();
    let participation = l_j / (2.0 * circuit.l + squid.l_lin + l_j);
    let bracket = if with_screening_term {
        let lambda = l_arm / (l_arm + l_j);
        1.0 + 3.0 * lambda * junction_phase.tan().powi(2)
    } else {
        1.0
    };
    Ok(-charging_prefactor(circuit.c_tot()) * participation.powi(3) * bracket)
}

fn stable_flux(squid: &SquidParams, phi_ext: f64) -> Result<FluxPoint> {
    let flux = solve_total_flux(phi_ext, squid.beta_l(), phi_ext)?;
    if flux.stability != FluxStability::Stable {
        return Err(Error::domain(format!(
            "no stable-branch Kerr value at phi_ext = {phi_ext:.4} (junction phase {:.4} rad)",
            flux.junction_phase()
        )));
    }
    Ok(flux)
}

/// Kerr constant at an external flux, including the screening correction:
/// K = -(e^2/2 hbar C_tot) [L_J/(2L + L_lin + L_J)]^3 [1 + 3 Lambda tan^2(pi Phi/Phi0)]
/// with Lambda = L_arm/(L_arm + L_J).
pub fn kerr_at_flux(
    circuit: &CircuitParams,
    squid: &SquidParams,
    phi_ext: f64,
) -> Result<KerrEstimate> {
    circuit.validate()?;
    squid.validate()?;
    let flux = stable_flux(squid, phi_ext)?;
    let k = kerr_closed_form(circuit, squid, flux.junction_phase(), true)?;
    Ok(KerrEstimate::bare(k))
}

/// The plain participation-ratio expression (screening bracket forced to 1),
/// the dotted reference curves against which the full form is compared.
pub fn kerr_simplified(
    circuit: &CircuitParams,
    squid: &SquidParams,
    phi_ext: f64,
) -> Result<KerrEstimate> {
    circuit.validate()?;
    squid.validate()?;
    let flux = stable_flux(squid, phi_ext)?;
    let k = kerr_closed_form(circuit, squid, flux.junction_phase(), false)?;
    Ok(KerrEstimate::bare(k))
}

/// Kerr at a known flux solution (used when the caller already tracked the
/// branch, e.g. along a tuning curve).
pub fn kerr_at_flux_point(
    circuit: &CircuitParams,
    squid: &SquidParams,
    flux: &FluxPoint,
) -> Result<KerrEstimate> {
    if flux.stability != FluxStability::Stable {
        return Err(Error::domain(
            "Kerr is only reported on stable branch segments".to_string(),
        ));
    }
    let k = kerr_closed_form(circuit, squid, flux.junction_phase(), true)?;
    Ok(KerrEstimate::bare(k))
}
