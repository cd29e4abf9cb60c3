//! Kerr-constant extraction from two-tone pump sweeps, with photon-number
//! uncertainty bounds from the external-linewidth spread and the on-chip
//! power uncertainty.

use crate::error::{Error, Result};
use crate::fit::kappa_e::KappaEProfile;
use crate::fit::lm::{levenberg_marquardt, LmConfig};
use crate::response::{pump_photon_number, TwoToneObservation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrFitConfig {
    /// Assumed on-chip power uncertainty (dB), propagated into n_c bounds.
    pub power_uncertainty_db: f64,
    /// Allowed shortfall of kappa_p below kappa_0 before a point is
    /// rejected as inconsistent (rad/s).
    pub broadening_tolerance: f64,
    /// Window for the kappa_e min/max search; defaults to kappa_0.
    pub kappa_e_window: Option<f64>,
}

impl Default for KerrFitConfig {
    fn default() -> Self {
        KerrFitConfig {
            power_uncertainty_db: 1.0,
            broadening_tolerance: 0.0,
            kappa_e_window: None,
        }
    }
}

/// Result of a Kerr extraction at one flux point.
#[derive(Debug, Clone, PartialEq)]
pub struct KerrFit {
    /// Kerr constant (rad/s per photon).
    pub kerr: f64,
    /// Nonlinear damping (rad/s per photon), from the kappa_p slope.
    pub kappa_nl: f64,
    /// Kerr refit with the maximal photon numbers (smallest |K|).
    pub kerr_plus: f64,
    /// Kerr refit with the minimal photon numbers (largest |K|).
    pub kerr_minus: f64,
    /// Direct fit error on the Kerr constant (rad/s per photon).
    pub kerr_sigma: f64,
    pub n_c: Vec<f64>,
    pub n_c_plus: Vec<f64>,
    pub n_c_minus: Vec<f64>,
    pub residual_rms: f64,
}

/// Extract (K, kappa_nl) from two-tone observations at one flux bias.
///
/// Photon numbers come from the shift/broadening inversion, kappa_nl from
/// the linear broadening slope, and K from a one-parameter least-squares
/// fit of the shift curve. The procedure repeats with the (kappa_e+, +1 dB)
/// and (kappa_e-, -1 dB) photon numbers to produce the K bounds, ordered
/// |K-| >= |K| >= |K+|.
pub fn fit_kerr(
    observations: &[TwoToneObservation],
    profile: &KappaEProfile,
    kappa_0: f64,
    delta_p: f64,
    cfg: &KerrFitConfig,
) -> Result<KerrFit> {
    if observations.len() < 4 {
        return Err(Error::conditioning(format!(
            "Kerr extraction needs at least 4 pump powers, got {}",
            observations.len()
        )));
    }
    if !(kappa_0 > 0.0) {
        return Err(Error::domain("kappa_0 must be > 0".to_string()));
    }
    for (i, obs) in observations.iter().enumerate() {
        if obs.kappa_p < kappa_0 - cfg.broadening_tolerance {
            return Err(Error::data_quality(format!(
                "observation {i}: kappa_p = {:.6e} below kappa_0 = {:.6e}",
                obs.kappa_p, kappa_0
            )));
        }
        if !(obs.pump_power > 0.0) {
            return Err(Error::domain(format!("observation {i}: non-positive pump power")));
        }
    }

    let window = cfg.kappa_e_window.unwrap_or(kappa_0);
    let power_factor = 10f64.powf(cfg.power_uncertainty_db / 10.0);

    let photon_set = |which: i8| -> Result<Vec<f64>> {
        observations
            .iter()
            .map(|obs| {
                let bounds = profile.query(obs.omega_p, window);
                let (kappa_e, power) = match which {
                    1 => (bounds.kappa_e_plus, obs.pump_power * power_factor),
                    -1 => (bounds.kappa_e_minus, obs.pump_power / power_factor),
                    _ => (bounds.kappa_e, obs.pump_power),
                };
                let delta = delta_p - obs.delta_omega0;
                pump_photon_number(
                    power,
                    obs.omega_p,
                    kappa_e,
                    kappa_0,
                    obs.kappa_p,
                    delta,
                    delta_p,
                    cfg.broadening_tolerance,
                )
            })
            .collect()
    };

    let n_c = photon_set(0)?;
    let n_c_plus = photon_set(1)?;
    let n_c_minus = photon_set(-1)?;

    let shifts: Vec<f64> = observations.iter().map(|o| o.delta_omega0).collect();
    let broadenings: Vec<f64> = observations.iter().map(|o| o.kappa_p).collect();

    let fit_one = |ns: &[f64]| -> Result<(f64, f64, f64, f64)> {
        // kappa_nl from the broadening slope through the fixed intercept.
        let num: f64 = ns.iter().zip(&broadenings).map(|(n, k)| n * (k - kappa_0)).sum();
        let den: f64 = ns.iter().map(|n| n * n).sum();
        if den == 0.0 {
            return Err(Error::domain("all photon numbers are zero".to_string()));
        }
        let kappa_nl = (num / (2.0 * den)).max(0.0);

        // One-parameter shift fit with kappa_nl held fixed.
        let slope: f64 = ns.iter().zip(&shifts).map(|(n, s)| n * s).sum::<f64>() / den;
        let k_seed = 0.5 * slope;
        let scale = k_seed.abs().max(kappa_0 * 1e-6);
        let ns_local = ns.to_vec();
        let shifts_local = shifts.clone();
        let residuals = move |p: &[f64]| -> Result<Vec<f64>> {
            let k = p[0];
            ns_local
                .iter()
                .zip(&shifts_local)
                .map(|(&n, &s)| {
                    let kn = k * n;
                    let radicand = (delta_p - kn) * (delta_p - 3.0 * kn)
                        - 0.25 * kappa_nl * kappa_nl * n * n;
                    if radicand < 0.0 {
                        return Err(Error::regime("negative radicand in shift model".to_string()));
                    }
                    Ok((delta_p - radicand.sqrt() - s) / kappa_0)
                })
                .collect()
        };
        let out = levenberg_marquardt(residuals, &[k_seed], &[scale], &LmConfig::default())
            .map_err(|e| Error::fit(format!("Kerr shift fit failed: {e}")))?;
        let sigma = out.uncertainties.as_ref().map_or(0.0, |u| u[0]);
        Ok((out.params[0], kappa_nl, sigma, out.residual_rms * kappa_0))
    };

    let (kerr, kappa_nl, kerr_sigma, residual_rms) = fit_one(&n_c)?;
    let (kerr_plus, _, _, _) = fit_one(&n_c_plus)?;
    let (kerr_minus, _, _, _) = fit_one(&n_c_minus)?;

    Ok(KerrFit {
        kerr,
        kappa_nl,
        kerr_plus,
        kerr_minus,
        kerr_sigma,
        n_c,
        n_c_plus,
        n_c_minus,
        residual_rms,
    })
}
