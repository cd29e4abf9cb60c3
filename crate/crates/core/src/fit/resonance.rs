//! Complex least-squares fit of the side-coupled notch response.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fit::background::{correct_trace, BackgroundModel, CorrectedTrace, CorrectionPolicy};
use crate::fit::lm::{levenberg_marquardt, LmConfig};
use crate::trace::ComplexTrace;

/// Ideal notch with a Fano rotation:
/// S21 = 1 - e^{i theta} kappa_e / (kappa_i + kappa_e + 2i (w - w0)).
pub fn notch_model(omega: f64, omega_0: f64, kappa_i: f64, kappa_e: f64, theta: f64) -> Complex64 {
    let kappa = kappa_i + kappa_e;
    Complex64::new(1.0, 0.0)
        - Complex64::from_polar(1.0, theta) * kappa_e
            / Complex64::new(kappa, 2.0 * (omega - omega_0))
}

/// Seeds estimated from the dip location, depth and width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotchSeeds {
    pub omega_0: f64,
    pub kappa_i: f64,
    pub kappa_e: f64,
    /// Estimated total linewidth (FWHM of 1 - |S21|^2).
    pub kappa_total: f64,
    /// Normalized dip depth 1 - |S21|_min.
    pub depth: f64,
}

/// Estimate notch seeds from a (roughly background-free) trace.
///
/// For the ideal notch, 1 - |S21|^2 is a Lorentzian whose full width at
/// half maximum equals the total linewidth, and the dip depth equals
/// kappa_e/kappa.
pub fn notch_seeds(trace: &ComplexTrace) -> Result<NotchSeeds> {
    let i0 = trace.argmin_magnitude();
    let omega_0 = trace.omega[i0];
    let min_mag = trace.s21[i0].norm();
    // Off-resonant level from the outer 10% of samples on each side.
    let n = trace.len();
    let edge = (n / 10).max(1);
    let level = trace.s21[..edge]
        .iter()
        .chain(&trace.s21[n - edge..])
        .map(|s| s.norm())
        .sum::<f64>()
        / (2 * edge) as f64;
    if level <= 0.0 {
        return Err(Error::fit("trace magnitude vanishes off resonance".to_string()));
    }
    let depth = 1.0 - min_mag / level;
    if depth <= 0.0 {
        return Err(Error::fit(format!(
            "no dip visible: min |S21| = {min_mag:.4} against level {level:.4}"
        )));
    }
    let depth_pow = 1.0 - (min_mag / level).powi(2);
    let half_level = (1.0 - 0.5 * depth_pow).sqrt() * level;

    let mut lo = trace.omega[0];
    for i in (0..i0).rev() {
        if trace.s21[i].norm() >= half_level {
            lo = trace.omega[i];
            break;
        }
    }
    let mut hi = *trace.omega.last().unwrap();
    for i in i0..n {
        if trace.s21[i].norm() >= half_level {
            hi = trace.omega[i];
            break;
        }
    }
    let kappa_total = (hi - lo).max(2.0 * (trace.omega[1] - trace.omega[0]));
    let kappa_e = (depth * kappa_total).max(1e-6 * kappa_total);
    let kappa_i = (kappa_total - kappa_e).max(1e-6 * kappa_total);
    Ok(NotchSeeds { omega_0, kappa_i, kappa_e, kappa_total, depth })
}

/// Result of a notch fit on a background-corrected trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceFit {
    pub omega_0: f64,
    pub kappa_i: f64,
    pub kappa_e: f64,
    /// Residual Fano angle (rad); near zero for a fully corrected trace.
    pub theta: f64,
    pub background: BackgroundModel,
    /// RMS of the stacked real/imaginary residuals.
    pub residual_rms: f64,
    /// One-sigma uncertainties of (omega_0, kappa_i, kappa_e, theta).
    pub uncertainties: Option<[f64; 4]>,
}

impl ResonanceFit {
    pub fn kappa_total(&self) -> f64 {
        self.kappa_i + self.kappa_e
    }
}

/// Seed selection for [`fit_resonance`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SeedPolicy {
    /// Estimate seeds from the dip location, width and depth.
    #[default]
    Automatic,
    /// Caller-supplied seeds (omega_0, kappa_i, kappa_e).
    Explicit { omega_0: f64, kappa_i: f64, kappa_e: f64 },
}

/// Fit the notch model to a corrected trace.
pub fn fit_resonance(trace: &ComplexTrace, seeds: SeedPolicy) -> Result<ResonanceFit> {
    let mut fit = fit_notch(trace, match seeds {
        SeedPolicy::Automatic => None,
        SeedPolicy::Explicit { omega_0, kappa_i, kappa_e } => Some(NotchSeeds {
            omega_0,
            kappa_i,
            kappa_e,
            kappa_total: kappa_i + kappa_e,
            depth: kappa_e / (kappa_i + kappa_e),
        }),
    })?;
    fit.background = BackgroundModel::identity();
    Ok(fit)
}

/// The standard analysis routine: background correction followed by the
/// notch fit, returning both the corrected trace and the fit.
pub fn analyze_trace(
    raw: &ComplexTrace,
    reference: Option<&ComplexTrace>,
    policy: &CorrectionPolicy,
) -> Result<(CorrectedTrace, ResonanceFit)> {
    let corrected = correct_trace(raw, reference, policy)?;
    if !corrected.resonance_found {
        return Err(Error::fit(
            "no resonance found in trace; only background correction applies".to_string(),
        ));
    }
    let mut fit = fit_resonance(&corrected.trace, SeedPolicy::Automatic)?;
    fit.background = corrected.background;
    Ok((corrected, fit))
}

pub(crate) fn fit_notch(trace: &ComplexTrace, seeds: Option<NotchSeeds>) -> Result<ResonanceFit> {
    let s = match seeds {
        Some(s) => s,
        None => notch_seeds(trace)?,
    };
    let p0 = [s.omega_0, s.kappa_i.max(1e-9), s.kappa_e.max(1e-9), 0.0];
    let scales = [s.omega_0.abs().max(1.0), s.kappa_total, s.kappa_total, 1.0];

    let omega = trace.omega.clone();
    let data = trace.s21.clone();
    let residuals = move |p: &[f64]| -> Result<Vec<f64>> {
        let (w0, ki, ke, th) = (p[0], p[1], p[2], p[3]);
        if ki < 0.0 || ke <= 0.0 {
            return Err(Error::domain("linewidths out of range".to_string()));
        }
        let mut r = Vec::with_capacity(2 * omega.len());
        for (w, d) in omega.iter().zip(&data) {
            let m = notch_model(*w, w0, ki, ke, th);
            r.push(m.re - d.re);
            r.push(m.im - d.im);
        }
        Ok(r)
    };

    let out = levenberg_marquardt(residuals, &p0, &scales, &LmConfig::default()).map_err(|e| {
        Error::fit(format!(
            "notch fit failed (seeds: omega_0/2pi = {:.6e} Hz, kappa_i/2pi = {:.3e} Hz, \
             kappa_e/2pi = {:.3e} Hz): {e}",
            s.omega_0 / std::f64::consts::TAU,
            s.kappa_i / std::f64::consts::TAU,
            s.kappa_e / std::f64::consts::TAU,
        ))
    })?;

    let unc = out
        .uncertainties
        .as_ref()
        .map(|u| [u[0], u[1], u[2], u[3]]);
    Ok(ResonanceFit {
        omega_0: out.params[0],
        kappa_i: out.params[1],
        kappa_e: out.params[2],
        theta: out.params[3],
        background: BackgroundModel::identity(),
        residual_rms: out.residual_rms,
        uncertainties: unc,
    })
}
