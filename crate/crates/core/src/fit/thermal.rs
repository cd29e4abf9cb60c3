//! Fits of the temperature-dependent series: bare resonance, total
//! linewidth, critical current and linear constriction inductance.

use crate::error::{Error, Result};
use crate::fit::lm::{levenberg_marquardt, linear_least_squares, LmConfig};
use crate::thermal::{
    penetration_profile, quasiparticle_linewidth_internal, resonance_at_temperature, FilmParams,
};

/// Which series is being fitted, with its kind-specific fixed parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThermalSeries {
    /// (T, omega_b) data; fixed geometry, fits (lambda0, T_c, C_tot).
    BareResonance { l_g: f64, g: f64, d_nb: f64 },
    /// (T, kappa_b) data; fits the single quasiparticle prefactor A_kappa
    /// with the film model and constant kappa_e fixed.
    TotalLinewidth { film: FilmParams, c_tot: f64, kappa_e: f64 },
    /// (T, I_0) data; fits (I_c, T_cc).
    CriticalCurrent,
    /// (T, L_lin) data with the constriction critical temperature fixed;
    /// fits (L_off, L_lin0).
    LinearInductance { t_cc: f64 },
}

/// How to treat data points outside the model domain (e.g. above the fitted
/// critical temperature).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DomainPolicy {
    /// Fail with a list of offending points.
    #[default]
    Reject,
    /// Exclude them, report their indices, and fit the rest.
    Mask,
}

/// Kind-specific fitted parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ThermalFitParams {
    BareResonance { lambda0: f64, t_c: f64, c_tot: f64 },
    TotalLinewidth { a_kappa: f64 },
    CriticalCurrent { i_c: f64, t_cc: f64 },
    LinearInductance { l_off: f64, l_lin0: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalFit {
    pub params: ThermalFitParams,
    /// One-sigma uncertainties in the same parameter order.
    pub uncertainties: Option<Vec<f64>>,
    pub residual_rms: f64,
    /// Indices of points excluded under [`DomainPolicy::Mask`].
    pub masked: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Fit one thermal series.
pub fn fit_thermal(
    kind: &ThermalSeries,
    data: &[(f64, f64)],
    policy: DomainPolicy,
) -> Result<ThermalFit> {
    let min_points = match kind {
        ThermalSeries::BareResonance { .. } => 4,
        ThermalSeries::TotalLinewidth { .. } => 2,
        ThermalSeries::CriticalCurrent => 3,
        ThermalSeries::LinearInductance { .. } => 3,
    };
    if data.len() < min_points {
        return Err(Error::conditioning(format!(
            "thermal fit needs at least {min_points} points, got {}",
            data.len()
        )));
    }
    if data.iter().any(|p| !p.0.is_finite() || !p.1.is_finite() || p.0 < 0.0) {
        return Err(Error::domain("thermal series contains invalid points".to_string()));
    }
    match kind {
        ThermalSeries::BareResonance { l_g, g, d_nb } => fit_bare_resonance(data, *l_g, *g, *d_nb),
        ThermalSeries::TotalLinewidth { film, c_tot, kappa_e } => {
            fit_total_linewidth(data, film, *c_tot, *kappa_e)
        }
        ThermalSeries::CriticalCurrent => fit_critical_current(data, policy),
        ThermalSeries::LinearInductance { t_cc } => fit_linear_inductance(data, *t_cc, policy),
    }
}

fn fit_bare_resonance(data: &[(f64, f64)], l_g: f64, g: f64, d_nb: f64) -> Result<ThermalFit> {
    let t_max = data.iter().map(|p| p.0).fold(0.0, f64::max);
    let w_ref = data[0].1;
    // Seeds: a typical sputtered-niobium depth, a T_c safely above the data,
    // and the capacitance implied by the first point.
    let lambda0_seed = 150e-9;
    let t_c_seed = (1.5 * t_max).max(9.0);
    let film_seed = FilmParams {
        lambda0: lambda0_seed,
        t_c: t_c_seed,
        d_nb,
        l_g,
        g,
        l_loop_g: 1e-12,
        g_loop: 1.0,
    };
    let l_seed = penetration_profile(data[0].0, &film_seed)?.l_total;
    let c_seed = 1.0 / (w_ref * w_ref * l_seed);

    let pts = data.to_vec();
    let residuals = move |p: &[f64]| -> Result<Vec<f64>> {
        let (lambda0, t_c, c_tot) = (p[0], p[1], p[2]);
        if !(lambda0 > 0.0) || !(c_tot > 0.0) {
            return Err(Error::domain("negative lambda0 or C_tot".to_string()));
        }
        let film = FilmParams { lambda0, t_c, d_nb, l_g, g, l_loop_g: 1e-12, g_loop: 1.0 };
        pts.iter()
            .map(|&(t, w)| {
                resonance_at_temperature(t, &film, c_tot).map(|model| (model - w) / w_ref)
            })
            .collect()
    };
    let out = levenberg_marquardt(
        residuals,
        &[lambda0_seed, t_c_seed, c_seed],
        &[1e-7, 10.0, c_seed],
        &LmConfig::default(),
    )
    .map_err(|e| Error::fit(format!("bare-resonance thermal fit failed: {e}")))?;
    Ok(ThermalFit {
        params: ThermalFitParams::BareResonance {
            lambda0: out.params[0],
            t_c: out.params[1],
            c_tot: out.params[2],
        },
        uncertainties: out.uncertainties,
        residual_rms: out.residual_rms * w_ref,
        masked: vec![],
        warnings: vec![],
    })
}

fn fit_total_linewidth(
    data: &[(f64, f64)],
    film: &FilmParams,
    c_tot: f64,
    kappa_e: f64,
) -> Result<ThermalFit> {
    // kappa_b = kappa_e + A_kappa * basis(T): linear in the prefactor.
    let mut num = 0.0;
    let mut den = 0.0;
    let mut basis = Vec::with_capacity(data.len());
    for &(t, k) in data {
        let omega_b = resonance_at_temperature(t, film, c_tot)?;
        let b = quasiparticle_linewidth_internal(t, film, 1.0, omega_b)?;
        num += b * (k - kappa_e);
        den += b * b;
        basis.push(b);
    }
    if den == 0.0 {
        return Err(Error::conditioning(
            "all linewidth basis values vanish (data at T = 0?)".to_string(),
        ));
    }
    let mut warnings = vec![];
    let mut a_kappa = num / den;
    if a_kappa < 0.0 {
        warnings.push(format!(
            "unconstrained A_kappa = {a_kappa:.3e} is negative; clamped to 0"
        ));
        a_kappa = 0.0;
    }
    let residuals: Vec<f64> = data
        .iter()
        .zip(&basis)
        .map(|(&(_, k), &b)| kappa_e + a_kappa * b - k)
        .collect();
    let cost: f64 = residuals.iter().map(|r| r * r).sum();
    let dof = (data.len() as f64 - 1.0).max(1.0);
    let unc = (cost / dof / den).sqrt();
    Ok(ThermalFit {
        params: ThermalFitParams::TotalLinewidth { a_kappa },
        uncertainties: Some(vec![unc]),
        residual_rms: (cost / data.len() as f64).sqrt(),
        masked: vec![],
        warnings,
    })
}

fn fit_critical_current(data: &[(f64, f64)], policy: DomainPolicy) -> Result<ThermalFit> {
    // Points with non-positive current carry no Bardeen information.
    let invalid: Vec<usize> =
        (0..data.len()).filter(|&i| data[i].1 <= 0.0).collect();
    let mut masked = match policy {
        DomainPolicy::Reject if !invalid.is_empty() => {
            return Err(Error::domain(format!(
                "points {invalid:?} have non-positive critical current"
            )));
        }
        _ => invalid,
    };

    let mut rounds = 0;
    loop {
        let active: Vec<(f64, f64)> = data
            .iter()
            .enumerate()
            .filter(|(i, _)| !masked.contains(i))
            .map(|(_, &p)| p)
            .collect();
        if active.len() < 3 {
            return Err(Error::conditioning(
                "too few in-domain points for the critical-current fit".to_string(),
            ));
        }
        let t_max = active.iter().map(|p| p.0).fold(0.0, f64::max);
        let i_max = active.iter().map(|p| p.1).fold(0.0, f64::max);
        let seed = [2.0 * i_max, 1.15 * t_max];
        let pts = active.clone();
        let residuals = move |p: &[f64]| -> Result<Vec<f64>> {
            let (i_c, t_cc) = (p[0], p[1]);
            if !(i_c > 0.0) || !(t_cc > 0.0) {
                return Err(Error::domain("negative fit parameters".to_string()));
            }
            Ok(pts
                .iter()
                .map(|&(t, i)| {
                    let tr = t / t_cc;
                    let model = if tr >= 1.0 { 0.0 } else { i_c * (1.0 - tr * tr).powf(1.5) };
                    (model - i) / i_max
                })
                .collect())
        };
        let out = levenberg_marquardt(residuals, &seed, &[i_max, t_max], &LmConfig::default())
            .map_err(|e| Error::fit(format!("critical-current fit failed: {e}")))?;
        let (i_c, t_cc) = (out.params[0], out.params[1]);

        // Domain audit: measured points at or above the fitted T_cc are
        // outside the model.
        let outside: Vec<usize> = (0..data.len())
            .filter(|&i| !masked.contains(&i) && data[i].0 >= t_cc)
            .collect();
        if outside.is_empty() {
            return Ok(ThermalFit {
                params: ThermalFitParams::CriticalCurrent { i_c, t_cc },
                uncertainties: out.uncertainties,
                residual_rms: out.residual_rms * i_max,
                masked,
                warnings: vec![],
            });
        }
        match policy {
            DomainPolicy::Reject => {
                return Err(Error::domain(format!(
                    "points {outside:?} lie at or above the fitted T_cc = {t_cc:.4} K; \
                     refusing to extrapolate (use the masking policy to drop them)"
                )));
            }
            DomainPolicy::Mask => {
                masked.extend(outside);
                masked.sort_unstable();
                masked.dedup();
                rounds += 1;
                if rounds > 8 {
                    return Err(Error::fit(
                        "critical-current masking did not converge".to_string(),
                    ));
                }
            }
        }
    }
}

fn fit_linear_inductance(data: &[(f64, f64)], t_cc: f64, policy: DomainPolicy) -> Result<ThermalFit> {
    if !(t_cc > 0.0) {
        return Err(Error::domain("T_cc must be positive".to_string()));
    }
    let outside: Vec<usize> = (0..data.len()).filter(|&i| data[i].0 >= t_cc).collect();
    let masked = if outside.is_empty() {
        vec![]
    } else {
        match policy {
            DomainPolicy::Reject => {
                return Err(Error::domain(format!(
                    "points {outside:?} lie at or above T_cc = {t_cc} K"
                )));
            }
            DomainPolicy::Mask => outside,
        }
    };
    let active: Vec<(f64, f64)> = data
        .iter()
        .enumerate()
        .filter(|(i, _)| !masked.contains(i))
        .map(|(_, &p)| p)
        .collect();
    if active.len() < 3 {
        return Err(Error::conditioning(
            "too few in-domain points for the L_lin fit".to_string(),
        ));
    }
    let design: Vec<Vec<f64>> = active
        .iter()
        .map(|&(t, _)| vec![1.0, 1.0 / (1.0 - (t / t_cc).powi(4))])
        .collect();
    let values: Vec<f64> = active.iter().map(|p| p.1).collect();
    let coef = linear_least_squares(&design, &values)?;
    let (l_off, l_lin0) = (coef[0], coef[1]);

    let residuals: Vec<f64> = design
        .iter()
        .zip(&values)
        .map(|(row, v)| l_off + l_lin0 * row[1] - v)
        .collect();
    let cost: f64 = residuals.iter().map(|r| r * r).sum();
    let mut warnings = vec![];
    if l_off + l_lin0 < 0.0 {
        warnings.push(format!(
            "fitted L_lin(0) = {:.3e} H is negative; the model crosses zero inside [0, T_cc)",
            l_off + l_lin0
        ));
    }
    // Covariance of the 2-parameter linear fit.
    let dof = (active.len() - 2).max(1) as f64;
    let sigma2 = cost / dof;
    let (mut s11, mut s12, mut s22) = (0.0, 0.0, 0.0);
    for row in &design {
        s11 += row[0] * row[0];
        s12 += row[0] * row[1];
        s22 += row[1] * row[1];
    }
    let det = s11 * s22 - s12 * s12;
    let uncertainties = (det > 0.0)
        .then(|| vec![(sigma2 * s22 / det).sqrt(), (sigma2 * s11 / det).sqrt()]);

    Ok(ThermalFit {
        params: ThermalFitParams::LinearInductance { l_off, l_lin0 },
        uncertainties,
        residual_rms: (cost / active.len() as f64).sqrt(),
        masked,
        warnings,
    })
}
