//! Frequency dependence of the external linewidth, modeled by a
//! fourth-order polynomial over the flux-tuning range, with a windowed
//! min/max query for uncertainty propagation.

use crate::error::{Error, Result};
use crate::fit::lm::linear_least_squares;

/// Degree-4 polynomial model of kappa_e(omega_0) with the fit data retained
/// for nearest-point fallback outside the covered range.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaEProfile {
    center: f64,
    span: f64,
    coeffs: [f64; 5],
    omega_min: f64,
    omega_max: f64,
    points: Vec<(f64, f64)>,
}

/// A windowed query: the central value with its max/min over the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaEBounds {
    pub kappa_e: f64,
    pub kappa_e_plus: f64,
    pub kappa_e_minus: f64,
}

/// Fit the profile to measured (omega_0, kappa_e) pairs.
pub fn kappa_e_profile(points: &[(f64, f64)]) -> Result<KappaEProfile> {
    if points.len() < 6 {
        return Err(Error::conditioning(format!(
            "kappa_e profile needs at least 6 points for a degree-4 polynomial, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !(p.0 > 0.0) || !(p.1 >= 0.0)) {
        return Err(Error::domain("profile points must have omega > 0, kappa_e >= 0".to_string()));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let omega_min = sorted.first().unwrap().0;
    let omega_max = sorted.last().unwrap().0;
    if omega_max <= omega_min {
        return Err(Error::conditioning("profile points span zero frequency range".to_string()));
    }
    let center = 0.5 * (omega_min + omega_max);
    let span = 0.5 * (omega_max - omega_min);
    let design: Vec<Vec<f64>> = sorted
        .iter()
        .map(|&(w, _)| {
            let x = (w - center) / span;
            vec![1.0, x, x * x, x * x * x, x * x * x * x]
        })
        .collect();
    let values: Vec<f64> = sorted.iter().map(|p| p.1).collect();
    let c = linear_least_squares(&design, &values)?;
    Ok(KappaEProfile {
        center,
        span,
        coeffs: [c[0], c[1], c[2], c[3], c[4]],
        omega_min,
        omega_max,
        points: sorted,
    })
}

impl KappaEProfile {
    fn poly(&self, omega: f64) -> f64 {
        let x = (omega - self.center) / self.span;
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    fn nearest_point(&self, omega: f64) -> f64 {
        self.points
            .iter()
            .min_by(|a, b| {
                (a.0 - omega).abs().partial_cmp(&(b.0 - omega).abs()).unwrap()
            })
            .unwrap()
            .1
    }

    /// Profile value at `omega`. Inside the fitted range this is the
    /// polynomial; outside it the closest available point is substituted
    /// rather than extrapolating the polynomial.
    pub fn value(&self, omega: f64) -> f64 {
        if omega < self.omega_min || omega > self.omega_max {
            self.nearest_point(omega)
        } else {
            self.poly(omega)
        }
    }

    /// Central value plus the max/min of the profile within
    /// [omega - window/2, omega + window/2], clipped to the fitted range.
    pub fn query(&self, omega: f64, window: f64) -> KappaEBounds {
        let kappa_e = self.value(omega);
        let lo = (omega - 0.5 * window).max(self.omega_min);
        let hi = (omega + 0.5 * window).min(self.omega_max);
        if !(hi > lo) {
            // The window misses the covered range entirely.
            return KappaEBounds { kappa_e, kappa_e_plus: kappa_e, kappa_e_minus: kappa_e };
        }
        let mut max = f64::NEG_INFINITY;
        let mut min = f64::INFINITY;
        let n = 256;
        for k in 0..=n {
            let w = lo + (hi - lo) * k as f64 / n as f64;
            let v = self.poly(w);
            max = max.max(v);
            min = min.min(v);
        }
        KappaEBounds {
            kappa_e,
            kappa_e_plus: max.max(kappa_e),
            kappa_e_minus: min.min(kappa_e),
        }
    }
}
