//! Two-step background correction of raw transmission traces: optional
//! complex division by a resonance-free reference, then a fit-based removal
//! of the residual amplitude/phase background and the Fano rotation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fit::lm::{levenberg_marquardt, linear_least_squares, LmConfig};
use crate::fit::resonance::notch_seeds;
use crate::trace::ComplexTrace;

/// Smooth multiplicative background of a transmission measurement:
/// (a0 + a1 w + a2 w^2) e^{i (phi0 + phi1 w)}, plus the Fano rotation
/// `theta` of the resonance circle. The polynomial coefficients apply to
/// the angular frequency in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundModel {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub theta: f64,
}

impl BackgroundModel {
    pub fn identity() -> Self {
        BackgroundModel { a0: 1.0, a1: 0.0, a2: 0.0, phi0: 0.0, phi1: 0.0, theta: 0.0 }
    }

    pub fn amplitude(&self, omega: f64) -> f64 {
        self.a0 + self.a1 * omega + self.a2 * omega * omega
    }

    pub fn evaluate(&self, omega: f64) -> Complex64 {
        Complex64::from_polar(self.amplitude(omega), self.phi0 + self.phi1 * omega)
    }

    /// The amplitude polynomial must stay positive over the fitted window.
    pub fn amplitude_positive_over(&self, omega: &[f64]) -> bool {
        omega.iter().all(|&w| self.amplitude(w) > 0.0)
    }

    /// Apply the background to an ideal response (synthesis direction).
    /// `ideal_minus_notch` is f(w) in S21_ideal = 1 - f(w); the dressed
    /// response is (1 - f e^{i theta}) times the smooth background.
    pub fn apply(&self, omega: f64, ideal_minus_notch: Complex64) -> Complex64 {
        let rotated = Complex64::new(1.0, 0.0)
            - ideal_minus_notch * Complex64::from_polar(1.0, self.theta);
        rotated * self.evaluate(omega)
    }
}

/// How the resonance window is masked during the seed stage of the
/// background fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionPolicy {
    /// Half-width of the masked window in units of the estimated total
    /// linewidth.
    pub mask_linewidths: f64,
    /// Minimum normalized dip depth below which the trace is treated as
    /// resonance-free.
    pub min_dip_depth: f64,
}

impl Default for CorrectionPolicy {
    fn default() -> Self {
        CorrectionPolicy { mask_linewidths: 5.0, min_dip_depth: 0.05 }
    }
}

/// Output of the background correction.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectedTrace {
    pub trace: ComplexTrace,
    pub background: BackgroundModel,
    /// False for a degenerate, resonance-free input; the trace is then only
    /// background-divided and theta is zero.
    pub resonance_found: bool,
}

/// Two-step background correction.
///
/// Step one divides by the resonance-free `reference` trace when one is
/// available. Step two masks the resonance window and fits the amplitude
/// and phase polynomials on the remaining samples to seed a joint fit of
/// background times rotated notch over the full trace; the fitted
/// background is divided off and the resonance circle is rotated by the
/// fitted Fano angle about its off-resonant anchor at 1 + 0i.
pub fn correct_trace(
    raw: &ComplexTrace,
    reference: Option<&ComplexTrace>,
    policy: &CorrectionPolicy,
) -> Result<CorrectedTrace> {
    let working = match reference {
        Some(r) => raw.divide(r)?,
        None => raw.clone(),
    };
    if working.len() < 24 {
        return Err(Error::domain(format!(
            "trace too short for background correction: {} points",
            working.len()
        )));
    }

    let seeds = notch_seeds(&working);
    let mask = match &seeds {
        Ok(s) if s.depth >= policy.min_dip_depth => {
            Some((s.omega_0, policy.mask_linewidths * s.kappa_total))
        }
        _ => None,
    };

    let keep: Vec<usize> = match mask {
        Some((center, half_width)) => {
            let mut idx: Vec<usize> = (0..working.len())
                .filter(|&i| (working.omega[i] - center).abs() > half_width)
                .collect();
            // A mask that swallows almost the whole trace leaves nothing to
            // anchor the background; keep the outermost 20% on each side.
            let need = (working.len() / 5).max(8);
            if idx.len() < need {
                let n = working.len();
                idx = (0..need / 2).chain(n - need / 2..n).collect();
            }
            idx
        }
        None => (0..working.len()).collect(),
    };

    let frame = Frame::of(&working.omega);
    let bg_seed = fit_background_polynomials(&working, &keep, &frame)?;

    let Some(_) = mask else {
        // Degenerate trace: divide the polynomial background off and flag.
        let background = frame.to_background(&bg_seed, 0.0);
        if !background.amplitude_positive_over(&working.omega) {
            return Err(Error::fit(
                "fitted background amplitude is not positive over the window".to_string(),
            ));
        }
        let divided: Vec<Complex64> = working
            .omega
            .iter()
            .zip(&working.s21)
            .map(|(&w, s)| s / background.evaluate(w))
            .collect();
        return Ok(CorrectedTrace {
            trace: ComplexTrace::new(working.omega.clone(), divided)?,
            background,
            resonance_found: false,
        });
    };

    // Joint fit of background and rotated notch over the whole trace. This
    // removes the bias the masked seed fit picks up from the notch wings.
    let s = seeds.expect("mask implies seeds");
    // Seed the Fano angle from the dip of the seed-background-divided data:
    // there 1 - S points along e^{i theta}.
    let theta_seed = {
        let bg0 = frame.to_background(&bg_seed, 0.0);
        let i0 = working.argmin_magnitude();
        let div = working.s21[i0] / bg0.evaluate(working.omega[i0]);
        (Complex64::new(1.0, 0.0) - div).arg()
    };
    let p0 = [
        s.omega_0,
        s.kappa_i.max(1e-9),
        s.kappa_e.max(1e-9),
        theta_seed,
        bg_seed[0],
        bg_seed[1],
        bg_seed[2],
        bg_seed[3],
        bg_seed[4],
    ];
    let scales = [
        s.omega_0.abs(),
        s.kappa_total,
        s.kappa_total,
        1.0,
        bg_seed[0].abs().max(0.1),
        1.0,
        1.0,
        1.0,
        1.0,
    ];
    let omega = working.omega.clone();
    let data = working.s21.clone();
    let frame_fit = frame;
    let residuals = move |p: &[f64]| -> Result<Vec<f64>> {
        let (w0, ki, ke, th) = (p[0], p[1], p[2], p[3]);
        if ki < 0.0 || ke <= 0.0 {
            return Err(Error::domain("linewidths out of range".to_string()));
        }
        let kappa = ki + ke;
        let mut r = Vec::with_capacity(2 * omega.len());
        for (&w, d) in omega.iter().zip(&data) {
            let x = frame_fit.x(w);
            let amp = p[4] + p[5] * x + p[6] * x * x;
            let notch = Complex64::new(1.0, 0.0)
                - Complex64::from_polar(1.0, th) * ke / Complex64::new(kappa, 2.0 * (w - w0));
            let model = notch * Complex64::from_polar(amp, p[7] + p[8] * x);
            r.push(model.re - d.re);
            r.push(model.im - d.im);
        }
        Ok(r)
    };
    let out = levenberg_marquardt(residuals, &p0, &scales, &LmConfig::default())
        .map_err(|e| Error::fit(format!("joint background/notch fit failed: {e}")))?;

    let theta = wrap_angle(out.params[3]);
    let background = frame.to_background(&out.params[4..9].try_into().unwrap(), theta);
    if !background.amplitude_positive_over(&working.omega) {
        return Err(Error::fit(
            "fitted background amplitude is not positive over the window".to_string(),
        ));
    }

    let rot = Complex64::from_polar(1.0, -theta);
    let corrected: Vec<Complex64> = working
        .omega
        .iter()
        .zip(&working.s21)
        .map(|(&w, s)| {
            let divided = s / background.evaluate(w);
            Complex64::new(1.0, 0.0) + rot * (divided - Complex64::new(1.0, 0.0))
        })
        .collect();

    Ok(CorrectedTrace {
        trace: ComplexTrace::new(working.omega.clone(), corrected)?,
        background,
        resonance_found: true,
    })
}

/// Wrap an angle into (-pi, pi].
fn wrap_angle(theta: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut t = theta % tau;
    if t > std::f64::consts::PI {
        t -= tau;
    }
    if t <= -std::f64::consts::PI {
        t += tau;
    }
    t
}

/// Normalized frequency frame used to keep polynomial fits conditioned.
#[derive(Debug, Clone, Copy)]
struct Frame {
    center: f64,
    span: f64,
}

impl Frame {
    fn of(omega: &[f64]) -> Frame {
        let lo = omega[0];
        let hi = *omega.last().unwrap();
        Frame { center: 0.5 * (lo + hi), span: (0.5 * (hi - lo)).max(f64::MIN_POSITIVE) }
    }

    fn x(&self, omega: f64) -> f64 {
        (omega - self.center) / self.span
    }

    /// Convert normalized-coordinate coefficients
    /// [b0, b1, b2, p0, p1] into raw rad/s coefficients.
    fn to_background(self, b: &[f64; 5], theta: f64) -> BackgroundModel {
        let (c, s) = (self.center, self.span);
        BackgroundModel {
            a0: b[0] - b[1] * c / s + b[2] * c * c / (s * s),
            a1: b[1] / s - 2.0 * b[2] * c / (s * s),
            a2: b[2] / (s * s),
            phi0: b[3] - b[4] * c / s,
            phi1: b[4] / s,
            theta,
        }
    }
}

/// Masked linear fits of |S21| and unwrapped arg(S21); returns normalized
/// coefficients [b0, b1, b2, p0, p1].
fn fit_background_polynomials(
    trace: &ComplexTrace,
    keep: &[usize],
    frame: &Frame,
) -> Result<[f64; 5]> {
    if keep.len() < 6 {
        return Err(Error::conditioning(format!(
            "only {} background samples survive the resonance mask",
            keep.len()
        )));
    }
    let design: Vec<Vec<f64>> = keep
        .iter()
        .map(|&i| {
            let xi = frame.x(trace.omega[i]);
            vec![1.0, xi, xi * xi]
        })
        .collect();
    let mags: Vec<f64> = keep.iter().map(|&i| trace.s21[i].norm()).collect();
    let b = linear_least_squares(&design, &mags)?;

    // Unwrapped phase over the full grid so the masked gap cannot introduce
    // a 2 pi ambiguity, then fit on the kept samples only.
    let mut phases = Vec::with_capacity(trace.len());
    let mut prev = trace.s21[0].arg();
    let mut offset = 0.0;
    for s in &trace.s21 {
        let mut p = s.arg();
        while p + offset - prev > std::f64::consts::PI {
            offset -= 2.0 * std::f64::consts::PI;
        }
        while p + offset - prev < -std::f64::consts::PI {
            offset += 2.0 * std::f64::consts::PI;
        }
        p += offset;
        phases.push(p);
        prev = p;
    }
    let ph_design: Vec<Vec<f64>> = keep
        .iter()
        .map(|&i| vec![1.0, frame.x(trace.omega[i])])
        .collect();
    let ph_values: Vec<f64> = keep.iter().map(|&i| phases[i]).collect();
    let p = linear_least_squares(&ph_design, &ph_values)?;

    Ok([b[0], b[1], b[2], p[0], p[1]])
}
