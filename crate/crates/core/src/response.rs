//! Driven Kerr-cavity response: linear S21, nonlinear single-tone steady
//! state, linearized two-tone susceptibility, dressed-mode shift and
//! broadening, and the intracavity pump-photon-number inversion.
//!
//! Normalization: |alpha|^2 is a photon number and |S_in|^2 an input photon
//! flux (photons/s) on the feedline.

use num_complex::Complex64;

use crate::consts::HBAR;
use crate::error::{Error, Result};
use crate::solve::cubic_real_roots;
use crate::trace::ComplexTrace;

/// A driven cavity mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityMode {
    /// Bare resonance (rad/s).
    pub omega_c: f64,
    /// Bare total linewidth (rad/s).
    pub kappa: f64,
    /// External linewidth (rad/s).
    pub kappa_e: f64,
    /// Kerr constant (rad/s per photon), negative for these circuits.
    pub kerr: f64,
    /// Nonlinear damping (rad/s per photon).
    pub kappa_nl: f64,
}

impl CavityMode {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_c > 0.0) || !(self.kappa > 0.0) {
            return Err(Error::domain(
                "cavity mode needs omega_c > 0 and kappa > 0".to_string(),
            ));
        }
        if self.kappa_e < 0.0 || self.kappa_e > self.kappa {
            return Err(Error::domain(format!(
                "kappa_e = {:.3e} must lie in [0, kappa = {:.3e}]",
                self.kappa_e, self.kappa
            )));
        }
        if self.kappa_nl < 0.0 {
            return Err(Error::domain("kappa_nl must be >= 0".to_string()));
        }
        Ok(())
    }
}

/// Linear notch response S21 = 1 - kappa_e/(kappa + 2i (omega - omega_c)).
pub fn s21_linear(omega: &[f64], mode: &CavityMode) -> Result<ComplexTrace> {
    mode.validate()?;
    let s21 = omega
        .iter()
        .map(|&w| {
            Complex64::new(1.0, 0.0)
                - mode.kappa_e / Complex64::new(mode.kappa, 2.0 * (w - mode.omega_c))
        })
        .collect();
    ComplexTrace::new(omega.to_vec(), s21)
}

/// Stability of one steady-state root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootStability {
    Stable,
    Unstable,
}

/// Steady-state photon-number solutions of the driven Kerr cavity.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    /// Real non-negative roots, ascending.
    pub roots: Vec<f64>,
    /// Stability per root; with three roots the middle one is unstable.
    pub stability: Vec<RootStability>,
    /// Set when the cubic discriminant is within 1e-12 of zero, i.e. at a
    /// fold where two roots collide.
    pub bifurcation: bool,
}

impl SteadyState {
    pub fn lowest(&self) -> f64 {
        *self.roots.first().expect("steady state always has a root")
    }
    pub fn highest(&self) -> f64 {
        *self.roots.last().expect("steady state always has a root")
    }
}

/// Root-selection policy for drive sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchPolicy {
    /// Keep the low-amplitude root while it exists (an upward power ramp).
    #[default]
    FollowFromBelow,
    /// Keep the high-amplitude root while it exists.
    FollowFromAbove,
}

impl BranchPolicy {
    pub fn select(&self, state: &SteadyState) -> f64 {
        match self {
            BranchPolicy::FollowFromBelow => state.lowest(),
            BranchPolicy::FollowFromAbove => state.highest(),
        }
    }
}

/// Solve the photon-number characteristic polynomial
/// n^3 (K^2 + knl^2/4) + n^2 (k knl/2 - 2 K D) + n (D^2 + k^2/4) = (ke/2) S0^2
/// for all physical (real, non-negative) roots.
///
/// `input_flux` is |S_in|^2 in photons/s.
pub fn steady_state(mode: &CavityMode, detuning: f64, input_flux: f64) -> Result<SteadyState> {
    mode.validate()?;
    if input_flux < 0.0 {
        return Err(Error::domain(format!(
            "input photon flux must be >= 0, got {input_flux:.3e}"
        )));
    }
    let drive = 0.5 * mode.kappa_e * input_flux;
    if drive == 0.0 {
        return Ok(SteadyState {
            roots: vec![0.0],
            stability: vec![RootStability::Stable],
            bifurcation: false,
        });
    }
    let a3 = mode.kerr * mode.kerr + 0.25 * mode.kappa_nl * mode.kappa_nl;
    let a2 = 0.5 * mode.kappa * mode.kappa_nl - 2.0 * mode.kerr * detuning;
    let a1 = detuning * detuning + 0.25 * mode.kappa * mode.kappa;
    let (raw, bifurcation) = cubic_real_roots(a3, a2, a1, -drive);

    // The polynomial is negative at n = 0 and grows without bound, so at
    // least one positive root always exists; tiny negative values are
    // solver noise.
    let mut roots: Vec<f64> = raw
        .into_iter()
        .filter(|&r| r > -1e-12 * drive / a1.max(f64::MIN_POSITIVE))
        .map(|r| r.max(0.0))
        .collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if roots.is_empty() {
        return Err(Error::solver(
            "characteristic polynomial produced no physical root".to_string(),
        ));
    }

    for &r in &roots {
        let value = ((a3 * r + a2) * r + a1) * r - drive;
        let scale = (a3 * r * r * r).abs().max((a1 * r).abs()).max(drive);
        if value.abs() > 1e-9 * scale {
            return Err(Error::solver(format!(
                "steady-state root {r:.6e} fails residual check: {:.3e} relative",
                value.abs() / scale
            )));
        }
    }

    let stability = match roots.len() {
        3 => vec![RootStability::Stable, RootStability::Unstable, RootStability::Stable],
        _ => vec![RootStability::Stable; roots.len()],
    };
    Ok(SteadyState { roots, stability, bifurcation })
}

/// Linearized two-tone transmission around a strong pump.
///
/// `pump` is (omega_p, n_c) with n_c the steady-state pump photon number.
/// S21(omega) = 1 - (kappa_e/2) chi_g(omega - omega_p).
pub fn two_tone_s21(mode: &CavityMode, pump: (f64, f64), probe: &[f64]) -> Result<ComplexTrace> {
    mode.validate()?;
    let (omega_p, n_c) = pump;
    if n_c < 0.0 {
        return Err(Error::domain("pump photon number must be >= 0".to_string()));
    }
    let delta_p = omega_p - mode.omega_c;
    let half_kappa_eff = 0.5 * (mode.kappa + 2.0 * mode.kappa_nl * n_c);
    let detune_dressed = delta_p - 2.0 * mode.kerr * n_c;
    let coupling = (mode.kerr * mode.kerr + 0.25 * mode.kappa_nl * mode.kappa_nl) * n_c * n_c;

    let s21 = probe
        .iter()
        .map(|&w| {
            let big_omega = w - omega_p;
            let chi_pr = Complex64::new(half_kappa_eff, detune_dressed + big_omega).inv();
            let chi_pr_bar = Complex64::new(half_kappa_eff, -(detune_dressed - big_omega)).inv();
            let chi_g = chi_pr / (Complex64::new(1.0, 0.0) - coupling * chi_pr * chi_pr_bar);
            Complex64::new(1.0, 0.0) - 0.5 * mode.kappa_e * chi_g
        })
        .collect();
    ComplexTrace::new(probe.to_vec(), s21)
}

/// The two dressed-mode frequencies, symmetric about the pump (rad/s).
pub fn dressed_modes(mode: &CavityMode, omega_p: f64, n_c: f64) -> Result<(f64, f64)> {
    let delta_p = omega_p - mode.omega_c;
    let root = shift_radicand(mode, delta_p, n_c)?.sqrt();
    Ok((omega_p + root, omega_p - root))
}

fn shift_radicand(mode: &CavityMode, delta_p: f64, n_c: f64) -> Result<f64> {
    let kn = mode.kerr * n_c;
    let radicand =
        (delta_p - kn) * (delta_p - 3.0 * kn) - 0.25 * mode.kappa_nl * mode.kappa_nl * n_c * n_c;
    if radicand < 0.0 {
        return Err(Error::regime(format!(
            "dressed-mode radicand is negative ({radicand:.3e}); the two-tone shift \
             formula does not apply at this drive"
        )));
    }
    Ok(radicand)
}

/// Pump-induced shift of the observed dressed mode and the pump-broadened
/// linewidth:
/// delta_omega0 = Delta_p - sqrt((Delta_p - K n)(Delta_p - 3 K n) - knl^2 n^2/4),
/// kappa_p = kappa + 2 kappa_nl n.
///
/// The shift is signed as (dressed resonance) - (bare resonance): negative
/// for a softening (K < 0) circuit pumped above resonance.
pub fn pump_shift(mode: &CavityMode, delta_p: f64, n_c: f64) -> Result<(f64, f64)> {
    mode.validate()?;
    if n_c < 0.0 {
        return Err(Error::domain("n_c must be >= 0".to_string()));
    }
    let radicand = shift_radicand(mode, delta_p, n_c)?;
    let delta_omega0 = delta_p - radicand.sqrt();
    let kappa_p = mode.kappa + 2.0 * mode.kappa_nl * n_c;
    Ok((delta_omega0, kappa_p))
}

/// Invert the measured pump-induced shift and broadening into an
/// intracavity pump photon number, without knowledge of the Kerr constant:
///
/// n_c = (2 P_p / hbar omega_p) kappa_e / (kappa_eff^2 + 4 Dtilde^2),
/// kappa_eff = kappa_0 + kappa_1, kappa_1 = (kappa_p - kappa_0)/2,
/// Dtilde^2 = (2/9) [Dp^2 + Dp sqrt(Dp^2 + 3 dk^2) + (3/2) dk^2],
/// dk^2 = delta^2 + kappa_1^2/4,
///
/// where `delta` is the magnitude of the dressed-mode offset from the pump,
/// delta = Delta_p - delta_omega0.
#[allow(clippy::too_many_arguments)]
pub fn pump_photon_number(
    pump_power: f64,
    omega_p: f64,
    kappa_e: f64,
    kappa_0: f64,
    kappa_p: f64,
    delta: f64,
    delta_p: f64,
    broadening_tolerance: f64,
) -> Result<f64> {
    if !(pump_power >= 0.0) || !(omega_p > 0.0) || !(kappa_e > 0.0) || !(kappa_0 > 0.0) {
        return Err(Error::domain(
            "pump_photon_number needs P_p >= 0, omega_p > 0, kappa_e > 0, kappa_0 > 0"
                .to_string(),
        ));
    }
    if kappa_p < kappa_0 - broadening_tolerance {
        return Err(Error::data_quality(format!(
            "pump-broadened linewidth {kappa_p:.6e} is below the bare linewidth \
             {kappa_0:.6e} beyond tolerance; the nonlinear-damping model cannot hold"
        )));
    }
    let kappa_1 = (0.5 * (kappa_p - kappa_0)).max(0.0);
    let kappa_eff = kappa_0 + kappa_1;
    let dk2 = delta * delta + 0.25 * kappa_1 * kappa_1;
    let dtilde2 = (2.0 / 9.0)
        * (delta_p * delta_p
            + delta_p * (delta_p * delta_p + 3.0 * dk2).sqrt()
            + 1.5 * dk2);
    Ok((2.0 * pump_power / (HBAR * omega_p)) * kappa_e / (kappa_eff * kappa_eff + 4.0 * dtilde2))
}

/// One measured two-tone operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoToneObservation {
    /// On-chip pump power at the feedline (W).
    pub pump_power: f64,
    /// Pump frequency (rad/s).
    pub omega_p: f64,
    /// Measured dressed-mode shift omega_0' - omega_0 (rad/s).
    pub delta_omega0: f64,
    /// Measured pump-broadened total linewidth (rad/s).
    pub kappa_p: f64,
}
