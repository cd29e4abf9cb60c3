//! Linear-circuit algebra of the resonator before and after constriction
//! cutting: LC resonance, linewidth/coupling relations and the series ↔
//! parallel impedance transforms of the lossy constriction branch.

use crate::error::{Error, Result};

/// Linear electricals of the resonator, the circuit before any junction is
/// cut into the loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    /// Total linear inductance L (H), geometric plus kinetic, including the
    /// loop contribution.
    pub l: f64,
    /// Circuit capacitance C (F).
    pub c: f64,
    /// Coupling capacitance C_c to the feedline (F).
    pub c_c: f64,
    /// Feedline characteristic impedance Z0 (Ohm).
    pub z0: f64,
    /// SQUID loop self-inductance (H).
    pub l_loop: f64,
    /// Optional parallel loss resistance R (Ohm); kappa_i,b = 1/(R C_tot).
    pub r: Option<f64>,
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.l > 0.0) {
            return Err(Error::domain(format!("L must be > 0, got {:.3e}", self.l)));
        }
        if !(self.c > 0.0) {
            return Err(Error::domain(format!("C must be > 0, got {:.3e}", self.c)));
        }
        if self.c_c < 0.0 {
            return Err(Error::domain(format!("C_c must be >= 0, got {:.3e}", self.c_c)));
        }
        if !(self.z0 > 0.0) {
            return Err(Error::domain(format!("Z0 must be > 0, got {:.3e}", self.z0)));
        }
        if self.l_loop < 0.0 || self.l_loop >= 4.0 * self.l {
            return Err(Error::domain(format!(
                "L_loop must lie in [0, 4L); got {:.3e} with L = {:.3e}",
                self.l_loop, self.l
            )));
        }
        if let Some(r) = self.r {
            if !(r > 0.0) {
                return Err(Error::domain(format!("R must be > 0 when present, got {r:.3e}")));
            }
        }
        Ok(())
    }

    /// Total capacitance C + C_c (F).
    pub fn c_tot(&self) -> f64 {
        self.c + self.c_c
    }

    /// Resonance of the bare circuit, omega_b = 1/sqrt(L (C + C_c)).
    pub fn omega_b(&self) -> Result<f64> {
        self.validate()?;
        resonance_from_lc(self.l, self.c_tot())
    }

    /// Internal linewidth of the bare circuit from the parallel loss
    /// resistance, kappa_i,b = 1/(R C_tot). Zero when no R is set.
    pub fn kappa_i_b(&self) -> f64 {
        match self.r {
            Some(r) => 1.0 / (r * self.c_tot()),
            None => 0.0,
        }
    }

    /// Both bare-circuit linewidths: the external rate from the coupling
    /// capacitance, the internal one from the parallel loss resistance.
    pub fn bare_linewidths(&self) -> Result<Linewidths> {
        let omega_b = self.omega_b()?;
        Linewidths::new(
            self.kappa_i_b(),
            coupling_rate(omega_b, self.c_c, self.c_tot(), self.z0)?,
        )
    }
}

/// The lossy constriction branch: total inductance with an optional
/// parallel resistance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstrictionElement {
    /// Total single-constriction inductance L_c (H).
    pub l_c: f64,
    /// Parallel constriction resistance R_c (Ohm), if the branch is lossy.
    pub r_c: Option<f64>,
}

impl ConstrictionElement {
    pub fn validate(&self) -> Result<()> {
        if self.l_c < 0.0 {
            return Err(Error::domain(format!("L_c must be >= 0, got {:.3e}", self.l_c)));
        }
        if let Some(r) = self.r_c {
            if !(r > 0.0) {
                return Err(Error::domain(format!("R_c must be > 0 when present, got {r:.3e}")));
            }
        }
        Ok(())
    }

    /// Internal linewidth this branch adds to a circuit of inductance `l`
    /// at resonance `omega_0`, through the exact transform chain; zero for
    /// a lossless branch.
    pub fn added_linewidth(&self, omega_0: f64, l: f64) -> Result<f64> {
        self.validate()?;
        match self.r_c {
            Some(r_c) if self.l_c > 0.0 => constriction_linewidth_exact(omega_0, l, self.l_c, r_c),
            _ => Ok(0.0),
        }
    }
}

/// Internal and external linewidths (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linewidths {
    pub kappa_i: f64,
    pub kappa_e: f64,
}

impl Linewidths {
    pub fn new(kappa_i: f64, kappa_e: f64) -> Result<Self> {
        if kappa_i < 0.0 || kappa_e < 0.0 {
            return Err(Error::domain(format!(
                "linewidths must be >= 0, got kappa_i = {kappa_i:.3e}, kappa_e = {kappa_e:.3e}"
            )));
        }
        Ok(Self { kappa_i, kappa_e })
    }

    pub fn total(&self) -> f64 {
        self.kappa_i + self.kappa_e
    }
}

/// omega = 1/sqrt(L C) for a parallel LC (rad/s).
pub fn resonance_from_lc(l_tot: f64, c_tot: f64) -> Result<f64> {
    if !(l_tot > 0.0) || !(c_tot > 0.0) {
        return Err(Error::domain(format!(
            "LC resonance needs positive L and C, got L = {l_tot:.3e}, C = {c_tot:.3e}"
        )));
    }
    Ok(1.0 / (l_tot * c_tot).sqrt())
}

/// Single-constriction inductance from the cutting-induced frequency shift,
/// L_c = 2L (omega_b^2/omega_0^2 - 1).
pub fn constriction_inductance_from_shift(omega_b: f64, omega_0: f64, l: f64) -> Result<f64> {
    if !(omega_b > 0.0) || !(omega_0 > 0.0) || !(l > 0.0) {
        return Err(Error::domain(
            "frequencies and inductance must be positive".to_string(),
        ));
    }
    if omega_0 > omega_b {
        return Err(Error::domain(format!(
            "omega_0 = {omega_0:.6e} exceeds omega_b = {omega_b:.6e}; a negative added \
             inductance is unphysical"
        )));
    }
    let ratio = omega_b / omega_0;
    Ok(2.0 * l * (ratio * ratio - 1.0))
}

/// Forward form of Eq. for the shift: omega_0 = omega_b/sqrt(1 + L_c/2L).
pub fn resonance_with_constriction(omega_b: f64, l_c: f64, l: f64) -> Result<f64> {
    if !(omega_b > 0.0) || !(l > 0.0) || l_c < 0.0 {
        return Err(Error::domain(
            "resonance_with_constriction needs omega_b > 0, L > 0, L_c >= 0".to_string(),
        ));
    }
    Ok(omega_b / (1.0 + l_c / (2.0 * l)).sqrt())
}

/// External coupling rate of the side-coupled circuit,
/// kappa_e = omega_b^2 C_c^2 Z0 / (2 C_tot).
pub fn coupling_rate(omega_b: f64, c_c: f64, c_tot: f64, z0: f64) -> Result<f64> {
    if !(omega_b > 0.0) || !(c_tot > 0.0) || !(z0 > 0.0) || c_c < 0.0 {
        return Err(Error::domain("coupling_rate: invalid inputs".to_string()));
    }
    Ok(omega_b * omega_b * c_c * c_c * z0 / (2.0 * c_tot))
}

/// Inverse of [`coupling_rate`]: the coupling capacitance that produces a
/// measured kappa_e (positive root).
pub fn coupling_capacitance_from_rate(
    kappa_e: f64,
    omega_b: f64,
    c_tot: f64,
    z0: f64,
) -> Result<f64> {
    if !(kappa_e > 0.0) {
        return Err(Error::domain(format!(
            "inverse coupling relation needs kappa_e > 0, got {kappa_e:.3e}"
        )));
    }
    if !(omega_b > 0.0) || !(c_tot > 0.0) || !(z0 > 0.0) {
        return Err(Error::domain("coupling inverse: invalid inputs".to_string()));
    }
    Ok((2.0 * kappa_e * c_tot / (z0 * omega_b * omega_b)).sqrt())
}

/// Inversion mode for [`constriction_resistance_from_linewidth`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResistanceMode {
    /// Invert kappa_c = omega_0^2 L_c^2 / ((2L + L_c) R_c), valid for
    /// R_c^2 >> omega_0^2 L_c^2.
    Approximate,
    /// Invert the full series/parallel transform chain numerically.
    Exact,
}

/// Result of a constriction-resistance extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstrictionResistance {
    pub r_c: f64,
    /// True when R_c is large enough (R_c >= 50 omega_0 L_c) that the
    /// approximate and exact inversions agree to a couple of percent.
    pub in_validity_regime: bool,
}

/// Constriction linewidth for a given R_c through the full transform chain.
///
/// The parallel (R_c, L_c) branch is folded into the circuit inductor as a
/// series (R_+, L_+) pair and then back into a parallel (R*, L*) pair; with
/// C_tot eliminated through omega_0^2 = 1/(C_tot L*) the added linewidth
/// collapses to kappa_c = R_+ / L_+.
pub fn constriction_linewidth_exact(omega_0: f64, l: f64, l_c: f64, r_c: f64) -> Result<f64> {
    if !(omega_0 > 0.0) || !(l > 0.0) || !(l_c > 0.0) || !(r_c > 0.0) {
        return Err(Error::domain(
            "constriction_linewidth_exact needs positive inputs".to_string(),
        ));
    }
    let wl = omega_0 * l_c;
    let denom = r_c * r_c + wl * wl;
    let r_plus = 0.5 * wl * wl * r_c / denom;
    let l_plus = l + 0.5 * l_c * r_c * r_c / denom;
    Ok(r_plus / l_plus)
}

/// Extract R_c from a measured constriction linewidth.
///
/// In exact mode the linewidth has a maximum over R_c; a measured value
/// above that maximum has no solution on the physical (weak-loss) branch
/// and is rejected rather than silently extrapolated.
pub fn constriction_resistance_from_linewidth(
    kappa_c: f64,
    omega_0: f64,
    l: f64,
    l_c: f64,
    mode: ResistanceMode,
) -> Result<ConstrictionResistance> {
    if !(kappa_c > 0.0) {
        return Err(Error::domain(format!(
            "kappa_c must be > 0, got {kappa_c:.3e}"
        )));
    }
    if !(omega_0 > 0.0) || !(l > 0.0) || !(l_c > 0.0) {
        return Err(Error::domain(
            "resistance extraction needs positive omega_0, L, L_c".to_string(),
        ));
    }
    let r_c = match mode {
        ResistanceMode::Approximate => {
            omega_0 * omega_0 * l_c * l_c / ((2.0 * l + l_c) * kappa_c)
        }
        ResistanceMode::Exact => {
            // kappa(R_c) rises to a single maximum near R_c ~ omega_0 L_c and
            // falls off on the weak-loss branch beyond it. Locate the peak,
            // then solve on the decreasing branch.
            let wl = omega_0 * l_c;
            let peak = golden_max(
                |r| constriction_linewidth_exact(omega_0, l, l_c, r).unwrap_or(0.0),
                1e-6 * wl,
                1e6 * wl,
            );
            let kappa_max = constriction_linewidth_exact(omega_0, l, l_c, peak)?;
            if kappa_c > kappa_max * (1.0 - 1e-12) {
                return Err(Error::regime(format!(
                    "measured kappa_c = {kappa_c:.6e} rad/s exceeds the maximum \
                     {kappa_max:.6e} reachable by a parallel R_c; the weak-loss \
                     inversion does not apply"
                )));
            }
            // Bracket on the decreasing branch: kappa(peak) > kappa_c,
            // kappa(R) -> 0 as R -> inf.
            let mut hi = peak * 2.0;
            while constriction_linewidth_exact(omega_0, l, l_c, hi)? > kappa_c {
                hi *= 2.0;
                if hi > 1e18 {
                    return Err(Error::solver(
                        "failed to bracket R_c on the weak-loss branch".to_string(),
                    ));
                }
            }
            let f = |r: f64| {
                let k = constriction_linewidth_exact(omega_0, l, l_c, r).unwrap_or(f64::NAN);
                // Derivative by small central difference; the function is
                // smooth and the bracket keeps Newton honest.
                let h = r * 1e-7;
                let kp = constriction_linewidth_exact(omega_0, l, l_c, r + h).unwrap_or(k);
                let km = constriction_linewidth_exact(omega_0, l, l_c, r - h).unwrap_or(k);
                (k - kappa_c, (kp - km) / (2.0 * h))
            };
            crate::solve::newton_bracketed(f, peak, hi, 0.5 * (peak + hi), 1e-14, 200)?
        }
    };
    Ok(ConstrictionResistance {
        r_c,
        in_validity_regime: r_c >= 50.0 * omega_0 * l_c,
    })
}

/// Golden-section search for the maximum of a unimodal function.
fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    // Work in log space; the peak location spans decades.
    let (mut la, mut lb) = (a.ln(), b.ln());
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    for _ in 0..200 {
        let x1 = lb - phi * (lb - la);
        let x2 = la + phi * (lb - la);
        if f(x1.exp()) < f(x2.exp()) {
            la = x1;
        } else {
            lb = x2;
        }
        if lb - la < 1e-12 {
            break;
        }
    }
    a = la.exp();
    b = lb.exp();
    0.5 * (a + b)
}
