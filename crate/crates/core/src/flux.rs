//! Flux quantization, flux-tuned resonance, hysteretic branch tracking,
//! flux responsivity and the constriction current-phase relation.
//!
//! Flux states live on winding branches labeled by an integer `n` (the
//! number of trapped flux quanta). On branch `n` the junction phase is
//! `pi*u` with `u = phi_total - n`, and the screening equation reads
//! `u = (phi_ext - n) - (beta_L/2) sin(pi*u)`. Every arch is the `n = 0`
//! arch shifted by `n`, which produces the observed flux-quantum
//! periodicity.

use crate::circuit::CircuitParams;
use crate::consts::PHI0;
use crate::error::{Error, Result};
use crate::solve::newton_bracketed;

const TAU: f64 = 2.0 * std::f64::consts::PI;
const PI: f64 = std::f64::consts::PI;

/// Junction and loop parameters of the symmetric nanobridge SQUID.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquidParams {
    /// Junction critical current I_0 (A).
    pub i_0: f64,
    /// Linear constriction inductance L_lin (H).
    pub l_lin: f64,
    /// Loop self-inductance (H).
    pub l_loop: f64,
}

impl SquidParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.i_0 > 0.0) {
            return Err(Error::domain(format!("I_0 must be > 0, got {:.3e}", self.i_0)));
        }
        if self.l_lin < 0.0 || self.l_loop < 0.0 {
            return Err(Error::domain(
                "L_lin and L_loop must be >= 0".to_string(),
            ));
        }
        Ok(())
    }

    /// Construct from the sweetspot Josephson inductance instead of I_0.
    pub fn from_l_j0(l_j0: f64, l_lin: f64, l_loop: f64) -> Result<Self> {
        if !(l_j0 > 0.0) {
            return Err(Error::domain(format!("L_J0 must be > 0, got {l_j0:.3e}")));
        }
        Ok(Self { i_0: PHI0 / (TAU * l_j0), l_lin, l_loop })
    }

    /// Sweetspot Josephson inductance L_J0 = Phi0/(2 pi I_0) (H).
    pub fn l_j0(&self) -> f64 {
        PHI0 / (TAU * self.i_0)
    }

    /// Arm inductance L_loop/2 + L_lin (H).
    pub fn l_arm(&self) -> f64 {
        0.5 * self.l_loop + self.l_lin
    }

    /// Screening parameter beta_L = 2 I_0 (L_loop + 2 L_lin)/Phi0.
    pub fn beta_l(&self) -> f64 {
        screening_parameter(self.i_0, self.l_loop, self.l_lin)
    }
}

/// beta_L = 2 I_0 (L_loop + 2 L_lin) / Phi0.
pub fn screening_parameter(i_0: f64, l_loop: f64, l_lin: f64) -> f64 {
    2.0 * i_0 * (l_loop + 2.0 * l_lin) / PHI0
}

/// Stability of a flux solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxStability {
    /// Positive Josephson inductance, positive d(phi_ext)/d(phi_total).
    Stable,
    /// The junction phase has passed pi/2: the Josephson inductance is
    /// negative but the screening map has not folded yet.
    ReversedJunction,
    /// Past the fold: d(phi_ext)/d(phi_total) < 0.
    Unstable,
}

/// One solution of the screening equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxPoint {
    /// External flux (units of Phi0).
    pub phi_ext: f64,
    /// Total flux in the loop (units of Phi0).
    pub phi_total: f64,
    /// Winding branch n; the junction phase is pi*(phi_total - n).
    pub branch_index: i32,
    pub stability: FluxStability,
}

impl FluxPoint {
    /// Junction phase pi*u (rad).
    pub fn junction_phase(&self) -> f64 {
        PI * (self.phi_total - self.branch_index as f64)
    }

    /// Residual of the screening equation on this point's branch, in Phi0.
    pub fn branch_residual(&self, beta_l: f64) -> f64 {
        let n = self.branch_index as f64;
        let u = self.phi_total - n;
        u - (self.phi_ext - n) + 0.5 * beta_l * (PI * u).sin()
    }
}

fn classify(u: f64, beta_l: f64) -> FluxStability {
    let c = (PI * u).cos();
    if 1.0 + 0.5 * PI * beta_l * c < 0.0 {
        FluxStability::Unstable
    } else if c <= 0.0 {
        FluxStability::ReversedJunction
    } else {
        FluxStability::Stable
    }
}

/// Screening map g(u) = u + (beta_L/2) sin(pi u) and its derivative.
fn screening_map(u: f64, beta_l: f64) -> (f64, f64) {
    (
        u + 0.5 * beta_l * (PI * u).sin(),
        1.0 + 0.5 * PI * beta_l * (PI * u).cos(),
    )
}

/// All roots of the branch-n screening equation with junction phase in
/// (-pi, pi), i.e. u in [-1, 1], sorted by u.
///
/// The map is split at its analytic turning points, so each monotone piece
/// holds at most one root and none is missed.
pub fn enumerate_branch_roots(phi_ext: f64, beta_l: f64, branch: i32) -> Result<Vec<FluxPoint>> {
    if beta_l < 0.0 {
        return Err(Error::domain(format!("beta_L must be >= 0, got {beta_l}")));
    }
    let psi = phi_ext - branch as f64;
    // Turning points of g on [-1, 1]: cos(pi u*) = -2/(pi beta_L).
    let mut breaks = vec![-1.0];
    if beta_l > 2.0 / PI {
        let u_star = (-2.0 / (PI * beta_l)).acos() / PI;
        breaks.push(-u_star);
        breaks.push(u_star);
    }
    breaks.push(1.0);

    let mut roots = Vec::new();
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (ga, _) = screening_map(a, beta_l);
        let (gb, _) = screening_map(b, beta_l);
        let (fa, fb) = (ga - psi, gb - psi);
        if fa == 0.0 {
            push_root(&mut roots, phi_ext, beta_l, branch, a);
            continue;
        }
        if fa.signum() == fb.signum() && fb != 0.0 {
            continue;
        }
        let u = newton_bracketed(
            |u| {
                let (g, dg) = screening_map(u, beta_l);
                (g - psi, dg)
            },
            a,
            b,
            0.5 * (a + b),
            1e-15,
            200,
        )?;
        push_root(&mut roots, phi_ext, beta_l, branch, u);
    }
    // The piece boundaries can duplicate a root that sits exactly on a
    // turning point.
    roots.dedup_by(|x, y| (x.phi_total - y.phi_total).abs() < 1e-12);
    Ok(roots)
}

fn push_root(roots: &mut Vec<FluxPoint>, phi_ext: f64, beta_l: f64, branch: i32, u: f64) {
    roots.push(FluxPoint {
        phi_ext,
        phi_total: branch as f64 + u,
        branch_index: branch,
        stability: classify(u, beta_l),
    });
}

/// Solve the screening equation for the total flux.
///
/// `seed` is a guess for phi_total and selects both the winding branch and,
/// for beta_L > 2/pi, the root within a multivalued branch. Branch
/// continuation along a sweep passes the previous solution as the seed.
pub fn solve_total_flux(phi_ext: f64, beta_l: f64, seed: f64) -> Result<FluxPoint> {
    if beta_l < 0.0 {
        return Err(Error::domain(format!("beta_L must be >= 0, got {beta_l}")));
    }
    // Candidate branches: around the seed, plus every branch that can host
    // a root at this flux (|phi_ext - n| <= g(1) = 1), so a far-off seed
    // still resolves to the nearest valid solution.
    let center = seed.round() as i32;
    let mut candidates = vec![center - 1, center, center + 1];
    let lo = (phi_ext - 1.0).floor() as i32;
    let hi = (phi_ext + 1.0).ceil() as i32;
    for n in lo..=hi {
        if !candidates.contains(&n) {
            candidates.push(n);
        }
    }
    // Distance to the seed decides; ties (e.g. the same total flux reached
    // as a branch-edge pi-state of the neighbor) go to the stabler root
    // with the smaller junction phase.
    let rank = |s: FluxStability| match s {
        FluxStability::Stable => 0,
        FluxStability::ReversedJunction => 1,
        FluxStability::Unstable => 2,
    };
    let mut best: Option<FluxPoint> = None;
    for branch in candidates {
        for root in enumerate_branch_roots(phi_ext, beta_l, branch)? {
            let better = match &best {
                None => true,
                Some(b) => {
                    let (da, db) = ((root.phi_total - seed).abs(), (b.phi_total - seed).abs());
                    if (da - db).abs() > 1e-9 {
                        da < db
                    } else if rank(root.stability) != rank(b.stability) {
                        rank(root.stability) < rank(b.stability)
                    } else {
                        root.junction_phase().abs() < b.junction_phase().abs()
                    }
                }
            };
            if better {
                best = Some(root);
            }
        }
    }
    best.ok_or_else(|| {
        Error::solver(format!(
            "no flux solution near seed {seed:.6} for phi_ext = {phi_ext:.6}, beta_L = {beta_l:.4}"
        ))
    })
}

/// Solve on the central monotone piece of an explicit branch (the segment
/// containing the arch center, |u| below the fold). This is the root a fit
/// to observable arch data wants, and it is unique when it exists.
pub fn solve_central_on_branch(phi_ext: f64, beta_l: f64, branch: i32) -> Result<FluxPoint> {
    if beta_l < 0.0 {
        return Err(Error::domain(format!("beta_L must be >= 0, got {beta_l}")));
    }
    let psi = phi_ext - branch as f64;
    let u_max = if beta_l > 2.0 / PI {
        (-2.0 / (PI * beta_l)).acos() / PI
    } else {
        1.0
    };
    let (g_hi, _) = screening_map(u_max, beta_l);
    if psi.abs() > g_hi {
        return Err(Error::solver(format!(
            "phi_ext = {phi_ext:.6} is beyond the branch-{branch} arch edge (|psi| <= {g_hi:.6})"
        )));
    }
    let u = newton_bracketed(
        |u| {
            let (g, dg) = screening_map(u, beta_l);
            (g - psi, dg)
        },
        -u_max,
        u_max,
        psi.clamp(-u_max, u_max),
        1e-15,
        200,
    )?;
    Ok(FluxPoint {
        phi_ext,
        phi_total: branch as f64 + u,
        branch_index: branch,
        stability: classify(u, beta_l),
    })
}

/// Solve on an explicit branch, seeded at junction-phase coordinate `u_seed`.
pub fn solve_on_branch(phi_ext: f64, beta_l: f64, branch: i32, u_seed: f64) -> Result<FluxPoint> {
    let roots = enumerate_branch_roots(phi_ext, beta_l, branch)?;
    roots
        .into_iter()
        .min_by(|a, b| {
            let da = (a.phi_total - branch as f64 - u_seed).abs();
            let db = (b.phi_total - branch as f64 - u_seed).abs();
            da.partial_cmp(&db).unwrap()
        })
        .ok_or_else(|| {
            Error::solver(format!(
                "branch {branch} has no flux solution at phi_ext = {phi_ext:.6} (beta_L = {beta_l:.4})"
            ))
        })
}

/// Resonance of the SQUID circuit at one flux solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxResonance {
    pub flux: FluxPoint,
    /// Resonance frequency (rad/s); `None` when the inductance budget turns
    /// the squared frequency negative (no real mode).
    pub omega_0: Option<f64>,
}

/// omega_0(phi_ext) = omega_b / sqrt(1 + (L_lin + L_J0/cos(pi u)) / 2L).
pub fn resonance_at_flux(
    circuit: &CircuitParams,
    squid: &SquidParams,
    omega_b: f64,
    phi_ext: f64,
    seed: f64,
) -> Result<FluxResonance> {
    circuit.validate()?;
    squid.validate()?;
    let flux = solve_total_flux(phi_ext, squid.beta_l(), seed)?;
    resonance_at_point(circuit, squid, omega_b, flux)
}

fn resonance_at_point(
    circuit: &CircuitParams,
    squid: &SquidParams,
    omega_b: f64,
    flux: FluxPoint,
) -> Result<FluxResonance> {
    let cos = flux.junction_phase().cos();
    if cos.abs() < 1e-9 {
        return Err(Error::singular(format!(
            "Josephson inductance diverges at junction phase {:.9} rad (phi_ext = {:.6})",
            flux.junction_phase(),
            flux.phi_ext
        )));
    }
    let l_j = squid.l_j0() / cos;
    let arg = 1.0 + (squid.l_lin + l_j) / (2.0 * circuit.l);
    let omega_0 = if arg > 0.0 { Some(omega_b / arg.sqrt()) } else { None };
    Ok(FluxResonance { flux, omega_0 })
}

/// Which way a flux sweep traverses its grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDirection {
    Up,
    Down,
}

/// When a tracked flux state is abandoned during a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JumpPolicy {
    /// Follow the tracked branch while it stays stable (positive Josephson
    /// inductance, before the fold), then relax to the nearest-center
    /// branch. This is the zero-fluctuation sweep that produces the
    /// direction-dependent, overlapping archs of hysteretic devices.
    #[default]
    Metastable,
    /// Relax to the nearest-center branch at every point; archs hand over
    /// at half-integer flux and up/down sweeps coincide, the idealized
    /// behavior of a device whose barriers are thermally washed out.
    GroundState,
}

/// One sample of a flux-tuning curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningPoint {
    pub phi_ext: f64,
    pub flux: FluxPoint,
    pub omega_0: Option<f64>,
    /// d(omega_0)/d(phi_ext) in rad/s per Phi0, by centered difference on
    /// the analytic curve; `None` where a neighbor is invalid.
    pub responsivity: Option<f64>,
}

/// A branch-continued flux-tuning curve. Points are stored in traversal
/// order (ascending phi_ext for an up sweep, descending for a down sweep).
#[derive(Debug, Clone, PartialEq)]
pub struct TuningCurve {
    pub points: Vec<TuningPoint>,
    pub sweep: SweepDirection,
}

impl TuningCurve {
    /// (min, max, span) of omega_0 over stable points.
    pub fn tuning_range(&self) -> Option<(f64, f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &self.points {
            if p.flux.stability == FluxStability::Stable {
                if let Some(w) = p.omega_0 {
                    lo = lo.min(w);
                    hi = hi.max(w);
                }
            }
        }
        (lo.is_finite() && hi.is_finite()).then_some((lo, hi, hi - lo))
    }

    /// Largest |responsivity| over stable points (rad/s per Phi0).
    pub fn max_responsivity(&self) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.flux.stability == FluxStability::Stable)
            .filter_map(|p| p.responsivity.map(f64::abs))
            .max_by(|a, b| a.partial_cmp(b).unwrap())
    }
}

/// Sweep the flux grid with branch continuation.
///
/// Each point is seeded from the previous solution; when the tracked state
/// is abandoned per the jump policy, the sweep relaxes to the branch
/// nearest the applied flux and continues there.
pub fn tuning_curve(
    circuit: &CircuitParams,
    squid: &SquidParams,
    omega_b: f64,
    flux_grid: &[f64],
    sweep: SweepDirection,
    jump: JumpPolicy,
) -> Result<TuningCurve> {
    circuit.validate()?;
    squid.validate()?;
    if flux_grid.is_empty() {
        return Err(Error::domain("empty flux grid".to_string()));
    }
    for w in flux_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::domain(
                "flux grid must be strictly increasing".to_string(),
            ));
        }
    }
    let beta = squid.beta_l();
    let order: Vec<usize> = match sweep {
        SweepDirection::Up => (0..flux_grid.len()).collect(),
        SweepDirection::Down => (0..flux_grid.len()).rev().collect(),
    };

    let mut points = Vec::with_capacity(flux_grid.len());
    let mut branch = flux_grid[order[0]].round() as i32;
    let mut u_prev = flux_grid[order[0]] - branch as f64;
    for &idx in &order {
        let phi = flux_grid[idx];
        let relax = |phi: f64| -> Result<FluxPoint> {
            let n = phi.round() as i32;
            solve_central_on_branch(phi, beta, n)
                .map_err(|e| Error::solver(format!("flux sweep failed at phi_ext = {phi:.6}: {e}")))
        };
        let flux = match jump {
            JumpPolicy::GroundState => relax(phi)?,
            JumpPolicy::Metastable => match solve_on_branch(phi, beta, branch, u_prev) {
                Ok(p) if p.stability == FluxStability::Stable => p,
                // The tracked state lost stability or its root vanished at
                // a fold: the system drops into the nearest-center well.
                _ => relax(phi)?,
            },
        };
        branch = flux.branch_index;
        u_prev = flux.phi_total - branch as f64;

        let res = resonance_at_point(circuit, squid, omega_b, flux);
        let omega_0 = match &res {
            Ok(r) => r.omega_0,
            Err(_) => None,
        };
        let responsivity = responsivity_at(circuit, squid, omega_b, phi, branch, u_prev);
        points.push(TuningPoint { phi_ext: phi, flux, omega_0, responsivity });
    }
    Ok(TuningCurve { points, sweep })
}

/// Centered difference of the analytic branch curve, step 1e-4 Phi0.
fn responsivity_at(
    circuit: &CircuitParams,
    squid: &SquidParams,
    omega_b: f64,
    phi: f64,
    branch: i32,
    u_seed: f64,
) -> Option<f64> {
    let beta = squid.beta_l();
    let h = 1e-4;
    let eval = |p: f64| -> Option<f64> {
        let flux = solve_on_branch(p, beta, branch, u_seed).ok()?;
        resonance_at_point(circuit, squid, omega_b, flux).ok()?.omega_0
    };
    let (lo, hi) = (eval(phi - h)?, eval(phi + h)?);
    Some((hi - lo) / (2.0 * h))
}

/// Current-phase relation of a single constriction, modeled as an ideal
/// sinusoidal junction in series with a linear inductance.
///
/// phi_tot(I) = (-1)^n asin(I/I_0) + (2 pi/Phi0) L_lin I + n pi.
pub fn cpr_curve(
    currents: &[f64],
    i_0: f64,
    l_lin: f64,
    branch: i32,
) -> Result<Vec<(f64, f64)>> {
    if !(i_0 > 0.0) {
        return Err(Error::domain(format!("I_0 must be > 0, got {i_0:.3e}")));
    }
    if l_lin < 0.0 {
        return Err(Error::domain(format!("L_lin must be >= 0, got {l_lin:.3e}")));
    }
    let sign = if branch % 2 == 0 { 1.0 } else { -1.0 };
    let mut out = Vec::with_capacity(currents.len());
    for &i in currents {
        // Representation noise right at the critical current is clamped;
        // anything beyond it is a genuine domain violation.
        if i.abs() > i_0 * (1.0 + 16.0 * f64::EPSILON) {
            return Err(Error::domain(format!(
                "|I| = {:.3e} exceeds I_0 = {i_0:.3e}",
                i.abs()
            )));
        }
        let i = i.clamp(-i_0, i_0);
        let phase = sign * (i / i_0).asin() + TAU * l_lin * i / PHI0 + branch as f64 * PI;
        out.push((phase, i));
    }
    Ok(out)
}

/// Forward skew of the CPR: phase of maximum current minus pi/2 (branch 0).
pub fn cpr_skew(i_0: f64, l_lin: f64) -> f64 {
    TAU * l_lin * i_0 / PHI0
}
