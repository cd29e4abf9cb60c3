//! Least-squares fit of flux-tuning curves: junction inductances, screening
//! parameter and (optionally) the coil-current-to-flux calibration.

use crate::circuit::CircuitParams;
use crate::error::{Error, Result};
use crate::fit::lm::{levenberg_marquardt, LmConfig};
use crate::flux::{solve_central_on_branch, SquidParams};

/// Whether the horizontal axis of the data is already flux or a coil
/// current that still needs a period/offset calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxAxis {
    /// x values are phi_ext in Phi0 units; period and offset are fixed at
    /// (1, 0).
    Flux,
    /// x values are coil current (A); period (A per Phi0) and offset (A)
    /// are fitted jointly with the arch shape.
    CoilCurrent,
}

/// Result of a flux-arch fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxFit {
    /// Sweetspot Josephson inductance (H).
    pub l_j0: f64,
    /// Linear constriction inductance (H).
    pub l_lin: f64,
    /// Screening parameter from the fitted inductances and the supplied
    /// loop inductance (the two closed forms agree identically).
    pub beta_l: f64,
    /// x units per flux quantum.
    pub period: f64,
    /// x value of the zero-flux sweetspot.
    pub offset: f64,
    /// Branch index assigned to every input point.
    pub branch_assignments: Vec<i32>,
    pub residual_rms: f64,
    /// One-sigma uncertainties in fit-parameter order
    /// (L_J0, L_lin[, period, offset]).
    pub uncertainties: Option<Vec<f64>>,
    /// Singular values of the scaled Jacobian; a large spread signals
    /// insufficient flux coverage.
    pub singular_values: Vec<f64>,
    pub conditioning_warning: Option<String>,
}

/// Fit Josephson and linear inductances (plus the flux-axis calibration)
/// to measured (x, omega_0) points.
///
/// `branch_labels` may pin each point to a winding branch; otherwise points
/// are segmented at frequency jumps and each segment is assigned by
/// residual comparison, which handles hysteretic overlap without mixing
/// branches.
pub fn fit_tuning_curve(
    points: &[(f64, f64)],
    circuit: &CircuitParams,
    omega_b: f64,
    axis: FluxAxis,
    branch_labels: Option<&[i32]>,
) -> Result<FluxFit> {
    fit_tuning_curve_seeded(points, circuit, omega_b, axis, branch_labels, None)
}

/// [`fit_tuning_curve`] with an explicit (period, offset) starting point
/// for the flux-axis calibration. Needed when the data cover only a single
/// arch, where the period cannot be seeded from peak spacing.
pub fn fit_tuning_curve_seeded(
    points: &[(f64, f64)],
    circuit: &CircuitParams,
    omega_b: f64,
    axis: FluxAxis,
    branch_labels: Option<&[i32]>,
    calibration_seed: Option<(f64, f64)>,
) -> Result<FluxFit> {
    circuit.validate()?;
    if points.len() < 8 {
        return Err(Error::conditioning(format!(
            "flux fit needs at least 8 points, got {}",
            points.len()
        )));
    }
    if let Some(labels) = branch_labels {
        if labels.len() != points.len() {
            return Err(Error::alignment(
                "branch label count does not match point count".to_string(),
            ));
        }
    }
    if points.iter().any(|p| !(p.1 > 0.0) || !p.0.is_finite()) {
        return Err(Error::domain("flux-fit points must be finite with omega_0 > 0".to_string()));
    }

    let (period0, offset0) = match (axis, calibration_seed) {
        (FluxAxis::Flux, _) => (1.0, 0.0),
        (FluxAxis::CoilCurrent, Some(seed)) => {
            if !(seed.0.abs() > 0.0) {
                return Err(Error::domain("calibration seed period must be nonzero".to_string()));
            }
            // Refine the seed offset to the nearest data peak.
            let top = points
                .iter()
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .expect("points nonempty");
            let refined = seed.1 + seed.0 * ((top.0 - seed.1) / seed.0).round();
            (seed.0, refined)
        }
        (FluxAxis::CoilCurrent, None) => seed_calibration(points)?,
    };

    // Joint seed search: the sweetspot pins L_J0 + L_lin, and a scan over
    // the Josephson fraction picks the split together with the best branch
    // assignment for each candidate.
    let (l_j0_seed, l_lin_seed, branches) =
        seed_search(points, circuit, omega_b, period0, offset0, branch_labels)?;

    let fit_axis = axis == FluxAxis::CoilCurrent;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ws: Vec<f64> = points.iter().map(|p| p.1).collect();
    let l = circuit.l;
    let l_loop = circuit.l_loop;

    let make_residuals = |branches_for_fit: Vec<i32>| {
        let xs = xs.clone();
        let ws = ws.clone();
        move |p: &[f64]| -> Result<Vec<f64>> {
            let (l_j0, l_lin) = (p[0], p[1]);
            let (period, offset) = if fit_axis { (p[2], p[3]) } else { (1.0, 0.0) };
            if !(l_j0 > 0.0) || l_lin < 0.0 || !(period.abs() > 0.0) {
                return Err(Error::domain("parameters out of range".to_string()));
            }
            let squid = SquidParams::from_l_j0(l_j0, l_lin, l_loop)?;
            let beta = squid.beta_l();
            let mut r = Vec::with_capacity(xs.len());
            for ((&x, &w), &n) in xs.iter().zip(&ws).zip(&branches_for_fit) {
                let phi = (x - offset) / period;
                // Points the trial model cannot reach get a large finite
                // penalty instead of aborting the fit, so poor intermediate
                // parameters are steered away from rather than fatal.
                let model = solve_central_on_branch(phi, beta, n).ok().and_then(|flux| {
                    let cos = flux.junction_phase().cos();
                    if cos.abs() < 1e-9 {
                        return None;
                    }
                    let arg = 1.0 + (l_lin + l_j0 / cos) / (2.0 * l);
                    (arg > 0.0).then(|| omega_b / arg.sqrt())
                });
                // Normalized so the cost is dimensionless.
                r.push(match model {
                    Some(m) => (m - w) / omega_b,
                    None => 10.0,
                });
            }
            Ok(r)
        }
    };

    let (p0, scales): (Vec<f64>, Vec<f64>) = if fit_axis {
        (
            vec![l_j0_seed, l_lin_seed.max(0.02 * l_j0_seed), period0, offset0],
            vec![l_j0_seed, l_j0_seed.max(l_lin_seed), period0.abs(), period0.abs()],
        )
    } else {
        (
            vec![l_j0_seed, l_lin_seed.max(0.02 * l_j0_seed)],
            vec![l_j0_seed, l_j0_seed.max(l_lin_seed)],
        )
    };

    // Fit, then (for automatic labels) reassign branches with the fitted
    // calibration and refit until the assignment is stable. Mislabeled
    // points right at an arch crossing otherwise bias the calibration.
    let mut branches = branches;
    let mut out = levenberg_marquardt(make_residuals(branches.clone()), &p0, &scales, &LmConfig::default())
        .map_err(|e| {
            Error::fit(format!(
                "flux-arch fit failed (seeds L_J0 = {:.3e} H, L_lin = {:.3e} H): {e}",
                l_j0_seed, l_lin_seed
            ))
        })?;
    if branch_labels.is_none() {
        for _ in 0..3 {
            let (period, offset) =
                if fit_axis { (out.params[2], out.params[3]) } else { (1.0, 0.0) };
            let relabeled = assign_branches(
                points,
                circuit,
                omega_b,
                (out.params[0], out.params[1], period, offset),
            )?
            .0;
            if relabeled == branches {
                break;
            }
            branches = relabeled;
            out = levenberg_marquardt(
                make_residuals(branches.clone()),
                &out.params.clone(),
                &scales,
                &LmConfig::default(),
            )
            .map_err(|e| Error::fit(format!("flux-arch refit failed: {e}")))?;
        }
    }

    let l_j0 = out.params[0];
    let l_lin = out.params[1];
    let (period, offset) = if fit_axis { (out.params[2], out.params[3]) } else { (1.0, 0.0) };
    let squid = SquidParams::from_l_j0(l_j0, l_lin, circuit.l_loop)?;

    let conditioning_warning = {
        let smin = out.singular_values.last().copied().unwrap_or(0.0);
        let smax = out.singular_values.first().copied().unwrap_or(0.0);
        (smin <= 1e-10 * smax).then(|| {
            format!(
                "flux coverage poorly constrains the fit; singular values {:?}",
                out.singular_values
            )
        })
    };

    Ok(FluxFit {
        l_j0,
        l_lin,
        beta_l: squid.beta_l(),
        period,
        offset,
        branch_assignments: branches,
        residual_rms: out.residual_rms * omega_b,
        uncertainties: out.uncertainties,
        singular_values: out.singular_values,
        conditioning_warning,
    })
}

/// Seed the coil-current calibration from the arch peaks.
fn seed_calibration(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let n = points.len();
    let window = (n / 20).max(2);
    let mut peaks: Vec<usize> = Vec::new();
    let w_min = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let w_max = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let threshold = w_min + 0.7 * (w_max - w_min);
    for i in 0..n {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(n);
        let is_peak = (lo..hi).all(|j| points[j].1 <= points[i].1) && points[i].1 >= threshold;
        if is_peak && peaks.last().map_or(true, |&p| i - p > window) {
            peaks.push(i);
        }
    }
    if peaks.len() < 2 {
        return Err(Error::conditioning(format!(
            "cannot seed the flux-axis calibration: found {} arch peak(s), need at least 2 \
             (insufficient flux coverage)",
            peaks.len()
        )));
    }
    let spacings: Vec<f64> = peaks.windows(2).map(|p| points[p[1]].0 - points[p[0]].0).collect();
    let mut sorted = spacings.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let period = sorted[sorted.len() / 2];
    let top = peaks
        .iter()
        .max_by(|&&a, &&b| points[a].1.partial_cmp(&points[b].1).unwrap())
        .copied()
        .unwrap();
    Ok((period, points[top].0))
}

/// Joint search for the inductance seeds and branch assignment.
fn seed_search(
    points: &[(f64, f64)],
    circuit: &CircuitParams,
    omega_b: f64,
    period: f64,
    offset: f64,
    branch_labels: Option<&[i32]>,
) -> Result<(f64, f64, Vec<i32>)> {
    let w_max = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let total = 2.0 * circuit.l * ((omega_b / w_max).powi(2) - 1.0);
    if !(total > 0.0) {
        return Err(Error::fit(
            "sweetspot frequency is not below the bare resonance; cannot seed the arch fit"
                .to_string(),
        ));
    }
    // The sweetspot pins L_J0 + L_lin; a deterministic scan over the
    // Josephson fraction picks the split, scoring each candidate together
    // with its best branch assignment.
    let mut best = (f64::INFINITY, 0.5 * total, 0.5 * total, vec![0i32; points.len()]);
    for step in 1..20 {
        let f = step as f64 / 20.0;
        let l_j0 = f * total;
        let l_lin = total - l_j0;
        let (labels, sse) = match branch_labels {
            Some(labels) => {
                let sse = assignment_sse(points, circuit, omega_b, (l_j0, l_lin, period, offset), labels);
                (labels.to_vec(), sse)
            }
            None => assign_branches(points, circuit, omega_b, (l_j0, l_lin, period, offset))?,
        };
        if sse < best.0 {
            best = (sse, l_j0, l_lin, labels);
        }
    }
    Ok((best.1, best.2, best.3))
}

/// Seed-model residual of a full assignment.
fn assignment_sse(
    points: &[(f64, f64)],
    circuit: &CircuitParams,
    omega_b: f64,
    seeds: (f64, f64, f64, f64),
    labels: &[i32],
) -> f64 {
    let (l_j0, l_lin, period, offset) = seeds;
    let squid = match SquidParams::from_l_j0(l_j0, l_lin, circuit.l_loop) {
        Ok(s) => s,
        Err(_) => return f64::INFINITY,
    };
    let beta = squid.beta_l();
    points
        .iter()
        .zip(labels)
        .map(|(&(x, w), &b)| {
            let phi = (x - offset) / period;
            let model = solve_central_on_branch(phi, beta, b).ok().and_then(|flux| {
                let cos = flux.junction_phase().cos();
                if cos.abs() < 1e-9 {
                    return None;
                }
                let arg = 1.0 + (l_lin + l_j0 / cos) / (2.0 * circuit.l);
                (arg > 0.0).then(|| omega_b / arg.sqrt())
            });
            let r = match model {
                Some(m) => (m - w) / omega_b,
                None => 10.0,
            };
            r * r
        })
        .sum()
}

/// Split at frequency jumps and assign each segment the branch option with
/// the smaller seed-model residual; returns the labels with their total
/// residual.
fn assign_branches(
    points: &[(f64, f64)],
    circuit: &CircuitParams,
    omega_b: f64,
    seeds: (f64, f64, f64, f64),
) -> Result<(Vec<i32>, f64)> {
    let (l_j0, l_lin, period, offset) = seeds;
    let n = points.len();
    // Jump detection on consecutive frequency differences: a jump is an
    // outlier at 5 sigma of the local scatter.
    let diffs: Vec<f64> = points.windows(2).map(|p| p[1].1 - p[0].1).collect();
    let mut abs_sorted: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    abs_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let med = abs_sorted[abs_sorted.len() / 2].max(1e-12 * omega_b);
    let mut boundaries = vec![0usize];
    for (i, d) in diffs.iter().enumerate() {
        if d.abs() > 5.0 * med.max(abs_sorted[(abs_sorted.len() * 3) / 4]) {
            boundaries.push(i + 1);
        }
    }
    boundaries.push(n);

    let squid = SquidParams::from_l_j0(l_j0, l_lin, circuit.l_loop)?;
    let beta = squid.beta_l();

    // Model residual for one point on one branch; out-of-reach points get
    // a large penalty so an assignment that cannot host the data loses.
    let point_sse = |x: f64, w: f64, branch: i32| -> f64 {
        let phi = (x - offset) / period;
        let model = solve_central_on_branch(phi, beta, branch).ok().and_then(|flux| {
            let cos = flux.junction_phase().cos();
            if cos.abs() < 1e-9 {
                return None;
            }
            let arg = 1.0 + (l_lin + l_j0 / cos) / (2.0 * circuit.l);
            (arg > 0.0).then(|| omega_b / arg.sqrt())
        });
        let r = match model {
            Some(m) => (m - w) / omega_b,
            None => 10.0,
        };
        r * r
    };

    let mut labels = vec![0i32; n];
    let mut total_sse = 0.0;
    for seg in boundaries.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        if lo >= hi {
            continue;
        }
        // Options per segment: stay on one winding branch (a metastable
        // sweep segment, candidates around the highest-frequency point) or
        // hand over at every half-integer (a continuous ground-state
        // record). The lowest seed-model residual decides.
        let peak = (lo..hi)
            .max_by(|&a, &b| points[a].1.partial_cmp(&points[b].1).unwrap())
            .unwrap();
        let phi_peak = (points[peak].0 - offset) / period;

        let per_point: Vec<i32> = points[lo..hi]
            .iter()
            .map(|&(x, _)| ((x - offset) / period).round() as i32)
            .collect();
        let mut options: Vec<Vec<i32>> = vec![per_point];
        for cand in [phi_peak.floor() as i32, phi_peak.ceil() as i32] {
            options.push(vec![cand; hi - lo]);
        }

        let mut best = (f64::INFINITY, 0usize);
        for (oi, option) in options.iter().enumerate() {
            let sse: f64 = points[lo..hi]
                .iter()
                .zip(option)
                .map(|(&(x, w), &b)| point_sse(x, w, b))
                .sum();
            if sse < best.0 {
                best = (sse, oi);
            }
        }
        labels[lo..hi].copy_from_slice(&options[best.1]);
        total_sse += best.0;
    }
    Ok((labels, total_sse))
}
