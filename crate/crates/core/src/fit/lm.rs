//! Small dense damped-least-squares (Levenberg-Marquardt) engine.
//!
//! The fit problems in this crate have at most a handful of parameters, so
//! the normal equations are solved directly by Cholesky factorization.
//! Parameters are optimized in caller-supplied scale units, which keeps the
//! finite-difference Jacobians and the damping well conditioned across the
//! ~20 orders of magnitude separating inductances from angular frequencies.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LmConfig {
    pub max_iter: usize,
    /// Relative finite-difference step in scaled units.
    pub fd_step: f64,
    /// Stop when the scaled step norm falls below this.
    pub tol_step: f64,
    /// Stop when the relative cost improvement falls below this.
    pub tol_cost: f64,
    pub initial_damping: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            max_iter: 300,
            fd_step: 1e-7,
            tol_step: 1e-12,
            tol_cost: 1e-15,
            initial_damping: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// Sum of squared residuals at the solution.
    pub cost: f64,
    pub residual_rms: f64,
    pub iterations: usize,
    /// Parameter covariance sigma^2 (J^T J)^-1, row-major; `None` when the
    /// problem has no residual degrees of freedom.
    pub covariance: Option<Vec<Vec<f64>>>,
    /// One-sigma parameter uncertainties (sqrt of the covariance diagonal).
    pub uncertainties: Option<Vec<f64>>,
    /// Singular values of the scaled Jacobian, descending.
    pub singular_values: Vec<f64>,
}

/// Minimize the sum of squares of `residuals(p)` starting from `p0`.
///
/// `scales[j]` is a typical magnitude of parameter j. The residual closure
/// may return an error for out-of-domain parameters; such trial steps are
/// rejected by raising the damping instead of aborting the fit.
pub fn levenberg_marquardt<F>(
    mut residuals: F,
    p0: &[f64],
    scales: &[f64],
    cfg: &LmConfig,
) -> Result<LmOutcome>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let np = p0.len();
    if np == 0 || scales.len() != np {
        return Err(Error::fit("parameter/scale vectors empty or mismatched".to_string()));
    }
    if scales.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::fit("parameter scales must be positive".to_string()));
    }

    let unscale = |q: &[f64]| -> Vec<f64> { q.iter().zip(scales).map(|(v, s)| v * s).collect() };
    let mut q: Vec<f64> = p0.iter().zip(scales).map(|(v, s)| v / s).collect();

    let mut r = residuals(&unscale(&q)).map_err(|e| {
        Error::fit(format!(
            "residuals undefined at the seed {:?}: {e}",
            p0.iter().map(|v| format!("{v:.6e}")).collect::<Vec<_>>()
        ))
    })?;
    let nr = r.len();
    if nr < np {
        return Err(Error::conditioning(format!(
            "{nr} residuals cannot constrain {np} parameters"
        )));
    }
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = cfg.initial_damping;
    let mut iterations = 0;
    let mut jtj = vec![vec![0.0; np]; np];
    let mut jtr = vec![0.0; np];
    let mut jac = vec![vec![0.0; np]; nr];

    for iter in 0..cfg.max_iter {
        iterations = iter + 1;
        // Finite-difference Jacobian in scaled units (forward differences,
        // falling back to backward when the forward point is out of domain).
        for j in 0..np {
            let h = cfg.fd_step * q[j].abs().max(1.0);
            let mut qj = q.clone();
            qj[j] += h;
            let (r_j, h_eff) = match residuals(&unscale(&qj)) {
                Ok(v) => (v, h),
                Err(_) => {
                    qj[j] = q[j] - h;
                    (
                        residuals(&unscale(&qj)).map_err(|e| {
                            Error::fit(format!("Jacobian column {j} undefined on both sides: {e}"))
                        })?,
                        -h,
                    )
                }
            };
            if r_j.len() != nr {
                return Err(Error::fit("residual count changed during fit".to_string()));
            }
            for i in 0..nr {
                jac[i][j] = (r_j[i] - r[i]) / h_eff;
            }
        }
        for a in 0..np {
            jtr[a] = (0..nr).map(|i| jac[i][a] * r[i]).sum();
            for b in a..np {
                let v = (0..nr).map(|i| jac[i][a] * jac[i][b]).sum();
                jtj[a][b] = v;
                jtj[b][a] = v;
            }
        }

        let grad_norm = jtr.iter().map(|v| v * v).sum::<f64>().sqrt();
        if grad_norm < 1e-14 * (1.0 + cost) {
            break;
        }

        // Try damped steps, inflating lambda until one reduces the cost.
        let mut improved = false;
        for _ in 0..40 {
            let mut damped = jtj.clone();
            for (j, row) in damped.iter_mut().enumerate() {
                row[j] += lambda * jtj[j][j].max(1e-30);
            }
            let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
            let step = match cholesky_solve(&damped, &rhs) {
                Some(s) => s,
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let q_trial: Vec<f64> = q.iter().zip(&step).map(|(a, b)| a + b).collect();
            match residuals(&unscale(&q_trial)) {
                Ok(r_trial) => {
                    let cost_trial: f64 = r_trial.iter().map(|v| v * v).sum();
                    if cost_trial < cost {
                        let step_norm = step.iter().map(|v| v * v).sum::<f64>().sqrt();
                        let rel_gain = (cost - cost_trial) / cost.max(1e-300);
                        q = q_trial;
                        r = r_trial;
                        cost = cost_trial;
                        lambda = (lambda * 0.3).max(1e-14);
                        improved = true;
                        if step_norm < cfg.tol_step || rel_gain < cfg.tol_cost {
                            iterations = iter + 1;
                            return finish(q, scales, cost, nr, np, &jac, iterations, &mut residuals, unscale);
                        }
                        break;
                    }
                    lambda *= 10.0;
                }
                Err(_) => lambda *= 10.0,
            }
            if lambda > 1e14 {
                break;
            }
        }
        if !improved {
            break;
        }
    }

    finish(q, scales, cost, nr, np, &jac, iterations, &mut residuals, unscale)
}

#[allow(clippy::too_many_arguments)]
fn finish<F>(
    q: Vec<f64>,
    scales: &[f64],
    cost: f64,
    nr: usize,
    np: usize,
    jac: &[Vec<f64>],
    iterations: usize,
    residuals: &mut F,
    unscale: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<LmOutcome>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let params = unscale(&q);
    // Refresh the Jacobian at the solution for covariance reporting.
    let mut jtj = vec![vec![0.0; np]; np];
    let r0 = residuals(&params)?;
    let mut jac_final = jac.to_vec();
    for j in 0..np {
        let h = 1e-7 * q[j].abs().max(1.0);
        let mut qj = q.clone();
        qj[j] += h;
        if let Ok(rj) = residuals(&unscale(&qj)) {
            for i in 0..nr {
                jac_final[i][j] = (rj[i] - r0[i]) / h;
            }
        }
    }
    for a in 0..np {
        for b in a..np {
            let v = (0..nr).map(|i| jac_final[i][a] * jac_final[i][b]).sum();
            jtj[a][b] = v;
            jtj[b][a] = v;
        }
    }
    let mut sv: Vec<f64> = jacobi_eigenvalues(&jtj)
        .into_iter()
        .map(|e| e.max(0.0).sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let dof = nr.saturating_sub(np);
    let (covariance, uncertainties) = if dof > 0 {
        let sigma2 = cost / dof as f64;
        match invert_spd(&jtj) {
            Some(inv) => {
                let cov: Vec<Vec<f64>> = (0..np)
                    .map(|a| (0..np).map(|b| sigma2 * inv[a][b] * scales[a] * scales[b]).collect())
                    .collect();
                let unc = (0..np).map(|j| cov[j][j].max(0.0).sqrt()).collect();
                (Some(cov), Some(unc))
            }
            None => (None, None),
        }
    } else {
        (None, None)
    };

    Ok(LmOutcome {
        params,
        cost,
        residual_rms: (cost / nr as f64).sqrt(),
        iterations,
        covariance,
        uncertainties,
        singular_values: sv,
    })
}

/// Solve A x = b for symmetric positive-definite A; None when the
/// factorization breaks down.
pub fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    // Forward then backward substitution.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i][k] * y[k];
        }
        y[i] = sum / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[k][i] * x[k];
        }
        x[i] = sum / l[i][i];
    }
    Some(x)
}

fn invert_spd(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut inv = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = cholesky_solve(a, &e)?;
        for i in 0..n {
            inv[i][j] = col[i];
        }
    }
    Some(inv)
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for _ in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[i][j] * m[i][j];
            }
        }
        let diag: f64 = (0..n).map(|i| m[i][i] * m[i][i]).sum();
        if off <= 1e-30 * diag.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (m[q][q] - m[p][p]) / m[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}

/// Ordinary linear least squares: minimize ||A x - y||^2.
pub fn linear_least_squares(a: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let nr = a.len();
    if nr == 0 || nr != y.len() {
        return Err(Error::conditioning("empty or mismatched design matrix".to_string()));
    }
    let np = a[0].len();
    if nr < np {
        return Err(Error::conditioning(format!(
            "{nr} rows cannot determine {np} coefficients"
        )));
    }
    let mut ata = vec![vec![0.0; np]; np];
    let mut aty = vec![0.0; np];
    for i in 0..nr {
        for p in 0..np {
            aty[p] += a[i][p] * y[i];
            for q in p..np {
                ata[p][q] += a[i][p] * a[i][q];
            }
        }
    }
    for p in 0..np {
        for q in 0..p {
            ata[p][q] = ata[q][p];
        }
    }
    cholesky_solve(&ata, &aty)
        .ok_or_else(|| Error::conditioning("normal equations are singular".to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exponential_parameters() {
        // y = a exp(-b t) sampled noiselessly.
        let (a_true, b_true) = (3.5, 0.7);
        let ts: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = ts.iter().map(|t| a_true * (-b_true * t).exp()).collect();
        let out = levenberg_marquardt(
            |p| {
                Ok(ts
                    .iter()
                    .zip(&ys)
                    .map(|(t, y)| p[0] * (-p[1] * t).exp() - y)
                    .collect())
            },
            &[1.0, 0.1],
            &[1.0, 1.0],
            &LmConfig::default(),
        )
        .unwrap();
        assert!((out.params[0] - a_true).abs() < 1e-8);
        assert!((out.params[1] - b_true).abs() < 1e-8);
        assert!(out.cost < 1e-16);
    }

    #[test]
    fn handles_extreme_parameter_scales() {
        // Same exponential but with parameters living at 1e-12 and 1e10.
        let (a_true, b_true) = (3.5e-12, 0.7e10);
        let ts: Vec<f64> = (0..40).map(|i| i as f64 * 1e-11).collect();
        let ys: Vec<f64> = ts.iter().map(|t| a_true * (-b_true * t).exp()).collect();
        let out = levenberg_marquardt(
            |p| {
                Ok(ts
                    .iter()
                    .zip(&ys)
                    .map(|(t, y)| (p[0] * (-p[1] * t).exp() - y) * 1e12)
                    .collect())
            },
            &[1e-12, 1e9],
            &[1e-12, 1e10],
            &LmConfig::default(),
        )
        .unwrap();
        assert!((out.params[0] - a_true).abs() / a_true < 1e-7);
        assert!((out.params[1] - b_true).abs() / b_true < 1e-7);
    }

    #[test]
    fn rejects_underdetermined_problems() {
        let r = levenberg_marquardt(|_p| Ok(vec![0.0]), &[1.0, 2.0], &[1.0, 1.0], &LmConfig::default());
        assert!(r.is_err());
    }

    #[test]
    fn covariance_scales_with_noise_dof() {
        // Linear model y = m t: uncertainty should match the closed form.
        let ts: Vec<f64> = (1..=50).map(|i| i as f64).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 2.0 * t + if t % 2.0 == 0.0 { 0.1 } else { -0.1 }).collect();
        let out = levenberg_marquardt(
            |p| Ok(ts.iter().zip(&ys).map(|(t, y)| p[0] * t - y).collect()),
            &[1.0],
            &[1.0],
            &LmConfig::default(),
        )
        .unwrap();
        let unc = out.uncertainties.unwrap()[0];
        let sigma2 = out.cost / (ts.len() - 1) as f64;
        let expected = (sigma2 / ts.iter().map(|t| t * t).sum::<f64>()).sqrt();
        assert!((unc - expected).abs() / expected < 1e-6);
    }

    #[test]
    fn linear_lsq_quadratic_fit() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.1 - 1.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.5 - 0.3 * x + 0.8 * x * x).collect();
        let design: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x, x * x]).collect();
        let c = linear_least_squares(&design, &ys).unwrap();
        assert!((c[0] - 1.5).abs() < 1e-12);
        assert!((c[1] + 0.3).abs() < 1e-12);
        assert!((c[2] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn jacobi_eigenvalues_of_known_matrix() {
        let m = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let mut e = jacobi_eigenvalues(&m);
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((e[0] - 1.0).abs() < 1e-12);
        assert!((e[1] - 3.0).abs() < 1e-12);
    }
}
