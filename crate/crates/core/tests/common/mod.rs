//! Shared test oracles. Everything here is deliberately independent of the
//! implementation paths it cross-checks: plain dense-grid bisection for the
//! flux map, Chebyshev differentiation of the numerically constructed SQUID
//! potential for the Taylor coefficients, an algebraic circle fit, and a
//! seeded Gaussian noise source.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// All roots of u + (beta/2) sin(pi u) = psi on [-1, 1], by dense sign-scan
/// plus bisection. Tolerance 1e-13 in u.
pub fn enumerate_flux_roots_dense(psi: f64, beta: f64) -> Vec<f64> {
    let f = |u: f64| u + 0.5 * beta * (std::f64::consts::PI * u).sin() - psi;
    let n = 20_000;
    let mut roots = Vec::new();
    let mut prev_u = -1.0;
    let mut prev_f = f(prev_u);
    for i in 1..=n {
        let u = -1.0 + 2.0 * i as f64 / n as f64;
        let fu = f(u);
        if prev_f == 0.0 {
            roots.push(prev_u);
        } else if prev_f.signum() != fu.signum() {
            let (mut a, mut b) = (prev_u, u);
            let mut fa = prev_f;
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fm == 0.0 || b - a < 1e-15 {
                    a = m;
                    break;
                }
                if fm.signum() == fa.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_u = u;
        prev_f = fu;
    }
    if prev_f == 0.0 {
        roots.push(prev_u);
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    roots
}

/// Solve phi + zeta sin(phi) = target on the monotone piece around `seed`
/// by bisection on an expanding bracket.
pub fn solve_arm_constraint(zeta: f64, target: f64, seed: f64) -> f64 {
    let f = |phi: f64| phi + zeta * phi.sin() - target;
    let mut step = 0.25;
    let (mut a, mut b) = (seed, seed);
    for _ in 0..200 {
        a -= step;
        b += step;
        if f(a).signum() != f(b).signum() {
            break;
        }
        step *= 1.5;
    }
    let (mut a, mut b, mut fa) = (a, b, f(a));
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || b - a < 1e-16 * (1.0 + m.abs()) {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// First derivative of the two-arm SQUID potential in junction-energy
/// units, dU/dphi_s = sin(phi1) + sin(phi2), with the junction phases
/// obtained from the current-conservation constraints
/// phi_s = phi1 + zeta sin(phi1) and phi_s = phi2 + zeta sin(phi2) - phi_ext.
pub fn potential_slope(zeta: f64, phi_ext: f64, phi_s: f64, seed1: f64, seed2: f64) -> (f64, f64, f64) {
    let phi1 = solve_arm_constraint(zeta, phi_s, seed1);
    let phi2 = solve_arm_constraint(zeta, phi_s + phi_ext, seed2);
    (phi1.sin() + phi2.sin(), phi1, phi2)
}

/// The potential itself in junction-energy units, using the constraint
/// identities (phi_s - phi1) = zeta sin(phi1) so no 1/zeta appears:
/// U/E_J = (zeta/2)(sin^2 phi1 + sin^2 phi2) - cos phi1 - cos phi2.
pub fn potential_value(zeta: f64, phi_ext: f64, phi_s: f64, seed1: f64, seed2: f64) -> f64 {
    let phi1 = solve_arm_constraint(zeta, phi_s, seed1);
    let phi2 = solve_arm_constraint(zeta, phi_s + phi_ext, seed2);
    0.5 * zeta * (phi1.sin().powi(2) + phi2.sin().powi(2)) - phi1.cos() - phi2.cos()
}

/// Chebyshev interpolation of `f` on [center-width, center+width] at the
/// N+1 extrema nodes, returning the series coefficients (DCT-I convention:
/// the reconstructed series halves the first and last coefficient).
pub fn chebyshev_coefficients<F: FnMut(f64) -> f64>(
    mut f: F,
    center: f64,
    width: f64,
    n: usize,
) -> Vec<f64> {
    let values: Vec<f64> = (0..=n)
        .map(|j| {
            let x = (std::f64::consts::PI * j as f64 / n as f64).cos();
            f(center + width * x)
        })
        .collect();
    (0..=n)
        .map(|k| {
            let mut sum = 0.5 * (values[0] + if k % 2 == 0 { values[n] } else { -values[n] });
            for j in 1..n {
                sum += values[j] * (std::f64::consts::PI * (j * k) as f64 / n as f64).cos();
            }
            2.0 * sum / n as f64
        })
        .collect()
}

/// Differentiate a Chebyshev series (coefficients in the DCT-I convention)
/// with respect to the normalized coordinate, via the backward recurrence
/// b_{k-1} = b_{k+1} + 2 k a_k.
pub fn chebyshev_derivative(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let a = |k: usize| -> f64 {
        if k == n - 1 {
            0.5 * coeffs[k]
        } else {
            coeffs[k]
        }
    };
    let mut b = vec![0.0; n + 2];
    for k in (1..n).rev() {
        b[k - 1] = b[k + 1] + 2.0 * k as f64 * a(k);
    }
    let mut out = vec![0.0; n];
    out[..(n - 1)].copy_from_slice(&b[..(n - 1)]);
    out
}

/// Evaluate a Chebyshev series (DCT-I convention) at normalized x.
pub fn chebyshev_eval(coeffs: &[f64], x: f64) -> f64 {
    let n = coeffs.len();
    if n == 0 {
        return 0.0;
    }
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for k in (1..n).rev() {
        let a = if k == n - 1 { 0.5 * coeffs[k] } else { coeffs[k] };
        let b0 = 2.0 * x * b1 - b2 + a;
        b2 = b1;
        b1 = b0;
    }
    0.5 * coeffs[0] + x * b1 - b2
}

/// Taylor coefficients c2 and c4 of the SQUID potential by Chebyshev
/// differentiation of the numerically constructed slope dU/dphi_s.
///
/// The minimum sits at phi_s = -phi_ext/2 with phi1 = -phi0; only the
/// constraint solves and numerical differentiation are used, never the
/// closed forms under test.
pub fn potential_coefficients_oracle(zeta: f64, phi0: f64) -> (f64, f64) {
    let phi_ext = 2.0 * (phi0 + zeta * phi0.sin());
    let center = -0.5 * phi_ext;
    let width = 0.3;
    let n = 24;
    // Fixed seeds are fine: the whole stencil stays on the monotone piece
    // of the constraint around the minimum.
    let (seed1, seed2) = (-phi0, phi0);
    let slope = |phi_s: f64| potential_slope(zeta, phi_ext, phi_s, seed1, seed2).0;
    let coeffs = chebyshev_coefficients(slope, center, width, n);
    let d1 = chebyshev_derivative(&coeffs);
    let d2 = chebyshev_derivative(&d1);
    let d3 = chebyshev_derivative(&d2);
    let c2 = chebyshev_eval(&d1, 0.0) / width;
    let c4 = chebyshev_eval(&d3, 0.0) / width.powi(3);
    (c2, c4)
}

/// Algebraic (Kasa) circle fit; returns (center_x, center_y, radius).
pub fn fit_circle(points: &[(f64, f64)]) -> (f64, f64, f64) {
    // Normal equations for x^2 + y^2 + D x + E y + F = 0.
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for &(x, y) in points {
        let row = [x, y, 1.0];
        let val = -(x * x + y * y);
        for i in 0..3 {
            rhs[i] += row[i] * val;
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting on the 3x3 system.
    let mut a = [[0.0f64; 4]; 3];
    for i in 0..3 {
        a[i][..3].copy_from_slice(&m[i]);
        a[i][3] = rhs[i];
    }
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut sol = [0.0f64; 3];
    for i in (0..3).rev() {
        let mut s = a[i][3];
        for k in i + 1..3 {
            s -= a[i][k] * sol[k];
        }
        sol[i] = s / a[i][i];
    }
    let (d, e, f) = (sol[0], sol[1], sol[2]);
    let cx = -0.5 * d;
    let cy = -0.5 * e;
    (cx, cy, (cx * cx + cy * cy - f).max(0.0).sqrt())
}

/// Deterministic standard-normal sampler (Box-Muller over ChaCha8).
pub struct GaussianSource {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    pub fn new(seed: u64) -> Self {
        GaussianSource { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    pub fn next(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        let u1: f64 = self.rng.random::<f64>().max(1e-300);
        let u2: f64 = self.rng.random();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    pub fn next_complex(&mut self, sigma: f64) -> Complex64 {
        Complex64::new(self.next(), self.next()) * (sigma / std::f64::consts::SQRT_2)
    }
}

#[allow(unused_imports)]
pub use helpers::*;

mod helpers {
    /// Relative difference |a - b| / max(|a|, |b|, floor).
    pub fn rel_diff(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }
}
