//! Support for the acceptance suite: an independent bisection oracle for
//! the flux map, a Chebyshev-differentiation oracle for the potential
//! coefficients, a seeded Gaussian source, and a pass/fail line printer.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// All roots of u + (beta/2) sin(pi u) = psi on [-1, 1] by dense sign-scan
/// plus bisection; independent of the production solver.
pub fn enumerate_flux_roots_dense(psi: f64, beta: f64, scan: usize) -> Vec<f64> {
    let f = |u: f64| u + 0.5 * beta * (std::f64::consts::PI * u).sin() - psi;
    let mut roots = Vec::new();
    let mut prev_u = -1.0;
    let mut prev_f = f(prev_u);
    for i in 1..=scan {
        let u = -1.0 + 2.0 * i as f64 / scan as f64;
        let fu = f(u);
        if prev_f == 0.0 {
            roots.push(prev_u);
        } else if prev_f.signum() != fu.signum() {
            let (mut a, mut b, mut fa) = (prev_u, u, prev_f);
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

fn solve_arm_constraint(zeta: f64, target: f64, seed: f64) -> f64 {
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
    let mut fa = f(a);
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

fn chebyshev_coefficients<F: FnMut(f64) -> f64>(
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

fn chebyshev_derivative(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let a = |k: usize| if k == n - 1 { 0.5 * coeffs[k] } else { coeffs[k] };
    let mut b = vec![0.0; n + 2];
    for k in (1..n).rev() {
        b[k - 1] = b[k + 1] + 2.0 * k as f64 * a(k);
    }
    let mut out = vec![0.0; n];
    out[..(n - 1)].copy_from_slice(&b[..(n - 1)]);
    out
}

fn chebyshev_eval(coeffs: &[f64], x: f64) -> f64 {
    let n = coeffs.len();
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

/// (c2, c4) by numerical differentiation of the constraint-solved potential
/// slope; never touches the closed forms under test.
pub fn potential_coefficients_oracle(zeta: f64, phi0: f64) -> (f64, f64) {
    let phi_ext = 2.0 * (phi0 + zeta * phi0.sin());
    let center = -0.5 * phi_ext;
    let width = 0.3;
    let slope = |phi_s: f64| {
        let phi1 = solve_arm_constraint(zeta, phi_s, -phi0);
        let phi2 = solve_arm_constraint(zeta, phi_s + phi_ext, phi0);
        phi1.sin() + phi2.sin()
    };
    let coeffs = chebyshev_coefficients(slope, center, width, 24);
    let d1 = chebyshev_derivative(&coeffs);
    let d3 = chebyshev_derivative(&chebyshev_derivative(&d1));
    (chebyshev_eval(&d1, 0.0) / width, chebyshev_eval(&d3, 0.0) / width.powi(3))
}

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

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Run one acceptance criterion, printing a single pass/fail line.
pub fn criterion<F: FnOnce() + std::panic::UnwindSafe>(id: &str, name: &str, body: F) {
    let start = std::time::Instant::now();
    let outcome = std::panic::catch_unwind(body);
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Ok(()) => println!("[acceptance] criterion {id} {name}: PASS ({elapsed:.2} s)"),
        Err(e) => {
            println!("[acceptance] criterion {id} {name}: FAIL ({elapsed:.2} s)");
            std::panic::resume_unwind(e);
        }
    }
}
