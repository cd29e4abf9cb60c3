//! Scalar root-finding utilities shared by the model modules.

use crate::error::{Error, Result};

/// Safeguarded Newton iteration on a bracketing interval.
///
/// `f` returns (value, derivative). The root must be bracketed by
/// `[lo, hi]` (f(lo) and f(hi) of opposite sign or zero). Newton steps that
/// leave the bracket fall back to bisection, so convergence is guaranteed
/// for continuous `f`.
pub fn newton_bracketed<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    seed: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (fa, _) = f(a);
    let (fb, _) = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::solver(format!(
            "root not bracketed on [{a:.6e}, {b:.6e}]: f(a)={fa:.3e}, f(b)={fb:.3e}"
        )));
    }
    let mut x = seed.clamp(a, b);
    for _ in 0..max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        // Shrink the bracket.
        if fx.signum() == fa.signum() {
            a = x;
        } else {
            b = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= tol * (1.0 + x.abs()) {
            // One last polish step before accepting.
            let (fn_, dfn) = f(next);
            let polished = if dfn != 0.0 { next - fn_ / dfn } else { next };
            return Ok(if polished > a && polished < b { polished } else { next });
        }
        x = next;
    }
    Err(Error::solver(format!(
        "no convergence after {max_iter} iterations; last x={x:.12e}, bracket [{a:.6e}, {b:.6e}]"
    )))
}

/// Plain bisection; used by test oracles and as a slow reliable fallback.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = f(a);
    if fa == 0.0 {
        return Ok(a);
    }
    let fb = f(b);
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::solver(format!(
            "bisection: no sign change on [{a:.6e}, {b:.6e}]"
        )));
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Real roots of a cubic `c3 x^3 + c2 x^2 + c1 x + c0 = 0`, ascending.
///
/// Degenerate leading coefficients fall through to the quadratic/linear
/// cases. The variable is rescaled so the monic coefficients are O(1)
/// before the depressed form is built; the trigonometric form handles
/// three real roots, a sign-safe Cardano form handles one, and every root
/// gets a Newton polish on the original polynomial. `near_degenerate`
/// reports a discriminant within `1e-12` of zero in normalized units (a
/// fold, where two roots collide); the double root is then recovered from
/// the derivative so that all three roots are still reported.
pub fn cubic_real_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> (Vec<f64>, bool) {
    let scale = c3.abs().max(c2.abs()).max(c1.abs()).max(c0.abs());
    if scale == 0.0 {
        return (vec![], false);
    }
    // Rescale x = s y so the monic cubic in y has O(1) coefficients. Only a
    // truly vanishing leading coefficient (monic form overflows) falls back
    // to the quadratic.
    let (b_raw, c_raw, d_raw) = (c2 / c3, c1 / c3, c0 / c3);
    if c3 == 0.0 || !(b_raw.is_finite() && c_raw.is_finite() && d_raw.is_finite()) {
        return (quadratic_real_roots(c2, c1, c0), false);
    }
    let s = (b_raw.abs())
        .max(c_raw.abs().sqrt())
        .max(d_raw.abs().cbrt())
        .max(f64::MIN_POSITIVE);
    let b = b_raw / s;
    let c = c_raw / (s * s);
    let d = d_raw / (s * s * s);

    // Depressed form t^3 + p t + q with y = t - b/3.
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    let norm = (half_q * half_q).max((third_p * third_p * third_p).abs());
    let near_degenerate = norm > 0.0 && disc.abs() <= 1e-12 * norm;

    let mut roots_y = if near_degenerate && third_p != 0.0 {
        // At a fold the simple root is 3q/p and the double root -3q/(2p);
        // the latter is also the root of the derivative 3t^2 + p.
        let simple = 3.0 * q / p;
        let double = -1.5 * q / p;
        vec![simple - shift, double - shift, double - shift]
    } else if disc > 0.0 {
        // One real root. Pick the cube-root branch with the same sign as
        // -q/2 to avoid cancellation.
        let sq = disc.sqrt();
        let u = (-half_q + sq.copysign(-half_q)).cbrt();
        let v = if u != 0.0 { -third_p / u } else { 0.0 };
        vec![u + v - shift]
    } else {
        // Three real roots (trigonometric form).
        let m = (-third_p).max(0.0).sqrt();
        if m == 0.0 {
            vec![-shift]
        } else {
            let arg = (-half_q / (m * m * m)).clamp(-1.0, 1.0);
            let theta = arg.acos() / 3.0;
            let two_pi_3 = 2.0 * std::f64::consts::PI / 3.0;
            (0..3)
                .map(|k| 2.0 * m * (theta - two_pi_3 * k as f64).cos() - shift)
                .collect()
        }
    };

    let mut roots: Vec<f64> = roots_y
        .iter_mut()
        .map(|y| polish_cubic_root(c3, c2, c1, c0, *y * s))
        .collect();
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    (roots, near_degenerate)
}

fn quadratic_real_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return vec![];
    }
    if a.abs() < 1e-14 * scale {
        if b.abs() < 1e-14 * scale {
            return vec![];
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let s = disc.sqrt();
    // Citardauq for the cancellation-prone root.
    let q = -0.5 * (b + s.copysign(b));
    let mut roots = if q != 0.0 {
        vec![q / a, c / q]
    } else {
        vec![0.0, -b / a]
    };
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    roots
}

fn polish_cubic_root(c3: f64, c2: f64, c1: f64, c0: f64, mut x: f64) -> f64 {
    for _ in 0..8 {
        let f = ((c3 * x + c2) * x + c1) * x + c0;
        let df = (3.0 * c3 * x + 2.0 * c2) * x + c1;
        if df == 0.0 {
            break;
        }
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_finds_bracketed_root() {
        let f = |x: f64| (x * x - 2.0, 2.0 * x);
        let r = newton_bracketed(f, 0.0, 2.0, 1.0, 1e-14, 100).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn newton_rejects_unbracketed() {
        let f = |x: f64| (x * x + 1.0, 2.0 * x);
        assert!(newton_bracketed(f, -1.0, 1.0, 0.0, 1e-14, 100).is_err());
    }

    #[test]
    fn cubic_three_distinct_roots() {
        // (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
        let (r, deg) = cubic_real_roots(1.0, -6.0, 11.0, -6.0);
        assert!(!deg);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn cubic_single_real_root() {
        // (x-1)(x^2+1)
        let (r, _) = cubic_real_roots(1.0, -1.0, 1.0, -1.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_double_root_flags_degenerate() {
        // (x-2)^2 (x-1) = x^3 - 5x^2 + 8x - 4
        let (r, deg) = cubic_real_roots(1.0, -5.0, 8.0, -4.0);
        assert!(deg);
        assert!((r[0] - 1.0).abs() < 1e-7);
        assert!((r.last().unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn cubic_wildly_scaled_coefficients() {
        // Coefficient magnitudes mimic the photon-number polynomial.
        let (k2, a2, a1, a0) = (1e6, -2e10, 1e15, -3e18);
        let (roots, _) = cubic_real_roots(k2, a2, a1, a0);
        for r in roots {
            let f = ((k2 * r + a2) * r + a1) * r + a0;
            let scale = (k2 * r * r * r).abs().max((a1 * r).abs()).max(a0.abs());
            assert!(f.abs() < 1e-9 * scale);
        }
    }
}
