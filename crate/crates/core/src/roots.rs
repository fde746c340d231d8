//! Bracketed scalar root finding.

use crate::error::{RabiError, Result};

/// Brent's method on a bracket `[a, b]` with `f(a)·f(b) ≤ 0`.
///
/// Combines bisection, secant and inverse quadratic interpolation. Iterates
/// until the bracket is below a few ulps of the current iterate, so the
/// returned point is as close to the sign change as `f64` allows.
pub fn brent<F>(f: F, a: f64, b: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RabiError::Convergence(format!(
            "no sign change on [{a}, {b}]: f = ({fa:e}, {fb:e})"
        )));
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + f64::MIN_POSITIVE;
        let half = 0.5 * (c - b);
        if half.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                // secant
                p = 2.0 * half * s;
                q = 1.0 - s;
            } else {
                // inverse quadratic
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * half * q - (tol * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = half;
                e = d;
            }
        } else {
            d = half;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(half) };
        fb = f(b);
    }
    Err(RabiError::Convergence(format!(
        "brent did not converge in {max_iter} iterations"
    )))
}

/// Sign changes of `f` on a uniform grid of `cells` cells over `[lo, hi]`.
///
/// Returns the sub-brackets `(left, right)`; an exact zero at a grid node is
/// returned as a degenerate bracket `(x, x)`.
pub fn scan_sign_changes<F>(f: F, lo: f64, hi: f64, cells: usize) -> Vec<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let node = |i: usize| {
        if i == cells {
            hi
        } else {
            lo + (hi - lo) * i as f64 / cells as f64
        }
    };
    let mut out = Vec::new();
    let mut x0 = node(0);
    let mut f0 = f(x0);
    if f0 == 0.0 {
        out.push((x0, x0));
    }
    for i in 1..=cells {
        let x1 = node(i);
        let f1 = f(x1);
        if f1 == 0.0 {
            out.push((x1, x1));
        } else if f0 != 0.0 && f0.signum() != f1.signum() {
            out.push((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(matches!(
            brent(|x| x * x + 1.0, -1.0, 1.0, 100),
            Err(RabiError::Convergence(_))
        ));
    }

    #[test]
    fn scan_reports_all_crossings() {
        let brackets = scan_sign_changes(|x| (x - 0.15) * (x - 0.55) * (x - 0.85), 0.0, 1.0, 64);
        assert_eq!(brackets.len(), 3);
        for (l, r) in brackets {
            assert!(r - l <= 1.0 / 64.0 + 1e-15);
        }
    }

    #[test]
    fn endpoint_zero_is_returned() {
        assert_eq!(brent(|x| x, 0.0, 1.0, 10).unwrap(), 0.0);
        assert_eq!(scan_sign_changes(|x| x, 0.0, 1.0, 4), vec![(0.0, 0.0)]);
    }
}
