//! Scalar root finding for the closed-form fundamental equations.

use crate::error::{Error, Result};

/// Number of grid cells used for the sign scan.
const SCAN_CELLS: usize = 4096;

/// Finds the unique real root of `c3 x^3 + c2 x^2 + c1 x + c0` in `[lo, hi)`
/// by sign-bracketed bisection, to absolute accuracy 1e-12.
///
/// The caller asserts from theory that exactly one root lies in the interval;
/// a fine sign scan that finds zero or multiple sign changes is reported as
/// `NoRootInInterval`.
pub fn solve_cubic_in_interval(
    c3: f64,
    c2: f64,
    c1: f64,
    c0: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    assert!(lo < hi, "empty interval");
    let p = |x: f64| ((c3 * x + c2) * x + c1) * x + c0;

    let step = (hi - lo) / SCAN_CELLS as f64;
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    let mut exact: Vec<f64> = Vec::new();
    let mut prev_x = lo;
    let mut prev_v = p(lo);
    if prev_v == 0.0 {
        exact.push(lo);
    }
    for i in 1..=SCAN_CELLS {
        let x = if i == SCAN_CELLS { hi } else { lo + step * i as f64 };
        let v = p(x);
        if v == 0.0 {
            // hi itself is outside the half-open interval
            if x < hi {
                exact.push(x);
            }
        } else if prev_v != 0.0 && prev_v.signum() != v.signum() {
            brackets.push((prev_x, x));
        }
        prev_x = x;
        prev_v = v;
    }

    let changes = brackets.len() + exact.len();
    if changes != 1 {
        return Err(Error::NoRootInInterval {
            sign_changes: changes,
        });
    }
    if let Some(&root) = exact.first() {
        return Ok(root);
    }

    let (mut a, mut b) = brackets[0];
    let mut fa = p(a);
    while b - a > 1e-13 {
        let mid = 0.5 * (a + b);
        let fm = p(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fa.signum() == fm.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root_of_one() {
        let r = solve_cubic_in_interval(1.0, 0.0, 0.0, -1.0, 0.0, 2.0).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn residual_below_tolerance() {
        // x^3 + x - 1 on [0, 1)
        let r = solve_cubic_in_interval(1.0, 0.0, 1.0, -1.0, 0.0, 1.0).unwrap();
        let res = (r * r * r + r - 1.0).abs();
        assert!(res < 1e-12, "residual {res}");
    }

    #[test]
    fn rayleigh_product_reduction() {
        // S = N, K = 1, rho = 3 reduces the fundamental cubic to
        // 3 g^3 + g - 1 = 0 on [0, 1).
        let r = solve_cubic_in_interval(3.0, 0.0, 1.0, -1.0, 0.0, 1.0).unwrap();
        let res = (3.0 * r * r * r + r - 1.0).abs();
        assert!(res < 1e-12, "residual {res}");
        assert!(r > 0.0 && r < 1.0);
    }

    #[test]
    fn no_root_is_reported() {
        // x^3 + 1 has no root in [0, 1)
        match solve_cubic_in_interval(1.0, 0.0, 0.0, 1.0, 0.0, 1.0) {
            Err(Error::NoRootInInterval { sign_changes }) => assert_eq!(sign_changes, 0),
            other => panic!("expected NoRootInInterval, got {other:?}"),
        }
    }

    #[test]
    fn multiple_roots_are_reported() {
        // (x - 0.25)(x - 0.5)(x - 0.75) has three roots in [0, 1)
        let (c3, c2, c1, c0) = (1.0, -1.5, 0.6875, -0.09375);
        match solve_cubic_in_interval(c3, c2, c1, c0, 0.0, 1.0) {
            Err(Error::NoRootInInterval { sign_changes }) => assert!(sign_changes > 1),
            other => panic!("expected NoRootInInterval, got {other:?}"),
        }
    }

    #[test]
    fn accepted_root_residual_scales_with_coefficients() {
        let cases = [
            (2.0, -3.0, 0.5, 0.1, -1.0, 1.0),
            (1e4, 0.0, 1e3, -5e2, 0.0, 1.0),
            (-1.0, 0.2, 0.9, -0.3, 0.0, 2.0),
        ];
        for (c3, c2, c1, c0, lo, hi) in cases {
            if let Ok(r) = solve_cubic_in_interval(c3, c2, c1, c0, lo, hi) {
                let res = (((c3 * r + c2) * r + c1) * r + c0).abs();
                let max_coef = [c3, c2, c1, c0].iter().fold(0.0f64, |m, c| m.max(c.abs()));
                assert!(res <= 1e-10 * max_coef, "residual {res} vs coef {max_coef}");
            }
        }
    }
}
