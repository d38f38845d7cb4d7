//! Bracketed one-dimensional root finding and sign-change scanning.

use crate::{Error, Interval, Result};

/// Default relative root tolerance. Double precision leaves headroom for
/// the error amplification of deep iterates at this setting.
pub const DEFAULT_TOL: f64 = 1e-13;

/// Default grid size for sign-change scans.
pub const DEFAULT_SCAN_GRID: usize = 4096;

const MAX_BISECTIONS: usize = 200;

/// A sign-change bracket produced by [`scan_sign_changes`].
///
/// `degenerate` marks grid points where the function vanished within
/// tolerance; such brackets have `lo == hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub degenerate: bool,
}

impl Bracket {
    pub fn interval(&self) -> Option<Interval> {
        if self.degenerate {
            None
        } else {
            Some(Interval::new(self.lo, self.hi))
        }
    }
}

/// Find the root of `f` inside `bracket` down to width `tol * max(1, width)`.
///
/// Bisection with a secant acceleration step; falls back to the midpoint
/// whenever the secant estimate leaves the current bracket. Deterministic:
/// identical inputs give bit-identical output.
pub fn find_root_bracketed<F: Fn(f64) -> f64>(f: F, bracket: Interval, tol: f64) -> Result<f64> {
    let mut a = bracket.lo;
    let mut b = bracket.hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { lo: a, hi: b });
    }
    let width_tol = tol * bracket.length().max(1.0);
    let mut prev_width = bracket.length();
    for _ in 0..MAX_BISECTIONS {
        if b - a <= width_tol {
            return Ok(0.5 * (a + b));
        }
        // Secant estimate, accepted only if it falls strictly inside.
        let mut x = 0.5 * (a + b);
        if fb != fa {
            let s = b - fb * (b - a) / (fb - fa);
            if s > a && s < b {
                x = s;
            }
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        // A pure secant sequence can stall near one endpoint; force a
        // bisection step whenever the bracket failed to halve.
        if b - a > 0.5 * prev_width {
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
                fb = fm;
            }
        }
        prev_width = b - a;
    }
    if b - a <= width_tol {
        Ok(0.5 * (a + b))
    } else {
        Err(Error::MaxIterations(MAX_BISECTIONS))
    }
}

/// Scan `f` on a uniform grid over `interval` and report every cell with a
/// sign change. Grid points where `|f|` vanishes within `zero_tol` are
/// reported as degenerate brackets.
pub fn scan_sign_changes<F: Fn(f64) -> f64>(
    f: F,
    interval: Interval,
    grid_n: usize,
    zero_tol: f64,
) -> Vec<Bracket> {
    assert!(grid_n >= 2, "scan needs at least 2 grid cells");
    let pts: Vec<f64> = interval.grid(grid_n).collect();
    let vals: Vec<f64> = pts.iter().map(|&x| f(x)).collect();
    sign_changes_from_samples(&pts, &vals, zero_tol)
}

/// Sign-change detection over precomputed samples. Callers that evaluate
/// the grid in parallel share this cell logic with [`scan_sign_changes`].
pub fn sign_changes_from_samples(pts: &[f64], vals: &[f64], zero_tol: f64) -> Vec<Bracket> {
    assert_eq!(pts.len(), vals.len());
    let mut out = Vec::new();
    let mut zero_at = vec![false; pts.len()];
    for (i, (&x, &v)) in pts.iter().zip(vals.iter()).enumerate() {
        if v.abs() <= zero_tol {
            zero_at[i] = true;
            out.push(Bracket { lo: x, hi: x, degenerate: true });
        }
    }
    for i in 0..pts.len().saturating_sub(1) {
        if zero_at[i] || zero_at[i + 1] {
            continue;
        }
        if vals[i].signum() != vals[i + 1].signum() {
            out.push(Bracket { lo: pts[i], hi: pts[i + 1], degenerate: false });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn root_of_parabola() {
        let r = find_root_bracketed(|x| x * x - 1.0, Interval::new(0.0, 2.0), 1e-12).unwrap();
        assert!((r - 1.0).abs() < 1e-11);
    }

    #[test]
    fn golden_ratio_root() {
        // w^2 + w - 1 = 0 on [0,1]: root (sqrt(5)-1)/2.
        let r = find_root_bracketed(|w| w * w + w - 1.0, Interval::new(0.0, 1.0), 1e-14).unwrap();
        let expect = (5.0_f64.sqrt() - 1.0) / 2.0;
        assert!((r - expect).abs() < 1e-12);
    }

    #[test]
    fn no_sign_change_is_an_error() {
        let e = find_root_bracketed(|x| x * x + 1.0, Interval::new(0.0, 2.0), 1e-12);
        assert!(matches!(e, Err(Error::NoSignChange { .. })));
    }

    #[test]
    fn deterministic_output() {
        let f = |x: f64| x.sin() - 0.3;
        let a = find_root_bracketed(f, Interval::new(0.0, 1.5), 1e-13).unwrap();
        let b = find_root_bracketed(f, Interval::new(0.0, 1.5), 1e-13).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn scan_finds_single_zero() {
        let brs = scan_sign_changes(|x| x, Interval::new(-1.0, 1.0), 4, 0.0);
        let real: Vec<_> = brs.iter().filter(|b| !b.degenerate).collect();
        // x=0 is a grid point of the 4-cell grid, reported as degenerate.
        assert_eq!(real.len(), 0);
        assert_eq!(brs.iter().filter(|b| b.degenerate).count(), 1);
        let brs = scan_sign_changes(|x| x, Interval::new(-1.0, 1.0), 5, 0.0);
        assert_eq!(brs.len(), 1);
        assert!(brs[0].lo < 0.0 && brs[0].hi > 0.0);
    }

    #[test]
    fn scan_finds_three_zeros() {
        let f = |x: f64| (x - 0.1) * (x + 0.4) * (x - 0.7);
        let brs = scan_sign_changes(f, Interval::new(-1.0, 1.0), 64, 0.0);
        assert_eq!(brs.len(), 3);
    }

    #[test]
    fn empty_scan_is_fine() {
        let brs = scan_sign_changes(|_| 1.0, Interval::new(-1.0, 1.0), 16, 0.0);
        assert!(brs.is_empty());
    }

    proptest! {
        #[test]
        fn finds_root_of_monotone_cubic(c in -0.9f64..0.9) {
            // x^3 + x - c has a unique root; scan + solve must recover it.
            let f = |x: f64| x * x * x + x - c;
            let r = find_root_bracketed(f, Interval::new(-2.0, 2.0), 1e-13).unwrap();
            prop_assert!(f(r).abs() < 1e-10);
        }

        #[test]
        fn bracket_width_honors_tol(c in 0.1f64..0.9, tol in 1e-12f64..1e-6) {
            let f = |x: f64| x - c;
            let r = find_root_bracketed(f, Interval::new(0.0, 1.0), tol).unwrap();
            prop_assert!((r - c).abs() <= tol.max(1e-15) * 1.0 + 1e-15);
        }
    }
}
