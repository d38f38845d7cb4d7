//! Closed intervals with positive length.

use serde::{Deserialize, Serialize};

/// A nondegenerate closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// Interval with the given endpoints. Panics if `lo >= hi`.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "degenerate interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// Interval bounded by two points in either order.
    pub fn bounded_by(a: f64, b: f64) -> Self {
        Interval::new(a.min(b), a.max(b))
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Containment with a relative tolerance at the endpoints; shared
    /// endpoints count as contained.
    pub fn contains_interval(&self, other: &Interval, rel_tol: f64) -> bool {
        let tol = rel_tol * self.length().max(1.0);
        other.lo >= self.lo - tol && other.hi <= self.hi + tol
    }

    pub fn contains_with_tol(&self, x: f64, tol: f64) -> bool {
        self.lo - tol <= x && x <= self.hi + tol
    }

    /// Interval scaled about its midpoint by `factor`.
    pub fn scaled(&self, factor: f64) -> Interval {
        let m = self.midpoint();
        let h = 0.5 * self.length() * factor;
        Interval::new(m - h, m + h)
    }

    /// `n + 1` uniformly spaced points including both endpoints.
    pub fn grid(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let step = self.length() / n as f64;
        (0..=n).map(move |i| if i == n { self.hi } else { self.lo + i as f64 * step })
    }
}
