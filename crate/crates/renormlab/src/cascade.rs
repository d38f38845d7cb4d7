//! Superstable parameter cascade, Feigenbaum-parameter estimation and the
//! Moebius comparison-map root.

use crate::exec;
use crate::maps::Family;
use crate::roots::{self, DEFAULT_SCAN_GRID, DEFAULT_TOL};
use crate::scaffold::{Scaffold, MAX_DEPTH};
use crate::{Error, Interval, MapSpec, Result};
use serde::Serialize;

/// Deepest cascade level resolvable in double precision.
pub const MAX_CASCADE_DEPTH: usize = 12;

/// Residual below which the critical point counts as periodic.
const PERIOD_TOL: f64 = 1e-8;

fn critical_iterate(family: Family, t: f64, a: f64, lambda: f64, k: usize) -> f64 {
    let spec = MapSpec::new_unchecked(family, t, lambda, a);
    let mut x = 0.0;
    for _ in 0..(1usize << k) {
        x = spec.eval(x);
    }
    x
}

/// Superstable parameters `λ_1 .. λ_depth`: `λ_k` is the first parameter
/// above `λ_(k-1)` at which the critical point is periodic with period
/// exactly `2^k`.
pub fn superstable_cascade(family: Family, t: f64, a: f64, depth: usize) -> Result<Vec<f64>> {
    assert!(depth >= 1 && depth <= MAX_CASCADE_DEPTH, "depth must be in 1..={MAX_CASCADE_DEPTH}");
    let mut lambdas: Vec<f64> = Vec::with_capacity(depth);
    for k in 1..=depth {
        // Window above the previous root, sized from the previous gap;
        // gaps shrink by roughly the doubling constant, so 1.3x the
        // previous gap comfortably covers the next one.
        let (lo, hi) = match k {
            1 => (1e-3, 1.0 - 1e-6),
            2 => {
                let l1 = lambdas[0];
                (l1 + 1e-6 * (1.0 - l1), (l1 + 0.35).min(1.0 - 1e-6))
            }
            _ => {
                let lk = lambdas[k - 2];
                let w = lk - lambdas[k - 3];
                (lk + 0.02 * w, (lk + 1.3 * w).min(1.0 - 1e-6))
            }
        };
        let lambda_k = match scan_for_superstable(family, t, a, k, Interval::new(lo, hi))? {
            Some(l) => l,
            None => {
                // One widening retry before giving up.
                let wide_hi = (lo + 4.0 * (hi - lo)).min(1.0 - 1e-6);
                scan_for_superstable(family, t, a, k, Interval::new(lo, wide_hi))?
                    .ok_or(Error::BracketNotFound(k))?
            }
        };
        // Exact period 2^k: no earlier doubling level may already vanish.
        for j in 0..k {
            if critical_iterate(family, t, a, lambda_k, j).abs() <= PERIOD_TOL {
                return Err(Error::BracketNotFound(k));
            }
        }
        if let Some(&prev) = lambdas.last() {
            if lambda_k <= prev {
                return Err(Error::BracketNotFound(k));
            }
        }
        lambdas.push(lambda_k);
    }
    Ok(lambdas)
}

fn scan_for_superstable(
    family: Family,
    t: f64,
    a: f64,
    k: usize,
    window: Interval,
) -> Result<Option<f64>> {
    let pts: Vec<f64> = window.grid(DEFAULT_SCAN_GRID).collect();
    let vals = exec::map_items(&pts, |&l| critical_iterate(family, t, a, l, k));
    let brackets = roots::sign_changes_from_samples(&pts, &vals, 0.0);
    let first = match brackets.first() {
        Some(b) => *b,
        None => return Ok(None),
    };
    if first.degenerate {
        return Ok(Some(first.lo));
    }
    let root = roots::find_root_bracketed(
        |l| critical_iterate(family, t, a, l, k),
        Interval::new(first.lo, first.hi),
        DEFAULT_TOL,
    )?;
    Ok(Some(root))
}

/// Cascade-derived estimates around the accumulation parameter.
#[derive(Debug, Clone, Serialize)]
pub struct FeigenbaumParams {
    /// `λ_1 .. λ_depth`
    pub lambdas: Vec<f64>,
    /// Aitken-accelerated accumulation parameter.
    pub lambda_inf: f64,
    /// `δ_k = (λ_k - λ_(k-1)) / (λ_(k+1) - λ_k)` for `k = 2 ..= depth-1`.
    pub deltas: Vec<DeltaRow>,
    /// `α_k = |I_k| / |I_(k+1)|` from the scaffold at `lambda_inf`.
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaRow {
    pub k: usize,
    pub delta: f64,
}

impl FeigenbaumParams {
    pub fn delta(&self, k: usize) -> Option<f64> {
        self.deltas.iter().find(|r| r.k == k).map(|r| r.delta)
    }
}

/// Run the cascade to `depth`, accelerate it, and measure the scaling
/// ratios of the resulting scaffold.
pub fn feigenbaum_parameter(family: Family, t: f64, a: f64, depth: usize) -> Result<FeigenbaumParams> {
    assert!(depth >= 5, "delta estimates need depth >= 5");
    let lambdas = superstable_cascade(family, t, a, depth)?;
    let deltas: Vec<DeltaRow> = (2..depth)
        .map(|k| DeltaRow {
            k,
            delta: (lambdas[k - 1] - lambdas[k - 2]) / (lambdas[k] - lambdas[k - 1]),
        })
        .collect();
    // Aitken Δ² on the last triple; the plain sequence converges like
    // δ^(-k), acceleration squares the deficit.
    let (l0, l1, l2) = (lambdas[depth - 3], lambdas[depth - 2], lambdas[depth - 1]);
    let denom = l2 - 2.0 * l1 + l0;
    let lambda_inf = if denom != 0.0 { l2 - (l2 - l1) * (l2 - l1) / denom } else { l2 };

    let spec = MapSpec::new(family, t, lambda_inf, a)?;
    let scaffold_depth = depth.min(MAX_DEPTH - 1);
    let scaffold = Scaffold::build(&spec, scaffold_depth)?;
    let alphas: Vec<f64> = (1..scaffold_depth)
        .map(|k| scaffold.interval_i(k).length() / scaffold.interval_i(k + 1).length())
        .collect();
    Ok(FeigenbaumParams { lambdas, lambda_inf, deltas, alphas })
}

/// Root of the Moebius comparison-map equation: the unique `w` in `(0,1)`
/// with `(w+1)(1+K/2) w^(t-1) = 1`.
pub fn lemma3_solve(t: f64, big_k: f64) -> f64 {
    assert!(t > 1.0 && big_k >= 0.0);
    let f = |w: f64| (w + 1.0) * (1.0 + 0.5 * big_k) * w.powf(t - 1.0) - 1.0;
    roots::find_root_bracketed(f, Interval::new(1e-15, 1.0), 1e-15)
        .expect("left side spans [-1, K] over (0,1), a bracket always exists")
}
