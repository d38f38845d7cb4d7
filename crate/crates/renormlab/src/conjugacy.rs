//! Itinerary-based construction of the conjugacy between two maps with
//! identical doubling combinatorics, and its quasisymmetry statistics.
//!
//! The conjugacy `H` sends the source system (`g`) to the target system
//! (`f`), i.e. `H ∘ g = f ∘ H`, by matching Markov itineraries: a point
//! with symbol sequence `w` on the source side is sent into the target
//! cylinder with the same sequence.

use crate::exec;
use crate::markov::{BranchId, Partition};
use crate::{Error, Result};
use serde::Serialize;

/// Default itinerary depth; cylinders shrink geometrically per symbol, so
/// this reaches well below double-precision grid increments.
pub const DEFAULT_ITINERARY_DEPTH: usize = 24;

/// Error slack per inverse-branch pull-back, covering root-finder
/// tolerance accumulation.
const PULLBACK_SLACK: f64 = 1e-11;

/// How an itinerary terminated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Tail {
    /// Ran to the requested depth.
    Complete,
    /// Entered the residual cell after `step` symbols; `point` is where
    /// the orbit landed inside it.
    Residual { step: usize, point: f64 },
    /// Hit a partition endpoint after `step` symbols.
    Boundary { step: usize, endpoint: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct Itinerary {
    pub symbols: Vec<BranchId>,
    pub tail: Tail,
}

/// Symbol sequence of `x` under the induced map, up to `depth` symbols.
pub fn itinerary(partition: &Partition, x: f64, depth: usize) -> Result<Itinerary> {
    let mut symbols = Vec::with_capacity(depth);
    let mut y = x;
    for step in 0..depth {
        match partition.apply_f(y) {
            Ok((next, id)) => {
                symbols.push(id);
                y = next;
            }
            Err(Error::ResidualPoint(p)) => {
                return Ok(Itinerary { symbols, tail: Tail::Residual { step, point: p } });
            }
            Err(Error::BoundaryPoint(p)) => {
                return Ok(Itinerary { symbols, tail: Tail::Boundary { step, endpoint: p } });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Itinerary { symbols, tail: Tail::Complete })
}

/// Midpoint-with-radius from two pulled-back cell endpoints. Deep cells
/// can collapse to the same double; the slack still covers them.
fn enclosure_value(a: f64, b: f64, slack: f64) -> ConjugacyValue {
    ConjugacyValue {
        value: 0.5 * (a + b),
        err: 0.5 * (b - a).abs() + slack,
    }
}

/// A conjugacy between two systems with matching combinatorics.
#[derive(Debug, Clone)]
pub struct Conjugacy {
    source: Partition,
    target: Partition,
    depth: usize,
}

/// `H(x)` together with a rigorous enclosure radius.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConjugacyValue {
    pub value: f64,
    pub err: f64,
}

impl Conjugacy {
    /// Pair two partitions. Fails with [`Error::CombinatorialMismatch`]
    /// unless truncation levels and successor structure agree.
    pub fn new(source: Partition, target: Partition, depth: usize) -> Result<Conjugacy> {
        if source.n_max() != target.n_max() {
            return Err(Error::CombinatorialMismatch(format!(
                "truncation levels differ: {} vs {}",
                source.n_max(),
                target.n_max()
            )));
        }
        for b in source.branches() {
            let s = source.successors(b.id);
            let t = target.successors(b.id);
            if s != t {
                return Err(Error::CombinatorialMismatch(format!(
                    "successor sets differ at branch {}",
                    b.id
                )));
            }
        }
        Ok(Conjugacy { source, target, depth })
    }

    pub fn source(&self) -> &Partition {
        &self.source
    }

    pub fn target(&self) -> &Partition {
        &self.target
    }

    /// Pull a target-side point back through the inverse branches named by
    /// `word`, outermost symbol first.
    fn pull_back(&self, word: &[BranchId], y: f64) -> Result<f64> {
        let mut v = y;
        for id in word.iter().rev() {
            v = self.target.invert_branch(*id, v)?;
        }
        Ok(v)
    }

    /// Exact image of a partition endpoint, if `x` is one.
    fn endpoint_image(&self, x: f64) -> Option<f64> {
        if x.abs() <= 1e-12 {
            return Some(0.0);
        }
        for ((_, _, e_src), (_, _, e_tgt)) in self.source.endpoints().zip(self.target.endpoints())
        {
            if (x - e_src).abs() <= 1e-12 {
                return Some(e_tgt);
            }
        }
        None
    }

    /// Evaluate the conjugacy at `x` with an error bound.
    ///
    /// Partition endpoints and the critical point map exactly. Other
    /// points are located by itinerary and returned as the midpoint of
    /// the matching target cylinder, with the half-length as error bound.
    pub fn eval(&self, x: f64) -> Result<ConjugacyValue> {
        if let Some(v) = self.endpoint_image(x) {
            return Ok(ConjugacyValue { value: v, err: 0.0 });
        }
        let it = itinerary(&self.source, x, self.depth)?;
        let slack = PULLBACK_SLACK * (it.symbols.len() as f64 + 1.0);
        match it.tail {
            Tail::Boundary { step, endpoint } => {
                // The orbit lands exactly on a source endpoint; pull the
                // matching target endpoint back through the word so far.
                debug_assert_eq!(step, it.symbols.len());
                let e_tgt = self
                    .endpoint_image(endpoint)
                    .ok_or(Error::BoundaryPoint(endpoint))?;
                let v = self.pull_back(&it.symbols, e_tgt)?;
                Ok(ConjugacyValue { value: v, err: slack })
            }
            Tail::Residual { step, point } => {
                debug_assert_eq!(step, it.symbols.len());
                // H fixes 0, so the sign of the landing point selects half
                // of the residual cell and halves the enclosure.
                let res = self.target.residual();
                let (r_lo, r_hi) = if point > 0.0 { (0.0, res.hi) } else { (res.lo, 0.0) };
                if it.symbols.is_empty() {
                    let cell = crate::Interval::new(r_lo, r_hi);
                    return Ok(ConjugacyValue {
                        value: cell.midpoint(),
                        err: 0.5 * cell.length(),
                    });
                }
                let lo = self.pull_back(&it.symbols, r_lo)?;
                let hi = self.pull_back(&it.symbols, r_hi)?;
                Ok(enclosure_value(lo, hi, slack))
            }
            Tail::Complete => {
                let last = *it.symbols.last().unwrap();
                let dom = self.target.branch(last).domain;
                let outer = &it.symbols[..it.symbols.len() - 1];
                let lo = self.pull_back(outer, dom.lo)?;
                let hi = self.pull_back(outer, dom.hi)?;
                Ok(enclosure_value(lo, hi, slack))
            }
        }
    }

    /// Evaluate the conjugacy on many points in parallel.
    pub fn eval_many(&self, xs: &[f64]) -> Vec<Result<ConjugacyValue>> {
        exec::map_items(xs, |&x| self.eval(x))
    }

    /// Residuals of the conjugacy equation `H(g(x)) = f(H(x))` at `count`
    /// seeded pseudo-random sample points.
    pub fn equation_residuals(&self, count: usize, seed: u64) -> Result<EquationCheck> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = self.source.scaffold().spec();
        let f = self.target.scaffold().spec();
        // Lipschitz bound for f on [-1,1] from a derivative sweep.
        let lip = (0..257)
            .map(|i| f.eval_jet(-1.0 + 2.0 * i as f64 / 256.0).d1.abs())
            .fold(0.0f64, f64::max);
        let xs: Vec<f64> = (0..count).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rows = exec::map_items(&xs, |&x| -> Result<(f64, f64)> {
            let hx = self.eval(x)?;
            let hgx = self.eval(g.eval(x))?;
            let resid = (f.eval(hx.value) - hgx.value).abs();
            let bound = lip * hx.err + hgx.err + 1e-12;
            Ok((resid, bound))
        });
        let mut max_residual = 0.0f64;
        let mut max_bound = 0.0f64;
        let mut violations = 0usize;
        for r in rows {
            let (resid, bound) = r?;
            max_residual = max_residual.max(resid);
            max_bound = max_bound.max(bound);
            if resid > bound {
                violations += 1;
            }
        }
        Ok(EquationCheck { samples: count, max_residual, max_bound, violations })
    }

    /// Quasisymmetry statistics: for each scale `d = 2^-s`, the worst
    /// two-sided ratio `max(ρ, 1/ρ)` with
    /// `ρ = (H(x+d) - H(x)) / (H(x) - H(x-d))` over a grid of `grid_n`
    /// points placed geometrically from each endpoint of `[-1, 1]`.
    ///
    /// The grid is scale-covariant: each half uses offsets
    /// `r = 2d·(1/2d)^u` from its endpoint, so every scale samples the
    /// same relative offsets `r/d` near the boundary fixed points. The
    /// worst ratio concentrates there (the conjugacy is a power law at
    /// the boundary when the multipliers differ), and under a uniform
    /// grid its nearest-point offset `r/d` would change with `d`, making
    /// per-scale maxima incomparable across scales.
    pub fn qs_report(&self, scales: &[u32], grid_n: usize) -> Result<QsReport> {
        assert!(grid_n >= 2);
        let mut rows = Vec::with_capacity(scales.len());
        let mut m_hat = 0.0f64;
        let mut all_reliable = true;
        for &s in scales {
            let d = 0.5f64.powi(s as i32);
            let half = grid_n / 2;
            let xs: Vec<f64> = (0..grid_n)
                .map(|i| {
                    let (endpoint_sign, j, m) = if i < half {
                        (-1.0, i, half)
                    } else {
                        (1.0, i - half, grid_n - half)
                    };
                    let u = (j as f64 + 0.5) / m as f64;
                    let r = 2.0 * d * (1.0 / (2.0 * d)).powf(u);
                    endpoint_sign * (1.0 - r)
                })
                .collect();
            let trips = exec::map_items(&xs, |&x| -> Result<(f64, f64, bool)> {
                let hm = self.eval(x - d)?;
                let h0 = self.eval(x)?;
                let hp = self.eval(x + d)?;
                let up = hp.value - h0.value;
                let dn = h0.value - hm.value;
                let rho = up / dn;
                let ratio = rho.max(1.0 / rho);
                let err = hm.err.max(h0.err).max(hp.err);
                // A quotient is trustworthy when the enclosure radii of its
                // three points are small against its own increments.
                let ok = err <= 0.05 * up.abs().min(dn.abs());
                Ok((ratio, err, ok))
            });
            let mut max_ratio = 0.0f64;
            let mut max_err = 0.0f64;
            let mut reliable = true;
            for t in trips {
                let (ratio, err, ok) = t?;
                max_ratio = max_ratio.max(ratio);
                max_err = max_err.max(err);
                reliable &= ok;
            }
            all_reliable &= reliable;
            if max_ratio > m_hat {
                m_hat = max_ratio;
            }
            rows.push(QsRow { d, max_ratio, samples: grid_n, max_err_bound: max_err, reliable });
        }
        Ok(QsReport { rows, m_hat, all_reliable })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquationCheck {
    pub samples: usize,
    pub max_residual: f64,
    pub max_bound: f64,
    /// Samples whose residual exceeded its error budget.
    pub violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct QsRow {
    pub d: f64,
    pub max_ratio: f64,
    pub samples: usize,
    pub max_err_bound: f64,
    pub reliable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct QsReport {
    pub rows: Vec<QsRow>,
    /// Max of `max_ratio` over all scales.
    pub m_hat: f64,
    pub all_reliable: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade;
    use crate::maps::Family;
    use crate::markov::build_partition;
    use crate::scaffold::Scaffold;
    use crate::MapSpec;
    use std::sync::OnceLock;

    fn accumulation_lambda(t: f64) -> f64 {
        cascade::feigenbaum_parameter(Family::Affine, t, 0.0, 8)
            .unwrap()
            .lambda_inf
    }

    fn partition_for(t: f64, n_max: usize) -> Partition {
        let spec = MapSpec::new(Family::Affine, t, accumulation_lambda(t), 0.0).unwrap();
        let scaffold = Scaffold::build(&spec, n_max + 1).unwrap();
        build_partition(&scaffold, n_max).unwrap()
    }

    fn self_conjugacy() -> &'static Conjugacy {
        static CTX: OnceLock<Conjugacy> = OnceLock::new();
        CTX.get_or_init(|| {
            let p = partition_for(2.0, 7);
            Conjugacy::new(p.clone(), p, 16).unwrap()
        })
    }

    #[test]
    fn itinerary_respects_admissibility() {
        let ctx = self_conjugacy();
        let it = itinerary(ctx.source(), 0.9, 10).unwrap();
        assert!(
            it.symbols.len() >= 3,
            "short itinerary {:?} tail {:?}",
            it.symbols,
            it.tail
        );
        // Levels never decrease along an itinerary.
        assert!(it.symbols.windows(2).all(|w| w[0].level <= w[1].level));
        for w in it.symbols.windows(2) {
            assert!(ctx
                .source()
                .successors(w[0])
                .contains(&w[1]));
        }
    }

    #[test]
    fn self_conjugacy_is_identity() {
        let ctx = self_conjugacy();
        for &x in &[0.9, -0.55, 0.31, -0.77, 0.123] {
            let v = ctx.eval(x).unwrap();
            assert!(
                (v.value - x).abs() <= v.err + 1e-9,
                "H({x}) = {} ± {}",
                v.value,
                v.err
            );
        }
    }

    #[test]
    fn endpoints_map_exactly() {
        let ctx = self_conjugacy();
        let q2 = ctx.source().scaffold().p(2).abs();
        for &x in &[1.0, -1.0, 0.0, q2, -q2] {
            let v = ctx.eval(x).unwrap();
            assert_eq!(v.err, 0.0);
            assert_eq!(v.value, x);
        }
    }

    #[test]
    fn equation_residuals_within_budget() {
        let ctx = self_conjugacy();
        let chk = ctx.equation_residuals(200, 7).unwrap();
        assert_eq!(chk.violations, 0, "max resid {} bound {}", chk.max_residual, chk.max_bound);
    }

    #[test]
    fn self_conjugacy_qs_ratio_is_near_one() {
        let ctx = self_conjugacy();
        let rep = ctx.qs_report(&[4, 6], 64).unwrap();
        assert!(rep.m_hat >= 1.0);
        for row in &rep.rows {
            assert!(row.reliable, "scale {} unreliable (err {})", row.d, row.max_err_bound);
            assert!(row.max_ratio < 1.05, "scale {}: ratio {}", row.d, row.max_ratio);
        }
    }

    #[test]
    fn mismatched_truncation_is_rejected() {
        let p6 = partition_for(2.0, 7);
        let p4 = partition_for(2.0, 4);
        let e = Conjugacy::new(p6, p4, 8);
        assert!(matches!(e, Err(crate::Error::CombinatorialMismatch(_))));
    }
}
