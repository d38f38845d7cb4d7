//! The induced Markov map, its partition, inverse branches, admissible
//! words and distortion measurements.
//!
//! The partition cells `J_n`, `J_{-n}` are the connected components of
//! `I_n \ I_{n+1}`; on each the induced map `F` acts as `f^(2^n)`. The
//! partition is truncated at `n_max`, leaving the central interval
//! `I_(n_max+1)` as an explicit residual cell.

use crate::exec;
use crate::roots::{self, DEFAULT_TOL};
use crate::scaffold::Scaffold;
use crate::{Error, Interval, Jet3, Result};
use serde::Serialize;
use std::fmt;

/// Default truncation level for word-level work.
pub const DEFAULT_NMAX: usize = 8;

/// Relative tolerance for interval containment at admissibility tests.
pub const ADMISSIBLE_TOL: f64 = 1e-10;

/// Points this close to a partition endpoint count as boundary points.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Relative margin by which the level-0 branch is extended past `[-1,1]`
/// (times `|I_0|`).
const LEVEL0_EXT_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Pos,
    Neg,
}

/// Index of one partition cell: signed symbols with `(n, Pos) ↔ J_n` and
/// `(n, Neg) ↔ J_{-n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BranchId {
    pub level: usize,
    pub side: Side,
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::Pos => write!(f, "{}", self.level),
            Side::Neg => write!(f, "-{}", self.level),
        }
    }
}

/// One branch of the induced Markov map.
#[derive(Debug, Clone, Serialize)]
pub struct Branch {
    pub id: BranchId,
    /// `J_{±n}`, a component of `I_n \ I_(n+1)`.
    pub domain: Interval,
    /// `2^n`: `F = f^(2^n)` here.
    pub iterate_count: usize,
    /// `F(J_{±n})`, the domain of the inverse branch.
    pub image: Interval,
    /// Extension interval around the image on which the inverse branch
    /// still exists; see [`Partition::koebe_space`].
    pub extension: Interval,
}

/// An admissible sequence of branch indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<BranchId>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Levels must be non-decreasing along an admissible word.
    pub fn is_level_monotone(&self) -> bool {
        self.0.windows(2).all(|w| w[0].level <= w[1].level)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{id}")?;
        }
        Ok(())
    }
}

/// Cylinder data and distortion statistics for one word.
#[derive(Debug, Clone, Serialize)]
pub struct Cylinder {
    pub word: String,
    pub word_len: usize,
    /// `D(g_w)`: the domain of the composed inverse branch.
    pub gw_domain: Interval,
    /// `g_(i_0) ∘ … ∘ g_(i_(k-2)) (J_(i_(k-1)))`: points whose first `k`
    /// itinerary symbols spell the word.
    pub cylinder: Interval,
    /// `sup |g_w''/g_w'| * |D(g_w)|` over the sample points.
    ///
    /// The log-derivative nonlinearity is the distortion-controlling
    /// quantity: it telescopes under composition of the contracting
    /// inverse branches (unlike `g''/(g')^2`, which picks up a factor
    /// `1/g'` per symbol and grows with word length), and integrating it
    /// over the domain bounds `log(sup g' / inf g')` directly.
    pub sup_n_times_d: f64,
    /// `sup |g_w'| / inf |g_w'|` over the sample points.
    pub deriv_ratio: f64,
}

/// The truncated partition together with its scaffold.
#[derive(Debug, Clone)]
pub struct Partition {
    scaffold: Scaffold,
    n_max: usize,
    branches: Vec<Branch>,
    residual: Interval,
}

/// Build the partition for levels `0..=n_max`.
///
/// Needs scaffold depth at least `n_max + 1` (the level-`n_max` cell is
/// bounded by `p_(n_max+1)`).
pub fn build_partition(scaffold: &Scaffold, n_max: usize) -> Result<Partition> {
    assert!(
        scaffold.depth() >= n_max + 1,
        "scaffold depth {} < n_max + 1 = {}",
        scaffold.depth(),
        n_max + 1
    );
    let spec = scaffold.spec();
    let mut branches = Vec::with_capacity(2 * (n_max + 1));
    for n in 0..=n_max {
        let q_out = scaffold.p(n).abs();
        let q_in = scaffold.p(n + 1).abs();
        let count = 1usize << n;
        let extension = if n == 0 {
            let margin = LEVEL0_EXT_MARGIN * 2.0;
            let lo_val = spec.eval(1.0 + margin);
            let hi_val = spec.eval(q_in - margin);
            Interval::bounded_by(lo_val, hi_val)
        } else {
            Interval::bounded_by(scaffold.c(count / 2), scaffold.c(count))
        };
        for side in [Side::Pos, Side::Neg] {
            let domain = match side {
                Side::Pos => Interval::new(q_in, q_out),
                Side::Neg => Interval::new(-q_out, -q_in),
            };
            let lo_img = spec.iterate(domain.lo, count)?;
            let hi_img = spec.iterate(domain.hi, count)?;
            let image = Interval::bounded_by(lo_img, hi_img);
            branches.push(Branch {
                id: BranchId { level: n, side },
                domain,
                iterate_count: count,
                image,
                extension,
            });
        }
    }
    let residual = scaffold.interval_i(n_max + 1);
    let p = Partition { scaffold: scaffold.clone(), n_max, branches, residual };
    p.check_structure()?;
    Ok(p)
}

impl Partition {
    fn check_structure(&self) -> Result<()> {
        for b in &self.branches {
            // Image endpoints are scaffold periodic points.
            let (p_n, p_n1) = (self.scaffold.p(b.id.level), self.scaffold.p(b.id.level + 1));
            let expect = Interval::bounded_by(p_n, p_n1);
            if (b.image.lo - expect.lo).abs() > 1e-9 || (b.image.hi - expect.hi).abs() > 1e-9 {
                return Err(Error::NotRenormalizable(b.id.level));
            }
            // F strictly monotone on the cell.
            let vals: Vec<f64> = b
                .domain
                .grid(64)
                .map(|x| self.scaffold.spec().iterate(x, b.iterate_count))
                .collect::<Result<_>>()?;
            let dir = (vals[1] - vals[0]).signum();
            if vals.windows(2).any(|w| ((w[1] - w[0]) * dir) <= 0.0) {
                return Err(Error::ExtensionNotMonotone(b.id.level));
            }
        }
        Ok(())
    }

    pub fn scaffold(&self) -> &Scaffold {
        &self.scaffold
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// The central residual cell `I_(n_max+1)`.
    pub fn residual(&self) -> Interval {
        self.residual
    }

    pub fn branch(&self, id: BranchId) -> &Branch {
        let idx = 2 * id.level + if id.side == Side::Pos { 0 } else { 1 };
        &self.branches[idx]
    }

    /// All partition endpoints `±|p_n|`, `n = 0 ..= n_max + 1`.
    pub fn endpoints(&self) -> impl Iterator<Item = (usize, Side, f64)> + '_ {
        (0..=self.n_max + 1).flat_map(move |n| {
            let q = self.scaffold.p(n).abs();
            [(n, Side::Pos, q), (n, Side::Neg, -q)]
        })
    }

    /// Locate the branch containing `x`, rejecting boundary and residual
    /// points.
    pub fn locate(&self, x: f64) -> Result<BranchId> {
        for (_, _, e) in self.endpoints() {
            if (x - e).abs() <= BOUNDARY_TOL {
                return Err(Error::BoundaryPoint(x));
            }
        }
        let ax = x.abs();
        if ax > 1.0 {
            return Err(Error::OutOfImage(x));
        }
        if self.residual.contains(x) {
            return Err(Error::ResidualPoint(x));
        }
        let side = if x > 0.0 { Side::Pos } else { Side::Neg };
        for n in 0..=self.n_max {
            if ax > self.scaffold.p(n + 1).abs() {
                return Ok(BranchId { level: n, side });
            }
        }
        Err(Error::ResidualPoint(x))
    }

    /// Apply the induced Markov map at `x`.
    pub fn apply_f(&self, x: f64) -> Result<(f64, BranchId)> {
        let id = self.locate(x)?;
        let y = self.scaffold.spec().iterate(x, self.branch(id).iterate_count)?;
        Ok((y, id))
    }

    /// Invert one branch: the unique `x` in the branch domain with
    /// `f^(2^n)(x) = y`.
    pub fn invert_branch(&self, id: BranchId, y: f64) -> Result<f64> {
        let b = self.branch(id);
        let tol = ADMISSIBLE_TOL * b.image.length().max(1.0);
        if !b.image.contains_with_tol(y, tol) {
            return Err(Error::OutOfImage(y));
        }
        let y = y.clamp(b.image.lo, b.image.hi);
        let spec = self.scaffold.spec();
        let k = b.iterate_count;
        let f_lo = spec.iterate(b.domain.lo, k)? - y;
        let f_hi = spec.iterate(b.domain.hi, k)? - y;
        let edge_tol = 1e-12 * b.image.length().max(1.0);
        if f_lo.abs() <= edge_tol {
            return Ok(b.domain.lo);
        }
        if f_hi.abs() <= edge_tol {
            return Ok(b.domain.hi);
        }
        roots::find_root_bracketed(
            |x| spec.iterate(x, k).unwrap_or(f64::NAN) - y,
            b.domain,
            DEFAULT_TOL,
        )
    }

    /// Forward jet of `F` restricted to the given branch, at `x`.
    pub fn branch_jet(&self, id: BranchId, x: f64) -> Result<Jet3> {
        let (jet, _) = self.scaffold.spec().iterate_jet(x, self.branch(id).iterate_count)?;
        Ok(jet)
    }

    /// Jet of the inverse branch `g_id` at `y`; `v` carries `g_id(y)`.
    pub fn inverse_jet(&self, id: BranchId, y: f64) -> Result<Jet3> {
        let x = self.invert_branch(id, y)?;
        let fwd = self.branch_jet(id, x)?;
        let mut inv = fwd.inverse();
        inv.v = x;
        Ok(inv)
    }

    /// All branches whose domain lies inside this branch's image.
    pub fn successors(&self, id: BranchId) -> Vec<BranchId> {
        let image = self.branch(id).image;
        self.branches
            .iter()
            .filter(|b| image.contains_interval(&b.domain, ADMISSIBLE_TOL))
            .map(|b| b.id)
            .collect()
    }

    /// All admissible words of length exactly `k` with levels `<= level_cap`.
    pub fn enumerate_words(&self, k: usize, level_cap: usize) -> Vec<Word> {
        assert!(k >= 1);
        let succ: Vec<Vec<BranchId>> = self
            .branches
            .iter()
            .map(|b| {
                self.successors(b.id)
                    .into_iter()
                    .filter(|s| s.level <= level_cap)
                    .collect()
            })
            .collect();
        let idx = |id: BranchId| 2 * id.level + if id.side == Side::Pos { 0 } else { 1 };
        let mut words: Vec<Vec<BranchId>> = self
            .branches
            .iter()
            .filter(|b| b.id.level <= level_cap)
            .map(|b| vec![b.id])
            .collect();
        for _ in 1..k {
            let mut next = Vec::new();
            for w in &words {
                let last = *w.last().unwrap();
                for s in &succ[idx(last)] {
                    let mut ext = w.clone();
                    ext.push(*s);
                    next.push(ext);
                }
            }
            words = next;
        }
        words.into_iter().map(Word).collect()
    }

    /// Check that each consecutive pair of the word is admissible.
    pub fn is_admissible(&self, word: &Word) -> bool {
        word.0.windows(2).all(|w| {
            self.branch(w[0])
                .image
                .contains_interval(&self.branch(w[1]).domain, ADMISSIBLE_TOL)
        })
    }

    /// Cylinder interval and distortion statistics of a word, sampled at
    /// `samples` interior points of `D(g_w)`.
    pub fn word_cylinder_and_distortion(&self, word: &Word, samples: usize) -> Result<Cylinder> {
        assert!(!word.is_empty() && samples >= 2);
        let ids = &word.0;
        let innermost = self.branch(*ids.last().unwrap());
        let gw_domain = innermost.image;

        // Cylinder: pull the innermost cell back through the outer branches.
        let mut lo = innermost.domain.lo;
        let mut hi = innermost.domain.hi;
        for id in ids[..ids.len() - 1].iter().rev() {
            lo = self.invert_branch(*id, lo)?;
            hi = self.invert_branch(*id, hi)?;
        }
        let cylinder = Interval::bounded_by(lo, hi);

        let step = gw_domain.length() / samples as f64;
        let results = exec::map_range(samples, |j| -> Result<(f64, f64)> {
            let y = gw_domain.lo + (j as f64 + 0.5) * step;
            let jet = self.word_jet(ids, y)?;
            Ok(((jet.d2 / jet.d1).abs(), jet.d1.abs()))
        });
        let mut sup_n = 0.0f64;
        let mut min_d = f64::INFINITY;
        let mut max_d = 0.0f64;
        for r in results {
            let (n_abs, d_abs) = r?;
            sup_n = sup_n.max(n_abs);
            min_d = min_d.min(d_abs);
            max_d = max_d.max(d_abs);
        }
        Ok(Cylinder {
            word: word.to_string(),
            word_len: word.len(),
            gw_domain,
            cylinder,
            sup_n_times_d: sup_n * gw_domain.length(),
            deriv_ratio: max_d / min_d,
        })
    }

    /// Jet of `g_w = g_(i_0) ∘ … ∘ g_(i_(k-1))` at `y`.
    pub fn word_jet(&self, ids: &[BranchId], y: f64) -> Result<Jet3> {
        let mut jet = self.inverse_jet(*ids.last().unwrap(), y)?;
        for id in ids[..ids.len() - 1].iter().rev() {
            let outer = self.inverse_jet(*id, jet.v)?;
            jet = Jet3::compose(&outer, &jet);
        }
        Ok(jet)
    }

    /// Koebe space of the inverse branch: the smaller collar of the
    /// extension interval around the branch image, relative to the image.
    ///
    /// Verifies that `f^(2^n)` really is monotone on the interval mapping
    /// onto the extension, by locating the bounding critical point.
    pub fn koebe_space(&self, id: BranchId) -> Result<f64> {
        assert!(id.level >= 1, "level 0 uses the analytic-extension rule");
        let b = self.branch(id);
        let omega = b.extension;
        let dom = b.image;
        let lft = dom.lo - omega.lo;
        let rgt = omega.hi - dom.hi;
        if lft <= 0.0 || rgt <= 0.0 {
            return Err(Error::ExtensionNotMonotone(id.level));
        }
        self.verify_extension_monotone(id.level)?;
        Ok(lft.min(rgt) / dom.length())
    }

    /// Find the monotone run of `f^(2^n)` around `J_n` (positive side;
    /// the map is even, so this covers both sides) and check that its
    /// image matches the extension interval.
    fn verify_extension_monotone(&self, n: usize) -> Result<()> {
        let spec = self.scaffold.spec();
        let k = 1usize << n;
        let q_n = self.scaffold.p(n).abs();
        let q_prev = self.scaffold.p(n - 1).abs();
        // Bounding critical point: first break of monotonicity above q_n.
        let scan = Interval::new(q_n, q_prev);
        let pts: Vec<f64> = scan.grid(2048).collect();
        let vals = exec::map_items(&pts, |&x| spec.iterate(x, k).unwrap_or(f64::NAN));
        if vals.iter().any(|v| v.is_nan()) {
            return Err(Error::ExtensionNotMonotone(n));
        }
        let dir = (vals[1] - vals[0]).signum();
        let mut break_idx = None;
        for i in 0..vals.len() - 1 {
            if (vals[i + 1] - vals[i]) * dir <= 0.0 {
                break_idx = Some(i);
                break;
            }
        }
        let i = break_idx.ok_or(Error::ExtensionNotMonotone(n))?;
        // Refine: derivative sign change inside the bracketing cells.
        let d1 = |x: f64| {
            spec.iterate_jet(x, k).map(|(j, _)| j.d1).unwrap_or(f64::NAN)
        };
        let lo = pts[i.saturating_sub(1)];
        let hi = pts[i + 1];
        let x_crit = roots::find_root_bracketed(d1, Interval::new(lo, hi), 1e-12)
            .map_err(|_| Error::ExtensionNotMonotone(n))?;
        let v_crit = spec.iterate(x_crit, k)?;
        // The critical value must land on the extension endpoint shared
        // with the shallower level: c_(2^(n-1)).
        let c_half = self.scaffold.c(k / 2);
        if (v_crit - c_half).abs() > 1e-6 * (1.0 + c_half.abs()) {
            return Err(Error::ExtensionNotMonotone(n));
        }
        // Monotone from near the critical point at 0 out to x_crit.
        let q_inner = self.scaffold.p(n + 1).abs();
        let run = Interval::new(1e-3 * q_inner, x_crit - 1e-9 * x_crit.abs());
        let run_pts: Vec<f64> = run.grid(1024).collect();
        let run_vals = exec::map_items(&run_pts, |&x| spec.iterate(x, k).unwrap_or(f64::NAN));
        let rdir = (run_vals[1] - run_vals[0]).signum();
        if run_vals.windows(2).any(|w| (w[1] - w[0]) * rdir <= 0.0 || w[0].is_nan()) {
            return Err(Error::ExtensionNotMonotone(n));
        }
        Ok(())
    }
}

/// Per-level bounded-geometry ratios of the partition cells.
///
/// `ratio_tail` compares `|J_n|` with the total length of the same-side
/// deeper cells down to the truncation; `ratio_half_next` compares it
/// with the half of `I_(n+1)` on the same side. The two agree up to the
/// truncated tail and are reported side by side.
#[derive(Debug, Clone, Serialize)]
pub struct CellGeomRow {
    pub level: usize,
    pub ratio_tail: f64,
    pub ratio_half_next: f64,
}

pub fn cell_geometry(partition: &Partition) -> Vec<CellGeomRow> {
    let sc = partition.scaffold();
    // The truncation level has no deeper cells, so its tail reading is
    // undefined and the row is omitted.
    (0..partition.n_max())
        .map(|n| {
            let len = partition.branch(BranchId { level: n, side: Side::Pos }).domain.length();
            let tail: f64 = (n + 1..=partition.n_max())
                .map(|l| partition.branch(BranchId { level: l, side: Side::Pos }).domain.length())
                .sum::<f64>();
            CellGeomRow {
                level: n,
                ratio_tail: len / tail,
                ratio_half_next: len / (0.5 * sc.interval_i(n + 1).length()),
            }
        })
        .collect()
}
