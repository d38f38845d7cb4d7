//! Periodic-point scaffold of a Feigenbaum map and the renormalization
//! operator.
//!
//! Level `n` of the scaffold holds the fixed point `p_n` of the iterate
//! `f^{2^(n-1)}` together with the derived intervals: the central interval
//! `I_n` bounded by `p_n` and `-p_n`, the iterate image `L_n` of
//! `I_(n-1)`, the gap `T_n` between consecutive `p`'s, and its complement
//! `M_n` inside `L_n`, bounded by `p_n` and the critical value
//! `c_(2^(n-1))`.

use crate::exec;
use crate::roots::{self, DEFAULT_SCAN_GRID, DEFAULT_TOL};
use crate::{Error, Interval, Jet3, MapSpec, Result};
use serde::Serialize;

/// Default scaffold depth in double precision.
pub const DEFAULT_DEPTH: usize = 10;

/// Hard cap: past this depth double precision cannot certify the
/// fixed-point residuals.
pub const MAX_DEPTH: usize = 12;

/// Required residual `|f^(2^(n-1))(p_n) - p_n|`.
pub const FIXED_POINT_TOL: f64 = 1e-10;

/// Grid points near zeros of the scan function count as roots below this.
const SCAN_ZERO_TOL: f64 = 1e-9;

/// The computed scaffold of one map.
#[derive(Debug, Clone, Serialize)]
pub struct Scaffold {
    spec: MapSpec,
    depth: usize,
    /// `p[n]`, `n = 0..=depth`; `p[0] = -1`.
    p: Vec<f64>,
    /// Critical orbit `c[k] = f^k(0)`, `k = 0..=2^depth`.
    c: Vec<f64>,
    /// `I[n]`, `n = 0..=depth`; `I[0] = [-1, 1]`.
    i: Vec<Interval>,
    /// `L[n]`, `T[n]`, `M[n]` for `n = 1..=depth`, stored shifted by one.
    l: Vec<Interval>,
    t_gap: Vec<Interval>,
    m: Vec<Interval>,
}

impl Scaffold {
    /// Build the scaffold down to `depth` levels.
    ///
    /// Each `p_n` is located by a sign-change scan of `f^(2^(n-1))(x) - x`
    /// strictly between `0` and `-p_(n-1)` followed by bracketed root
    /// refinement. Fails with [`Error::NotRenormalizable`] when no interior
    /// candidate exists and [`Error::AmbiguousFixedPoint`] when several do.
    pub fn build(spec: &MapSpec, depth: usize) -> Result<Scaffold> {
        assert!(depth >= 1 && depth <= MAX_DEPTH, "depth must be in 1..={MAX_DEPTH}");
        let mut p = vec![-1.0f64];

        // p_1: the fixed point of f in (0, 1).
        let p1 = locate_fixed_point(spec, 1, Interval::new(1e-12, 1.0 - 1e-12))
            .map_err(|e| promote_stage_error(e, 1))?;
        p.push(p1);

        for n in 2..=depth {
            let prev = p[n - 1];
            let scan = Interval::bounded_by(0.0, -prev);
            let pn = locate_fixed_point(spec, n, scan).map_err(|e| promote_stage_error(e, n))?;
            // Alternation and shrinking are structural; a violation means
            // the located point is not the renormalization fixed point.
            if pn.signum() * prev.signum() != -1.0 || pn.abs() >= prev.abs() {
                return Err(Error::NotRenormalizable(n - 1));
            }
            p.push(pn);
        }

        // Critical orbit up to 2^depth.
        let len = 1usize << depth;
        let mut c = Vec::with_capacity(len + 1);
        let mut x = 0.0f64;
        c.push(x);
        for step in 0..len {
            x = spec.eval(x);
            if x.abs() > 1.0 + crate::maps::ORBIT_EPS {
                return Err(Error::OrbitEscape { step, x });
            }
            c.push(x);
        }

        let mut i = vec![Interval::new(-1.0, 1.0)];
        for &pn in &p[1..] {
            i.push(Interval::bounded_by(pn, -pn));
        }
        let mut l = Vec::new();
        let mut t_gap = Vec::new();
        let mut m = Vec::new();
        for n in 1..=depth {
            let cv = c[1 << (n - 1)];
            l.push(Interval::bounded_by(p[n - 1], cv));
            t_gap.push(Interval::bounded_by(p[n - 1], p[n]));
            m.push(Interval::bounded_by(p[n], cv));
        }

        let s = Scaffold { spec: *spec, depth, p, c, i, l, t_gap, m };
        s.check_invariants()?;
        Ok(s)
    }

    fn check_invariants(&self) -> Result<()> {
        for n in 1..=self.depth {
            let res = (self.spec.iterate(self.p[n], 1 << (n - 1))? - self.p[n]).abs();
            if res > FIXED_POINT_TOL {
                return Err(Error::NotRenormalizable(n));
            }
            if !self.i[n - 1].contains_interval(&self.i[n], 0.0)
                || self.i[n].length() >= self.i[n - 1].length()
            {
                return Err(Error::NotRenormalizable(n));
            }
            if !self.l[n - 1].contains_with_tol(self.p[n], 1e-12) {
                return Err(Error::NotRenormalizable(n));
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &MapSpec {
        &self.spec
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn p(&self, n: usize) -> f64 {
        self.p[n]
    }

    pub fn ps(&self) -> &[f64] {
        &self.p
    }

    /// Critical value `c_k = f^k(0)`.
    pub fn c(&self, k: usize) -> f64 {
        self.c[k]
    }

    pub fn cs(&self) -> &[f64] {
        &self.c
    }

    pub fn interval_i(&self, n: usize) -> Interval {
        self.i[n]
    }

    pub fn interval_l(&self, n: usize) -> Interval {
        assert!(n >= 1);
        self.l[n - 1]
    }

    pub fn interval_t(&self, n: usize) -> Interval {
        assert!(n >= 1);
        self.t_gap[n - 1]
    }

    pub fn interval_m(&self, n: usize) -> Interval {
        assert!(n >= 1);
        self.m[n - 1]
    }

    /// The `n`-th renormalization, as an evaluator on `[-1, 1]`.
    pub fn renormalize(&self, n: usize) -> RenormMap<'_> {
        assert!(n <= self.depth, "scaffold depth {} < {n}", self.depth);
        RenormMap { scaffold: self, n, p_n: self.p[n] }
    }
}

fn promote_stage_error(e: Error, stage: usize) -> Error {
    match e {
        Error::NotRenormalizable(_) => Error::NotRenormalizable(stage),
        Error::AmbiguousFixedPoint(_) => Error::AmbiguousFixedPoint(stage),
        other => other,
    }
}

/// Locate the unique fixed point of `f^(2^(n-1))` inside `scan`.
fn locate_fixed_point(spec: &MapSpec, n: usize, scan: Interval) -> Result<f64> {
    let k = 1usize << (n - 1);
    let pts: Vec<f64> = scan.grid(DEFAULT_SCAN_GRID).collect();
    let vals = exec::map_items(&pts, |&x| match spec.iterate(x, k) {
        Ok(y) => y - x,
        Err(_) => f64::NAN,
    });
    if vals.iter().any(|v| v.is_nan()) {
        return Err(Error::OrbitEscape { step: 0, x: f64::NAN });
    }
    let brackets = roots::sign_changes_from_samples(&pts, &vals, SCAN_ZERO_TOL);
    // Degenerate hits at the scan endpoints are not interior candidates.
    let interior: Vec<_> = brackets
        .iter()
        .filter(|b| {
            if b.degenerate {
                b.lo > pts[0] && b.lo < pts[pts.len() - 1]
            } else {
                true
            }
        })
        .collect();
    match interior.len() {
        0 => Err(Error::NotRenormalizable(n)),
        1 => {
            let b = interior[0];
            if b.degenerate {
                return Ok(b.lo);
            }
            roots::find_root_bracketed(
                |x| spec.iterate(x, k).unwrap_or(f64::NAN) - x,
                Interval::new(b.lo, b.hi),
                DEFAULT_TOL,
            )
        }
        _ => Err(Error::AmbiguousFixedPoint(n)),
    }
}

/// Depth check with a failure stage: `Err(n)` names the first level `n`
/// whose renormalization does not exist with return time 2.
pub fn feigenbaum_check(spec: &MapSpec, depth: usize) -> std::result::Result<(), usize> {
    assert!(depth >= 1 && depth <= MAX_DEPTH, "depth must be in 1..={MAX_DEPTH}");
    // Build as deep as the requested check; on a failure at stage s
    // (while locating p_s), retry shallower so the completed levels can
    // still be examined — an earlier level may fail the orientation test
    // below and claim the stage.
    let (scaffold, missing_level) = match Scaffold::build(spec, depth) {
        Ok(s) => (s, None),
        Err(Error::NotRenormalizable(s)) | Err(Error::AmbiguousFixedPoint(s)) => {
            if s <= 1 {
                return Err(1);
            }
            match Scaffold::build(spec, s - 1) {
                Ok(sc) => (sc, Some(s)),
                Err(_) => return Err(1),
            }
        }
        Err(_) => return Err(1),
    };
    // The m-th renormalization f_m(x) = -f^(2^m)(-p_m x)/p_m exists with
    // return time exactly 2 iff
    //   (a) p_m exists (checked by the build),
    //   (b) its critical value lam_m = -c_(2^m)/p_m lies in [0, 1), so
    //       f_m is again in the unimodal class (0 allowed: superstable),
    //   (c) the return time is minimal: f_(m-1)(I_1(f_(m-1))) ⊄ I_1,
    //       which in original coordinates reads lam_(m-1) > |p_m/p_(m-1)|.
    let built = scaffold.depth();
    let lam = |m: usize| -scaffold.c(1 << m) / scaffold.p(m);
    for m in 1..=depth {
        if m > built {
            return Err(m);
        }
        if lam(m - 1) <= (scaffold.p(m) / scaffold.p(m - 1)).abs() {
            return Err(m);
        }
        if !(0.0..1.0).contains(&lam(m)) {
            return Err(m);
        }
    }
    debug_assert!(missing_level.map_or(true, |s| s > depth));
    let _ = missing_level;
    Ok(())
}

/// True iff every renormalization up to `depth` exists with return time 2.
pub fn is_feigenbaum_to_depth(spec: &MapSpec, depth: usize) -> bool {
    match feigenbaum_check(spec, depth.min(MAX_DEPTH)) {
        Ok(()) => true,
        Err(stage) => stage > depth,
    }
}

/// The rescaled restriction `f_n(x) = -f^(2^n)(-p_n x) / p_n`.
pub struct RenormMap<'a> {
    scaffold: &'a Scaffold,
    n: usize,
    p_n: f64,
}

impl RenormMap<'_> {
    pub fn level(&self) -> usize {
        self.n
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let y = self.scaffold.spec.iterate(-self.p_n * x, 1 << self.n)?;
        Ok(-y / self.p_n)
    }

    pub fn eval_jet(&self, x: f64) -> Result<Jet3> {
        let inner = Jet3::affine(-self.p_n, 0.0, x);
        let (mid, _) = self.scaffold.spec.iterate_jet(inner.v, 1 << self.n)?;
        let outer = Jet3::affine(-1.0 / self.p_n, 0.0, mid.v);
        Ok(Jet3::compose(&outer, &Jet3::compose(&mid, &inner)))
    }

    /// Max deviation of the unimodal normalization `f_n(±1) = -1`.
    pub fn normalization_residual(&self) -> Result<f64> {
        let a = (self.eval(-1.0)? + 1.0).abs();
        let b = (self.eval(1.0)? + 1.0).abs();
        Ok(a.max(b))
    }
}

/// Grid sup of `|N(h_n)|` where `h_n(u) = f_n((-u)^(1/t))`.
///
/// The grid covers `[-1, -1e-4]`; the excluded neighbourhood of `0` is
/// where `(-u)^(1/t)` loses its derivatives.
pub fn renorm_h_nonlinearity_sup(scaffold: &Scaffold, n: usize, grid_n: usize) -> Result<f64> {
    let rn = scaffold.renormalize(n);
    let t = scaffold.spec.t();
    let iv = Interval::new(-1.0, -1e-4);
    let pts: Vec<f64> = iv.grid(grid_n).collect();
    let vals = exec::map_items(&pts, |&u| {
        let s = 1.0 / t;
        let x = (-u).powf(s);
        let phi = Jet3::new(
            x,
            -s * (-u).powf(s - 1.0),
            s * (s - 1.0) * (-u).powf(s - 2.0),
            -s * (s - 1.0) * (s - 2.0) * (-u).powf(s - 3.0),
        );
        rn.eval_jet(x).map(|fj| Jet3::compose(&fj, &phi).nonlinearity().abs())
    });
    let mut sup = 0.0f64;
    for v in vals {
        sup = sup.max(v?);
    }
    Ok(sup)
}

/// Per-level geometry ratios: gap share, interval scaling, nonlinearity.
#[derive(Debug, Clone, Serialize)]
pub struct GeometryRow {
    pub n: usize,
    /// `|M_n| / |I_n|`
    pub ratio_m_i: f64,
    /// `|I_n| / |I_(n-1)|`
    pub ratio_i_i: f64,
    /// grid sup of `|N(h_n)|`
    pub sup_n_hn: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometryReport {
    pub rows: Vec<GeometryRow>,
    pub min_ratio_m_i: f64,
    pub min_ratio_i_i: f64,
    pub max_sup_n_hn: f64,
}

/// Build the per-level geometry table for levels `1..=depth`.
pub fn geometry_report(scaffold: &Scaffold, sup_grid: usize) -> Result<GeometryReport> {
    let rows_res = exec::map_range(scaffold.depth(), |idx| {
        let n = idx + 1;
        let sup = renorm_h_nonlinearity_sup(scaffold, n, sup_grid)?;
        Ok(GeometryRow {
            n,
            ratio_m_i: scaffold.interval_m(n).length() / scaffold.interval_i(n).length(),
            ratio_i_i: scaffold.interval_i(n).length() / scaffold.interval_i(n - 1).length(),
            sup_n_hn: sup,
        })
    });
    let mut rows = Vec::with_capacity(rows_res.len());
    for r in rows_res {
        rows.push(r?);
    }
    let min_ratio_m_i = rows.iter().map(|r| r.ratio_m_i).fold(f64::INFINITY, f64::min);
    let min_ratio_i_i = rows.iter().map(|r| r.ratio_i_i).fold(f64::INFINITY, f64::min);
    let max_sup_n_hn = rows.iter().map(|r| r.sup_n_hn).fold(0.0, f64::max);
    Ok(GeometryReport { rows, min_ratio_m_i, min_ratio_i_i, max_sup_n_hn })
}
