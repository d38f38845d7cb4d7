//! Closed-form unimodal map families `f = h ∘ Q_t` with `Q_t(x) = -|x|^t`.
//!
//! Two families are provided, both with identically zero Schwarzian `h`:
//! an affine `h` (the quadratic family generalized to exponent `t`) and a
//! Moebius `h` whose nonlinearity at `-1` equals the parameter `a`. Both
//! extend analytically past `[-1, 1]`, which the branch-extension checks
//! downstream rely on.

use crate::{Error, Jet3, Result};
use serde::{Deserialize, Serialize};

/// Evaluation is permitted slightly outside `[-1,1]`, up to this bound,
/// for branch extensions.
pub const EXT_BOUND: f64 = 1.5;

/// Escape tolerance for orbits of iterates.
pub const ORBIT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Affine,
    Moebius,
}

/// Orbit diagnostics returned alongside iterate jets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitRange {
    pub min: f64,
    pub max: f64,
}

/// A validated unimodal map `f = h ∘ Q_t`.
///
/// * `Affine`: `h(u) = (1+λ)u + λ`, so `f(x) = λ - (1+λ)|x|^t`.
/// * `Moebius`: `h(u) = ((λ+1)(1+a/2)u + λ) / (-(a/2)(λ+1)u + 1)`, which
///   fixes `-1`, sends `0` to `λ` and has nonlinearity `a` at `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMapSpec", into = "RawMapSpec")]
pub struct MapSpec {
    family: Family,
    t: f64,
    lambda: f64,
    a: f64,
}

#[derive(Serialize, Deserialize)]
struct RawMapSpec {
    family: Family,
    t: f64,
    lambda: f64,
    #[serde(default)]
    a: f64,
}

impl TryFrom<RawMapSpec> for MapSpec {
    type Error = Error;
    fn try_from(raw: RawMapSpec) -> Result<MapSpec> {
        MapSpec::new(raw.family, raw.t, raw.lambda, raw.a)
    }
}

impl From<MapSpec> for RawMapSpec {
    fn from(s: MapSpec) -> RawMapSpec {
        RawMapSpec { family: s.family, t: s.t, lambda: s.lambda, a: s.a }
    }
}

impl MapSpec {
    /// Build and validate a map. The analytic invariants (symmetry,
    /// endpoint normalization, monotonicity, `S(h) <= 0`) are re-checked
    /// numerically on a 1024-point grid.
    pub fn new(family: Family, t: f64, lambda: f64, a: f64) -> Result<MapSpec> {
        if !(t > 1.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("t must be > 1, got {t}")));
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidParameter(format!("lambda must be in (0,1), got {lambda}")));
        }
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter(format!("a must be >= 0, got {a}")));
        }
        let a = match family {
            Family::Affine => 0.0,
            Family::Moebius => a,
        };
        let spec = MapSpec { family, t, lambda, a };
        spec.validate_on_grid()?;
        Ok(spec)
    }

    /// Constructor without the grid validation pass. Used by parameter
    /// sweeps that evaluate thousands of throwaway specs; final results
    /// must go through [`MapSpec::new`].
    pub(crate) fn new_unchecked(family: Family, t: f64, lambda: f64, a: f64) -> MapSpec {
        let a = match family {
            Family::Affine => 0.0,
            Family::Moebius => a,
        };
        MapSpec { family, t, lambda, a }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Same map with a different critical value.
    pub fn with_lambda(&self, lambda: f64) -> Result<MapSpec> {
        MapSpec::new(self.family, self.t, lambda, self.a)
    }

    fn moebius_coeffs(&self) -> (f64, f64, f64, f64) {
        let l = self.lambda;
        let half_a = 0.5 * self.a;
        ((l + 1.0) * (1.0 + half_a), l, -half_a * (l + 1.0), 1.0)
    }

    fn validate_on_grid(&self) -> Result<()> {
        if let Family::Moebius = self.family {
            let (_, _, c, d) = self.moebius_coeffs();
            if c != 0.0 {
                let pole = -d / c;
                let reach = EXT_BOUND.powf(self.t);
                if (-reach..=0.0).contains(&pole) {
                    return Err(Error::InvalidParameter(format!(
                        "Moebius pole {pole} inside evaluation domain"
                    )));
                }
            }
        }
        let n = 1024;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=n {
            let x = -1.0 + 2.0 * i as f64 / n as f64;
            let v = self.eval(x);
            let vm = self.eval(-x);
            if (v - vm).abs() > 1e-14 {
                return Err(Error::InvalidParameter(format!("asymmetry at x = {x}")));
            }
            if x <= 0.0 {
                if v <= prev {
                    return Err(Error::InvalidParameter(format!("not increasing at x = {x}")));
                }
                prev = v;
            }
            if x <= 0.0 {
                let u = if x == 0.0 { 0.0 } else { -(-x).powf(self.t) };
                let s = self.h_jet(u).schwarzian();
                if s > 1e-9 {
                    return Err(Error::InvalidParameter(format!("S(h) = {s} > 0 at u = {u}")));
                }
            }
        }
        if (self.eval(-1.0) + 1.0).abs() > 1e-14 || (self.eval(1.0) + 1.0).abs() > 1e-14 {
            return Err(Error::InvalidParameter("endpoint normalization failed".into()));
        }
        Ok(())
    }

    /// Jet of the diffeomorphism `h` at `u`.
    pub fn h_jet(&self, u: f64) -> Jet3 {
        match self.family {
            Family::Affine => Jet3::affine(1.0 + self.lambda, self.lambda, u),
            Family::Moebius => {
                let (a, b, c, d) = self.moebius_coeffs();
                let den = c * u + d;
                let det = a * d - b * c;
                Jet3::new(
                    (a * u + b) / den,
                    det / (den * den),
                    -2.0 * c * det / (den * den * den),
                    6.0 * c * c * det / (den * den * den * den),
                )
            }
        }
    }

    /// Jet of `Q_t(x) = -|x|^t` at `x`.
    ///
    /// At `x = 0` the jet is partial unless the derivatives exist in closed
    /// form (`t = 2`, or `t > 3`).
    pub fn q_jet(&self, x: f64) -> Jet3 {
        let t = self.t;
        if x == 0.0 {
            if t == 2.0 {
                return Jet3::new(0.0, 0.0, -2.0, 0.0);
            }
            if t > 3.0 {
                return Jet3::new(0.0, 0.0, 0.0, 0.0);
            }
            return Jet3::partial(0.0, 0.0);
        }
        if t == 2.0 {
            return Jet3::new(-x * x, -2.0 * x, -2.0, 0.0);
        }
        let ax = x.abs();
        let sg = x.signum();
        Jet3::new(
            -ax.powf(t),
            -t * ax.powf(t - 1.0) * sg,
            -t * (t - 1.0) * ax.powf(t - 2.0),
            -t * (t - 1.0) * (t - 2.0) * ax.powf(t - 3.0) * sg,
        )
    }

    /// Value of `f` at `x` (no derivatives).
    pub fn eval(&self, x: f64) -> f64 {
        // t = 2 dominates every sweep; avoid powf there.
        let u = if self.t == 2.0 { -x * x } else { -x.abs().powf(self.t) };
        match self.family {
            Family::Affine => (1.0 + self.lambda) * u + self.lambda,
            Family::Moebius => {
                let (a, b, c, d) = self.moebius_coeffs();
                (a * u + b) / (c * u + d)
            }
        }
    }

    /// Jet of `f` at `x`.
    pub fn eval_jet(&self, x: f64) -> Jet3 {
        let q = self.q_jet(x);
        let h = self.h_jet(q.v);
        Jet3::compose(&h, &q)
    }

    /// Value of `f^{∘k}` at `x`, with orbit escape checking.
    pub fn iterate(&self, x: f64, k: usize) -> Result<f64> {
        let mut y = x;
        for step in 0..k {
            if y.abs() > 1.0 + ORBIT_EPS {
                return Err(Error::OrbitEscape { step, x: y });
            }
            y = self.eval(y);
        }
        if y.abs() > 1.0 + ORBIT_EPS {
            return Err(Error::OrbitEscape { step: k, x: y });
        }
        Ok(y)
    }

    /// Jet of `f^{∘k}` at `x` plus the visited orbit range.
    pub fn iterate_jet(&self, x: f64, k: usize) -> Result<(Jet3, OrbitRange)> {
        let mut jet = Jet3::identity(x);
        let mut range = OrbitRange { min: x, max: x };
        for step in 0..k {
            if jet.v.abs() > 1.0 + ORBIT_EPS {
                return Err(Error::OrbitEscape { step, x: jet.v });
            }
            let f = self.eval_jet(jet.v);
            jet = Jet3::compose(&f, &jet);
            range.min = range.min.min(jet.v);
            range.max = range.max.max(jet.v);
        }
        if jet.v.abs() > 1.0 + ORBIT_EPS {
            return Err(Error::OrbitEscape { step: k, x: jet.v });
        }
        Ok((jet, range))
    }

    /// Nonlinearity `N(h) = h''/(h')^2` at `u`.
    pub fn nonlinearity_h(&self, u: f64) -> f64 {
        self.h_jet(u).nonlinearity()
    }

    /// Schwarzian derivative of `h` at `u`.
    pub fn schwarzian_h(&self, u: f64) -> f64 {
        self.h_jet(u).schwarzian()
    }
}
