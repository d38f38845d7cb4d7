//! Order-3 derivative jets.
//!
//! A [`Jet3`] carries a function value together with its first three
//! derivatives at a point. Order 3 is needed because the Schwarzian
//! derivative involves the third derivative. Jets of iterates are built by
//! chaining [`Jet3::compose`].

use serde::{Deserialize, Serialize};

/// Value and first three derivatives of a function at a point.
///
/// `partial` marks jets whose higher derivatives are undefined at the
/// evaluation point (the critical point of `-|x|^t` for non-even `t`);
/// the value and first derivative are still valid there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jet3 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    #[serde(default)]
    pub partial: bool,
}

impl Jet3 {
    pub fn new(v: f64, d1: f64, d2: f64, d3: f64) -> Self {
        Jet3 { v, d1, d2, d3, partial: false }
    }

    /// Jet with valid value and first derivative only.
    pub fn partial(v: f64, d1: f64) -> Self {
        Jet3 { v, d1, d2: 0.0, d3: 0.0, partial: true }
    }

    /// Jet of the identity at `x`.
    pub fn identity(x: f64) -> Self {
        Jet3::new(x, 1.0, 0.0, 0.0)
    }

    /// Jet of the constant function `c`.
    pub fn constant(c: f64) -> Self {
        Jet3::new(c, 0.0, 0.0, 0.0)
    }

    /// Jet of the affine map `x -> a*x + b` at `x`.
    pub fn affine(a: f64, b: f64, x: f64) -> Self {
        Jet3::new(a * x + b, a, 0.0, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d1.is_finite() && self.d2.is_finite() && self.d3.is_finite()
    }

    /// Jet of `outer ∘ inner` where `outer` was evaluated at `inner.v`.
    ///
    /// Faa di Bruno up to order 3.
    pub fn compose(outer: &Jet3, inner: &Jet3) -> Jet3 {
        let i1 = inner.d1;
        let i2 = inner.d2;
        let i3 = inner.d3;
        Jet3 {
            v: outer.v,
            d1: outer.d1 * i1,
            d2: outer.d2 * i1 * i1 + outer.d1 * i2,
            d3: outer.d3 * i1 * i1 * i1 + 3.0 * outer.d2 * i1 * i2 + outer.d1 * i3,
            partial: outer.partial || inner.partial,
        }
    }

    /// Jet of the local inverse at `self.v`, given the forward jet at `x`.
    ///
    /// Requires `d1 != 0`.
    pub fn inverse(&self) -> Jet3 {
        let d1 = self.d1;
        let g1 = 1.0 / d1;
        let g2 = -self.d2 / (d1 * d1 * d1);
        let g3 = (3.0 * self.d2 * self.d2 - d1 * self.d3) / (d1 * d1 * d1 * d1 * d1);
        Jet3 { v: f64::NAN, d1: g1, d2: g2, d3: g3, partial: self.partial }
    }

    /// Nonlinearity `d2 / d1^2`.
    pub fn nonlinearity(&self) -> f64 {
        self.d2 / (self.d1 * self.d1)
    }

    /// Schwarzian derivative `d3/d1 - (3/2)(d2/d1)^2`.
    pub fn schwarzian(&self) -> f64 {
        let r = self.d2 / self.d1;
        self.d3 / self.d1 - 1.5 * r * r
    }
}
