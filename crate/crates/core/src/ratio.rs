//! The two ratio functionals and the bracket they must respect.
//!
//! `G(x, y) = [f^σ(x+y) + f^σ(x−y)] / [2^{σ−1} (f^σ(x) + f^σ(y))]` is the
//! quantity whose supremum defines the constant; `H(x, y, t)` is its
//! unit-sphere parametrization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{gauge_unchecked, MetricSpace, Order};
use crate::properties::{PropertyReport, Status};

/// Relative factor of the degenerate-denominator threshold `1e-12 · scale^σ`.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;

/// Threshold below which a ratio denominator is treated as zero.
pub fn denominator_floor(sigma: Order, scale: f64) -> f64 {
    DEGENERATE_DENOMINATOR * scale.powf(sigma.value())
}

/// `G^{(σ)}(x, y)` with the degenerate-denominator threshold at unit scale.
pub fn gauge_ratio<S: MetricSpace + ?Sized>(space: &S, sigma: Order, x: &S::Point, y: &S::Point) -> Result<f64> {
    gauge_ratio_at_scale(space, sigma, x, y, 1.0)
}

/// `G^{(σ)}(x, y)` with the threshold `1e-12 · scale^σ`.
pub fn gauge_ratio_at_scale<S: MetricSpace + ?Sized>(
    space: &S,
    sigma: Order,
    x: &S::Point,
    y: &S::Point,
    scale: f64,
) -> Result<f64> {
    space.validate(x)?;
    space.validate(y)?;
    if space.is_zero(x) && space.is_zero(y) {
        return Err(Error::DegeneratePair("(x, y) = (0, 0)".into()));
    }
    ratio_unchecked(space, sigma, x, y, denominator_floor(sigma, scale))
        .ok_or_else(|| Error::DegeneratePair("denominator below threshold or non-finite ratio".into()))
}

/// Hot-path ratio. `None` marks a degenerate pair.
#[inline]
pub(crate) fn ratio_unchecked<S: MetricSpace + ?Sized>(
    space: &S,
    sigma: Order,
    x: &S::Point,
    y: &S::Point,
    den_floor: f64,
) -> Option<f64> {
    let s = sigma.value();
    let fx = gauge_unchecked(space, x).powf(s);
    let fy = gauge_unchecked(space, y).powf(s);
    let den = fx + fy;
    if den.is_nan() || den <= den_floor {
        return None;
    }
    let plus = gauge_unchecked(space, &space.add(x, y)).powf(s);
    let minus = gauge_unchecked(space, &space.sub(x, y)).powf(s);
    let value = (plus + minus) / ((s - 1.0).exp2() * den);
    value.is_finite().then_some(value)
}

/// `H^σ(x, y, t) = [f^σ(x+ty) + f^σ(x−ty)] / [2^{σ−1} (1 + t^σ)]`.
pub fn param_ratio<S: MetricSpace + ?Sized>(
    space: &S,
    sigma: Order,
    x: &S::Point,
    y: &S::Point,
    t: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::contract(format!("t must lie in [0, 1], got {t}")));
    }
    space.validate(x)?;
    space.validate(y)?;
    if space.is_zero(x) && space.is_zero(y) {
        return Err(Error::DegeneratePair("(x, y) = (0, 0)".into()));
    }
    Ok(param_ratio_unchecked(space, sigma, x, y, t))
}

pub(crate) fn param_ratio_unchecked<S: MetricSpace + ?Sized>(
    space: &S,
    sigma: Order,
    x: &S::Point,
    y: &S::Point,
    t: f64,
) -> f64 {
    let s = sigma.value();
    let ty = space.scale(y, t);
    let plus = gauge_unchecked(space, &space.add(x, &ty)).powf(s);
    let minus = gauge_unchecked(space, &space.sub(x, &ty)).powf(s);
    (plus + minus) / ((s - 1.0).exp2() * (1.0 + t.powf(s)))
}

/// A pair together with its ratio value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSample<P> {
    pub x: P,
    pub y: P,
    pub value: f64,
}

impl<P: Clone> RatioSample<P> {
    pub fn evaluate<S: MetricSpace<Point = P> + ?Sized>(space: &S, sigma: Order, x: P, y: P) -> Result<Self> {
        let value = gauge_ratio(space, sigma, &x, &y)?;
        Ok(RatioSample { x, y, value })
    }

    /// Recomputes the ratio from scratch and compares at `1e-12` relative.
    pub fn verify<S: MetricSpace<Point = P> + ?Sized>(&self, space: &S, sigma: Order) -> bool {
        match ratio_unchecked(space, sigma, &self.x, &self.y, 0.0) {
            Some(v) => (v - self.value).abs() <= 1e-12 * self.value.abs().max(1e-300),
            None => false,
        }
    }
}

/// Closed interval `[lo, hi]`; `hi = None` stands for `+∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: Option<f64>,
}

impl Bracket {
    pub fn hi_or_inf(&self) -> f64 {
        self.hi.unwrap_or(f64::INFINITY)
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lo - tol && v <= self.hi_or_inf() + tol
    }
}

/// Bracket implied by the audited gauge properties:
/// `lo = 2^{2−σ}`, raised to `1` for 2-homogeneous gauges;
/// `hi = 2` when the gauge is subadditive and even.
pub fn theorem_bounds(props: &PropertyReport, sigma: Order) -> Bracket {
    let passed = |name: &str| props.status(name) == Some(Status::Pass);
    let mut lo = sigma.universal_lower();
    if passed("two_homogeneous") {
        lo = lo.max(1.0);
    }
    let hi = (passed("subadditive") && passed("even")).then_some(2.0);
    Bracket { lo, hi }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Vector;
    use crate::properties::{CheckResult, PropertyReport};
    use crate::zoo;

    fn v(c: &[f64]) -> Vector {
        Vector::from(c.to_vec())
    }

    #[test]
    fn euclidean_orthogonal_pair_is_one() {
        let e = zoo::make_euclidean(2).unwrap();
        let s = Order::new(2.0).unwrap();
        let r = gauge_ratio(&e, s, &v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pair_with_zero_gives_universal_lower() {
        let e = zoo::make_norm_plus_square(3).unwrap();
        let s = Order::new(1.5).unwrap();
        let r = gauge_ratio(&e, s, &v(&[0.3, -2.0, 1.0]), &v(&[0.0, 0.0, 0.0])).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12 * 2f64.sqrt());
    }

    #[test]
    fn truncated_hand_value() {
        // f(2)=1, f(1)=1, f(1.5)=1, f(0.5)=0.5 -> (1+1)/(2(1+0.25))
        let t = zoo::make_truncated(1, 1.0).unwrap();
        let s = Order::new(2.0).unwrap();
        let r = gauge_ratio(&t, s, &v(&[1.5]), &v(&[0.5])).unwrap();
        assert!((r - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_pair_is_degenerate() {
        let e = zoo::make_euclidean(2).unwrap();
        let s = Order::new(2.0).unwrap();
        let z = v(&[0.0, 0.0]);
        assert!(matches!(gauge_ratio(&e, s, &z, &z), Err(Error::DegeneratePair(_))));
        let tiny = v(&[1e-7, 0.0]);
        assert!(matches!(gauge_ratio(&e, s, &tiny, &z), Err(Error::DegeneratePair(_))));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let e = zoo::make_euclidean(2).unwrap();
        let s = Order::new(2.0).unwrap();
        let err = gauge_ratio(&e, s, &v(&[1.0]), &v(&[1.0, 0.0])).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, got: 1 });
    }

    #[test]
    fn param_ratio_examples() {
        let e1 = zoo::make_euclidean(1).unwrap();
        let e2 = zoo::make_euclidean(2).unwrap();
        let s = Order::new(2.0).unwrap();
        // t = 0 with f(x) = 1 gives 2^{2-σ}
        let r0 = param_ratio(&e2, s, &v(&[1.0, 0.0]), &v(&[0.0, 1.0]), 0.0).unwrap();
        assert_eq!(r0, 1.0);
        let r1 = param_ratio(&e2, s, &v(&[1.0, 0.0]), &v(&[0.0, 1.0]), 1.0).unwrap();
        assert!((r1 - 1.0).abs() < 1e-15);
        // (2.25 + 0.25) / (2 * 1.25)
        let rh = param_ratio(&e1, s, &v(&[1.0]), &v(&[1.0]), 0.5).unwrap();
        assert!((rh - 1.0).abs() < 1e-15);
        assert!(param_ratio(&e1, s, &v(&[1.0]), &v(&[1.0]), 1.5).is_err());
        assert!(param_ratio(&e1, s, &v(&[1.0]), &v(&[1.0]), -0.1).is_err());
    }

    fn report_with(passing: &[&str], failing: &[&str]) -> PropertyReport {
        let mut r = PropertyReport::empty("test", 10, 1);
        for p in passing {
            r.insert(*p, CheckResult::pass(0.0, 10, 1));
        }
        for p in failing {
            r.insert(*p, CheckResult::fail_without_witness(-1.0, 10, 1));
        }
        r
    }

    #[test]
    fn bounds_examples() {
        let full = report_with(&["two_homogeneous", "subadditive", "even"], &[]);
        let b = theorem_bounds(&full, Order::new(2.0).unwrap());
        assert_eq!(b, Bracket { lo: 1.0, hi: Some(2.0) });

        let none = report_with(&[], &["two_homogeneous", "subadditive", "even"]);
        let b = theorem_bounds(&none, Order::new(1.5).unwrap());
        assert!((b.lo - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(b.hi, None);

        let partial = report_with(&["subadditive", "even"], &["two_homogeneous"]);
        let b = theorem_bounds(&partial, Order::new(4.0).unwrap());
        assert_eq!(b, Bracket { lo: 0.25, hi: Some(2.0) });
    }
}
