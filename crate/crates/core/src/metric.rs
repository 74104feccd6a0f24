//! Metric abstraction shared by every space in the crate.
//!
//! A [`MetricSpace`] bundles a distance with the vector-space operations the
//! ratio functionals need (sum, difference, scalar multiple) and a seeded
//! point sampler. The gauge of a metric is `f(x) = d(x, 0)`.

use std::fmt;
use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::SpaceKind;

/// Finite real coordinate vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::contract("vector must have at least one coordinate"));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::contract(format!("coordinate {i} is not finite")));
        }
        Ok(Vector(coords))
    }

    /// Builds a vector without the finiteness check. Callers guarantee the invariant.
    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        Vector(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Vector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn add(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, lambda: f64) -> Vector {
        Vector(self.0.iter().map(|a| lambda * a).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Vector {
    /// Panics on non-finite input; use [`Vector::new`] for fallible construction.
    fn from(coords: Vec<f64>) -> Self {
        Vector::new(coords).expect("finite, non-empty coordinates")
    }
}

/// Order `σ ∈ [1, ∞)` of the constant.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Order(f64);

impl Order {
    pub fn new(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 1.0 {
            return Err(Error::contract(format!("order must lie in [1, inf), got {sigma}")));
        }
        Ok(Order(sigma))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The universal lower bound `2^{2-σ}`.
    pub fn universal_lower(self) -> f64 {
        (2.0 - self.0).exp2()
    }

    /// `2^{1-σ/2}`, the value attained under the order-σ parallelogram law.
    pub fn parallelogram_value(self) -> f64 {
        (1.0 - self.0 / 2.0).exp2()
    }
}

impl<'de> Deserialize<'de> for Order {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Order::new(v).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A metric on a vector space together with the operations needed to probe it.
///
/// Implementations must be pure: every method is a function of its arguments,
/// so a space can be shared read-only across threads.
pub trait MetricSpace: Send + Sync {
    type Point: Clone + fmt::Debug + PartialEq + Send + Sync + Serialize + DeserializeOwned;

    /// Stable identifier used in reports.
    fn id(&self) -> String;

    /// Number of coordinates (declared basis labels for rational spaces).
    fn dim(&self) -> usize;

    /// The metric. Points are assumed to have passed [`MetricSpace::validate`].
    fn distance(&self, x: &Self::Point, y: &Self::Point) -> f64;

    fn zero(&self) -> Self::Point;

    /// Checks that `x` belongs to this space.
    fn validate(&self, x: &Self::Point) -> Result<()>;

    fn add(&self, x: &Self::Point, y: &Self::Point) -> Self::Point;

    fn sub(&self, x: &Self::Point, y: &Self::Point) -> Self::Point;

    /// Scalar multiple by a double. Rational spaces read `lambda` as the exact
    /// dyadic rational it encodes.
    fn scale(&self, x: &Self::Point, lambda: f64) -> Self::Point;

    fn neg(&self, x: &Self::Point) -> Self::Point {
        self.scale(x, -1.0)
    }

    fn is_zero(&self, x: &Self::Point) -> bool {
        *x == self.zero()
    }

    /// Multiples of `x` by scalars that a double cannot express exactly (for
    /// example `√2` acting on a rational span containing `e` and `√2·e`).
    /// Returns `(approximate scalar value, scaled point)` pairs.
    fn special_scalings(&self, _x: &Self::Point) -> Vec<(f64, Self::Point)> {
        Vec::new()
    }

    /// Draws a random point whose coordinates have magnitude around `scale`.
    fn sample(&self, rng: &mut ChaCha8Rng, scale: f64) -> Self::Point;

    /// Coordinate unit vectors, used as deterministic probes before sampling.
    fn basis_points(&self) -> Vec<Self::Point>;

    /// Real coordinates of `x` (approximate for rational spaces).
    fn coords(&self, x: &Self::Point) -> Vec<f64>;

    /// Moves coordinate `coord` of `x` by roughly `delta`.
    fn perturb(&self, x: &Self::Point, coord: usize, delta: f64) -> Self::Point;

    /// Construction tag used to look up a registered closed-form constant.
    fn space_kind(&self) -> SpaceKind {
        SpaceKind::Other
    }

    /// Deterministic candidate pairs evaluated by the estimator before any
    /// random search: `(b, 0)` and `(b_i, b_j)` over the basis probes.
    fn seed_pairs(&self) -> Vec<(Self::Point, Self::Point)> {
        let basis = self.basis_points();
        let zero = self.zero();
        let mut pairs: Vec<_> = basis.iter().map(|b| (b.clone(), zero.clone())).collect();
        for (i, a) in basis.iter().enumerate() {
            for b in &basis[i..] {
                pairs.push((a.clone(), b.clone()));
            }
        }
        pairs
    }
}

/// The gauge `f(x) = d(x, 0)` of a metric space.
#[derive(Clone, Copy)]
pub struct Gauge<'a, S: MetricSpace + ?Sized> {
    source: &'a S,
}

impl<'a, S: MetricSpace + ?Sized> Gauge<'a, S> {
    pub fn new(source: &'a S) -> Self {
        Gauge { source }
    }

    pub fn source(&self) -> &'a S {
        self.source
    }

    pub fn value(&self, x: &S::Point) -> Result<f64> {
        gauge(self.source, x)
    }
}

/// `f(x) = d(x, 0)`.
pub fn gauge<S: MetricSpace + ?Sized>(space: &S, x: &S::Point) -> Result<f64> {
    space.validate(x)?;
    Ok(gauge_unchecked(space, x))
}

#[inline]
pub(crate) fn gauge_unchecked<S: MetricSpace + ?Sized>(space: &S, x: &S::Point) -> f64 {
    space.distance(x, &space.zero())
}

/// Deterministic child generator for stream `index` under `seed`.
pub fn child_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

// Shared plumbing for spaces whose points are real coordinate vectors.

pub(crate) fn check_dim(expected: usize, x: &Vector) -> Result<()> {
    if x.dim() != expected {
        return Err(Error::DimensionMismatch { expected, got: x.dim() });
    }
    Ok(())
}

pub(crate) fn sample_gaussian(dim: usize, rng: &mut ChaCha8Rng, scale: f64) -> Vector {
    Vector::from_vec_unchecked((0..dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect())
}

pub(crate) fn unit_vectors(dim: usize) -> Vec<Vector> {
    (0..dim).map(|i| Vector::unit(dim, i)).collect()
}

pub(crate) fn perturb_vector(x: &Vector, coord: usize, delta: f64) -> Vector {
    let mut v = x.clone();
    v.0[coord] += delta;
    v
}

/// Implements the vector-space half of [`MetricSpace`] for `Point = Vector`.
macro_rules! real_vector_ops {
    () => {
        fn zero(&self) -> $crate::metric::Vector {
            $crate::metric::Vector::zeros(self.dim())
        }

        fn validate(&self, x: &$crate::metric::Vector) -> $crate::error::Result<()> {
            $crate::metric::check_dim(self.dim(), x)
        }

        fn add(&self, x: &$crate::metric::Vector, y: &$crate::metric::Vector) -> $crate::metric::Vector {
            x.add(y)
        }

        fn sub(&self, x: &$crate::metric::Vector, y: &$crate::metric::Vector) -> $crate::metric::Vector {
            x.sub(y)
        }

        fn scale(&self, x: &$crate::metric::Vector, lambda: f64) -> $crate::metric::Vector {
            x.scale(lambda)
        }

        fn is_zero(&self, x: &$crate::metric::Vector) -> bool {
            x.is_zero()
        }

        fn sample(&self, rng: &mut rand_chacha::ChaCha8Rng, scale: f64) -> $crate::metric::Vector {
            $crate::metric::sample_gaussian(self.dim(), rng, scale)
        }

        fn basis_points(&self) -> Vec<$crate::metric::Vector> {
            $crate::metric::unit_vectors(self.dim())
        }

        fn coords(&self, x: &$crate::metric::Vector) -> Vec<f64> {
            x.as_slice().to_vec()
        }

        fn perturb(&self, x: &$crate::metric::Vector, coord: usize, delta: f64) -> $crate::metric::Vector {
            $crate::metric::perturb_vector(x, coord, delta)
        }
    };
}

pub(crate) use real_vector_ops;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_rejects_below_one() {
        assert!(Order::new(0.999).is_err());
        assert!(Order::new(f64::NAN).is_err());
        assert!(Order::new(f64::INFINITY).is_err());
        assert_eq!(Order::new(1.0).unwrap().value(), 1.0);
    }

    #[test]
    fn order_helpers() {
        let s = Order::new(1.5).unwrap();
        assert!((s.universal_lower() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(Order::new(2.0).unwrap().parallelogram_value(), 1.0);
    }

    #[test]
    fn vector_rejects_non_finite() {
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![]).is_err());
        assert!(Vector::new(vec![0.0, -2.5]).is_ok());
    }

    #[test]
    fn child_rng_streams_differ() {
        let a: u64 = child_rng(7, 0).random();
        let b: u64 = child_rng(7, 1).random();
        let c: u64 = child_rng(7, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
