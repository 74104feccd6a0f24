//! Elementary relations between gauge values. Every check reduces to a list
//! of relation instances; a violating instance is stored as a [`Witness`] and
//! can be re-evaluated later from its serialized points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{gauge_unchecked, MetricSpace};

/// Relative and absolute tolerance. The absolute floor takes over when both
/// sides are below `absolute / relative`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub relative: f64,
    pub absolute: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { relative: 1e-9, absolute: 1e-12 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonKind {
    /// `lhs ≤ rhs`.
    AtMost,
    /// `lhs = rhs`.
    Equal,
    /// `lhs > 0` strictly.
    Positive,
}

/// Both sides of a relation instance, plus the magnitude errors are measured against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
    pub kind: ComparisonKind,
    pub scale: f64,
}

impl Comparison {
    pub(crate) fn new(lhs: f64, rhs: f64, kind: ComparisonKind) -> Self {
        Comparison { lhs, rhs, kind, scale: 0.0 }
    }

    fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// Normalized slack. Negative values below `-tol.relative` are violations.
    pub fn margin(&self, tol: Tolerance) -> f64 {
        let s = self.scale.max(self.lhs.abs()).max(self.rhs.abs()).max(tol.absolute / tol.relative);
        let m = match self.kind {
            ComparisonKind::AtMost => (self.rhs - self.lhs) / s,
            ComparisonKind::Equal => -(self.lhs - self.rhs).abs() / s,
            ComparisonKind::Positive => {
                if self.lhs > 0.0 {
                    0.0
                } else {
                    -1.0
                }
            }
        };
        if m.is_nan() {
            f64::NEG_INFINITY
        } else {
            m
        }
    }

    pub fn violates(&self, tol: Tolerance) -> bool {
        self.margin(tol) < -tol.relative
    }
}

/// A relation between gauge or distance values at a handful of points.
///
/// Point and scalar layouts:
/// * `Symmetry`, `Positivity`: `[x, y]`, checks `d(x,y) = d(y,x)` and `d(x,y) > 0` for `x ≠ y`.
/// * `Identity`: `[x]`, `d(x,x) = 0`.
/// * `Triangle`: `[x, y, z]`, `d(x,z) ≤ d(x,y) + d(y,z)`.
/// * `Even`: `[x]`. `Subadditive`, `MidpointConvex`: `[x, y]`.
/// * `Convex`: `[x, y, λx, λy]` with scalars `[λ]`.
/// * `TranslationInvariant`: `[x, y, z]`, `d(x+z, y+z) = d(x, y)`.
/// * `Homogeneous`, `SubHomogeneous`: `[x, λx]` with scalars `[λ]`.
/// * `Parallelogram`, `Clarkson`, `ReverseClarkson`: `[x, y]`.
/// * Inner-product relations on `⟨x,y⟩ = ¼(f²(x+y) − f²(x−y))`:
///   `InnerSymmetry` `[x, y]`, `InnerAdditive` `[x, z, y]`,
///   `InnerHomogeneous` `[x, λx, y]` with `[λ]`, `InnerPositive` `[x]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "relation", rename_all = "snake_case")]
pub enum Relation {
    Symmetry,
    Identity,
    Positivity,
    Triangle,
    Even,
    Subadditive,
    MidpointConvex,
    Convex,
    TranslationInvariant,
    Homogeneous { absolute: bool },
    SubHomogeneous,
    Parallelogram { sigma: f64 },
    Clarkson { alpha: f64, beta: f64 },
    ReverseClarkson { alpha: f64, beta: f64 },
    InnerSymmetry,
    InnerAdditive,
    InnerHomogeneous,
    InnerPositive,
}

impl Relation {
    fn arity(self) -> (usize, usize) {
        use Relation::*;
        match self {
            Identity | Even | InnerPositive => (1, 0),
            Symmetry
            | Positivity
            | Subadditive
            | MidpointConvex
            | Parallelogram { .. }
            | Clarkson { .. }
            | ReverseClarkson { .. }
            | InnerSymmetry => (2, 0),
            Triangle | TranslationInvariant | InnerAdditive => (3, 0),
            Convex => (4, 1),
            Homogeneous { .. } | SubHomogeneous => (2, 1),
            InnerHomogeneous => (3, 1),
        }
    }

    /// Evaluates the relation. `None` means the instance does not apply
    /// (for example positivity at coinciding points).
    pub fn evaluate<S: MetricSpace + ?Sized>(
        self,
        space: &S,
        points: &[S::Point],
        scalars: &[f64],
    ) -> Option<Comparison> {
        use ComparisonKind::*;
        let f = |p: &S::Point| gauge_unchecked(space, p);
        let d = |a: &S::Point, b: &S::Point| space.distance(a, b);
        let inner = |a: &S::Point, b: &S::Point| {
            let p = f(&space.add(a, b)).powi(2);
            let m = f(&space.sub(a, b)).powi(2);
            (0.25 * (p - m), 0.25 * (p + m))
        };
        let c = match self {
            Relation::Symmetry => Comparison::new(d(&points[0], &points[1]), d(&points[1], &points[0]), Equal),
            Relation::Identity => Comparison::new(d(&points[0], &points[0]), 0.0, Equal),
            Relation::Positivity => {
                if points[0] == points[1] {
                    return None;
                }
                Comparison::new(d(&points[0], &points[1]), 0.0, Positive)
            }
            Relation::Triangle => {
                let (x, y, z) = (&points[0], &points[1], &points[2]);
                Comparison::new(d(x, z), d(x, y) + d(y, z), AtMost)
            }
            Relation::Even => Comparison::new(f(&space.neg(&points[0])), f(&points[0]), Equal),
            Relation::Subadditive => {
                let (x, y) = (&points[0], &points[1]);
                Comparison::new(f(&space.add(x, y)), f(x) + f(y), AtMost)
            }
            Relation::MidpointConvex => {
                let (x, y) = (&points[0], &points[1]);
                let mid = space.scale(&space.add(x, y), 0.5);
                Comparison::new(f(&mid), 0.5 * (f(x) + f(y)), AtMost)
            }
            Relation::Convex => {
                let l = scalars[0];
                let (x, y, lx, ly) = (&points[0], &points[1], &points[2], &points[3]);
                let comb = space.add(lx, &space.sub(y, ly));
                Comparison::new(f(&comb), l * f(x) + (1.0 - l) * f(y), AtMost)
            }
            Relation::TranslationInvariant => {
                let (x, y, z) = (&points[0], &points[1], &points[2]);
                let shifted = d(&space.add(x, z), &space.add(y, z));
                Comparison::new(shifted, d(x, y), Equal)
            }
            Relation::Homogeneous { absolute } => {
                let l = scalars[0];
                let factor = if absolute { l.abs() } else { l };
                Comparison::new(f(&points[1]), factor * f(&points[0]), Equal)
            }
            Relation::SubHomogeneous => Comparison::new(f(&points[1]), scalars[0] * f(&points[0]), AtMost),
            Relation::Parallelogram { sigma } => {
                let (x, y) = (&points[0], &points[1]);
                let lhs = f(&space.add(x, y)).powf(sigma) + f(&space.sub(x, y)).powf(sigma);
                let rhs = (sigma / 2.0).exp2() * (f(x).powf(sigma) + f(y).powf(sigma));
                Comparison::new(lhs, rhs, Equal)
            }
            Relation::Clarkson { alpha, beta } => {
                let (x, y) = (&points[0], &points[1]);
                let lhs = f(&space.add(x, y)).powf(beta) + f(&space.sub(x, y)).powf(beta);
                let rhs = 2.0 * (f(x).powf(alpha) + f(y).powf(alpha)).powf(beta / alpha);
                Comparison::new(lhs, rhs, AtMost)
            }
            Relation::ReverseClarkson { alpha, beta } => {
                let (x, y) = (&points[0], &points[1]);
                let lhs = 2.0 * (f(x).powf(beta) + f(y).powf(beta)).powf(alpha / beta);
                let rhs = f(&space.add(x, y)).powf(alpha) + f(&space.sub(x, y)).powf(alpha);
                Comparison::new(lhs, rhs, AtMost)
            }
            Relation::InnerSymmetry => {
                let (a, sa) = inner(&points[0], &points[1]);
                let (b, sb) = inner(&points[1], &points[0]);
                Comparison::new(a, b, Equal).with_scale(sa.max(sb))
            }
            Relation::InnerAdditive => {
                let (x, z, y) = (&points[0], &points[1], &points[2]);
                let (l, sl) = inner(&space.add(x, z), y);
                let (a, sa) = inner(x, y);
                let (b, sb) = inner(z, y);
                Comparison::new(l, a + b, Equal).with_scale(sl.max(sa).max(sb))
            }
            Relation::InnerHomogeneous => {
                let (x, lx, y) = (&points[0], &points[1], &points[2]);
                let l = scalars[0];
                let (a, sa) = inner(lx, y);
                let (b, sb) = inner(x, y);
                Comparison::new(a, l * b, Equal).with_scale(sa.max(l.abs() * sb))
            }
            Relation::InnerPositive => {
                let (v, s) = inner(&points[0], &points[0]);
                Comparison::new(0.0, v, AtMost).with_scale(s)
            }
        };
        Some(c)
    }
}

/// A violating relation instance with serialized points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(flatten)]
    pub relation: Relation,
    pub points: Vec<serde_json::Value>,
    pub scalars: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

impl Witness {
    pub(crate) fn capture<P: Serialize>(relation: Relation, points: &[P], scalars: &[f64], c: &Comparison) -> Self {
        Witness {
            relation,
            points: points.iter().map(|p| serde_json::to_value(p).expect("points serialize to JSON")).collect(),
            scalars: scalars.to_vec(),
            lhs: c.lhs,
            rhs: c.rhs,
        }
    }

    /// Deserializes the points into `space` and re-evaluates the relation.
    pub fn replay<S: MetricSpace + ?Sized>(&self, space: &S) -> Result<Comparison> {
        let (np, ns) = self.relation.arity();
        if self.points.len() != np || self.scalars.len() != ns {
            return Err(Error::Parse(format!("{:?} expects {np} points and {ns} scalars", self.relation)));
        }
        let points = self
            .points
            .iter()
            .map(|v| {
                let p: S::Point =
                    serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("witness point: {e}")))?;
                space.validate(&p)?;
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        self.relation
            .evaluate(space, &points, &self.scalars)
            .ok_or_else(|| Error::Parse("witness does not apply to these points".into()))
    }
}
