//! Built-in floating-point metrics: standard norms and the non-normable
//! constructions (truncated, fractional power, norm plus square, asymmetric
//! sum), each registered with the property profile an audit should report.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::SpaceKind;
use crate::metric::{real_vector_ops, MetricSpace, Vector};

/// Which construction a [`ZooSpace`] evaluates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZooKind {
    Euclidean,
    /// `‖x−y‖_p`, `p = ∞` encoded as `f64::INFINITY`.
    NormInduced {
        p: f64,
    },
    /// `min(‖x−y‖₂, radius)`.
    Truncated {
        radius: f64,
    },
    /// `‖x−y‖₂^exponent`, exponent in (0, 1].
    FractionalPower {
        exponent: f64,
    },
    /// `‖x−y‖ + |‖x‖² − ‖y‖²|`.
    NormPlusSquare,
    /// `h(x) + h(y)` for `x ≠ y`, with `h` penalising the negative half-space along `direction`.
    AsymmetricSum {
        direction: Vec<f64>,
    },
    Custom {
        name: String,
    },
}

type CustomDistance = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct ZooSpace {
    kind: ZooKind,
    dim: usize,
    custom: Option<Arc<CustomDistance>>,
}

impl fmt::Debug for ZooSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ZooSpace").field("kind", &self.kind).field("dim", &self.dim).finish()
    }
}

fn check_dim_positive(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::contract("dimension must be at least 1"));
    }
    Ok(())
}

pub fn make_euclidean(dim: usize) -> Result<ZooSpace> {
    check_dim_positive(dim)?;
    Ok(ZooSpace { kind: ZooKind::Euclidean, dim, custom: None })
}

pub fn make_norm_induced(dim: usize, p: f64) -> Result<ZooSpace> {
    check_dim_positive(dim)?;
    if p.is_nan() || p < 1.0 {
        return Err(Error::contract(format!("norm exponent must lie in [1, inf], got {p}")));
    }
    Ok(ZooSpace { kind: ZooKind::NormInduced { p }, dim, custom: None })
}

pub fn make_truncated(dim: usize, radius: f64) -> Result<ZooSpace> {
    check_dim_positive(dim)?;
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::contract(format!("radius must be positive, got {radius}")));
    }
    Ok(ZooSpace { kind: ZooKind::Truncated { radius }, dim, custom: None })
}

pub fn make_fractional_power(dim: usize, exponent: f64) -> Result<ZooSpace> {
    check_dim_positive(dim)?;
    if !(exponent > 0.0 && exponent <= 1.0) {
        return Err(Error::contract(format!("exponent must lie in (0, 1], got {exponent}")));
    }
    Ok(ZooSpace { kind: ZooKind::FractionalPower { exponent }, dim, custom: None })
}

pub fn make_norm_plus_square(dim: usize) -> Result<ZooSpace> {
    check_dim_positive(dim)?;
    Ok(ZooSpace { kind: ZooKind::NormPlusSquare, dim, custom: None })
}

pub fn make_asymmetric_sum(dim: usize, direction: &Vector) -> Result<ZooSpace> {
    check_dim_positive(dim)?;
    crate::metric::check_dim(dim, direction)?;
    let n = direction.norm2();
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::contract(format!("direction must have unit norm, got {n}")));
    }
    Ok(ZooSpace { kind: ZooKind::AsymmetricSum { direction: direction.as_slice().to_vec() }, dim, custom: None })
}

/// Wraps an arbitrary distance function. No profile or closed form is registered.
pub fn make_custom(
    name: impl Into<String>,
    dim: usize,
    distance: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
) -> Result<ZooSpace> {
    check_dim_positive(dim)?;
    Ok(ZooSpace { kind: ZooKind::Custom { name: name.into() }, dim, custom: Some(Arc::new(distance)) })
}

fn p_norm(diff: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        diff.fold(0.0, |m, d| m.max(d.abs()))
    } else if p == 1.0 {
        diff.map(f64::abs).sum()
    } else if p == 2.0 {
        diff.map(|d| d * d).sum::<f64>().sqrt()
    } else {
        diff.map(|d| d.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

fn euclid_diff(x: &[f64], y: &[f64]) -> f64 {
    p_norm(x.iter().zip(y).map(|(a, b)| a - b), 2.0)
}

fn asym_h(x: &[f64], e: &[f64]) -> f64 {
    let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    let ip: f64 = x.iter().zip(e).map(|(a, b)| a * b).sum();
    if ip >= 0.0 {
        norm + ip
    } else {
        norm - 4.0 * ip
    }
}

impl ZooSpace {
    pub fn kind(&self) -> &ZooKind {
        &self.kind
    }

    /// Property profile an audit at default budget is expected to reproduce.
    /// `None` for custom metrics.
    pub fn expected_properties(&self) -> Option<BTreeMap<String, bool>> {
        // even, subadditive, midpoint_convex, convex, translation_invariant,
        // positively_homogeneous, absolutely_homogeneous, two_homogeneous,
        // sub_homogeneous, halving
        let flags: [bool; 10] = match &self.kind {
            ZooKind::Euclidean | ZooKind::NormInduced { .. } => [true; 10],
            ZooKind::FractionalPower { exponent } if *exponent == 1.0 => [true; 10],
            ZooKind::Truncated { .. } | ZooKind::FractionalPower { .. } => {
                [true, true, false, false, true, false, false, false, false, false]
            }
            ZooKind::NormPlusSquare => [true, false, true, true, false, false, false, false, true, true],
            ZooKind::AsymmetricSum { .. } => [false, true, true, true, false, true, false, true, true, true],
            ZooKind::Custom { .. } => return None,
        };
        let names = crate::properties::PROFILE_PROPERTIES;
        Some(names.iter().zip(flags).map(|(n, f)| (n.to_string(), f)).collect())
    }

    /// The pair `(e, k·e)` along the asymmetry direction. Its ratio at order σ is
    /// `((2k+2)^σ + (5k−5)^σ) / (2^{σ−1} (2^σ + (2k)^σ))`.
    pub fn asymmetric_witness(&self, k: u64) -> Result<(Vector, Vector)> {
        match &self.kind {
            ZooKind::AsymmetricSum { direction } => {
                let e = Vector::from_vec_unchecked(direction.clone());
                let ke = e.scale(k as f64);
                Ok((e, ke))
            }
            _ => Err(Error::contract("asymmetric witness requires an asymmetric-sum space")),
        }
    }
}

impl MetricSpace for ZooSpace {
    type Point = Vector;

    fn id(&self) -> String {
        let body = match &self.kind {
            ZooKind::Euclidean => "euclidean".to_string(),
            ZooKind::NormInduced { p } if p.is_infinite() => "norm(inf)".to_string(),
            ZooKind::NormInduced { p } => format!("norm({p})"),
            ZooKind::Truncated { radius } => format!("truncated({radius})"),
            ZooKind::FractionalPower { exponent } => format!("frac-power({exponent})"),
            ZooKind::NormPlusSquare => "norm-plus-square".to_string(),
            ZooKind::AsymmetricSum { .. } => "asym-sum".to_string(),
            ZooKind::Custom { name } => format!("custom({name})"),
        };
        format!("{body}:{}", self.dim)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn distance(&self, x: &Vector, y: &Vector) -> f64 {
        match &self.kind {
            ZooKind::Euclidean => euclid_diff(x, y),
            ZooKind::NormInduced { p } => p_norm(x.iter().zip(y.iter()).map(|(a, b)| a - b), *p),
            ZooKind::Truncated { radius } => euclid_diff(x, y).min(*radius),
            ZooKind::FractionalPower { exponent } => euclid_diff(x, y).powf(*exponent),
            ZooKind::NormPlusSquare => euclid_diff(x, y) + (x.norm2().powi(2) - y.norm2().powi(2)).abs(),
            ZooKind::AsymmetricSum { direction } => {
                if x == y {
                    0.0
                } else {
                    asym_h(x, direction) + asym_h(y, direction)
                }
            }
            ZooKind::Custom { .. } => {
                let f = self.custom.as_ref().expect("custom spaces carry a distance");
                f(x, y)
            }
        }
    }

    fn space_kind(&self) -> SpaceKind {
        SpaceKind::Zoo { dim: self.dim, zoo: self.kind.clone() }
    }

    real_vector_ops!();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::gauge;

    fn v(c: &[f64]) -> Vector {
        Vector::from(c.to_vec())
    }

    #[test]
    fn gauge_examples() {
        let e = make_euclidean(2).unwrap();
        assert_eq!(gauge(&e, &v(&[3.0, 4.0])).unwrap(), 5.0);
        let t = make_truncated(2, 1.0).unwrap();
        assert_eq!(gauge(&t, &v(&[3.0, 4.0])).unwrap(), 1.0);
        assert_eq!(gauge(&t, &v(&[0.0, 0.0])).unwrap(), 0.0);
        assert!(gauge(&t, &v(&[1.0])).is_err());
    }

    #[test]
    fn truncated_examples() {
        let t = make_truncated(2, 1.0).unwrap();
        assert_eq!(t.distance(&v(&[3.0, 0.0]), &v(&[0.0, 0.0])), 1.0);
        assert_eq!(t.distance(&v(&[0.4, -2.0]), &v(&[0.4, -2.0])), 0.0);
        let t1 = make_truncated(1, 1.0).unwrap();
        assert_eq!(t1.distance(&v(&[0.3]), &v(&[0.0])), 0.3);
        assert!(make_truncated(2, 0.0).is_err());
        assert!(make_truncated(2, -1.0).is_err());
    }

    #[test]
    fn fractional_power_examples() {
        let f = make_fractional_power(2, 0.2).unwrap();
        let d = f.distance(&v(&[32.0, 0.0]), &v(&[0.0, 0.0]));
        assert!((d - 2.0).abs() < 1e-15);
        let one = make_fractional_power(2, 1.0).unwrap();
        let e = make_euclidean(2).unwrap();
        let (a, b) = (v(&[0.3, -1.2]), v(&[2.0, 0.5]));
        assert_eq!(one.distance(&a, &b), e.distance(&a, &b));
        assert!(make_fractional_power(2, 0.0).is_err());
        assert!(make_fractional_power(2, 1.5).is_err());
    }

    #[test]
    fn norm_plus_square_examples() {
        let s = make_norm_plus_square(2).unwrap();
        assert_eq!(s.distance(&v(&[2.0, 0.0]), &v(&[0.0, 0.0])), 6.0);
        assert_eq!(s.distance(&v(&[1.0, 7.0]), &v(&[1.0, 7.0])), 0.0);
    }

    #[test]
    fn asymmetric_sum_examples() {
        let e = v(&[1.0, 0.0]);
        let s = make_asymmetric_sum(2, &e).unwrap();
        assert_eq!(gauge(&s, &v(&[-1.0, 0.0])).unwrap(), 5.0);
        assert_eq!(gauge(&s, &v(&[1.0, 0.0])).unwrap(), 2.0);
        assert_eq!(s.distance(&v(&[0.5, 0.5]), &v(&[0.5, 0.5])), 0.0);
        assert!(make_asymmetric_sum(2, &v(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn norm_induced_examples() {
        let n2 = make_norm_induced(2, 2.0).unwrap();
        assert!((n2.distance(&v(&[1.0, 1.0]), &v(&[0.0, 0.0])) - 2f64.sqrt()).abs() < 1e-15);
        let n1 = make_norm_induced(2, 1.0).unwrap();
        assert_eq!(n1.distance(&v(&[1.0, 2.0]), &v(&[0.0, 0.0])), 3.0);
        let ninf = make_norm_induced(2, f64::INFINITY).unwrap();
        assert_eq!(ninf.distance(&v(&[1.0, -2.0]), &v(&[0.0, 0.0])), 2.0);
        let n3 = make_norm_induced(2, 3.0).unwrap();
        let d = n3.distance(&v(&[1.0, 1.0]), &v(&[0.0, 0.0]));
        assert!((d - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
        assert!(make_norm_induced(2, 0.5).is_err());
    }

    #[test]
    fn ids_are_stable() {
        assert_eq!(make_truncated(2, 1.0).unwrap().id(), "truncated(1):2");
        assert_eq!(make_norm_induced(3, f64::INFINITY).unwrap().id(), "norm(inf):3");
        assert_eq!(make_fractional_power(2, 0.2).unwrap().id(), "frac-power(0.2):2");
    }
}
