use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::basis::{BasisDecl, QVector};
use super::rational::{exact, round_dyadic, to_f64, Rational};
use crate::error::{Error, Result};
use crate::estimator::SpaceKind;
use crate::metric::{child_rng, MetricSpace};
use crate::properties::{CheckResult, Comparison, ComparisonKind, Relation, Witness, PROFILE_PROPERTIES};

/// Sampled coefficients are multiples of `2^-SAMPLE_BITS`.
const SAMPLE_BITS: i32 = 10;
/// Perturbation steps are multiples of `2^-PERTURB_BITS`.
const PERTURB_BITS: i32 = 20;

/// Indices used by the seed pairs of the Hamel-additive space.
const SEED_WITNESS_INDICES: [u64; 4] = [1, 10, 100, 1000];

fn labels_id(basis: &BasisDecl) -> String {
    basis.labels().collect::<Vec<_>>().join(",")
}

/// Profile expected when the basis carries an irrational scalar action. Both
/// rational spaces are homogeneous for every rational scalar and fail every
/// test that uses the irrational one.
fn profile_with_action(basis: &BasisDecl) -> Option<BTreeMap<String, bool>> {
    if basis.actions().is_empty() {
        return None;
    }
    let fails = ["convex", "positively_homogeneous", "absolutely_homogeneous", "sub_homogeneous"];
    Some(PROFILE_PROPERTIES.iter().map(|p| (p.to_string(), !fails.contains(p))).collect())
}

/// Shared vector-space half of [`MetricSpace`] for `Point = QVector`.
macro_rules! qvector_ops {
    () => {
        fn dim(&self) -> usize {
            self.basis.len()
        }

        fn zero(&self) -> QVector {
            QVector::zero()
        }

        fn validate(&self, x: &QVector) -> Result<()> {
            self.basis.check(x)
        }

        fn add(&self, x: &QVector, y: &QVector) -> QVector {
            x.add(y)
        }

        fn sub(&self, x: &QVector, y: &QVector) -> QVector {
            x.sub(y)
        }

        fn scale(&self, x: &QVector, lambda: f64) -> QVector {
            x.scale(&exact(lambda))
        }

        fn neg(&self, x: &QVector) -> QVector {
            x.neg()
        }

        fn is_zero(&self, x: &QVector) -> bool {
            x.is_zero()
        }

        fn special_scalings(&self, x: &QVector) -> Vec<(f64, QVector)> {
            self.basis.actions().iter().map(|a| (a.value, self.basis.apply(a, x))).collect()
        }

        fn sample(&self, rng: &mut ChaCha8Rng, scale: f64) -> QVector {
            sample_qvector(&self.basis, rng, scale)
        }

        fn basis_points(&self) -> Vec<QVector> {
            self.basis.labels().map(QVector::unit).collect()
        }

        fn coords(&self, x: &QVector) -> Vec<f64> {
            self.basis.labels().map(|l| to_f64(&x.coeff(l))).collect()
        }

        fn perturb(&self, x: &QVector, coord: usize, delta: f64) -> QVector {
            let label = self.basis.entries()[coord].label.as_str();
            x.add(&QVector::from_terms([(label, round_dyadic(delta, PERTURB_BITS))]))
        }
    };
}

fn sample_qvector(basis: &BasisDecl, rng: &mut ChaCha8Rng, scale: f64) -> QVector {
    let coeffs: Vec<_> =
        basis.labels().map(|l| (l, round_dyadic(scale * rng.sample::<f64, _>(StandardNormal), SAMPLE_BITS))).collect();
    QVector::from_terms(coeffs)
}

/// `d(x, y) = |embed(x−y)| + |φ(x−y)|`: translation invariant, subadditive,
/// even and ℚ-homogeneous, but not a norm.
#[derive(Clone, Debug)]
pub struct HamelAdditive {
    basis: Arc<BasisDecl>,
}

pub fn make_hamel_additive_metric(basis: impl Into<Arc<BasisDecl>>) -> HamelAdditive {
    HamelAdditive { basis: basis.into() }
}

impl HamelAdditive {
    pub fn basis(&self) -> &BasisDecl {
        &self.basis
    }

    /// Gauge split into its real part `|embed(x)|` and exact part `|φ(x)|`.
    pub fn gauge_parts(&self, x: &QVector) -> Result<(f64, Rational)> {
        self.basis.check(x)?;
        Ok((self.basis.embed_unchecked(x).abs(), self.basis.functional_unchecked(x).abs()))
    }

    pub fn expected_properties(&self) -> Option<BTreeMap<String, bool>> {
        profile_with_action(&self.basis)
    }

    /// Checks `φ(q·x) = q·φ(x)` exactly and `|embed(q·x)| = |q|·|embed(x)|`
    /// to 1e-12 relative, for random rational `q` and sampled `x`.
    pub fn check_rational_homogeneity(&self, samples: usize, seed: u64) -> CheckResult {
        const REL: f64 = 1e-12;
        let scales = [0.01, 1.0, 100.0];
        let mut worst = 0.0f64;
        for i in 0..samples {
            let mut rng = child_rng(seed, i as u64);
            let x = sample_qvector(&self.basis, &mut rng, scales[i % scales.len()]);
            let num: i64 = rng.random_range(-50..=50);
            let den: i64 = rng.random_range(1..=20);
            let q = Rational::new(num.into(), den.into());
            let qx = x.scale(&q);
            let phi_ok = self.basis.functional_unchecked(&qx) == &q * self.basis.functional_unchecked(&x);
            let lhs = self.basis.embed_unchecked(&qx).abs();
            let rhs = to_f64(&q.abs()) * self.basis.embed_unchecked(&x).abs();
            let margin = -(lhs - rhs).abs() / lhs.max(rhs).max(1.0);
            worst = worst.min(margin);
            if !phi_ok || margin < -REL {
                let (fl, fr) =
                    (self.distance(&qx, &QVector::zero()), to_f64(&q.abs()) * self.distance(&x, &QVector::zero()));
                let c = Comparison::new(fl, fr, ComparisonKind::Equal);
                let w = Witness::capture(Relation::Homogeneous { absolute: true }, &[x, qx], &[to_f64(&q)], &c);
                return CheckResult::fail(w, if phi_ok { margin } else { -1.0 }, i + 1, seed);
            }
        }
        CheckResult::pass(worst, samples, seed)
    }
}

impl MetricSpace for HamelAdditive {
    type Point = QVector;

    fn id(&self) -> String {
        format!("hamel-additive({})", labels_id(&self.basis))
    }

    fn distance(&self, x: &QVector, y: &QVector) -> f64 {
        let v = x.sub(y);
        self.basis.embed_unchecked(&v).abs() + to_f64(&self.basis.functional_unchecked(&v).abs())
    }

    fn space_kind(&self) -> SpaceKind {
        SpaceKind::HamelAdditive
    }

    fn seed_pairs(&self) -> Vec<(QVector, QVector)> {
        let basis = self.basis_points();
        let mut pairs: Vec<_> = basis.iter().map(|b| (b.clone(), QVector::zero())).collect();
        for (i, a) in basis.iter().enumerate() {
            for b in &basis[i..] {
                pairs.push((a.clone(), b.clone()));
            }
        }
        for k in SEED_WITNESS_INDICES {
            if let Ok(p) = hamel_witness_generator(&self.basis, k) {
                pairs.push(p);
            }
        }
        pairs
    }

    qvector_ops!();
}

/// `d(x, y)` is the Euclidean norm of the coefficient vector of `x − y`.
#[derive(Clone, Debug)]
pub struct RationalEuclidean {
    basis: Arc<BasisDecl>,
}

pub fn make_rational_euclidean_metric(basis: impl Into<Arc<BasisDecl>>) -> RationalEuclidean {
    RationalEuclidean { basis: basis.into() }
}

impl RationalEuclidean {
    pub fn basis(&self) -> &BasisDecl {
        &self.basis
    }

    pub fn expected_properties(&self) -> Option<BTreeMap<String, bool>> {
        profile_with_action(&self.basis)
    }

    /// Exact squared gauge.
    pub fn squared_gauge(&self, x: &QVector) -> Result<Rational> {
        self.basis.check(x)?;
        Ok(x.squared_norm())
    }
}

impl MetricSpace for RationalEuclidean {
    type Point = QVector;

    fn id(&self) -> String {
        format!("rational-euclidean({})", labels_id(&self.basis))
    }

    fn distance(&self, x: &QVector, y: &QVector) -> f64 {
        to_f64(&x.sub(y).squared_norm()).sqrt()
    }

    fn space_kind(&self) -> SpaceKind {
        SpaceKind::RationalEuclidean
    }

    qvector_ops!();
}

/// `A²(x+y) + A²(x−y) = 2(A²(x) + A²(y))` on squared coefficient norms, exact.
pub fn rational_parallelogram_exact(x: &QVector, y: &QVector) -> bool {
    let two = Rational::from_integer(2.into());
    x.add(y).squared_norm() + x.sub(y).squared_norm() == two * (x.squared_norm() + y.squared_norm())
}

/// `|k − h√2/q| ≤ 1`, decided in integers.
fn within_unit(k: &BigInt, h: &BigInt, q: &BigInt) -> bool {
    let two_h2 = BigInt::from(2) * h * h;
    let lo: BigInt = (k - 1u32) * q;
    let hi: BigInt = (k + 1u32) * q;
    let lo_ok = !lo.is_positive() || two_h2 >= &lo * &lo;
    lo_ok && two_h2 <= &hi * &hi
}

/// First continued-fraction convergent `h/q` of `k/√2` with `|k − h√2/q| ≤ 1`.
fn sqrt2_convergent(k: u64) -> (BigInt, BigInt) {
    let k = BigInt::from(k);
    // k/√2 = √(2k²)/2, expanded as the quadratic surd (P + √D)/Q.
    let d = BigInt::from(2) * &k * &k;
    let root = d.sqrt();
    let (mut p, mut q) = (BigInt::zero(), BigInt::from(2));
    let (mut h1, mut h2) = (BigInt::one(), BigInt::zero());
    let (mut k1, mut k2) = (BigInt::zero(), BigInt::one());
    loop {
        let a = (&p + &root) / &q;
        let h = &a * &h1 + &h2;
        let den = &a * &k1 + &k2;
        if within_unit(&k, &h, &den) {
            return (h, den);
        }
        (h2, h1) = (h1, h);
        (k2, k1) = (k1, den);
        p = &a * &q - &p;
        q = (&d - &p * &p) / &q;
    }
}

/// Witness pair `(x_k, y_k)` with `x_k = k·e + r·(√2e)`, `φ(x_k) = k`,
/// `|embed(x_k)| ≤ 1` and `y_k = k·e − x_k`. The ratio tends to 2.
pub fn hamel_witness_generator(basis: &BasisDecl, k: u64) -> Result<(QVector, QVector)> {
    if k == 0 {
        return Err(Error::contract("witness index k must be at least 1"));
    }
    let find = |target: f64, g: i64| {
        basis
            .entries()
            .iter()
            .find(|e| e.embed == target && e.functional_value == Rational::from_integer(g.into()))
            .map(|e| e.label.clone())
    };
    let e = find(1.0, 1).ok_or_else(|| Error::contract("basis needs a label with embed 1 and functional value 1"))?;
    let s = find(std::f64::consts::SQRT_2, 0)
        .ok_or_else(|| Error::contract("basis needs a label with embed √2 and functional value 0"))?;
    let (h, q) = sqrt2_convergent(k);
    let r = -Rational::new(h, q);
    let kq = Rational::from_integer(k.into());
    let x = QVector::from_terms([(e.as_str(), kq), (s.as_str(), r.clone())]);
    let y = QVector::from_terms([(s.as_str(), -r)]);
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{gauge, Order};
    use crate::qspace::{additive_functional, parse_rational};
    use crate::ratio::gauge_ratio;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn hamel_gauge_examples() {
        let h = make_hamel_additive_metric(BasisDecl::sqrt2());
        assert_eq!(gauge(&h, &QVector::unit("e")).unwrap(), 2.0);
        assert_eq!(gauge(&h, &QVector::unit("sqrt2e")).unwrap(), std::f64::consts::SQRT_2);
        assert_eq!(gauge(&h, &QVector::zero()).unwrap(), 0.0);
        assert!(matches!(gauge(&h, &QVector::unit("pi")), Err(Error::Contract(_))));
    }

    #[test]
    fn rational_euclidean_examples() {
        let r = make_rational_euclidean_metric(BasisDecl::sqrt2());
        assert_eq!(gauge(&r, &QVector::unit("e")).unwrap(), 1.0);
        assert_eq!(gauge(&r, &QVector::unit("sqrt2e")).unwrap(), 1.0);
        let x = QVector::from_terms([("e", q("3")), ("sqrt2e", q("4"))]);
        assert_eq!(gauge(&r, &x).unwrap(), 5.0);
    }

    #[test]
    fn parallelogram_examples() {
        let (e, s) = (QVector::unit("e"), QVector::unit("sqrt2e"));
        assert!(rational_parallelogram_exact(&e, &s));
        assert!(rational_parallelogram_exact(&e, &e));
        let x = QVector::from_terms([("e", q("1/3")), ("sqrt3e", q("-7/2"))]);
        let y = QVector::from_terms([("sqrt2e", q("5/9")), ("sqrt3e", q("2"))]);
        assert!(rational_parallelogram_exact(&x, &y));
    }

    #[test]
    fn convergent_meets_bound() {
        for k in 1..=200u64 {
            let (h, den) = sqrt2_convergent(k);
            let v = k as f64 - to_f64(&Rational::new(h, den)) * std::f64::consts::SQRT_2;
            assert!(v.abs() <= 1.0 + 1e-12, "k={k}: {v}");
        }
    }

    #[test]
    fn first_witness() {
        let b = BasisDecl::sqrt2();
        let (x, y) = hamel_witness_generator(&b, 1).unwrap();
        assert_eq!(additive_functional(&b, &x).unwrap(), q("1"));
        assert!(b.embed(&x).unwrap().abs() <= 1.0);
        assert_eq!(x.add(&y), QVector::unit("e"));
    }

    #[test]
    fn witness_ratio_lower_bound() {
        let b = BasisDecl::sqrt2();
        let h = make_hamel_additive_metric(b.clone());
        for sigma in [1.0, 2.0, 3.0] {
            let o = Order::new(sigma).unwrap();
            for k in [1u64, 2, 5, 17, 100, 1000] {
                let (x, y) = hamel_witness_generator(&b, k).unwrap();
                assert_eq!(additive_functional(&b, &x).unwrap(), Rational::from_integer(k.into()));
                assert!(b.embed(&x).unwrap().abs() <= 1.0 + 1e-9);
                let g = gauge_ratio(&h, o, &x, &y).unwrap();
                let kf = k as f64;
                let bound = ((2.0 * kf).powf(sigma) + (2.0 * kf - 2.0).powf(sigma))
                    / ((sigma - 1.0).exp2() * 2.0 * (1.0 + kf).powf(sigma));
                assert!(g >= bound - 1e-12, "σ={sigma} k={k}: {g} < {bound}");
                assert!(g <= 2.0 + 1e-9);
            }
        }
    }

    #[test]
    fn witness_needs_declared_labels() {
        assert!(hamel_witness_generator(&BasisDecl::sqrt2(), 0).is_err());
        let other = BasisDecl::from_json(r#"[{"label":"a","embed":"2","functional_value":"1"}]"#).unwrap();
        assert!(matches!(hamel_witness_generator(&other, 3), Err(Error::Contract(_))));
    }

    #[test]
    fn rational_homogeneity_passes() {
        let h = make_hamel_additive_metric(BasisDecl::sqrt2());
        assert!(h.check_rational_homogeneity(500, 3).passed());
    }

    #[test]
    fn sqrt2_scaling_breaks_homogeneity() {
        let h = make_hamel_additive_metric(BasisDecl::sqrt2());
        let e = QVector::unit("e");
        let (s, se) = h.special_scalings(&e).remove(0);
        let fe = gauge(&h, &e).unwrap();
        assert_eq!(gauge(&h, &se).unwrap(), std::f64::consts::SQRT_2);
        assert!((s * fe - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-15);
    }
}
