//! Recovery of an inner product from a gauge via polarization.

use super::checks::{run, AuditConfig, Case};
use super::relation::Relation;
use super::CheckResult;
use crate::error::Result;
use crate::metric::{gauge, MetricSpace};

/// `⟨x, y⟩ = ¼ (f²(x+y) − f²(x−y))`.
pub fn recovered_inner_product<S: MetricSpace + ?Sized>(space: &S, x: &S::Point, y: &S::Point) -> Result<f64> {
    let p = gauge(space, &space.add(x, y))?;
    let m = gauge(space, &space.sub(x, y))?;
    Ok(0.25 * (p * p - m * m))
}

/// Symmetry, additivity and real homogeneity in the first slot, and
/// nonnegativity on the diagonal, of the recovered form.
pub fn check_inner_product_axioms<S: MetricSpace + ?Sized>(space: &S, cfg: &AuditConfig) -> Result<CheckResult> {
    Ok(run(space, cfg, |space, d| {
        let l = if d.negate { -d.lam } else { d.lam };
        let lx = space.scale(&d.x, l);
        vec![
            Case::new(Relation::InnerSymmetry, vec![d.x.clone(), d.y.clone()], vec![]),
            Case::new(Relation::InnerAdditive, vec![d.x.clone(), d.z.clone(), d.y.clone()], vec![]),
            Case::new(Relation::InnerHomogeneous, vec![d.x.clone(), lx, d.y.clone()], vec![l]),
            Case::new(Relation::InnerPositive, vec![d.x.clone()], vec![]),
        ]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Vector;
    use crate::zoo;

    #[test]
    fn euclidean_recovers_dot_product() {
        let e = zoo::make_euclidean(3).unwrap();
        let x = Vector::from(vec![1.0, -2.0, 0.5]);
        let y = Vector::from(vec![0.3, 4.0, -1.0]);
        let ip = recovered_inner_product(&e, &x, &y).unwrap();
        assert!((ip - x.dot(&y)).abs() < 1e-12);
        let cfg = AuditConfig::default().with_samples(500);
        assert!(check_inner_product_axioms(&e, &cfg).unwrap().passed());
    }

    #[test]
    fn sum_norm_form_is_not_additive() {
        let n1 = zoo::make_norm_induced(2, 1.0).unwrap();
        let cfg = AuditConfig::default().with_samples(500);
        let c = check_inner_product_axioms(&n1, &cfg).unwrap();
        assert!(!c.passed());
    }
}
