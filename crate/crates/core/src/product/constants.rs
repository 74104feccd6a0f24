use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::make_psi_p;
use super::simplex::{scan_points, SimplexFunction};
use super::space::{make_product, Component};
use crate::error::{Error, Result};
use crate::metric::Order;
use crate::properties::{check_clarkson, AuditConfig, CheckResult, Status};

/// Slack on the endpoints of the `σ` validity intervals.
const INTERVAL_SLACK: f64 = 1e-12;

/// Extremes of `ψ/φ` over the simplex with the points attaining them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMaxRatio {
    pub min: f64,
    pub min_at: Vec<f64>,
    pub max: f64,
    pub max_at: Vec<f64>,
}

/// Moves `delta` of mass from coordinate `j` to coordinate `i`, staying on the simplex.
fn shift(t: &[f64], i: usize, j: usize, delta: f64) -> Option<Vec<f64>> {
    let d = delta.clamp(-t[i], t[j]);
    if d == 0.0 {
        return None;
    }
    let mut s = t.to_vec();
    s[i] += d;
    s[j] -= d;
    Some(s)
}

/// Coordinate-pair hill climb with a halving step. `sign` is `1` to maximize
/// and `-1` to minimize.
fn refine(r: &(dyn Fn(&[f64]) -> f64 + Sync), start: (Vec<f64>, f64), sign: f64, steps: usize) -> (Vec<f64>, f64) {
    let (mut t, mut v) = start;
    let n = t.len();
    let mut step = 0.05;
    for _ in 0..steps {
        let mut moved = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                if let Some(s) = shift(&t, i, j, step) {
                    let w = r(&s);
                    if sign * w > sign * v {
                        (t, v, moved) = (s, w, true);
                    }
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (t, v)
}

/// `m = min ψ/φ` and `M = max ψ/φ` over `Ωₙ`: lattice plus random points,
/// then projected refinement. Both values carry the attaining point.
pub fn min_max_ratio(
    psi: &SimplexFunction,
    phi: &SimplexFunction,
    grid_resolution: usize,
    refine_steps: usize,
) -> Result<MinMaxRatio> {
    if psi.n() != phi.n() {
        return Err(Error::contract(format!("n mismatch: {} vs {}", psi.n(), phi.n())));
    }
    if grid_resolution < 2 {
        return Err(Error::contract("grid resolution must be at least 2"));
    }
    for f in [psi, phi] {
        if f.membership().status != Status::Pass {
            return Err(Error::contract(format!("{} failed the membership audit", f.kind())));
        }
    }
    let ratio = |t: &[f64]| psi.eval_unchecked(t) / phi.eval_unchecked(t);
    let pts = scan_points(psi.n(), grid_resolution);
    let values: Vec<f64> = pts.par_iter().map(|t| ratio(t)).collect();
    let pick = |better: fn(f64, f64) -> bool| {
        let mut k = 0;
        for (i, &v) in values.iter().enumerate() {
            if better(v, values[k]) {
                k = i;
            }
        }
        (pts[k].clone(), values[k])
    };
    let (min_at, min) = refine(&ratio, pick(|a, b| a < b), -1.0, refine_steps);
    let (max_at, max) = refine(&ratio, pick(|a, b| a > b), 1.0, refine_steps);
    Ok(MinMaxRatio { min, min_at, max, max_at })
}

/// `[(m/M)^σ C_φ, (M/m)^σ C_φ]`.
pub fn transfer_bounds(c_phi: f64, m: f64, big_m: f64, sigma: Order) -> Result<(f64, f64)> {
    if !(c_phi > 0.0 && c_phi.is_finite()) {
        return Err(Error::contract(format!("reference constant must be positive, got {c_phi}")));
    }
    if !(m > 0.0 && m <= big_m && big_m.is_finite()) {
        return Err(Error::contract(format!("need 0 < m <= M, got m = {m}, M = {big_m}")));
    }
    let s = sigma.value();
    Ok(((m / big_m).powf(s) * c_phi, (big_m / m).powf(s) * c_phi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Side {
    /// `ψ ≥ φ` on the simplex.
    Above,
    /// `ψ ≤ φ` on the simplex.
    Below,
}

/// Exact constant of `d_ψ` for `n = 2` when `ψ` dominates or is dominated by a
/// reference `φ` with constant `2^{1−σ/2}`: `M₂^σ·2^{1−σ/2}` above,
/// `m₂^{−σ}·2^{1−σ/2}` below. The caller attests the hypotheses on the
/// components (positive homogeneity, one of them even).
pub fn dominating_exact_constant(ratio: f64, sigma: Order, side: Side) -> f64 {
    let s = sigma.value();
    let base = sigma.parallelogram_value();
    match side {
        Side::Above => ratio.powf(s) * base,
        Side::Below => ratio.powf(-s) * base,
    }
}

fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn in_interval(s: f64, lo: f64, hi: f64) -> bool {
    s >= lo - INTERVAL_SLACK && s <= hi + INTERVAL_SLACK
}

/// Exact constant of the `ψ_p` product of components satisfying the
/// relevant Clarkson inequality, or `None` outside the validity interval.
/// `p ∈ (1, 2]`: `2^{σ/p−σ+1}` on `[p, q]`; `p ∈ (2, ∞)`: `2^{1−σ/p}` on
/// `[q, p]`; `p ∈ {1, ∞}`: `2` for every order.
pub fn pmetric_constant(p: f64, sigma: Order) -> Option<f64> {
    let s = sigma.value();
    if p.is_nan() || p < 1.0 {
        return None;
    }
    if p == 1.0 || p.is_infinite() {
        return Some(2.0);
    }
    let q = conjugate(p);
    if p <= 2.0 {
        in_interval(s, p, q).then(|| (s / p - s + 1.0).exp2())
    } else {
        in_interval(s, q, p).then(|| (1.0 - s / p).exp2())
    }
}

/// Sampled check of the lifting lemma: when every component satisfies the
/// `(p, q)`-Clarkson inequality, so does the `ψ_p` product. SKIPPED when some
/// component fails the hypothesis; the note names it.
pub fn check_clarkson_lift(components: &[Component], p: f64, cfg: &AuditConfig) -> Result<CheckResult> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::contract(format!("lift needs p in (1, 2], got {p}")));
    }
    let q = conjugate(p);
    for c in components {
        let r = check_clarkson(c.as_ref(), p, q, cfg)?;
        if !r.passed() {
            return Ok(CheckResult::skipped(
                format!("hypothesis fails: {} violates the ({p}, {q})-Clarkson inequality", c.id()),
                cfg.samples,
                cfg.seed,
            ));
        }
    }
    let product = make_product(components.to_vec(), make_psi_p(components.len(), p)?)?;
    check_clarkson(&product, p, q, cfg)
}

/// Convenience wrapper for a product of identical components.
pub fn replicate(component: Component, n: usize) -> Vec<Component> {
    (0..n).map(|_| Arc::clone(&component)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerMeanVariant {
    /// `(Σa)^α ≤ Σa^α ≤ n^{1−α}(Σa)^α` for `α ∈ (0, 1]`.
    I,
    /// `n^{1−α}(Σa)^α ≤ Σa^α ≤ (Σa)^α` for `α ≥ 1`.
    II,
    /// `(Σ(a+b)^α)^{1/α} ≥ (Σa^α)^{1/α} + (Σb^α)^{1/α}` for `α ∈ (0, 1]`.
    III,
}

/// Evaluates the power-mean inequality chain with relative slack `1e-12`.
/// Variant III needs `b` of the same length as `a`.
pub fn power_mean_oracle(alpha: f64, variant: PowerMeanVariant, a: &[f64], b: Option<&[f64]>) -> Result<bool> {
    const REL: f64 = 1e-12;
    if a.is_empty() {
        return Err(Error::contract("need at least one value"));
    }
    if a.iter().chain(b.into_iter().flatten()).any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::contract("values must be finite and nonnegative"));
    }
    let le = |x: f64, y: f64| x <= y + REL * x.abs().max(y.abs());
    let n = a.len() as f64;
    let sum: f64 = a.iter().sum();
    let pow_sum = |v: &[f64]| v.iter().map(|x| x.powf(alpha)).sum::<f64>();
    match variant {
        PowerMeanVariant::I => {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::contract(format!("variant I needs alpha in (0, 1], got {alpha}")));
            }
            let (lo, mid, hi) = (sum.powf(alpha), pow_sum(a), n.powf(1.0 - alpha) * sum.powf(alpha));
            Ok(le(lo, mid) && le(mid, hi))
        }
        PowerMeanVariant::II => {
            if !(alpha >= 1.0 && alpha.is_finite()) {
                return Err(Error::contract(format!("variant II needs alpha >= 1, got {alpha}")));
            }
            let (lo, mid, hi) = (n.powf(1.0 - alpha) * sum.powf(alpha), pow_sum(a), sum.powf(alpha));
            Ok(le(lo, mid) && le(mid, hi))
        }
        PowerMeanVariant::III => {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::contract(format!("variant III needs alpha in (0, 1], got {alpha}")));
            }
            let b = b.ok_or_else(|| Error::contract("variant III needs a second tuple"))?;
            if b.len() != a.len() {
                return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
            }
            let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
            let norm = |v: &[f64]| pow_sum(v).powf(1.0 / alpha);
            Ok(le(norm(a) + norm(b), norm(&ab)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::product::named_psi;
    use crate::zoo;

    fn o(s: f64) -> Order {
        Order::new(s).unwrap()
    }

    #[test]
    fn min_max_examples() {
        let p1 = make_psi_p(2, 1.0).unwrap();
        let p2 = make_psi_p(2, 2.0).unwrap();
        let pinf = make_psi_p(2, f64::INFINITY).unwrap();
        let same = min_max_ratio(&p2, &p2, 200, 50).unwrap();
        assert_eq!((same.min, same.max), (1.0, 1.0));
        let r = min_max_ratio(&p1, &pinf, 200, 50).unwrap();
        assert!((r.min - 1.0).abs() < 1e-12 && (r.max - 2.0).abs() < 1e-12);
        assert!((r.max_at[0] - 0.5).abs() < 1e-9);
        let r = min_max_ratio(&p2, &pinf, 200, 50).unwrap();
        assert!((r.min - 1.0).abs() < 1e-12 && (r.max - 2f64.sqrt()).abs() < 1e-9);
        assert!(min_max_ratio(&p1, &make_psi_p(3, 1.0).unwrap(), 10, 0).is_err());
    }

    #[test]
    fn transfer_examples() {
        assert_eq!(transfer_bounds(1.3, 1.0, 1.0, o(2.0)).unwrap(), (1.3, 1.3));
        assert_eq!(transfer_bounds(1.0, 1.0, 2.0, o(2.0)).unwrap(), (0.25, 4.0));
        let (lo, hi) = transfer_bounds(2.0, 1.0, 2f64.sqrt(), o(2.0)).unwrap();
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 4.0).abs() < 1e-14);
        assert!(transfer_bounds(0.0, 1.0, 1.0, o(2.0)).is_err());
        assert!(transfer_bounds(1.0, 2.0, 1.0, o(2.0)).is_err());
    }

    #[test]
    fn dominating_examples() {
        let above = dominating_exact_constant(2f64.sqrt(), o(2.0), Side::Above);
        assert!((above - 2.0).abs() < 1e-15);
        let below = dominating_exact_constant(0.5f64.sqrt(), o(2.0), Side::Below);
        assert!((below - 2.0).abs() < 1e-15);
        for s in [1.0, 1.7, 3.0] {
            assert_eq!(dominating_exact_constant(1.0, o(s), Side::Above), (1.0 - s / 2.0).exp2());
        }
    }

    #[test]
    fn pmetric_examples() {
        assert!((pmetric_constant(1.5, o(2.0)).unwrap() - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
        assert_eq!(pmetric_constant(2.0, o(2.0)), Some(1.0));
        assert_eq!(pmetric_constant(2.0, o(2.1)), None);
        assert_eq!(pmetric_constant(f64::INFINITY, o(3.0)), Some(2.0));
        assert_eq!(pmetric_constant(1.0, o(1.0)), Some(2.0));
        assert_eq!(pmetric_constant(1.5, o(3.0)), Some(1.0));
        assert_eq!(pmetric_constant(3.0, o(1.5)), pmetric_constant(1.5, o(1.5)));
        assert_eq!(pmetric_constant(3.0, o(3.5)), None);
    }

    #[test]
    fn clarkson_lift_examples() {
        let cfg = AuditConfig::default().with_samples(400);
        let abs: Component = Arc::new(zoo::make_euclidean(1).unwrap());
        assert_eq!(check_clarkson_lift(&replicate(abs, 2), 1.5, &cfg).unwrap().status, Status::Pass);
        let e2: Component = Arc::new(zoo::make_euclidean(2).unwrap());
        assert_eq!(check_clarkson_lift(&replicate(e2.clone(), 2), 1.5, &cfg).unwrap().status, Status::Pass);
        let nps: Component = Arc::new(zoo::make_norm_plus_square(2).unwrap());
        let comps = vec![nps, e2];
        assert_eq!(check_clarkson_lift(&comps, 2.0, &cfg).unwrap().status, Status::Skipped);
        let product = make_product(comps, make_psi_p(2, 2.0).unwrap()).unwrap();
        let direct = check_clarkson(&product, 2.0, 2.0, &cfg).unwrap();
        assert_eq!(direct.status, Status::Fail);
        assert!(direct.witness.unwrap().replay(&product).unwrap().violates(cfg.tolerance));
        assert!(check_clarkson_lift(&comps_abs(), 2.5, &cfg).is_err());
    }

    fn comps_abs() -> Vec<Component> {
        replicate(Arc::new(zoo::make_euclidean(1).unwrap()), 2)
    }

    #[test]
    fn power_mean_examples() {
        use PowerMeanVariant::*;
        assert!(power_mean_oracle(0.5, I, &[1.0, 1.0], None).unwrap());
        assert!(power_mean_oracle(2.0, II, &[1.0, 1.0], None).unwrap());
        assert!(power_mean_oracle(0.5, III, &[1.0, 0.0], Some(&[0.0, 1.0])).unwrap());
        assert!(power_mean_oracle(2.0, I, &[1.0], None).is_err());
        assert!(power_mean_oracle(0.5, II, &[1.0], None).is_err());
        assert!(power_mean_oracle(0.5, III, &[1.0], None).is_err());
        assert!(power_mean_oracle(0.5, I, &[-1.0], None).is_err());
    }

    #[test]
    fn membership_gate_on_min_max() {
        let sq = named_psi("squares", 2).unwrap();
        assert!(min_max_ratio(&sq, &make_psi_p(2, 2.0).unwrap(), 10, 0).is_err());
    }
}
