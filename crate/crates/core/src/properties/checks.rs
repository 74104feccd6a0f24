use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::relation::{Relation, Tolerance, Witness};
use super::{CheckResult, PropertyReport, Status, PROFILE_PROPERTIES};
use crate::error::{Error, Result};
use crate::metric::{child_rng, MetricSpace, Order};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: Tolerance,
    pub scales: Vec<f64>,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig { samples: 2000, seed: 0, tolerance: Tolerance::default(), scales: vec![0.01, 1.0, 100.0] }
    }
}

impl AuditConfig {
    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tolerance(mut self, tolerance: Tolerance) -> Self {
        self.tolerance = tolerance;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::contract("samples must be at least 1"));
        }
        if self.scales.is_empty() || self.scales.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::contract("scales must be a nonempty list of positive reals"));
        }
        Ok(())
    }
}

/// Gauge properties that can be audited one at a time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Even,
    Subadditive,
    MidpointConvex,
    Convex,
    TranslationInvariant,
    PositivelyHomogeneous,
    AbsolutelyHomogeneous,
    LambdaHomogeneous(f64),
    /// `f(λx) ≤ λ f(x)` for `λ ∈ [0, 1]`.
    SubHomogeneous,
    /// `f(x/2) ≤ f(x)/2`.
    Halving,
    TwoHomogeneous,
}

impl Property {
    pub fn name(&self) -> String {
        match self {
            Property::Even => "even".into(),
            Property::Subadditive => "subadditive".into(),
            Property::MidpointConvex => "midpoint_convex".into(),
            Property::Convex => "convex".into(),
            Property::TranslationInvariant => "translation_invariant".into(),
            Property::PositivelyHomogeneous => "positively_homogeneous".into(),
            Property::AbsolutelyHomogeneous => "absolutely_homogeneous".into(),
            Property::LambdaHomogeneous(l) => format!("lambda_homogeneous({l})"),
            Property::SubHomogeneous => "sub_homogeneous".into(),
            Property::Halving => "halving".into(),
            Property::TwoHomogeneous => "two_homogeneous".into(),
        }
    }

    pub fn from_name(name: &str) -> Option<Property> {
        let p = match name {
            "even" => Property::Even,
            "subadditive" => Property::Subadditive,
            "midpoint_convex" => Property::MidpointConvex,
            "convex" => Property::Convex,
            "translation_invariant" => Property::TranslationInvariant,
            "positively_homogeneous" => Property::PositivelyHomogeneous,
            "absolutely_homogeneous" => Property::AbsolutelyHomogeneous,
            "sub_homogeneous" => Property::SubHomogeneous,
            "halving" => Property::Halving,
            "two_homogeneous" => Property::TwoHomogeneous,
            _ => {
                let inner = name.strip_prefix("lambda_homogeneous(")?.strip_suffix(')')?;
                Property::LambdaHomogeneous(inner.parse().ok()?)
            }
        };
        Some(p)
    }
}

/// One relation instance to evaluate.
pub(crate) struct Case<P> {
    relation: Relation,
    points: Vec<P>,
    scalars: Vec<f64>,
}

impl<P> Case<P> {
    pub(crate) fn new(relation: Relation, points: Vec<P>, scalars: Vec<f64>) -> Self {
        Case { relation, points, scalars }
    }
}

fn case<P>(relation: Relation, points: Vec<P>, scalars: Vec<f64>) -> Case<P> {
    Case::new(relation, points, scalars)
}

/// Random material for one sample: three points at (possibly different)
/// scales, a uniform `u ∈ [0,1)`, a uniform `lam ∈ [0,4)` and a sign.
pub(crate) struct Draw<P> {
    pub x: P,
    pub y: P,
    pub z: P,
    pub u: f64,
    pub lam: f64,
    pub negate: bool,
}

pub(crate) fn draw<S: MetricSpace + ?Sized>(space: &S, cfg: &AuditConfig, i: usize) -> Draw<S::Point> {
    let k = cfg.scales.len();
    let mut rng = child_rng(cfg.seed, i as u64);
    let x = space.sample(&mut rng, cfg.scales[i % k]);
    let y = space.sample(&mut rng, cfg.scales[(i / k) % k]);
    let z = space.sample(&mut rng, cfg.scales[(i / (k * k)) % k]);
    let u = rng.random::<f64>();
    let lam = 4.0 * rng.random::<f64>();
    let negate = rng.random::<bool>();
    Draw { x, y, z, u, lam, negate }
}

/// Deterministic probe draws: basis points at every scale, zero, paired with
/// each other, followed by the space's seed pairs.
fn probe_draws<S: MetricSpace + ?Sized>(space: &S, cfg: &AuditConfig) -> Vec<Draw<S::Point>> {
    let basis = space.basis_points();
    let mut singles = Vec::new();
    for s in std::iter::once(1.0).chain(cfg.scales.iter().copied().filter(|&s| s != 1.0)) {
        singles.extend(basis.iter().map(|b| space.scale(b, s)));
    }
    singles.push(space.zero());
    let mut out = Vec::new();
    for a in &singles {
        for b in &singles {
            out.push(Draw { x: a.clone(), y: b.clone(), z: a.clone(), u: 0.5, lam: 2.0, negate: false });
        }
    }
    for (a, b) in space.seed_pairs() {
        out.push(Draw { x: a.clone(), y: b, z: a, u: 0.5, lam: 2.0, negate: false });
    }
    out
}

/// Evaluates probes, then `cfg.samples` seeded draws in parallel. The witness
/// is the first violation in probe-then-sample order; the margin is the worst
/// over everything evaluated.
pub(crate) fn run<S, G>(space: &S, cfg: &AuditConfig, gen: G) -> CheckResult
where
    S: MetricSpace + ?Sized,
    G: Fn(&S, &Draw<S::Point>) -> Vec<Case<S::Point>> + Sync,
{
    let tol = cfg.tolerance;
    let eval = |cases: Vec<Case<S::Point>>| {
        let mut worst = f64::INFINITY;
        let mut first: Option<Witness> = None;
        for c in cases {
            let Some(cmp) = c.relation.evaluate(space, &c.points, &c.scalars) else {
                continue;
            };
            worst = worst.min(cmp.margin(tol));
            if first.is_none() && cmp.violates(tol) {
                first = Some(Witness::capture(c.relation, &c.points, &c.scalars, &cmp));
            }
        }
        (worst, first)
    };

    let mut worst = f64::INFINITY;
    let mut first = None;
    for d in probe_draws(space, cfg) {
        let (w, f) = eval(gen(space, &d));
        worst = worst.min(w);
        if first.is_none() {
            first = f;
        }
    }
    let per_sample: Vec<(f64, Option<Witness>)> =
        (0..cfg.samples).into_par_iter().map(|i| eval(gen(space, &draw(space, cfg, i)))).collect();
    for (w, f) in per_sample {
        worst = worst.min(w);
        if first.is_none() {
            first = f;
        }
    }
    if worst == f64::INFINITY {
        worst = 0.0;
    }
    match first {
        Some(w) => CheckResult::fail(w, worst, cfg.samples, cfg.seed),
        None => CheckResult::pass(worst, cfg.samples, cfg.seed),
    }
}

/// Symmetry, identity, positivity off the diagonal and the triangle inequality.
pub fn check_metric_axioms<S: MetricSpace + ?Sized>(space: &S, cfg: &AuditConfig) -> Result<CheckResult> {
    cfg.validate()?;
    Ok(run(space, cfg, |space, d| {
        let two_x = space.scale(&d.x, 2.0);
        vec![
            case(Relation::Symmetry, vec![d.x.clone(), d.y.clone()], vec![]),
            case(Relation::Identity, vec![d.x.clone()], vec![]),
            case(Relation::Positivity, vec![d.x.clone(), d.y.clone()], vec![]),
            case(Relation::Triangle, vec![d.x.clone(), d.y.clone(), d.z.clone()], vec![]),
            case(Relation::Triangle, vec![d.x.clone(), d.z.clone(), d.y.clone()], vec![]),
            case(Relation::Triangle, vec![space.zero(), d.x.clone(), two_x], vec![]),
        ]
    }))
}

/// Largest `k ≥ 0` with `s / 2^k ≤ 1`, applied to a special scaling.
fn dyadic_fraction<S: MetricSpace + ?Sized>(space: &S, s: f64, sx: &S::Point) -> (f64, S::Point) {
    let mut lambda = s;
    let mut p = sx.clone();
    while lambda > 1.0 {
        lambda *= 0.5;
        p = space.scale(&p, 0.5);
    }
    (lambda, p)
}

fn homogeneity_cases<S: MetricSpace + ?Sized>(
    space: &S,
    x: &S::Point,
    lambdas: &[f64],
    absolute: bool,
) -> Vec<Case<S::Point>> {
    let rel = Relation::Homogeneous { absolute };
    let mut out: Vec<_> = lambdas.iter().map(|&l| case(rel, vec![x.clone(), space.scale(x, l)], vec![l])).collect();
    for (s, sx) in space.special_scalings(x) {
        let neg = space.neg(&sx);
        out.push(case(rel, vec![x.clone(), sx], vec![s]));
        if absolute {
            out.push(case(rel, vec![x.clone(), neg], vec![-s]));
        }
    }
    out
}

fn property_cases<S: MetricSpace + ?Sized>(space: &S, prop: Property, d: &Draw<S::Point>) -> Vec<Case<S::Point>> {
    let (x, y, z) = (&d.x, &d.y, &d.z);
    match prop {
        Property::Even => vec![case(Relation::Even, vec![x.clone()], vec![])],
        Property::Subadditive => vec![case(Relation::Subadditive, vec![x.clone(), y.clone()], vec![])],
        Property::MidpointConvex => {
            vec![case(Relation::MidpointConvex, vec![x.clone(), y.clone()], vec![])]
        }
        Property::Convex => {
            let mut out: Vec<_> = [0.25, 0.5, 0.75, d.u]
                .into_iter()
                .map(|l| {
                    let pts = vec![x.clone(), y.clone(), space.scale(x, l), space.scale(y, l)];
                    case(Relation::Convex, pts, vec![l])
                })
                .collect();
            let sx = space.special_scalings(x);
            let sy = space.special_scalings(y);
            for ((s, px), (_, py)) in sx.into_iter().zip(sy) {
                if s <= 0.0 {
                    continue;
                }
                let (l, lx) = dyadic_fraction(space, s, &px);
                let (_, ly) = dyadic_fraction(space, s, &py);
                out.push(case(Relation::Convex, vec![x.clone(), y.clone(), lx, ly], vec![l]));
            }
            out
        }
        Property::TranslationInvariant => {
            vec![case(Relation::TranslationInvariant, vec![x.clone(), y.clone(), z.clone()], vec![])]
        }
        Property::PositivelyHomogeneous => {
            let mut out = homogeneity_cases(space, x, &[d.lam, 0.5, 2.0], false);
            out.retain(|c| c.scalars[0] >= 0.0);
            out
        }
        Property::AbsolutelyHomogeneous => {
            let l = if d.negate { -d.lam } else { d.lam };
            homogeneity_cases(space, x, &[l, 0.5, 2.0, -1.0], true)
        }
        Property::LambdaHomogeneous(l) => {
            vec![case(Relation::Homogeneous { absolute: false }, vec![x.clone(), space.scale(x, l)], vec![l])]
        }
        Property::SubHomogeneous => {
            let mut out: Vec<_> = [d.u, 0.5]
                .into_iter()
                .map(|l| case(Relation::SubHomogeneous, vec![x.clone(), space.scale(x, l)], vec![l]))
                .collect();
            for (s, sx) in space.special_scalings(x) {
                if s > 0.0 {
                    let (l, lx) = dyadic_fraction(space, s, &sx);
                    out.push(case(Relation::SubHomogeneous, vec![x.clone(), lx], vec![l]));
                }
            }
            out
        }
        Property::Halving => {
            vec![case(Relation::SubHomogeneous, vec![x.clone(), space.scale(x, 0.5)], vec![0.5])]
        }
        Property::TwoHomogeneous => [2.0, 0.5, 4.0]
            .into_iter()
            .map(|l| case(Relation::Homogeneous { absolute: false }, vec![x.clone(), space.scale(x, l)], vec![l]))
            .collect(),
    }
}

pub fn check_property<S: MetricSpace + ?Sized>(
    space: &S,
    property: Property,
    cfg: &AuditConfig,
) -> Result<CheckResult> {
    cfg.validate()?;
    if let Property::LambdaHomogeneous(l) = property {
        if !l.is_finite() {
            return Err(Error::contract("lambda must be finite"));
        }
    }
    Ok(run(space, cfg, |space, d| property_cases(space, property, d)))
}

/// `f(2x) = 2 f(x)`, with the iterates `k = −1, 2` of the same identity.
pub fn check_two_homogeneous<S: MetricSpace + ?Sized>(space: &S, cfg: &AuditConfig) -> Result<CheckResult> {
    check_property(space, Property::TwoHomogeneous, cfg)
}

/// `f^σ(x+y) + f^σ(x−y) = 2^{σ/2} (f^σ(x) + f^σ(y))`.
pub fn check_parallelogram<S: MetricSpace + ?Sized>(space: &S, sigma: Order, cfg: &AuditConfig) -> Result<CheckResult> {
    cfg.validate()?;
    let rel = Relation::Parallelogram { sigma: sigma.value() };
    Ok(run(space, cfg, |_, d| vec![case(rel, vec![d.x.clone(), d.y.clone()], vec![])]))
}

fn check_conjugate(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::contract(format!("alpha must lie in (1, 2], got {alpha}")));
    }
    let gap = (1.0 / alpha + 1.0 / beta - 1.0).abs();
    if gap.is_nan() || gap > 1e-12 {
        return Err(Error::contract(format!("1/alpha + 1/beta must equal 1, got alpha={alpha}, beta={beta}")));
    }
    Ok(())
}

/// `f^β(x+y) + f^β(x−y) ≤ 2 (f^α(x) + f^α(y))^{β/α}`.
pub fn check_clarkson<S: MetricSpace + ?Sized>(
    space: &S,
    alpha: f64,
    beta: f64,
    cfg: &AuditConfig,
) -> Result<CheckResult> {
    check_conjugate(alpha, beta)?;
    cfg.validate()?;
    let rel = Relation::Clarkson { alpha, beta };
    Ok(run(space, cfg, |_, d| vec![case(rel, vec![d.x.clone(), d.y.clone()], vec![])]))
}

/// `2 (f^β(x) + f^β(y))^{α/β} ≤ f^α(x+y) + f^α(x−y)`.
pub fn check_reverse_clarkson<S: MetricSpace + ?Sized>(
    space: &S,
    alpha: f64,
    beta: f64,
    cfg: &AuditConfig,
) -> Result<CheckResult> {
    check_conjugate(alpha, beta)?;
    cfg.validate()?;
    let rel = Relation::ReverseClarkson { alpha, beta };
    Ok(run(space, cfg, |_, d| vec![case(rel, vec![d.x.clone(), d.y.clone()], vec![])]))
}

fn profile_property(name: &str) -> Property {
    Property::from_name(name).expect("profile names are valid properties")
}

/// Metric axioms plus the full property profile.
pub fn audit<S: MetricSpace + ?Sized>(space: &S, cfg: &AuditConfig) -> Result<PropertyReport> {
    let mut report = PropertyReport::empty(space.id(), cfg.samples, cfg.seed);
    report.tolerance = cfg.tolerance;
    report.insert("metric_axioms", check_metric_axioms(space, cfg)?);
    for name in PROFILE_PROPERTIES {
        report.insert(name, check_property(space, profile_property(name), cfg)?);
    }
    Ok(report)
}

/// The properties that determine the bracket and the unit-sphere formulation.
pub fn audit_bounds<S: MetricSpace + ?Sized>(space: &S, cfg: &AuditConfig) -> Result<PropertyReport> {
    let mut report = PropertyReport::empty(space.id(), cfg.samples, cfg.seed);
    report.tolerance = cfg.tolerance;
    for name in ["even", "subadditive", "two_homogeneous", "absolutely_homogeneous"] {
        report.insert(name, check_property(space, profile_property(name), cfg)?);
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Normability {
    Normable,
    NonNormable,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormabilityVerdict {
    pub verdict: Normability,
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness_property: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
}

/// Conditions that make a translation-invariant gauge a norm. Midpoint
/// convexity and halving are excluded: with real scalars they do not force
/// homogeneity when the gauge is discontinuous along lines.
const INVARIANT_NORM_CONDITIONS: [&str; 4] =
    ["convex", "sub_homogeneous", "positively_homogeneous", "absolutely_homogeneous"];

/// NORMABLE when the gauge is midpoint convex and absolutely homogeneous, or
/// when the metric is translation invariant and one of the real-scalar
/// conditions holds. UNDECIDED when a required audit is missing or skipped.
pub fn normability_verdict(report: &PropertyReport) -> NormabilityVerdict {
    let required = ["translation_invariant", "midpoint_convex", "absolutely_homogeneous"];
    for name in required {
        match report.status(name) {
            None | Some(Status::Skipped) => {
                return NormabilityVerdict {
                    verdict: Normability::Undecided,
                    reason: format!("{name} not audited"),
                    witness_property: None,
                    witness: None,
                }
            }
            _ => {}
        }
    }
    let pass = |n: &str| report.status(n) == Some(Status::Pass);
    if pass("midpoint_convex") && pass("absolutely_homogeneous") {
        return NormabilityVerdict {
            verdict: Normability::Normable,
            reason: "midpoint convex and absolutely homogeneous".into(),
            witness_property: None,
            witness: None,
        };
    }
    if pass("translation_invariant") {
        if let Some(c) = INVARIANT_NORM_CONDITIONS.iter().find(|c| pass(c)) {
            return NormabilityVerdict {
                verdict: Normability::Normable,
                reason: format!("translation invariant and {c}"),
                witness_property: None,
                witness: None,
            };
        }
    }
    let failing = ["absolutely_homogeneous", "midpoint_convex"]
        .into_iter()
        .find(|n| report.status(n) == Some(Status::Fail))
        .expect("one of the two conditions failed");
    NormabilityVerdict {
        verdict: Normability::NonNormable,
        reason: format!("{failing} fails"),
        witness_property: Some(failing.to_string()),
        witness: report.get(failing).and_then(|c| c.witness.clone()),
    }
}

/// Agreement of the six conditions that are equivalent for translation
/// invariant metrics with continuous scalar multiplication. SKIPPED unless
/// translation invariance passes.
pub fn equivalence_consistency<S: MetricSpace + ?Sized>(space: &S, cfg: &AuditConfig) -> Result<CheckResult> {
    let ti = check_property(space, Property::TranslationInvariant, cfg)?;
    if !ti.passed() {
        return Ok(CheckResult::skipped("translation invariance not established", cfg.samples, cfg.seed));
    }
    let six = [
        Property::MidpointConvex,
        Property::Convex,
        Property::SubHomogeneous,
        Property::Halving,
        Property::PositivelyHomogeneous,
        Property::AbsolutelyHomogeneous,
    ];
    let results = six.iter().map(|p| Ok((p.name(), check_property(space, *p, cfg)?))).collect::<Result<Vec<_>>>()?;
    let summary =
        results.iter().map(|(n, r)| format!("{n}={:?}", r.status).to_uppercase()).collect::<Vec<_>>().join(", ");
    let all_same = results.iter().all(|(_, r)| r.status == results[0].1.status);
    if all_same {
        return Ok(CheckResult::pass(0.0, cfg.samples, cfg.seed).with_note(summary));
    }
    let (_, failing) =
        results.into_iter().find(|(_, r)| r.status == Status::Fail).expect("disagreement implies a failure");
    Ok(CheckResult::fail(failing.witness.expect("FAIL carries a witness"), failing.margin, cfg.samples, cfg.seed)
        .with_note(summary))
}
