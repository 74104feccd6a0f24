//! Multi-start search for the supremum of the ratio `G`.
//!
//! The result is a certified lower bound: the best pair found is returned as
//! a witness whose ratio can be recomputed, together with the bracket implied
//! by the audited properties and any registered closed form.

mod closed_form;
mod sequence;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use closed_form::{closed_form_lookup, ClosedForm, SpaceKind};
pub use sequence::{witness_sequence_bound, SequenceReport};

use crate::error::{Error, Result};
use crate::metric::{child_rng, gauge_unchecked, MetricSpace, Order};
use crate::properties::{audit_bounds, check_metric_axioms, AuditConfig, PropertyReport, Status};
use crate::ratio::{denominator_floor, param_ratio_unchecked, ratio_unchecked, theorem_bounds, Bracket, RatioSample};

/// Tolerance used when comparing an estimate with a bracket end.
pub const ESTIMATOR_TOLERANCE: f64 = 1e-6;

/// Relative gain a candidate needs to replace the incumbent. Ties keep the
/// earlier pair, so deterministic seed pairs survive against rounding noise.
const IMPROVEMENT: f64 = 1e-12;

/// Refinement streams are offset from sampling streams by this index.
const REFINE_STREAM: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub restarts: usize,
    pub samples_per_restart: usize,
    pub refine_steps: usize,
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.restarts, self.samples_per_restart, self.refine_steps)
    }
}

impl FromStr for Budget {
    type Err = Error;

    /// Parses `RESTARTSxSAMPLESxSTEPS`, e.g. `32x4096x200`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(['x', 'X']).collect();
        let bad = || Error::Parse(format!("budget must look like 32x4096x200, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let n = |i: usize| parts[i].trim().parse::<usize>().map_err(|_| bad());
        Ok(Budget { restarts: n(0)?, samples_per_restart: n(1)?, refine_steps: n(2)? })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub seed: u64,
    pub restarts: usize,
    pub samples_per_restart: usize,
    pub refine_steps: usize,
    pub scales: Vec<f64>,
    pub step_decay: f64,
    /// Samples used by the property audits that set the bracket.
    pub audit_samples: usize,
    /// Refuse to estimate when the metric axioms fail.
    pub check_axioms: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 0,
            restarts: 32,
            samples_per_restart: 4096,
            refine_steps: 200,
            scales: vec![0.01, 1.0, 100.0],
            step_decay: 0.9,
            audit_samples: 1000,
            check_axioms: true,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.restarts = budget.restarts;
        self.samples_per_restart = budget.samples_per_restart;
        self.refine_steps = budget.refine_steps;
        self
    }

    pub fn budget(&self) -> Budget {
        Budget {
            restarts: self.restarts,
            samples_per_restart: self.samples_per_restart,
            refine_steps: self.refine_steps,
        }
    }

    pub fn audit_config(&self) -> AuditConfig {
        AuditConfig {
            samples: self.audit_samples,
            seed: self.seed,
            scales: self.scales.clone(),
            ..AuditConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.samples_per_restart == 0 {
            return Err(Error::contract("restarts and samples_per_restart must be at least 1"));
        }
        if self.scales.is_empty() || self.scales.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::contract("scales must be a nonempty list of positive reals"));
        }
        if !(self.step_decay > 0.0 && self.step_decay < 1.0) {
            return Err(Error::contract(format!("step_decay must lie in (0, 1), got {}", self.step_decay)));
        }
        if self.audit_samples == 0 {
            return Err(Error::contract("audit_samples must be at least 1"));
        }
        Ok(())
    }

    fn min_scale(&self) -> f64 {
        self.scales.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Formulation {
    Full,
    UnitSphere,
}

/// Lower-bound certificate plus bracket.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate<P> {
    pub sigma: Order,
    pub value: f64,
    pub witness: RatioSample<P>,
    pub bracket: Bracket,
    pub formulation: Formulation,
    pub closed_form: Option<ClosedForm>,
    pub budget: Budget,
    pub seed: u64,
    pub label: String,
}

impl<P> ConstantEstimate<P> {
    /// True when the value exceeds a finite upper bracket end by more than the tolerance.
    pub fn exceeds_bracket(&self) -> bool {
        self.bracket.hi.is_some_and(|hi| self.value > hi + ESTIMATOR_TOLERANCE)
    }
}

struct Candidate<P> {
    x: P,
    y: P,
    value: f64,
}

fn improves(value: f64, incumbent: Option<f64>) -> bool {
    match incumbent {
        None => true,
        Some(b) => value > b + IMPROVEMENT * b.abs(),
    }
}

fn keep<P>(best: &mut Option<Candidate<P>>, c: Candidate<P>) -> bool {
    if improves(c.value, best.as_ref().map(|b| b.value)) {
        *best = Some(c);
        true
    } else {
        false
    }
}

/// Ratio evaluation with the optional duality companion `(x+y, x−y)`.
struct FullObjective<'a, S: MetricSpace + ?Sized> {
    space: &'a S,
    sigma: Order,
    floor: f64,
    dual: bool,
}

impl<S: MetricSpace + ?Sized> FullObjective<'_, S> {
    fn best_of(&self, x: S::Point, y: S::Point) -> Option<Candidate<S::Point>> {
        let mut best = None;
        if self.dual {
            let (u, v) = (self.space.add(&x, &y), self.space.sub(&x, &y));
            if let Some(value) = ratio_unchecked(self.space, self.sigma, &x, &y, self.floor) {
                best = Some(Candidate { x, y, value });
            }
            if let Some(value) = ratio_unchecked(self.space, self.sigma, &u, &v, self.floor) {
                keep(&mut best, Candidate { x: u, y: v, value });
            }
        } else if let Some(value) = ratio_unchecked(self.space, self.sigma, &x, &y, self.floor) {
            best = Some(Candidate { x, y, value });
        }
        best
    }

    fn offer(&self, best: &mut Option<Candidate<S::Point>>, x: S::Point, y: S::Point) -> bool {
        match self.best_of(x, y) {
            Some(c) => keep(best, c),
            None => false,
        }
    }
}

fn pick_scale(rng: &mut ChaCha8Rng, scales: &[f64]) -> f64 {
    scales[rng.random_range(0..scales.len())]
}

fn initial_step(coords: &[f64]) -> f64 {
    let m = coords.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if m > 0.0 {
        0.1 * m
    } else {
        0.1
    }
}

fn full_restart<S: MetricSpace + ?Sized>(
    obj: &FullObjective<'_, S>,
    cfg: &SearchConfig,
    r: usize,
) -> Option<Candidate<S::Point>> {
    let space = obj.space;
    let mut rng = child_rng(cfg.seed, r as u64);
    let mut best = None;
    for _ in 0..cfg.samples_per_restart {
        let (sx, sy) = (pick_scale(&mut rng, &cfg.scales), pick_scale(&mut rng, &cfg.scales));
        let x = space.sample(&mut rng, sx);
        let y = space.sample(&mut rng, sy);
        obj.offer(&mut best, x, y);
    }
    let mut cur = best?;
    let mut rng = child_rng(cfg.seed, REFINE_STREAM + r as u64);
    let mut step = {
        let mut c = space.coords(&cur.x);
        c.extend(space.coords(&cur.y));
        initial_step(&c)
    };
    for _ in 0..cfg.refine_steps {
        for side in 0..2 {
            let n = space.coords(if side == 0 { &cur.x } else { &cur.y }).len();
            for coord in 0..n {
                let delta = step * rng.sample::<f64, _>(StandardNormal);
                let (x, y) = if side == 0 {
                    (space.perturb(&cur.x, coord, delta), cur.y.clone())
                } else {
                    (cur.x.clone(), space.perturb(&cur.y, coord, delta))
                };
                let mut slot = Some(cur);
                obj.offer(&mut slot, x, y);
                cur = slot.expect("incumbent is never removed");
            }
        }
        step *= cfg.step_decay;
    }
    Some(cur)
}

fn audit_for<S: MetricSpace + ?Sized>(space: &S, cfg: &SearchConfig) -> Result<PropertyReport> {
    cfg.validate()?;
    let audit_cfg = cfg.audit_config();
    if cfg.check_axioms {
        let axioms = check_metric_axioms(space, &audit_cfg)?;
        if !axioms.passed() {
            let detail =
                axioms.witness.map(|w| format!("{:?}: lhs={} rhs={}", w.relation, w.lhs, w.rhs)).unwrap_or_default();
            return Err(Error::NotAMetric(format!("{} fails the metric axioms ({detail})", space.id())));
        }
    }
    audit_bounds(space, &audit_cfg)
}

/// Maximizes `G` over random multi-scale pairs with hill-climbing refinement.
/// Audits the metric axioms and the bracket properties first.
pub fn estimate<S: MetricSpace + ?Sized>(
    space: &S,
    sigma: Order,
    cfg: &SearchConfig,
) -> Result<ConstantEstimate<S::Point>> {
    let report = audit_for(space, cfg)?;
    estimate_with_report(space, sigma, cfg, &report)
}

/// As [`estimate`], reusing an existing property report for the bracket.
pub fn estimate_with_report<S: MetricSpace + ?Sized>(
    space: &S,
    sigma: Order,
    cfg: &SearchConfig,
    report: &PropertyReport,
) -> Result<ConstantEstimate<S::Point>> {
    cfg.validate()?;
    let obj = FullObjective {
        space,
        sigma,
        floor: denominator_floor(sigma, cfg.min_scale()),
        dual: report.status("two_homogeneous") == Some(Status::Pass),
    };
    let mut best = None;
    for (x, y) in space.seed_pairs() {
        obj.offer(&mut best, x, y);
    }
    let restarts: Vec<_> = (0..cfg.restarts).into_par_iter().map(|r| full_restart(&obj, cfg, r)).collect();
    for c in restarts.into_iter().flatten() {
        keep(&mut best, c);
    }
    let best = best.ok_or_else(|| Error::EstimationFailed("every sampled pair was degenerate".into()))?;
    finish(space, sigma, cfg, report, best.x, best.y, Formulation::Full)
}

fn finish<S: MetricSpace + ?Sized>(
    space: &S,
    sigma: Order,
    cfg: &SearchConfig,
    report: &PropertyReport,
    x: S::Point,
    y: S::Point,
    formulation: Formulation,
) -> Result<ConstantEstimate<S::Point>> {
    let value = ratio_unchecked(space, sigma, &x, &y, 0.0)
        .ok_or_else(|| Error::EstimationFailed("best pair is degenerate".into()))?;
    Ok(ConstantEstimate {
        sigma,
        value,
        witness: RatioSample { x, y, value },
        bracket: theorem_bounds(report, sigma),
        formulation,
        closed_form: closed_form_lookup(&space.space_kind(), sigma).ok(),
        budget: cfg.budget(),
        seed: cfg.seed,
        label: "lower-bound certificate + bracket".into(),
    })
}

/// Unit-sphere point and parameter for `H(u, v, t)`.
struct SphereCandidate<P> {
    u: P,
    v: P,
    t: f64,
    value: f64,
}

struct SphereObjective<'a, S: MetricSpace + ?Sized> {
    space: &'a S,
    sigma: Order,
}

impl<S: MetricSpace + ?Sized> SphereObjective<'_, S> {
    fn normalize(&self, x: &S::Point) -> Option<S::Point> {
        let f = gauge_unchecked(self.space, x);
        (f > 1e-300 && f.is_finite()).then(|| self.space.scale(x, 1.0 / f))
    }

    fn offer(&self, best: &mut Option<SphereCandidate<S::Point>>, x: &S::Point, y: &S::Point, t: f64) -> bool {
        let (Some(u), Some(v)) = (self.normalize(x), self.normalize(y)) else {
            return false;
        };
        let t = t.clamp(0.0, 1.0);
        let value = param_ratio_unchecked(self.space, self.sigma, &u, &v, t);
        if !value.is_finite() {
            return false;
        }
        if improves(value, best.as_ref().map(|b| b.value)) {
            *best = Some(SphereCandidate { u, v, t, value });
            true
        } else {
            false
        }
    }
}

fn sphere_restart<S: MetricSpace + ?Sized>(
    obj: &SphereObjective<'_, S>,
    cfg: &SearchConfig,
    r: usize,
) -> Option<SphereCandidate<S::Point>> {
    let space = obj.space;
    let mut rng = child_rng(cfg.seed, r as u64);
    let mut best = None;
    for _ in 0..cfg.samples_per_restart {
        let (sx, sy) = (pick_scale(&mut rng, &cfg.scales), pick_scale(&mut rng, &cfg.scales));
        let x = space.sample(&mut rng, sx);
        let y = space.sample(&mut rng, sy);
        let t = rng.random::<f64>();
        obj.offer(&mut best, &x, &y, t);
    }
    let mut cur = best?;
    let mut rng = child_rng(cfg.seed, REFINE_STREAM + r as u64);
    let mut step = {
        let mut c = space.coords(&cur.u);
        c.extend(space.coords(&cur.v));
        initial_step(&c)
    };
    for _ in 0..cfg.refine_steps {
        for side in 0..2 {
            let n = space.coords(if side == 0 { &cur.u } else { &cur.v }).len();
            for coord in 0..n {
                let delta = step * rng.sample::<f64, _>(StandardNormal);
                let (x, y) = if side == 0 {
                    (space.perturb(&cur.u, coord, delta), cur.v.clone())
                } else {
                    (cur.u.clone(), space.perturb(&cur.v, coord, delta))
                };
                let mut slot = Some(cur);
                let t = slot.as_ref().map_or(1.0, |c| c.t);
                obj.offer(&mut slot, &x, &y, t);
                cur = slot.expect("incumbent is never removed");
            }
        }
        let dt = step * rng.sample::<f64, _>(StandardNormal);
        let mut slot = Some(cur);
        let (u, v, t) = slot.as_ref().map(|c| (c.u.clone(), c.v.clone(), c.t)).expect("incumbent");
        obj.offer(&mut slot, &u, &v, t + dt);
        cur = slot.expect("incumbent is never removed");
        step *= cfg.step_decay;
    }
    Some(cur)
}

/// Maximizes `H(u, v, t)` over `f(u) = f(v) = 1`, `t ∈ [0, 1]`. Requires an
/// absolutely homogeneous gauge. The witness is the pair `(u, t·v)`.
pub fn estimate_unit_sphere<S: MetricSpace + ?Sized>(
    space: &S,
    sigma: Order,
    cfg: &SearchConfig,
) -> Result<ConstantEstimate<S::Point>> {
    let report = audit_for(space, cfg)?;
    estimate_unit_sphere_with_report(space, sigma, cfg, &report)
}

pub fn estimate_unit_sphere_with_report<S: MetricSpace + ?Sized>(
    space: &S,
    sigma: Order,
    cfg: &SearchConfig,
    report: &PropertyReport,
) -> Result<ConstantEstimate<S::Point>> {
    cfg.validate()?;
    if report.status("absolutely_homogeneous") != Some(Status::Pass) {
        return Err(Error::FormulationUnavailable(format!(
            "{}: unit-sphere search needs an absolutely homogeneous gauge",
            space.id()
        )));
    }
    let obj = SphereObjective { space, sigma };
    let mut best = None;
    for (x, y) in space.seed_pairs() {
        for t in [1.0, 0.5] {
            obj.offer(&mut best, &x, &y, t);
        }
    }
    let restarts: Vec<_> = (0..cfg.restarts).into_par_iter().map(|r| sphere_restart(&obj, cfg, r)).collect();
    for c in restarts.into_iter().flatten() {
        if improves(c.value, best.as_ref().map(|b: &SphereCandidate<_>| b.value)) {
            best = Some(c);
        }
    }
    let best = best.ok_or_else(|| Error::EstimationFailed("no normalizable pair found".into()))?;
    let y = space.scale(&best.v, best.t);
    finish(space, sigma, cfg, report, best.u, y, Formulation::UnitSphere)
}
