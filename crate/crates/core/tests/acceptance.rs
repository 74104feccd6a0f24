//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use rand::Rng;

use njc_core::estimator::{estimate, witness_sequence_bound, SearchConfig};
use njc_core::product::{
    dominating_exact_constant, make_product, make_psi_p, min_max_ratio, pmetric_constant, power_mean_oracle,
    transfer_bounds, Component, PowerMeanVariant, Side,
};
use njc_core::properties::{
    audit, check_clarkson, check_inner_product_axioms, check_reverse_clarkson, normability_verdict,
    recovered_inner_product, AuditConfig, Normability, Status, Tolerance,
};
use njc_core::qspace::{
    hamel_witness_generator, make_hamel_additive_metric, make_rational_euclidean_metric, rational_parallelogram_exact,
    BasisDecl, QVector, Rational,
};
use njc_core::zoo::{self, ZooSpace};
use njc_core::{child_rng, gauge_ratio, Error, MetricSpace, Order, Vector};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

const SEED: u64 = 20240611;
const SCALES: [f64; 3] = [0.01, 1.0, 100.0];

fn o(s: f64) -> Order {
    Order::new(s).unwrap()
}

fn cfg() -> SearchConfig {
    SearchConfig::default().with_seed(SEED)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

/// Largest ratio over `count` sampled pairs cycling through three scales.
fn sampled_max<S: MetricSpace + ?Sized>(space: &S, sigma: Order, count: usize, seed: u64) -> Result<f64, String> {
    let mut best = f64::NEG_INFINITY;
    for i in 0..count {
        let mut rng = child_rng(seed, i as u64);
        let scale = SCALES[i % SCALES.len()];
        let (x, y) = (space.sample(&mut rng, scale), space.sample(&mut rng, scale));
        match gauge_ratio(space, sigma, &x, &y) {
            Ok(g) => best = best.max(g),
            Err(Error::DegeneratePair(_)) => {}
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(best)
}

fn truncated() -> Outcome {
    let space = zoo::make_truncated(2, 1.0).map_err(err)?;
    for s in [1.0, 1.5, 2.0] {
        let exact = o(s).universal_lower();
        let e = estimate(&space, o(s), &cfg()).map_err(err)?;
        ensure(e.value >= exact - 1e-3 && e.value <= exact + 1e-6, || {
            format!("sigma {s}: estimate {} outside [{exact} - 1e-3, {exact} + 1e-6]", e.value)
        })?;
        ensure(e.witness.y.is_zero() || e.witness.x.is_zero(), || {
            format!("sigma {s}: witness {:?} is not of the form (x, 0)", e.witness)
        })?;
    }
    Ok(())
}

fn fifth_root() -> Outcome {
    let space = zoo::make_fractional_power(2, 0.2).map_err(err)?;
    let sigma = o(4.0);
    let e = estimate(&space, sigma, &cfg()).map_err(err)?;
    ensure((e.value - 0.25).abs() <= 1e-3, || format!("estimate {} not within 1e-3 of 0.25", e.value))?;
    let worst = sampled_max(&space, sigma, 100_000, SEED)?;
    ensure(worst <= 0.25 + 1e-9, || format!("sampled ratio {worst} exceeds 0.25 + 1e-9"))
}

fn norm_plus_square() -> Outcome {
    let space = zoo::make_norm_plus_square(2).map_err(err)?;
    let sigma = o(2.0);
    let e1 = Vector::unit(2, 0);
    let g = gauge_ratio(&space, sigma, &e1, &e1).map_err(err)?;
    ensure(g == 2.25, || format!("witness (e, e) gives {g}, expected exactly 2.25"))?;
    let est = estimate(&space, sigma, &cfg()).map_err(err)?;
    ensure(est.value >= 2.25, || format!("estimate {} below 2.25", est.value))
}

fn asymmetric_sum() -> Outcome {
    let space = zoo::make_asymmetric_sum(2, &Vector::unit(2, 0)).map_err(err)?;
    let sigma = o(1.0);
    let seq = witness_sequence_bound(&space, sigma, 1000, |k| space.asymmetric_witness(k)).map_err(err)?;
    let gamma = seq.last().ok_or("empty sequence")?;
    ensure(gamma >= 3.49, || format!("gamma_1000 = {gamma} < 3.49"))?;
    let e = estimate(&space, sigma, &cfg()).map_err(err)?;
    ensure(e.value > 2.0, || format!("estimate {} is not above 2", e.value))?;
    ensure(e.bracket.hi.is_none(), || format!("upper bracket {:?} applied to a non-even gauge", e.bracket.hi))?;
    let report = audit(&space, &cfg().audit_config()).map_err(err)?;
    ensure(report.status("even") == Some(Status::Fail), || "evenness did not fail".into())
}

fn hamel_additive() -> Outcome {
    let basis = BasisDecl::sqrt2();
    let space = make_hamel_additive_metric(basis.clone());
    let tight = AuditConfig::default().with_seed(SEED).with_tolerance(Tolerance { relative: 1e-12, absolute: 1e-12 });
    let report = audit(&space, &tight).map_err(err)?;
    for name in ["subadditive", "even"] {
        ensure(report.status(name) == Some(Status::Pass), || format!("{name} is {:?}", report.status(name)))?;
    }
    let q_hom = space.check_rational_homogeneity(2000, SEED);
    ensure(q_hom.passed(), || format!("rational homogeneity: {q_hom:?}"))?;
    let verdict = normability_verdict(&report);
    ensure(verdict.verdict == Normability::NonNormable, || format!("verdict {:?}", verdict.verdict))?;
    let w = verdict.witness.as_ref().ok_or("no normability witness")?;
    ensure(w.scalars.iter().any(|l| (l.abs() - std::f64::consts::SQRT_2).abs() < 1e-12), || {
        format!("normability witness scalars {:?} do not use sqrt 2", w.scalars)
    })?;
    let sigma = o(2.0);
    let seq = witness_sequence_bound(&space, sigma, 1000, |k| hamel_witness_generator(&basis, k)).map_err(err)?;
    let gamma = seq.last().ok_or("empty sequence")?;
    ensure(gamma >= 1.99, || format!("gamma_1000 = {gamma} < 1.99"))?;
    let worst = sampled_max(&space, sigma, 100_000, SEED)?;
    ensure(worst <= 2.0 + 1e-9, || format!("sampled ratio {worst} exceeds 2 + 1e-9"))?;
    let e = estimate(&space, sigma, &cfg()).map_err(err)?;
    ensure(e.value <= 2.0 + 1e-9, || format!("estimate {} exceeds 2 + 1e-9", e.value))
}

fn random_rational(rng: &mut impl Rng) -> Rational {
    let n: i64 = rng.random_range(-1000..=1000);
    let d: i64 = rng.random_range(1..=1000);
    Rational::new(n.into(), d.into())
}

fn rational_euclidean() -> Outcome {
    let basis = BasisDecl::sqrt2_sqrt3();
    let labels: Vec<String> = basis.labels().map(str::to_string).collect();
    ensure(labels.len() == 3, || format!("expected 3 labels, got {labels:?}"))?;
    let mut rng = child_rng(SEED, 6);
    for i in 0..10_000 {
        let mut draw = || QVector::from_terms(labels.iter().map(|l| (l.as_str(), random_rational(&mut rng))));
        let (x, y) = (draw(), draw());
        ensure(rational_parallelogram_exact(&x, &y), || format!("pair {i} breaks the parallelogram law"))?;
    }
    let space = make_rational_euclidean_metric(basis);
    let e = estimate(&space, o(2.0), &cfg()).map_err(err)?;
    ensure((e.value - 1.0).abs() <= 1e-6, || format!("estimate {} not within 1e-6 of 1", e.value))
}

fn p_metrics() -> Outcome {
    let cases = [
        (1.0, 2.0),
        (1.5, 2.0),
        (1.5, 1.5),
        (1.5, 3.0),
        (2.0, 2.0),
        (3.0, 2.0),
        (3.0, 1.5),
        (3.0, 3.0),
        (f64::INFINITY, 2.0),
    ];
    let mut found = Vec::new();
    for (p, s) in cases {
        let space = zoo::make_norm_induced(2, p).map_err(err)?;
        let exact = pmetric_constant(p, o(s)).ok_or_else(|| format!("no constant for p={p}, sigma={s}"))?;
        let e = estimate(&space, o(s), &cfg()).map_err(err)?;
        ensure((e.value - exact).abs() <= 1e-2, || format!("p={p}, sigma={s}: {} vs {exact}", e.value))?;
        found.push(((p, s), e.value));
    }
    let at = |p: f64, s: f64| found.iter().find(|(k, _)| *k == (p, s)).map(|(_, v)| *v).unwrap();
    for s in [1.5, 2.0, 3.0] {
        let (a, b) = (at(1.5, s), at(3.0, s));
        ensure((a - b).abs() <= 1e-2, || format!("conjugate exponents disagree at sigma={s}: {a} vs {b}"))?;
    }
    ensure((at(2.0, 2.0) - 1.0).abs() <= 1e-2, || "p=2 is not 1".into())
}

fn transfer() -> Outcome {
    let sigma = o(2.0);
    let psi1 = make_psi_p(2, 1.0).map_err(err)?;
    let psi2 = make_psi_p(2, 2.0).map_err(err)?;
    let psi_inf = make_psi_p(2, f64::INFINITY).map_err(err)?;
    let mm = min_max_ratio(&psi1, &psi2, 200, 200).map_err(err)?;
    ensure((mm.min - 1.0).abs() <= 1e-3 && (mm.max - std::f64::consts::SQRT_2).abs() <= 1e-3, || {
        format!("min/max ratio ({}, {}) not (1, sqrt 2)", mm.min, mm.max)
    })?;
    let (lo, hi) = transfer_bounds(1.0, mm.min, mm.max, sigma).map_err(err)?;
    ensure((lo - 0.5).abs() <= 1e-3 && (hi - 2.0).abs() <= 1e-3, || format!("transfer bounds [{lo}, {hi}]"))?;
    let line: Component = Arc::new(zoo::make_euclidean(1).map_err(err)?);
    let product = make_product(vec![Arc::clone(&line), line], psi1).map_err(err)?;
    let e = estimate(&product, sigma, &cfg()).map_err(err)?;
    ensure((e.value - 2.0).abs() <= 1e-2, || format!("product estimate {} not 2", e.value))?;
    ensure(e.value >= lo - 1e-9 && e.value <= hi + 1e-9, || format!("{} outside [{lo}, {hi}]", e.value))?;
    let below = min_max_ratio(&psi_inf, &psi2, 200, 200).map_err(err)?;
    let dom = dominating_exact_constant(below.min, sigma, Side::Below);
    ensure((dom - 2.0).abs() <= 1e-2, || format!("dominating constant {dom} not 2"))
}

fn property_oracles() -> Outcome {
    use PowerMeanVariant::*;
    let alphas = [0.2, 0.5, 1.0, 2.0, 4.0];
    let mut rng = child_rng(SEED, 9);
    for variant in [I, II, III] {
        let applies = |a: f64| if variant == II { a >= 1.0 } else { a <= 1.0 };
        for &alpha in alphas.iter().filter(|a| applies(**a)) {
            for n in [2, 3, 5] {
                for _ in 0..10_000 {
                    let mut tuple = || {
                        (0..n).map(|_| rng.random::<f64>() * 10f64.powi(rng.random_range(-3..=3))).collect::<Vec<f64>>()
                    };
                    let a = tuple();
                    let b = tuple();
                    let ok =
                        power_mean_oracle(alpha, variant, &a, (variant == III).then_some(b.as_slice())).map_err(err)?;
                    ensure(ok, || format!("{variant:?} fails at alpha={alpha}: a={a:?} b={b:?}"))?;
                }
            }
        }
    }
    let line = zoo::make_euclidean(1).map_err(err)?;
    let shared = AuditConfig::default().with_seed(SEED);
    for (a, b) in [(1.5, 3.0), (2.0, 2.0)] {
        let c = check_clarkson(&line, a, b, &shared).map_err(err)?;
        let r = check_reverse_clarkson(&line, a, b, &shared).map_err(err)?;
        ensure(c.passed() && r.passed(), || format!("({a}, {b}): Clarkson {:?}, reverse {:?}", c.status, r.status))?;
    }
    Ok(())
}

fn polarization() -> Outcome {
    let space = zoo::make_euclidean(3).map_err(err)?;
    for i in 0..10_000u64 {
        let mut rng = child_rng(SEED, i);
        let (x, y) = (space.sample(&mut rng, 1.0), space.sample(&mut rng, 1.0));
        let ip = recovered_inner_product(&space, &x, &y).map_err(err)?;
        ensure((ip - x.dot(&y)).abs() <= 1e-12, || format!("pair {i}: recovered {ip}, dot {}", x.dot(&y)))?;
    }
    let tol = Tolerance { relative: 1e-9, absolute: 1e-9 };
    let r =
        check_inner_product_axioms(&space, &AuditConfig::default().with_seed(SEED).with_tolerance(tol)).map_err(err)?;
    ensure(r.passed(), || format!("inner-product axioms: {r:?}"))
}

fn zoo_sweep() -> Result<Vec<ZooSpace>, String> {
    [
        zoo::make_euclidean(2),
        zoo::make_norm_induced(2, 1.0),
        zoo::make_norm_induced(2, 1.5),
        zoo::make_norm_induced(2, 3.0),
        zoo::make_norm_induced(2, f64::INFINITY),
        zoo::make_truncated(2, 1.0),
        zoo::make_fractional_power(2, 0.2),
        zoo::make_fractional_power(2, 0.5),
        zoo::make_norm_plus_square(2),
        zoo::make_asymmetric_sum(2, &Vector::unit(2, 0)),
    ]
    .into_iter()
    .map(|r| r.map_err(err))
    .collect()
}

fn universal_bracket() -> Outcome {
    for space in zoo_sweep()? {
        let report = audit(&space, &cfg().audit_config()).map_err(err)?;
        let upper = report.status("subadditive") == Some(Status::Pass) && report.status("even") == Some(Status::Pass);
        for s in [1.0, 1.5, 2.0, 3.0, 4.0] {
            let sigma = o(s);
            let e = estimate(&space, sigma, &cfg()).map_err(err)?;
            let lo = sigma.universal_lower();
            ensure(e.value >= lo - 1e-9, || format!("{} sigma={s}: {} below {lo}", space.id(), e.value))?;
            if upper {
                ensure(e.value <= 2.0 + 1e-9, || format!("{} sigma={s}: {} above 2", space.id(), e.value))?;
            }
            ensure(e.bracket.contains(e.value, 1e-9), || {
                format!("{} sigma={s}: {} outside {:?}", space.id(), e.value, e.bracket)
            })?;
        }
    }
    let mut runs = Vec::new();
    for _ in 0..2 {
        let space = zoo::make_truncated(2, 1.0).map_err(err)?;
        let mut text = String::new();
        for s in [1.0, 1.5, 2.0] {
            let e = estimate(&space, o(s), &cfg()).map_err(err)?;
            text += &serde_json::to_string(&e).map_err(|e| e.to_string())?;
        }
        let hamel = make_hamel_additive_metric(BasisDecl::sqrt2());
        text += &serde_json::to_string(&estimate(&hamel, o(2.0), &cfg()).map_err(err)?).map_err(|e| e.to_string())?;
        text +=
            &serde_json::to_string(&audit(&hamel, &cfg().audit_config()).map_err(err)?).map_err(|e| e.to_string())?;
        runs.push(text);
    }
    ensure(runs[0] == runs[1], || "repeated runs with the same seed differ".into())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("truncated metric constant 2^(2-sigma) with witness (x, 0)", truncated),
        ("fifth-root metric constant 1/4 at sigma = 4", fifth_root),
        ("norm-plus-square witness (e, e) gives 2.25", norm_plus_square),
        ("asymmetric-sum sequence reaches 3.49 with no upper bracket", asymmetric_sum),
        ("Hamel-additive metric profile and constant 2", hamel_additive),
        ("rational-Euclidean parallelogram law and constant 1", rational_euclidean),
        ("p-metric constants and conjugate symmetry", p_metrics),
        ("transfer bounds and dominating constant", transfer),
        ("power-mean oracles and Clarkson agreement", property_oracles),
        ("polarization recovers the dot product", polarization),
        ("universal bracket over the zoo and determinism", universal_bracket),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("criterion {:>2}: PASS  {name} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
