//! The `audit`, `estimate` and `product` commands.

use serde::Serialize;
use serde_json::{json, Value};

use njc_core::estimator::{estimate, estimate_unit_sphere, ConstantEstimate, Formulation, SearchConfig};
use njc_core::product::pmetric_constant;
use njc_core::properties::{audit, equivalence_consistency, normability_verdict, AuditConfig, CheckResult, Status};
use njc_core::{MetricSpace, Order, SCHEMA};

use crate::descriptor::{build_product, build_psi, build_space, AnySpace};
use crate::output::{emit, fmt12, to_csv, to_json};
use crate::{with_space, CliError, Format, RunConfig};

pub const ESTIMATE_COLUMNS: [&str; 7] =
    ["space", "sigma", "value", "bracket_lo", "bracket_hi", "closed_form", "formulation"];
pub const AUDIT_COLUMNS: [&str; 4] = ["check", "status", "margin", "samples"];

fn core_failure(e: njc_core::Error) -> CliError {
    CliError::failure(e.to_string())
}

pub fn search_config(cfg: &RunConfig) -> SearchConfig {
    let mut s = SearchConfig::default().with_seed(cfg.seed);
    if let Some(b) = cfg.budget {
        s = s.with_budget(b);
    }
    s.audit_samples = cfg.samples;
    s
}

fn audit_config(cfg: &RunConfig) -> AuditConfig {
    AuditConfig::default().with_samples(cfg.samples).with_seed(cfg.seed)
}

fn space_from(cfg: &RunConfig) -> Result<AnySpace, CliError> {
    let metric = cfg.metric.as_deref().ok_or_else(|| CliError::config("--metric is required"))?;
    build_space(metric, cfg.basis_file.as_deref())
}

fn status_name<T: Serialize>(s: &T) -> String {
    serde_json::to_value(s).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn check_row(name: &str, c: &CheckResult) -> Vec<String> {
    vec![name.to_string(), status_name(&c.status), fmt12(c.margin), c.samples.to_string()]
}

pub fn cmd_audit(cfg: &RunConfig) -> Result<i32, CliError> {
    let space = space_from(cfg)?;
    let acfg = audit_config(cfg);
    let expected = space.expected_properties();
    let hamel_check = match &space {
        AnySpace::Hamel(h) => Some(h.check_rational_homogeneity(cfg.samples, cfg.seed)),
        _ => None,
    };
    let (id, report, equivalence) = with_space!(&space, s => {
        let report = audit(s, &acfg).map_err(core_failure)?;
        let eq = equivalence_consistency(s, &acfg).map_err(core_failure)?;
        (s.id(), report, eq)
    });
    let verdict = normability_verdict(&report);
    let mismatches = expected.as_ref().map(|e| report.mismatches(e)).unwrap_or_default();
    let mut extra = serde_json::Map::new();
    if let Some(c) = &hamel_check {
        extra.insert(
            "rational_homogeneous".into(),
            serde_json::to_value(c).map_err(|e| CliError::failure(e.to_string()))?,
        );
    }
    let text = match cfg.format {
        Format::Json => to_json(&json!({
            "schema": SCHEMA,
            "space": id,
            "report": report,
            "normability": verdict,
            "equivalence_consistency": equivalence,
            "extra_checks": extra,
            "expected_profile": expected,
            "mismatches": mismatches,
        }))?,
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = report.checks.iter().map(|(n, c)| check_row(n, c)).collect();
            rows.push(check_row("equivalence_consistency", &equivalence));
            if let Some(c) = &hamel_check {
                rows.push(check_row("rational_homogeneous", c));
            }
            rows.push(vec!["normability".into(), status_name(&verdict.verdict), String::new(), String::new()]);
            to_csv(&AUDIT_COLUMNS, &rows)?
        }
    };
    emit(&text, cfg.out.as_deref())?;
    if !mismatches.is_empty() {
        eprintln!("{id}: audited profile differs from the expected one on: {}", mismatches.join(", "));
        return Ok(1);
    }
    Ok(0)
}

/// One estimate per order.
pub fn estimates_for<S: MetricSpace + ?Sized>(
    space: &S,
    sigmas: &[Order],
    search: &SearchConfig,
    unit_sphere: bool,
) -> Result<Vec<ConstantEstimate<S::Point>>, CliError> {
    sigmas
        .iter()
        .map(|&sigma| {
            let r =
                if unit_sphere { estimate_unit_sphere(space, sigma, search) } else { estimate(space, sigma, search) };
            r.map_err(|e| CliError::failure(format!("{} at sigma = {sigma}: {e}", space.id())))
        })
        .collect()
}

pub fn estimate_row<P>(space: &str, e: &ConstantEstimate<P>) -> Vec<String> {
    vec![
        space.to_string(),
        fmt12(e.sigma.value()),
        fmt12(e.value),
        fmt12(e.bracket.lo),
        e.bracket.hi.map(fmt12).unwrap_or_else(|| "inf".into()),
        e.closed_form.as_ref().map(|c| fmt12(c.value)).unwrap_or_default(),
        match e.formulation {
            Formulation::Full => "FULL".into(),
            Formulation::UnitSphere => "UNIT_SPHERE".into(),
        },
    ]
}

fn estimate_output<S: MetricSpace + ?Sized>(
    space: &S,
    cfg: &RunConfig,
    header: serde_json::Map<String, Value>,
) -> Result<(String, usize), CliError> {
    let estimates = estimates_for(space, &cfg.sigma, &search_config(cfg), cfg.unit_sphere)?;
    let over = estimates.iter().filter(|e| e.exceeds_bracket()).count();
    let text = match cfg.format {
        Format::Json => {
            let mut v = header;
            v.insert(
                "estimates".into(),
                serde_json::to_value(&estimates).map_err(|e| CliError::failure(e.to_string()))?,
            );
            to_json(&Value::Object(v))?
        }
        Format::Csv => {
            let id = space.id();
            to_csv(&ESTIMATE_COLUMNS, &estimates.iter().map(|e| estimate_row(&id, e)).collect::<Vec<_>>())?
        }
    };
    Ok((text, over))
}

fn header(id: String) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema".into(), SCHEMA.into());
    m.insert("space".into(), id.into());
    m
}

fn finish(text: String, over: usize, cfg: &RunConfig) -> Result<i32, CliError> {
    emit(&text, cfg.out.as_deref())?;
    if over > 0 {
        eprintln!("{over} estimate(s) exceed their upper bracket");
        return Ok(1);
    }
    Ok(0)
}

pub fn cmd_estimate(cfg: &RunConfig) -> Result<i32, CliError> {
    let space = space_from(cfg)?;
    let (text, over) = with_space!(&space, s => estimate_output(s, cfg, header(s.id()))?);
    finish(text, over, cfg)
}

pub fn cmd_product(cfg: &RunConfig) -> Result<i32, CliError> {
    let desc = cfg.product.as_ref().ok_or_else(|| CliError::config("product needs --component and --psi"))?;
    if desc.components.len() < 2 {
        return Err(CliError::config("--component: a product needs at least two components"));
    }
    let psi = build_psi(&desc.psi, desc.components.len())?;
    let membership = serde_json::to_value(psi.membership()).map_err(|e| CliError::failure(e.to_string()))?;
    if psi.membership().status != Status::Pass {
        let text = to_json(&json!({"schema": SCHEMA, "psi": psi.kind().to_string(), "membership": membership}))?;
        emit(&text, cfg.out.as_deref())?;
        eprintln!("{}: fails the simplex-function membership audit", psi.kind());
        return Ok(1);
    }
    let space = build_product(&desc.components, &psi)?;
    let mut h = header(space.id());
    h.insert("psi".into(), psi.kind().to_string().into());
    h.insert("membership".into(), membership);
    let closed: Vec<Value> = match psi.p() {
        Some(p) => cfg.sigma.iter().map(|&s| json!({"sigma": s, "pmetric_constant": pmetric_constant(p, s)})).collect(),
        None => Vec::new(),
    };
    h.insert("pmetric_constants".into(), closed.into());
    if cfg.sigma.is_empty() {
        let text = match cfg.format {
            Format::Json => to_json(&Value::Object(h))?,
            Format::Csv => to_csv(&ESTIMATE_COLUMNS, &[])?,
        };
        return finish(text, 0, cfg);
    }
    let (text, over) = estimate_output(&space, cfg, h)?;
    finish(text, over, cfg)
}
