//! The table of closed-form constants, recomputed from scratch.

use std::sync::Arc;

use serde::Serialize;

use njc_core::estimator::{estimate, witness_sequence_bound, SearchConfig};
use njc_core::product::{
    dominating_exact_constant, make_product, make_psi_p, min_max_ratio, pmetric_constant, transfer_bounds, Component,
    Side,
};
use njc_core::properties::audit_bounds;
use njc_core::qspace::{
    hamel_witness_generator, make_hamel_additive_metric, make_rational_euclidean_metric, BasisDecl,
};
use njc_core::zoo::{self, ZooSpace};
use njc_core::{theorem_bounds, Bracket, MetricSpace, Order, Vector, SCHEMA};

use crate::commands::search_config;
use crate::output::{emit, fmt12, to_csv, to_json};
use crate::{CliError, Format, RunConfig};

pub const REPRODUCE_COLUMNS: [&str; 8] =
    ["space", "sigma", "reference_value", "estimated_value", "abs_diff", "bracket_lo", "bracket_hi", "status"];

/// Index at which witness sequences are read off.
pub const SEQUENCE_INDEX: u64 = 1000;
const MINMAX_RESOLUTION: usize = 200;
const MINMAX_REFINE: usize = 200;

/// How an estimate is compared with its reference value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Acceptance {
    /// `reference − below ≤ estimate ≤ reference + above`.
    Within { below: f64, above: f64 },
    /// `estimate ≥ reference`.
    AtLeast,
}

impl Acceptance {
    fn symmetric(tol: f64) -> Self {
        Acceptance::Within { below: tol, above: tol }
    }

    fn accepts(&self, reference: f64, estimate: f64) -> bool {
        match *self {
            Acceptance::Within { below, above } => estimate >= reference - below && estimate <= reference + above,
            Acceptance::AtLeast => estimate >= reference,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub space: String,
    pub sigma: Order,
    pub reference_value: f64,
    pub estimated_value: f64,
    pub bracket: Bracket,
    pub acceptance: Acceptance,
    pub ok: bool,
}

impl Row {
    fn new(
        space: String,
        sigma: Order,
        reference_value: f64,
        estimated_value: f64,
        bracket: Bracket,
        acceptance: Acceptance,
    ) -> Self {
        let ok = acceptance.accepts(reference_value, estimated_value) && estimated_value <= bracket.hi_or_inf() + 1e-6;
        Row { space, sigma, reference_value, estimated_value, bracket, acceptance, ok }
    }

    pub fn abs_diff(&self) -> f64 {
        (self.estimated_value - self.reference_value).abs()
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.space.clone(),
            fmt12(self.sigma.value()),
            fmt12(self.reference_value),
            fmt12(self.estimated_value),
            fmt12(self.abs_diff()),
            fmt12(self.bracket.lo),
            self.bracket.hi.map(fmt12).unwrap_or_else(|| "inf".into()),
            if self.ok { "OK" } else { "FAIL" }.into(),
        ]
    }
}

fn order(s: f64) -> Order {
    Order::new(s).expect("table orders are at least 1")
}

fn fail(e: njc_core::Error) -> CliError {
    CliError::failure(e.to_string())
}

fn estimated_row<S: MetricSpace + ?Sized>(
    space: &S,
    sigma: f64,
    reference: f64,
    acceptance: Acceptance,
    search: &SearchConfig,
) -> Result<Row, CliError> {
    let e = estimate(space, order(sigma), search).map_err(fail)?;
    Ok(Row::new(space.id(), e.sigma, reference, e.value, e.bracket, acceptance))
}

fn bracket_of<S: MetricSpace + ?Sized>(space: &S, sigma: Order, search: &SearchConfig) -> Result<Bracket, CliError> {
    let report = audit_bounds(space, &search.audit_config()).map_err(fail)?;
    Ok(theorem_bounds(&report, sigma))
}

fn abs_value_pair() -> Result<Vec<Component>, CliError> {
    let line: Component = Arc::new(zoo::make_euclidean(1).map_err(fail)?);
    Ok(vec![Arc::clone(&line), line])
}

/// Every row of the table, in a fixed order.
pub fn reproduce_rows(search: &SearchConfig) -> Result<Vec<Row>, CliError> {
    let mut rows = Vec::new();
    let zoo_space = |r: njc_core::Result<ZooSpace>| r.map_err(fail);

    let truncated = zoo_space(zoo::make_truncated(2, 1.0))?;
    for s in [1.0, 1.5, 2.0] {
        let reference = order(s).universal_lower();
        rows.push(estimated_row(&truncated, s, reference, Acceptance::Within { below: 1e-3, above: 1e-6 }, search)?);
    }

    let fifth_root = zoo_space(zoo::make_fractional_power(2, 0.2))?;
    rows.push(estimated_row(&fifth_root, 4.0, 0.25, Acceptance::symmetric(1e-3), search)?);

    let nps = zoo_space(zoo::make_norm_plus_square(2))?;
    rows.push(estimated_row(&nps, 2.0, 2.25, Acceptance::AtLeast, search)?);

    let asym = zoo_space(zoo::make_asymmetric_sum(2, &Vector::unit(2, 0)))?;
    let sigma = order(1.0);
    let seq = witness_sequence_bound(&asym, sigma, SEQUENCE_INDEX, |k| asym.asymmetric_witness(k)).map_err(fail)?;
    let gamma = seq.last().ok_or_else(|| CliError::failure("empty asymmetric sequence"))?;
    rows.push(Row::new(
        format!("{} [sequence k={SEQUENCE_INDEX}]", asym.id()),
        sigma,
        3.5,
        gamma,
        bracket_of(&asym, sigma, search)?,
        Acceptance::symmetric(1e-2),
    ));

    let basis = BasisDecl::sqrt2();
    let hamel = make_hamel_additive_metric(basis.clone());
    let sigma = order(2.0);
    let seq =
        witness_sequence_bound(&hamel, sigma, SEQUENCE_INDEX, |k| hamel_witness_generator(&basis, k)).map_err(fail)?;
    let gamma = seq.last().ok_or_else(|| CliError::failure("empty Hamel sequence"))?;
    rows.push(Row::new(
        format!("{} [sequence k={SEQUENCE_INDEX}]", hamel.id()),
        sigma,
        2.0,
        gamma,
        bracket_of(&hamel, sigma, search)?,
        Acceptance::symmetric(1e-2),
    ));

    let rational = make_rational_euclidean_metric(BasisDecl::sqrt2_sqrt3());
    rows.push(estimated_row(&rational, 2.0, 1.0, Acceptance::symmetric(1e-6), search)?);

    for (p, s) in [
        (1.0, 2.0),
        (1.5, 2.0),
        (1.5, 1.5),
        (1.5, 3.0),
        (2.0, 2.0),
        (3.0, 2.0),
        (3.0, 1.5),
        (3.0, 3.0),
        (f64::INFINITY, 2.0),
    ] {
        let space = zoo_space(zoo::make_norm_induced(2, p))?;
        let reference = pmetric_constant(p, order(s))
            .ok_or_else(|| CliError::failure(format!("no p-metric constant at p = {p}, sigma = {s}")))?;
        rows.push(estimated_row(&space, s, reference, Acceptance::symmetric(1e-2), search)?);
    }

    let euclid = zoo_space(zoo::make_euclidean(2))?;
    rows.push(estimated_row(&euclid, 2.0, 1.0, Acceptance::symmetric(1e-6), search)?);

    let sigma = order(2.0);
    let psi2 = make_psi_p(2, 2.0).map_err(fail)?;
    let psi_inf = make_psi_p(2, f64::INFINITY).map_err(fail)?;
    let mm = min_max_ratio(&psi_inf, &psi2, MINMAX_RESOLUTION, MINMAX_REFINE).map_err(fail)?;
    rows.push(Row::new(
        "dominating[p:inf below p:2]".into(),
        sigma,
        2.0,
        dominating_exact_constant(mm.min, sigma, Side::Below),
        Bracket { lo: sigma.universal_lower(), hi: Some(2.0) },
        Acceptance::symmetric(1e-2),
    ));

    let psi1 = make_psi_p(2, 1.0).map_err(fail)?;
    let mm = min_max_ratio(&psi1, &psi2, MINMAX_RESOLUTION, MINMAX_REFINE).map_err(fail)?;
    let (lo, hi) = transfer_bounds(1.0, mm.min, mm.max, sigma).map_err(fail)?;
    let product = make_product(abs_value_pair()?, psi1).map_err(fail)?;
    let e = estimate(&product, sigma, search).map_err(fail)?;
    rows.push(Row::new(
        format!("{} [transfer from p:2]", product.id()),
        sigma,
        2.0,
        e.value,
        Bracket { lo, hi: Some(hi) },
        Acceptance::symmetric(1e-2),
    ));
    let last = rows.last_mut().expect("row just pushed");
    last.ok &= last.estimated_value >= lo - 1e-6;

    Ok(rows)
}

pub fn cmd_reproduce(cfg: &RunConfig) -> Result<i32, CliError> {
    let rows = reproduce_rows(&search_config(cfg))?;
    let text = match cfg.format {
        Format::Csv => to_csv(&REPRODUCE_COLUMNS, &rows.iter().map(Row::cells).collect::<Vec<_>>())?,
        Format::Json => to_json(&serde_json::json!({"schema": SCHEMA, "rows": rows}))?,
    };
    emit(&text, cfg.out.as_deref())?;
    let bad: Vec<_> = rows.iter().filter(|r| !r.ok).collect();
    if bad.is_empty() {
        return Ok(0);
    }
    for r in &bad {
        eprintln!(
            "out of tolerance: {} sigma={} reference={} estimate={}",
            r.space,
            r.sigma,
            fmt12(r.reference_value),
            fmt12(r.estimated_value)
        );
    }
    Ok(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acceptance_modes() {
        assert!(Acceptance::Within { below: 1e-3, above: 1e-6 }.accepts(1.0, 0.9995));
        assert!(!Acceptance::Within { below: 1e-3, above: 1e-6 }.accepts(1.0, 1.00001));
        assert!(Acceptance::AtLeast.accepts(2.25, 2.25));
        assert!(!Acceptance::AtLeast.accepts(2.25, 2.2499));
    }
}
