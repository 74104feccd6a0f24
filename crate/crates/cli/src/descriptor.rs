//! Metric and simplex-function descriptors.
//!
//! Grammar: `name[(param)][:dim]`, e.g. `truncated(1):2`, `norm(inf):3`,
//! `frac-power(1/5)`, `hamel-additive`. The default dimension is 2.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use njc_core::product::{make_product, make_psi_p, named_psi, Component, ProductSpace, SimplexFunction};
use njc_core::qspace::{
    make_hamel_additive_metric, make_rational_euclidean_metric, parse_rational, BasisDecl, HamelAdditive,
    RationalEuclidean,
};
use njc_core::zoo::{self, ZooSpace};
use njc_core::Vector;

use crate::CliError;

const DEFAULT_DIM: usize = 2;

pub const METRIC_NAMES: &str =
    "euclidean, norm(p), truncated(r), frac-power(a), norm-plus-square, asym-sum, hamel-additive, rational-euclidean";

/// Any space addressable by a metric descriptor.
pub enum AnySpace {
    Zoo(ZooSpace),
    Hamel(HamelAdditive),
    Rational(RationalEuclidean),
}

/// Runs `$body` with `$s` bound to the concrete space.
#[macro_export]
macro_rules! with_space {
    ($space:expr, $s:ident => $body:expr) => {
        match $space {
            $crate::descriptor::AnySpace::Zoo($s) => $body,
            $crate::descriptor::AnySpace::Hamel($s) => $body,
            $crate::descriptor::AnySpace::Rational($s) => $body,
        }
    };
}

impl AnySpace {
    pub fn expected_properties(&self) -> Option<BTreeMap<String, bool>> {
        match self {
            AnySpace::Zoo(s) => s.expected_properties(),
            AnySpace::Hamel(s) => s.expected_properties(),
            AnySpace::Rational(s) => s.expected_properties(),
        }
    }
}

struct Parsed<'a> {
    name: &'a str,
    param: Option<&'a str>,
    dim: Option<usize>,
}

fn split(desc: &str) -> Result<Parsed<'_>, CliError> {
    let bad = |why: &str| CliError::config(format!("metric {desc:?}: {why}"));
    let desc = desc.trim();
    let (head, dim) = match desc.rsplit_once(':') {
        Some((h, d)) if !d.contains(')') => {
            let d: usize = d.trim().parse().map_err(|_| bad("dimension must be a positive integer"))?;
            if d == 0 {
                return Err(bad("dimension must be a positive integer"));
            }
            (h, Some(d))
        }
        _ => (desc, None),
    };
    let (name, param) = match head.split_once('(') {
        Some((n, rest)) => {
            let p = rest.strip_suffix(')').ok_or_else(|| bad("unbalanced parentheses"))?;
            (n.trim(), Some(p.trim()))
        }
        None => (head.trim(), None),
    };
    Ok(Parsed { name, param, dim })
}

/// A real parameter: decimal, `p/q` or `inf`.
pub fn parse_real(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    if matches!(s, "inf" | "infinity" | "∞") {
        return Ok(f64::INFINITY);
    }
    if s.contains('/') {
        let q = parse_rational(s).map_err(|e| CliError::config(e.to_string()))?;
        let (n, d) = (q.numer().to_string(), q.denom().to_string());
        return match (n.parse::<f64>(), d.parse::<f64>()) {
            (Ok(n), Ok(d)) => Ok(n / d),
            _ => Err(CliError::config(format!("cannot read {s:?} as a real"))),
        };
    }
    s.parse().map_err(|_| CliError::config(format!("cannot read {s:?} as a real")))
}

fn need_param(p: &Parsed<'_>) -> Result<f64, CliError> {
    match p.param {
        Some(v) => parse_real(v),
        None => Err(CliError::config(format!("{} needs a parameter, e.g. {}(2)", p.name, p.name))),
    }
}

fn core(e: njc_core::Error) -> CliError {
    CliError::config(e.to_string())
}

/// Builds a zoo space; rational spaces are rejected here.
pub fn zoo_space(desc: &str) -> Result<ZooSpace, CliError> {
    let p = split(desc)?;
    let dim = p.dim.unwrap_or(DEFAULT_DIM);
    let no_param = |p: &Parsed<'_>| match p.param {
        Some(_) => Err(CliError::config(format!("{} takes no parameter", p.name))),
        None => Ok(()),
    };
    match p.name {
        "euclidean" => no_param(&p).and_then(|_| zoo::make_euclidean(dim).map_err(core)),
        "norm" => zoo::make_norm_induced(dim, need_param(&p)?).map_err(core),
        "truncated" => {
            let r = match p.param {
                Some(v) => parse_real(v)?,
                None => 1.0,
            };
            zoo::make_truncated(dim, r).map_err(core)
        }
        "frac-power" => zoo::make_fractional_power(dim, need_param(&p)?).map_err(core),
        "norm-plus-square" => no_param(&p).and_then(|_| zoo::make_norm_plus_square(dim).map_err(core)),
        "asym-sum" => no_param(&p).and_then(|_| zoo::make_asymmetric_sum(dim, &Vector::unit(dim, 0)).map_err(core)),
        "hamel-additive" | "rational-euclidean" => {
            Err(CliError::config(format!("{} has rational points and cannot be a product component", p.name)))
        }
        other => Err(CliError::config(format!("unknown metric {other:?} (known: {METRIC_NAMES})"))),
    }
}

fn load_basis(basis_file: Option<&Path>, default: fn() -> BasisDecl) -> Result<BasisDecl, CliError> {
    match basis_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("basis file {}: {e}", path.display())))?;
            BasisDecl::from_json(&text).map_err(core)
        }
        None => Ok(default()),
    }
}

/// Builds any space from a metric descriptor. Rational spaces read the basis file
/// when given and otherwise use the `{e, sqrt2e}` declaration.
pub fn build_space(desc: &str, basis_file: Option<&Path>) -> Result<AnySpace, CliError> {
    let p = split(desc)?;
    match p.name {
        "hamel-additive" | "rational-euclidean" => {
            if p.param.is_some() || p.dim.is_some() {
                return Err(CliError::config(format!(
                    "{} takes its labels from --basis-file, not from parameters",
                    p.name
                )));
            }
            let basis = load_basis(basis_file, BasisDecl::sqrt2)?;
            Ok(if p.name == "hamel-additive" {
                AnySpace::Hamel(make_hamel_additive_metric(basis))
            } else {
                AnySpace::Rational(make_rational_euclidean_metric(basis))
            })
        }
        _ => {
            if basis_file.is_some() {
                return Err(CliError::config("--basis-file only applies to rational metrics"));
            }
            zoo_space(desc).map(AnySpace::Zoo)
        }
    }
}

/// `p:<value>` or `custom:<name>`.
pub fn build_psi(desc: &str, n: usize) -> Result<SimplexFunction, CliError> {
    let bad = || CliError::config(format!("psi {desc:?}: expected p:<value> or custom:<name>"));
    let (kind, value) = desc.split_once(':').ok_or_else(bad)?;
    match kind.trim() {
        "p" => make_psi_p(n, parse_real(value)?).map_err(core),
        "custom" => named_psi(value.trim(), n).map_err(core),
        _ => Err(bad()),
    }
}

pub fn build_components(specs: &[String]) -> Result<Vec<Component>, CliError> {
    if specs.len() < 2 {
        return Err(CliError::config("a product needs at least two components"));
    }
    specs.iter().map(|s| zoo_space(s).map(|z| Arc::new(z) as Component)).collect()
}

pub fn build_product(components: &[String], psi: &SimplexFunction) -> Result<ProductSpace, CliError> {
    make_product(build_components(components)?, psi.clone()).map_err(core)
}

#[cfg(test)]
mod tests {
    use super::*;
    use njc_core::MetricSpace;

    #[test]
    fn zoo_specs_round_trip_through_ids() {
        for desc in
            ["truncated(1):2", "norm(inf):3", "frac-power(0.2):2", "euclidean:2", "norm-plus-square:2", "asym-sum:2"]
        {
            assert_eq!(zoo_space(desc).unwrap().id(), desc);
        }
        assert_eq!(zoo_space("frac-power(1/5)").unwrap().id(), "frac-power(0.2):2");
    }

    #[test]
    fn rejects_bad_specs() {
        for desc in ["nope", "norm", "norm(x)", "euclidean(2)", "truncated(1:2", "euclidean:0", "norm(0.5)"] {
            assert!(zoo_space(desc).is_err(), "{desc}");
        }
        assert!(build_space("hamel-additive:3", None).is_err());
        assert!(zoo_space("hamel-additive").is_err());
    }

    #[test]
    fn rational_spaces_default_basis() {
        let s = build_space("hamel-additive", None).unwrap();
        assert!(matches!(s, AnySpace::Hamel(_)));
        assert!(s.expected_properties().is_some());
    }

    #[test]
    fn psi_specs() {
        assert_eq!(build_psi("p:inf", 2).unwrap().p(), Some(f64::INFINITY));
        assert_eq!(build_psi("p:1.5", 3).unwrap().n(), 3);
        assert!(build_psi("custom:half-l1-linf", 2).is_ok());
        assert!(build_psi("q:2", 2).is_err());
        assert!(build_psi("p:0.5", 2).is_err());
    }
}
