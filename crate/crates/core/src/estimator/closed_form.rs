use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::Order;
use crate::product::pmetric_constant;
use crate::zoo::ZooKind;

/// How a space was built, as far as closed-form constants are concerned.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    Zoo {
        dim: usize,
        zoo: ZooKind,
    },
    /// `ψ_p` product whose components are inner-product norms.
    PMetric {
        p: f64,
        components: usize,
    },
    HamelAdditive,
    RationalEuclidean,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub value: f64,
    pub source: String,
}

fn found(value: f64, source: &str) -> Result<ClosedForm> {
    Ok(ClosedForm { value, source: source.to_string() })
}

fn inner_product_constant(sigma: Order) -> Result<ClosedForm> {
    if sigma.value() == 2.0 {
        found(1.0, "inner-product norm at order 2")
    } else {
        Err(Error::NoClosedForm(format!("inner-product norm registered only at order 2, got {sigma}")))
    }
}

/// Known exact value of the constant for a construction and order.
pub fn closed_form_lookup(kind: &SpaceKind, sigma: Order) -> Result<ClosedForm> {
    let s = sigma.value();
    let none = |why: &str| Err(Error::NoClosedForm(format!("{why} at order {sigma}")));
    match kind {
        SpaceKind::Zoo { dim, zoo } => match zoo {
            ZooKind::Truncated { radius } if *radius == 1.0 => {
                if (1.0..=2.0).contains(&s) {
                    found(sigma.universal_lower(), "truncated metric, 2^(2-sigma) on [1, 2]")
                } else {
                    none("truncated metric registered on [1, 2] only")
                }
            }
            ZooKind::FractionalPower { exponent } if *exponent == 0.2 => {
                if s == 4.0 {
                    found(0.25, "fifth-root metric at order 4")
                } else {
                    none("fifth-root metric registered at order 4 only")
                }
            }
            ZooKind::FractionalPower { exponent } if *exponent == 1.0 => inner_product_constant(sigma),
            ZooKind::Euclidean => inner_product_constant(sigma),
            ZooKind::NormInduced { p } if *p == 2.0 => inner_product_constant(sigma),
            ZooKind::NormInduced { p } if *dim == 2 || (*dim > 2 && (*p == 1.0 || p.is_infinite())) => {
                match pmetric_constant(*p, sigma) {
                    Some(v) => found(v, "p-metric of two absolute values"),
                    None => none("sigma outside the p-metric validity interval"),
                }
            }
            _ => none("no registered constant for this construction"),
        },
        SpaceKind::PMetric { p, components } if *components >= 2 => match pmetric_constant(*p, sigma) {
            Some(v) => found(v, "p-metric with inner-product components"),
            None => none("sigma outside the p-metric validity interval"),
        },
        SpaceKind::HamelAdditive => found(2.0, "Hamel-additive metric"),
        SpaceKind::RationalEuclidean => {
            if s == 2.0 {
                found(1.0, "rational-Euclidean metric at order 2")
            } else {
                none("rational-Euclidean metric registered at order 2 only")
            }
        }
        _ => none("no registered constant for this construction"),
    }
}
