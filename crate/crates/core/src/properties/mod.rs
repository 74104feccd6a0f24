//! Sampled structural audits of a metric and its gauge.
//!
//! Every check evaluates deterministic probes (basis points and their
//! combinations) followed by seeded random draws at several scales. A PASS
//! means no counterexample was found in the stated number of samples; a FAIL
//! carries the first violating instance as a replayable [`Witness`].

mod checks;
mod polarization;
mod relation;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use checks::{
    audit, audit_bounds, check_clarkson, check_metric_axioms, check_parallelogram, check_property,
    check_reverse_clarkson, check_two_homogeneous, equivalence_consistency, normability_verdict, AuditConfig,
    Normability, NormabilityVerdict, Property,
};
pub use polarization::{check_inner_product_axioms, recovered_inner_product};
pub use relation::{Comparison, ComparisonKind, Relation, Tolerance, Witness};

/// Property names of the audit profile, in report order.
pub const PROFILE_PROPERTIES: [&str; 10] = [
    "even",
    "subadditive",
    "midpoint_convex",
    "convex",
    "translation_invariant",
    "positively_homogeneous",
    "absolutely_homogeneous",
    "two_homogeneous",
    "sub_homogeneous",
    "halving",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
    /// Worst normalized slack over all evaluated instances.
    pub margin: f64,
    pub samples: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl CheckResult {
    pub fn pass(margin: f64, samples: usize, seed: u64) -> Self {
        CheckResult {
            status: Status::Pass,
            witness: None,
            margin,
            samples,
            seed,
            note: Some(format!("no counterexample found in {samples} samples")),
        }
    }

    pub fn fail(witness: Witness, margin: f64, samples: usize, seed: u64) -> Self {
        CheckResult { status: Status::Fail, witness: Some(witness), margin, samples, seed, note: None }
    }

    #[cfg(test)]
    pub(crate) fn fail_without_witness(margin: f64, samples: usize, seed: u64) -> Self {
        CheckResult { status: Status::Fail, witness: None, margin, samples, seed, note: None }
    }

    pub fn skipped(note: impl Into<String>, samples: usize, seed: u64) -> Self {
        CheckResult { status: Status::Skipped, witness: None, margin: 0.0, samples, seed, note: Some(note.into()) }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub schema: String,
    pub space_id: String,
    pub checks: BTreeMap<String, CheckResult>,
    pub sample_count: usize,
    pub seed: u64,
    pub tolerance: Tolerance,
}

impl PropertyReport {
    pub fn empty(space_id: impl Into<String>, sample_count: usize, seed: u64) -> Self {
        PropertyReport {
            schema: crate::SCHEMA.to_string(),
            space_id: space_id.into(),
            checks: BTreeMap::new(),
            sample_count,
            seed,
            tolerance: Tolerance::default(),
        }
    }

    pub fn insert(&mut self, name: impl Into<String>, result: CheckResult) {
        self.checks.insert(name.into(), result);
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.get(name)
    }

    pub fn status(&self, name: &str) -> Option<Status> {
        self.checks.get(name).map(|c| c.status)
    }

    /// Names whose status disagrees with `expected` (true = PASS).
    pub fn mismatches(&self, expected: &BTreeMap<String, bool>) -> Vec<String> {
        expected
            .iter()
            .filter(|(name, &want)| {
                let want = if want { Status::Pass } else { Status::Fail };
                self.status(name) != Some(want)
            })
            .map(|(name, _)| name.clone())
            .collect()
    }
}
