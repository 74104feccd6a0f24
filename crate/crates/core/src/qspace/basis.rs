use std::collections::BTreeMap;

use num_traits::Zero;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rational::{format_rational, parse_rational, to_f64, Rational};
use crate::error::{Error, Result};

/// Finite rational combination of basis labels. Absent labels are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct QVector {
    coeffs: BTreeMap<String, Rational>,
}

impl QVector {
    pub fn zero() -> Self {
        QVector::default()
    }

    pub fn unit(label: &str) -> Self {
        QVector::from_terms([(label, Rational::from_integer(1.into()))])
    }

    pub fn from_terms<'a>(terms: impl IntoIterator<Item = (&'a str, Rational)>) -> Self {
        let mut v = QVector::zero();
        for (label, q) in terms {
            v.add_term(label, &q);
        }
        v
    }

    pub fn coeff(&self, label: &str) -> Rational {
        self.coeffs.get(label).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &Rational)> {
        self.coeffs.iter().map(|(l, q)| (l.as_str(), q))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub(crate) fn add_term(&mut self, label: &str, q: &Rational) {
        if q.is_zero() {
            return;
        }
        let sum = self.coeff(label) + q;
        if sum.is_zero() {
            self.coeffs.remove(label);
        } else {
            self.coeffs.insert(label.to_string(), sum);
        }
    }

    pub fn add(&self, other: &QVector) -> QVector {
        let mut v = self.clone();
        for (l, q) in other.terms() {
            v.add_term(l, q);
        }
        v
    }

    pub fn sub(&self, other: &QVector) -> QVector {
        let mut v = self.clone();
        for (l, q) in other.terms() {
            v.add_term(l, &-q);
        }
        v
    }

    pub fn scale(&self, q: &Rational) -> QVector {
        if q.is_zero() {
            return QVector::zero();
        }
        QVector { coeffs: self.coeffs.iter().map(|(l, c)| (l.clone(), c * q)).collect() }
    }

    pub fn neg(&self) -> QVector {
        QVector { coeffs: self.coeffs.iter().map(|(l, c)| (l.clone(), -c)).collect() }
    }

    /// Exact `Σ c_b²`.
    pub fn squared_norm(&self) -> Rational {
        self.coeffs.values().map(|c| c * c).fold(Rational::zero(), |a, b| a + b)
    }
}

impl Serialize for QVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m: BTreeMap<&str, String> = self.coeffs.iter().map(|(l, q)| (l.as_str(), format_rational(q))).collect();
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = BTreeMap::<String, String>::deserialize(d)?;
        let mut v = QVector::zero();
        for (l, s) in m {
            let q = parse_rational(&s).map_err(D::Error::custom)?;
            v.add_term(&l, &q);
        }
        Ok(v)
    }
}

/// One declared basis element: its real value and its value under the
/// additive functional.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisEntry {
    pub label: String,
    pub embed: f64,
    pub functional_value: Rational,
}

/// Exact ℚ-linear action of an irrational scalar on the declared span.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarAction {
    pub name: String,
    pub value: f64,
    pub images: BTreeMap<String, QVector>,
}

/// A finite fragment of a Hamel basis.
///
/// The embedded values must be linearly independent over ℚ. That is the
/// declarer's obligation: a dependent declaration voids the non-normability
/// guarantees of the spaces built on it. The shipped declarations use
/// `1, √2` and `1, √2, √3`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisDecl {
    entries: Vec<BasisEntry>,
    index: BTreeMap<String, usize>,
    actions: Vec<ScalarAction>,
}

impl BasisDecl {
    pub fn new(entries: Vec<BasisEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::contract("basis must declare at least one label"));
        }
        let mut index = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            if e.label.is_empty() {
                return Err(Error::contract("basis labels must be nonempty"));
            }
            if !e.embed.is_finite() || e.embed == 0.0 {
                return Err(Error::contract(format!("label {:?} needs a finite nonzero embedding", e.label)));
            }
            if index.insert(e.label.clone(), i).is_some() {
                return Err(Error::contract(format!("duplicate label {:?}", e.label)));
            }
        }
        Ok(BasisDecl { entries, index, actions: Vec::new() })
    }

    /// Registers the action of a scalar; every label needs an image.
    pub fn with_action(mut self, action: ScalarAction) -> Result<Self> {
        if !action.value.is_finite() || action.value <= 0.0 {
            return Err(Error::contract(format!("action {:?} needs a positive finite value", action.name)));
        }
        for e in &self.entries {
            let img = action
                .images
                .get(&e.label)
                .ok_or_else(|| Error::contract(format!("action {:?} has no image for {:?}", action.name, e.label)))?;
            self.check(img)?;
        }
        if let Some(extra) = action.images.keys().find(|l| !self.index.contains_key(*l)) {
            return Err(Error::contract(format!("action {:?} maps undeclared label {extra:?}", action.name)));
        }
        self.actions.push(action);
        Ok(self)
    }

    /// `{e ↦ 1, sqrt2e ↦ √2}` with `g(e) = 1`, `g(sqrt2e) = 0` and the
    /// action of `√2` (`e → sqrt2e`, `sqrt2e → 2e`).
    pub fn sqrt2() -> Self {
        let one = || Rational::from_integer(1.into());
        let entries = vec![
            BasisEntry { label: "e".into(), embed: 1.0, functional_value: one() },
            BasisEntry { label: "sqrt2e".into(), embed: std::f64::consts::SQRT_2, functional_value: Rational::zero() },
        ];
        let images = BTreeMap::from([
            ("e".to_string(), QVector::unit("sqrt2e")),
            ("sqrt2e".to_string(), QVector::from_terms([("e", Rational::from_integer(2.into()))])),
        ]);
        BasisDecl::new(entries)
            .and_then(|b| b.with_action(ScalarAction { name: "sqrt2".into(), value: std::f64::consts::SQRT_2, images }))
            .expect("shipped declaration is valid")
    }

    /// `{e ↦ 1, sqrt2e ↦ √2, sqrt3e ↦ √3}` with `g(e) = 1` and no scalar actions.
    pub fn sqrt2_sqrt3() -> Self {
        let entries = vec![
            BasisEntry { label: "e".into(), embed: 1.0, functional_value: Rational::from_integer(1.into()) },
            BasisEntry { label: "sqrt2e".into(), embed: std::f64::consts::SQRT_2, functional_value: Rational::zero() },
            BasisEntry { label: "sqrt3e".into(), embed: 3f64.sqrt(), functional_value: Rational::zero() },
        ];
        BasisDecl::new(entries).expect("shipped declaration is valid")
    }

    /// Parses a JSON declaration: either a list of
    /// `{label, embed: "<decimal>", functional_value: "p/q"}` entries or an
    /// object `{entries: [...], actions: [{name, value, images: {label: {label: "p/q"}}}]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: BasisFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("basis file: {e}")))?;
        let (entries, actions) = match file {
            BasisFile::List(entries) => (entries, Vec::new()),
            BasisFile::Full { entries, actions } => (entries, actions),
        };
        let entries = entries
            .into_iter()
            .map(|e| {
                let embed: f64 =
                    e.embed.trim().parse().map_err(|_| {
                        Error::Parse(format!("label {:?}: embed {:?} is not a decimal", e.label, e.embed))
                    })?;
                let functional_value = parse_rational(&e.functional_value)?;
                Ok(BasisEntry { label: e.label, embed, functional_value })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut basis = BasisDecl::new(entries)?;
        for a in actions {
            basis = basis.with_action(ScalarAction { name: a.name, value: a.value, images: a.images })?;
        }
        Ok(basis)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.label.as_str())
    }

    pub fn entries(&self) -> &[BasisEntry] {
        &self.entries
    }

    pub fn actions(&self) -> &[ScalarAction] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, label: &str) -> Option<&BasisEntry> {
        self.index.get(label).map(|&i| &self.entries[i])
    }

    /// Checks that every label of `x` is declared.
    pub fn check(&self, x: &QVector) -> Result<()> {
        match x.terms().find(|(l, _)| !self.index.contains_key(*l)) {
            Some((l, _)) => Err(Error::contract(format!("label {l:?} is not declared in the basis"))),
            None => Ok(()),
        }
    }

    /// Real value `Σ c_b · embed(b)` of a checked vector.
    pub(crate) fn embed_unchecked(&self, x: &QVector) -> f64 {
        x.terms().map(|(l, c)| to_f64(c) * self.entries[self.index[l]].embed).sum()
    }

    pub fn embed(&self, x: &QVector) -> Result<f64> {
        self.check(x)?;
        Ok(self.embed_unchecked(x))
    }

    pub(crate) fn functional_unchecked(&self, x: &QVector) -> Rational {
        x.terms().map(|(l, c)| c * &self.entries[self.index[l]].functional_value).fold(Rational::zero(), |a, b| a + b)
    }

    pub(crate) fn apply(&self, action: &ScalarAction, x: &QVector) -> QVector {
        let mut out = QVector::zero();
        for (l, c) in x.terms() {
            out = out.add(&action.images[l].scale(c));
        }
        out
    }
}

/// `φ(x) = Σ c_b · g(b)`, exact.
pub fn additive_functional(basis: &BasisDecl, x: &QVector) -> Result<Rational> {
    basis.check(x)?;
    Ok(basis.functional_unchecked(x))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BasisFile {
    List(Vec<EntryDecl>),
    Full {
        entries: Vec<EntryDecl>,
        #[serde(default)]
        actions: Vec<ActionDecl>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDecl {
    label: String,
    embed: String,
    functional_value: String,
}

#[derive(Deserialize)]
struct ActionDecl {
    name: String,
    value: f64,
    images: BTreeMap<String, QVector>,
}
