use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::properties::Status;

/// Absolute slack for the membership conditions.
const MEMBERSHIP_TOLERANCE: f64 = 1e-12;
/// Random interior points added to every grid scan.
pub const RANDOM_POINTS: usize = 1000;
const RANDOM_SEED: u64 = 0x5eed;
/// Grids with more points than this check convexity on sampled pairs.
const ALL_PAIRS_LIMIT: usize = 2500;
const SAMPLED_PAIRS: usize = 200_000;

#[derive(Clone, Debug, PartialEq)]
pub enum PsiKind {
    /// `p = ∞` is stored as `f64::INFINITY`.
    PsiP {
        p: f64,
    },
    Custom {
        name: String,
    },
}

impl fmt::Display for PsiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiKind::PsiP { p } if p.is_infinite() => write!(f, "p:inf"),
            PsiKind::PsiP { p } => write!(f, "p:{p}"),
            PsiKind::Custom { name } => write!(f, "custom:{name}"),
        }
    }
}

/// Outcome of one membership condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipCheck {
    pub status: Status,
    /// Offending simplex point(s).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<f64>,
}

impl MembershipCheck {
    fn pass() -> Self {
        MembershipCheck { status: Status::Pass, witness: None, lhs: None, rhs: None }
    }

    fn fail(points: Vec<Vec<f64>>, lhs: f64, rhs: f64) -> Self {
        MembershipCheck { status: Status::Fail, witness: Some(points), lhs: Some(lhs), rhs: Some(rhs) }
    }
}

/// Sampled membership record. A PASS is evidence, not a proof.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub status: Status,
    pub vertices: MembershipCheck,
    pub midpoint_convex: MembershipCheck,
    pub inequality: MembershipCheck,
    pub envelope: MembershipCheck,
    pub grid_resolution: usize,
    pub grid_points: usize,
    pub random_points: usize,
}

type PsiFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A function on the standard simplex `Ωₙ` used to combine component distances.
#[derive(Clone)]
pub struct SimplexFunction {
    n: usize,
    kind: PsiKind,
    eval: Arc<PsiFn>,
    membership: MembershipReport,
}

impl fmt::Debug for SimplexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SimplexFunction").field("n", &self.n).field("kind", &self.kind).finish()
    }
}

impl Serialize for SimplexFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct View<'a> {
            n: usize,
            psi: String,
            membership: &'a MembershipReport,
        }
        View { n: self.n, psi: self.kind.to_string(), membership: &self.membership }.serialize(s)
    }
}

/// `ℓ_p` norm of `t` (maximum for `p = ∞`), rescaled to avoid overflow.
pub(crate) fn p_norm(t: &[f64], p: f64) -> f64 {
    let m = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if p.is_infinite() || m == 0.0 {
        return m;
    }
    if p == 1.0 {
        return t.iter().map(|v| v.abs()).sum();
    }
    m * t.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

pub fn default_resolution(n: usize) -> usize {
    match n {
        2 => 200,
        3 => 64,
        _ => 16,
    }
}

impl SimplexFunction {
    fn build(n: usize, kind: PsiKind, eval: Arc<PsiFn>) -> Result<Self> {
        if n < 2 {
            return Err(Error::contract(format!("simplex functions need n >= 2, got {n}")));
        }
        let mut psi = SimplexFunction { n, kind, eval, membership: placeholder() };
        psi.membership = audit_membership(&psi, default_resolution(n))?;
        Ok(psi)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &PsiKind {
        &self.kind
    }

    /// The exponent when this is `ψ_p`.
    pub fn p(&self) -> Option<f64> {
        match self.kind {
            PsiKind::PsiP { p } => Some(p),
            PsiKind::Custom { .. } => None,
        }
    }

    pub fn membership(&self) -> &MembershipReport {
        &self.membership
    }

    pub fn eval(&self, t: &[f64]) -> Result<f64> {
        if t.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: t.len() });
        }
        let s: f64 = t.iter().sum();
        if t.iter().any(|v| v.is_nan() || *v < 0.0) || (s - 1.0).abs() > 1e-9 {
            return Err(Error::contract(format!("{t:?} is not a point of the simplex")));
        }
        Ok((self.eval)(t))
    }

    pub(crate) fn eval_unchecked(&self, t: &[f64]) -> f64 {
        (self.eval)(t)
    }
}

fn placeholder() -> MembershipReport {
    MembershipReport {
        status: Status::Skipped,
        vertices: MembershipCheck::pass(),
        midpoint_convex: MembershipCheck::pass(),
        inequality: MembershipCheck::pass(),
        envelope: MembershipCheck::pass(),
        grid_resolution: 0,
        grid_points: 0,
        random_points: 0,
    }
}

/// `ψ_p(t) = (Σ t_i^p)^{1/p}`, or `max t_i` for `p = ∞`.
pub fn make_psi_p(n: usize, p: f64) -> Result<SimplexFunction> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::contract(format!("p must lie in [1, inf], got {p}")));
    }
    SimplexFunction::build(n, PsiKind::PsiP { p }, Arc::new(move |t: &[f64]| p_norm(t, p)))
}

/// Wraps an arbitrary function; its membership is audited, not assumed.
pub fn make_custom_psi(
    n: usize,
    name: impl Into<String>,
    f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
) -> Result<SimplexFunction> {
    SimplexFunction::build(n, PsiKind::Custom { name: name.into() }, Arc::new(f))
}

/// Named custom functions: `half-l1-linf` (`½(1 + max t)`, a member),
/// `const-one` (`ψ ≡ 1`, a member) and `squares` (`Σ t_i²`, not a member).
pub fn named_psi(name: &str, n: usize) -> Result<SimplexFunction> {
    match name {
        "half-l1-linf" => make_custom_psi(n, name, |t| 0.5 * (1.0 + p_norm(t, f64::INFINITY))),
        "const-one" => make_custom_psi(n, name, |_| 1.0),
        "squares" => make_custom_psi(n, name, |t| t.iter().map(|v| v * v).sum()),
        _ => Err(Error::Parse(format!("unknown simplex function {name:?} (known: half-l1-linf, const-one, squares)"))),
    }
}

/// Barycentric lattice `{k / r : k ∈ ℕⁿ, Σk = r}`.
pub fn simplex_grid(n: usize, resolution: usize) -> Vec<Vec<f64>> {
    fn rec(n: usize, left: usize, r: f64, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if prefix.len() + 1 == n {
            prefix.push(left);
            out.push(prefix.iter().map(|&k| k as f64 / r).collect());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            rec(n, left - k, r, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, resolution, resolution as f64, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Uniform points of the open simplex, from normalized exponentials.
pub fn random_simplex_points(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let e: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
            let s: f64 = e.iter().sum();
            e.into_iter().map(|v| v / s).collect()
        })
        .collect()
}

pub(crate) fn scan_points(n: usize, resolution: usize) -> Vec<Vec<f64>> {
    let mut pts = simplex_grid(n, resolution);
    pts.extend(random_simplex_points(n, RANDOM_POINTS, RANDOM_SEED));
    pts
}

/// First failure in index order; `check` returns `(lhs, rhs)` with the
/// condition `lhs ≤ rhs`, or `None` when the instance does not apply.
fn first_failure<T: Sync>(
    items: &[T],
    check: impl Fn(&T) -> Option<(f64, f64, Vec<Vec<f64>>)> + Sync,
) -> MembershipCheck {
    let failure = items
        .par_iter()
        .enumerate()
        .filter_map(|(i, item)| {
            check(item).and_then(|(lhs, rhs, pts)| {
                (lhs > rhs + MEMBERSHIP_TOLERANCE || lhs.is_nan() || rhs.is_nan()).then_some((i, lhs, rhs, pts))
            })
        })
        .min_by_key(|(i, ..)| *i);
    match failure {
        Some((_, lhs, rhs, pts)) => MembershipCheck::fail(pts, lhs, rhs),
        None => MembershipCheck::pass(),
    }
}

/// The face restriction of `t` at `i`, scaled back onto the simplex.
fn restriction(t: &[f64], i: usize) -> Vec<f64> {
    let s = 1.0 - t[i];
    t.iter().enumerate().map(|(j, v)| if j == i { 0.0 } else { v / s }).collect()
}

/// Checks vertex values, midpoint convexity, the face-restriction inequality
/// `ψ(t) ≥ (1−t_i)·ψ(restriction)` and the envelope `max t ≤ ψ ≤ 1` on the
/// lattice of the given resolution plus random interior points.
pub fn audit_membership(psi: &SimplexFunction, resolution: usize) -> Result<MembershipReport> {
    if resolution < 2 {
        return Err(Error::contract(format!("grid resolution must be at least 2, got {resolution}")));
    }
    let n = psi.n;
    let f = |t: &[f64]| psi.eval_unchecked(t);
    let grid = simplex_grid(n, resolution);
    let grid_points = grid.len();
    let mut pts = grid;
    pts.extend(random_simplex_points(n, RANDOM_POINTS, RANDOM_SEED));

    let vertices: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let vertex_check = {
        let bad = vertices.iter().map(|v| (v, f(v))).find(|(_, val)| (val - 1.0).abs() > MEMBERSHIP_TOLERANCE);
        match bad {
            Some((v, val)) => MembershipCheck::fail(vec![v.clone()], val, 1.0),
            None => MembershipCheck::pass(),
        }
    };

    let pairs: Vec<(usize, usize)> = if pts.len() <= ALL_PAIRS_LIMIT {
        (0..pts.len()).flat_map(|i| (i + 1..pts.len()).map(move |j| (i, j))).collect()
    } else {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
        (0..SAMPLED_PAIRS).map(|_| (rng.random_range(0..pts.len()), rng.random_range(0..pts.len()))).collect()
    };
    let convex = first_failure(&pairs, |&(i, j)| {
        let (a, b) = (&pts[i], &pts[j]);
        let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        Some((f(&mid), 0.5 * (f(a) + f(b)), vec![a.clone(), b.clone()]))
    });

    let index_pairs: Vec<(usize, usize)> = (0..pts.len()).flat_map(|k| (0..n).map(move |i| (k, i))).collect();
    let inequality = first_failure(&index_pairs, |&(k, i)| {
        let t = &pts[k];
        (t[i] < 1.0).then(|| ((1.0 - t[i]) * f(&restriction(t, i)), f(t), vec![t.clone()]))
    });

    let envelope = first_failure(&pts, |t| {
        let v = f(t);
        let max = p_norm(t, f64::INFINITY);
        if max > v + MEMBERSHIP_TOLERANCE {
            Some((max, v, vec![t.clone()]))
        } else {
            Some((v, 1.0, vec![t.clone()]))
        }
    });

    let all = [&vertex_check, &convex, &inequality, &envelope];
    let status = if all.iter().all(|c| c.status == Status::Pass) { Status::Pass } else { Status::Fail };
    Ok(MembershipReport {
        status,
        vertices: vertex_check,
        midpoint_convex: convex,
        inequality,
        envelope,
        grid_resolution: resolution,
        grid_points,
        random_points: RANDOM_POINTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_p_values() {
        let p2 = make_psi_p(2, 2.0).unwrap();
        assert!((p2.eval(&[0.5, 0.5]).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let pinf = make_psi_p(2, f64::INFINITY).unwrap();
        assert_eq!(pinf.eval(&[0.5, 0.5]).unwrap(), 0.5);
        for p in [1.0, 1.5, 3.0, f64::INFINITY] {
            let psi = make_psi_p(3, p).unwrap();
            assert_eq!(psi.eval(&[1.0, 0.0, 0.0]).unwrap(), 1.0);
            assert_eq!(psi.membership().status, Status::Pass, "p={p}");
        }
        assert!(make_psi_p(2, 0.5).is_err());
        assert!(make_psi_p(1, 2.0).is_err());
    }

    #[test]
    fn eval_rejects_points_off_the_simplex() {
        let p2 = make_psi_p(2, 2.0).unwrap();
        assert!(p2.eval(&[0.5, 0.6]).is_err());
        assert!(p2.eval(&[1.0]).is_err());
    }

    #[test]
    fn squares_fail_envelope() {
        let sq = named_psi("squares", 2).unwrap();
        let m = sq.membership();
        assert_eq!(m.status, Status::Fail);
        assert_eq!(m.vertices.status, Status::Pass);
        assert_eq!(m.envelope.status, Status::Fail);
        let t = &m.envelope.witness.as_ref().unwrap()[0];
        assert!(t[0] * t[0] + t[1] * t[1] < t[0].max(t[1]));
        let direct = (0.7f64 * 0.7 + 0.3 * 0.3, 0.7);
        assert!(direct.0 < direct.1);
    }

    #[test]
    fn named_members_pass() {
        for name in ["const-one", "half-l1-linf"] {
            for n in [2, 3] {
                let psi = named_psi(name, n).unwrap();
                assert_eq!(psi.membership().status, Status::Pass, "{name} n={n}");
            }
        }
        assert!(named_psi("nope", 2).is_err());
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(simplex_grid(2, 200).len(), 201);
        assert_eq!(simplex_grid(3, 64).len(), 65 * 66 / 2);
        for t in simplex_grid(4, 5) {
            assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(audit_membership(&make_psi_p(2, 1.0).unwrap(), 1).is_err());
    }
}
