use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Order};
use crate::ratio::{gauge_ratio, RatioSample};

/// Ratios `γ_k` along an indexed witness family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport<P> {
    pub sigma: Order,
    /// `(k, γ_k)` for every non-degenerate index.
    pub gammas: Vec<(u64, f64)>,
    pub best: RatioSample<P>,
    pub best_k: u64,
    pub degenerate: Vec<u64>,
    /// True when `γ_k` never decreases along the evaluated indices.
    pub monotone: bool,
}

impl<P> SequenceReport<P> {
    pub fn last(&self) -> Option<f64> {
        self.gammas.last().map(|&(_, g)| g)
    }
}

/// Evaluates `γ_k = G(x_k, y_k)` for `k = 1..=k_max`. Degenerate pairs are
/// recorded and skipped; generator errors abort.
pub fn witness_sequence_bound<S, F>(
    space: &S,
    sigma: Order,
    k_max: u64,
    generator: F,
) -> Result<SequenceReport<S::Point>>
where
    S: MetricSpace + ?Sized,
    F: Fn(u64) -> Result<(S::Point, S::Point)>,
{
    if k_max == 0 {
        return Err(Error::contract("k_max must be at least 1"));
    }
    let mut gammas = Vec::new();
    let mut degenerate = Vec::new();
    let mut best: Option<(u64, RatioSample<S::Point>)> = None;
    for k in 1..=k_max {
        let (x, y) = generator(k)?;
        match gauge_ratio(space, sigma, &x, &y) {
            Ok(g) => {
                gammas.push((k, g));
                if best.as_ref().is_none_or(|(_, b)| g > b.value) {
                    best = Some((k, RatioSample { x, y, value: g }));
                }
            }
            Err(Error::DegeneratePair(_)) => degenerate.push(k),
            Err(e) => return Err(e),
        }
    }
    let (best_k, best) =
        best.ok_or_else(|| Error::EstimationFailed("every pair in the sequence is degenerate".into()))?;
    let monotone = gammas.windows(2).all(|w| w[1].1 >= w[0].1);
    Ok(SequenceReport { sigma, gammas, best, best_k, degenerate, monotone })
}
