use serde::{Deserialize, Serialize};

use super::ScoreDistribution;
use crate::regen::slack_ceil;

/// A basket of candidate labels the attacker believes contains the truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    /// Labels ordered by descending score.
    pub labels: Vec<u32>,
    /// Total score mass of the basket.
    pub likelihood: f64,
    /// Basket size relative to the reference set.
    pub rho: f64,
}

impl Hypothesis {
    pub fn contains(&self, label: u32) -> bool {
        self.labels.contains(&label)
    }
}

/// Basket size `⌈ρ·n⌉`, at least one and at most `n`.
pub fn basket_size(rho: f64, n: usize) -> usize {
    (slack_ceil(rho * n as f64).max(1.0) as usize).min(n)
}

/// The size-`n` label subset with the largest summed score.
///
/// Any maximizer consists of the `n` highest scores, so the subset is the
/// top-`n` by score with ties broken towards the lower label id.
pub fn hypothesize_topn(scores: &ScoreDistribution, n: usize) -> Hypothesis {
    let n = n.clamp(1, scores.len());
    let s = scores.as_slice();
    let mut order: Vec<u32> = (0..s.len() as u32).collect();
    order.sort_by(|&a, &b| s[b as usize].total_cmp(&s[a as usize]).then(a.cmp(&b)));
    order.truncate(n);
    let likelihood = order.iter().map(|&l| s[l as usize]).sum::<f64>().min(1.0);
    Hypothesis { labels: order, likelihood, rho: n as f64 / s.len() as f64 }
}
