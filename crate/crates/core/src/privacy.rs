//! Likelihood functions and the super-class / intra-class privacy metrics.
//!
//! Both metrics are evaluated exactly as their defining expressions read:
//! a confident, correct basket yields a value near 1.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attacker::{basket_size, hypothesize_topn, Attacker, Hypothesis, ScoreDistribution};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Total score mass placed on `subset`.
pub fn likelihood(scores: &ScoreDistribution, subset: &[u32]) -> f64 {
    subset.iter().map(|&l| scores.get(l)).sum()
}

/// `δ·L + (1 − δ)·(1 − L)` with `δ` the membership of the true label.
pub fn pi1(true_super: u32, hypothesis: &Hypothesis) -> f64 {
    expected_error(hypothesis.contains(true_super), hypothesis.likelihood)
}

fn expected_error(member: bool, l: f64) -> f64 {
    let delta = if member { 1.0 } else { 0.0 };
    delta * l + (1.0 - delta) * (1.0 - l)
}

/// `Σ_{k≠kᵢ} σ1(k) + σ1(kᵢ)·[δ·L2 + (1 − δ)·(1 − L2)]`, where the intra-class
/// basket is formed under the true super-class `kᵢ`.
pub fn pi2(true_super: u32, true_intra: u32, sigma1: &ScoreDistribution, intra_hypothesis: &Hypothesis) -> f64 {
    let elsewhere: f64 = (0..sigma1.len() as u32).filter(|&k| k != true_super).map(|k| sigma1.get(k)).sum();
    let inner = expected_error(intra_hypothesis.contains(true_intra), intra_hypothesis.likelihood);
    (elsewhere + sigma1.get(true_super) * inner).clamp(0.0, 1.0)
}

/// Everything the attacker concludes about one query at fixed basket ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyOutcome {
    pub pi1: f64,
    pub pi2: f64,
    pub top1_super_hit: bool,
    pub top1_intra_hit: bool,
    pub super_hypothesis: Hypothesis,
    pub intra_hypothesis: Hypothesis,
}

/// `sigma2` is the intra-class distribution under the true super-class.
pub fn evaluate_privacy(
    true_super: u32,
    true_intra: u32,
    sigma1: &ScoreDistribution,
    sigma2: &ScoreDistribution,
    rho1: f64,
    rho2: f64,
) -> Result<PrivacyOutcome> {
    check_rho(rho1)?;
    check_rho(rho2)?;
    let super_hypothesis = hypothesize_topn(sigma1, basket_size(rho1, sigma1.len()));
    let intra_hypothesis = hypothesize_topn(sigma2, basket_size(rho2, sigma2.len()));
    Ok(PrivacyOutcome {
        pi1: pi1(true_super, &super_hypothesis),
        pi2: pi2(true_super, true_intra, sigma1, &intra_hypothesis),
        top1_super_hit: sigma1.argmax() == true_super,
        top1_intra_hit: sigma2.argmax() == true_intra,
        super_hypothesis,
        intra_hypothesis,
    })
}

pub fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("basket ratio {rho} outside (0, 1]")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyRecord {
    pub query_id: String,
    #[serde(rename = "super")]
    pub super_class: u32,
    #[serde(rename = "intra")]
    pub intra_class: u32,
    pub l: f64,
    pub epoch: u32,
    pub rho1: f64,
    pub rho2: f64,
    pub pi1: f64,
    pub pi2: f64,
    pub top1_super_hit: bool,
    pub top1_intra_hit: bool,
}

pub fn write_privacy_records(path: &Path, records: &[PrivacyRecord]) -> Result<()> {
    write_csv(path, records)
}

pub fn read_privacy_records(path: &Path) -> Result<Vec<PrivacyRecord>> {
    read_csv(path)
}

pub(crate) fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Mean privacy and top-1 accuracy on unmodified originals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub rho1: f64,
    pub rho2: f64,
    pub count: usize,
    pub pi1: f64,
    pub pi2: f64,
    pub top1_super_accuracy: f64,
    pub top1_intra_accuracy: f64,
}

pub fn baseline_privacy(attacker: &Attacker, corpus: &Corpus, rho1: f64, rho2: f64) -> Result<Baseline> {
    if corpus.objects.is_empty() {
        return Err(Error::InvalidConfig("baseline over an empty corpus".into()));
    }
    let outcomes: Vec<PrivacyOutcome> = corpus
        .objects
        .par_iter()
        .map(|o| {
            let d = attacker.describe(&o.cloud);
            let sigma1 = attacker.score_superclass(&d);
            let sigma2 = attacker.score_intraclass(o.super_class, &d);
            evaluate_privacy(o.super_class, o.intra_class, &sigma1, &sigma2, rho1, rho2)
        })
        .collect::<Result<_>>()?;
    let n = outcomes.len() as f64;
    let mean = |f: &dyn Fn(&PrivacyOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / n;
    Ok(Baseline {
        rho1,
        rho2,
        count: outcomes.len(),
        pi1: mean(&|o| o.pi1),
        pi2: mean(&|o| o.pi2),
        top1_super_accuracy: mean(&|o| o.top1_super_hit as u8 as f64),
        top1_intra_accuracy: mean(&|o| o.top1_intra_hit as u8 as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(v: Vec<f64>) -> ScoreDistribution {
        ScoreDistribution::new(v).unwrap()
    }

    fn basket(labels: Vec<u32>, likelihood: f64, n: usize) -> Hypothesis {
        let rho = labels.len() as f64 / n as f64;
        Hypothesis { labels, likelihood, rho }
    }

    #[test]
    fn likelihood_examples() {
        let u = ScoreDistribution::uniform(10);
        assert!((likelihood(&u, &[1, 4, 7]) - 0.3).abs() < 1e-15);
        assert_eq!(likelihood(&u, &[]), 0.0);
        let all: Vec<u32> = (0..10).collect();
        assert!((likelihood(&u, &all) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pi1_examples() {
        assert!((pi1(2, &basket(vec![2], 0.1, 10)) - 0.1).abs() < 1e-15);
        assert!((pi1(2, &basket(vec![3], 0.1, 10)) - 0.9).abs() < 1e-15);
        assert_eq!(pi1(2, &basket(vec![2, 3], 1.0, 10)), 1.0);
    }

    #[test]
    fn pi2_examples() {
        let mut s = vec![0.0; 10];
        s[3] = 1.0;
        let h = basket(vec![0], 0.5, 4);
        assert_eq!(pi2(0, 0, &dist(s), &h), 1.0);

        let sigma1 = ScoreDistribution::uniform(10);
        let sigma2 = ScoreDistribution::uniform(100);
        let h = hypothesize_topn(&sigma2, 1);
        assert!((pi2(0, 0, &sigma1, &h) - 0.901).abs() < 1e-12);

        let mut s = vec![0.0; 10];
        s[0] = 1.0;
        assert_eq!(pi2(0, 0, &dist(s), &basket(vec![0], 1.0, 4)), 1.0);
    }

    #[test]
    fn full_baskets_give_unit_privacy() {
        let sigma1 = dist(vec![0.1, 0.6, 0.3]);
        let sigma2 = dist(vec![0.05, 0.15, 0.7, 0.1]);
        let o = evaluate_privacy(0, 1, &sigma1, &sigma2, 1.0, 1.0).unwrap();
        assert!((o.pi1 - 1.0).abs() <= 1e-12);
        assert!((o.pi2 - 1.0).abs() <= 1e-12);
        assert!(!o.top1_super_hit);
        assert!(evaluate_privacy(0, 1, &sigma1, &sigma2, 0.0, 1.0).is_err());
        assert!(evaluate_privacy(0, 1, &sigma1, &sigma2, 0.5, 1.5).is_err());
    }

    #[test]
    fn csv_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let r = PrivacyRecord {
            query_id: "table_00/e2/r0".into(),
            super_class: 0,
            intra_class: 1,
            l: 0.5,
            epoch: 30,
            rho1: 0.25,
            rho2: 0.125,
            pi1: 0.75,
            pi2: 0.5,
            top1_super_hit: true,
            top1_intra_hit: false,
        };
        write_privacy_records(&path, std::slice::from_ref(&r)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("query_id,super,intra,l,epoch,rho1,rho2,pi1,pi2,top1_super_hit,top1_intra_hit\n"));
        assert_eq!(read_privacy_records(&path).unwrap(), vec![r]);
    }
}
