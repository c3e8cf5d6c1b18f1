use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::experiment::{measure_utility, object_listing, original_planes, q2_or_worst, ExperimentResult, ObjectInfo};
use crate::attacker::{Attacker, AttackerProfile, Hypothesis, ScoreDistribution};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::plane::PlanePatch;
use crate::privacy::{check_rho, evaluate_privacy};
use crate::regen::{PrivilegeLevel, RegenSpec, Regenerator};
use crate::utility::MinMaxStats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateRequest {
    pub object_id: String,
    pub l: f64,
    #[serde(default)]
    pub seed: u64,
    pub attacker: AttackerProfile,
    pub rho1: f64,
    pub rho2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScore {
    pub label: u32,
    pub name: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedHypothesis {
    /// Basket members, highest score first.
    pub labels: Vec<LabelScore>,
    pub likelihood: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateResponse {
    pub object_id: String,
    pub l: f64,
    pub epoch: u32,
    pub seed: u64,
    pub attacker: AttackerProfile,
    pub points: Vec<[f64; 3]>,
    pub pi1: f64,
    pub pi2: f64,
    pub q1: f64,
    pub q2_static: f64,
    pub q2_dynamic: f64,
    pub chamfer: f64,
    pub plane_found: bool,
    pub super_hypothesis: RankedHypothesis,
    pub intra_hypothesis: RankedHypothesis,
}

/// Immutable state for serving evaluations: corpus, trained attackers and
/// the min-max statistics of a finished run.
pub struct ExperimentState {
    pub config: ExperimentConfig,
    pub corpus: Corpus,
    pub regenerator: Box<dyn Regenerator>,
    pub planes: Vec<PlanePatch>,
    pub attackers: BTreeMap<AttackerProfile, Attacker>,
    pub minmax: MinMaxStats,
}

impl ExperimentState {
    pub fn from_result(result: &ExperimentResult) -> Result<Self> {
        let attackers = result.attackers.iter().map(|a| (a.profile, a.attacker.clone())).collect();
        Self::assemble(result.config.clone(), result.corpus.clone(), attackers, result.minmax)
    }

    /// Loads a run directory written by the experiment.
    pub fn load(run_dir: &Path) -> Result<Self> {
        let config_path = run_dir.join("config.json");
        let text = fs::read_to_string(&config_path).map_err(|e| Error::io(&config_path, e))?;
        let config: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::json(&config_path, e))?;
        let corpus = config.load_corpus()?;
        let minmax = MinMaxStats::read(&run_dir.join("minmax_stats.json"))?;
        let mut attackers = BTreeMap::new();
        for profile in AttackerProfile::ALL {
            let path = run_dir.join(profile.name()).join("attacker.json");
            if path.exists() {
                let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                let a: Attacker = serde_json::from_str(&text).map_err(|e| Error::json(&path, e))?;
                attackers.insert(profile, a);
            }
        }
        Self::assemble(config, corpus, attackers, minmax)
    }

    pub fn assemble(
        config: ExperimentConfig,
        corpus: Corpus,
        attackers: BTreeMap<AttackerProfile, Attacker>,
        minmax: MinMaxStats,
    ) -> Result<Self> {
        let regenerator = config.build_regenerator()?;
        let planes = original_planes(&corpus, &config.ransac, config.seed)?;
        Ok(Self { config, corpus, regenerator, planes, attackers, minmax })
    }

    pub fn objects(&self) -> Vec<ObjectInfo> {
        object_listing(&self.corpus)
    }

    /// Regeneration of an object at privilege `l` under `seed`.
    pub fn regenerate(&self, object_id: &str, l: f64, seed: u64) -> Result<(RegenSpec, PointCloud)> {
        let idx = self.corpus.position(object_id).ok_or_else(|| Error::UnknownObject(object_id.into()))?;
        let spec = RegenSpec::from_level(PrivilegeLevel::new(l)?, self.regenerator.e_max(), seed);
        let o = &self.corpus.objects[idx];
        Ok((spec, self.regenerator.regenerate(&o.id, &o.cloud, &spec)?))
    }

    pub fn evaluate(&self, req: &EvaluateRequest) -> Result<EvaluateResponse> {
        let idx = self.corpus.position(&req.object_id).ok_or_else(|| Error::UnknownObject(req.object_id.clone()))?;
        PrivilegeLevel::new(req.l)?;
        check_rho(req.rho1)?;
        check_rho(req.rho2)?;
        let attacker =
            self.attackers.get(&req.attacker).ok_or_else(|| Error::AttackerNotTrained(req.attacker.to_string()))?;
        let (spec, regen) = self.regenerate(&req.object_id, req.l, req.seed)?;
        let o = &self.corpus.objects[idx];

        let m = measure_utility(&o.cloud, &self.planes[idx], &regen, &self.config.ransac, req.seed)?;
        let (q2_static, q2_dynamic) = q2_or_worst(&m, &self.minmax);

        let d = attacker.describe(&regen);
        let sigma1 = attacker.score_superclass(&d);
        let sigma2 = attacker.score_intraclass(o.super_class, &d);
        let p = evaluate_privacy(o.super_class, o.intra_class, &sigma1, &sigma2, req.rho1, req.rho2)?;

        let class_names = &self.corpus.class_names;
        let intra_names: BTreeMap<u32, &str> = self
            .corpus
            .objects
            .iter()
            .filter(|x| x.super_class == o.super_class)
            .map(|x| (x.intra_class, x.id.as_str()))
            .collect();
        Ok(EvaluateResponse {
            object_id: o.id.clone(),
            l: req.l,
            epoch: spec.epoch,
            seed: req.seed,
            attacker: req.attacker,
            points: regen.points().iter().map(|p| p.to_array()).collect(),
            pi1: p.pi1,
            pi2: p.pi2,
            q1: m.q1,
            q2_static,
            q2_dynamic,
            chamfer: m.chamfer,
            plane_found: m.components.is_some(),
            super_hypothesis: rank(&p.super_hypothesis, &sigma1, |l| class_names[l as usize].clone()),
            intra_hypothesis: rank(&p.intra_hypothesis, &sigma2, |l| intra_names[&l].to_string()),
        })
    }
}

fn rank(h: &Hypothesis, scores: &ScoreDistribution, name: impl Fn(u32) -> String) -> RankedHypothesis {
    RankedHypothesis {
        labels: h.labels.iter().map(|&l| LabelScore { label: l, name: name(l), score: scores.get(l) }).collect(),
        likelihood: h.likelihood,
        rho: h.rho,
    }
}

/// Keeps every `ceil(n / max)`-th point so at most `max` remain.
pub fn decimate(points: Vec<[f64; 3]>, max: Option<usize>) -> Vec<[f64; 3]> {
    match max {
        Some(m) if m > 0 && points.len() > m => {
            let step = points.len().div_ceil(m);
            points.into_iter().step_by(step).collect()
        }
        _ => points,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimation_caps_length() {
        let pts: Vec<[f64; 3]> = (0..10).map(|i| [i as f64, 0.0, 0.0]).collect();
        assert_eq!(decimate(pts.clone(), Some(3)).len(), 3);
        assert_eq!(decimate(pts.clone(), Some(4)).len(), 4);
        assert_eq!(decimate(pts.clone(), None).len(), 10);
        assert_eq!(decimate(pts, Some(50)).len(), 10);
    }
}
