use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate, write_summary, GroupStat, Metric, F};
use super::config::ExperimentConfig;
use crate::attacker::{
    build_reference_set, write_score_table, Attacker, AttackerProfile, Descriptor, ScoreDistribution, ScoreTable,
};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::geometry::{chamfer, PointCloud};
use crate::plane::{plane_error_components, ransac_horizontal_plane, PlaneErrorComponents, PlanePatch, RansacParams};
use crate::privacy::{baseline_privacy, evaluate_privacy, write_csv, write_privacy_records, Baseline, PrivacyRecord};
use crate::regen::{RegenSpec, Regenerator};
use crate::seed::{self, domain};
use crate::utility::{auc_privacy_utility, fit_minmax, q1_bbox, q2, write_utility_records, MinMaxStats, UtilityRecord};

/// One test regeneration: an object at an even epoch and a replicate index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSample {
    pub query_id: String,
    pub object_index: usize,
    pub epoch: u32,
    pub replicate: usize,
    pub seed: u64,
}

impl TestSample {
    pub fn level(&self, e_max: u32) -> f64 {
        self.epoch as f64 / e_max as f64
    }
}

/// Every even epoch in `(0, e_max]` for every object, `replicates` times,
/// under seeds from the test domain.
pub fn test_samples(corpus: &Corpus, e_max: u32, replicates: usize, global_seed: u64) -> Vec<TestSample> {
    let mut out = Vec::new();
    for (idx, o) in corpus.objects.iter().enumerate() {
        for epoch in (2..=e_max).step_by(2) {
            for r in 0..replicates {
                out.push(TestSample {
                    query_id: format!("{}/e{epoch}/r{r}", o.id),
                    object_index: idx,
                    epoch,
                    replicate: r,
                    seed: seed::mix(&[global_seed, domain::TEST, idx as u64, epoch as u64, r as u64]),
                });
            }
        }
    }
    out
}

/// Regenerates every test sample, in sample order.
pub fn build_test_set(
    corpus: &Corpus,
    regenerator: &dyn Regenerator,
    config: &ExperimentConfig,
) -> Result<Vec<(TestSample, PointCloud)>> {
    test_samples(corpus, config.e_max, config.replicates, config.seed)
        .into_par_iter()
        .map(|s| {
            let cloud = regenerate_sample(corpus, regenerator, config.e_max, &s)?;
            Ok((s, cloud))
        })
        .collect()
}

fn regenerate_sample(corpus: &Corpus, regenerator: &dyn Regenerator, e_max: u32, s: &TestSample) -> Result<PointCloud> {
    let o = &corpus.objects[s.object_index];
    let spec = RegenSpec::at_epoch(s.epoch, e_max, s.seed)?;
    regenerator.regenerate(&o.id, &o.cloud, &spec).map_err(|e| e.for_object(&o.id))
}

pub fn original_plane(
    cloud: &PointCloud,
    ransac: &RansacParams,
    global_seed: u64,
    object_index: usize,
) -> Result<PlanePatch> {
    ransac_horizontal_plane(cloud, ransac, seed::mix(&[global_seed, domain::PLANE, object_index as u64]))
}

pub fn original_planes(corpus: &Corpus, ransac: &RansacParams, global_seed: u64) -> Result<Vec<PlanePatch>> {
    corpus
        .objects
        .par_iter()
        .enumerate()
        .map(|(i, o)| original_plane(&o.cloud, ransac, global_seed, i).map_err(|e| e.for_object(&o.id)))
        .collect()
}

/// Raw utility of one regeneration; `components` is `None` when no
/// horizontal plane is found in the regeneration.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityMeasure {
    pub q1: f64,
    pub chamfer: f64,
    pub components: Option<PlaneErrorComponents>,
}

pub fn measure_utility(
    original: &PointCloud,
    original_plane: &PlanePatch,
    regen: &PointCloud,
    ransac: &RansacParams,
    regen_seed: u64,
) -> Result<UtilityMeasure> {
    let components = match ransac_horizontal_plane(regen, ransac, seed::mix(&[regen_seed, domain::PLANE])) {
        Ok(p) => Some(plane_error_components(original_plane, &p)),
        Err(Error::NoHorizontalPlane { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(UtilityMeasure { q1: q1_bbox(original, regen), chamfer: chamfer(original, regen), components })
}

/// `(Q2 static, Q2 dynamic)`; a regeneration without a plane scores 0.
pub fn q2_or_worst(m: &UtilityMeasure, stats: &MinMaxStats) -> (f64, f64) {
    m.components.as_ref().map_or((0.0, 0.0), |c| q2(c, stats))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoSweepRecord {
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
}

#[derive(Debug, Clone)]
pub struct AttackerResult {
    pub profile: AttackerProfile,
    pub attacker: Attacker,
    pub privacy_records: Vec<PrivacyRecord>,
    pub rho_sweep: Vec<RhoSweepRecord>,
    pub super_scores: ScoreTable,
    pub intra_scores: ScoreTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub attacker: AttackerProfile,
    pub entries: Vec<Baseline>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucEntry {
    pub utility: String,
    pub privacy: String,
    /// `None` when the curve is degenerate.
    pub auc: Option<f64>,
    /// `(utility, privacy)` per privilege bin.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucTable {
    pub attacker: AttackerProfile,
    pub rho1: f64,
    pub rho2: f64,
    pub bins: Vec<f64>,
    pub entries: Vec<AucEntry>,
}

impl AucTable {
    pub fn get(&self, utility: &str, privacy: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.utility == utility && e.privacy == privacy).and_then(|e| e.auc)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub corpus: Corpus,
    pub samples: Vec<TestSample>,
    pub utility_records: Vec<UtilityRecord>,
    pub minmax: MinMaxStats,
    pub attackers: Vec<AttackerResult>,
    pub baseline: BaselineReport,
    pub auc: AucTable,
}

impl ExperimentResult {
    pub fn attacker(&self, profile: AttackerProfile) -> Option<&AttackerResult> {
        self.attackers.iter().find(|a| a.profile == profile)
    }

    /// Per-bin means of a utility field, bins ascending.
    pub fn utility_by_bin(&self, f: impl Fn(&UtilityRecord) -> f64) -> Vec<(f64, f64)> {
        by_bin(&self.config, &self.utility_records, |r| r.l, f)
    }

    pub fn privacy_by_bin(&self, profile: AttackerProfile, f: impl Fn(&PrivacyRecord) -> f64) -> Vec<(f64, f64)> {
        self.attacker(profile).map_or_else(Vec::new, |a| by_bin(&self.config, &a.privacy_records, |r| r.l, f))
    }
}

fn by_bin<R>(cfg: &ExperimentConfig, rows: &[R], l: impl Fn(&R) -> f64, f: impl Fn(&R) -> f64) -> Vec<(f64, f64)> {
    let mut bins: BTreeMap<F, (f64, usize)> = BTreeMap::new();
    for r in rows {
        let e = bins.entry(F(cfg.privilege_bin(l(r)))).or_default();
        e.0 += f(r);
        e.1 += 1;
    }
    bins.into_iter().map(|(k, (s, n))| (k.0, s / n as f64)).collect()
}

struct TestFeatures {
    descriptor: Descriptor,
    utility: UtilityMeasure,
}

/// Runs the whole pipeline; writes artifacts when `output_dir` is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let corpus = config.load_corpus().map_err(|e| e.in_stage("corpus"))?;
    let labels = corpus.label_space();
    labels.validate().map_err(|e| e.in_stage("corpus"))?;
    let regenerator = config.build_regenerator().map_err(|e| e.in_stage("regenerator"))?;
    info!("corpus: {} objects in {} classes", corpus.objects.len(), corpus.class_names.len());

    let planes = original_planes(&corpus, &config.ransac, config.seed).map_err(|e| e.in_stage("utility"))?;

    let samples = test_samples(&corpus, config.e_max, config.replicates, config.seed);
    info!("test set: {} regenerations", samples.len());
    let features: Vec<TestFeatures> = samples
        .par_iter()
        .map(|s| {
            let cloud = regenerate_sample(&corpus, regenerator.as_ref(), config.e_max, s)?;
            let o = &corpus.objects[s.object_index];
            Ok(TestFeatures {
                descriptor: config.attacker.describe(&cloud),
                utility: measure_utility(&o.cloud, &planes[s.object_index], &cloud, &config.ransac, s.seed)?,
            })
        })
        .collect::<Result<_>>()
        .map_err(|e: Error| e.in_stage("test-set"))?;

    let minmax =
        fit_minmax(features.iter().filter_map(|f| f.utility.components.as_ref())).map_err(|e| e.in_stage("utility"))?;
    let utility_records: Vec<UtilityRecord> = samples
        .iter()
        .zip(&features)
        .map(|(s, f)| {
            let (q2_static, q2_dynamic) = q2_or_worst(&f.utility, &minmax);
            UtilityRecord {
                query_id: s.query_id.clone(),
                l: s.level(config.e_max),
                epoch: s.epoch,
                q1: f.utility.q1,
                q2_static,
                q2_dynamic,
                chamfer: f.utility.chamfer,
            }
        })
        .collect();

    let train = |profile: AttackerProfile| -> Result<Attacker> {
        let reference = build_reference_set(
            profile,
            &corpus,
            regenerator.as_ref(),
            &config.augment,
            config.count_per_object,
            config.seed,
        )?;
        Attacker::train(profile, &reference, &labels, config.attacker)
    };

    let (rho1, rho2) = config.primary_rho();
    let mut attackers = Vec::new();
    for &profile in &config.profiles {
        info!("attacker {profile}: training");
        let attacker = train(profile).map_err(|e| e.in_stage("train"))?;
        let result = evaluate_attacker(config, &corpus, &samples, &features, attacker, rho1, rho2)
            .map_err(|e| e.in_stage("privacy"))?;
        attackers.push(result);
    }

    let baseline_attacker = match attackers.iter().find(|a| a.profile == AttackerProfile::J1) {
        Some(a) => a.attacker.clone(),
        None => train(AttackerProfile::J1).map_err(|e| e.in_stage("train"))?,
    };
    let mut entries = Vec::new();
    for &r1 in &config.rho1_grid {
        for &r2 in &config.rho2_grid {
            entries.push(baseline_privacy(&baseline_attacker, &corpus, r1, r2).map_err(|e| e.in_stage("baseline"))?);
        }
    }
    let baseline = BaselineReport { attacker: AttackerProfile::J1, entries };

    let mut result = ExperimentResult {
        config: config.clone(),
        corpus,
        samples,
        utility_records,
        minmax,
        attackers,
        baseline,
        auc: AucTable { attacker: AttackerProfile::J1, rho1, rho2, bins: Vec::new(), entries: Vec::new() },
    };
    result.auc = auc_table(&result);

    if let Some(dir) = &config.output_dir {
        write_outputs(&result, dir).map_err(|e| e.in_stage("export"))?;
    }
    Ok(result)
}

fn evaluate_attacker(
    config: &ExperimentConfig,
    corpus: &Corpus,
    samples: &[TestSample],
    features: &[TestFeatures],
    attacker: Attacker,
    rho1: f64,
    rho2: f64,
) -> Result<AttackerResult> {
    let scored: Vec<(ScoreDistribution, ScoreDistribution)> = samples
        .par_iter()
        .zip(features)
        .map(|(s, f)| {
            let k = corpus.objects[s.object_index].super_class;
            (attacker.score_superclass(&f.descriptor), attacker.score_intraclass(k, &f.descriptor))
        })
        .collect();

    let mut privacy_records = Vec::with_capacity(samples.len());
    let mut rho_sweep = Vec::new();
    let mut super_scores = ScoreTable::new();
    let mut intra_scores = ScoreTable::new();
    for (s, (sigma1, sigma2)) in samples.iter().zip(scored) {
        let o = &corpus.objects[s.object_index];
        let l = s.level(config.e_max);
        let p = evaluate_privacy(o.super_class, o.intra_class, &sigma1, &sigma2, rho1, rho2)?;
        privacy_records.push(PrivacyRecord {
            query_id: s.query_id.clone(),
            super_class: o.super_class,
            intra_class: o.intra_class,
            l,
            epoch: s.epoch,
            rho1,
            rho2,
            pi1: p.pi1,
            pi2: p.pi2,
            top1_super_hit: p.top1_super_hit,
            top1_intra_hit: p.top1_intra_hit,
        });
        for &r1 in &config.rho1_grid {
            for &r2 in &config.rho2_grid {
                let p = evaluate_privacy(o.super_class, o.intra_class, &sigma1, &sigma2, r1, r2)?;
                rho_sweep.push(RhoSweepRecord {
                    query_id: s.query_id.clone(),
                    super_class: o.super_class,
                    intra_class: o.intra_class,
                    l,
                    epoch: s.epoch,
                    rho1: r1,
                    rho2: r2,
                    pi1: p.pi1,
                    pi2: p.pi2,
                });
            }
        }
        super_scores.insert(s.query_id.clone(), sigma1);
        intra_scores.insert(s.query_id.clone(), sigma2);
    }
    Ok(AttackerResult { profile: attacker.profile, attacker, privacy_records, rho_sweep, super_scores, intra_scores })
}

const UTILITIES: [&str; 4] = ["q1", "q2_static", "q2_dynamic", "chamfer"];
const PRIVACIES: [&str; 2] = ["pi1", "pi2"];

fn utility_field(name: &str, r: &UtilityRecord) -> f64 {
    match name {
        "q1" => r.q1,
        "q2_static" => r.q2_static,
        "q2_dynamic" => r.q2_dynamic,
        _ => r.chamfer,
    }
}

/// Curves through per-bin means of the J1 attacker (or the first one run).
/// Chamfer is divided by its largest plotted value.
fn auc_table(result: &ExperimentResult) -> AucTable {
    let (rho1, rho2) = result.config.primary_rho();
    let profile = result.attacker(AttackerProfile::J1).unwrap_or(&result.attackers[0]).profile;
    let mut entries = Vec::new();
    let mut bins = Vec::new();
    for u in UTILITIES {
        let mut utility = result.utility_by_bin(|r| utility_field(u, r));
        if u == "chamfer" {
            let max = utility.iter().map(|p| p.1).fold(0.0, f64::max);
            if max > 0.0 {
                utility.iter_mut().for_each(|p| p.1 /= max);
            }
        }
        bins = utility.iter().map(|p| p.0).collect();
        for pv in PRIVACIES {
            let privacy = result.privacy_by_bin(profile, |r| if pv == "pi1" { r.pi1 } else { r.pi2 });
            let points: Vec<(f64, f64)> = utility.iter().zip(&privacy).map(|(u, p)| (u.1, p.1)).collect();
            entries.push(AucEntry {
                utility: u.into(),
                privacy: pv.into(),
                auc: auc_privacy_utility(&points).ok(),
                points,
            });
        }
    }
    AucTable { attacker: profile, rho1, rho2, bins, entries }
}

#[derive(Debug, Serialize)]
struct AttackerSummary<'a> {
    profile: AttackerProfile,
    epoch_band: Option<(u32, u32)>,
    rho1: f64,
    rho2: f64,
    records: usize,
    overall: &'a [GroupStat],
}

fn privacy_metrics() -> [Metric<'static, PrivacyRecord>; 4] {
    [
        ("pi1", &|r: &PrivacyRecord| r.pi1),
        ("pi2", &|r: &PrivacyRecord| r.pi2),
        ("top1_super_accuracy", &|r: &PrivacyRecord| r.top1_super_hit as u8 as f64),
        ("top1_intra_accuracy", &|r: &PrivacyRecord| r.top1_intra_hit as u8 as f64),
    ]
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<()> {
    let cfg = &result.config;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    cfg.write(&dir.join("config.json"))?;
    write_json(&dir.join("objects.json"), &object_listing(&result.corpus))?;
    write_utility_records(&dir.join("utility_records.csv"), &result.utility_records)?;
    result.minmax.write(&dir.join("minmax_stats.json"))?;
    write_json(&dir.join("baseline.json"), &result.baseline)?;
    write_json(&dir.join("auc_table.json"), &result.auc)?;

    let bin = |l: f64| F(cfg.privilege_bin(l));
    let umetrics: [Metric<'_, UtilityRecord>; 4] = [
        ("q1", &|r| r.q1),
        ("q2_static", &|r| r.q2_static),
        ("q2_dynamic", &|r| r.q2_dynamic),
        ("chamfer", &|r| r.chamfer),
    ];
    write_summary(&dir.join("utility_by_l.csv"), &["l"], &aggregate(&result.utility_records, |r| bin(r.l), &umetrics))?;

    for a in &result.attackers {
        let adir = dir.join(a.profile.name());
        fs::create_dir_all(&adir).map_err(|e| Error::io(&adir, e))?;
        write_json(&adir.join("attacker.json"), &a.attacker)?;
        write_privacy_records(&adir.join("privacy_records.csv"), &a.privacy_records)?;
        write_csv(&adir.join("rho_sweep.csv"), &a.rho_sweep)?;
        write_score_table(&adir.join("super_scores.json"), &a.super_scores)?;
        write_score_table(&adir.join("intra_scores.json"), &a.intra_scores)?;
        let metrics = privacy_metrics();
        let rows = &a.privacy_records;
        write_summary(
            &adir.join("summary_by_super_l.csv"),
            &["super", "l"],
            &aggregate(rows, |r| (r.super_class, bin(r.l)), &metrics),
        )?;
        write_summary(&adir.join("summary_by_l.csv"), &["l"], &aggregate(rows, |r| bin(r.l), &metrics))?;
        write_summary(&adir.join("summary_by_epoch.csv"), &["epoch"], &aggregate(rows, |r| r.epoch, &metrics))?;
        let sweep_metrics: [Metric<'_, RhoSweepRecord>; 2] = [("pi1", &|r| r.pi1), ("pi2", &|r| r.pi2)];
        write_summary(
            &adir.join("rho_sweep_summary.csv"),
            &["rho1", "rho2"],
            &aggregate(&a.rho_sweep, |r| (F(r.rho1), F(r.rho2)), &sweep_metrics),
        )?;
        let overall = aggregate(rows, |_| (), &metrics);
        write_json(
            &adir.join("summary.json"),
            &AttackerSummary {
                profile: a.profile,
                epoch_band: a.profile.epoch_band(cfg.e_max),
                rho1: result.auc.rho1,
                rho2: result.auc.rho2,
                records: rows.len(),
                overall: &overall,
            },
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInfo {
    pub id: String,
    pub class: String,
    pub super_class: u32,
    pub intra_class: u32,
    pub points: usize,
}

pub fn object_listing(corpus: &Corpus) -> Vec<ObjectInfo> {
    corpus
        .objects
        .iter()
        .map(|o| ObjectInfo {
            id: o.id.clone(),
            class: corpus.class_names[o.super_class as usize].clone(),
            super_class: o.super_class,
            intra_class: o.intra_class,
            points: o.cloud.len(),
        })
        .collect()
}
