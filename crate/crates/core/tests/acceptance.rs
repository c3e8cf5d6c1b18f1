//! Acceptance criteria, one line of output per criterion.
//!
//! Runs with a custom harness so that every criterion reports even when an
//! earlier one fails; the process exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use pcpriv_core::attacker::{hypothesize_topn, AttackerProfile, ScoreDistribution};
use pcpriv_core::geometry::{chamfer, iou, Aabb, PointCloud, Vec3};
use pcpriv_core::harness::{run_experiment, ExperimentConfig, ExperimentResult};
use pcpriv_core::plane::{ransac_horizontal_plane, RansacParams};
use pcpriv_core::seed;
use pcpriv_core::utility::spearman;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde_json::Value;

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, fail: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(fail)
    }
}

fn random_cloud(rng: &mut impl Rng, n: usize) -> PointCloud {
    let pts = (0..n)
        .map(|_| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    PointCloud::new(pts).unwrap()
}

fn brute_chamfer(a: &[Vec3], b: &[Vec3]) -> f64 {
    let mut total = 0.0;
    for (from, to) in [(a, b), (b, a)] {
        let mut sum = 0.0;
        for p in from {
            let mut best = f64::INFINITY;
            for q in to {
                let (dx, dy, dz) = (p.x - q.x, p.y - q.y, p.z - q.z);
                let d = dx * dx + dy * dy + dz * dz;
                if d < best {
                    best = d;
                }
            }
            sum += best;
        }
        total += sum;
    }
    total
}

fn chamfer_oracle() -> Outcome {
    let mut rng = seed::rng(11);
    let pairs: Vec<(PointCloud, PointCloud)> =
        (0..200).map(|_| (random_cloud(&mut rng, 512), random_cloud(&mut rng, 512))).collect();
    let start = Instant::now();
    let mut mismatches = 0;
    for (a, b) in &pairs {
        if chamfer(a, b).to_bits() != brute_chamfer(a.points(), b.points()).to_bits() {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        mismatches == 0 && elapsed < Duration::from_secs(5),
        format!("200 pairs bit-identical in {elapsed:.2?}"),
        format!("{mismatches} mismatches, {elapsed:.2?}"),
    )
}

/// Best size-`n` subset by exhaustive enumeration over integer weights;
/// among equal sums the lexicographically smallest sorted id list wins.
fn enumerate_best(weights: &[u64], n: usize) -> Vec<u32> {
    let mut best: Option<(u64, Vec<u32>)> = None;
    for mask in 0u32..(1 << weights.len()) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let ids: Vec<u32> = (0..weights.len() as u32).filter(|i| mask & (1 << i) != 0).collect();
        let sum: u64 = ids.iter().map(|&i| weights[i as usize]).sum();
        let better = match &best {
            None => true,
            Some((s, b)) => sum > *s || (sum == *s && ids < *b),
        };
        if better {
            best = Some((sum, ids));
        }
    }
    best.unwrap().1
}

fn hypothesis_oracle() -> Outcome {
    let mut rng = seed::rng(12);
    let mut checked = 0;
    for v in 0..1000 {
        let len = rng.random_range(1..=10);
        let cap: u64 = if v % 2 == 0 { 4 } else { 1_000_000 };
        let mut weights: Vec<u64> = (0..len).map(|_| rng.random_range(0..=cap)).collect();
        if weights.iter().all(|&w| w == 0) {
            weights[0] = 1;
        }
        let total: u64 = weights.iter().sum();
        let scores = ScoreDistribution::new(weights.iter().map(|&w| w as f64 / total as f64).collect()).unwrap();
        for n in 1..=len {
            let h = hypothesize_topn(&scores, n);
            let mut got = h.labels.clone();
            got.sort_unstable();
            let want = enumerate_best(&weights, n);
            let want_l = want.iter().map(|&i| weights[i as usize]).sum::<u64>() as f64 / total as f64;
            if got != want || (h.likelihood - want_l).abs() > 1e-12 || h.rho * len as f64 != n as f64 {
                return Err(format!("vector {v}, n={n}: got {got:?}, expected {want:?}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (vector, n) cases match exhaustive enumeration"))
}

fn iou_oracle() -> Outcome {
    let mut rng = seed::rng(13);
    let boxes: Vec<(Aabb, Aabb, u64)> = (0..100)
        .map(|i| {
            let mut b = || {
                let min =
                    Vec3::new(rng.random_range(-1.0..0.5), rng.random_range(-1.0..0.5), rng.random_range(-1.0..0.5));
                let ext = Vec3::new(rng.random_range(0.1..1.0), rng.random_range(0.1..1.0), rng.random_range(0.1..1.0));
                Aabb::new(min, min + ext).unwrap()
            };
            (b(), b(), 1000 + i)
        })
        .collect();
    let worst = boxes
        .par_iter()
        .map(|(a, b, s)| {
            let hull = a.hull(b);
            let ext = hull.extent();
            let mut rng = seed::rng(*s);
            let (mut both, mut either) = (0u64, 0u64);
            for _ in 0..1_000_000 {
                let p = Vec3::new(
                    hull.min.x + ext.x * rng.random::<f64>(),
                    hull.min.y + ext.y * rng.random::<f64>(),
                    hull.min.z + ext.z * rng.random::<f64>(),
                );
                let (ia, ib) = (a.contains(p), b.contains(p));
                both += (ia && ib) as u64;
                either += (ia || ib) as u64;
            }
            let mc = both as f64 / either as f64;
            (iou(a, b) - mc).abs()
        })
        .reduce(|| 0.0, f64::max);
    check(worst <= 0.01, format!("max |analytic - MC| = {worst:.5}"), format!("max deviation {worst:.5} > 0.01"))
}

fn ransac_recovery() -> Outcome {
    let params = RansacParams::default();
    let successes = (0..100u64)
        .filter(|&trial| {
            let mut rng = seed::rng(5000 + trial);
            let noise = Normal::new(0.0, 0.005).unwrap();
            let tilt = rng.random_range(0.0..8f64).to_radians();
            let azimuth = rng.random_range(0.0..std::f64::consts::TAU);
            let normal = Vec3::new(tilt.sin() * azimuth.cos(), tilt.sin() * azimuth.sin(), tilt.cos());
            let (u, v) = {
                let u = normal.cross(Vec3::new(1.0, 0.0, 0.0)).normalized().unwrap();
                (u, normal.cross(u))
            };
            let d = rng.random_range(-0.6..0.6);
            let n = 512;
            let inliers = n * 4 / 5;
            let mut pts = Vec::with_capacity(n);
            for _ in 0..inliers {
                let (a, b) = (rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8));
                pts.push(normal * (d + noise.sample(&mut rng)) + u * a + v * b);
            }
            for _ in inliers..n {
                pts.push(Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ));
            }
            let Ok(patch) = ransac_horizontal_plane(&PointCloud::new(pts).unwrap(), &params, trial) else {
                return false;
            };
            let angle = patch.unit_normal.dot(normal).clamp(-1.0, 1.0).acos().to_degrees();
            angle <= 2.0 && (patch.distance() - d).abs() <= 0.01
        })
        .count();
    check(
        successes >= 95,
        format!("{successes}/100 trials recovered"),
        format!("only {successes}/100 trials recovered"),
    )
}

struct DeskRun {
    result: ExperimentResult,
    dir: PathBuf,
    elapsed: Duration,
}

fn desk_run(dir: &Path) -> Result<DeskRun, String> {
    let config = ExperimentConfig { output_dir: Some(dir.to_path_buf()), ..ExperimentConfig::default() };
    let start = Instant::now();
    let result = run_experiment(&config).map_err(|e| format!("desk run failed: {e}"))?;
    Ok(DeskRun { result, dir: dir.to_path_buf(), elapsed: start.elapsed() })
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// `label → score` for every query of a score table file.
fn score_table(path: &Path) -> BTreeMap<String, Vec<f64>> {
    let Value::Object(map) = read_json(path) else { panic!("score table is not an object") };
    map.into_iter()
        .map(|(q, v)| {
            let Value::Object(scores) = v else { panic!("scores for {q} are not an object") };
            let mut pairs: Vec<(u32, f64)> =
                scores.into_iter().map(|(k, s)| (k.parse().unwrap(), s.as_f64().unwrap())).collect();
            pairs.sort_by_key(|p| p.0);
            (q, pairs.into_iter().map(|p| p.1).collect())
        })
        .collect()
}

fn basket_len(rho: f64, n: usize) -> usize {
    ((rho * n as f64 - 1e-9).ceil() as usize).clamp(1, n)
}

/// Exhaustive best basket; ties resolved towards the smallest sorted id list.
fn best_basket(scores: &[f64], size: usize) -> Vec<usize> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 0u32..(1 << scores.len()) {
        if mask.count_ones() as usize != size {
            continue;
        }
        let ids: Vec<usize> = (0..scores.len()).filter(|i| mask & (1 << i) != 0).collect();
        let mut by_score = ids.clone();
        by_score.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        let sum: f64 = by_score.iter().map(|&i| scores[i]).sum();
        let better = match &best {
            None => true,
            Some((s, b)) => sum > *s || (sum == *s && ids < *b),
        };
        if better {
            best = Some((sum, ids));
        }
    }
    best.unwrap().1
}

fn transcribed_pi(sigma1: &[f64], sigma2: &[f64], k: usize, m: usize, rho1: f64, rho2: f64) -> (f64, f64) {
    let gamma = best_basket(sigma1, basket_len(rho1, sigma1.len()));
    let eta = best_basket(sigma2, basket_len(rho2, sigma2.len()));
    let l1: f64 = gamma.iter().map(|&i| sigma1[i]).sum();
    let l2: f64 = eta.iter().map(|&i| sigma2[i]).sum();
    let d1 = if gamma.contains(&k) { 1.0 } else { 0.0 };
    let d2 = if eta.contains(&m) { 1.0 } else { 0.0 };
    let pi1 = d1 * l1 + (1.0 - d1) * (1.0 - l1);
    let others: f64 = (0..sigma1.len()).filter(|&j| j != k).map(|j| sigma1[j]).sum();
    let pi2 = others + sigma1[k] * (d2 * l2 + (1.0 - d2) * (1.0 - l2));
    (pi1, pi2)
}

fn csv_rows(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| headers.iter().zip(rec.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        .collect()
}

fn pi_oracle(run: &DeskRun) -> Outcome {
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for profile in &run.result.config.profiles {
        let adir = run.dir.join(profile.name());
        let s1 = score_table(&adir.join("super_scores.json"));
        let s2 = score_table(&adir.join("intra_scores.json"));
        for file in ["privacy_records.csv", "rho_sweep.csv"] {
            for row in csv_rows(&adir.join(file)) {
                let q = &row["query_id"];
                let f = |c: &str| row[c].parse::<f64>().unwrap();
                let k: usize = row["super"].parse().unwrap();
                let m: usize = row["intra"].parse().unwrap();
                let (pi1, pi2) = transcribed_pi(&s1[q], &s2[q], k, m, f("rho1"), f("rho2"));
                worst = worst.max((pi1 - f("pi1")).abs()).max((pi2 - f("pi2")).abs());
                checked += 1;
            }
        }
    }
    check(
        checked > 0 && worst <= 1e-12,
        format!("{checked} records, max deviation {worst:.1e}"),
        format!("max deviation {worst:.3e} over {checked} records"),
    )
}

fn trend_reproduction(run: &DeskRun) -> Outcome {
    let r = &run.result;
    let bins = |v: Vec<(f64, f64)>| -> (Vec<f64>, Vec<f64>) { v.into_iter().unzip() };
    let (l, chamfer) = bins(r.utility_by_bin(|u| u.chamfer));
    let (_, q1) = bins(r.utility_by_bin(|u| u.q1));
    let (la, acc) = bins(r.privacy_by_bin(AttackerProfile::J1, |p| p.top1_super_hit as u8 as f64));
    let rho_chamfer = spearman(&l, &chamfer).unwrap_or(f64::NAN);
    let rho_q1 = spearman(&l, &q1).unwrap_or(f64::NAN);
    let rho_acc = spearman(&la, &acc).unwrap_or(f64::NAN);
    let baseline = r.baseline.entries[0].top1_super_accuracy;
    let summary = format!(
        "spearman(l,chamfer)={rho_chamfer:.3} spearman(l,Q1)={rho_q1:.3} spearman(l,J1 acc)={rho_acc:.3} \
         J1 originals acc={baseline:.3} run={:.1?}",
        run.elapsed
    );
    let ok = l.len() >= 10
        && rho_chamfer <= -0.9
        && rho_q1 >= 0.8
        && rho_acc >= 0.8
        && baseline >= 0.9
        && run.elapsed < Duration::from_secs(120);
    check(ok, summary.clone(), summary)
}

fn band_specialization(run: &DeskRun) -> Outcome {
    let r = &run.result;
    let mut notes = Vec::new();
    let mut ok = true;
    for profile in [AttackerProfile::J2, AttackerProfile::J3, AttackerProfile::J4] {
        let Some(a) = r.attacker(profile) else { return Err(format!("{profile} missing from run")) };
        let (lo, hi) = profile.epoch_band(r.config.e_max).unwrap();
        let mut per_epoch: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
        for p in &a.privacy_records {
            let e = per_epoch.entry(p.epoch).or_default();
            e.0 += p.top1_intra_hit as u8 as f64;
            e.1 += 1;
        }
        let (mut inside, mut outside) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (epoch, (hits, n)) in per_epoch {
            let acc = hits / n as f64;
            if (lo..=hi).contains(&epoch) {
                inside = inside.max(acc);
            } else {
                outside = outside.max(acc);
            }
        }
        ok &= inside >= outside;
        notes.push(format!("{profile}[{lo},{hi}] in={inside:.3} out={outside:.3}"));
    }
    check(ok, notes.join(" "), notes.join(" "))
}

fn full_set_limits(run: &DeskRun) -> Outcome {
    let mut full1 = 0;
    let mut full2 = 0;
    for a in &run.result.attackers {
        for s in &a.rho_sweep {
            if s.rho1 == 1.0 {
                if (s.pi1 - 1.0).abs() > 1e-12 {
                    return Err(format!("{}: {} has pi1 {} at rho1 = 1", a.profile, s.query_id, s.pi1));
                }
                full1 += 1;
                if s.rho2 == 1.0 {
                    if (s.pi2 - 1.0).abs() > 1e-12 {
                        return Err(format!("{}: {} has pi2 {} at full baskets", a.profile, s.query_id, s.pi2));
                    }
                    full2 += 1;
                }
            }
        }
        for table in [&a.super_scores, &a.intra_scores] {
            for (q, d) in table.iter() {
                let mut prev = 0.0;
                for n in 1..=d.len() {
                    let l = hypothesize_topn(d, n).likelihood;
                    if l < prev {
                        return Err(format!("{}: likelihood drops at n={n} for {q}", a.profile));
                    }
                    prev = l;
                }
            }
        }
    }
    check(
        full1 > 0 && full2 > 0,
        format!("{full1} records at full super basket, {full2} at full baskets; likelihood monotone"),
        "no full-basket records in the sweep".into(),
    )
}

fn csv_files(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|e| e == "csv") {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism(run: &DeskRun, second_dir: &Path) -> Outcome {
    desk_run(second_dir)?;
    let (a, b) = (csv_files(&run.dir), csv_files(second_dir));
    let differing: Vec<_> =
        a.iter().filter(|(p, bytes)| b.get(*p) != Some(bytes)).map(|(p, _)| p.display().to_string()).collect();
    check(
        !a.is_empty() && differing.is_empty() && a.len() == b.len(),
        format!("{} CSV files byte-identical across runs", a.len()),
        format!("differing files: {differing:?}"),
    )
}

fn main() {
    let mut failures = 0;
    let mut report = |name: &str, outcome: Outcome| match outcome {
        Ok(msg) => println!("PASS  {name:<22} {msg}"),
        Err(msg) => {
            failures += 1;
            println!("FAIL  {name:<22} {msg}");
        }
    };

    report("chamfer-oracle", chamfer_oracle());
    report("hypothesis-oracle", hypothesis_oracle());
    report("iou-oracle", iou_oracle());
    report("ransac-recovery", ransac_recovery());

    let tmp = tempfile::tempdir().unwrap();
    match desk_run(&tmp.path().join("run-a")) {
        Ok(run) => {
            report("trend-reproduction", trend_reproduction(&run));
            report("pi-oracle", pi_oracle(&run));
            report("band-specialization", band_specialization(&run));
            report("full-set-limits", full_set_limits(&run));
            report("determinism", determinism(&run, &tmp.path().join("run-b")));
        }
        Err(e) => {
            for name in ["trend-reproduction", "pi-oracle", "band-specialization", "full-set-limits", "determinism"] {
                report(name, Err(e.clone()));
            }
        }
    }

    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
