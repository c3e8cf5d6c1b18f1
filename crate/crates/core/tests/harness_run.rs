use std::fs;

use pcpriv_core::attacker::AttackerProfile;
use pcpriv_core::harness::{run_experiment, write_outputs, EvaluateRequest, ExperimentConfig, ExperimentState};
use pcpriv_core::privacy::read_privacy_records;
use pcpriv_core::utility::read_utility_records;

const CONFIG: &str = r#"{
    "corpus": { "kind": "synthetic", "classes": 3, "objects_per_class": 2, "points": 128 },
    "e_max": 12,
    "count_per_object": 3,
    "replicates": 2,
    "privilege_grid": [0.25, 0.5, 0.75, 1.0],
    "rho1_grid": [0.34, 1.0],
    "rho2_grid": [0.5, 1.0],
    "seed": 99,
    "output_dir": "out"
}"#;

#[test]
fn record_counts_and_reload_parity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("config.json");
    fs::write(&cfg_path, CONFIG).unwrap();
    let cfg = ExperimentConfig::load(&cfg_path).unwrap();
    let out = cfg.output_dir.clone().unwrap();
    assert_eq!(out, dir.path().join("out"));

    let result = run_experiment(&cfg).unwrap();
    write_outputs(&result, &out).unwrap();

    let objects = 6;
    let samples = objects * (12 / 2) * 2;
    let utility = read_utility_records(&out.join("utility_records.csv")).unwrap();
    assert_eq!(utility.len(), samples);
    for profile in AttackerProfile::ALL {
        let dir = out.join(profile.name());
        let records = read_privacy_records(&dir.join("privacy_records.csv")).unwrap();
        assert_eq!(records.len(), samples);
        let sweep = fs::read_to_string(dir.join("rho_sweep.csv")).unwrap();
        assert_eq!(sweep.lines().count() - 1, samples * 2 * 2);
        for r in &records {
            assert_eq!((r.rho1, r.rho2), (0.34, 0.5));
        }
    }

    let state = ExperimentState::load(&out).unwrap();
    let records = read_privacy_records(&out.join("J3").join("privacy_records.csv")).unwrap();
    for (sample, (p, u)) in result.samples.iter().zip(records.iter().zip(&utility)).step_by(7) {
        let id = &result.corpus.objects[sample.object_index].id;
        assert_eq!(p.query_id, sample.query_id);
        let resp = state
            .evaluate(&EvaluateRequest {
                object_id: id.clone(),
                l: sample.epoch as f64 / 12.0,
                seed: sample.seed,
                attacker: AttackerProfile::J3,
                rho1: 0.34,
                rho2: 0.5,
            })
            .unwrap();
        assert_eq!(resp.epoch, sample.epoch);
        assert!((resp.pi1 - p.pi1).abs() <= 1e-9);
        assert!((resp.pi2 - p.pi2).abs() <= 1e-9);
        assert!((resp.q1 - u.q1).abs() <= 1e-9);
        assert!((resp.q2_static - u.q2_static).abs() <= 1e-9);
        assert!((resp.q2_dynamic - u.q2_dynamic).abs() <= 1e-9);
        assert!((resp.chamfer - u.chamfer).abs() <= 1e-9);
        assert_eq!(resp.points.len(), 128);
    }
}

#[test]
fn missing_config_file_is_an_io_error() {
    let err = ExperimentConfig::load(std::path::Path::new("/nonexistent/pcpriv.json")).unwrap_err();
    assert_eq!(err.kind(), "Io");
}
