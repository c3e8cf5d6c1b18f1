use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use pcpriv_core::harness::{run_experiment, write_outputs, ExperimentConfig, ExperimentResult};

pub const CONFIG: &str = r#"{
    "corpus": { "kind": "synthetic", "classes": 3, "objects_per_class": 2, "points": 128 },
    "e_max": 12,
    "count_per_object": 3,
    "replicates": 1,
    "privilege_grid": [0.5, 1.0],
    "rho1_grid": [0.34, 1.0],
    "rho2_grid": [0.5, 1.0],
    "seed": 5
}"#;

pub struct Fixture {
    pub dir: PathBuf,
    pub result: ExperimentResult,
}

/// One finished run per test binary, written under the target tmp dir.
pub fn fixture(name: &str) -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        let cfg_path = dir.join("config.json");
        fs::write(&cfg_path, CONFIG).unwrap();
        let cfg = ExperimentConfig::load(&cfg_path).unwrap();
        let result = run_experiment(&cfg).unwrap();
        let run = dir.join("run");
        write_outputs(&result, &run).unwrap();
        Fixture { dir: run, result }
    })
}
