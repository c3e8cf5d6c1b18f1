use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attacker::{AttackerParams, AttackerProfile, AugmentParams};
use crate::corpus::{generate_synthetic_corpus, ingest_directory, Corpus};
use crate::error::{Error, Result};
use crate::plane::RansacParams;
use crate::privacy::check_rho;
use crate::regen::{ExternalRegenerator, PrivilegeLevel, Regenerator, SurrogateRegenerator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CorpusSource {
    Synthetic { classes: usize, objects_per_class: usize, points: usize },
    Directory { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RegeneratorConfig {
    /// `point_count` defaults to the corpus point count (2048 for directories).
    Surrogate {
        #[serde(default)]
        point_count: Option<usize>,
        #[serde(default = "default_base_resolution")]
        base_resolution: u32,
        #[serde(default = "default_resolution_span")]
        resolution_span: u32,
        #[serde(default = "default_max_jitter")]
        max_jitter: f64,
    },
    External {
        manifest: PathBuf,
    },
}

fn default_base_resolution() -> u32 {
    SurrogateRegenerator::default().base_resolution
}
fn default_resolution_span() -> u32 {
    SurrogateRegenerator::default().resolution_span
}
fn default_max_jitter() -> f64 {
    SurrogateRegenerator::default().max_jitter
}

impl Default for RegeneratorConfig {
    fn default() -> Self {
        Self::Surrogate {
            point_count: None,
            base_resolution: default_base_resolution(),
            resolution_span: default_resolution_span(),
            max_jitter: default_max_jitter(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus: CorpusSource,
    pub e_max: u32,
    pub profiles: Vec<AttackerProfile>,
    /// Reference samples per object for each attacker.
    pub count_per_object: usize,
    /// Test regenerations per object and even epoch.
    pub replicates: usize,
    pub privilege_grid: Vec<f64>,
    pub rho1_grid: Vec<f64>,
    pub rho2_grid: Vec<f64>,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub regenerator: RegeneratorConfig,
    pub ransac: RansacParams,
    pub attacker: AttackerParams,
    pub augment: AugmentParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            corpus: CorpusSource::Synthetic { classes: 4, objects_per_class: 8, points: 512 },
            e_max: 60,
            profiles: AttackerProfile::ALL.to_vec(),
            count_per_object: 20,
            replicates: 10,
            privilege_grid: (1..=10).map(|i| i as f64 / 10.0).collect(),
            rho1_grid: vec![0.25, 0.5, 0.75, 1.0],
            rho2_grid: vec![0.125, 0.25, 0.5, 1.0],
            seed: 2024,
            output_dir: None,
            regenerator: RegeneratorConfig::default(),
            ransac: RansacParams::default(),
            attacker: AttackerParams::default(),
            augment: AugmentParams::default(),
        }
    }
}

impl ExperimentConfig {
    /// Reads a JSON config; relative paths inside resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let CorpusSource::Directory { path } = &mut cfg.corpus {
            *path = base.join(&*path);
        }
        if let RegeneratorConfig::External { manifest } = &mut cfg.regenerator {
            *manifest = base.join(&*manifest);
        }
        if let Some(out) = &mut cfg.output_dir {
            *out = base.join(&*out);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.e_max < 2 {
            return bad(format!("e_max must be >= 2, got {}", self.e_max));
        }
        if self.count_per_object == 0 || self.replicates == 0 {
            return bad("count_per_object and replicates must be >= 1".into());
        }
        if self.profiles.is_empty() {
            return bad("no attacker profiles".into());
        }
        if self.privilege_grid.is_empty() {
            return bad("privilege grid is empty".into());
        }
        for &l in &self.privilege_grid {
            PrivilegeLevel::new(l)?;
        }
        if self.privilege_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("privilege grid must be strictly increasing".into());
        }
        if *self.privilege_grid.last().unwrap() != 1.0 {
            return bad("privilege grid must end at 1".into());
        }
        if self.rho1_grid.is_empty() || self.rho2_grid.is_empty() {
            return bad("rho grids must be non-empty".into());
        }
        for &r in self.rho1_grid.iter().chain(&self.rho2_grid) {
            check_rho(r)?;
        }
        if let CorpusSource::Synthetic { objects_per_class, points, .. } = self.corpus {
            if objects_per_class < 2 || points < 4 {
                return bad("synthetic corpus needs >= 2 objects per class and >= 4 points".into());
            }
        }
        self.ransac.validate()?;
        self.attacker.validate()
    }

    pub fn load_corpus(&self) -> Result<Corpus> {
        match &self.corpus {
            CorpusSource::Synthetic { classes, objects_per_class, points } => {
                generate_synthetic_corpus(*classes, *objects_per_class, *points, self.seed)
            }
            CorpusSource::Directory { path } => ingest_directory(path),
        }
    }

    pub fn build_regenerator(&self) -> Result<Box<dyn Regenerator>> {
        Ok(match &self.regenerator {
            RegeneratorConfig::Surrogate { point_count, base_resolution, resolution_span, max_jitter } => {
                let points = point_count.unwrap_or(match self.corpus {
                    CorpusSource::Synthetic { points, .. } => points,
                    CorpusSource::Directory { .. } => SurrogateRegenerator::default().point_count,
                });
                Box::new(SurrogateRegenerator {
                    e_max: self.e_max,
                    point_count: points,
                    base_resolution: *base_resolution,
                    resolution_span: *resolution_span,
                    max_jitter: *max_jitter,
                })
            }
            RegeneratorConfig::External { manifest } => {
                Box::new(ExternalRegenerator::load(manifest)?.with_e_max(self.e_max))
            }
        })
    }

    /// Smallest grid value at or above `l`.
    pub fn privilege_bin(&self, l: f64) -> f64 {
        self.privilege_grid.iter().copied().find(|&g| g >= l - 1e-12).unwrap_or(1.0)
    }

    pub fn primary_rho(&self) -> (f64, f64) {
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        (min(&self.rho1_grid), min(&self.rho2_grid))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_roundtrip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), cfg);
        assert_eq!(serde_json::from_str::<ExperimentConfig>("{}").unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = ExperimentConfig { privilege_grid: vec![0.0, 1.0], ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg.privilege_grid = vec![0.5, 1.0];
        cfg.rho1_grid = vec![1.5];
        assert!(cfg.validate().is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
        let cfg = ExperimentConfig {
            corpus: CorpusSource::Synthetic { classes: 1, objects_per_class: 4, points: 64 },
            ..Default::default()
        };
        assert!(cfg.load_corpus().is_err());
    }

    #[test]
    fn bins() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.privilege_bin(2.0 / 60.0), 0.1);
        assert_eq!(cfg.privilege_bin(6.0 / 60.0), 0.1);
        assert_eq!(cfg.privilege_bin(8.0 / 60.0), 0.2);
        assert_eq!(cfg.privilege_bin(1.0), 1.0);
        assert_eq!(cfg.primary_rho(), (0.25, 0.125));
    }
}
