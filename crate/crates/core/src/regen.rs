//! The privilege slider and the weight-bank contract.
//!
//! A privilege level `l ∈ (0, 1]` selects a training epoch; a [`Regenerator`]
//! turns an object into a regeneration whose fidelity grows with the epoch.
//! Two regenerators are provided: a deterministic surrogate that degrades
//! geometry in proportion to the remaining epochs, and a loader serving
//! regenerations produced elsewhere.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{io, PointCloud, Vec3};
use crate::seed;

/// Fraction of a 300-epoch schedule ending the low-privilege band.
pub const LOW_BAND_END: f64 = 50.0 / 300.0;
/// Fraction of a 300-epoch schedule ending the medium-privilege band.
pub const MEDIUM_BAND_END: f64 = 70.0 / 300.0;

/// Guards `ceil` against products such as `0.3 * 10 = 3.0000000000000004`.
const CEIL_SLACK: f64 = 1e-9;

pub(crate) fn slack_ceil(x: f64) -> f64 {
    (x - CEIL_SLACK).ceil()
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PrivilegeLevel(f64);

impl PrivilegeLevel {
    pub fn new(l: f64) -> Result<Self> {
        if l.is_nan() || l > 1.0 {
            Err(Error::InvalidPrivilege(l))
        } else if l <= 0.0 {
            Err(Error::ZeroPrivilege(l))
        } else {
            Ok(Self(l))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn band(self) -> PrivilegeBand {
        if self.0 <= LOW_BAND_END {
            PrivilegeBand::Low
        } else if self.0 <= MEDIUM_BAND_END {
            PrivilegeBand::Medium
        } else {
            PrivilegeBand::High
        }
    }
}

impl TryFrom<f64> for PrivilegeLevel {
    type Error = Error;
    fn try_from(l: f64) -> Result<Self> {
        Self::new(l)
    }
}

impl From<PrivilegeLevel> for f64 {
    fn from(l: PrivilegeLevel) -> f64 {
        l.0
    }
}

/// Abstract privilege settings. Band edges belong to the lower band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PrivilegeBand {
    Low,
    Medium,
    High,
}

/// Inclusive epoch range of a band for a schedule of `e_max` epochs.
///
/// For `e_max = 300` this is `[1, 50]`, `[50, 70]` and `[70, 300]`.
pub fn band_epochs(band: PrivilegeBand, e_max: u32) -> (u32, u32) {
    let edge = |frac: f64| ((frac * e_max as f64).round() as u32).clamp(1, e_max.max(1));
    let (low_end, mid_end) = (edge(LOW_BAND_END), edge(MEDIUM_BAND_END));
    match band {
        PrivilegeBand::Low => (1, low_end),
        PrivilegeBand::Medium => (low_end, mid_end),
        PrivilegeBand::High => (mid_end, e_max),
    }
}

/// `ceil(l · e_max)` clamped to `[1, e_max]`.
pub fn privilege_to_epoch(level: PrivilegeLevel, e_max: u32) -> u32 {
    let e_max = e_max.max(1);
    let raw = slack_ceil(level.value() * e_max as f64);
    (raw as u32).clamp(1, e_max)
}

/// Identifies one regeneration drawn from the weight bank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegenSpec {
    pub level: PrivilegeLevel,
    pub epoch: u32,
    pub seed: u64,
}

impl RegenSpec {
    pub fn from_level(level: PrivilegeLevel, e_max: u32, seed: u64) -> Self {
        Self { level, epoch: privilege_to_epoch(level, e_max), seed }
    }

    /// Spec for a fixed epoch; the level is `epoch / e_max`.
    pub fn at_epoch(epoch: u32, e_max: u32, seed: u64) -> Result<Self> {
        if epoch == 0 || epoch > e_max {
            return Err(Error::InvalidConfig(format!("epoch {epoch} outside [1, {e_max}]")));
        }
        Ok(Self { level: PrivilegeLevel::new(epoch as f64 / e_max as f64)?, epoch, seed })
    }
}

/// Produces privilege-reduced versions of an object.
pub trait Regenerator: Send + Sync {
    fn e_max(&self) -> u32;

    /// Deterministic in `(object_id, cloud, spec)`.
    fn regenerate(&self, object_id: &str, cloud: &PointCloud, spec: &RegenSpec) -> Result<PointCloud>;
}

/// Voxel-quantize, jitter and resample; coarser and noisier at low epochs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SurrogateRegenerator {
    pub e_max: u32,
    pub point_count: usize,
    /// Grid resolution at epoch 0, in cells per unit.
    pub base_resolution: u32,
    /// Resolution gained between epoch 0 and `e_max`.
    pub resolution_span: u32,
    /// Jitter standard deviation at epoch 0.
    pub max_jitter: f64,
}

impl Default for SurrogateRegenerator {
    fn default() -> Self {
        Self { e_max: 300, point_count: 2048, base_resolution: 2, resolution_span: 30, max_jitter: 0.08 }
    }
}

impl SurrogateRegenerator {
    pub fn new(e_max: u32, point_count: usize) -> Self {
        Self { e_max, point_count, ..Self::default() }
    }

    pub fn resolution(&self, epoch: u32) -> u32 {
        let frac = epoch as f64 / self.e_max as f64;
        self.base_resolution + (self.resolution_span as f64 * frac).floor() as u32
    }

    pub fn jitter(&self, epoch: u32) -> f64 {
        self.max_jitter * (1.0 - epoch as f64 / self.e_max as f64)
    }
}

impl Regenerator for SurrogateRegenerator {
    fn e_max(&self) -> u32 {
        self.e_max
    }

    fn regenerate(&self, _object_id: &str, cloud: &PointCloud, spec: &RegenSpec) -> Result<PointCloud> {
        if spec.epoch == 0 || spec.epoch > self.e_max {
            return Err(Error::InvalidConfig(format!("epoch {} outside [1, {}]", spec.epoch, self.e_max)));
        }
        let cells = self.resolution(spec.epoch) as f64;
        let sigma = self.jitter(spec.epoch);
        let mut rng = seed::rng(spec.seed);
        let snap = |v: f64| ((v * cells).floor() + 0.5) / cells;

        let mut pts: Vec<Vec3> = cloud.points().iter().map(|p| Vec3::new(snap(p.x), snap(p.y), snap(p.z))).collect();
        if sigma > 0.0 {
            let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
            for p in pts.iter_mut() {
                *p += Vec3::new(normal.sample(&mut rng), normal.sample(&mut rng), normal.sample(&mut rng));
            }
        }
        let out = (0..self.point_count).map(|_| pts[rng.random_range(0..pts.len())]).collect();
        PointCloud::new(out)
    }
}

/// Manifest shape: `object_id → epoch → [cloud paths]`. Relative paths are
/// resolved against the manifest's directory.
pub type RegenerationManifest = BTreeMap<String, BTreeMap<String, Vec<PathBuf>>>;

/// Serves regenerations stored on disk, one or more replicates per epoch.
#[derive(Debug, Clone)]
pub struct ExternalRegenerator {
    e_max: u32,
    entries: BTreeMap<String, BTreeMap<u32, Vec<PathBuf>>>,
}

impl ExternalRegenerator {
    pub fn load(manifest_path: &Path) -> Result<Self> {
        let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base).map_err(|message| Error::Manifest { path: manifest_path.into(), message })
    }

    pub fn from_json(text: &str, base: &Path) -> std::result::Result<Self, String> {
        let raw: RegenerationManifest = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let mut entries = BTreeMap::new();
        let mut e_max = 0;
        for (object, epochs) in raw {
            let mut per_epoch = BTreeMap::new();
            for (key, paths) in epochs {
                let epoch: u32 = key
                    .parse()
                    .ok()
                    .filter(|&e| e >= 1)
                    .ok_or_else(|| format!("object {object:?}: epoch key {key:?} is not a positive integer"))?;
                if paths.is_empty() {
                    return Err(format!("object {object:?}: epoch {epoch} lists no clouds"));
                }
                e_max = e_max.max(epoch);
                per_epoch.insert(epoch, paths.into_iter().map(|p| base.join(p)).collect());
            }
            entries.insert(object, per_epoch);
        }
        Ok(Self { e_max, entries })
    }

    /// Overrides the schedule length (defaults to the largest epoch listed).
    pub fn with_e_max(mut self, e_max: u32) -> Self {
        self.e_max = e_max;
        self
    }

    pub fn epochs(&self, object_id: &str) -> Option<impl Iterator<Item = u32> + '_> {
        self.entries.get(object_id).map(|m| m.keys().copied())
    }

    /// Path of the replicate selected by `seed mod replicate_count`.
    pub fn path_for(&self, object_id: &str, spec: &RegenSpec) -> Result<&Path> {
        let per_epoch = self.entries.get(object_id).ok_or_else(|| Error::UnknownObject(object_id.into()))?;
        let paths = per_epoch
            .get(&spec.epoch)
            .ok_or_else(|| Error::MissingEpoch { object_id: object_id.into(), epoch: spec.epoch })?;
        Ok(&paths[(spec.seed % paths.len() as u64) as usize])
    }
}

impl Regenerator for ExternalRegenerator {
    fn e_max(&self) -> u32 {
        self.e_max
    }

    fn regenerate(&self, object_id: &str, _cloud: &PointCloud, spec: &RegenSpec) -> Result<PointCloud> {
        io::read_cloud(self.path_for(object_id, spec)?)
    }
}

/// Sidecar metadata written next to every exported regeneration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegenSidecar {
    pub object_id: String,
    pub l: f64,
    pub epoch: u32,
    pub seed: u64,
}

pub fn write_regeneration(path: &Path, cloud: &PointCloud, sidecar: &RegenSidecar) -> Result<()> {
    io::write_cloud(path, cloud)?;
    let meta = path.with_extension("json");
    let text = serde_json::to_string_pretty(sidecar).map_err(|e| Error::json(&meta, e))?;
    fs::write(&meta, text).map_err(|e| Error::io(&meta, e))
}
