use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AttackerProfile;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::geometry::{io, normalize, PointCloud, Vec3};
use crate::regen::{RegenSpec, Regenerator};
use crate::seed::{self, domain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CloudSource {
    Original,
    Augmented,
    Regenerated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCloud {
    pub object_id: String,
    pub super_class: u32,
    pub intra_class: u32,
    pub source: CloudSource,
    pub epoch: Option<u32>,
    pub cloud: PointCloud,
}

/// One row of a labeled dataset manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRow {
    pub cloud_path: PathBuf,
    pub super_class: u32,
    pub intra_class: u32,
    pub source: CloudSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentParams {
    /// Per-coordinate Gaussian noise.
    pub noise_sigma: f64,
}

impl Default for AugmentParams {
    fn default() -> Self {
        Self { noise_sigma: 0.01 }
    }
}

/// Random yaw about the vertical axis plus Gaussian noise, renormalized.
pub fn augment(cloud: &PointCloud, params: &AugmentParams, seed: u64) -> Result<PointCloud> {
    let mut rng = seed::rng(seed);
    let yaw = rng.random_range(0.0..std::f64::consts::TAU);
    let noise =
        Normal::new(0.0, params.noise_sigma).map_err(|e| Error::InvalidConfig(format!("augmentation noise: {e}")))?;
    let points = cloud
        .points()
        .iter()
        .map(|p| {
            let jitter = Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng));
            p.rotate_z(yaw) + jitter
        })
        .collect();
    normalize(&PointCloud::new(points)?)
}

/// `count` epochs drawn uniformly with replacement from the profile's band.
pub fn sample_band_epochs(profile: AttackerProfile, e_max: u32, count: usize, seed: u64) -> Result<Vec<u32>> {
    let (lo, hi) = profile
        .epoch_band(e_max)
        .ok_or_else(|| Error::NoEpochBand(format!("{profile} trains on augmented originals")))?;
    let mut rng = seed::rng(seed);
    Ok((0..count).map(|_| rng.random_range(lo..=hi)).collect())
}

/// `count` labeled samples per corpus object: augmentations for J1,
/// band-sampled regenerations otherwise. Output follows corpus order.
pub fn build_reference_set(
    profile: AttackerProfile,
    corpus: &Corpus,
    regenerator: &dyn Regenerator,
    augment_params: &AugmentParams,
    count: usize,
    seed: u64,
) -> Result<Vec<LabeledCloud>> {
    let e_max = regenerator.e_max();
    let per_object: Vec<Vec<LabeledCloud>> = corpus
        .objects
        .par_iter()
        .enumerate()
        .map(|(idx, o)| {
            let object_seed = seed::mix(&[seed, domain::REFERENCE, profile.index(), idx as u64]);
            let label = |source, epoch, cloud| LabeledCloud {
                object_id: o.id.clone(),
                super_class: o.super_class,
                intra_class: o.intra_class,
                source,
                epoch,
                cloud,
            };
            if profile == AttackerProfile::J1 {
                return (0..count)
                    .map(|i| {
                        let s = seed::mix(&[object_seed, domain::AUGMENT, i as u64]);
                        Ok(label(CloudSource::Augmented, None, augment(&o.cloud, augment_params, s)?))
                    })
                    .collect();
            }
            let epochs = sample_band_epochs(profile, e_max, count, object_seed)?;
            epochs
                .into_iter()
                .enumerate()
                .map(|(i, epoch)| {
                    let spec = RegenSpec::at_epoch(epoch, e_max, seed::mix(&[object_seed, i as u64]))?;
                    let cloud = regenerator.regenerate(&o.id, &o.cloud, &spec)?;
                    Ok(label(CloudSource::Regenerated, Some(epoch), cloud))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_object.into_iter().flatten().collect())
}

/// Writes every cloud under `<dir>/clouds/` and the row list to
/// `<dir>/manifest.json`; paths are relative to `dir`.
pub fn write_dataset_manifest(dir: &Path, set: &[LabeledCloud]) -> Result<PathBuf> {
    let rows = set
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let rel = PathBuf::from("clouds").join(format!("{:06}_{}.xyz", i, s.object_id));
            io::write_cloud(&dir.join(&rel), &s.cloud)?;
            Ok(DatasetRow {
                cloud_path: rel,
                super_class: s.super_class,
                intra_class: s.intra_class,
                source: s.source,
                epoch: s.epoch,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&rows).map_err(|e| Error::json(&path, e))?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Reads a manifest; relative cloud paths resolve against its directory.
/// Object ids are taken from the file stems.
pub fn read_dataset_manifest(path: &Path) -> Result<Vec<LabeledCloud>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows: Vec<DatasetRow> = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    rows.into_iter()
        .map(|r| {
            let cloud_path = base.join(&r.cloud_path);
            let cloud = io::read_cloud(&cloud_path)?;
            let object_id = cloud_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(LabeledCloud {
                object_id,
                super_class: r.super_class,
                intra_class: r.intra_class,
                source: r.source,
                epoch: r.epoch,
                cloud,
            })
        })
        .collect()
}
