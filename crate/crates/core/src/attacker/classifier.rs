use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{d2_descriptor, AttackerProfile, Descriptor, LabeledCloud, ScoreDistribution};
use crate::corpus::LabelSpace;
use crate::error::{Error, Result};
use crate::geometry::{normalize, PointCloud};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackerParams {
    pub bins: usize,
    pub max_dist: f64,
    /// Softmax temperature over centroid distances.
    pub temperature: f64,
}

impl Default for AttackerParams {
    fn default() -> Self {
        Self { bins: 64, max_dist: 2.0, temperature: 0.05 }
    }
}

impl AttackerParams {
    pub fn validate(&self) -> Result<()> {
        if self.bins < 8 {
            return Err(Error::InvalidConfig(format!("descriptor bins must be >= 8, got {}", self.bins)));
        }
        if !(self.max_dist > 0.0 && self.temperature > 0.0) {
            return Err(Error::InvalidConfig("max_dist and temperature must be positive".into()));
        }
        Ok(())
    }

    /// Descriptor of the normalized cloud. A cloud collapsed to one point
    /// has no scale to normalize and is described as-is.
    pub fn describe(&self, cloud: &PointCloud) -> Descriptor {
        match normalize(cloud) {
            Ok(n) => d2_descriptor(&n, self.bins, self.max_dist),
            Err(_) => d2_descriptor(cloud, self.bins, self.max_dist),
        }
    }
}

/// Nearest-centroid classifier emitting a softmax over negative scaled
/// descriptor distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    pub centroids: Vec<Descriptor>,
    pub temperature: f64,
}

impl Classifier {
    /// Labels are `0..num_labels`; each needs at least one example.
    pub fn fit<'a>(
        examples: impl IntoIterator<Item = (&'a Descriptor, u32)>,
        num_labels: usize,
        temperature: f64,
    ) -> Result<Self> {
        if num_labels < 2 {
            return Err(Error::InvalidLabels(format!("{num_labels} labels, at least 2 required")));
        }
        let mut groups: Vec<Vec<&Descriptor>> = vec![Vec::new(); num_labels];
        for (d, label) in examples {
            groups
                .get_mut(label as usize)
                .ok_or_else(|| Error::InvalidLabels(format!("label {label} outside 0..{num_labels}")))?
                .push(d);
        }
        let centroids = groups
            .into_iter()
            .enumerate()
            .map(|(label, g)| Descriptor::mean(g).ok_or(Error::EmptyClass(label as u32)))
            .collect::<Result<_>>()?;
        Ok(Self { centroids, temperature })
    }

    pub fn num_labels(&self) -> usize {
        self.centroids.len()
    }

    pub fn scores(&self, query: &Descriptor) -> ScoreDistribution {
        let logits: Vec<f64> = self.centroids.iter().map(|c| -c.distance(query) / self.temperature).collect();
        let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = weights.iter().sum();
        ScoreDistribution::new(weights.into_iter().map(|w| w / total).collect())
            .expect("softmax output is a distribution")
    }
}

/// One super-class classifier and one intra-class classifier per super-class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attacker {
    pub profile: AttackerProfile,
    pub params: AttackerParams,
    pub super_classifier: Classifier,
    pub intra_classifiers: Vec<Classifier>,
}

impl Attacker {
    pub fn train(
        profile: AttackerProfile,
        reference: &[LabeledCloud],
        labels: &LabelSpace,
        params: AttackerParams,
    ) -> Result<Self> {
        let descriptors: Vec<Descriptor> = reference.par_iter().map(|r| params.describe(&r.cloud)).collect();
        let rows: Vec<(&Descriptor, u32, u32)> =
            descriptors.iter().zip(reference).map(|(d, r)| (d, r.super_class, r.intra_class)).collect();
        Self::fit(profile, &rows, labels, params)
    }

    /// Fits from precomputed `(descriptor, super, intra)` rows.
    pub fn fit(
        profile: AttackerProfile,
        rows: &[(&Descriptor, u32, u32)],
        labels: &LabelSpace,
        params: AttackerParams,
    ) -> Result<Self> {
        params.validate()?;
        labels.validate()?;
        let super_classifier =
            Classifier::fit(rows.iter().map(|&(d, k, _)| (d, k)), labels.num_super(), params.temperature)?;
        let intra_classifiers = labels
            .super_classes
            .iter()
            .map(|&k| {
                let members = rows.iter().filter(|r| r.1 == k).map(|&(d, _, m)| (d, m));
                Classifier::fit(members, labels.num_intra(k), params.temperature)
            })
            .collect::<Result<_>>()?;
        Ok(Self { profile, params, super_classifier, intra_classifiers })
    }

    pub fn describe(&self, cloud: &PointCloud) -> Descriptor {
        self.params.describe(cloud)
    }

    /// Super-class scores `σ1(k; S*)` for all `k`.
    pub fn score_superclass(&self, query: &Descriptor) -> ScoreDistribution {
        self.super_classifier.scores(query)
    }

    /// Intra-class scores `σ2(m; S* | k)` over the objects of `super_class`.
    pub fn score_intraclass(&self, super_class: u32, query: &Descriptor) -> ScoreDistribution {
        self.intra_classifiers[super_class as usize].scores(query)
    }
}
