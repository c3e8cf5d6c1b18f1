//! The simulated adversary.
//!
//! Score functions are realized by nearest-centroid classifiers over D2
//! shape distributions. Any scorer emitting a normalized distribution per
//! label plugs in behind [`ScoreDistribution`], including imported tables.

mod classifier;
mod descriptor;
mod hypothesis;
mod profile;
mod reference;
mod scores;

pub use classifier::{Attacker, AttackerParams, Classifier};
pub use descriptor::{d2_descriptor, Descriptor};
pub use hypothesis::{basket_size, hypothesize_topn, Hypothesis};
pub use profile::AttackerProfile;
pub use reference::{
    augment, build_reference_set, read_dataset_manifest, sample_band_epochs, write_dataset_manifest, AugmentParams,
    CloudSource, DatasetRow, LabeledCloud,
};
pub use scores::{read_score_table, write_score_table, ScoreDistribution, ScoreTable};
