//! End-to-end experiment orchestration and the evaluation state shared by
//! the command line and the HTTP API.

mod aggregate;
mod config;
mod experiment;
mod session;

pub use aggregate::{aggregate, mean_sd, write_summary, GroupStat, Metric, ToStrings, F};
pub use config::{CorpusSource, ExperimentConfig, RegeneratorConfig};
pub use experiment::{
    build_test_set, measure_utility, object_listing, original_plane, original_planes, q2_or_worst, run_experiment,
    test_samples, write_outputs, AttackerResult, AucEntry, AucTable, BaselineReport, ExperimentResult, ObjectInfo,
    RhoSweepRecord, TestSample, UtilityMeasure,
};
pub use session::{decimate, EvaluateRequest, EvaluateResponse, ExperimentState, LabelScore, RankedHypothesis};
