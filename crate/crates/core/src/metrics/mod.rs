//! Distributional metrics for generated molecule sets.

mod features;
mod frechet;
mod kl;
mod report;
mod similarity;
mod vun;

use thiserror::Error;

pub use features::{
    builtin_features, read_feature_binary, read_feature_csv, read_features, write_feature_binary,
    FeatureSet, BUILTIN_FEATURE_NAMES, FEATURE_MAGIC,
};
pub use frechet::{
    fit_gaussian, frechet_distance, frechet_with_diagnostics, matrix_sqrt, FrechetResult,
    GaussianSummary,
};
pub use kl::{
    histogram, kl_divergence, kl_divergence_with, kl_from_masses, Histogram, HistogramSpec,
};
pub use report::{evaluate_sets, MetricsInputs, MetricsReport, TABLE1_COLUMNS};
pub use similarity::{
    frequency_cosine, internal_diversity, internal_diversity_with, snn, DiversityPairs,
};
pub use vun::{vun, VunReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("empty set")]
    EmptySet,
    #[error("empty sample")]
    EmptySample,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("{which} covariance is not positive semi-definite (eigenvalue {worst:e})")]
    NonPsd { which: &'static str, worst: f64 },
    #[error("feature file: {0}")]
    FeatureFile(String),
    #[error(transparent)]
    Fingerprint(#[from] crate::descriptors::FingerprintError),
}
