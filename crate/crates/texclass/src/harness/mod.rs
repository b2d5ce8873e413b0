//! Dataset plumbing around the classifiers: normalization, stratified
//! splitting, evaluation reports, the synthetic texture generator, CSV
//! formats, and model persistence.

use std::fmt;
use std::path::PathBuf;

use crate::dct::DctError;
use crate::efunn::EfunnError;
use crate::imaging::ImageError;
use crate::mlp::MlpError;

mod csvio;
mod dataset;
mod eval;
mod norm;
mod persist;
mod pipeline;
mod rng;
mod synth;

pub use csvio::{
    dataset_from_csv, features_to_csv, manifest_from_csv, manifest_to_csv, predictions_to_csv,
};
pub use dataset::{split, validate_class_name, Dataset};
pub use eval::{evaluate, format_reliability, rounded_reliability, EvaluationReport};
pub use norm::Normalizer;
pub use persist::{
    classifier_from_text, load_classifier, mlp_bundle_from_text, mlp_bundle_to_text,
    save_classifier, TrainedClassifier,
};
pub use pipeline::{
    efunn_predict, extract_from_dir, extract_from_synthetic, mlp_predict, train_efunn, train_mlp,
    MlpBundle,
};
pub use rng::SplitMix64;
pub use synth::{generate_synthetic, SynthImage, TextureFamily};

#[derive(Debug)]
pub enum HarnessError {
    Io { path: PathBuf, source: std::io::Error },
    Csv { line: usize, reason: String },
    BadLabel { label: String },
    UnknownLabel { label: String },
    Dataset { reason: String },
    BadFraction { fraction: f64 },
    ClassTooSmall { class: String, count: usize },
    EmptyDataset,
    Synth { reason: String },
    Model { reason: String },
    Efunn(EfunnError),
    Mlp(MlpError),
    Dct(DctError),
    Image(ImageError),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Io { path, source } => {
                write!(f, "{}: {source}", path.display())
            }
            HarnessError::Csv { line, reason } => write!(f, "csv line {line}: {reason}"),
            HarnessError::BadLabel { label } => write!(
                f,
                "label {label:?} must be non-empty without whitespace, commas, or quotes"
            ),
            HarnessError::UnknownLabel { label } => {
                write!(f, "label {label:?} is not a class of the model")
            }
            HarnessError::Dataset { reason } => write!(f, "{reason}"),
            HarnessError::BadFraction { fraction } => {
                write!(f, "train fraction must be in (0,1), got {fraction}")
            }
            HarnessError::ClassTooSmall { class, count } => {
                write!(f, "class {class:?} has {count} items, stratified split needs at least 2")
            }
            HarnessError::EmptyDataset => write!(f, "dataset is empty"),
            HarnessError::Synth { reason } => write!(f, "{reason}"),
            HarnessError::Model { reason } => write!(f, "{reason}"),
            HarnessError::Efunn(e) => e.fmt(f),
            HarnessError::Mlp(e) => e.fmt(f),
            HarnessError::Dct(e) => e.fmt(f),
            HarnessError::Image(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for HarnessError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            HarnessError::Io { source, .. } => Some(source),
            HarnessError::Efunn(e) => Some(e),
            HarnessError::Mlp(e) => Some(e),
            HarnessError::Dct(e) => Some(e),
            HarnessError::Image(e) => Some(e),
            _ => None,
        }
    }
}

impl From<EfunnError> for HarnessError {
    fn from(e: EfunnError) -> Self {
        HarnessError::Efunn(e)
    }
}

impl From<MlpError> for HarnessError {
    fn from(e: MlpError) -> Self {
        HarnessError::Mlp(e)
    }
}

impl From<DctError> for HarnessError {
    fn from(e: DctError) -> Self {
        HarnessError::Dct(e)
    }
}

impl From<ImageError> for HarnessError {
    fn from(e: ImageError) -> Self {
        HarnessError::Image(e)
    }
}
