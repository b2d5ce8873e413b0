//! On-disk forms of the trained classifiers. The evolving model file is
//! self-contained; the MLP is wrapped together with its class names and
//! normalization table.

use std::path::Path;

use crate::efunn::EfunnModel;
use crate::mlp::MlpModel;

use super::dataset::validate_class_name;
use super::norm::Normalizer;
use super::pipeline::MlpBundle;
use super::HarnessError;

const EFUNN_HEADER: &str = "texclass-efunn 1";
const MLP_BUNDLE_HEADER: &str = "texclass-mlp-classifier 1";

/// Any trained model the CLI can classify with.
#[derive(Debug, Clone)]
pub enum TrainedClassifier {
    Efunn(EfunnModel),
    Mlp(MlpBundle),
}

impl TrainedClassifier {
    pub fn class_names(&self) -> &[String] {
        match self {
            TrainedClassifier::Efunn(m) => m.class_names(),
            TrainedClassifier::Mlp(b) => &b.class_names,
        }
    }

    pub fn input_dims(&self) -> usize {
        match self {
            TrainedClassifier::Efunn(m) => m.input_dims(),
            TrainedClassifier::Mlp(b) => b.model.input_size(),
        }
    }

    pub fn predict(&self, fv: &crate::dct::FeatureVector) -> Result<usize, HarnessError> {
        match self {
            TrainedClassifier::Efunn(m) => super::pipeline::efunn_predict(m, fv),
            TrainedClassifier::Mlp(b) => super::pipeline::mlp_predict(b, fv),
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            TrainedClassifier::Efunn(m) => m.to_text(),
            TrainedClassifier::Mlp(b) => mlp_bundle_to_text(b),
        }
    }
}

pub fn mlp_bundle_to_text(bundle: &MlpBundle) -> String {
    let mut out = String::new();
    out.push_str(MLP_BUNDLE_HEADER);
    out.push('\n');
    out.push_str(&format!("classes {}\n", bundle.class_names.len()));
    for name in &bundle.class_names {
        out.push_str(&format!("class {name}\n"));
    }
    out.push_str(&format!("norm {}\n", bundle.normalizer.dims()));
    for &(lo, hi) in bundle.normalizer.pairs() {
        out.push_str(&format!("range {lo} {hi}\n"));
    }
    out.push_str(&bundle.model.to_text());
    out
}

pub fn mlp_bundle_from_text(text: &str) -> Result<MlpBundle, HarnessError> {
    let mut offset = 0usize;
    let mut line_no = 0usize;
    let mut next_line = |text: &str| -> Result<(usize, String), HarnessError> {
        if offset >= text.len() {
            return Err(HarnessError::Model {
                reason: format!("unexpected end of file at line {}", line_no + 1),
            });
        }
        let rest = &text[offset..];
        let end = rest.find('\n').unwrap_or(rest.len());
        let line = rest[..end].to_string();
        offset += end + 1;
        line_no += 1;
        Ok((line_no, line))
    };

    let (_, header) = next_line(text)?;
    if header != MLP_BUNDLE_HEADER {
        return Err(HarnessError::Model {
            reason: format!("expected {MLP_BUNDLE_HEADER:?} header, got {header:?}"),
        });
    }
    let (no, classes_line) = next_line(text)?;
    let class_count: usize = classes_line
        .strip_prefix("classes ")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| HarnessError::Model { reason: format!("bad classes line {no}") })?;
    if class_count < 2 {
        return Err(HarnessError::Model { reason: "need at least 2 classes".to_string() });
    }
    let mut class_names = Vec::new();
    for _ in 0..class_count {
        let (no, line) = next_line(text)?;
        let name = line
            .strip_prefix("class ")
            .ok_or_else(|| HarnessError::Model { reason: format!("bad class line {no}") })?;
        validate_class_name(name)?;
        if class_names.iter().any(|n| n == name) {
            return Err(HarnessError::Model {
                reason: format!("duplicate class name {name:?}"),
            });
        }
        class_names.push(name.to_string());
    }
    let (no, norm_line) = next_line(text)?;
    let norm_dims: usize = norm_line
        .strip_prefix("norm ")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| HarnessError::Model { reason: format!("bad norm line {no}") })?;
    let mut pairs = Vec::new();
    for _ in 0..norm_dims {
        let (no, line) = next_line(text)?;
        let rest = line
            .strip_prefix("range ")
            .ok_or_else(|| HarnessError::Model { reason: format!("bad range line {no}") })?;
        let (lo, hi) = rest
            .split_once(' ')
            .ok_or_else(|| HarnessError::Model { reason: format!("bad range line {no}") })?;
        let lo: f64 = lo
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| HarnessError::Model { reason: format!("bad range min, line {no}") })?;
        let hi: f64 = hi
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| HarnessError::Model { reason: format!("bad range max, line {no}") })?;
        pairs.push((lo, hi));
    }
    let normalizer = Normalizer::from_pairs(pairs)
        .map_err(|e| HarnessError::Model { reason: e.to_string() })?;

    let model = MlpModel::from_text(&text[offset..])?;
    if model.input_size() != normalizer.dims() {
        return Err(HarnessError::Model {
            reason: format!(
                "normalization table has {} dimensions, network expects {}",
                normalizer.dims(),
                model.input_size()
            ),
        });
    }
    if model.output_size() != class_names.len() {
        return Err(HarnessError::Model {
            reason: format!(
                "network has {} outputs for {} classes",
                model.output_size(),
                class_names.len()
            ),
        });
    }
    Ok(MlpBundle { model, normalizer, class_names })
}

/// Parse either model file format, dispatching on the header line.
pub fn classifier_from_text(text: &str) -> Result<TrainedClassifier, HarnessError> {
    let first = text.lines().next().unwrap_or_default();
    match first {
        EFUNN_HEADER => Ok(TrainedClassifier::Efunn(EfunnModel::from_text(text)?)),
        MLP_BUNDLE_HEADER => Ok(TrainedClassifier::Mlp(mlp_bundle_from_text(text)?)),
        other => Err(HarnessError::Model {
            reason: format!("unrecognized model header {other:?}"),
        }),
    }
}

pub fn save_classifier(path: &Path, model: &TrainedClassifier) -> Result<(), HarnessError> {
    std::fs::write(path, model.to_text())
        .map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

pub fn load_classifier(path: &Path) -> Result<TrainedClassifier, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
    classifier_from_text(&text)
}
