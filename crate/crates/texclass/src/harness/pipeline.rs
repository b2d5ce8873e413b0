//! Glue between datasets and the two classifiers: normalization, training
//! loops, and prediction over raw feature vectors.

use std::path::Path;

use crate::dct::{extract_image_features, CoefficientMask, FeatureVector};
use crate::efunn::{EfunnConfig, EfunnModel, LearnOutcome};
use crate::fuzzy::one_hot;
use crate::imaging::parse_image;
use crate::mlp::{MlpConfig, MlpModel};

use super::csvio::manifest_from_csv;
use super::dataset::Dataset;
use super::norm::Normalizer;
use super::synth::SynthImage;
use super::HarnessError;

/// Fit the normalizer on the training set, then run the one-pass evolving
/// loop over it.
pub fn train_efunn(
    config: EfunnConfig,
    train: &Dataset,
) -> Result<(EfunnModel, Vec<LearnOutcome>), HarnessError> {
    let normalizer = Normalizer::fit(train)?;
    let mut model = EfunnModel::new(
        config,
        train.dims(),
        train.class_names().to_vec(),
        normalizer,
    )?;
    let items: Vec<(Vec<f64>, usize)> = train
        .items()
        .iter()
        .map(|(fv, class)| (model.normalizer().normalize(fv.values()), *class))
        .collect();
    let log = model.train_one_pass(&items)?;
    Ok((model, log))
}

/// Classify one raw feature vector with a trained evolving model.
pub fn efunn_predict(model: &EfunnModel, fv: &FeatureVector) -> Result<usize, HarnessError> {
    if fv.len() != model.input_dims() {
        return Err(HarnessError::Dataset {
            reason: format!(
                "feature length {} does not match the model's {} inputs",
                fv.len(),
                model.input_dims()
            ),
        });
    }
    let x = model.normalizer().normalize(fv.values());
    Ok(model.infer(&x)?.0)
}

/// A trained MLP plus the preprocessing it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpBundle {
    pub model: MlpModel,
    pub normalizer: Normalizer,
    pub class_names: Vec<String>,
}

/// Batched backpropagation for `config.epochs` epochs over the training set;
/// `progress` sees each epoch's pre-update RMSE.
pub fn train_mlp(
    config: MlpConfig,
    train: &Dataset,
    mut progress: impl FnMut(usize, f64),
) -> Result<MlpBundle, HarnessError> {
    if train.is_empty() {
        return Err(HarnessError::EmptyDataset);
    }
    if config.layer_sizes.first() != Some(&train.dims())
        || config.layer_sizes.last() != Some(&train.classes())
    {
        return Err(HarnessError::Dataset {
            reason: format!(
                "network shape {:?} does not match {} inputs and {} classes",
                config.layer_sizes,
                train.dims(),
                train.classes()
            ),
        });
    }
    let normalizer = Normalizer::fit(train)?;
    let inputs: Vec<Vec<f64>> = train
        .items()
        .iter()
        .map(|(fv, _)| normalizer.normalize(fv.values()))
        .collect();
    let targets: Vec<Vec<f64>> = train
        .items()
        .iter()
        .map(|(_, class)| one_hot(*class, train.classes()))
        .collect();
    let epochs = config.epochs;
    let mut model = MlpModel::init(config)?;
    for epoch in 0..epochs {
        let rmse = model.train_epoch(&inputs, &targets)?;
        progress(epoch, rmse);
    }
    Ok(MlpBundle { model, normalizer, class_names: train.class_names().to_vec() })
}

/// Classify one raw feature vector with a trained MLP bundle.
pub fn mlp_predict(bundle: &MlpBundle, fv: &FeatureVector) -> Result<usize, HarnessError> {
    if fv.len() != bundle.model.input_size() {
        return Err(HarnessError::Dataset {
            reason: format!(
                "feature length {} does not match the network's {} inputs",
                fv.len(),
                bundle.model.input_size()
            ),
        });
    }
    let x = bundle.normalizer.normalize(fv.values());
    Ok(bundle.model.predict(&x)?)
}

/// Build a labeled feature dataset from generated images without touching
/// the filesystem.
pub fn extract_from_synthetic(
    images: &[SynthImage],
    class_names: Vec<String>,
    block_size: usize,
    mask: &CoefficientMask,
) -> Result<Dataset, HarnessError> {
    let mut ds = Dataset::new(class_names)?;
    for s in images {
        let fv = extract_image_features(&s.image, block_size, mask)?;
        ds.push(fv, s.class, s.filename.clone())?;
    }
    Ok(ds)
}

/// Read a manifest plus its image files and extract features for each entry.
pub fn extract_from_dir(
    images_dir: &Path,
    manifest_path: &Path,
    block_size: usize,
    mask: &CoefficientMask,
) -> Result<Dataset, HarnessError> {
    let manifest_text = std::fs::read_to_string(manifest_path)
        .map_err(|source| HarnessError::Io { path: manifest_path.to_path_buf(), source })?;
    let entries = manifest_from_csv(&manifest_text)?;
    let mut class_names: Vec<String> = Vec::new();
    for (_, class) in &entries {
        if !class_names.contains(class) {
            class_names.push(class.clone());
        }
    }
    let mut ds = Dataset::new(class_names)?;
    for (filename, class) in &entries {
        let path = images_dir.join(filename);
        let bytes = std::fs::read(&path)
            .map_err(|source| HarnessError::Io { path: path.clone(), source })?;
        let gray = parse_image(&bytes)?.into_gray();
        let fv = extract_image_features(&gray, block_size, mask)?;
        let class_index = ds
            .class_names()
            .iter()
            .position(|n| n == class)
            .expect("manifest classes were collected above");
        ds.push(fv, class_index, filename.clone())?;
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synth::{generate_synthetic, TextureFamily};

    fn tiny_dataset() -> Dataset {
        let images = generate_synthetic(
            &[TextureFamily::Brick, TextureFamily::Metal, TextureFamily::Rural],
            6,
            16,
            11,
        )
        .unwrap();
        extract_from_synthetic(
            &images,
            vec!["brick".to_string(), "metal".to_string(), "rural".to_string()],
            8,
            &CoefficientMask::default(),
        )
        .unwrap()
    }

    #[test]
    fn efunn_training_recalls_its_own_data() {
        let ds = tiny_dataset();
        let (model, log) = train_efunn(EfunnConfig::default(), &ds).unwrap();
        assert_eq!(log.len(), ds.len());
        assert!(model.node_count() >= 1 && model.node_count() <= ds.len());
        for (fv, class) in ds.items() {
            assert_eq!(efunn_predict(&model, fv).unwrap(), *class);
        }
    }

    #[test]
    fn mlp_training_runs_and_shapes_are_validated() {
        let ds = tiny_dataset();
        let mut seen = Vec::new();
        let bundle = train_mlp(
            MlpConfig {
                layer_sizes: vec![ds.dims(), 8, ds.classes()],
                epochs: 5,
                ..MlpConfig::default()
            },
            &ds,
            |epoch, rmse| seen.push((epoch, rmse)),
        )
        .unwrap();
        assert_eq!(seen.len(), 5);
        assert!(seen.iter().all(|(_, rmse)| rmse.is_finite()));
        let first = ds.items().first().unwrap();
        let _ = mlp_predict(&bundle, &first.0).unwrap();

        let bad = train_mlp(
            MlpConfig { layer_sizes: vec![7, 8, ds.classes()], epochs: 1, ..MlpConfig::default() },
            &ds,
            |_, _| {},
        );
        assert!(bad.is_err());
    }
}
