//! Labeled feature collections and the stratified train/test split.

use crate::dct::FeatureVector;

use super::rng::SplitMix64;
use super::HarnessError;

/// Feature vectors with class labels and per-item provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    items: Vec<(FeatureVector, usize)>,
    class_names: Vec<String>,
    source_ids: Vec<String>,
}

pub fn validate_class_name(name: &str) -> Result<(), HarnessError> {
    if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == ',' || c == '"') {
        return Err(HarnessError::BadLabel { label: name.to_string() });
    }
    Ok(())
}

impl Dataset {
    pub fn new(class_names: Vec<String>) -> Result<Self, HarnessError> {
        for (i, name) in class_names.iter().enumerate() {
            validate_class_name(name)?;
            if class_names[..i].contains(name) {
                return Err(HarnessError::BadLabel { label: name.clone() });
            }
        }
        Ok(Self { items: Vec::new(), class_names, source_ids: Vec::new() })
    }

    pub fn push(
        &mut self,
        features: FeatureVector,
        class: usize,
        source_id: String,
    ) -> Result<(), HarnessError> {
        if class >= self.class_names.len() {
            return Err(HarnessError::Dataset {
                reason: format!(
                    "class index {class} out of range ({} classes)",
                    self.class_names.len()
                ),
            });
        }
        if let Some((first, _)) = self.items.first() {
            if first.len() != features.len() {
                return Err(HarnessError::Dataset {
                    reason: format!(
                        "feature length {} differs from the dataset's {}",
                        features.len(),
                        first.len()
                    ),
                });
            }
        }
        self.items.push((features, class));
        self.source_ids.push(source_id);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.items.first().map_or(0, |(fv, _)| fv.len())
    }

    pub fn items(&self) -> &[(FeatureVector, usize)] {
        &self.items
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn source_ids(&self) -> &[String] {
        &self.source_ids
    }

    pub fn label_of(&self, item: usize) -> &str {
        &self.class_names[self.items[item].1]
    }

    /// How many items carry each class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_names.len()];
        for (_, c) in &self.items {
            counts[*c] += 1;
        }
        counts
    }
}

/// Stratified split: per class, a seeded shuffle selects
/// `round(fraction * count)` items (at least one per side) for training.
pub fn split(
    ds: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset), HarnessError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(HarnessError::BadFraction { fraction: train_fraction });
    }
    let counts = ds.class_counts();
    for (c, &count) in counts.iter().enumerate() {
        if count < 2 {
            return Err(HarnessError::ClassTooSmall {
                class: ds.class_names()[c].clone(),
                count,
            });
        }
    }

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.classes()];
    for (i, (_, c)) in ds.items().iter().enumerate() {
        by_class[*c].push(i);
    }

    let mut rng = SplitMix64::new(seed);
    let mut train = Dataset::new(ds.class_names().to_vec())?;
    let mut test = Dataset::new(ds.class_names().to_vec())?;
    for indices in &mut by_class {
        rng.shuffle(indices);
        let count = indices.len();
        let take = ((train_fraction * count as f64).round() as usize).clamp(1, count - 1);
        for (pos, &i) in indices.iter().enumerate() {
            let (fv, class) = &ds.items()[i];
            let target = if pos < take { &mut train } else { &mut test };
            target.push(fv.clone(), *class, ds.source_ids()[i].clone())?;
        }
    }
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn features(tag: f64) -> FeatureVector {
        FeatureVector::new(vec![tag; 9], None).unwrap()
    }

    fn balanced_dataset(per_class: usize, classes: usize) -> Dataset {
        let names = (0..classes).map(|c| format!("class{c}")).collect();
        let mut ds = Dataset::new(names).unwrap();
        for c in 0..classes {
            for i in 0..per_class {
                ds.push(features((c * per_class + i) as f64), c, format!("item{c}_{i}"))
                    .unwrap();
            }
        }
        ds
    }

    #[test]
    fn eighty_twenty_split_shape() {
        let ds = balanced_dataset(80, 3);
        let (train, test) = split(&ds, 0.8, 1).unwrap();
        assert_eq!(train.len(), 192);
        assert_eq!(test.len(), 48);
        assert_eq!(train.class_counts(), vec![64, 64, 64]);
        assert_eq!(test.class_counts(), vec![16, 16, 16]);
    }

    #[test]
    fn split_is_deterministic_per_seed() {
        let ds = balanced_dataset(10, 2);
        let a = split(&ds, 0.8, 9).unwrap();
        let b = split(&ds, 0.8, 9).unwrap();
        assert_eq!(a, b);
        let c = split(&ds, 0.8, 10).unwrap();
        assert_ne!(a.0.source_ids(), c.0.source_ids());
    }

    #[test]
    fn split_partitions_the_input() {
        let ds = balanced_dataset(7, 3);
        let (train, test) = split(&ds, 0.6, 4).unwrap();
        let mut seen: Vec<&String> =
            train.source_ids().iter().chain(test.source_ids()).collect();
        seen.sort();
        let mut expected: Vec<&String> = ds.source_ids().iter().collect();
        expected.sort();
        assert_eq!(seen, expected);
        assert_eq!(train.len() + test.len(), ds.len());
    }

    #[test]
    fn tiny_class_cannot_stratify() {
        let mut ds = Dataset::new(vec!["a".to_string(), "b".to_string()]).unwrap();
        ds.push(features(0.0), 0, "x".into()).unwrap();
        ds.push(features(1.0), 0, "y".into()).unwrap();
        ds.push(features(2.0), 1, "z".into()).unwrap();
        assert!(matches!(
            split(&ds, 0.8, 1),
            Err(HarnessError::ClassTooSmall { count: 1, .. })
        ));
    }

    #[test]
    fn bad_fractions_are_rejected() {
        let ds = balanced_dataset(4, 2);
        for f in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(matches!(split(&ds, f, 1), Err(HarnessError::BadFraction { .. })));
        }
    }

    #[test]
    fn dataset_validates_rows() {
        let mut ds = Dataset::new(vec!["a".to_string(), "b".to_string()]).unwrap();
        ds.push(features(0.0), 0, "one".into()).unwrap();
        assert!(ds
            .push(FeatureVector::new(vec![0.0; 18], None).unwrap(), 0, "two".into())
            .is_err());
        assert!(ds.push(features(1.0), 5, "three".into()).is_err());
        assert!(Dataset::new(vec!["a".to_string(), "a".to_string()]).is_err());
        assert!(Dataset::new(vec!["bad label".to_string()]).is_err());
    }
}
