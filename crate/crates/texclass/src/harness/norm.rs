//! Min-max normalization fitted on training data only; the fuzzy layer
//! expects inputs in [0,1].

use std::fmt;

use super::dataset::Dataset;
use super::HarnessError;

/// Per-dimension (min, max) ranges learned from a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    pairs: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BadRange {
    pub dim: usize,
    pub min: f64,
    pub max: f64,
}

impl fmt::Display for BadRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "normalization range for dimension {} has min {} > max {}",
            self.dim, self.min, self.max
        )
    }
}

impl std::error::Error for BadRange {}

impl Normalizer {
    pub fn from_pairs(pairs: Vec<(f64, f64)>) -> Result<Self, BadRange> {
        for (dim, &(lo, hi)) in pairs.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(BadRange { dim, min: lo, max: hi });
            }
        }
        Ok(Self { pairs })
    }

    /// Per-dimension min/max over the training items.
    pub fn fit(train: &Dataset) -> Result<Self, HarnessError> {
        if train.is_empty() {
            return Err(HarnessError::EmptyDataset);
        }
        let dims = train.dims();
        let mut pairs = vec![(f64::INFINITY, f64::NEG_INFINITY); dims];
        for (fv, _) in train.items() {
            for (pair, &v) in pairs.iter_mut().zip(fv.values()) {
                pair.0 = pair.0.min(v);
                pair.1 = pair.1.max(v);
            }
        }
        Ok(Self { pairs })
    }

    pub fn dims(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    /// `(x - min) / (max - min)` clamped to [0,1]; constant dimensions map
    /// to 0.5.
    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.pairs.len(), "normalizer dimensionality mismatch");
        x.iter()
            .zip(&self.pairs)
            .map(|(&v, &(lo, hi))| {
                if lo == hi {
                    0.5
                } else {
                    ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dct::FeatureVector;

    fn dataset(rows: Vec<(Vec<f64>, usize)>) -> Dataset {
        let mut ds = Dataset::new(vec!["a".to_string(), "b".to_string()]).unwrap();
        for (i, (values, class)) in rows.into_iter().enumerate() {
            ds.push(FeatureVector::new(values, None).unwrap(), class, format!("row{i}"))
                .unwrap();
        }
        ds
    }

    #[test]
    fn single_item_gives_degenerate_ranges() {
        let ds = dataset(vec![(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0], 0)]);
        let norm = Normalizer::fit(&ds).unwrap();
        assert!(norm.pairs().iter().all(|&(lo, hi)| lo == hi));
        // constant dimensions map to the midpoint
        assert!(norm
            .normalize(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0])
            .iter()
            .all(|&v| v == 0.5));
    }

    #[test]
    fn extremes_map_to_unit_interval_bounds() {
        let lo = vec![0.0; 9];
        let hi = vec![1.0; 9];
        let ds = dataset(vec![(lo.clone(), 0), (hi.clone(), 1)]);
        let norm = Normalizer::fit(&ds).unwrap();
        assert!(norm.normalize(&lo).iter().all(|&v| v == 0.0));
        assert!(norm.normalize(&hi).iter().all(|&v| v == 1.0));
    }

    #[test]
    fn out_of_range_values_clamp() {
        let ds = dataset(vec![(vec![0.0; 9], 0), (vec![2.0; 9], 1)]);
        let norm = Normalizer::fit(&ds).unwrap();
        assert!(norm.normalize(&[5.0; 9]).iter().all(|&v| v == 1.0));
        assert!(norm.normalize(&[-3.0; 9]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pairs_roundtrip_and_validation() {
        let norm = Normalizer::from_pairs(vec![(0.0, 2.0), (1.0, 1.0)]).unwrap();
        assert_eq!(norm.normalize(&[1.0, 1.0]), vec![0.5, 0.5]);
        assert!(Normalizer::from_pairs(vec![(2.0, 0.0)]).is_err());
        assert!(Normalizer::from_pairs(vec![(0.0, f64::NAN)]).is_err());
    }
}
