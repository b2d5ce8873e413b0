//! The CSV interchange formats: labeled features, label manifests, and
//! prediction listings.

use crate::dct::FeatureVector;

use super::dataset::{validate_class_name, Dataset};
use super::HarnessError;

/// One row per item: label, then the feature values at full precision.
/// Columns are named `b<block>_c<coefficient>`.
pub fn features_to_csv(ds: &Dataset) -> String {
    let mut out = String::from("label");
    let blocks = ds.dims() / 9;
    for b in 0..blocks {
        for c in 0..9 {
            out.push_str(&format!(",b{b}_c{c}"));
        }
    }
    out.push('\n');
    for (fv, class) in ds.items() {
        out.push_str(&ds.class_names()[*class]);
        for v in fv.values() {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

/// Parse a feature CSV; class indices follow first appearance order.
pub fn dataset_from_csv(text: &str) -> Result<Dataset, HarnessError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or(HarnessError::Csv { line: 1, reason: "empty file".to_string() })?;
    let mut header_fields = header.split(',');
    if header_fields.next() != Some("label") {
        return Err(HarnessError::Csv {
            line: 1,
            reason: "header must start with a `label` column".to_string(),
        });
    }
    let feature_cols = header_fields.count();
    if feature_cols == 0 || feature_cols % 9 != 0 {
        return Err(HarnessError::Csv {
            line: 1,
            reason: format!("{feature_cols} feature columns is not a positive multiple of 9"),
        });
    }

    let mut class_names: Vec<String> = Vec::new();
    let mut rows: Vec<(Vec<f64>, usize, String)> = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let label = fields.next().unwrap_or_default();
        validate_class_name(label)
            .map_err(|_| HarnessError::Csv { line: line_no, reason: format!("bad label {label:?}") })?;
        let mut values = Vec::with_capacity(feature_cols);
        for field in fields {
            let v: f64 = field.parse().map_err(|_| HarnessError::Csv {
                line: line_no,
                reason: format!("bad feature value {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(HarnessError::Csv {
                    line: line_no,
                    reason: format!("non-finite feature value {field:?}"),
                });
            }
            values.push(v);
        }
        if values.len() != feature_cols {
            return Err(HarnessError::Csv {
                line: line_no,
                reason: format!("row has {} values, header names {feature_cols}", values.len()),
            });
        }
        let class = match class_names.iter().position(|n| n == label) {
            Some(c) => c,
            None => {
                class_names.push(label.to_string());
                class_names.len() - 1
            }
        };
        rows.push((values, class, format!("row{line_no}")));
    }
    if rows.is_empty() {
        return Err(HarnessError::Csv { line: 1, reason: "no data rows".to_string() });
    }
    let mut ds = Dataset::new(class_names)?;
    for (values, class, source) in rows {
        ds.push(FeatureVector::new(values, None).map_err(HarnessError::Dct)?, class, source)?;
    }
    Ok(ds)
}

/// `filename,class` listing that accompanies a generated image directory.
pub fn manifest_to_csv(entries: &[(String, String)]) -> String {
    let mut out = String::from("filename,class\n");
    for (filename, class) in entries {
        out.push_str(&format!("{filename},{class}\n"));
    }
    out
}

pub fn manifest_from_csv(text: &str) -> Result<Vec<(String, String)>, HarnessError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "filename,class")) => {}
        _ => {
            return Err(HarnessError::Csv {
                line: 1,
                reason: "manifest header must be `filename,class`".to_string(),
            })
        }
    }
    let mut entries = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.is_empty() {
            continue;
        }
        let (filename, class) = line.split_once(',').ok_or(HarnessError::Csv {
            line: line_no,
            reason: "manifest rows need `filename,class`".to_string(),
        })?;
        if filename.is_empty() {
            return Err(HarnessError::Csv {
                line: line_no,
                reason: "empty filename".to_string(),
            });
        }
        validate_class_name(class).map_err(|_| HarnessError::Csv {
            line: line_no,
            reason: format!("bad class label {class:?}"),
        })?;
        entries.push((filename.to_string(), class.to_string()));
    }
    if entries.is_empty() {
        return Err(HarnessError::Csv { line: 1, reason: "no manifest rows".to_string() });
    }
    Ok(entries)
}

/// Predictions next to the true labels, one row per test item.
pub fn predictions_to_csv(ds: &Dataset, predicted_names: &[String]) -> String {
    let mut out = String::from("source,label,predicted\n");
    for (i, (_, class)) in ds.items().iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            ds.source_ids()[i],
            ds.class_names()[*class],
            predicted_names[i]
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feature_row(tag: f64) -> FeatureVector {
        FeatureVector::new((0..9).map(|i| tag + i as f64 * 0.125).collect(), None).unwrap()
    }

    #[test]
    fn features_roundtrip_bit_exact() {
        let mut ds = Dataset::new(vec!["brick".to_string(), "metal".to_string()]).unwrap();
        ds.push(feature_row(1.5), 0, "a".into()).unwrap();
        ds.push(feature_row(-0.037), 1, "b".into()).unwrap();
        ds.push(feature_row(1e-17), 0, "c".into()).unwrap();
        let csv = features_to_csv(&ds);
        assert!(csv.starts_with("label,b0_c0,b0_c1"));
        let parsed = dataset_from_csv(&csv).unwrap();
        assert_eq!(parsed.class_names(), ds.class_names());
        for ((a, ca), (b, cb)) in parsed.items().iter().zip(ds.items()) {
            assert_eq!(ca, cb);
            assert_eq!(a.values(), b.values());
        }
    }

    #[test]
    fn csv_errors_name_the_line() {
        assert!(matches!(
            dataset_from_csv(""),
            Err(HarnessError::Csv { line: 1, .. })
        ));
        assert!(matches!(
            dataset_from_csv("nope,b0_c0\n"),
            Err(HarnessError::Csv { line: 1, .. })
        ));
        // 3 feature columns is not a multiple of 9
        assert!(dataset_from_csv("label,a,b,c\nx,1,2,3\n").is_err());
        let header: String = features_to_csv(&{
            let mut ds = Dataset::new(vec!["x".to_string()]).unwrap();
            ds.push(feature_row(0.0), 0, "s".into()).unwrap();
            ds
        })
        .lines()
        .next()
        .unwrap()
        .to_string();
        let bad_value = format!("{header}\nx,1,2,3,4,5,6,7,8,oops\n");
        assert!(matches!(
            dataset_from_csv(&bad_value),
            Err(HarnessError::Csv { line: 2, .. })
        ));
        let short_row = format!("{header}\nx,1,2,3\n");
        assert!(matches!(
            dataset_from_csv(&short_row),
            Err(HarnessError::Csv { line: 2, .. })
        ));
        let nan_row = format!("{header}\nx,1,2,3,4,5,6,7,8,NaN\n");
        assert!(dataset_from_csv(&nan_row).is_err());
    }

    #[test]
    fn manifest_roundtrip() {
        let entries = vec![
            ("brick_000.pgm".to_string(), "brick".to_string()),
            ("metal_000.pgm".to_string(), "metal".to_string()),
        ];
        let csv = manifest_to_csv(&entries);
        assert_eq!(manifest_from_csv(&csv).unwrap(), entries);
        assert!(manifest_from_csv("bogus\n").is_err());
        assert!(manifest_from_csv("filename,class\nno-comma\n").is_err());
    }
}
