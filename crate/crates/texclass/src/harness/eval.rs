//! Per-class correctness counts and the reliability metric.

use crate::dct::FeatureVector;

use super::dataset::Dataset;
use super::HarnessError;

/// Per-class correct/incorrect counts over a test set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationReport {
    class_names: Vec<String>,
    correct: Vec<usize>,
    incorrect: Vec<usize>,
}

impl EvaluationReport {
    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn correct(&self) -> &[usize] {
        &self.correct
    }

    pub fn incorrect(&self) -> &[usize] {
        &self.incorrect
    }

    pub fn correct_total(&self) -> usize {
        self.correct.iter().sum()
    }

    pub fn incorrect_total(&self) -> usize {
        self.incorrect.iter().sum()
    }

    pub fn total(&self) -> usize {
        self.correct_total() + self.incorrect_total()
    }

    pub fn reliability_percent(&self) -> f64 {
        100.0 * self.correct_total() as f64 / self.total() as f64
    }

    /// Exact percentage when it terminates within two decimals, otherwise
    /// rounded to one.
    pub fn reliability_display(&self) -> String {
        format_reliability(self.correct_total(), self.total())
    }

    pub fn reliability_rounded(&self) -> i64 {
        rounded_reliability(self.correct_total(), self.total())
    }

    /// Aligned table with per-class rows and the reliability line.
    pub fn render_text(&self) -> String {
        let name_width = self
            .class_names
            .iter()
            .map(|n| n.len())
            .chain(["class".len(), "total".len()])
            .max()
            .unwrap_or(5);
        let mut out = String::new();
        out.push_str(&format!(
            "{:<name_width$}  {:>7}  {:>9}  {:>5}\n",
            "class", "correct", "incorrect", "total"
        ));
        for (i, name) in self.class_names.iter().enumerate() {
            out.push_str(&format!(
                "{:<name_width$}  {:>7}  {:>9}  {:>5}\n",
                name,
                self.correct[i],
                self.incorrect[i],
                self.correct[i] + self.incorrect[i]
            ));
        }
        out.push_str(&format!(
            "{:<name_width$}  {:>7}  {:>9}  {:>5}\n",
            "total",
            self.correct_total(),
            self.incorrect_total(),
            self.total()
        ));
        out.push_str(&format!(
            "reliability {}% (rounds to {}%)\n",
            self.reliability_display(),
            self.reliability_rounded()
        ));
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from("class,correct,incorrect,total\n");
        for (i, name) in self.class_names.iter().enumerate() {
            out.push_str(&format!(
                "{name},{},{},{}\n",
                self.correct[i],
                self.incorrect[i],
                self.correct[i] + self.incorrect[i]
            ));
        }
        out.push_str(&format!(
            "total,{},{},{}\n",
            self.correct_total(),
            self.incorrect_total(),
            self.total()
        ));
        out.push_str(&format!(
            "reliability,{},{}\n",
            self.reliability_display(),
            self.reliability_rounded()
        ));
        out
    }
}

/// Run a predictor over the test items and count hits per true class.
pub fn evaluate(
    mut predict: impl FnMut(&FeatureVector) -> Result<usize, HarnessError>,
    test: &Dataset,
) -> Result<EvaluationReport, HarnessError> {
    if test.is_empty() {
        return Err(HarnessError::EmptyDataset);
    }
    let classes = test.classes();
    let mut correct = vec![0; classes];
    let mut incorrect = vec![0; classes];
    for (fv, truth) in test.items() {
        let predicted = predict(fv)?;
        if predicted == *truth {
            correct[*truth] += 1;
        } else {
            incorrect[*truth] += 1;
        }
    }
    Ok(EvaluationReport { class_names: test.class_names().to_vec(), correct, incorrect })
}

/// Percentage `100 * correct / total` printed exactly when it terminates
/// within two decimals (87.5, 81.25), otherwise rounded to one (85.4).
pub fn format_reliability(correct: usize, total: usize) -> String {
    assert!(total > 0, "reliability of an empty test set");
    let percent = 100.0 * correct as f64 / total as f64;
    if (10_000 * correct).is_multiple_of(total) {
        let s = format!("{percent:.2}");
        let trimmed = s.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    } else {
        format!("{percent:.1}")
    }
}

/// Reliability rounded to the nearest whole percent.
pub fn rounded_reliability(correct: usize, total: usize) -> i64 {
    assert!(total > 0, "reliability of an empty test set");
    (100.0 * correct as f64 / total as f64).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_dataset() -> Dataset {
        let mut ds = Dataset::new(vec!["a".to_string(), "b".to_string()]).unwrap();
        for i in 0..4 {
            let class = i % 2;
            ds.push(
                FeatureVector::new(vec![class as f64; 9], None).unwrap(),
                class,
                format!("r{i}"),
            )
            .unwrap();
        }
        ds
    }

    #[test]
    fn perfect_predictor() {
        let ds = toy_dataset();
        let report = evaluate(|fv| Ok(fv.values()[0] as usize), &ds).unwrap();
        assert_eq!(report.correct(), &[2, 2]);
        assert_eq!(report.incorrect(), &[0, 0]);
        assert_eq!(report.reliability_percent(), 100.0);
        assert_eq!(report.reliability_display(), "100");
    }

    #[test]
    fn counts_add_up_for_any_predictor() {
        let ds = toy_dataset();
        let mut flip = false;
        let report = evaluate(
            |_| {
                flip = !flip;
                Ok(usize::from(flip))
            },
            &ds,
        )
        .unwrap();
        assert_eq!(report.total(), ds.len());
        assert_eq!(report.correct_total() + report.incorrect_total(), ds.len());
    }

    #[test]
    fn table_two_arithmetic() {
        assert_eq!(format_reliability(42, 48), "87.5");
        assert_eq!(rounded_reliability(42, 48), 88);
        assert_eq!(format_reliability(41, 48), "85.4");
        assert_eq!(format_reliability(39, 48), "81.25");
    }

    #[test]
    fn report_rendering_mentions_each_class() {
        let ds = toy_dataset();
        let report = evaluate(|_| Ok(0), &ds).unwrap();
        let text = report.render_text();
        assert!(text.contains("a"));
        assert!(text.contains("b"));
        assert!(text.contains("reliability 50%"));
        let csv = report.render_csv();
        assert!(csv.starts_with("class,correct,incorrect,total\n"));
        assert!(csv.contains("total,2,2,4"));
    }

    #[test]
    fn empty_test_set_is_an_error() {
        let ds = Dataset::new(vec!["a".to_string(), "b".to_string()]).unwrap();
        assert!(matches!(evaluate(|_| Ok(0), &ds), Err(HarnessError::EmptyDataset)));
    }
}
