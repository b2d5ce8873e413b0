//! Triangular membership partitions over [0,1], fuzzification of crisp
//! vectors, the normalized fuzzy difference, and class defuzzification.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FuzzyError {
    BadMfCount { m: usize },
    DimensionMismatch { expected: usize, got: usize },
    ZeroSum,
    NoWinner,
    BadLength { len: usize, classes: usize, m: usize },
}

impl fmt::Display for FuzzyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FuzzyError::BadMfCount { m } => {
                write!(f, "membership partition needs at least 2 functions, got {m}")
            }
            FuzzyError::DimensionMismatch { expected, got } => {
                write!(f, "fuzzy vector shape mismatch: expected {expected} degrees, got {got}")
            }
            FuzzyError::ZeroSum => {
                write!(f, "normalized fuzzy difference is undefined for two all-zero vectors")
            }
            FuzzyError::NoWinner => write!(f, "all class scores are zero (untrained output)"),
            FuzzyError::BadLength { len, classes, m } => {
                write!(f, "output length {len} fits neither {classes} classes nor {classes}x{m}")
            }
        }
    }
}

impl std::error::Error for FuzzyError {}

/// Evenly spaced triangular membership functions spanning [0,1].
///
/// Adjacent triangles overlap so that memberships sum to one everywhere
/// (partition of unity); at a center its own function is exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipPartition {
    centers: Vec<f64>,
}

impl MembershipPartition {
    pub fn new(m: usize) -> Result<Self, FuzzyError> {
        if m < 2 {
            return Err(FuzzyError::BadMfCount { m });
        }
        let centers = (0..m).map(|k| k as f64 / (m - 1) as f64).collect();
        Ok(Self { centers })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Membership degrees of `x`, clamped into [0,1] first. A value sitting
    /// exactly on a center activates that function alone with degree 1.
    pub fn fuzzify_scalar(&self, x: f64) -> Vec<f64> {
        let m = self.centers.len();
        let x = if x.is_nan() { 0.0 } else { x.clamp(0.0, 1.0) };
        let mut degrees = vec![0.0; m];
        if let Some(k) = self.centers.iter().position(|&c| c == x) {
            degrees[k] = 1.0;
            return degrees;
        }
        let t = x * (m - 1) as f64;
        let seg = (t as usize).min(m - 2);
        let local = t - seg as f64;
        degrees[seg] = 1.0 - local;
        degrees[seg + 1] = local;
        degrees
    }
}

/// Concatenated per-dimension membership degrees of one crisp vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyVector {
    degrees: Vec<f64>,
    dims: usize,
    m: usize,
}

impl FuzzyVector {
    pub fn from_degrees(degrees: Vec<f64>, dims: usize, m: usize) -> Result<Self, FuzzyError> {
        if degrees.len() != dims * m {
            return Err(FuzzyError::DimensionMismatch { expected: dims * m, got: degrees.len() });
        }
        Ok(Self { degrees, dims, m })
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn degrees_mut(&mut self) -> &mut [f64] {
        &mut self.degrees
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn mfs(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    /// The degrees of one crisp dimension.
    pub fn segment(&self, dim: usize) -> &[f64] {
        &self.degrees[dim * self.m..(dim + 1) * self.m]
    }
}

/// Fuzzify every dimension of a crisp vector against the same partition.
pub fn fuzzify_vector(x: &[f64], p: &MembershipPartition) -> FuzzyVector {
    let m = p.len();
    let mut degrees = Vec::with_capacity(x.len() * m);
    for &v in x {
        degrees.extend(p.fuzzify_scalar(v));
    }
    FuzzyVector { degrees, dims: x.len(), m }
}

/// How many components sit outside [0,1] and will be clamped by fuzzification.
pub fn count_out_of_range(x: &[f64]) -> usize {
    x.iter().filter(|v| !(0.0..=1.0).contains(*v)).count()
}

/// Local normalized fuzzy difference: `sum|a-b| / sum(a+b)`, in [0,1].
pub fn fuzzy_distance(a: &FuzzyVector, b: &FuzzyVector) -> Result<f64, FuzzyError> {
    if a.len() != b.len() {
        return Err(FuzzyError::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    fuzzy_distance_flat(a.degrees(), b.degrees())
}

/// Same difference over raw degree slices (shapes already checked by caller).
pub fn fuzzy_distance_flat(a: &[f64], b: &[f64]) -> Result<f64, FuzzyError> {
    if a.len() != b.len() {
        return Err(FuzzyError::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        num += (x - y).abs();
        den += x + y;
    }
    if den == 0.0 {
        return Err(FuzzyError::ZeroSum);
    }
    Ok(num / den)
}

/// Per-class crisp scores of a fuzzy output vector.
///
/// Accepts either one activation per class or `classes * m` output-MF
/// activations; the latter are collapsed by weighting each degree with its
/// MF center.
pub fn class_scores(
    out: &[f64],
    classes: usize,
    p: &MembershipPartition,
) -> Result<Vec<f64>, FuzzyError> {
    let m = p.len();
    if out.len() == classes {
        return Ok(out.to_vec());
    }
    if out.len() != classes * m {
        return Err(FuzzyError::BadLength { len: out.len(), classes, m });
    }
    let centers = p.centers();
    let scores = out
        .chunks_exact(m)
        .map(|seg| seg.iter().zip(centers).map(|(d, c)| d * c).sum())
        .collect();
    Ok(scores)
}

/// Winning class of a fuzzy output vector; ties go to the lowest index.
pub fn defuzzify_class(
    out: &[f64],
    classes: usize,
    p: &MembershipPartition,
) -> Result<usize, FuzzyError> {
    let scores = class_scores(out, classes, p)?;
    argmax_class(&scores)
}

/// Index of the maximum score; all-zero scores signal an untrained model.
pub fn argmax_class(scores: &[f64]) -> Result<usize, FuzzyError> {
    if scores.iter().all(|&s| s == 0.0) {
        return Err(FuzzyError::NoWinner);
    }
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Crisp one-hot vector for a class label.
pub fn one_hot(class: usize, classes: usize) -> Vec<f64> {
    let mut v = vec![0.0; classes];
    v[class] = 1.0;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn partition(m: usize) -> MembershipPartition {
        MembershipPartition::new(m).unwrap()
    }

    #[test]
    fn rejects_single_mf() {
        assert_eq!(MembershipPartition::new(1).unwrap_err(), FuzzyError::BadMfCount { m: 1 });
    }

    #[test]
    fn edge_and_midpoint_degrees() {
        let p = partition(4);
        assert_eq!(p.fuzzify_scalar(0.0), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(p.fuzzify_scalar(1.0), vec![0.0, 0.0, 0.0, 1.0]);
        let mid = p.fuzzify_scalar(0.5);
        assert_eq!(mid, vec![0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn centers_fuzzify_to_exact_one_hot() {
        for m in 2..=7 {
            let p = partition(m);
            for (k, &c) in p.centers().iter().enumerate() {
                let d = p.fuzzify_scalar(c);
                for (i, &v) in d.iter().enumerate() {
                    assert_eq!(v, if i == k { 1.0 } else { 0.0 }, "m={m} center {k}");
                }
            }
        }
    }

    #[test]
    fn out_of_range_is_clamped() {
        let p = partition(4);
        assert_eq!(p.fuzzify_scalar(-0.5), p.fuzzify_scalar(0.0));
        assert_eq!(p.fuzzify_scalar(1.7), p.fuzzify_scalar(1.0));
        assert_eq!(count_out_of_range(&[-0.1, 0.5, 1.2, 1.0]), 2);
    }

    #[test]
    fn vector_fuzzification_concatenates_segments() {
        let p = partition(4);
        let fv = fuzzify_vector(&[0.0, 1.0], &p);
        assert_eq!(fv.degrees(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(fv.dims(), 2);
        assert_eq!(fv.segment(1), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn distance_hand_cases() {
        let a = FuzzyVector::from_degrees(vec![1.0, 0.0], 1, 2).unwrap();
        let b = FuzzyVector::from_degrees(vec![0.0, 1.0], 1, 2).unwrap();
        assert_eq!(fuzzy_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(fuzzy_distance(&a, &b).unwrap(), 1.0);

        let c = FuzzyVector::from_degrees(vec![0.5, 0.5], 1, 2).unwrap();
        let d = FuzzyVector::from_degrees(vec![0.25, 0.75], 1, 2).unwrap();
        assert_eq!(fuzzy_distance(&c, &d).unwrap(), 0.25);
    }

    #[test]
    fn distance_errors() {
        let a = FuzzyVector::from_degrees(vec![0.0, 0.0], 1, 2).unwrap();
        assert_eq!(fuzzy_distance(&a, &a).unwrap_err(), FuzzyError::ZeroSum);
        let b = FuzzyVector::from_degrees(vec![1.0, 0.0, 0.0], 1, 3).unwrap();
        assert!(matches!(
            fuzzy_distance(&a, &b),
            Err(FuzzyError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn defuzzification_cases() {
        let p = partition(2);
        // one activation per class
        assert_eq!(defuzzify_class(&[0.2, 0.7, 0.1], 3, &p).unwrap(), 1);
        assert_eq!(defuzzify_class(&[0.5, 0.5, 0.5], 3, &p).unwrap(), 0);
        assert_eq!(defuzzify_class(&[0.0, 0.0], 2, &p).unwrap_err(), FuzzyError::NoWinner);

        // class-by-MF activations: one-hot class 1 of 2, m = 4
        let p4 = partition(4);
        let out = fuzzify_vector(&one_hot(1, 2), &p4);
        assert_eq!(defuzzify_class(out.degrees(), 2, &p4).unwrap(), 1);
        let scores = class_scores(out.degrees(), 2, &p4).unwrap();
        assert_eq!(scores, vec![0.0, 1.0]);
    }

    #[test]
    fn bad_output_length() {
        let p = partition(4);
        assert!(matches!(
            defuzzify_class(&[0.1; 7], 3, &p),
            Err(FuzzyError::BadLength { .. })
        ));
    }

    proptest! {
        #[test]
        fn partition_of_unity(m in 2usize..=7, x in -0.2f64..1.2) {
            let p = partition(m);
            let d = p.fuzzify_scalar(x);
            let sum: f64 = d.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(d.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }

        #[test]
        fn at_most_two_nonzero_degrees(m in 2usize..=7, x in 0.0f64..=1.0) {
            let p = partition(m);
            let nonzero = p.fuzzify_scalar(x).iter().filter(|&&v| v > 0.0).count();
            prop_assert!(nonzero == 1 || nonzero == 2);
        }

        #[test]
        fn distance_is_symmetric_and_bounded(
            xs in prop::collection::vec(0.0f64..=1.0, 1..6),
            ys in prop::collection::vec(0.0f64..=1.0, 1..6),
        ) {
            let n = xs.len().min(ys.len());
            let p = partition(4);
            let a = fuzzify_vector(&xs[..n], &p);
            let b = fuzzify_vector(&ys[..n], &p);
            let dab = fuzzy_distance(&a, &b).unwrap();
            let dba = fuzzy_distance(&b, &a).unwrap();
            prop_assert_eq!(dab, dba);
            prop_assert!((0.0..=1.0).contains(&dab));
            prop_assert_eq!(fuzzy_distance(&a, &a).unwrap(), 0.0);
        }
    }
}
