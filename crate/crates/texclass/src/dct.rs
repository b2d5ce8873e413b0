//! Orthonormal 2D DCT-II over square blocks and the 9-coefficient
//! per-block feature extraction.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::imaging::{partition_blocks, Block, GrayImage, ImageError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DctError {
    Imaging(ImageError),
    MaskOutOfRange { u: usize, v: usize, n: usize },
    MaskShape { reason: &'static str },
    FeatureLength { got: usize },
}

impl fmt::Display for DctError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DctError::Imaging(e) => e.fmt(f),
            DctError::MaskOutOfRange { u, v, n } => {
                write!(f, "mask position ({u},{v}) outside {n}x{n} block")
            }
            DctError::MaskShape { reason } => write!(f, "invalid coefficient mask: {reason}"),
            DctError::FeatureLength { got } => {
                write!(f, "feature vector length {got} is not a multiple of 9")
            }
        }
    }
}

impl std::error::Error for DctError {}

impl From<ImageError> for DctError {
    fn from(e: ImageError) -> Self {
        DctError::Imaging(e)
    }
}

/// Transform coefficients of one block, row-major `coeffs[u * n + v] = F(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientBlock {
    n: usize,
    coeffs: Vec<f64>,
}

impl CoefficientBlock {
    pub fn new(n: usize, coeffs: Vec<f64>) -> Result<Self, DctError> {
        if coeffs.len() != n * n {
            return Err(DctError::Imaging(ImageError::ShapeMismatch {
                expected: n * n,
                got: coeffs.len(),
            }));
        }
        Ok(Self { n, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn at(&self, u: usize, v: usize) -> f64 {
        self.coeffs[u * self.n + v]
    }
}

/// The 9 coefficient positions kept per block; position 0 is always DC.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientMask {
    positions: [(usize, usize); 9],
}

impl CoefficientMask {
    pub fn new(positions: [(usize, usize); 9]) -> Result<Self, DctError> {
        if positions[0] != (0, 0) {
            return Err(DctError::MaskShape { reason: "first position must be (0,0)" });
        }
        for i in 0..9 {
            for j in (i + 1)..9 {
                if positions[i] == positions[j] {
                    return Err(DctError::MaskShape { reason: "positions must be distinct" });
                }
            }
        }
        Ok(Self { positions })
    }

    pub fn positions(&self) -> &[(usize, usize); 9] {
        &self.positions
    }

    fn check_fits(&self, n: usize) -> Result<(), DctError> {
        for &(u, v) in &self.positions {
            if u >= n || v >= n {
                return Err(DctError::MaskOutOfRange { u, v, n });
            }
        }
        Ok(())
    }
}

impl Default for CoefficientMask {
    /// Zigzag order over the lowest frequencies: DC, then the 8 AC positions
    /// nearest the upper-left corner.
    fn default() -> Self {
        Self {
            positions: [
                (0, 0),
                (0, 1),
                (1, 0),
                (2, 0),
                (1, 1),
                (0, 2),
                (0, 3),
                (1, 2),
                (2, 1),
            ],
        }
    }
}

impl fmt::Display for CoefficientMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.positions.iter().map(|&(u, v)| format!("{u}:{v}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for CoefficientMask {
    type Err = DctError;

    /// Parses `"u:v,u:v,..."` with exactly nine pairs.
    fn from_str(s: &str) -> Result<Self, DctError> {
        let mut positions = [(0usize, 0usize); 9];
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 9 {
            return Err(DctError::MaskShape { reason: "expected exactly 9 u:v pairs" });
        }
        for (slot, part) in positions.iter_mut().zip(parts) {
            let (u, v) = part
                .split_once(':')
                .ok_or(DctError::MaskShape { reason: "positions must look like u:v" })?;
            let u = u.trim().parse::<usize>().map_err(|_| DctError::MaskShape {
                reason: "position indices must be non-negative integers",
            })?;
            let v = v.trim().parse::<usize>().map_err(|_| DctError::MaskShape {
                reason: "position indices must be non-negative integers",
            })?;
            *slot = (u, v);
        }
        CoefficientMask::new(positions)
    }
}

/// Concatenated per-block features, 9 per block.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
    block_size: Option<usize>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, block_size: Option<usize>) -> Result<Self, DctError> {
        if values.is_empty() || !values.len().is_multiple_of(9) {
            return Err(DctError::FeatureLength { got: values.len() });
        }
        Ok(Self { values, block_size })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn block_count(&self) -> usize {
        self.values.len() / 9
    }

    /// Block side used at extraction time; absent for vectors loaded from CSV.
    pub fn block_size(&self) -> Option<usize> {
        self.block_size
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Basis matrix `C[u][i] = alpha(u) * cos((2i+1)u*pi/2N)` for the separable form.
fn basis(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut c = vec![0.0; n * n];
    for u in 0..n {
        let alpha = if u == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        for i in 0..n {
            c[u * n + i] = alpha * ((2 * i + 1) as f64 * u as f64 * PI / (2.0 * nf)).cos();
        }
    }
    c
}

/// Forward orthonormal DCT-II, computed row-column.
pub fn forward_dct(block: &Block) -> CoefficientBlock {
    let n = block.n();
    let c = basis(n);
    let f = block.values();
    // temp = C * f
    let mut temp = vec![0.0; n * n];
    for u in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                acc += c[u * n + i] * f[i * n + j];
            }
            temp[u * n + j] = acc;
        }
    }
    // F = temp * C^T
    let mut coeffs = vec![0.0; n * n];
    for u in 0..n {
        for v in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += temp[u * n + j] * c[v * n + j];
            }
            coeffs[u * n + v] = acc;
        }
    }
    CoefficientBlock { n, coeffs }
}

/// Inverse of [`forward_dct`] under the same orthonormal convention.
pub fn inverse_dct(cb: &CoefficientBlock) -> Block {
    let n = cb.n();
    let c = basis(n);
    let coeffs = cb.coeffs();
    // temp = C^T * F
    let mut temp = vec![0.0; n * n];
    for i in 0..n {
        for v in 0..n {
            let mut acc = 0.0;
            for u in 0..n {
                acc += c[u * n + i] * coeffs[u * n + v];
            }
            temp[i * n + v] = acc;
        }
    }
    // f = temp * C
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for v in 0..n {
                acc += temp[i * n + v] * c[v * n + j];
            }
            values[i * n + j] = acc;
        }
    }
    Block::new(n, values).expect("inverse preserves shape")
}

/// Read the masked coefficients in mask order; index 0 is the DC coefficient.
pub fn extract_block_features(
    cb: &CoefficientBlock,
    mask: &CoefficientMask,
) -> Result<[f64; 9], DctError> {
    mask.check_fits(cb.n())?;
    let mut out = [0.0; 9];
    for (slot, &(u, v)) in out.iter_mut().zip(mask.positions()) {
        *slot = cb.at(u, v);
    }
    Ok(out)
}

/// Transform every block of the image and concatenate the per-block features.
pub fn extract_image_features(
    img: &GrayImage,
    n: usize,
    mask: &CoefficientMask,
) -> Result<FeatureVector, DctError> {
    mask.check_fits(n)?;
    let blocks = partition_blocks(img, n)?;
    let mut values = Vec::with_capacity(9 * blocks.len());
    for block in &blocks {
        let coeffs = forward_dct(block);
        values.extend_from_slice(&extract_block_features(&coeffs, mask)?);
    }
    FeatureVector::new(values, Some(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::GrayImage;
    use proptest::prelude::*;

    fn constant_block(n: usize, value: f64) -> Block {
        Block::new(n, vec![value; n * n]).unwrap()
    }

    #[test]
    fn zero_block_transforms_to_zero() {
        let c = forward_dct(&constant_block(8, 0.0));
        assert!(c.coeffs().iter().all(|&v| v == 0.0));
        let back = inverse_dct(&c);
        assert!(back.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_block_concentrates_in_dc() {
        let c = forward_dct(&constant_block(8, 128.0));
        assert!((c.at(0, 0) - 1024.0).abs() < 1e-9);
        for u in 0..8 {
            for v in 0..8 {
                if (u, v) != (0, 0) {
                    assert!(c.at(u, v).abs() < 1e-9, "AC({u},{v}) = {}", c.at(u, v));
                }
            }
        }
    }

    #[test]
    fn two_by_two_impulse() {
        let b = Block::new(2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let c = forward_dct(&b);
        for &v in c.coeffs() {
            assert!((v - 0.5).abs() < 1e-12);
        }
        // and back
        let back = inverse_dct(&c);
        for (got, want) in back.values().iter().zip(b.values()) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_of_dc_only_is_constant() {
        let mut coeffs = vec![0.0; 64];
        coeffs[0] = 1024.0;
        let c = CoefficientBlock::new(8, coeffs).unwrap();
        let b = inverse_dct(&c);
        for &v in b.values() {
            assert!((v - 128.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mask_validation() {
        assert!(CoefficientMask::new([
            (0, 1),
            (0, 0),
            (1, 0),
            (2, 0),
            (1, 1),
            (0, 2),
            (0, 3),
            (1, 2),
            (2, 1)
        ])
        .is_err());
        assert!(CoefficientMask::new([
            (0, 0),
            (0, 1),
            (0, 1),
            (2, 0),
            (1, 1),
            (0, 2),
            (0, 3),
            (1, 2),
            (2, 1)
        ])
        .is_err());
        let mask: CoefficientMask = "0:0,0:1,1:0,2:0,1:1,0:2,0:3,1:2,2:1".parse().unwrap();
        assert_eq!(mask, CoefficientMask::default());
        assert_eq!(mask.to_string().parse::<CoefficientMask>().unwrap(), mask);
    }

    #[test]
    fn masked_features_of_constant_block() {
        let c = forward_dct(&constant_block(8, 7.0));
        let feats = extract_block_features(&c, &CoefficientMask::default()).unwrap();
        assert!((feats[0] - 8.0 * 7.0).abs() < 1e-9);
        for &v in &feats[1..] {
            assert!(v.abs() < 1e-9);
        }
    }

    #[test]
    fn first_masked_feature_is_the_dc_coefficient() {
        let values: Vec<f64> = (0..64).map(|i| ((i * 37) % 256) as f64).collect();
        let c = forward_dct(&Block::new(8, values).unwrap());
        let feats = extract_block_features(&c, &CoefficientMask::default()).unwrap();
        assert_eq!(feats[0], c.at(0, 0));
    }

    #[test]
    fn mask_must_fit_block() {
        let c = forward_dct(&constant_block(2, 1.0));
        let err = extract_block_features(&c, &CoefficientMask::default()).unwrap_err();
        assert!(matches!(err, DctError::MaskOutOfRange { .. }));
    }

    #[test]
    fn image_feature_lengths() {
        let img = GrayImage::new(48, 48, 255, vec![9; 48 * 48]).unwrap();
        let fv = extract_image_features(&img, 8, &CoefficientMask::default()).unwrap();
        assert_eq!(fv.len(), 324);
        assert_eq!(fv.block_count(), 36);

        let img = GrayImage::new(8, 8, 255, vec![0; 64]).unwrap();
        let fv = extract_image_features(&img, 8, &CoefficientMask::default()).unwrap();
        assert_eq!(fv.len(), 9);
    }

    #[test]
    fn constant_image_blocks_all_alike() {
        let img = GrayImage::new(16, 16, 255, vec![50; 256]).unwrap();
        let fv = extract_image_features(&img, 8, &CoefficientMask::default()).unwrap();
        for chunk in fv.values().chunks(9) {
            assert!((chunk[0] - 8.0 * 50.0).abs() < 1e-9);
            for &v in &chunk[1..] {
                assert!(v.abs() < 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn roundtrip_and_energy(n in prop::sample::select(vec![2usize, 4, 8]), seed in any::<u64>()) {
            let mut s = seed;
            let values: Vec<f64> = (0..n * n)
                .map(|_| {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    ((s >> 33) % 256) as f64
                })
                .collect();
            let b = Block::new(n, values).unwrap();
            let c = forward_dct(&b);

            let back = inverse_dct(&c);
            for (got, want) in back.values().iter().zip(b.values()) {
                prop_assert!((got - want).abs() < 1e-9);
            }

            let e_spatial: f64 = b.values().iter().map(|v| v * v).sum();
            let e_freq: f64 = c.coeffs().iter().map(|v| v * v).sum();
            prop_assert!((e_spatial - e_freq).abs() <= 1e-6 * e_spatial.max(1.0));

            let mean: f64 = b.values().iter().sum::<f64>() / (n * n) as f64;
            prop_assert!((c.at(0, 0) - n as f64 * mean).abs() < 1e-9);
        }
    }
}
