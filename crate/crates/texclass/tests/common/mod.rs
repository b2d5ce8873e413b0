//! Shared test helpers: the direct-summation DCT oracle and a tiny
//! deterministic value source independent of the library's generator.
#![allow(dead_code)] // each test target compiles this module separately

use std::f64::consts::PI;

/// O(N^4) direct summation of the orthonormal 2D DCT-II. Kept deliberately
/// independent of the library's separable row-column implementation.
pub fn direct_dct(values: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(values.len(), n * n);
    let nf = n as f64;
    let alpha = |k: usize| if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
    let mut out = vec![0.0; n * n];
    for u in 0..n {
        for v in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += values[i * n + j]
                        * ((2 * i + 1) as f64 * u as f64 * PI / (2.0 * nf)).cos()
                        * ((2 * j + 1) as f64 * v as f64 * PI / (2.0 * nf)).cos();
                }
            }
            out[u * n + v] = alpha(u) * alpha(v) * acc;
        }
    }
    out
}

/// Linear congruential stream for test inputs; not the library's SplitMix64.
pub struct TestRng(pub u64);

impl TestRng {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}
