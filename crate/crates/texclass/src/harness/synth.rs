//! Deterministic procedural textures standing in for a photographic texture
//! database: brick (grid of mortar lines), metal (oriented sinusoidal bands
//! with specular streaks), and rural (smoothed low-frequency value noise).

use std::fmt;
use std::str::FromStr;

use crate::imaging::GrayImage;

use super::rng::SplitMix64;
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextureFamily {
    Brick,
    Metal,
    Rural,
}

impl fmt::Display for TextureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TextureFamily::Brick => write!(f, "brick"),
            TextureFamily::Metal => write!(f, "metal"),
            TextureFamily::Rural => write!(f, "rural"),
        }
    }
}

impl FromStr for TextureFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "brick" => Ok(TextureFamily::Brick),
            "metal" => Ok(TextureFamily::Metal),
            "rural" => Ok(TextureFamily::Rural),
            other => Err(format!("unknown texture family {other:?} (brick, metal, rural)")),
        }
    }
}

/// One generated image with its class index into the family list.
#[derive(Debug, Clone)]
pub struct SynthImage {
    pub filename: String,
    pub class: usize,
    pub image: GrayImage,
}

fn clamp_gray(v: f64) -> u16 {
    v.round().clamp(0.0, 255.0) as u16
}

fn brick_texture(size: usize, rng: &mut SplitMix64) -> GrayImage {
    let brick_h = 6 + rng.below(5) as usize;
    let brick_w = 10 + rng.below(7) as usize;
    let mortar = 1 + rng.below(2) as usize;
    let phase = rng.below(brick_w as u64) as usize;
    let brick_base = rng.range_f64(150.0, 195.0);
    let mortar_base = rng.range_f64(40.0, 75.0);
    let noise_amp = rng.range_f64(6.0, 14.0);
    let mut data = Vec::with_capacity(size * size);
    for y in 0..size {
        let row = y / brick_h;
        let y_in = y % brick_h;
        let row_shift = phase + if row % 2 == 1 { brick_w / 2 } else { 0 };
        for x in 0..size {
            let x_in = (x + row_shift) % brick_w;
            let base = if y_in < mortar || x_in < mortar { mortar_base } else { brick_base };
            data.push(clamp_gray(base + rng.range_f64(-noise_amp, noise_amp)));
        }
    }
    GrayImage::new(size, size, 255, data).expect("generator produces a full raster")
}

fn metal_texture(size: usize, rng: &mut SplitMix64) -> GrayImage {
    let theta = rng.range_f64(-0.12, 0.12);
    let cycles = rng.range_f64(6.0, 7.0);
    let phase = rng.range_f64(0.0, std::f64::consts::TAU);
    let amp = rng.range_f64(70.0, 90.0);
    let (sin_t, cos_t) = theta.sin_cos();
    let streak_count = 2 + rng.below(3) as usize;
    let streaks: Vec<(f64, f64, f64)> = (0..streak_count)
        .map(|_| {
            (
                rng.below(size as u64) as f64,
                1.0 + rng.next_f64() * 2.0,
                rng.range_f64(20.0, 40.0),
            )
        })
        .collect();
    let mut data = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let proj = (x as f64 * cos_t + y as f64 * sin_t) / size as f64;
            let mut v = 128.0 + amp * (std::f64::consts::TAU * cycles * proj + phase).sin();
            for &(y0, half_width, gain) in &streaks {
                let d = (y as f64 - y0).abs();
                if d <= half_width {
                    v += gain * (1.0 - d / (half_width + 1.0));
                }
            }
            data.push(clamp_gray(v + rng.range_f64(-6.0, 6.0)));
        }
    }
    GrayImage::new(size, size, 255, data).expect("generator produces a full raster")
}

fn lattice(rng: &mut SplitMix64, cells: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..cells * cells).map(|_| rng.range_f64(lo, hi)).collect()
}

fn bilinear(grid: &[f64], cells: usize, fx: f64, fy: f64) -> f64 {
    let x0 = (fx as usize).min(cells - 2);
    let y0 = (fy as usize).min(cells - 2);
    let tx = (fx - x0 as f64).clamp(0.0, 1.0);
    let ty = (fy - y0 as f64).clamp(0.0, 1.0);
    let v00 = grid[y0 * cells + x0];
    let v01 = grid[y0 * cells + x0 + 1];
    let v10 = grid[(y0 + 1) * cells + x0];
    let v11 = grid[(y0 + 1) * cells + x0 + 1];
    let top = v00 + (v01 - v00) * tx;
    let bottom = v10 + (v11 - v10) * tx;
    top + (bottom - top) * ty
}

fn rural_texture(size: usize, rng: &mut SplitMix64) -> GrayImage {
    let cell = 10 + rng.below(7) as usize;
    let cells = size / cell + 2;
    let coarse = lattice(rng, cells, 60.0, 200.0);
    let cell2 = (cell / 2).max(2);
    let cells2 = size / cell2 + 2;
    let fine = lattice(rng, cells2, -30.0, 30.0);
    let mut data = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let base = bilinear(&coarse, cells, x as f64 / cell as f64, y as f64 / cell as f64);
            let detail =
                bilinear(&fine, cells2, x as f64 / cell2 as f64, y as f64 / cell2 as f64);
            data.push(clamp_gray(base + 0.5 * detail + rng.range_f64(-4.0, 4.0)));
        }
    }
    GrayImage::new(size, size, 255, data).expect("generator produces a full raster")
}

/// Generate `count` images per family from one seeded stream; identical
/// arguments always produce identical bytes.
pub fn generate_synthetic(
    families: &[TextureFamily],
    count: usize,
    size: usize,
    seed: u64,
) -> Result<Vec<SynthImage>, HarnessError> {
    if families.is_empty() {
        return Err(HarnessError::Synth { reason: "no texture families requested".to_string() });
    }
    for (i, f) in families.iter().enumerate() {
        if families[..i].contains(f) {
            return Err(HarnessError::Synth { reason: format!("duplicate family {f}") });
        }
    }
    if count == 0 {
        return Err(HarnessError::Synth { reason: "count per class must be positive".to_string() });
    }
    if size < 8 {
        return Err(HarnessError::Synth {
            reason: format!("image size {size} is below the minimum of 8"),
        });
    }
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(families.len() * count);
    for (class, family) in families.iter().enumerate() {
        for i in 0..count {
            let image = match family {
                TextureFamily::Brick => brick_texture(size, &mut rng),
                TextureFamily::Metal => metal_texture(size, &mut rng),
                TextureFamily::Rural => rural_texture(size, &mut rng),
            };
            out.push(SynthImage { filename: format!("{family}_{i:03}.pgm"), class, image });
        }
    }
    Ok(out)
}
