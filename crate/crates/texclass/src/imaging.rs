//! Grayscale/RGB images, Netpbm (PGM/PPM) parsing and encoding, and the
//! square-block partition that feeds the transform stage.

use std::fmt;

/// Whitespace per the Netpbm conventions.
fn is_pnm_space(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\r' | b'\n' | 0x0b | 0x0c)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImageError {
    BadMagic { found: String },
    UnexpectedEnd { field: &'static str, offset: usize },
    BadToken { field: &'static str, offset: usize },
    ZeroDimension { field: &'static str },
    BadMaxValue { value: u64 },
    SampleOutOfRange { index: usize, value: u64, max_value: u16 },
    TrailingData { offset: usize },
    BadBlockSize { n: usize },
    TooSmall { width: usize, height: usize, n: usize },
    ShapeMismatch { expected: usize, got: usize },
}

impl fmt::Display for ImageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImageError::BadMagic { found } => {
                write!(f, "bad magic number {found:?}, expected P2/P3/P5/P6")
            }
            ImageError::UnexpectedEnd { field, offset } => {
                write!(f, "unexpected end of input while reading {field} at byte {offset}")
            }
            ImageError::BadToken { field, offset } => {
                write!(f, "invalid token for {field} at byte {offset}")
            }
            ImageError::ZeroDimension { field } => write!(f, "{field} must be positive"),
            ImageError::BadMaxValue { value } => {
                write!(f, "max value {value} out of range (1..=65535)")
            }
            ImageError::SampleOutOfRange { index, value, max_value } => {
                write!(f, "sample {index} has value {value}, exceeds max value {max_value}")
            }
            ImageError::TrailingData { offset } => {
                write!(f, "trailing data after image samples at byte {offset}")
            }
            ImageError::BadBlockSize { n } => write!(f, "block size {n} must be at least 2"),
            ImageError::TooSmall { width, height, n } => {
                write!(f, "image {width}x{height} is smaller than one {n}x{n} block")
            }
            ImageError::ShapeMismatch { expected, got } => {
                write!(f, "expected {expected} samples, got {got}")
            }
        }
    }
}

impl std::error::Error for ImageError {}

/// Row-major grayscale image with samples in `[0, max_value]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    max_value: u16,
    data: Vec<u16>,
}

impl GrayImage {
    pub fn new(
        width: usize,
        height: usize,
        max_value: u16,
        data: Vec<u16>,
    ) -> Result<Self, ImageError> {
        if width == 0 {
            return Err(ImageError::ZeroDimension { field: "width" });
        }
        if height == 0 {
            return Err(ImageError::ZeroDimension { field: "height" });
        }
        if max_value == 0 {
            return Err(ImageError::BadMaxValue { value: 0 });
        }
        if data.len() != width * height {
            return Err(ImageError::ShapeMismatch { expected: width * height, got: data.len() });
        }
        if let Some(i) = data.iter().position(|&v| v > max_value) {
            return Err(ImageError::SampleOutOfRange {
                index: i,
                value: data[i] as u64,
                max_value,
            });
        }
        Ok(Self { width, height, max_value, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn max_value(&self) -> u16 {
        self.max_value
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn sample(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    /// Encode as PGM: P2 when `plain`, P5 otherwise.
    pub fn encode_pgm(&self, plain: bool) -> Vec<u8> {
        let mut out = Vec::new();
        let magic = if plain { "P2" } else { "P5" };
        out.extend_from_slice(
            format!("{magic}\n{} {}\n{}\n", self.width, self.height, self.max_value).as_bytes(),
        );
        if plain {
            for row in self.data.chunks(self.width) {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        } else if self.max_value < 256 {
            out.extend(self.data.iter().map(|&v| v as u8));
        } else {
            for &v in &self.data {
                out.extend_from_slice(&v.to_be_bytes());
            }
        }
        out
    }
}

/// Row-major RGB image, each channel in `[0, max_value]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    max_value: u16,
    data: Vec<[u16; 3]>,
}

impl RgbImage {
    pub fn new(
        width: usize,
        height: usize,
        max_value: u16,
        data: Vec<[u16; 3]>,
    ) -> Result<Self, ImageError> {
        if width == 0 {
            return Err(ImageError::ZeroDimension { field: "width" });
        }
        if height == 0 {
            return Err(ImageError::ZeroDimension { field: "height" });
        }
        if max_value == 0 {
            return Err(ImageError::BadMaxValue { value: 0 });
        }
        if data.len() != width * height {
            return Err(ImageError::ShapeMismatch { expected: width * height, got: data.len() });
        }
        for (i, px) in data.iter().enumerate() {
            if let Some(&v) = px.iter().find(|&&v| v > max_value) {
                return Err(ImageError::SampleOutOfRange {
                    index: i,
                    value: v as u64,
                    max_value,
                });
            }
        }
        Ok(Self { width, height, max_value, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn max_value(&self) -> u16 {
        self.max_value
    }

    pub fn data(&self) -> &[[u16; 3]] {
        &self.data
    }

    /// Encode as PPM: P3 when `plain`, P6 otherwise.
    pub fn encode_ppm(&self, plain: bool) -> Vec<u8> {
        let mut out = Vec::new();
        let magic = if plain { "P3" } else { "P6" };
        out.extend_from_slice(
            format!("{magic}\n{} {}\n{}\n", self.width, self.height, self.max_value).as_bytes(),
        );
        if plain {
            for row in self.data.chunks(self.width) {
                let line: Vec<String> = row
                    .iter()
                    .map(|px| format!("{} {} {}", px[0], px[1], px[2]))
                    .collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        } else if self.max_value < 256 {
            for px in &self.data {
                out.extend(px.iter().map(|&v| v as u8));
            }
        } else {
            for px in &self.data {
                for &v in px {
                    out.extend_from_slice(&v.to_be_bytes());
                }
            }
        }
        out
    }
}

/// Result of parsing a Netpbm file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Image {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl Image {
    /// Grayscale view: identity for PGM, luma conversion for PPM.
    pub fn into_gray(self) -> GrayImage {
        match self {
            Image::Gray(g) => g,
            Image::Rgb(rgb) => to_grayscale(&rgb),
        }
    }
}

/// One `n`-by-`n` tile of gray levels promoted to real samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    n: usize,
    values: Vec<f64>,
}

impl Block {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self, ImageError> {
        if values.len() != n * n {
            return Err(ImageError::ShapeMismatch { expected: n * n, got: values.len() });
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if is_pnm_space(b) {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn next_uint(&mut self, field: &'static str, max: u64) -> Result<u64, ImageError> {
        self.skip_space_and_comments();
        let start = self.pos;
        if start >= self.bytes.len() {
            return Err(ImageError::UnexpectedEnd { field, offset: start });
        }
        let mut value: u64 = 0;
        let mut digits = 0usize;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            value = value
                .saturating_mul(10)
                .saturating_add((self.bytes[self.pos] - b'0') as u64);
            digits += 1;
            self.pos += 1;
        }
        if digits == 0 {
            return Err(ImageError::BadToken { field, offset: start });
        }
        // the token must end at whitespace, comment, or end of input
        if self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if !is_pnm_space(b) && b != b'#' {
                return Err(ImageError::BadToken { field, offset: start });
            }
        }
        if value > max {
            return Err(ImageError::BadToken { field, offset: start });
        }
        Ok(value)
    }
}

/// Parse a PGM (P2/P5) or PPM (P3/P6) file.
pub fn parse_image(bytes: &[u8]) -> Result<Image, ImageError> {
    if bytes.len() < 2 {
        return Err(ImageError::UnexpectedEnd { field: "magic number", offset: 0 });
    }
    let magic = &bytes[..2];
    let (color, plain) = match magic {
        b"P2" => (false, true),
        b"P3" => (true, true),
        b"P5" => (false, false),
        b"P6" => (true, false),
        _ => {
            return Err(ImageError::BadMagic {
                found: String::from_utf8_lossy(magic).into_owned(),
            })
        }
    };
    let mut cur = Cursor { bytes, pos: 2 };

    let width = cur.next_uint("width", u64::MAX)? as usize;
    if width == 0 {
        return Err(ImageError::ZeroDimension { field: "width" });
    }
    let height = cur.next_uint("height", u64::MAX)? as usize;
    if height == 0 {
        return Err(ImageError::ZeroDimension { field: "height" });
    }
    let max_raw = {
        cur.skip_space_and_comments();
        let start = cur.pos;
        let mut value: u64 = 0;
        let mut digits = 0usize;
        while cur.pos < cur.bytes.len() && cur.bytes[cur.pos].is_ascii_digit() {
            value = value
                .saturating_mul(10)
                .saturating_add((cur.bytes[cur.pos] - b'0') as u64);
            digits += 1;
            cur.pos += 1;
        }
        if digits == 0 {
            if start >= cur.bytes.len() {
                return Err(ImageError::UnexpectedEnd { field: "max value", offset: start });
            }
            return Err(ImageError::BadToken { field: "max value", offset: start });
        }
        value
    };
    if max_raw == 0 || max_raw > 65535 {
        return Err(ImageError::BadMaxValue { value: max_raw });
    }
    let max_value = max_raw as u16;

    let channels = if color { 3 } else { 1 };
    let sample_count = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(channels))
        .ok_or(ImageError::ZeroDimension { field: "width" })?;

    let samples = if plain {
        let mut samples = Vec::new();
        for index in 0..sample_count {
            cur.skip_space_and_comments();
            let offset = cur.pos;
            let v = match cur.next_uint("sample", u64::MAX) {
                Ok(v) => v,
                Err(ImageError::UnexpectedEnd { .. }) => {
                    return Err(ImageError::UnexpectedEnd { field: "sample", offset })
                }
                Err(e) => return Err(e),
            };
            if v > max_value as u64 {
                return Err(ImageError::SampleOutOfRange { index, value: v, max_value });
            }
            samples.push(v as u16);
        }
        cur.skip_space_and_comments();
        if cur.pos != bytes.len() {
            return Err(ImageError::TrailingData { offset: cur.pos });
        }
        samples
    } else {
        // exactly one whitespace byte separates the header from raw samples
        if cur.pos >= bytes.len() || !is_pnm_space(bytes[cur.pos]) {
            return Err(ImageError::BadToken { field: "header terminator", offset: cur.pos });
        }
        cur.pos += 1;
        let wide = max_value > 255;
        let bytes_per_sample = if wide { 2 } else { 1 };
        let need = sample_count
            .checked_mul(bytes_per_sample)
            .ok_or(ImageError::ZeroDimension { field: "width" })?;
        let rest = &bytes[cur.pos..];
        if rest.len() < need {
            return Err(ImageError::UnexpectedEnd {
                field: "sample",
                offset: cur.pos + rest.len(),
            });
        }
        if rest.len() > need {
            return Err(ImageError::TrailingData { offset: cur.pos + need });
        }
        let mut samples = Vec::with_capacity(sample_count);
        if wide {
            for (index, pair) in rest.chunks_exact(2).enumerate() {
                let v = u16::from_be_bytes([pair[0], pair[1]]);
                if v > max_value {
                    return Err(ImageError::SampleOutOfRange {
                        index,
                        value: v as u64,
                        max_value,
                    });
                }
                samples.push(v);
            }
        } else {
            for (index, &b) in rest.iter().enumerate() {
                if b as u16 > max_value {
                    return Err(ImageError::SampleOutOfRange {
                        index,
                        value: b as u64,
                        max_value,
                    });
                }
                samples.push(b as u16);
            }
        }
        samples
    };

    if color {
        let data: Vec<[u16; 3]> = samples.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Ok(Image::Rgb(RgbImage::new(width, height, max_value, data)?))
    } else {
        Ok(Image::Gray(GrayImage::new(width, height, max_value, samples)?))
    }
}

/// BT.601 luma conversion, rounded to nearest and clamped to `[0, max_value]`.
pub fn to_grayscale(img: &RgbImage) -> GrayImage {
    let data = img
        .data()
        .iter()
        .map(|px| {
            let y = 0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64;
            (y.round() as i64).clamp(0, img.max_value() as i64) as u16
        })
        .collect();
    GrayImage::new(img.width(), img.height(), img.max_value(), data)
        .expect("conversion preserves shape")
}

/// Center-crop to the largest dimensions divisible by `n`.
pub fn center_crop(img: &GrayImage, n: usize) -> Result<GrayImage, ImageError> {
    if n < 2 {
        return Err(ImageError::BadBlockSize { n });
    }
    let (w, h) = (img.width(), img.height());
    if w < n || h < n {
        return Err(ImageError::TooSmall { width: w, height: h, n });
    }
    let cw = (w / n) * n;
    let ch = (h / n) * n;
    let ox = (w - cw) / 2;
    let oy = (h - ch) / 2;
    let mut data = Vec::with_capacity(cw * ch);
    for y in 0..ch {
        for x in 0..cw {
            data.push(img.sample(ox + x, oy + y));
        }
    }
    GrayImage::new(cw, ch, img.max_value(), data)
}

/// Split into non-overlapping `n`-by-`n` blocks, left-to-right, top-to-bottom.
pub fn partition_blocks(img: &GrayImage, n: usize) -> Result<Vec<Block>, ImageError> {
    let cropped = center_crop(img, n)?;
    let bw = cropped.width() / n;
    let bh = cropped.height() / n;
    let mut blocks = Vec::with_capacity(bw * bh);
    for by in 0..bh {
        for bx in 0..bw {
            let mut values = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    values.push(cropped.sample(bx * n + j, by * n + i) as f64);
                }
            }
            blocks.push(Block::new(n, values)?);
        }
    }
    Ok(blocks)
}
