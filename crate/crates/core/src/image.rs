//! Quantized greyscale images, binary PGM I/O and illumination correction.

use crate::error::{AceError, Result};

/// A rectangular grid of `bits`-bit pixel codes, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuantizedImage {
    width: usize,
    height: usize,
    bits: u8,
    data: Vec<u8>,
}

impl QuantizedImage {
    pub fn new(width: usize, height: usize, bits: u8, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(AceError::Argument(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if !(1..=8).contains(&bits) {
            return Err(AceError::Argument(format!("bits must be in 1..=8, got {bits}")));
        }
        if data.len() != width * height {
            return Err(AceError::Argument(format!(
                "data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        let max = max_code(bits);
        if let Some(pos) = data.iter().position(|&v| v > max) {
            return Err(AceError::Argument(format!(
                "pixel {pos} has value {} which exceeds {bits}-bit range",
                data[pos]
            )));
        }
        Ok(QuantizedImage {
            width,
            height,
            bits,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, bits: u8, value: u8) -> Result<Self> {
        Self::new(width, height, bits, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(row, col)` for every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        bits: u8,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self::new(width, height, bits, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn max_value(&self) -> u8 {
        max_code(self.bits)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    /// Sets one pixel, rejecting values outside the image's bit range.
    pub fn set(&mut self, row: usize, col: usize, value: u8) -> Result<()> {
        if value > self.max_value() {
            return Err(AceError::Argument(format!(
                "value {value} exceeds {}-bit range",
                self.bits
            )));
        }
        self.data[row * self.width + col] = value;
        Ok(())
    }

    /// Cyclic shift: pixel `(r, c)` moves to `(r + dr, c + dc)` modulo the
    /// image size.
    pub fn cyclic_shift(&self, dr: usize, dc: usize) -> QuantizedImage {
        let (w, h) = (self.width, self.height);
        let mut data = vec![0; w * h];
        for r in 0..h {
            for c in 0..w {
                data[((r + dr) % h) * w + (c + dc) % w] = self.data[r * w + c];
            }
        }
        QuantizedImage { data, ..*self }
    }

    /// Copies the `width`x`height` window starting at `(row, col)`.
    pub fn crop(&self, row: usize, col: usize, width: usize, height: usize) -> Result<Self> {
        if row + height > self.height || col + width > self.width {
            return Err(AceError::Argument(format!(
                "crop {width}x{height}+{col}+{row} exceeds {}x{} image",
                self.width, self.height
            )));
        }
        Self::from_fn(width, height, self.bits, |r, c| self.get(row + r, col + c))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }
}

fn max_code(bits: u8) -> u8 {
    ((1u16 << bits) - 1) as u8
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&b) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if b == b'\n' || b == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(AceError::parse(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| AceError::parse(start, format!("{what} out of range")))
    }
}

/// Parses a binary (P5) PGM with maxval 255. The result has `bits = 8`.
pub fn load_pgm(bytes: &[u8]) -> Result<QuantizedImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(AceError::parse(0, "missing P5 magic"));
    }
    let mut reader = HeaderReader { bytes, pos: 2 };
    let width = reader.number("width")?;
    let height = reader.number("height")?;
    reader.skip_whitespace_and_comments();
    let maxval_offset = reader.pos;
    let maxval = reader.number("maxval")?;
    if maxval != 255 {
        return Err(AceError::parse(
            maxval_offset,
            format!("maxval {maxval} unsupported, expected 255"),
        ));
    }
    if width == 0 || height == 0 {
        return Err(AceError::parse(2, "zero image dimension"));
    }
    match bytes.get(reader.pos) {
        Some(b) if b.is_ascii_whitespace() => reader.pos += 1,
        _ => return Err(AceError::parse(reader.pos, "expected whitespace after maxval")),
    }
    let len = width
        .checked_mul(height)
        .ok_or_else(|| AceError::parse(2, "image dimensions overflow"))?;
    let payload = &bytes[reader.pos..];
    if payload.len() < len {
        return Err(AceError::parse(
            bytes.len(),
            format!("truncated payload: expected {len} bytes, found {}", payload.len()),
        ));
    }
    QuantizedImage::new(width, height, 8, payload[..len].to_vec())
}

/// Encodes as binary PGM with maxval 255, left-shifting codes so that
/// images with fewer than 8 bits span the full grey range.
pub fn save_pgm(image: &QuantizedImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    let shift = 8 - image.bits;
    out.extend(image.data.iter().map(|&v| v << shift));
    out
}

/// Drops the `bits - target_bits` low-order bits of every pixel.
pub fn requantize(image: &QuantizedImage, target_bits: u8) -> Result<QuantizedImage> {
    if target_bits == 0 || target_bits > image.bits {
        return Err(AceError::Argument(format!(
            "target bits {target_bits} outside 1..={}",
            image.bits
        )));
    }
    let shift = image.bits - target_bits;
    Ok(QuantizedImage {
        width: image.width,
        height: image.height,
        bits: target_bits,
        data: image.data.iter().map(|&v| v >> shift).collect(),
    })
}

/// Least-squares plane fit and the effect of removing its gradient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WedgeStats {
    /// Fitted grey levels per column.
    pub col_gradient: f64,
    /// Fitted grey levels per row.
    pub row_gradient: f64,
    /// Pixels that left the code range after correction and were clamped.
    pub clamped: usize,
}

/// Least-squares fit of `v ≈ a·col + b·row + c`, returned as `(a, b, mean)`.
///
/// On a full grid the centred column and row coordinates are orthogonal to
/// each other and to the constant, so the normal equations decouple.
pub fn fit_plane(image: &QuantizedImage) -> (f64, f64, f64) {
    let (w, h) = (image.width, image.height);
    let mean = image.mean();
    let col_mean = (w as f64 - 1.0) / 2.0;
    let row_mean = (h as f64 - 1.0) / 2.0;
    let (mut scc, mut srr, mut scv, mut srv) = (0.0, 0.0, 0.0, 0.0);
    for r in 0..h {
        let dr = r as f64 - row_mean;
        for c in 0..w {
            let dc = c as f64 - col_mean;
            let dv = image.get(r, c) as f64 - mean;
            scc += dc * dc;
            srr += dr * dr;
            scv += dc * dv;
            srv += dr * dv;
        }
    }
    let a = if scc > 0.0 { scv / scc } else { 0.0 };
    let b = if srr > 0.0 { srv / srr } else { 0.0 };
    (a, b, mean)
}

/// Removes the linear illumination gradient while keeping the image mean.
pub fn wedge_correct(image: &QuantizedImage) -> QuantizedImage {
    wedge_correct_with_stats(image).0
}

pub fn wedge_correct_with_stats(image: &QuantizedImage) -> (QuantizedImage, WedgeStats) {
    let (a, b, _) = fit_plane(image);
    let (w, h) = (image.width, image.height);
    let col_mean = (w as f64 - 1.0) / 2.0;
    let row_mean = (h as f64 - 1.0) / 2.0;
    let max = image.max_value() as f64;
    let mut clamped = 0;
    let mut data = Vec::with_capacity(w * h);
    for r in 0..h {
        for c in 0..w {
            // Subtracting the centred ramp is the same as subtracting
            // a·col + b·row and adding back its mean.
            let ramp = a * (c as f64 - col_mean) + b * (r as f64 - row_mean);
            let v = (image.get(r, c) as f64 - ramp).round();
            if v < 0.0 || v > max {
                clamped += 1;
            }
            data.push(v.clamp(0.0, max) as u8);
        }
    }
    let out = QuantizedImage {
        width: w,
        height: h,
        bits: image.bits,
        data,
    };
    (
        out,
        WedgeStats {
            col_gradient: a,
            row_gradient: b,
            clamped,
        },
    )
}
