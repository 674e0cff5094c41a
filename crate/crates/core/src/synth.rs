//! Synthetic 8-bit textures and planted anomalies.

use crate::error::Result;
use crate::image::QuantizedImage;
use crate::rng::SplitMix64;

/// An axis-aligned rectangle of pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub row: usize,
    pub col: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn contains(&self, row: usize, col: usize) -> bool {
        (self.row..self.row + self.height).contains(&row)
            && (self.col..self.col + self.width).contains(&col)
    }

    /// The rectangle grown by `margin` on every side (not clipped).
    pub fn grown(&self, margin: usize) -> Rect {
        Rect {
            row: self.row.saturating_sub(margin),
            col: self.col.saturating_sub(margin),
            width: self.width + 2 * margin,
            height: self.height + 2 * margin,
        }
    }
}

/// Two-value checkerboard of `square`x`square` cells (period `2 * square`),
/// shifted by `(dr, dc)` pixels.
pub fn checkerboard_phase(
    width: usize,
    height: usize,
    square: usize,
    low: u8,
    high: u8,
    dr: usize,
    dc: usize,
) -> QuantizedImage {
    QuantizedImage::from_fn(width, height, 8, |r, c| {
        if ((r + dr) / square + (c + dc) / square).is_multiple_of(2) {
            low
        } else {
            high
        }
    })
    .expect("8-bit values")
}

pub fn checkerboard(width: usize, height: usize, square: usize, low: u8, high: u8) -> QuantizedImage {
    checkerboard_phase(width, height, square, low, high, 0, 0)
}

/// Independent uniform 8-bit pixels.
pub fn uniform_noise(width: usize, height: usize, seed: u64) -> QuantizedImage {
    let mut rng = SplitMix64::new(seed);
    QuantizedImage::from_fn(width, height, 8, |_, _| rng.below(256) as u8).expect("8-bit values")
}

/// Diagonal sawtooth stripes: the level index steps up by one per pixel
/// along `row + col`, cycling through `levels`, plus uniform noise in
/// `[-noise, noise]`. The texture has no 180-degree symmetry.
pub fn sawtooth(width: usize, height: usize, levels: &[u8], noise: u8, seed: u64) -> QuantizedImage {
    let mut rng = SplitMix64::new(seed);
    QuantizedImage::from_fn(width, height, 8, |r, c| {
        let base = levels[(r + c) % levels.len()] as i32;
        let jitter = rng.below(2 * noise as usize + 1) as i32 - noise as i32;
        (base + jitter).clamp(0, 255) as u8
    })
    .expect("8-bit values")
}

/// Copies `source` over `target` with its top-left corner at `(row, col)`,
/// wrapping at the edges.
pub fn paste(target: &QuantizedImage, source: &QuantizedImage, row: usize, col: usize) -> Result<QuantizedImage> {
    let mut out = target.clone();
    for r in 0..source.height() {
        for c in 0..source.width() {
            out.set(
                (row + r) % target.height(),
                (col + c) % target.width(),
                source.get(r, c),
            )?;
        }
    }
    Ok(out)
}

/// Reverses both the rows and the columns (a 180-degree rotation).
pub fn flip_both(image: &QuantizedImage) -> QuantizedImage {
    let (w, h) = (image.width(), image.height());
    QuantizedImage::from_fn(w, h, image.bits(), |r, c| image.get(h - 1 - r, w - 1 - c))
        .expect("same bit depth")
}

/// Two copies of `half` side by side.
pub fn montage_pair(half: &QuantizedImage) -> QuantizedImage {
    let w = half.width();
    QuantizedImage::from_fn(2 * w, half.height(), half.bits(), |r, c| half.get(r, c % w))
        .expect("same bit depth")
}

/// A clean checkerboard and a copy whose `patch` region carries the same
/// pattern shifted by `(shift, shift)` pixels.
pub fn checkerboard_with_shifted_patch(
    size: usize,
    square: usize,
    low: u8,
    high: u8,
    patch: Rect,
    shift: usize,
) -> (QuantizedImage, QuantizedImage) {
    let clean = checkerboard(size, size, square, low, high);
    let shifted = checkerboard_phase(size, size, square, low, high, shift, shift);
    let test = QuantizedImage::from_fn(size, size, 8, |r, c| {
        if patch.contains(r, c) {
            shifted.get(r, c)
        } else {
            clean.get(r, c)
        }
    })
    .expect("8-bit values");
    (clean, test)
}
