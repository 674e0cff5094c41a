//! Pairing schedule and layer-to-layer transforms.
//!
//! Every layer keeps the full image size. Layer `L + 1` at pixel `p` is the
//! table lookup of layer `L` at `p` and at `p`'s partner, which sits
//! `separation` pixels south (north/south steps) or east (east/west steps),
//! wrapping around the image edges. Orientations alternate starting with
//! north/south, and the separation doubles after every two steps, so the
//! input region seen by one pixel grows 1x2, 2x2, 2x4, 4x4, ...

use std::fmt;

use rayon::prelude::*;

use crate::error::{AceError, Result};
use crate::image::QuantizedImage;
use crate::topomap::Lut;

pub const MAX_LAYERS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    NorthSouth,
    EastWest,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::NorthSouth => "north/south",
            Orientation::EastWest => "east/west",
        })
    }
}

/// One transform of the network: layer `layer_index` to `layer_index + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LayerStep {
    pub orientation: Orientation,
    pub separation: usize,
    pub layer_index: usize,
}

impl LayerStep {
    /// Partner of `(row, col)` on a `width`x`height` torus.
    #[inline]
    pub fn partner(&self, row: usize, col: usize, width: usize, height: usize) -> (usize, usize) {
        match self.orientation {
            Orientation::NorthSouth => ((row + self.separation) % height, col),
            Orientation::EastWest => (row, (col + self.separation) % width),
        }
    }

    /// Inverse of [`partner`](Self::partner): the pixel whose partner is `(row, col)`.
    #[inline]
    pub fn partner_of(&self, row: usize, col: usize, width: usize, height: usize) -> (usize, usize) {
        match self.orientation {
            Orientation::NorthSouth => ((row + height - self.separation % height) % height, col),
            Orientation::EastWest => (row, (col + width - self.separation % width) % width),
        }
    }

    /// The image must be at least two separations long along the pairing axis.
    pub fn check_fits(&self, image: &QuantizedImage) -> Result<()> {
        let extent = match self.orientation {
            Orientation::NorthSouth => image.height(),
            Orientation::EastWest => image.width(),
        };
        if extent < 2 * self.separation {
            return Err(AceError::Contract(format!(
                "{}x{} image too small for {} pairing at separation {}",
                image.width(),
                image.height(),
                self.orientation,
                self.separation
            )));
        }
        Ok(())
    }
}

/// Receptive field size as (east/west, north/south) extent in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Field {
    pub width: usize,
    pub height: usize,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerSchedule {
    steps: Vec<LayerStep>,
}

impl LayerSchedule {
    pub fn steps(&self) -> &[LayerStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Input region seen by one pixel of layer `layer` (layer 0 sees 1x1).
    pub fn receptive_field(&self, layer: usize) -> Field {
        let mut field = Field { width: 1, height: 1 };
        for step in &self.steps[..layer] {
            // A pixel and its partner cover two copies of the child field
            // offset by the separation, which equals the child extent.
            match step.orientation {
                Orientation::NorthSouth => field.height += step.separation,
                Orientation::EastWest => field.width += step.separation,
            }
        }
        field
    }

    /// Region covered by the cliques of layer `layer`, which is also the
    /// receptive field of layer `layer + 1`.
    pub fn clique_field(&self, layer: usize) -> Field {
        self.receptive_field(layer + 1)
    }

    /// Index of the layer whose cliques cover exactly `field`.
    pub fn layer_with_clique_field(&self, field: Field) -> Option<usize> {
        (0..self.steps.len()).find(|&l| self.clique_field(l) == field)
    }
}

/// Alternating north/south, east/west steps with separations 1, 1, 2, 2, 4, 4, ...
pub fn make_schedule(n_layers: usize) -> Result<LayerSchedule> {
    if !(1..=MAX_LAYERS).contains(&n_layers) {
        return Err(AceError::Argument(format!(
            "layer count {n_layers} outside 1..={MAX_LAYERS}"
        )));
    }
    let steps = (0..n_layers)
        .map(|l| LayerStep {
            orientation: if l % 2 == 0 {
                Orientation::NorthSouth
            } else {
                Orientation::EastWest
            },
            separation: 1 << (l / 2),
            layer_index: l,
        })
        .collect();
    Ok(LayerSchedule { steps })
}

/// Applies one transform over the whole image (toroidal partners).
pub fn apply_layer(src: &QuantizedImage, lut: &Lut, step: &LayerStep) -> Result<QuantizedImage> {
    if src.bits() != lut.input_bits() {
        return Err(AceError::Contract(format!(
            "layer image has {} bits but lut expects {}",
            src.bits(),
            lut.input_bits()
        )));
    }
    step.check_fits(src)?;
    let (w, h) = (src.width(), src.height());
    let data: Vec<u8> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (r, c) = (i / w, i % w);
            let (pr, pc) = step.partner(r, c, w, h);
            lut.get(src.get(r, c), src.get(pr, pc))
        })
        .collect();
    QuantizedImage::new(w, h, lut.output_bits(), data)
}

/// A same-parent pixel pair, anchored at the first pixel's position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Clique {
    pub row: usize,
    pub col: usize,
    pub first: u8,
    pub second: u8,
}

/// One clique per pixel, in row-major order of the anchor position.
pub fn clique_pairs(layer_image: &QuantizedImage, step: &LayerStep) -> Result<Vec<Clique>> {
    step.check_fits(layer_image)?;
    let (w, h) = (layer_image.width(), layer_image.height());
    let mut out = Vec::with_capacity(w * h);
    for row in 0..h {
        for col in 0..w {
            let (pr, pc) = step.partner(row, col, w, h);
            out.push(Clique {
                row,
                col,
                first: layer_image.get(row, col),
                second: layer_image.get(pr, pc),
            });
        }
    }
    Ok(out)
}
