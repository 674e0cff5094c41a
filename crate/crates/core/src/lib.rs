//! Adaptive cluster expansion (ACE).
//!
//! A multilayer network of 1-D topographic mappings turns an image into a
//! stack of progressively coarser code images. Joint histograms of the pixel
//! pairs ("cliques") that feed each layer are combined into an estimate of
//! the joint density of the input pixels, and that estimate is redistributed
//! onto the pixel grid as a spatially registered log-probability image.
//! Low values in that image mark statistically anomalous regions.
//!
//! The crate is organised bottom-up:
//!
//! - [`image`]: quantized greyscale images, binary PGM I/O, requantization
//!   and linear illumination (wedge) correction.
//! - [`topomap`]: growing-codebook topographic map training and look-up
//!   table compilation.
//! - [`network`]: the pairing schedule and layer-to-layer transforms.
//! - [`histogram`]: clique histograms and log clique factors.
//! - [`model`]: training a full model, the direct and cascaded
//!   log-probability computations, and rendering.
//! - [`oracle`]: brute-force references used to cross-check the above.
//! - [`cli`]: the `ace` command line and the `ACE1` model file format.
//! - [`synth`]: synthetic textures with planted anomalies.
//!
//! ```
//! use ace::{model::{AceConfig, AceModel, LayerMask}, synth};
//!
//! let texture = synth::checkerboard(32, 32, 2, 64, 192);
//! let config = AceConfig { n_layers: 2, bits: 4, drop_bits: 0, ..AceConfig::default() };
//! let model = AceModel::train(&texture, &config).unwrap();
//! let prepared = model.prepare(&texture).unwrap();
//! let image = model.anomaly_image(&prepared, &LayerMask::all(2)).unwrap();
//! let direct = model.log_q_direct(&prepared, &LayerMask::all(2)).unwrap();
//! assert!((image.sum() - direct).abs() < 1e-9 * direct.abs().max(1.0));
//! ```

pub mod cli;
pub mod error;
pub mod histogram;
pub mod image;
pub mod model;
pub mod network;
pub mod oracle;
pub mod rng;
pub mod synth;
pub mod topomap;

pub use error::{AceError, Result};
pub use image::QuantizedImage;
