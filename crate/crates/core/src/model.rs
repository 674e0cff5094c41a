//! Full-model training and log-probability images.
//!
//! Training runs the network forward one layer at a time, fitting a
//! topographic map to each layer's clique pairs and compiling it into the
//! table that produces the next layer. Once all tables exist, every layer's
//! cliques are counted into that layer's histogram.
//!
//! The log of the geometric-mean density estimate is
//!
//! ```text
//! log Q = Σ_L 2^-(L+1) Σ_k f_L(k)
//! ```
//!
//! where `f_L(k)` is the log clique factor of clique `k` in layer `L`.
//! [`AceModel::log_q_direct`] evaluates this sum as written.
//! [`AceModel::anomaly_image`] distributes the same total over the pixel
//! grid by a backward cascade, from the deepest layer toward the input:
//! each clique deposits a quarter of its factor on each of its two pixels,
//! and each layer's accumulated image is halved and split between the two
//! child pixels that formed it. The pixel values of the result sum to
//! `log Q`.

use std::time::{Duration, Instant};

use crate::error::{AceError, Result};
use crate::histogram::CliqueHistogram;
use crate::image::{requantize, wedge_correct_with_stats, QuantizedImage};
use crate::network::{apply_layer, clique_pairs, make_schedule, LayerSchedule, LayerStep};
use crate::topomap::{compile_lut, train_modified, Lut, TrainConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct AceConfig {
    /// Number of layer-to-layer transforms.
    pub n_layers: usize,
    /// Bits per pixel in every layer.
    pub bits: u8,
    /// Low-order bits dropped when histogramming.
    pub drop_bits: u8,
    pub seed: u64,
    /// Remove the linear illumination gradient before quantizing.
    pub wedge: bool,
    pub eps: f64,
    pub eps_prime: f64,
    pub updates_per_generation_factor: usize,
}

impl Default for AceConfig {
    fn default() -> Self {
        let topo = TrainConfig::default();
        AceConfig {
            n_layers: 6,
            bits: 8,
            drop_bits: 2,
            seed: 1,
            wedge: true,
            eps: topo.eps,
            eps_prime: topo.eps_prime,
            updates_per_generation_factor: topo.updates_per_generation_factor,
        }
    }
}

/// Per-layer timings and preprocessing statistics from [`AceModel::train_with_report`].
#[derive(Clone, Debug, Default)]
pub struct TrainReport {
    pub layer_times: Vec<Duration>,
    pub histogram_time: Duration,
    /// Pixels clamped by the wedge correction.
    pub wedge_clamped: usize,
}

/// Which layers contribute to a log-probability computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerMask {
    enabled: Vec<bool>,
}

impl LayerMask {
    pub fn all(n_layers: usize) -> Self {
        LayerMask {
            enabled: vec![true; n_layers],
        }
    }

    pub fn none(n_layers: usize) -> Self {
        LayerMask {
            enabled: vec![false; n_layers],
        }
    }

    pub fn single(n_layers: usize, layer: usize) -> Result<Self> {
        Self::from_layers(n_layers, [layer])
    }

    pub fn from_layers(n_layers: usize, layers: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = Self::none(n_layers);
        for l in layers {
            if l >= n_layers {
                return Err(AceError::Argument(format!(
                    "layer {l} outside 0..{n_layers}"
                )));
            }
            mask.enabled[l] = true;
        }
        Ok(mask)
    }

    pub fn contains(&self, layer: usize) -> bool {
        self.enabled.get(layer).copied().unwrap_or(false)
    }

    pub fn n_layers(&self) -> usize {
        self.enabled.len()
    }

    pub fn layers(&self) -> impl Iterator<Item = usize> + '_ {
        self.enabled
            .iter()
            .enumerate()
            .filter_map(|(l, &on)| on.then_some(l))
    }
}

/// Per-pixel contributions to `log Q`, in nats.
#[derive(Clone, Debug, PartialEq)]
pub struct LogProbImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl LogProbImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height || values.is_empty() {
            return Err(AceError::Argument(format!(
                "{} values do not fill {width}x{height}",
                values.len()
            )));
        }
        Ok(LogProbImage {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Row-major sum.
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn cyclic_shift(&self, dr: usize, dc: usize) -> LogProbImage {
        let (w, h) = (self.width, self.height);
        let mut values = vec![0.0; w * h];
        for r in 0..h {
            for c in 0..w {
                values[((r + dr) % h) * w + (c + dc) % w] = self.values[r * w + c];
            }
        }
        LogProbImage { values, ..*self }
    }
}

/// Maps `[min, max]` of the values affinely onto `[0, 255]`, rounding half
/// up. A constant image renders as 128. With `invert`, the result is
/// flipped so that the lowest log-probability is white.
pub fn render(lp: &LogProbImage, invert: bool) -> QuantizedImage {
    let (min, max) = lp
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = max - min;
    let data = lp
        .values
        .iter()
        .map(|&v| {
            let level = if range > 0.0 {
                ((v - min) / range * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
            } else {
                128
            };
            if invert && range > 0.0 {
                255 - level
            } else {
                level
            }
        })
        .collect();
    QuantizedImage::new(lp.width, lp.height, 8, data).expect("dimensions come from a valid image")
}

/// A trained network: one look-up table and one clique histogram per layer.
#[derive(Clone, Debug, PartialEq)]
pub struct AceModel {
    schedule: LayerSchedule,
    luts: Vec<Lut>,
    histograms: Vec<CliqueHistogram>,
    bits: u8,
    drop_bits: u8,
    wedge_applied: bool,
    seed: u64,
}

impl AceModel {
    /// Assembles a model from parts, checking that they fit together.
    pub fn from_parts(
        schedule: LayerSchedule,
        luts: Vec<Lut>,
        histograms: Vec<CliqueHistogram>,
        bits: u8,
        drop_bits: u8,
        wedge_applied: bool,
        seed: u64,
    ) -> Result<Self> {
        let n = schedule.len();
        if luts.len() != n || histograms.len() != n {
            return Err(AceError::Contract(format!(
                "{n} layers but {} luts and {} histograms",
                luts.len(),
                histograms.len()
            )));
        }
        if !(1..=8).contains(&bits) || drop_bits >= bits {
            return Err(AceError::Argument(format!(
                "bits {bits} / dropped bits {drop_bits} out of range"
            )));
        }
        for (l, (lut, h)) in luts.iter().zip(&histograms).enumerate() {
            if lut.input_bits() != bits || lut.output_bits() != bits {
                return Err(AceError::Contract(format!(
                    "layer {l} lut maps {} to {} bits, model uses {bits}",
                    lut.input_bits(),
                    lut.output_bits()
                )));
            }
            if h.drop_bits() != drop_bits
                || h.side() != 1 << (bits - drop_bits)
                || h.is_input_layer() != (l == 0)
                || h.layer_index() != l
            {
                return Err(AceError::Contract(format!("layer {l} histogram binning mismatch")));
            }
        }
        Ok(AceModel {
            schedule,
            luts,
            histograms,
            bits,
            drop_bits,
            wedge_applied,
            seed,
        })
    }

    pub fn train(image: &QuantizedImage, config: &AceConfig) -> Result<Self> {
        Self::train_with_report(image, config).map(|(m, _)| m)
    }

    pub fn train_with_report(image: &QuantizedImage, config: &AceConfig) -> Result<(Self, TrainReport)> {
        let schedule = make_schedule(config.n_layers)?;
        if !(1..=8).contains(&config.bits) || config.drop_bits >= config.bits {
            return Err(AceError::Argument(format!(
                "bits {} / dropped bits {} out of range",
                config.bits, config.drop_bits
            )));
        }
        check_field(&schedule, image).map_err(|e| match e {
            AceError::Contract(msg) => AceError::Argument(msg),
            other => other,
        })?;
        let mut report = TrainReport::default();
        let (input, clamped) = preprocess(image, config.bits, config.wedge)?;
        report.wedge_clamped = clamped;

        let mut layers = vec![input];
        let mut luts = Vec::with_capacity(schedule.len());
        for step in schedule.steps() {
            let start = Instant::now();
            let current = layers.last().expect("layer 0 present");
            let samples: Vec<[f64; 2]> = clique_pairs(current, step)?
                .iter()
                .map(|c| [c.first as f64, c.second as f64])
                .collect();
            let cfg = TrainConfig {
                eps: config.eps,
                eps_prime: config.eps_prime,
                updates_per_generation_factor: config.updates_per_generation_factor,
                final_size: 1 << config.bits,
                seed: layer_seed(config.seed, step.layer_index),
            };
            let map = train_modified(&samples, &cfg)?;
            let lut = compile_lut(&map, config.bits)?;
            let next = apply_layer(current, &lut, step)?;
            luts.push(lut);
            layers.push(next);
            report.layer_times.push(start.elapsed());
        }

        let start = Instant::now();
        let histograms = schedule
            .steps()
            .iter()
            .map(|step| {
                let l = step.layer_index;
                let pairs = clique_pairs(&layers[l], step)?;
                CliqueHistogram::accumulate(
                    pairs.iter().map(|c| (c.first, c.second)),
                    config.bits,
                    config.drop_bits,
                    l,
                    l == 0,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        report.histogram_time = start.elapsed();

        let model = AceModel {
            schedule,
            luts,
            histograms,
            bits: config.bits,
            drop_bits: config.drop_bits,
            wedge_applied: config.wedge,
            seed: config.seed,
        };
        Ok((model, report))
    }

    pub fn schedule(&self) -> &LayerSchedule {
        &self.schedule
    }

    pub fn luts(&self) -> &[Lut] {
        &self.luts
    }

    pub fn histograms(&self) -> &[CliqueHistogram] {
        &self.histograms
    }

    pub fn n_layers(&self) -> usize {
        self.schedule.len()
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn drop_bits(&self) -> u8 {
        self.drop_bits
    }

    pub fn wedge_applied(&self) -> bool {
        self.wedge_applied
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sets the histogram smoothing constant used by all queries.
    pub fn set_alpha(&mut self, alpha: f64) -> Result<()> {
        self.histograms.iter_mut().try_for_each(|h| h.set_alpha(alpha))
    }

    /// Applies the training-time preprocessing (wedge correction if it was
    /// used, then requantization to the model's bit depth).
    pub fn prepare(&self, raw: &QuantizedImage) -> Result<QuantizedImage> {
        if raw.bits() < self.bits {
            return Err(AceError::Contract(format!(
                "image has {} bits, model needs at least {}",
                raw.bits(),
                self.bits
            )));
        }
        check_field(&self.schedule, raw)?;
        Ok(preprocess(raw, self.bits, self.wedge_applied)?.0)
    }

    /// Runs the network on a prepared image; returns layers `0..=n`.
    pub fn forward(&self, image: &QuantizedImage) -> Result<Vec<QuantizedImage>> {
        self.check_prepared(image)?;
        let mut layers = vec![image.clone()];
        for (step, lut) in self.schedule.steps().iter().zip(&self.luts) {
            let next = apply_layer(layers.last().expect("nonempty"), lut, step)?;
            layers.push(next);
        }
        Ok(layers)
    }

    /// Log factor of every clique, indexed `[layer][anchor pixel]`.
    pub fn clique_factors(&self, image: &QuantizedImage) -> Result<Vec<Vec<f64>>> {
        let layers = self.forward(image)?;
        self.schedule
            .steps()
            .iter()
            .map(|step| self.layer_factors(&layers[step.layer_index], step))
            .collect()
    }

    fn layer_factors(&self, layer: &QuantizedImage, step: &LayerStep) -> Result<Vec<f64>> {
        let h = &self.histograms[step.layer_index];
        let table = h.factor_table()?;
        let side = h.side();
        let d = self.drop_bits;
        Ok(clique_pairs(layer, step)?
            .iter()
            .map(|c| table[((c.first >> d) as usize) * side + (c.second >> d) as usize])
            .collect())
    }

    /// `Σ_{L ∈ mask} 2^-(L+1) Σ_k f_L(k)` on a prepared image.
    pub fn log_q_direct(&self, image: &QuantizedImage, mask: &LayerMask) -> Result<f64> {
        self.check_mask(mask)?;
        let layers = self.forward(image)?;
        let mut total = 0.0;
        for step in self.schedule.steps() {
            let l = step.layer_index;
            if !mask.contains(l) {
                continue;
            }
            let sum: f64 = self.layer_factors(&layers[l], step)?.iter().sum();
            total += sum / f64::powi(2.0, l as i32 + 1);
        }
        Ok(total)
    }

    /// Spatially registered contributions to `log Q` by the backward cascade.
    pub fn anomaly_image(&self, image: &QuantizedImage, mask: &LayerMask) -> Result<LogProbImage> {
        self.check_mask(mask)?;
        let layers = self.forward(image)?;
        let (w, h) = (image.width(), image.height());
        let mut above = vec![0.0; w * h];
        for step in self.schedule.steps().iter().rev() {
            let l = step.layer_index;
            let factors = if mask.contains(l) {
                Some(self.layer_factors(&layers[l], step)?)
            } else {
                None
            };
            let mut current = vec![0.0; w * h];
            for r in 0..h {
                for c in 0..w {
                    let p = r * w + c;
                    // The clique anchored at p and the one whose partner is p.
                    let (qr, qc) = step.partner_of(r, c, w, h);
                    let q = qr * w + qc;
                    let deposit = match &factors {
                        Some(f) => 0.25 * (f[p] + f[q]),
                        None => 0.0,
                    };
                    // Each parent pixel's value is split equally between
                    // the two children that formed it.
                    let pushed = 0.5 * (above[p] + above[q]);
                    current[p] = deposit + 0.5 * pushed;
                }
            }
            above = current;
        }
        LogProbImage::new(w, h, above)
    }

    fn check_prepared(&self, image: &QuantizedImage) -> Result<()> {
        if image.bits() != self.bits {
            return Err(AceError::Contract(format!(
                "image has {} bits but model expects {}",
                image.bits(),
                self.bits
            )));
        }
        check_field(&self.schedule, image)
    }

    fn check_mask(&self, mask: &LayerMask) -> Result<()> {
        if mask.n_layers() != self.n_layers() {
            return Err(AceError::Contract(format!(
                "mask covers {} layers, model has {}",
                mask.n_layers(),
                self.n_layers()
            )));
        }
        Ok(())
    }
}

fn check_field(schedule: &LayerSchedule, image: &QuantizedImage) -> Result<()> {
    let f = schedule.receptive_field(schedule.len());
    if image.width() < f.width || image.height() < f.height {
        return Err(AceError::Contract(format!(
            "{}x{} image is smaller than the {f} receptive field",
            image.width(),
            image.height()
        )));
    }
    Ok(())
}

fn preprocess(image: &QuantizedImage, bits: u8, wedge: bool) -> Result<(QuantizedImage, usize)> {
    if image.bits() < bits {
        return Err(AceError::Argument(format!(
            "image has {} bits, need at least {bits}",
            image.bits()
        )));
    }
    let (corrected, clamped) = if wedge {
        let (img, stats) = wedge_correct_with_stats(image);
        (img, stats.clamped)
    } else {
        (image.clone(), 0)
    };
    Ok((requantize(&corrected, bits)?, clamped))
}

/// Seed for the topographic map of one layer, derived from the model seed.
fn layer_seed(seed: u64, layer: usize) -> u64 {
    seed.wrapping_add((layer as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}
