//! One-dimensional topographic maps over 2-D inputs.
//!
//! A [`TopoMap`] is an open chain of reference vectors. The index of the
//! reference vector nearest to an input pair is the map's output code, and
//! training keeps index-adjacent vectors close in input space so that
//! nearby codes mean similar inputs. [`compile_lut`] freezes a trained map
//! into a table addressed by the two input codes.
//!
//! Two trainers are provided. [`train_modified`] grows the codebook by
//! doubling (2, 4, 8, ...) under a fixed nearest-neighbour-only
//! neighbourhood; this is what the network uses. [`train_standard`] is the
//! classic fixed-size map with a shrinking Gaussian neighbourhood, kept as a
//! comparison baseline.

use rayon::prelude::*;

use crate::error::{AceError, Result};
use crate::rng::SplitMix64;

pub type RefVec = [f64; 2];

#[inline]
pub fn squared_distance(a: RefVec, b: RefVec) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    d0 * d0 + d1 * d1
}

#[derive(Clone, Debug, PartialEq)]
pub struct TopoMap {
    refvecs: Vec<RefVec>,
}

impl TopoMap {
    /// Wraps an explicit codebook. The length must be a power of two, at
    /// least 2.
    pub fn new(refvecs: Vec<RefVec>) -> Result<Self> {
        if refvecs.len() < 2 || !refvecs.len().is_power_of_two() {
            return Err(AceError::Argument(format!(
                "codebook size {} is not a power of two >= 2",
                refvecs.len()
            )));
        }
        Ok(TopoMap { refvecs })
    }

    pub fn refvecs(&self) -> &[RefVec] {
        &self.refvecs
    }

    pub fn len(&self) -> usize {
        self.refvecs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refvecs.is_empty()
    }

    /// Index of the nearest reference vector; ties go to the lowest index.
    pub fn winner(&self, x: RefVec) -> usize {
        let mut best = 0;
        let mut best_d = squared_distance(x, self.refvecs[0]);
        for (i, &r) in self.refvecs.iter().enumerate().skip(1) {
            let d = squared_distance(x, r);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// Moves every reference vector toward `x` by the fraction
    /// `π(y' − winner)`: `eps` for the winner, `eps_prime` for its chain
    /// neighbours, nothing further away. The chain does not wrap.
    pub fn update_step(&mut self, x: RefVec, winner: usize, eps: f64, eps_prime: f64) {
        let lo = winner.saturating_sub(1);
        let hi = (winner + 1).min(self.refvecs.len() - 1);
        for i in lo..=hi {
            let weight = if i == winner { eps } else { eps_prime };
            let r = &mut self.refvecs[i];
            r[0] += weight * (x[0] - r[0]);
            r[1] += weight * (x[1] - r[1]);
        }
    }

    /// Mean squared distance from each sample to its winning reference vector.
    pub fn distortion(&self, samples: &[RefVec]) -> f64 {
        if samples.is_empty() {
            return 0.0;
        }
        let total: f64 = samples
            .iter()
            .map(|&x| squared_distance(x, self.refvecs[self.winner(x)]))
            .sum();
        total / samples.len() as f64
    }

    /// Mean Euclidean distance between index-adjacent reference vectors.
    pub fn mean_adjacent_distance(&self) -> f64 {
        let n = self.refvecs.len() - 1;
        self.refvecs
            .windows(2)
            .map(|w| squared_distance(w[0], w[1]).sqrt())
            .sum::<f64>()
            / n as f64
    }

    /// Mean Euclidean distance over all unordered pairs of reference vectors.
    pub fn mean_pairwise_distance(&self) -> f64 {
        let n = self.refvecs.len();
        let mut total = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                total += squared_distance(self.refvecs[i], self.refvecs[j]).sqrt();
            }
        }
        total / (n * (n - 1) / 2) as f64
    }
}

/// Parameters of the growing-codebook trainer.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    /// Update weight of the winning reference vector.
    pub eps: f64,
    /// Update weight of the winner's two chain neighbours.
    pub eps_prime: f64,
    /// Each generation of size `N` gets `factor * N` updates.
    pub updates_per_generation_factor: usize,
    /// Codebook size at which training stops.
    pub final_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            eps: 0.1,
            eps_prime: 0.05,
            updates_per_generation_factor: 20,
            final_size: 256,
            seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.eps_prime && self.eps_prime <= self.eps && self.eps < 1.0) {
            return Err(AceError::Argument(format!(
                "need 0 < eps' <= eps < 1, got eps={} eps'={}",
                self.eps, self.eps_prime
            )));
        }
        if self.final_size < 2 || !self.final_size.is_power_of_two() {
            return Err(AceError::Argument(format!(
                "final size {} is not a power of two >= 2",
                self.final_size
            )));
        }
        if self.updates_per_generation_factor == 0 {
            return Err(AceError::Argument("update factor must be positive".into()));
        }
        Ok(())
    }
}

/// Doubles a codebook: even slots keep the old vectors, odd slots take the
/// midpoint to the next vector, and the last vector is duplicated.
pub fn interpolate_generation(refvecs: &[RefVec]) -> Result<Vec<RefVec>> {
    if refvecs.len() < 2 || !refvecs.len().is_power_of_two() {
        return Err(AceError::Argument(format!(
            "cannot interpolate a generation of size {}",
            refvecs.len()
        )));
    }
    let mut out = Vec::with_capacity(2 * refvecs.len());
    for (i, &v) in refvecs.iter().enumerate() {
        out.push(v);
        let next = refvecs.get(i + 1).copied().unwrap_or(v);
        out.push([(v[0] + next[0]) / 2.0, (v[1] + next[1]) / 2.0]);
    }
    Ok(out)
}

/// Growing-codebook training with a fixed neighbourhood.
///
/// Starts from two samples drawn at random, runs `factor * N` updates at
/// each size `N`, and doubles by interpolation until `final_size` has had
/// its own round of updates. The result depends only on the sample order
/// and `cfg.seed`.
pub fn train_modified(samples: &[RefVec], cfg: &TrainConfig) -> Result<TopoMap> {
    if samples.is_empty() {
        return Err(AceError::Argument("no training samples".into()));
    }
    cfg.validate()?;
    let mut rng = SplitMix64::new(cfg.seed);
    let first = samples[rng.below(samples.len())];
    let second = samples[rng.below(samples.len())];
    let mut map = TopoMap {
        refvecs: vec![first, second],
    };
    loop {
        let updates = cfg.updates_per_generation_factor * map.len();
        for _ in 0..updates {
            let x = samples[rng.below(samples.len())];
            let w = map.winner(x);
            map.update_step(x, w, cfg.eps, cfg.eps_prime);
        }
        if map.len() >= cfg.final_size {
            return Ok(map);
        }
        map.refvecs = interpolate_generation(&map.refvecs)?;
    }
}

/// One phase of the classic trainer.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardStage {
    /// Gaussian neighbourhood width in index units; 0 updates the winner only.
    pub width: f64,
    pub eps: f64,
    pub updates: usize,
}

/// Classic fixed-size training with a shrinking neighbourhood.
///
/// The codebook starts as `size` samples drawn at random. Each stage applies
/// `π(d) = eps · exp(−d² / 2 width²)` around the winner. Stage widths and
/// rates must be non-increasing.
pub fn train_standard(
    samples: &[RefVec],
    size: usize,
    stages: &[StandardStage],
    seed: u64,
) -> Result<TopoMap> {
    if samples.is_empty() {
        return Err(AceError::Argument("no training samples".into()));
    }
    if stages
        .windows(2)
        .any(|w| w[1].width > w[0].width || w[1].eps > w[0].eps)
    {
        return Err(AceError::Argument(
            "neighbourhood schedule must be non-increasing".into(),
        ));
    }
    if stages.iter().any(|s| s.width < 0.0 || !(0.0..1.0).contains(&s.eps)) {
        return Err(AceError::Argument("stage width or rate out of range".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let init = (0..size).map(|_| samples[rng.below(samples.len())]).collect();
    let mut map = TopoMap::new(init)?;
    for stage in stages {
        // Neighbourhood weights beyond 4 widths are negligible.
        let reach = if stage.width > 0.0 {
            (4.0 * stage.width).ceil() as usize
        } else {
            0
        };
        let weights: Vec<f64> = (0..=reach)
            .map(|d| {
                if d == 0 {
                    stage.eps
                } else {
                    stage.eps * (-((d * d) as f64) / (2.0 * stage.width * stage.width)).exp()
                }
            })
            .collect();
        for _ in 0..stage.updates {
            let x = samples[rng.below(samples.len())];
            let w = map.winner(x);
            let lo = w.saturating_sub(reach);
            let hi = (w + reach).min(size - 1);
            for i in lo..=hi {
                let weight = weights[i.abs_diff(w)];
                let r = &mut map.refvecs[i];
                r[0] += weight * (x[0] - r[0]);
                r[1] += weight * (x[1] - r[1]);
            }
        }
    }
    Ok(map)
}

/// Winner table for every pair of `input_bits`-bit codes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lut {
    input_bits: u8,
    output_bits: u8,
    table: Vec<u8>,
}

impl Lut {
    pub fn from_table(input_bits: u8, output_bits: u8, table: Vec<u8>) -> Result<Self> {
        if !(1..=8).contains(&input_bits) || !(1..=8).contains(&output_bits) {
            return Err(AceError::Argument(format!(
                "lut bit widths {input_bits}/{output_bits} outside 1..=8"
            )));
        }
        let expected = 1usize << (2 * input_bits);
        if table.len() != expected {
            return Err(AceError::Argument(format!(
                "lut has {} entries, expected {expected}",
                table.len()
            )));
        }
        let limit = 1u16 << output_bits;
        if let Some(pos) = table.iter().position(|&v| v as u16 >= limit) {
            return Err(AceError::Argument(format!(
                "lut entry {pos} = {} exceeds {output_bits}-bit range",
                table[pos]
            )));
        }
        Ok(Lut {
            input_bits,
            output_bits,
            table,
        })
    }

    pub fn input_bits(&self) -> u8 {
        self.input_bits
    }

    pub fn output_bits(&self) -> u8 {
        self.output_bits
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    #[inline]
    pub fn get(&self, v1: u8, v2: u8) -> u8 {
        self.table[((v1 as usize) << self.input_bits) | v2 as usize]
    }
}

/// Tabulates `winner(map, (v1, v2))` over all `input_bits`-bit pairs.
pub fn compile_lut(map: &TopoMap, input_bits: u8) -> Result<Lut> {
    if !(1..=8).contains(&input_bits) {
        return Err(AceError::Argument(format!(
            "input bits {input_bits} outside 1..=8"
        )));
    }
    if map.len() > 256 {
        return Err(AceError::Argument(format!(
            "codebook of size {} does not fit 8-bit codes",
            map.len()
        )));
    }
    let side = 1usize << input_bits;
    let output_bits = map.len().trailing_zeros() as u8;
    let table: Vec<u8> = (0..side * side)
        .into_par_iter()
        .map(|addr| {
            let x = [(addr >> input_bits) as f64, (addr & (side - 1)) as f64];
            map.winner(x) as u8
        })
        .collect();
    Ok(Lut {
        input_bits,
        output_bits,
        table,
    })
}
