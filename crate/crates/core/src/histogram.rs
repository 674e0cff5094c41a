//! Clique histograms and log clique factors.
//!
//! Each layer keeps one joint histogram of its clique pairs, shared across
//! positions. Bins coalesce `2^drop_bits` adjacent codes per axis. At query
//! time the counts are smoothed by adding `alpha` to every joint bin, and
//! the marginals are taken from the smoothed joint, so a factorized joint
//! has a log factor of exactly zero.

use crate::error::{AceError, Result};

pub const DEFAULT_ALPHA: f64 = 1.0;

#[inline]
pub fn bin_of(value: u8, drop_bits: u8) -> usize {
    (value >> drop_bits) as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliqueHistogram {
    layer_index: usize,
    drop_bits: u8,
    side: usize,
    counts: Vec<u64>,
    total: u64,
    is_input_layer: bool,
    alpha: f64,
}

impl CliqueHistogram {
    /// An empty histogram for codes of `layer_bits` bits.
    pub fn empty(layer_bits: u8, drop_bits: u8, layer_index: usize, is_input_layer: bool) -> Result<Self> {
        if !(1..=8).contains(&layer_bits) || drop_bits >= layer_bits {
            return Err(AceError::Argument(format!(
                "cannot drop {drop_bits} of {layer_bits} bits"
            )));
        }
        let side = 1usize << (layer_bits - drop_bits);
        Ok(CliqueHistogram {
            layer_index,
            drop_bits,
            side,
            counts: vec![0; side * side],
            total: 0,
            is_input_layer,
            alpha: DEFAULT_ALPHA,
        })
    }

    /// Rebuilds a histogram from stored counts (row-major, `side`x`side`).
    pub fn from_counts(
        side: usize,
        drop_bits: u8,
        counts: Vec<u64>,
        layer_index: usize,
        is_input_layer: bool,
    ) -> Result<Self> {
        if !side.is_power_of_two() || side > 256 || counts.len() != side * side {
            return Err(AceError::Argument(format!(
                "{} counts do not form a power-of-two square of side {side}",
                counts.len()
            )));
        }
        let total = counts
            .iter()
            .try_fold(0u64, |acc, &c| acc.checked_add(c))
            .ok_or_else(|| AceError::Argument("histogram total overflows".into()))?;
        Ok(CliqueHistogram {
            layer_index,
            drop_bits,
            side,
            counts,
            total,
            is_input_layer,
            alpha: DEFAULT_ALPHA,
        })
    }

    /// Counts every pair. Values must fit in `layer_bits` bits.
    pub fn accumulate(
        pairs: impl IntoIterator<Item = (u8, u8)>,
        layer_bits: u8,
        drop_bits: u8,
        layer_index: usize,
        is_input_layer: bool,
    ) -> Result<Self> {
        let mut h = Self::empty(layer_bits, drop_bits, layer_index, is_input_layer)?;
        for (v1, v2) in pairs {
            h.add(v1, v2)?;
        }
        Ok(h)
    }

    pub fn add(&mut self, v1: u8, v2: u8) -> Result<()> {
        let (i, j) = (bin_of(v1, self.drop_bits), bin_of(v2, self.drop_bits));
        if i >= self.side || j >= self.side {
            return Err(AceError::Argument(format!(
                "pair ({v1}, {v2}) outside histogram range"
            )));
        }
        self.counts[i * self.side + j] += 1;
        self.total += 1;
        Ok(())
    }

    /// Adds another histogram's counts; both must share the binning.
    pub fn merge(&mut self, other: &CliqueHistogram) -> Result<()> {
        if other.side != self.side || other.drop_bits != self.drop_bits {
            return Err(AceError::Contract("histogram binning differs".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        Ok(())
    }

    pub fn layer_index(&self) -> usize {
        self.layer_index
    }

    pub fn drop_bits(&self) -> u8 {
        self.drop_bits
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.side + j]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_input_layer(&self) -> bool {
        self.is_input_layer
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn set_alpha(&mut self, alpha: f64) -> Result<()> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(AceError::Argument(format!("smoothing constant {alpha} must be positive")));
        }
        self.alpha = alpha;
        Ok(())
    }

    /// Row sums and column sums of the raw counts.
    pub fn marginals(&self) -> (Vec<u64>, Vec<u64>) {
        let mut rows = vec![0; self.side];
        let mut cols = vec![0; self.side];
        for i in 0..self.side {
            for j in 0..self.side {
                let c = self.counts[i * self.side + j];
                rows[i] += c;
                cols[j] += c;
            }
        }
        (rows, cols)
    }

    /// Smoothed joint probability table, row-major.
    pub fn smoothed_joint(&self) -> Vec<f64> {
        let denom = self.total as f64 + self.alpha * (self.side * self.side) as f64;
        self.counts
            .iter()
            .map(|&c| (c as f64 + self.alpha) / denom)
            .collect()
    }

    /// Marginals of the smoothed joint.
    pub fn smoothed_marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let denom = self.total as f64 + self.alpha * (self.side * self.side) as f64;
        let extra = self.alpha * self.side as f64;
        let (rows, cols) = self.marginals();
        let f = |m: Vec<u64>| m.into_iter().map(|c| (c as f64 + extra) / denom).collect();
        (f(rows), f(cols))
    }

    /// Log factor (nats) for every bin pair, row-major.
    ///
    /// Input layers give `log p(i, j)`; other layers give
    /// `log p(i, j) − log p(i) − log p(j)`.
    pub fn factor_table(&self) -> Result<Vec<f64>> {
        if self.total == 0 {
            return Err(AceError::State("histogram empty".into()));
        }
        let joint = self.smoothed_joint();
        if self.is_input_layer {
            return Ok(joint.iter().map(|p| p.ln()).collect());
        }
        let (rows, cols) = self.smoothed_marginals();
        let log_rows: Vec<f64> = rows.iter().map(|p| p.ln()).collect();
        let log_cols: Vec<f64> = cols.iter().map(|p| p.ln()).collect();
        Ok(joint
            .iter()
            .enumerate()
            .map(|(k, p)| p.ln() - log_rows[k / self.side] - log_cols[k % self.side])
            .collect())
    }

    /// Log clique factor (nats) of the code pair `(v1, v2)`.
    pub fn log_clique_factor(&self, v1: u8, v2: u8) -> Result<f64> {
        if self.total == 0 {
            return Err(AceError::State("histogram empty".into()));
        }
        let (i, j) = (bin_of(v1, self.drop_bits), bin_of(v2, self.drop_bits));
        if i >= self.side || j >= self.side {
            return Err(AceError::Argument(format!("pair ({v1}, {v2}) outside histogram range")));
        }
        let denom = self.total as f64 + self.alpha * (self.side * self.side) as f64;
        let joint = (self.count(i, j) as f64 + self.alpha) / denom;
        if self.is_input_layer {
            return Ok(joint.ln());
        }
        let (rows, cols) = self.marginals();
        let extra = self.alpha * self.side as f64;
        let pi = (rows[i] as f64 + extra) / denom;
        let pj = (cols[j] as f64 + extra) / denom;
        Ok(joint.ln() - pi.ln() - pj.ln())
    }

    /// Fraction of joint bins with a nonzero count.
    pub fn occupancy(&self) -> f64 {
        self.counts.iter().filter(|&&c| c > 0).count() as f64 / self.counts.len() as f64
    }

    /// Entropies (nats) of the raw row and column marginals.
    pub fn marginal_entropies(&self) -> (f64, f64) {
        if self.total == 0 {
            return (0.0, 0.0);
        }
        let total = self.total as f64;
        let h = |m: Vec<u64>| {
            m.into_iter()
                .filter(|&c| c > 0)
                .map(|c| {
                    let p = c as f64 / total;
                    -p * p.ln()
                })
                .sum()
        };
        let (rows, cols) = self.marginals();
        (h(rows), h(cols))
    }
}
