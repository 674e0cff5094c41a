//! Brute-force references for cross-checking the main modules.
//!
//! Nothing here calls into [`crate::histogram`], [`crate::topomap`] or
//! [`crate::model`]; the formulas are transcribed separately so agreement
//! between the two routes means something. Everything is sized for tests
//! (alphabets of a handful of symbols).

use crate::error::{AceError, Result};
use crate::rng::SplitMix64;

/// The two-layer tree on four inputs: `y1 = y1(x1, x2)`, `y2 = y2(x3, x4)`,
/// with explicit probability tables for both input pairs and the output pair.
#[derive(Clone, Debug, PartialEq)]
pub struct TinyTree {
    /// Input alphabet size.
    pub alphabet: usize,
    /// Output alphabet size.
    pub out_alphabet: usize,
    /// `y1[x1 * alphabet + x2]`.
    pub y1: Vec<usize>,
    /// `y2[x3 * alphabet + x4]`.
    pub y2: Vec<usize>,
    /// `P_in,12[x1 * alphabet + x2]`.
    pub p_in12: Vec<f64>,
    /// `P_in,34[x3 * alphabet + x4]`.
    pub p_in34: Vec<f64>,
    /// `P_out[y1 * out_alphabet + y2]`.
    pub p_out: Vec<f64>,
}

impl TinyTree {
    pub fn validate(&self) -> Result<()> {
        let (a, m) = (self.alphabet, self.out_alphabet);
        let sizes_ok = self.y1.len() == a * a
            && self.y2.len() == a * a
            && self.p_in12.len() == a * a
            && self.p_in34.len() == a * a
            && self.p_out.len() == m * m;
        if !sizes_ok {
            return Err(AceError::Argument("tiny tree table sizes inconsistent".into()));
        }
        if self.y1.iter().chain(&self.y2).any(|&y| y >= m) {
            return Err(AceError::Argument("map output outside output alphabet".into()));
        }
        for table in [&self.p_in12, &self.p_in34, &self.p_out] {
            if table.iter().any(|&p| p <= 0.0) {
                return Err(AceError::Argument("probability tables must be strictly positive".into()));
            }
            if (table.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(AceError::Argument("probability table not normalized".into()));
            }
        }
        Ok(())
    }

    /// `P_out(y1)`: sum of the output table over `y2`.
    fn out_first(&self, y1: usize) -> f64 {
        (0..self.out_alphabet).map(|y2| self.p_out[y1 * self.out_alphabet + y2]).sum()
    }

    /// `P_out(y2)`: sum of the output table over `y1`.
    fn out_second(&self, y2: usize) -> f64 {
        (0..self.out_alphabet).map(|y1| self.p_out[y1 * self.out_alphabet + y2]).sum()
    }
}

/// Output pair joint, corrected by the two compression ratios.
pub fn q_eq1(t: &TinyTree, x: [usize; 4]) -> f64 {
    let a = t.alphabet;
    let y1 = t.y1[x[0] * a + x[1]];
    let y2 = t.y2[x[2] * a + x[3]];
    let joint_out = t.p_out[y1 * t.out_alphabet + y2];
    let ratio12 = t.p_in12[x[0] * a + x[1]] / t.out_first(y1);
    let ratio34 = t.p_in34[x[2] * a + x[3]] / t.out_second(y2);
    joint_out * ratio12 * ratio34
}

/// Product of the input pair PDFs, corrected by the output dependence ratio.
pub fn q_eq2(t: &TinyTree, x: [usize; 4]) -> f64 {
    let a = t.alphabet;
    let p12 = t.p_in12[x[0] * a + x[1]];
    let p34 = t.p_in34[x[2] * a + x[3]];
    let (y1, y2) = (t.y1[x[0] * a + x[1]], t.y2[x[2] * a + x[3]]);
    let dependence = t.p_out[y1 * t.out_alphabet + y2] / (t.out_first(y1) * t.out_second(y2));
    p12 * p34 * dependence
}

/// Smoothed tables from exhaustive counting of `(x1, x2)`, `(x3, x4)` and
/// `(y1, y2)` over the samples. Each bin gets `alpha` added before
/// normalizing.
#[derive(Clone, Debug, PartialEq)]
pub struct BruteTables {
    pub p_in12: Vec<f64>,
    pub p_in34: Vec<f64>,
    pub p_out: Vec<f64>,
}

pub fn brute_histogram(
    samples: &[[usize; 4]],
    alphabet: usize,
    out_alphabet: usize,
    y1: &[usize],
    y2: &[usize],
    alpha: f64,
) -> BruteTables {
    let mut c12 = vec![0usize; alphabet * alphabet];
    let mut c34 = vec![0usize; alphabet * alphabet];
    let mut cout = vec![0usize; out_alphabet * out_alphabet];
    for s in samples {
        let a12 = s[0] * alphabet + s[1];
        let a34 = s[2] * alphabet + s[3];
        c12[a12] += 1;
        c34[a34] += 1;
        cout[y1[a12] * out_alphabet + y2[a34]] += 1;
    }
    let smooth = |counts: Vec<usize>| -> Vec<f64> {
        let denom = samples.len() as f64 + alpha * counts.len() as f64;
        counts.into_iter().map(|c| (c as f64 + alpha) / denom).collect()
    };
    BruteTables {
        p_in12: smooth(c12),
        p_in34: smooth(c34),
        p_out: smooth(cout),
    }
}

pub fn nearest(centroids: &[[f64; 2]], x: [f64; 2]) -> usize {
    let d = |c: &[f64; 2]| (c[0] - x[0]).powi(2) + (c[1] - x[1]).powi(2);
    let mut best = 0;
    for i in 1..centroids.len() {
        if d(&centroids[i]) < d(&centroids[best]) {
            best = i;
        }
    }
    best
}

/// Lloyd's algorithm from a seeded k-means++ start, iterated until the
/// assignment stops changing. Returns the centroids and the mean squared
/// distance to them.
pub fn kmeans(samples: &[[f64; 2]], k: usize, seed: u64) -> (Vec<[f64; 2]>, f64) {
    assert!(!samples.is_empty() && k > 0, "need samples and k > 0");
    let mut rng = SplitMix64::new(seed);
    let sq = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);

    let mut centroids = vec![samples[rng.below(samples.len())]];
    while centroids.len() < k {
        let weights: Vec<f64> = samples
            .iter()
            .map(|&x| centroids.iter().map(|&c| sq(x, c)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = weights.iter().sum();
        if total == 0.0 {
            centroids.push(samples[rng.below(samples.len())]);
            continue;
        }
        let mut target = rng.next_f64() * total;
        let mut pick = samples.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if target < *w {
                pick = i;
                break;
            }
            target -= w;
        }
        centroids.push(samples[pick]);
    }

    let mut assignment = vec![usize::MAX; samples.len()];
    for _ in 0..10_000 {
        let mut changed = false;
        for (i, &x) in samples.iter().enumerate() {
            let a = nearest(&centroids, x);
            if a != assignment[i] {
                assignment[i] = a;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![[0.0f64; 2]; k];
        let mut counts = vec![0usize; k];
        for (i, &x) in samples.iter().enumerate() {
            sums[assignment[i]][0] += x[0];
            sums[assignment[i]][1] += x[1];
            counts[assignment[i]] += 1;
        }
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = [sums[j][0] / counts[j] as f64, sums[j][1] / counts[j] as f64];
            }
        }
    }
    let distortion = samples
        .iter()
        .map(|&x| sq(x, centroids[nearest(&centroids, x)]))
        .sum::<f64>()
        / samples.len() as f64;
    (centroids, distortion)
}

pub fn kmeans_distortion(samples: &[[f64; 2]], k: usize, seed: u64) -> f64 {
    kmeans(samples, k, seed).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn normalize(v: Vec<f64>) -> Vec<f64> {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|p| p / s).collect()
    }

    fn random_tree(alphabet: usize, out: usize, rng: &mut SplitMix64) -> TinyTree {
        let mut table = |n: usize| normalize((0..n).map(|_| 0.01 + rng.next_f64()).collect());
        let p_in12 = table(alphabet * alphabet);
        let p_in34 = table(alphabet * alphabet);
        let p_out = table(out * out);
        let y1 = (0..alphabet * alphabet).map(|_| rng.below(out)).collect();
        let y2 = (0..alphabet * alphabet).map(|_| rng.below(out)).collect();
        TinyTree { alphabet, out_alphabet: out, y1, y2, p_in12, p_in34, p_out }
    }

    fn all_tuples(a: usize) -> impl Iterator<Item = [usize; 4]> {
        (0..a * a * a * a).map(move |i| [i / (a * a * a), (i / (a * a)) % a, (i / a) % a, i % a])
    }

    #[test]
    fn uniform_tree() {
        let t = TinyTree {
            alphabet: 2,
            out_alphabet: 2,
            y1: vec![0, 0, 1, 1],
            y2: vec![0, 1, 0, 1],
            p_in12: vec![0.25; 4],
            p_in34: vec![0.25; 4],
            p_out: vec![0.25; 4],
        };
        t.validate().unwrap();
        for x in all_tuples(2) {
            assert!((q_eq1(&t, x) - 1.0 / 16.0).abs() < 1e-15);
            assert!((q_eq2(&t, x) - 1.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn factorized_output_reduces_to_input_product() {
        let mut rng = SplitMix64::new(1);
        let mut t = random_tree(3, 2, &mut rng);
        let r = normalize(vec![0.3, 0.7]);
        let c = normalize(vec![0.6, 0.4]);
        t.p_out = vec![r[0] * c[0], r[0] * c[1], r[1] * c[0], r[1] * c[1]];
        for x in all_tuples(3) {
            let expected = t.p_in12[x[0] * 3 + x[1]] * t.p_in34[x[2] * 3 + x[3]];
            assert!((q_eq1(&t, x) - expected).abs() < 1e-15);
            assert!((q_eq2(&t, x) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn normalized_when_output_is_pushforward() {
        let mut rng = SplitMix64::new(2);
        for _ in 0..20 {
            let mut t = random_tree(3, 3, &mut rng);
            let mut p_out = vec![0.0; 9];
            for a12 in 0..9 {
                for a34 in 0..9 {
                    p_out[t.y1[a12] * 3 + t.y2[a34]] += t.p_in12[a12] * t.p_in34[a34];
                }
            }
            // Keep the table strictly positive even when an output code is unused.
            if p_out.contains(&0.0) {
                continue;
            }
            t.p_out = p_out;
            let total: f64 = all_tuples(3).map(|x| q_eq1(&t, x)).sum();
            assert!((total - 1.0).abs() < 1e-9, "{total}");
        }
    }

    #[test]
    fn validate_rejects_bad_tables() {
        let mut rng = SplitMix64::new(3);
        let mut t = random_tree(2, 2, &mut rng);
        t.p_out[0] = 0.0;
        assert!(t.validate().is_err());
        let mut t = random_tree(2, 2, &mut rng);
        t.p_in12[0] *= 2.0;
        assert!(t.validate().is_err());
        let mut t = random_tree(2, 2, &mut rng);
        t.y1[0] = 5;
        assert!(t.validate().is_err());
    }

    #[test]
    fn brute_histogram_cases() {
        let y1 = vec![0, 1, 1, 0];
        let y2 = vec![0, 0, 1, 1];
        let single = brute_histogram(&[[1, 0, 0, 1]; 50], 2, 2, &y1, &y2, 1.0);
        assert!((single.p_in12[2] - 51.0 / 54.0).abs() < 1e-15);
        assert!((single.p_in12[0] - 1.0 / 54.0).abs() < 1e-15);
        assert!((single.p_out[y1[2] * 2 + y2[1]] - 51.0 / 54.0).abs() < 1e-15);

        let every: Vec<[usize; 4]> = all_tuples(2).collect();
        let y1 = vec![0, 1, 2, 3];
        let y2 = vec![0, 1, 2, 3];
        let uniform = brute_histogram(&every, 2, 4, &y1, &y2, 1.0);
        assert!(uniform.p_in12.iter().all(|&p| (p - 0.25).abs() < 1e-15));
        assert!(uniform.p_in34.iter().all(|&p| (p - 0.25).abs() < 1e-15));
        assert!(uniform.p_out.iter().all(|&p| (p - 1.0 / 16.0).abs() < 1e-15));
    }

    #[test]
    fn kmeans_cases() {
        let samples = [[1.0, 2.0], [3.0, 2.0], [2.0, 5.0], [2.0, -1.0]];
        // Sum of per-axis variances: 0.5 + 4.5.
        assert!((kmeans_distortion(&samples, 1, 0) - 5.0).abs() < 1e-12);

        let mut rng = SplitMix64::new(4);
        let far: Vec<[f64; 2]> = (0..200)
            .map(|i| {
                let c = if i % 2 == 0 { 0.0 } else { 1000.0 };
                [c + 0.01 * rng.next_f64(), c + 0.01 * rng.next_f64()]
            })
            .collect();
        assert!(kmeans_distortion(&far, 2, 1) < 1e-4);

        let uniform: Vec<[f64; 2]> = (0..1000).map(|_| [rng.next_f64(), rng.next_f64()]).collect();
        let d = kmeans_distortion(&uniform, 16, 2);
        assert!(d > 0.0 && d.is_finite());
    }

    proptest! {
        #[test]
        fn two_forms_agree(seed in any::<u64>(), a in 2usize..5, m in 2usize..5) {
            let t = random_tree(a, m, &mut SplitMix64::new(seed));
            t.validate().unwrap();
            for x in all_tuples(a) {
                let (q1, q2) = (q_eq1(&t, x), q_eq2(&t, x));
                prop_assert!((q1 - q2).abs() <= 1e-12 * q1.abs().max(1.0));
            }
        }
    }
}
