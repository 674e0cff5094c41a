//! Grows a topographic map on uniform 2-D points and compares its
//! quantization error with k-means at the same codebook size.

use ace::oracle;
use ace::rng::SplitMix64;
use ace::topomap::{compile_lut, train_modified, TrainConfig};

fn main() -> ace::Result<()> {
    let mut rng = SplitMix64::new(3);
    let samples: Vec<[f64; 2]> = (0..4000)
        .map(|_| [rng.below(64) as f64, rng.below(64) as f64])
        .collect();
    println!("  size  distortion  k-means  adjacent  pairwise");
    for size in [4, 8, 16, 32, 64] {
        let map = train_modified(&samples, &TrainConfig { final_size: size, ..TrainConfig::default() })?;
        println!(
            "{size:>6}  {:>10.2}  {:>7.2}  {:>8.2}  {:>8.2}",
            map.distortion(&samples),
            oracle::kmeans_distortion(&samples, size, 1),
            map.mean_adjacent_distance(),
            map.mean_pairwise_distance()
        );
    }

    // A 6-bit map compiled to a lookup table over all pairs of 6-bit codes.
    let map = train_modified(&samples, &TrainConfig { final_size: 64, ..TrainConfig::default() })?;
    let lut = compile_lut(&map, 6)?;
    println!("lookup table: {} entries, (0,0) -> {}, (63,63) -> {}", lut.table().len(), lut.get(0, 0), lut.get(63, 63));
    Ok(())
}
