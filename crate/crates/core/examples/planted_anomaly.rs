//! Trains on a clean checkerboard, then renders the anomaly image of a copy
//! with a phase-shifted patch. Writes `clean.pgm`, `test.pgm` and
//! `anomaly.pgm` to the directory given as the first argument (default: the
//! system temp dir).

use std::path::PathBuf;

use ace::image::save_pgm;
use ace::model::{render, AceConfig, AceModel, LayerMask};
use ace::network::Field;
use ace::synth::{self, Rect};

fn main() -> ace::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let patch = Rect { row: 56, col: 56, width: 16, height: 16 };
    let (clean, test) = synth::checkerboard_with_shifted_patch(128, 2, 64, 192, patch, 1);

    let model = AceModel::train(&clean, &AceConfig::default())?;
    let layer = model
        .schedule()
        .layer_with_clique_field(Field { width: 4, height: 4 })
        .expect("six layers");
    let mask = LayerMask::single(model.n_layers(), layer)?;
    let lp = model.anomaly_image(&model.prepare(&test)?, &mask)?;

    let mut inside = 0.0;
    let mut outside = 0.0;
    let far = patch.grown(8);
    let (mut n_in, mut n_out) = (0, 0);
    for r in 0..128 {
        for c in 0..128 {
            if patch.contains(r, c) {
                inside += lp.get(r, c);
                n_in += 1;
            } else if !far.contains(r, c) {
                outside += lp.get(r, c);
                n_out += 1;
            }
        }
    }
    println!("layer {layer} (4x4 cliques)");
    println!("mean log-probability inside patch  {:.4}", inside / n_in as f64);
    println!("mean log-probability in background {:.4}", outside / n_out as f64);

    std::fs::write(dir.join("clean.pgm"), save_pgm(&clean))?;
    std::fs::write(dir.join("test.pgm"), save_pgm(&test))?;
    std::fs::write(dir.join("anomaly.pgm"), save_pgm(&render(&lp, true)))?;
    println!("images written to {}", dir.display());
    Ok(())
}
