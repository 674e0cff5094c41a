//! Trains on the left half of a noisy stripe texture and evaluates the right
//! half, into which a rotated copy of one of its own patches was pasted.

use ace::model::{AceConfig, AceModel, LayerMask};
use ace::synth::{self, Rect};

fn main() -> ace::Result<()> {
    let texture = synth::sawtooth(128, 128, &[40, 100, 160, 220], 12, 61);
    let left = texture.crop(0, 0, 64, 128)?;
    let right = texture.crop(0, 64, 64, 128)?;
    let patch = Rect { row: 56, col: 24, width: 16, height: 16 };
    let rotated = synth::flip_both(&right.crop(patch.row, patch.col, patch.width, patch.height)?);
    let test = synth::paste(&right, &rotated, patch.row, patch.col)?;

    let model = AceModel::train(&left, &AceConfig::default())?;
    let prepared_clean = model.prepare(&right)?;
    let prepared_test = model.prepare(&test)?;
    for layer in 0..model.n_layers() {
        let mask = LayerMask::single(model.n_layers(), layer)?;
        let clean = model.log_q_direct(&prepared_clean, &mask)?;
        let with_patch = model.log_q_direct(&prepared_test, &mask)?;
        println!(
            "layer {layer} ({} cliques): log Q clean {clean:10.2}, with patch {with_patch:10.2}",
            model.schedule().clique_field(layer)
        );
    }
    Ok(())
}
