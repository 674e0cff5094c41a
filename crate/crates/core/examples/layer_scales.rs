//! Prints the pairing schedule and how much each layer contributes to the
//! log-probability of a texture, for the training image and for noise.

use ace::model::{AceConfig, AceModel, LayerMask};
use ace::synth;

fn main() -> ace::Result<()> {
    let texture = synth::sawtooth(64, 64, &[30, 90, 150, 210], 10, 2);
    let noise = synth::uniform_noise(64, 64, 3);
    let model = AceModel::train(&texture, &AceConfig::default())?;
    let (own, other) = (model.prepare(&texture)?, model.prepare(&noise)?);
    println!("layer  pairing      sep  field  log Q texture  log Q noise");
    for step in model.schedule().steps() {
        let l = step.layer_index;
        let mask = LayerMask::single(model.n_layers(), l)?;
        println!(
            "{l:<5}  {:<11}  {:>3}  {:>5}  {:>13.1}  {:>11.1}",
            step.orientation.to_string(),
            step.separation,
            model.schedule().clique_field(l).to_string(),
            model.log_q_direct(&own, &mask)?,
            model.log_q_direct(&other, &mask)?
        );
    }
    Ok(())
}
