//! Trains a small model, writes it in the binary model format, reads it
//! back and prints the same summary as `ace inspect`.

use ace::cli::{format, inspect_report};
use ace::model::{AceConfig, AceModel};
use ace::synth;

fn main() -> ace::Result<()> {
    let texture = synth::sawtooth(64, 64, &[20, 70, 120, 170, 220], 15, 8);
    let model = AceModel::train(&texture, &AceConfig { bits: 6, ..AceConfig::default() })?;
    let bytes = format::encode(&model);
    let path = std::env::temp_dir().join("sawtooth.ace");
    std::fs::write(&path, &bytes)?;
    let back = format::decode(&std::fs::read(&path)?)?;
    assert_eq!(back, model);
    println!("{} bytes in {}", bytes.len(), path.display());
    print!("{}", inspect_report(&back));
    Ok(())
}
