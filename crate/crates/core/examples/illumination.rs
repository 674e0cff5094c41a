//! Adds a grey ramp to a texture and removes it again with the plane fit
//! used before training.

use ace::image::{fit_plane, wedge_correct_with_stats, QuantizedImage};
use ace::synth;

fn main() -> ace::Result<()> {
    let texture = synth::checkerboard(64, 64, 4, 90, 150);
    let lit = QuantizedImage::from_fn(64, 64, 8, |r, c| {
        (texture.get(r, c) as f64 + 0.5 * c as f64 - 0.25 * r as f64).round().clamp(0.0, 255.0) as u8
    })?;
    let (a, b, mean) = fit_plane(&lit);
    println!("fitted ramp: {a:+.4} per column, {b:+.4} per row, mean {mean:.2}");
    let (flat, stats) = wedge_correct_with_stats(&lit);
    let (a, b, _) = fit_plane(&flat);
    println!("after correction: {a:+.4} per column, {b:+.4} per row, {} pixels clamped", stats.clamped);
    Ok(())
}
