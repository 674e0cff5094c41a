//! Evaluates both forms of the two-layer tree density on a small random
//! tree and reports how far apart they are over all inputs.

use ace::oracle::{q_eq1, q_eq2, TinyTree};
use ace::rng::SplitMix64;

fn table(rng: &mut SplitMix64, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| 0.05 + rng.next_f64()).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / sum).collect()
}

fn main() -> ace::Result<()> {
    let mut rng = SplitMix64::new(5);
    let (a, m) = (3, 2);
    let tree = TinyTree {
        alphabet: a,
        out_alphabet: m,
        y1: (0..a * a).map(|_| rng.below(m)).collect(),
        y2: (0..a * a).map(|_| rng.below(m)).collect(),
        p_in12: table(&mut rng, a * a),
        p_in34: table(&mut rng, a * a),
        p_out: table(&mut rng, m * m),
    };
    tree.validate()?;
    let mut worst = 0.0f64;
    for code in 0..a.pow(4) {
        let x = [code % a, code / a % a, code / a / a % a, code / a / a / a];
        let (q1, q2) = (q_eq1(&tree, x), q_eq2(&tree, x));
        worst = worst.max((q1 - q2).abs());
    }
    println!("largest difference between the two forms over {} inputs: {worst:.3e}", a.pow(4));
    Ok(())
}
