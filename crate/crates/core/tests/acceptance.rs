//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line
//! (written straight to stderr so it shows up even when output is captured)
//! and then asserts.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use ace::histogram::CliqueHistogram;
use ace::image::QuantizedImage;
use ace::model::{AceConfig, AceModel, LayerMask, LogProbImage};
use ace::network::{make_schedule, Field};
use ace::oracle::{self, TinyTree};
use ace::rng::SplitMix64;
use ace::synth::{self, Rect};
use ace::topomap::{train_modified, train_standard, StandardStage, TrainConfig};

fn report(criterion: u32, name: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("acceptance {criterion} {name}: {verdict} ({detail})\n");
    std::io::stderr().write_all(line.as_bytes()).ok();
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn random_table(rng: &mut SplitMix64, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| 0.01 + rng.next_f64()).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / sum).collect()
}

fn random_tree(rng: &mut SplitMix64) -> TinyTree {
    let alphabet = 2 + rng.below(3);
    let out_alphabet = 2 + rng.below(3);
    let map = |rng: &mut SplitMix64| -> Vec<usize> {
        (0..alphabet * alphabet).map(|_| rng.below(out_alphabet)).collect()
    };
    let y1 = map(rng);
    let y2 = map(rng);
    let p_in12 = random_table(rng, alphabet * alphabet);
    let p_in34 = random_table(rng, alphabet * alphabet);
    let p_out = random_table(rng, out_alphabet * out_alphabet);
    TinyTree { alphabet, out_alphabet, y1, y2, p_in12, p_in34, p_out }
}

#[test]
fn criterion_1_tree_identity() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(11);
    let mut worst = 0.0f64;
    let trees = 2000;
    for _ in 0..trees {
        let t = random_tree(&mut rng);
        t.validate().unwrap();
        let a = t.alphabet;
        for code in 0..a.pow(4) {
            let x = [code % a, (code / a) % a, (code / a / a) % a, code / a / a / a];
            let (q1, q2) = (oracle::q_eq1(&t, x), oracle::q_eq2(&t, x));
            worst = worst.max((q1 - q2).abs() / q1.abs().max(1e-300));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        "tree identity",
        worst <= 1e-12 && secs < 1.0,
        format!("{trees} trees, worst relative gap {worst:.2e}, {secs:.3} s"),
    );
}

#[test]
fn criterion_2_cascade_matches_direct() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(22);
    let mut worst = 0.0f64;
    let images = 60;
    for i in 0..images {
        let img = synth::uniform_noise(32, 32, 1000 + i);
        let n_layers = 1 + (i as usize % 6);
        let bits = 4 + rng.below(3) as u8;
        let cfg = AceConfig {
            n_layers,
            bits,
            drop_bits: rng.below(2) as u8,
            seed: i,
            ..AceConfig::default()
        };
        let model = AceModel::train(&img, &cfg).unwrap();
        let fresh = model.prepare(&synth::uniform_noise(32, 32, 5000 + i)).unwrap();
        let mut masks = vec![LayerMask::all(n_layers)];
        for _ in 0..3 {
            let layers: Vec<usize> = (0..n_layers).filter(|_| rng.below(2) == 1).collect();
            masks.push(LayerMask::from_layers(n_layers, layers).unwrap());
        }
        for mask in &masks {
            let direct = model.log_q_direct(&fresh, mask).unwrap();
            let cascade = model.anomaly_image(&fresh, mask).unwrap().sum();
            worst = worst.max((cascade - direct).abs() / direct.abs().max(1.0));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        2,
        "cascade equals direct",
        worst <= 1e-9 && secs < 10.0,
        format!("{images} images, worst relative gap {worst:.2e}, {secs:.2} s"),
    );
}

#[test]
fn criterion_3_receptive_fields() {
    let schedule = make_schedule(6).unwrap();
    let seps: Vec<usize> = schedule.steps().iter().map(|s| s.separation).collect();
    let fields: Vec<String> = (0..6).map(|l| schedule.clique_field(l).to_string()).collect();
    let schedule_ok = seps == [1, 1, 2, 2, 4, 4]
        && fields == ["1x2", "2x2", "2x4", "4x4", "4x8", "8x8"];

    // Perturb each input pixel of a 16x16 image and record which pixels of
    // every layer change; the changed set must fit in the stated field.
    let img = synth::uniform_noise(16, 16, 3);
    let cfg = AceConfig { n_layers: 6, bits: 5, drop_bits: 0, wedge: false, ..AceConfig::default() };
    let model = AceModel::train(&img, &cfg).unwrap();
    let base = model.forward(&model.prepare(&img).unwrap()).unwrap();
    let mut perturb_ok = true;
    let mut reach = [Field { width: 1, height: 1 }; 7];
    for r in 0..16 {
        for c in 0..16 {
            let mut changed = img.clone();
            changed.set(r, c, img.get(r, c) ^ 0x80).unwrap();
            let layers = model.forward(&model.prepare(&changed).unwrap()).unwrap();
            for l in 1..=6 {
                let field = schedule.receptive_field(l);
                for rr in 0..16 {
                    for cc in 0..16 {
                        if layers[l].get(rr, cc) == base[l].get(rr, cc) {
                            continue;
                        }
                        // Pixel (rr, cc) of layer l sees rows rr.. and columns cc.. of the input.
                        let dr = (r + 16 - rr) % 16;
                        let dc = (c + 16 - cc) % 16;
                        perturb_ok &= dr < field.height && dc < field.width;
                        reach[l].height = reach[l].height.max(dr + 1);
                        reach[l].width = reach[l].width.max(dc + 1);
                    }
                }
            }
        }
    }
    let observed: Vec<String> = reach[1..].iter().map(|f| f.to_string()).collect();
    report(
        3,
        "receptive-field schedule",
        schedule_ok && perturb_ok,
        format!("separations {seps:?}, fields {fields:?}, observed reach {observed:?}"),
    );
}

/// Mean of the clique factors of one layer on a fresh image, with a
/// standard deviation combining the spread of the fresh cliques and the
/// binomial counting noise of the training histogram.
fn null_statistics(hist: &CliqueHistogram, factors: &[f64], bins: &[usize]) -> (f64, f64) {
    let k = factors.len() as f64;
    let mean = factors.iter().sum::<f64>() / k;
    let var = factors.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let mut fraction = vec![0.0; hist.counts().len()];
    for &b in bins {
        fraction[b] += 1.0 / k;
    }
    let counting: f64 = fraction
        .iter()
        .zip(hist.counts())
        .map(|(q, &c)| q * q / (c as f64 + hist.alpha()))
        .sum();
    (mean, (var / k + counting).sqrt())
}

#[test]
fn criterion_4_independence_null() {
    let train = synth::uniform_noise(128, 128, 41);
    let fresh = synth::uniform_noise(128, 128, 42);
    // Four dropped bits leave 256 histogram bins against 16384 cliques.
    let cfg = AceConfig { drop_bits: 4, ..AceConfig::default() };
    let model = AceModel::train(&train, &cfg).unwrap();
    let prepared = model.prepare(&fresh).unwrap();
    let layers = model.forward(&prepared).unwrap();
    let factors = model.clique_factors(&prepared).unwrap();
    let mut pass = true;
    let mut details = Vec::new();
    for step in &model.schedule().steps()[1..] {
        let l = step.layer_index;
        let hist = &model.histograms()[l];
        let side = hist.side();
        let bins: Vec<usize> = ace::network::clique_pairs(&layers[l], step)
            .unwrap()
            .iter()
            .map(|c| (c.first >> cfg.drop_bits) as usize * side + (c.second >> cfg.drop_bits) as usize)
            .collect();
        let (mean, sigma) = null_statistics(hist, &factors[l], &bins);
        pass &= mean.abs() <= 5.0 * sigma;
        details.push(format!("L{l} {mean:+.4}/{sigma:.4}"));
    }
    report(4, "independence null", pass, format!("mean/sigma {}", details.join(", ")));
}

/// Mean of the negated log-probability inside `patch` minus the mean over
/// pixels farther than `margin` from it, in units of the latter's spread.
fn separation(lp: &LogProbImage, patch: Rect, margin: usize) -> (f64, f64, f64) {
    let guard = patch.grown(margin);
    let (mut inside, mut outside) = (Vec::new(), Vec::new());
    for r in 0..lp.height() {
        for c in 0..lp.width() {
            let score = -lp.get(r, c);
            if patch.contains(r, c) {
                inside.push(score);
            } else if !guard.contains(r, c) {
                outside.push(score);
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (m_in, m_out) = (mean(&inside), mean(&outside));
    let sd = (outside.iter().map(|s| (s - m_out).powi(2)).sum::<f64>() / outside.len() as f64).sqrt();
    (m_in, m_out, sd)
}

fn four_by_four_layer(model: &AceModel) -> usize {
    model
        .schedule()
        .layer_with_clique_field(Field { width: 4, height: 4 })
        .expect("six layers include the 4x4 cliques")
}

#[test]
fn criterion_5_planted_anomaly() {
    let start = Instant::now();
    let patch = Rect { row: 56, col: 56, width: 16, height: 16 };
    let (clean, test) = synth::checkerboard_with_shifted_patch(128, 2, 64, 192, patch, 1);
    let model = AceModel::train(&clean, &AceConfig::default()).unwrap();
    let layer = four_by_four_layer(&model);
    let mask = LayerMask::single(model.n_layers(), layer).unwrap();
    let lp = model.anomaly_image(&model.prepare(&test).unwrap(), &mask).unwrap();
    let (m_in, m_out, sd) = separation(&lp, patch, 8);
    let secs = start.elapsed().as_secs_f64();
    report(
        5,
        "planted anomaly",
        m_in - m_out >= 3.0 * sd && secs < 30.0,
        format!("layer {layer}, patch {m_in:.4}, background {m_out:.4} sd {sd:.4}, {secs:.2} s"),
    );
}

#[test]
fn criterion_6_train_test_split() {
    let texture = synth::sawtooth(128, 128, &[40, 100, 160, 220], 12, 61);
    let left = texture.crop(0, 0, 64, 128).unwrap();
    let right = texture.crop(0, 64, 64, 128).unwrap();
    let patch = Rect { row: 56, col: 24, width: 16, height: 16 };
    let flipped = synth::flip_both(&right.crop(patch.row, patch.col, patch.width, patch.height).unwrap());
    let test = synth::paste(&right, &flipped, patch.row, patch.col).unwrap();
    let model = AceModel::train(&left, &AceConfig::default()).unwrap();
    let layer = four_by_four_layer(&model);
    let mask = LayerMask::single(model.n_layers(), layer).unwrap();
    let lp = model.anomaly_image(&model.prepare(&test).unwrap(), &mask).unwrap();
    let (m_in, m_out, sd) = separation(&lp, patch, 8);
    report(
        6,
        "train/test split",
        m_in - m_out >= 3.0 * sd,
        format!("layer {layer}, patch {m_in:.4}, background {m_out:.4} sd {sd:.4}"),
    );
}

#[test]
fn criterion_7_topomap_quality() {
    let size = 16;
    let seeds = 20;
    let (mut distortion_ok, mut ordered) = (0, 0);
    let mut ratios = Vec::new();
    // Fully annealed classic training on the same data, reported for scale.
    let stages: Vec<StandardStage> = [(4.0, 0.5), (2.0, 0.3), (1.0, 0.1), (0.5, 0.05), (0.0, 0.02)]
        .iter()
        .map(|&(width, eps)| StandardStage { width, eps, updates: 2000 })
        .collect();
    let mut annealed = Vec::new();
    for seed in 0..seeds {
        let mut rng = SplitMix64::new(700 + seed);
        let samples: Vec<[f64; 2]> = (0..2000)
            .map(|_| [rng.below(64) as f64, rng.below(64) as f64])
            .collect();
        let cfg = TrainConfig { final_size: size, seed, ..TrainConfig::default() };
        let map = train_modified(&samples, &cfg).unwrap();
        let ratio = map.distortion(&samples) / oracle::kmeans_distortion(&samples, size, seed);
        ratios.push(ratio);
        let reference = train_standard(&samples, size, &stages, seed).unwrap();
        annealed.push(reference.distortion(&samples) / oracle::kmeans_distortion(&samples, size, seed));
        if ratio <= 1.2 {
            distortion_ok += 1;
        }
        if map.mean_adjacent_distance() < map.mean_pairwise_distance() {
            ordered += 1;
        }
    }
    ratios.sort_by(f64::total_cmp);
    annealed.sort_by(f64::total_cmp);
    report(
        7,
        "topographic map quality",
        distortion_ok * 5 >= seeds * 4 && ordered * 20 >= seeds * 19,
        format!(
            "distortion within 1.2x k-means in {distortion_ok}/{seeds} (median ratio {:.3}; \
             annealed classic map {:.3}), ordered {ordered}/{seeds}",
            ratios[ratios.len() / 2],
            annealed[annealed.len() / 2]
        ),
    );
}

#[test]
fn criterion_8_layer_training_time() {
    let img = synth::uniform_noise(256, 256, 81);
    let cfg = AceConfig { n_layers: 1, bits: 6, ..AceConfig::default() };
    let start = Instant::now();
    AceModel::train(&img, &cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    report(8, "one-layer training time", secs < 5.0, format!("{secs:.3} s for 256x256 at 6 bits"));
}

fn run_ace(args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_ace")).args(args).output().unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn criterion_9_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.pgm");
    let texture: QuantizedImage = synth::sawtooth(64, 64, &[30, 90, 150, 210], 20, 91);
    std::fs::write(&input, ace::image::save_pgm(&texture)).unwrap();
    let mut models = Vec::new();
    let mut images = Vec::new();
    for run in 0..2 {
        let model = dir.path().join(format!("m{run}.ace"));
        let out = dir.path().join(format!("a{run}.pgm"));
        run_ace(&["train", "--in", path_str(&input), "--out", path_str(&model), "--seed", "5"]);
        run_ace(&["apply", "--model", path_str(&model), "--in", path_str(&input), "--out", path_str(&out)]);
        models.push(std::fs::read(&model).unwrap());
        images.push(std::fs::read(&out).unwrap());
    }
    report(
        9,
        "determinism",
        models[0] == models[1] && images[0] == images[1],
        format!("model {} bytes, anomaly image {} bytes", models[0].len(), images[0].len()),
    );
}
