//! Seeded synthetic datasets with known structure.

use rand::{Rng, RngExt};

use crate::data::Dataset;
use crate::error::Result;
use crate::rng;

const TAG_SYNTH: u64 = 0x5359_4E54;

fn normal<R: Rng>(r: &mut R) -> f64 {
    // Box-Muller; u1 is kept away from zero.
    let u1: f64 = r.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = r.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// `informative` standard-normal features whose sum decides a binary label,
/// followed by `noise` independent standard-normal features. Features are
/// named `inf0..` and `noise0..`.
pub fn informative_plus_noise(n: usize, informative: usize, noise: usize, seed: u64) -> Result<Dataset> {
    let mut r = rng::stream(seed, &[TAG_SYNTH, 1]);
    let f = informative + noise;
    let mut cols = vec![Vec::with_capacity(n); f];
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let mut score = 0.0;
        for (j, col) in cols.iter_mut().enumerate() {
            let v = normal(&mut r);
            if j < informative {
                score += v;
            }
            col.push(v);
        }
        labels.push(usize::from(score > 0.0));
    }
    let names = (0..informative)
        .map(|j| format!("inf{j}"))
        .chain((0..noise).map(|j| format!("noise{j}")))
        .collect();
    dense_labels(cols, labels, names)
}

/// Breiman's three-class waveform data: 21 noisy features, each sample a
/// random convex mix of two of three shifted triangular waves.
pub fn waveform(n: usize, seed: u64) -> Result<Dataset> {
    let base = |shift: i32| -> [f64; 21] {
        let mut h = [0.0; 21];
        for (i, v) in h.iter_mut().enumerate() {
            *v = (6.0 - ((i as i32 + 1) - 11 - shift).abs() as f64).max(0.0);
        }
        h
    };
    let waves = [base(0), base(4), base(-4)];
    let pairs = [(0, 1), (0, 2), (1, 2)];

    let mut r = rng::stream(seed, &[TAG_SYNTH, 2]);
    let mut cols = vec![Vec::with_capacity(n); 21];
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let class = r.random_range(0..3usize);
        let u: f64 = r.random();
        let (a, b) = pairs[class];
        for (i, col) in cols.iter_mut().enumerate() {
            col.push(u * waves[a][i] + (1.0 - u) * waves[b][i] + normal(&mut r));
        }
        labels.push(class);
    }
    let names = (1..=21).map(|i| format!("x{i}")).collect();
    dense_labels(cols, labels, names)
}

/// Remaps labels to first-appearance order so the dataset matches what the
/// CSV loader would produce.
fn dense_labels(cols: Vec<Vec<f64>>, labels: Vec<usize>, names: Vec<String>) -> Result<Dataset> {
    let mut map: Vec<Option<usize>> = vec![None; labels.iter().max().map_or(0, |m| m + 1)];
    let mut class_names = Vec::new();
    let mut coded = Vec::with_capacity(labels.len());
    for l in labels {
        let code = *map[l].get_or_insert_with(|| {
            class_names.push(format!("c{l}"));
            class_names.len() - 1
        });
        coded.push(code);
    }
    Dataset::with_classes(cols, coded, names, class_names, "class".into())
}
