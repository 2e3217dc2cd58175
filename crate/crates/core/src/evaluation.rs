//! Bootstrap evaluation of feature subsets with a linear max-margin
//! classifier, the "optimal" subset size, and criterion ranking.

use rand::seq::SliceRandom;
use rand::RngExt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::stats::paired_t_test;

pub const EPOCHS: usize = 50;
pub const REGULARIZATION: f64 = 1e-3;
pub const DEFAULT_RUNS: usize = 100;
/// Level of the paired t-test that decides the optimal subset size.
pub const OPTIMAL_SIGNIFICANCE: f64 = 0.05;

/// One-vs-rest linear classifier. Each weight vector holds one weight per
/// feature followed by the bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    weights: Vec<Vec<f64>>,
    /// Set when training saw a single class; the model then always predicts it.
    constant: Option<usize>,
}

impl LinearModel {
    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn n_classes(&self) -> usize {
        self.weights.len()
    }

    /// The class a degenerate (single-class) model always predicts.
    pub fn constant_class(&self) -> Option<usize> {
        self.constant
    }

    pub fn decision_values(&self, x: &[f64]) -> Vec<f64> {
        self.weights.iter().map(|w| score(w, x)).collect()
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        if let Some(c) = self.constant {
            return c;
        }
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (c, w) in self.weights.iter().enumerate() {
            let s = score(w, x);
            if s > best_score {
                best = c;
                best_score = s;
            }
        }
        best
    }

    /// Fraction of `rows` predicted as `labels`.
    pub fn accuracy(&self, rows: &[Vec<f64>], labels: &[usize]) -> f64 {
        if rows.is_empty() {
            return 0.0;
        }
        let hits = rows.iter().zip(labels).filter(|(x, &y)| self.predict(x) == y).count();
        hits as f64 / rows.len() as f64
    }
}

fn score(w: &[f64], x: &[f64]) -> f64 {
    let d = x.len();
    w[..d].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[d]
}

/// Pegasos subgradient descent on the L2-regularized hinge loss, one model
/// per class against the rest. The bias is treated as a weight on a
/// constant input of 1 and is regularized with the rest.
///
/// Every epoch visits the rows in an order drawn from the stream keyed by
/// `(seed, epoch)`, with step size `1/(λ·t)` and projection onto the ball of
/// radius `1/√λ`.
pub fn train_linear(
    rows: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    epochs: usize,
    regularization: f64,
    seed: u64,
) -> Result<LinearModel> {
    if rows.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch(rows.len(), labels.len()));
    }
    if !(regularization > 0.0 && regularization.is_finite()) {
        return Err(Error::InvalidConfig(format!("regularization must be positive, got {regularization}")));
    }
    let d = rows[0].len();
    if let Some(bad) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: bad.len() });
    }
    let n_classes = n_classes.max(labels.iter().max().map_or(0, |m| m + 1));

    if labels.iter().all(|&l| l == labels[0]) {
        return Ok(LinearModel {
            weights: vec![vec![0.0; d + 1]; n_classes],
            constant: Some(labels[0]),
        });
    }

    let orders: Vec<Vec<usize>> = (0..epochs)
        .map(|e| {
            let mut order: Vec<usize> = (0..rows.len()).collect();
            order.shuffle(&mut rng::stream(seed, &[rng::TAG_TRAIN, e as u64]));
            order
        })
        .collect();
    let radius = 1.0 / regularization.sqrt();

    let weights = (0..n_classes)
        .map(|class| {
            let mut w = vec![0.0; d + 1];
            let mut t = 0usize;
            for order in &orders {
                for &i in order {
                    t += 1;
                    let eta = 1.0 / (regularization * t as f64);
                    let y = if labels[i] == class { 1.0 } else { -1.0 };
                    let margin = y * score(&w, &rows[i]);
                    let shrink = 1.0 - eta * regularization;
                    w.iter_mut().for_each(|v| *v *= shrink);
                    if margin < 1.0 {
                        for (v, x) in w.iter_mut().zip(&rows[i]) {
                            *v += eta * y * x;
                        }
                        w[d] += eta * y;
                    }
                    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm > radius {
                        w.iter_mut().for_each(|v| *v *= radius / norm);
                    }
                }
            }
            w
        })
        .collect();
    Ok(LinearModel { weights, constant: None })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub run_accuracies: Vec<f64>,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_features: usize,
}

impl BootstrapResult {
    /// Summary of per-run accuracies with the normal-approximation 95%
    /// interval `mean ± 1.96·sd/√runs` (sample standard deviation).
    pub fn from_runs(run_accuracies: Vec<f64>, n_features: usize) -> Self {
        let r = run_accuracies.len() as f64;
        let mean = run_accuracies.iter().sum::<f64>() / r;
        let sd = if run_accuracies.len() > 1 {
            (run_accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (r - 1.0)).sqrt()
        } else {
            0.0
        };
        let half = 1.96 * sd / r.sqrt();
        Self { run_accuracies, mean, ci_low: mean - half, ci_high: mean + half, n_features }
    }

    pub fn runs(&self) -> usize {
        self.run_accuracies.len()
    }
}

fn column_stats(rows: &[Vec<f64>], j: usize) -> (f64, f64) {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
    let sd = (rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n).sqrt();
    let scale = if sd > 1e-12 * mean.abs().max(1.0) { sd } else { f64::INFINITY };
    (mean, scale)
}

/// One bootstrap run: in-bag rows train, out-of-bag rows test. Both are
/// standardized with in-bag statistics. A draw that leaves no out-of-bag
/// rows is redrawn from the next attempt's stream.
fn bootstrap_run(x: &[Vec<f64>], labels: &[usize], n_classes: usize, seed: u64, run: usize) -> Result<f64> {
    let n = x.len();
    for attempt in 0u64.. {
        let mut r = rng::stream(seed, &[rng::TAG_BOOTSTRAP, run as u64, attempt]);
        let mut in_bag = vec![false; n];
        let draws: Vec<usize> = (0..n).map(|_| r.random_range(0..n)).collect();
        for &i in &draws {
            in_bag[i] = true;
        }
        let oob: Vec<usize> = (0..n).filter(|&i| !in_bag[i]).collect();
        if oob.is_empty() {
            continue;
        }
        let mut train: Vec<Vec<f64>> = draws.iter().map(|&i| x[i].clone()).collect();
        let mut test: Vec<Vec<f64>> = oob.iter().map(|&i| x[i].clone()).collect();
        for j in 0..x[0].len() {
            let (mean, scale) = column_stats(&train, j);
            for row in train.iter_mut().chain(test.iter_mut()) {
                row[j] = (row[j] - mean) / scale;
            }
        }
        let train_labels: Vec<usize> = draws.iter().map(|&i| labels[i]).collect();
        let test_labels: Vec<usize> = oob.iter().map(|&i| labels[i]).collect();
        let model = train_linear(&train, &train_labels, n_classes, EPOCHS, REGULARIZATION, r.random())?;
        return Ok(model.accuracy(&test, &test_labels));
    }
    unreachable!("attempt counter is unbounded")
}

/// Out-of-bag accuracy of the linear classifier on `subset` over `runs`
/// bootstrap resamples. Run `r` draws from the stream keyed by `(seed, r)`,
/// so the result does not depend on thread scheduling.
pub fn bootstrap_accuracy(d: &Dataset, subset: &[usize], runs: usize, seed: u64) -> Result<BootstrapResult> {
    if subset.is_empty() {
        return Err(Error::EmptyFeatureSubset);
    }
    if runs == 0 {
        return Err(Error::InvalidConfig("bootstrap needs at least one run".into()));
    }
    if let Some(&bad) = subset.iter().find(|&&j| j >= d.n_features()) {
        return Err(Error::FeatureOutOfRange { index: bad, features: d.n_features() });
    }
    if d.n_samples() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: d.n_samples() });
    }
    let x: Vec<Vec<f64>> = (0..d.n_samples())
        .map(|i| subset.iter().map(|&j| d.feature(j)[i]).collect())
        .collect();
    let accuracies = (0..runs)
        .into_par_iter()
        .map(|r| bootstrap_run(&x, d.labels(), d.n_classes(), seed, r))
        .collect::<Result<Vec<f64>>>()?;
    Ok(BootstrapResult::from_runs(accuracies, subset.len()))
}

/// Bootstrap results for the prefixes `order[..1]`, `order[..2]`, ... of a
/// selection order. Every prefix shares the same seed, so the runs are
/// paired across sizes.
pub fn bootstrap_curve(d: &Dataset, order: &[usize], runs: usize, seed: u64) -> Result<Vec<BootstrapResult>> {
    (1..=order.len())
        .map(|k| bootstrap_accuracy(d, &order[..k], runs, seed))
        .collect()
}

/// Smallest subset size (1-based) whose accuracies are not significantly
/// different, by paired t-test, from those of the size with the highest
/// mean. Ties for the highest mean go to the smallest size.
pub fn optimal_feature_count(curve: &[BootstrapResult], significance: f64) -> usize {
    if curve.is_empty() {
        return 0;
    }
    let mut m = 0;
    for (i, b) in curve.iter().enumerate() {
        if b.mean > curve[m].mean {
            m = i;
        }
    }
    for (s, b) in curve[..m].iter().enumerate() {
        let distinct = match paired_t_test(&b.run_accuracies, &curve[m].run_accuracies, significance) {
            Ok(t) => t.reject,
            // Single-run curves cannot be tested; only an exact tie counts.
            Err(_) => b.mean != curve[m].mean,
        };
        if !distinct {
            return s + 1;
        }
    }
    m + 1
}

/// Competition ranks of `|count − optimal|`, ascending: tied criteria share
/// the lowest rank and the next rank skips accordingly (1, 1, 3, ...).
pub fn competition_ranks(counts: &[usize], optimal: usize) -> Vec<usize> {
    let gaps: Vec<usize> = counts.iter().map(|&c| c.abs_diff(optimal)).collect();
    gaps.iter().map(|g| 1 + gaps.iter().filter(|&o| o < g).count()).collect()
}

/// Per-dataset criterion ranks. `ranks[d][c]` is the rank of criterion `c`
/// on dataset `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub criteria: Vec<String>,
    pub datasets: Vec<String>,
    pub ranks: Vec<Vec<usize>>,
}

impl RankTable {
    pub fn new(criteria: Vec<String>) -> Self {
        Self { criteria, datasets: Vec::new(), ranks: Vec::new() }
    }

    /// Ranks the criteria on one more dataset.
    pub fn add(&mut self, dataset: impl Into<String>, counts: &[usize], optimal: usize) -> Result<()> {
        if counts.len() != self.criteria.len() {
            return Err(Error::LengthMismatch(self.criteria.len(), counts.len()));
        }
        self.datasets.push(dataset.into());
        self.ranks.push(competition_ranks(counts, optimal));
        Ok(())
    }

    /// Ranks of criterion `c` across datasets.
    pub fn column(&self, c: usize) -> Vec<f64> {
        self.ranks.iter().map(|row| row[c] as f64).collect()
    }

    pub fn average_ranks(&self) -> Vec<f64> {
        let n = self.ranks.len().max(1) as f64;
        (0..self.criteria.len())
            .map(|c| self.column(c).iter().sum::<f64>() / n)
            .collect()
    }
}

/// Single-dataset rank table.
pub fn rank_criteria(criteria: &[String], counts: &[usize], optimal: usize) -> Result<RankTable> {
    if criteria.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut table = RankTable::new(criteria.to_vec());
    table.add("dataset", counts, optimal)?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngExt;

    fn blobs(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        // Two classes on either side of the line x0 + x1 = 0 with a gap of
        // at least 1 between them.
        let mut r = rng::stream(seed, &[1]);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        while rows.len() < n {
            let p = [r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)];
            let s = (p[0] + p[1]) / 2f64.sqrt();
            if s.abs() < 0.5 {
                continue;
            }
            labels.push(usize::from(s > 0.0));
            rows.push(p.to_vec());
        }
        (rows, labels)
    }

    #[test]
    fn separable_blobs_are_fit_exactly() {
        let (rows, labels) = blobs(100, 4);
        let m = train_linear(&rows, &labels, 2, EPOCHS, REGULARIZATION, 0).unwrap();
        assert_eq!(m.accuracy(&rows, &labels), 1.0);
        assert_eq!(m.weights().len(), 2);
        assert!(m.weights().iter().all(|w| w.len() == 3));
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let (rows, labels) = blobs(60, 2);
        let a = train_linear(&rows, &labels, 2, 10, REGULARIZATION, 5).unwrap();
        let b = train_linear(&rows, &labels, 2, 10, REGULARIZATION, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn three_classes_give_three_vectors() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![(i / 10) as f64 * 3.0, 0.5]).collect();
        let labels: Vec<usize> = (0..30).map(|i| i / 10).collect();
        let m = train_linear(&rows, &labels, 3, EPOCHS, REGULARIZATION, 1).unwrap();
        assert_eq!(m.n_classes(), 3);
        assert!(m.accuracy(&rows, &labels) >= 1.0 / 3.0);
    }

    #[test]
    fn single_class_training_gives_constant_predictor() {
        let rows = vec![vec![0.0], vec![1.0], vec![2.0]];
        let m = train_linear(&rows, &[1, 1, 1], 2, EPOCHS, REGULARIZATION, 0).unwrap();
        assert_eq!(m.constant_class(), Some(1));
        let test = vec![vec![5.0], vec![-5.0], vec![0.0], vec![1.0]];
        assert_eq!(m.accuracy(&test, &[1, 0, 0, 1]), 0.5);
    }

    #[test]
    fn training_rejects_bad_input() {
        assert!(train_linear(&[], &[], 2, 1, 1e-3, 0).is_err());
        assert!(train_linear(&[vec![1.0]], &[0, 1], 2, 1, 1e-3, 0).is_err());
        assert!(train_linear(&[vec![1.0]], &[0], 2, 1, 0.0, 0).is_err());
    }

    fn label_copy(n: usize) -> Dataset {
        let labels: Vec<usize> = (0..n).map(|i| (i * 7 + i / 3) % 2).collect();
        let copy = labels.iter().map(|&l| l as f64).collect();
        let noise = (0..n).map(|i| ((i * 37) % 11) as f64).collect();
        Dataset::new(vec![copy, noise], labels, vec!["copy".into(), "noise".into()]).unwrap()
    }

    #[test]
    fn label_copy_is_classified_perfectly() {
        let d = label_copy(200);
        let b = bootstrap_accuracy(&d, &[0], 100, 3).unwrap();
        assert_eq!(b.runs(), 100);
        assert!(b.mean >= 0.99, "{}", b.mean);
        assert!(b.ci_low <= b.mean && b.mean <= b.ci_high);
    }

    #[test]
    fn bootstrap_is_deterministic_and_bounded() {
        let d = label_copy(80);
        let a = bootstrap_accuracy(&d, &[1, 0], 20, 9).unwrap();
        assert_eq!(a, bootstrap_accuracy(&d, &[1, 0], 20, 9).unwrap());
        let lo = a.run_accuracies.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = a.run_accuracies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo <= a.mean && a.mean <= hi);
        assert!(a.run_accuracies.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn bootstrap_guards() {
        let d = label_copy(20);
        assert!(matches!(bootstrap_accuracy(&d, &[], 5, 0), Err(Error::EmptyFeatureSubset)));
        assert!(bootstrap_accuracy(&d, &[0], 0, 0).is_err());
        assert!(bootstrap_accuracy(&d, &[9], 5, 0).is_err());
    }

    #[test]
    fn ci_width_shrinks_with_root_runs() {
        let d = crate::synthetic::informative_plus_noise(120, 2, 2, 1).unwrap();
        let run = |runs| bootstrap_accuracy(&d, &[0, 2], runs, 4).unwrap();
        let (b25, b100, b400) = (run(25), run(100), run(400));
        let width = |b: &BootstrapResult| b.ci_high - b.ci_low;
        let ratio = width(&b25) / width(&b100);
        assert!((1.6..=2.5).contains(&ratio), "{ratio}");
        // Over a 16-fold run increase the width falls by exactly 4 once the
        // sample standard deviations are factored out.
        let sd = |b: &BootstrapResult| width(b) * (b.runs() as f64).sqrt() / (2.0 * 1.96);
        let scaled = (width(&b25) / width(&b400)) / (sd(&b25) / sd(&b400));
        assert!((scaled - 4.0).abs() < 1e-9, "{scaled}");
    }

    fn curve_from(means: &[f64], jitter: f64) -> Vec<BootstrapResult> {
        let mut r = rng::stream(11, &[]);
        let noise: Vec<f64> = (0..100).map(|_| r.random_range(-jitter..jitter)).collect();
        means
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                let mut rr = rng::stream(12, &[k as u64]);
                let runs = noise.iter().map(|e| m + e + rr.random_range(-1e-3..1e-3)).collect();
                BootstrapResult::from_runs(runs, k + 1)
            })
            .collect()
    }

    #[test]
    fn optimal_count_finds_plateau() {
        let curve = curve_from(&[0.60, 0.80, 0.81, 0.81], 0.02);
        assert_eq!(optimal_feature_count(&curve, 0.05), 3);
    }

    #[test]
    fn optimal_count_on_rising_and_flat_curves() {
        let rising = curve_from(&[0.5, 0.6, 0.7, 0.8], 0.02);
        assert_eq!(optimal_feature_count(&rising, 0.05), 4);
        let flat: Vec<_> = (0..4).map(|k| BootstrapResult::from_runs(vec![0.7; 10], k + 1)).collect();
        assert_eq!(optimal_feature_count(&flat, 0.05), 1);
    }

    #[test]
    fn optimal_count_stays_within_argmax() {
        for seed in 0..20u64 {
            let mut r = rng::stream(seed, &[]);
            let means: Vec<f64> = (0..6).map(|_| r.random_range(0.5..0.9)).collect();
            let curve = curve_from(&means, 0.05);
            let argmax = (0..6).fold(0, |m, i| if curve[i].mean > curve[m].mean { i } else { m });
            let k = optimal_feature_count(&curve, 0.05);
            assert!(k >= 1 && k <= argmax + 1);
        }
    }

    #[test]
    fn competition_ranking() {
        assert_eq!(competition_ranks(&[11, 4, 3, 5], 11), vec![1, 3, 4, 2]);
        assert_eq!(competition_ranks(&[2, 2, 2, 2], 2), vec![1, 1, 1, 1]);
        assert_eq!(competition_ranks(&[7], 3), vec![1]);
        assert_eq!(competition_ranks(&[3, 3, 3, 9], 3), vec![1, 1, 1, 4]);
    }

    #[test]
    fn rank_table_averages() {
        let names: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let mut t = rank_criteria(&names, &[3, 5], 3).unwrap();
        t.add("second", &[9, 5], 5).unwrap();
        assert_eq!(t.average_ranks(), vec![1.5, 1.5]);
        assert_eq!(t.column(1), vec![2.0, 1.0]);
        assert!(t.add("bad", &[1], 1).is_err());
        assert!(rank_criteria(&[], &[], 1).is_err());
    }
}
