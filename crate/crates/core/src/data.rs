//! Tabular datasets: CSV ingestion, z-scoring, equal-frequency
//! discretization and stratified subsampling.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Numeric feature columns plus one categorical label vector.
///
/// Labels are dense codes `0..C`; `class_names[c]` keeps the original
/// spelling of class `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    feature_names: Vec<String>,
    class_names: Vec<String>,
    label_name: String,
}

impl Dataset {
    /// Builds a dataset from columns and dense label codes.
    ///
    /// Every code in `0..=max(labels)` must occur at least once.
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>, feature_names: Vec<String>) -> Result<Self> {
        let classes = labels.iter().max().map_or(0, |&m| m + 1);
        let class_names = (0..classes).map(|c| c.to_string()).collect();
        Self::with_classes(features, labels, feature_names, class_names, "label".to_string())
    }

    pub fn with_classes(
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
        label_name: String,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if feature_names.len() != features.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.len()
            )));
        }
        for (j, col) in features.iter().enumerate() {
            if col.len() != n {
                return Err(Error::InvalidDataset(format!(
                    "column {} has {} values, expected {n}",
                    feature_names[j],
                    col.len()
                )));
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "non-finite value in column {} at row {row}",
                    feature_names[j]
                )));
            }
        }
        let mut seen = vec![false; class_names.len()];
        for &l in &labels {
            match seen.get_mut(l) {
                Some(s) => *s = true,
                None => {
                    return Err(Error::InvalidDataset(format!(
                        "label code {l} exceeds class count {}",
                        class_names.len()
                    )))
                }
            }
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidDataset(format!("class code {c} never occurs")));
        }
        Ok(Self { features, labels, feature_names, class_names, label_name })
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn feature(&self, j: usize) -> &[f64] {
        &self.features[j]
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    /// Per-class sample counts indexed by class code.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows at `indices`, in the given order. Class codes are preserved, so
    /// the result may not contain every class.
    pub fn rows(&self, indices: &[usize]) -> Vec<Vec<f64>> {
        indices
            .iter()
            .map(|&i| self.features.iter().map(|col| col[i]).collect())
            .collect()
    }

    fn take_rows(&self, indices: &[usize]) -> Self {
        Self {
            features: self
                .features
                .iter()
                .map(|col| indices.iter().map(|&i| col[i]).collect())
                .collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
            label_name: self.label_name.clone(),
        }
    }

    fn map_columns(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        Self {
            features: self.features.iter().map(|c| f(c)).collect(),
            ..self.clone()
        }
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelColumn {
    Name(String),
    Index(usize),
    #[default]
    Last,
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// Names take precedence over indices when the header is consulted; a
    /// purely numeric string is kept as a name here and resolved later.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(LabelColumn::Name(s.to_string()))
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Name(s) => f.write_str(s),
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Last => f.write_str("last"),
        }
    }
}

impl LabelColumn {
    fn resolve(&self, header: &[String]) -> Result<usize> {
        match self {
            LabelColumn::Last => header
                .len()
                .checked_sub(1)
                .ok_or_else(|| Error::MissingLabelColumn("last".into())),
            LabelColumn::Index(i) if *i < header.len() => Ok(*i),
            LabelColumn::Index(i) => Err(Error::MissingLabelColumn(i.to_string())),
            LabelColumn::Name(name) => {
                if let Some(i) = header.iter().position(|h| h == name) {
                    return Ok(i);
                }
                match name.parse::<usize>() {
                    Ok(i) if i < header.len() => Ok(i),
                    _ => Err(Error::MissingLabelColumn(name.clone())),
                }
            }
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    read_csv(std::fs::File::open(path)?, label)
}

/// Parses CSV text with a header row. Data rows are numbered from 1 in
/// errors; columns from 0.
pub fn read_csv<R: Read>(reader: R, label: &LabelColumn) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let label_idx = label.resolve(&header)?;

    let feature_cols: Vec<usize> = (0..header.len()).filter(|&c| c != label_idx).collect();
    let mut features = vec![Vec::new(); feature_cols.len()];
    let mut labels = Vec::new();
    let mut class_codes: HashMap<String, usize> = HashMap::new();
    let mut class_names = Vec::new();

    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        for (slot, &c) in feature_cols.iter().enumerate() {
            let raw = record.get(c).unwrap_or("").trim();
            let value = raw
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse { row, col: c, value: raw.to_string() })?;
            features[slot].push(value);
        }
        let raw = record.get(label_idx).unwrap_or("").trim();
        if raw.is_empty() {
            return Err(Error::Parse { row, col: label_idx, value: String::new() });
        }
        let next = class_codes.len();
        let code = *class_codes.entry(raw.to_string()).or_insert_with(|| {
            class_names.push(raw.to_string());
            next
        });
        labels.push(code);
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let names = feature_cols.iter().map(|&c| header[c].clone()).collect();
    Dataset::with_classes(features, labels, names, class_names, header[label_idx].clone())
}

/// Writes features in column order followed by the label column, using the
/// shortest decimal form that parses back to the same `f64`.
pub fn write_csv<W: Write>(d: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = d.feature_names.iter().map(String::as_str).collect();
    header.push(&d.label_name);
    w.write_record(&header)?;
    for i in 0..d.n_samples() {
        let mut rec: Vec<String> = d.features.iter().map(|c| c[i].to_string()).collect();
        rec.push(d.class_names[d.labels[i]].clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_csv(d, std::fs::File::create(path)?)
}

/// Z-scores one column with the population standard deviation. Constant
/// columns become all zeros.
pub fn standardize_column(col: &[f64]) -> Vec<f64> {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std <= 1e-12 * mean.abs().max(1.0) {
        return vec![0.0; col.len()];
    }
    col.iter().map(|v| (v - mean) / std).collect()
}

pub fn standardize(d: &Dataset) -> Dataset {
    d.map_columns(standardize_column)
}

/// Integer-coded columns produced by equal-frequency binning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscretizedView {
    pub columns: Vec<Vec<usize>>,
    pub cardinalities: Vec<usize>,
    pub labels: Vec<usize>,
    pub label_cardinality: usize,
}

/// Equal-frequency codes for one column. Bin `k` ends at the value of rank
/// `ceil((k+1)·n/bins)`; a value equal to a cut point goes to the lower bin.
pub fn equal_frequency_codes(col: &[f64], bins: usize) -> (Vec<usize>, usize) {
    let n = col.len();
    let bins = bins.max(1);
    let mut sorted = col.to_vec();
    sorted.sort_by(f64::total_cmp);
    let max = sorted[n - 1];

    let mut cuts: Vec<f64> = (1..bins)
        .map(|k| sorted[(k * n).div_ceil(bins).max(1) - 1])
        .filter(|&c| c < max)
        .collect();
    cuts.dedup();

    let codes: Vec<usize> = col.iter().map(|&v| cuts.partition_point(|&c| c < v)).collect();
    (codes, cuts.len() + 1)
}

pub fn discretize_equal_frequency(d: &Dataset, bins: usize) -> DiscretizedView {
    let (columns, cardinalities) = d
        .features
        .iter()
        .map(|col| equal_frequency_codes(col, bins))
        .unzip();
    DiscretizedView {
        columns,
        cardinalities,
        labels: d.labels.clone(),
        label_cardinality: d.n_classes(),
    }
}

/// Per-class quotas summing to `total` by largest remainder, with at least
/// one sample per class.
fn stratified_quotas(counts: &[usize], total: usize) -> Vec<usize> {
    let n: usize = counts.iter().sum();
    let exact: Vec<f64> = counts.iter().map(|&c| c as f64 * total as f64 / n as f64).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let assigned: usize = quotas.iter().sum();
    for &c in order.iter().take(total - assigned) {
        quotas[c] += 1;
    }
    while let Some(empty) = quotas.iter().position(|&q| q == 0) {
        let donor = (0..quotas.len()).max_by_key(|&c| (quotas[c], usize::MAX - c)).unwrap_or(0);
        quotas[donor] -= 1;
        quotas[empty] += 1;
    }
    quotas
}

/// Stratified sample of at most `max_samples` rows, keeping original row
/// order. Returns the dataset unchanged when it is already small enough.
pub fn subsample(d: &Dataset, max_samples: usize, seed: u64) -> Result<Dataset> {
    let classes = d.n_classes();
    if max_samples < classes || max_samples == 0 {
        return Err(Error::MaxSamplesBelowClassCount { max_samples, classes });
    }
    if d.n_samples() <= max_samples {
        return Ok(d.clone());
    }
    let counts = d.class_counts();
    let quotas = stratified_quotas(&counts, max_samples);

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &l) in d.labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut keep = Vec::with_capacity(max_samples);
    for (c, members) in by_class.iter_mut().enumerate() {
        let mut rng = rng::stream(seed, &[rng::TAG_SUBSAMPLE, c as u64]);
        let (chosen, _) = members.partial_shuffle(&mut rng, quotas[c]);
        keep.extend_from_slice(chosen);
    }
    keep.sort_unstable();
    Ok(d.take_rows(&keep))
}
