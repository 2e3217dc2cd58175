//! Matrix-based Rényi entropy and the information quantities built on it.
//!
//! All values are in bits. For a trace-one Gram matrix `A` with eigenvalues
//! `λ_i`, `S_α(A) = log2(Σ λ_i^α) / (1 - α)`. Joint entropies use the
//! normalized Hadamard product of the per-variable Gram matrices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{hadamard_normalized, GramMatrix};

/// Eigenvalues in `[-NEGATIVE_TOLERANCE, 0)` are round-off and get clamped.
pub const NEGATIVE_TOLERANCE: f64 = 1e-8;

/// Rényi order. Must be positive and not 1 (the Shannon limit is
/// approximated with values such as 1.01).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub const NEAR_SHANNON: Alpha = Alpha(1.01);
    pub const QUADRATIC: Alpha = Alpha(2.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && (value - 1.0).abs() >= 1e-6 {
            Ok(Alpha(value))
        } else {
            Err(Error::InvalidAlpha(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Alpha {
    fn default() -> Self {
        Alpha::NEAR_SHANNON
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Alpha::new(v)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Non-negative eigenvalues of a trace-one matrix, sorted non-increasing,
/// summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspectrum {
    values: Vec<f64>,
}

impl Eigenspectrum {
    /// Validates and normalizes raw eigenvalues with the same clamping rule
    /// as [`eigenspectrum`].
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite() || **v < -NEGATIVE_TOLERANCE) {
            return Err(Error::NegativeEigenvalue(bad));
        }
        let mut clamped = false;
        for v in values.iter_mut().filter(|v| **v < 0.0) {
            *v = 0.0;
            clamped = true;
        }
        let total: f64 = values.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidKernel("spectrum sums to zero".into()));
        }
        if clamped || (total - 1.0).abs() > 1e-12 {
            values.iter_mut().for_each(|v| *v /= total);
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Groups of indices that are connected through non-zero entries. Hadamard
/// products with a class-indicator kernel are block diagonal, and each block
/// can be decomposed on its own.
fn connected_blocks(unit: &[f64], n: usize) -> Vec<Vec<usize>> {
    let mut block = vec![usize::MAX; n];
    let mut blocks = Vec::new();
    for start in 0..n {
        if block[start] != usize::MAX {
            continue;
        }
        let id = blocks.len();
        block[start] = id;
        let mut members = vec![start];
        let mut next = 0;
        while next < members.len() {
            let i = members[next];
            next += 1;
            for (j, &v) in unit[i * n..(i + 1) * n].iter().enumerate() {
                if v != 0.0 && block[j] == usize::MAX {
                    block[j] = id;
                    members.push(j);
                }
            }
        }
        members.sort_unstable();
        blocks.push(members);
    }
    blocks
}

fn symmetric_eigenvalues(unit: &[f64], n: usize, idx: &[usize]) -> Result<Vec<f64>> {
    if idx.len() == 1 {
        return Ok(vec![unit[idx[0] * n + idx[0]]]);
    }
    let m = faer::Mat::<f64>::from_fn(idx.len(), idx.len(), |i, j| unit[idx[i] * n + idx[j]]);
    m.as_ref()
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|_| Error::EigensolverFailure)
}

/// Eigenvalues of the trace-one matrix represented by `a`.
pub fn eigenspectrum(a: &GramMatrix) -> Result<Eigenspectrum> {
    let n = a.dim();
    let unit = a.unit_scaled();
    let mut raw = Vec::with_capacity(n);
    for idx in connected_blocks(unit, n) {
        raw.extend(symmetric_eigenvalues(unit, n, &idx)?);
    }
    let scale = 1.0 / n as f64;
    // Eigenvalues below the numerical rank cutoff are solver noise. Left in,
    // they inflate the power sum for α < 1.
    let max = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = n as f64 * f64::EPSILON * max;
    Eigenspectrum::from_values(
        raw.iter()
            .map(|&v| if v.abs() <= cutoff { 0.0 } else { v * scale })
            .collect(),
    )
}

/// `S_α` of a spectrum; zero eigenvalues contribute nothing.
pub fn renyi_entropy(spec: &Eigenspectrum, alpha: Alpha) -> f64 {
    let a = alpha.value();
    let power_sum: f64 = spec.values.iter().filter(|&&v| v > 0.0).map(|v| v.powf(a)).sum();
    power_sum.log2() / (1.0 - a)
}

/// `S_α(A)` straight from the matrix. For α = 2 the power sum is
/// `tr(A²)`, the squared Frobenius norm, and no eigendecomposition is needed.
pub fn matrix_entropy(a: &GramMatrix, alpha: Alpha) -> Result<f64> {
    if alpha.value() == 2.0 {
        return Ok(-a.frobenius_sq().log2());
    }
    Ok(renyi_entropy(&eigenspectrum(a)?, alpha))
}

pub fn joint_entropy(grams: &[&GramMatrix], alpha: Alpha) -> Result<f64> {
    matrix_entropy(&hadamard_normalized(grams)?, alpha)
}

/// `I_α(B; {A_1..A_k}) = S(B) + S(A_1∘…∘A_k) − S(A_1∘…∘A_k∘B)`.
pub fn mutual_information(label_gram: &GramMatrix, feature_grams: &[&GramMatrix], alpha: Alpha) -> Result<f64> {
    if feature_grams.is_empty() {
        return Err(Error::EmptyInput);
    }
    let features = hadamard_normalized(feature_grams)?;
    let with_label = features.hadamard(label_gram)?;
    Ok(matrix_entropy(label_gram, alpha)? + matrix_entropy(&features, alpha)?
        - matrix_entropy(&with_label, alpha)?)
}

/// `I_α({C}; B | {A}) = S(A∘C) + S(B∘A) − S(A∘B∘C) − S(A)`.
///
/// With no conditioning matrices this reduces to [`mutual_information`]. The
/// value is not clamped and can be slightly negative.
pub fn conditional_mutual_information(
    c_grams: &[&GramMatrix],
    label_gram: &GramMatrix,
    a_grams: &[&GramMatrix],
    alpha: Alpha,
) -> Result<f64> {
    if c_grams.is_empty() {
        return Err(Error::EmptyInput);
    }
    if a_grams.is_empty() {
        return mutual_information(label_gram, c_grams, alpha);
    }
    let cond = hadamard_normalized(a_grams)?;
    let cond_c = cond.hadamard(&hadamard_normalized(c_grams)?)?;
    let cond_b = cond.hadamard(label_gram)?;
    let all = cond_c.hadamard(label_gram)?;
    Ok(matrix_entropy(&cond_c, alpha)? + matrix_entropy(&cond_b, alpha)?
        - matrix_entropy(&all, alpha)?
        - matrix_entropy(&cond, alpha)?)
}
