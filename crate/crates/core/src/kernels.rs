//! Normalized Gram matrices and their trace-normalized Hadamard products.
//!
//! A [`GramMatrix`] is stored at unit-diagonal scale: the buffer holds
//! `K_ij / sqrt(K_ii K_jj)`, whose diagonal is exactly 1, and the matrix
//! it represents is that buffer divided by `n`. Entrywise products of
//! unit-diagonal matrices stay unit-diagonal, so a product of any number of
//! factors is already trace-normalized once divided by `n` and never
//! underflows the way raw products (trace `n^(1-k)`) would.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    unit: Vec<f64>,
}

impl GramMatrix {
    /// Normalizes an arbitrary positive definite kernel matrix (row-major,
    /// `n*n`) to unit trace: `A_ij = K_ij / (n sqrt(K_ii K_jj))`.
    pub fn from_kernel_matrix(n: usize, kernel: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidKernel("empty kernel matrix".into()));
        }
        if kernel.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: kernel.len() });
        }
        let diag: Vec<f64> = (0..n).map(|i| kernel[i * n + i]).collect();
        if let Some(i) = diag.iter().position(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidKernel(format!("diagonal entry {i} is {}", diag[i])));
        }
        let mut unit = vec![0.0; n * n];
        for i in 0..n {
            unit[i * n + i] = 1.0;
            for j in 0..i {
                let (a, b) = (kernel[i * n + j], kernel[j * n + i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidKernel(format!("asymmetric at ({i}, {j})")));
                }
                let v = 0.5 * (a + b) / (diag[i] * diag[j]).sqrt();
                unit[i * n + j] = v;
                unit[j * n + i] = v;
            }
        }
        Ok(Self { n, unit })
    }

    /// The all-`1/n` matrix: neutral element of the normalized Hadamard
    /// product and the Gram matrix of a constant variable.
    pub fn uniform(n: usize) -> Self {
        Self { n, unit: vec![1.0; n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entry `A_ij` of the trace-one matrix.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.unit[i * self.n + j] / self.n as f64
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Row-major entries of the trace-one matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let scale = 1.0 / self.n as f64;
        self.unit.iter().map(|v| v * scale).collect()
    }

    /// Row-major entries at unit-diagonal scale (`n` times the matrix).
    pub fn unit_scaled(&self) -> &[f64] {
        &self.unit
    }

    /// Squared Frobenius norm of the trace-one matrix, i.e. `tr(A^2)`.
    pub fn frobenius_sq(&self) -> f64 {
        let s: f64 = self.unit.iter().map(|v| v * v).sum();
        s / (self.n as f64 * self.n as f64)
    }

    /// Normalized Hadamard product of two matrices.
    pub fn hadamard(&self, other: &GramMatrix) -> Result<GramMatrix> {
        let mut out = self.clone();
        out.hadamard_assign(other)?;
        Ok(out)
    }

    pub fn hadamard_assign(&mut self, other: &GramMatrix) -> Result<()> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        for (a, b) in self.unit.iter_mut().zip(&other.unit) {
            *a *= b;
        }
        Ok(())
    }

    /// Gram matrix of the same variable with its samples reordered:
    /// entry `(i, j)` becomes entry `(perm[i], perm[j])`.
    pub fn permuted(&self, perm: &[usize]) -> GramMatrix {
        let n = self.n;
        debug_assert_eq!(perm.len(), n);
        let mut unit = vec![0.0; n * n];
        for (i, &pi) in perm.iter().enumerate() {
            let src = &self.unit[pi * n..(pi + 1) * n];
            let dst = &mut unit[i * n..(i + 1) * n];
            for (d, &pj) in dst.iter_mut().zip(perm) {
                *d = src[pj];
            }
        }
        GramMatrix { n, unit }
    }
}

/// Median of all pairwise absolute differences, falling back to 1.0 when
/// that median is zero or there is only one sample.
pub fn median_bandwidth(column: &[f64]) -> f64 {
    let n = column.len();
    let mut dists = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push((column[i] - column[j]).abs());
        }
    }
    if dists.is_empty() {
        return 1.0;
    }
    let m = dists.len();
    let median = if m % 2 == 1 {
        *dists.select_nth_unstable_by(m / 2, f64::total_cmp).1
    } else {
        let (lower, upper, _) = dists.select_nth_unstable_by(m / 2, f64::total_cmp);
        let below = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (below + *upper)
    };
    if median > 0.0 && median.is_finite() {
        median
    } else {
        1.0
    }
}

/// Gaussian kernel `exp(-(a-b)^2 / (2 sigma^2))` over one scalar column.
pub fn gram_gaussian(column: &[f64], sigma: f64) -> Result<GramMatrix> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::NonPositiveBandwidth(sigma));
    }
    let n = column.len();
    if n == 0 {
        return Err(Error::InvalidKernel("empty column".into()));
    }
    let scale = -1.0 / (2.0 * sigma * sigma);
    let mut unit = vec![0.0; n * n];
    for i in 0..n {
        unit[i * n + i] = 1.0;
        for j in 0..i {
            let d = column[i] - column[j];
            let v = (scale * d * d).exp();
            unit[i * n + j] = v;
            unit[j * n + i] = v;
        }
    }
    Ok(GramMatrix { n, unit })
}

/// Delta kernel over class codes: 1 on equal labels, 0 otherwise.
pub fn gram_delta(labels: &[usize]) -> Result<GramMatrix> {
    let n = labels.len();
    if n == 0 {
        return Err(Error::InvalidKernel("empty label vector".into()));
    }
    let mut unit = vec![0.0; n * n];
    for (i, &a) in labels.iter().enumerate() {
        for (j, &b) in labels.iter().enumerate() {
            if a == b {
                unit[i * n + j] = 1.0;
            }
        }
    }
    Ok(GramMatrix { n, unit })
}

/// `(A_1 ∘ … ∘ A_k) / tr(A_1 ∘ … ∘ A_k)`.
pub fn hadamard_normalized(grams: &[&GramMatrix]) -> Result<GramMatrix> {
    let (first, rest) = grams.split_first().ok_or(Error::EmptyInput)?;
    let mut out = (*first).clone();
    for g in rest {
        out.hadamard_assign(g)?;
    }
    Ok(out)
}
