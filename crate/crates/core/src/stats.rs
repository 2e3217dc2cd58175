//! Hypothesis-test machinery: chi-square quantiles, the paired t-test and
//! the Wilcoxon rank-sum test.

use serde::{Deserialize, Serialize};
use statrs::function::{beta::beta_reg, erf::erfc, gamma::gamma_lr};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub p_value: f64,
    pub reject: bool,
}

impl TestOutcome {
    fn at(p_value: f64, significance: f64) -> Self {
        Self { p_value, reject: p_value < significance }
    }
}

pub fn chi2_cdf(df: u64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma_lr(df as f64 / 2.0, x / 2.0)
}

/// `p`-quantile of the chi-square distribution, found by bisection on the
/// regularized lower incomplete gamma function.
pub fn chi2_quantile(df: u64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    if df == 0 {
        return Err(Error::InvalidConfig("chi-square needs at least one degree of freedom".into()));
    }
    let mut lo = 0.0;
    let mut hi = (df as f64).max(1.0);
    while chi2_cdf(df, hi) < p {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi2_cdf(df, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Two-sided tail probability `P(|T| >= |t|)` for Student's t.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t))
}

fn normal_two_sided(z: f64) -> f64 {
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}

/// Two-sided paired t-test. All-zero differences give `p = 1`.
pub fn paired_t_test(a: &[f64], b: &[f64], significance: f64) -> Result<TestOutcome> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1) as f64;
    let p = if var == 0.0 {
        if mean == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        let t = mean / (var / n as f64).sqrt();
        student_t_two_sided(t, (n - 1) as f64)
    };
    Ok(TestOutcome::at(p, significance))
}

/// Average ranks (1-based) of `values`, ties sharing the mean of their
/// positions. Also returns `Σ (t³ − t)` over tie groups.
pub fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut tie_term = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        let t = (end - start) as f64;
        tie_term += t * t * t - t;
        start = end;
    }
    (ranks, tie_term)
}

/// Samples at most this long on both sides, without ties, use the exact
/// null distribution of the rank sum.
pub const EXACT_RANK_SUM_LIMIT: usize = 8;

/// Number of `k`-subsets of `{1..n}` with each possible rank sum.
fn rank_sum_counts(n: usize, k: usize) -> Vec<f64> {
    let max_sum = k * (2 * n - k + 1) / 2;
    // ways[j][s]: subsets of size j with sum s
    let mut ways = vec![vec![0.0f64; max_sum + 1]; k + 1];
    ways[0][0] = 1.0;
    for r in 1..=n {
        for j in (1..=k.min(r)).rev() {
            for s in (r..=max_sum).rev() {
                ways[j][s] += ways[j - 1][s - r];
            }
        }
    }
    ways.swap_remove(k)
}

/// Two-sided Wilcoxon rank-sum (Mann–Whitney) test.
///
/// Small tie-free samples use the exact distribution. Otherwise the normal
/// approximation applies, with midranks, tie-corrected variance and a 0.5
/// continuity correction.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64], significance: f64) -> Result<TestOutcome> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (n1, n2) = (a.len(), b.len());
    let n = n1 + n2;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, tie_term) = midranks(&pooled);
    let w: f64 = ranks[..n1].iter().sum();
    let mean = n1 as f64 * (n + 1) as f64 / 2.0;

    let p = if tie_term == 0.0 && n1 <= EXACT_RANK_SUM_LIMIT && n2 <= EXACT_RANK_SUM_LIMIT {
        let counts = rank_sum_counts(n, n1);
        let total: f64 = counts.iter().sum();
        let w = w.round() as usize;
        let lower: f64 = counts[..=w].iter().sum::<f64>() / total;
        let upper: f64 = counts[w..].iter().sum::<f64>() / total;
        (2.0 * lower.min(upper)).min(1.0)
    } else {
        let var = n1 as f64 * n2 as f64 / 12.0
            * ((n + 1) as f64 - tie_term / (n as f64 * (n as f64 - 1.0)));
        if var <= 0.0 {
            1.0
        } else {
            let z = ((w - mean).abs() - 0.5) / var.sqrt();
            if z <= 0.0 {
                1.0
            } else {
                normal_two_sided(z)
            }
        }
    };
    Ok(TestOutcome::at(p, significance))
}
