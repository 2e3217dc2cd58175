//! Independent reference computations shared by the integration tests.
//! None of these call into the library's numerical routines.

#![allow(dead_code)]

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Eigenvalues of a symmetric matrix (row-major, `n × n`) by cyclic Jacobi
/// rotations, sorted non-increasing.
pub fn jacobi_eigenvalues(m: &[f64], n: usize) -> Vec<f64> {
    let mut a = m.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Rényi entropy in bits of a probability vector; zero entries are skipped.
pub fn renyi_bits(p: &[f64], alpha: f64) -> f64 {
    let s: f64 = p.iter().filter(|&&v| v > 0.0).map(|v| v.powf(alpha)).sum();
    s.log2() / (1.0 - alpha)
}

/// Two-sided rank-sum p-value by enumerating every assignment of the pooled
/// ranks `1..=na+nb` to the first sample (no ties).
pub fn rank_sum_enumeration(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let rank_of = |v: f64| 1 + pooled.iter().filter(|&&o| o < v).count();
    let observed: usize = a.iter().map(|&v| rank_of(v)).sum();
    let mean = a.len() as f64 * (n + 1) as f64 / 2.0;
    let dev = (observed as f64 - mean).abs();
    let (mut extreme, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != a.len() {
            continue;
        }
        let w: usize = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).sum();
        total += 1;
        if (w as f64 - mean).abs() >= dev - 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let mut s = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Γ(k/2) for a positive integer `k`.
fn half_gamma(k: u64) -> f64 {
    let (mut g, mut x) = if k % 2 == 0 { (1.0, 1.0) } else { (std::f64::consts::PI.sqrt(), 0.5) };
    while x < k as f64 / 2.0 - 1e-12 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Chi-square CDF by Simpson integration of the density after the
/// substitution `x = u²`, which removes the singularity at zero.
pub fn chi2_cdf_simpson(df: u64, x: f64) -> f64 {
    let k = df as f64;
    let norm = 2.0f64.powf(k / 2.0) * half_gamma(df);
    let f = |u: f64| 2.0 * u.powf(k - 1.0) * (-u * u / 2.0).exp() / norm;
    simpson(f, 0.0, x.sqrt(), 20_000)
}

pub fn chi2_quantile_simpson(df: u64, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 200.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if chi2_cdf_simpson(df, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Standard normal draws by Box-Muller.
pub fn normals(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let u1: f64 = r.random::<f64>().max(1e-300);
            let u2: f64 = r.random();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        })
        .collect()
}

/// Prints one acceptance line and returns whether it passed.
pub fn report(id: u32, name: &str, pass: bool, detail: impl std::fmt::Display) -> bool {
    println!("[{}] criterion {id}: {name} :: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}
