use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{Candidate, Decision, DecisionDetail, SelectionState, StopDecision};
use crate::data::DiscretizedView;
use crate::entropy::matrix_entropy;
use crate::error::{Error, Result};
use crate::rng;
use crate::stats::chi2_quantile;

/// Stop reason when the conditioning cells of ΔMI-χ² outnumber the samples.
pub const REASON_CHI2_CELLS: &str = "chi2-cells-exhausted";
/// Stop reason when the χ² test has zero degrees of freedom (constant
/// candidate or single class), where no dependence can be detected.
pub const REASON_CHI2_DEGENERATE: &str = "chi2-degenerate";

fn decision(stop: bool) -> Decision {
    if stop {
        Decision::Stop
    } else {
        Decision::Continue
    }
}

/// CMI-heuristic: stop when `I(S − S' − x; y | S' ∪ x) <= epsilon`.
pub fn criterion_cmi_heuristic(state: &SelectionState, cand: usize, epsilon: f64) -> Result<StopDecision> {
    let c = state.candidate(cand)?;
    Ok(cmi_heuristic(state, &c, epsilon))
}

pub(super) fn cmi_heuristic(state: &SelectionState, cand: &Candidate, epsilon: f64) -> StopDecision {
    let statistic = state.residual_cmi(cand);
    StopDecision {
        decision: decision(statistic <= epsilon),
        statistic,
        threshold: epsilon,
        detail: DecisionDetail { observed: Some(statistic), ..Default::default() },
    }
}

/// Algorithm-1 rule at significance `level`: stop iff more than `level` of
/// the permutations are beaten or matched by the observed residual CMI.
pub(crate) fn cmi_permutation_stops(exceedances: usize, permutations: usize, level: f64) -> bool {
    exceedances as f64 / permutations as f64 > level + 1e-12
}

/// Permutations the observed MI must strictly exceed to continue.
pub(crate) fn mi_permutation_required(permutations: usize, theta: f64) -> usize {
    (theta * permutations as f64 - 1e-9).ceil().max(0.0) as usize
}

fn permutation_of(n: usize, seed: u64, step: u64, i: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut r = rng::stream(seed, &[rng::TAG_PERMUTATION, step, i as u64]);
    perm.shuffle(&mut r);
    perm
}

/// CMI-permutation: compares the observed residual CMI against the residual
/// CMI obtained with `P` shuffled copies of the candidate column. `theta` is
/// the confidence level shared with the other tests, so the candidate must
/// beat the permutations at significance `1 − theta`: Continue iff the
/// fraction of permutations with `observed >= permuted` is at most
/// `1 − theta`.
///
/// Permutation `i` at greedy step `t` uses the stream keyed by
/// `(seed, t, i)`, where `t` is the current size of `S'`.
pub fn criterion_cmi_permutation(
    state: &SelectionState,
    cand: usize,
    permutations: usize,
    theta: f64,
    seed: u64,
) -> Result<StopDecision> {
    let c = state.candidate(cand)?;
    cmi_permutation(state, &c, permutations, theta, seed, state.selected().len() as u64)
}

pub(super) fn cmi_permutation(
    state: &SelectionState,
    cand: &Candidate,
    permutations: usize,
    theta: f64,
    seed: u64,
    step: u64,
) -> Result<StopDecision> {
    if permutations == 0 {
        return Err(Error::InvalidPermutationCount);
    }
    let observed = state.residual_cmi(cand);
    let permuted: Vec<f64> = if state.remaining().len() <= 1 {
        // No features left to condition away: every residual is zero.
        vec![0.0; permutations]
    } else {
        let alpha = state.alpha();
        let rest = state.gram_without(cand.index)?;
        let label = state.label_gram();
        let single = state.single_gram(cand.index);
        let n = state.n_samples();
        (0..permutations)
            .into_par_iter()
            .map(|i| {
                let shuffled = single.permuted(&permutation_of(n, seed, step, i));
                let full = rest.hadamard(&shuffled)?;
                let group = state.selected_gram().hadamard(&shuffled)?;
                Ok(matrix_entropy(&full, alpha)? + matrix_entropy(&group.hadamard(label)?, alpha)?
                    - matrix_entropy(&full.hadamard(label)?, alpha)?
                    - matrix_entropy(&group, alpha)?)
            })
            .collect::<Result<_>>()?
    };
    let exceedances = permuted.iter().filter(|&&p| observed >= p).count();
    let statistic = exceedances as f64 / permutations as f64;
    let level = 1.0 - theta;
    Ok(StopDecision {
        decision: decision(cmi_permutation_stops(exceedances, permutations, level)),
        statistic,
        threshold: level,
        detail: DecisionDetail {
            observed: Some(observed),
            exceedances: Some(exceedances),
            permutations: Some(permutations),
            ..Default::default()
        },
    })
}

/// MI-permutation: the candidate survives only if `I(S' ∪ x; y)` is
/// strictly larger than `I(S' ∪ x̃_i; y)` for at least `ceil(theta·P)` of the
/// shuffled copies. Streams are keyed as in [`criterion_cmi_permutation`].
pub fn criterion_mi_permutation(
    state: &SelectionState,
    cand: usize,
    permutations: usize,
    theta: f64,
    seed: u64,
) -> Result<StopDecision> {
    let c = state.candidate(cand)?;
    mi_permutation(state, &c, permutations, theta, seed, state.selected().len() as u64)
}

pub(super) fn mi_permutation(
    state: &SelectionState,
    cand: &Candidate,
    permutations: usize,
    theta: f64,
    seed: u64,
    step: u64,
) -> Result<StopDecision> {
    if permutations == 0 {
        return Err(Error::InvalidPermutationCount);
    }
    let single = state.single_gram(cand.index);
    let n = state.n_samples();
    let permuted = (0..permutations)
        .into_par_iter()
        .map(|i| {
            let shuffled = single.permuted(&permutation_of(n, seed, step, i));
            Ok(state.mi_of(state.group_terms(&shuffled)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    let exceedances = permuted.iter().filter(|&&p| cand.mi > p).count();
    let required = mi_permutation_required(permutations, theta);
    let statistic = exceedances as f64 / permutations as f64;
    Ok(StopDecision {
        decision: decision(exceedances < required),
        statistic,
        threshold: required as f64 / permutations as f64,
        detail: DecisionDetail {
            observed: Some(cand.mi),
            exceedances: Some(exceedances),
            permutations: Some(permutations),
            ..Default::default()
        },
    })
}

/// Plug-in estimate of `I(x; y | z)` in nats from integer codes, where `z`
/// is the joint code of the conditioning columns (`z_cells` distinct values).
pub fn discrete_conditional_mi(x: &[usize], x_card: usize, y: &[usize], y_card: usize, z: &[usize], z_cells: usize) -> f64 {
    let n = x.len();
    let mut n_xyz = vec![0usize; z_cells * x_card * y_card];
    let mut n_xz = vec![0usize; z_cells * x_card];
    let mut n_yz = vec![0usize; z_cells * y_card];
    let mut n_z = vec![0usize; z_cells];
    for i in 0..n {
        let (xi, yi, zi) = (x[i], y[i], z[i]);
        n_xyz[(zi * x_card + xi) * y_card + yi] += 1;
        n_xz[zi * x_card + xi] += 1;
        n_yz[zi * y_card + yi] += 1;
        n_z[zi] += 1;
    }
    let mut mi = 0.0;
    for zi in 0..z_cells {
        for xi in 0..x_card {
            for yi in 0..y_card {
                let c = n_xyz[(zi * x_card + xi) * y_card + yi];
                if c == 0 {
                    continue;
                }
                let num = c as f64 * n_z[zi] as f64;
                let den = n_xz[zi * x_card + xi] as f64 * n_yz[zi * y_card + yi] as f64;
                mi += c as f64 * (num / den).ln();
            }
        }
    }
    mi / n as f64
}

/// ΔMI-χ²: G-test of `I(x; y | S')` on discretized columns. The statistic
/// `2·n·Î` (nats) is compared with the `theta` quantile of χ² with
/// `(c_x − 1)(C − 1)·Π c_z` degrees of freedom; stop iff it falls below.
pub fn criterion_delta_mi_chi2(
    state: &SelectionState,
    cand: usize,
    view: &DiscretizedView,
    theta: f64,
) -> Result<StopDecision> {
    if !state.remaining().contains(&cand) {
        return Err(Error::UnknownCandidate(cand));
    }
    let n = view.labels.len();
    let stop_with = |reason: &str, df: Option<u64>| StopDecision {
        decision: Decision::Stop,
        statistic: 0.0,
        threshold: 0.0,
        detail: DecisionDetail {
            degrees_of_freedom: df,
            reason: Some(reason.to_string()),
            ..Default::default()
        },
    };

    let mut cells: usize = 1;
    for &j in state.selected() {
        match cells.checked_mul(view.cardinalities[j]) {
            Some(c) if c <= n => cells = c,
            _ => return Ok(stop_with(REASON_CHI2_CELLS, None)),
        }
    }
    let mut z = vec![0usize; n];
    for &j in state.selected() {
        let card = view.cardinalities[j];
        for (zi, &code) in z.iter_mut().zip(&view.columns[j]) {
            *zi = *zi * card + code;
        }
    }

    let cx = view.cardinalities[cand];
    let df = ((cx - 1) * (view.label_cardinality - 1) * cells) as u64;
    if df == 0 {
        return Ok(stop_with(REASON_CHI2_DEGENERATE, Some(0)));
    }
    let cmi = discrete_conditional_mi(&view.columns[cand], cx, &view.labels, view.label_cardinality, &z, cells);
    let statistic = 2.0 * n as f64 * cmi;
    let threshold = chi2_quantile(df, theta)?;
    Ok(StopDecision {
        decision: decision(statistic < threshold),
        statistic,
        threshold,
        detail: DecisionDetail {
            observed: Some(cmi),
            degrees_of_freedom: Some(df),
            ..Default::default()
        },
    })
}
