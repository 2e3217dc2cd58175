//! Greedy forward selection maximizing `I_α(S'; y)` with pluggable
//! stopping criteria.
//!
//! The state caches one Gram matrix per feature plus running Hadamard
//! products over the selected set `S'` (with and without the label), so
//! scoring a candidate costs one entrywise multiply and two
//! eigendecompositions. The residual CMI of a candidate follows from the
//! cached full-set terms:
//! `I(S − S' − x; y | S' ∪ x) = J(S) + J(S'∪x, y) − J(S, y) − J(S'∪x)`.

mod criteria;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use criteria::{
    criterion_cmi_heuristic, criterion_cmi_permutation, criterion_delta_mi_chi2, criterion_mi_permutation,
    discrete_conditional_mi, REASON_CHI2_CELLS, REASON_CHI2_DEGENERATE,
};

use crate::data::{discretize_equal_frequency, standardize, Dataset, DiscretizedView};
use crate::entropy::{matrix_entropy, Alpha};
use crate::error::{Error, Result};
use crate::kernels::{gram_delta, gram_gaussian, median_bandwidth, GramMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    CmiHeuristic,
    CmiPermutation,
    MiPermutation,
    #[serde(rename = "dmi-chi2")]
    DeltaMiChi2,
    None,
}

impl Criterion {
    /// The four stopping rules, in reporting order.
    pub const STOPPING: [Criterion; 4] = [
        Criterion::CmiHeuristic,
        Criterion::CmiPermutation,
        Criterion::DeltaMiChi2,
        Criterion::MiPermutation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::CmiHeuristic => "cmi-heuristic",
            Criterion::CmiPermutation => "cmi-permutation",
            Criterion::MiPermutation => "mi-permutation",
            Criterion::DeltaMiChi2 => "dmi-chi2",
            Criterion::None => "none",
        }
    }

    pub fn is_permutation(self) -> bool {
        matches!(self, Criterion::CmiPermutation | Criterion::MiPermutation)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [Criterion::None]
            .into_iter()
            .chain(Criterion::STOPPING)
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown criterion {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub alpha: Alpha,
    pub criterion: Criterion,
    pub epsilon: f64,
    pub permutations: usize,
    pub theta: f64,
    pub chi2_bins: usize,
    pub seed: u64,
    pub max_features: Option<usize>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            alpha: Alpha::NEAR_SHANNON,
            criterion: Criterion::CmiHeuristic,
            epsilon: 1e-4,
            permutations: 100,
            theta: 0.95,
            chi2_bins: 5,
            seed: 0,
            max_features: None,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidConfig(format!("theta must lie in (0, 1), got {}", self.theta)));
        }
        if self.criterion.is_permutation() && self.permutations == 0 {
            return Err(Error::InvalidPermutationCount);
        }
        if self.criterion == Criterion::DeltaMiChi2 && self.chi2_bins == 0 {
            return Err(Error::InvalidConfig("chi2_bins must be positive".into()));
        }
        if self.epsilon.is_nan() {
            return Err(Error::InvalidConfig("epsilon is NaN".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Stop,
    Continue,
}

/// Criterion-specific diagnostics attached to a [`StopDecision`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecisionDetail {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exceedances: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees_of_freedom: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopDecision {
    pub decision: Decision,
    pub statistic: f64,
    pub threshold: f64,
    #[serde(default)]
    pub detail: DecisionDetail,
}

impl StopDecision {
    pub fn is_stop(&self) -> bool {
        self.decision == Decision::Stop
    }
}

/// One committed greedy step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub feature: usize,
    pub name: String,
    /// `I(S'; y)` after adding the feature.
    pub mi: f64,
    /// `I(S − S'; y | S')` after adding the feature.
    pub cmi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<StopDecision>,
}

/// The candidate that triggered the stop; it is not part of the selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedCandidate {
    pub feature: usize,
    pub name: String,
    pub mi: f64,
    pub decision: StopDecision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub steps: Vec<StepRecord>,
    pub stop_reason: String,
    /// `I(S; y)` over the full feature set.
    pub full_mi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejected: Option<RejectedCandidate>,
}

impl SelectionTrace {
    pub fn selected(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.feature).collect()
    }
}

/// Entropies of a candidate group `S' ∪ {x}` with and without the label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupTerms {
    pub joint: f64,
    pub joint_label: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub index: usize,
    pub terms: GroupTerms,
    /// `I(S' ∪ {x}; y)`.
    pub mi: f64,
}

#[derive(Debug, Clone)]
pub struct SelectionState {
    alpha: Alpha,
    single_grams: Vec<GramMatrix>,
    label_gram: GramMatrix,
    selected: Vec<usize>,
    remaining: BTreeSet<usize>,
    selected_gram: GramMatrix,
    selected_label_gram: GramMatrix,
    full_gram: GramMatrix,
    label_entropy: f64,
    selected_entropy: f64,
    selected_label_entropy: f64,
    full_entropy: f64,
    full_label_entropy: f64,
}

impl SelectionState {
    pub fn new(single_grams: Vec<GramMatrix>, label_gram: GramMatrix, alpha: Alpha) -> Result<Self> {
        let n = label_gram.dim();
        let mut full_gram = GramMatrix::uniform(n);
        for g in &single_grams {
            full_gram.hadamard_assign(g)?;
        }
        let full_label = full_gram.hadamard(&label_gram)?;
        let label_entropy = matrix_entropy(&label_gram, alpha)?;
        Ok(Self {
            alpha,
            remaining: (0..single_grams.len()).collect(),
            selected: Vec::new(),
            selected_gram: GramMatrix::uniform(n),
            selected_label_gram: label_gram.clone(),
            full_entropy: matrix_entropy(&full_gram, alpha)?,
            full_label_entropy: matrix_entropy(&full_label, alpha)?,
            selected_entropy: 0.0,
            selected_label_entropy: label_entropy,
            label_entropy,
            full_gram,
            single_grams,
            label_gram,
        })
    }

    /// Gaussian grams (median-heuristic bandwidth) on z-scored columns and a
    /// delta gram on the labels.
    pub fn from_dataset(d: &Dataset, alpha: Alpha) -> Result<Self> {
        let z = standardize(d);
        let grams = z
            .features()
            .par_iter()
            .map(|col| gram_gaussian(col, median_bandwidth(col)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grams, gram_delta(d.labels())?, alpha)
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn n_samples(&self) -> usize {
        self.label_gram.dim()
    }

    pub fn n_features(&self) -> usize {
        self.single_grams.len()
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn remaining(&self) -> &BTreeSet<usize> {
        &self.remaining
    }

    pub fn single_gram(&self, j: usize) -> &GramMatrix {
        &self.single_grams[j]
    }

    pub fn label_gram(&self) -> &GramMatrix {
        &self.label_gram
    }

    pub fn full_gram(&self) -> &GramMatrix {
        &self.full_gram
    }

    /// Running product over `S'`; the all-`1/n` matrix when `S'` is empty.
    pub fn selected_gram(&self) -> &GramMatrix {
        &self.selected_gram
    }

    pub fn label_entropy(&self) -> f64 {
        self.label_entropy
    }

    /// `I(S; y)`.
    pub fn full_mi(&self) -> f64 {
        self.label_entropy + self.full_entropy - self.full_label_entropy
    }

    /// `I(S'; y)`, zero for the empty selection.
    pub fn selected_mi(&self) -> f64 {
        self.label_entropy + self.selected_entropy - self.selected_label_entropy
    }

    fn check_remaining(&self, j: usize) -> Result<()> {
        if self.remaining.contains(&j) {
            Ok(())
        } else {
            Err(Error::UnknownCandidate(j))
        }
    }

    /// Entropy terms of `S' ∪ {extra}` for an arbitrary Gram matrix `extra`.
    pub fn group_terms(&self, extra: &GramMatrix) -> Result<GroupTerms> {
        let joint = self.selected_gram.hadamard(extra)?;
        let joint_label = self.selected_label_gram.hadamard(extra)?;
        Ok(GroupTerms {
            joint: matrix_entropy(&joint, self.alpha)?,
            joint_label: matrix_entropy(&joint_label, self.alpha)?,
        })
    }

    pub fn mi_of(&self, terms: GroupTerms) -> f64 {
        self.label_entropy + terms.joint - terms.joint_label
    }

    pub fn candidate(&self, j: usize) -> Result<Candidate> {
        self.check_remaining(j)?;
        let terms = self.group_terms(&self.single_grams[j])?;
        Ok(Candidate { index: j, terms, mi: self.mi_of(terms) })
    }

    /// `I(S − S' − x; y | S' ∪ x)` for a scored candidate; exactly zero when
    /// `x` is the last remaining feature.
    pub fn residual_cmi(&self, cand: &Candidate) -> f64 {
        if self.remaining.len() <= 1 {
            return 0.0;
        }
        self.full_entropy + cand.terms.joint_label - self.full_label_entropy - cand.terms.joint
    }

    /// Product of the single grams over `S − {x}`.
    pub(crate) fn gram_without(&self, x: usize) -> Result<GramMatrix> {
        let mut g = self.selected_gram.clone();
        for &j in self.remaining.iter().filter(|&&j| j != x) {
            g.hadamard_assign(&self.single_grams[j])?;
        }
        Ok(g)
    }

    /// Adds a scored candidate to `S'`.
    pub fn commit(&mut self, cand: &Candidate) -> Result<()> {
        self.check_remaining(cand.index)?;
        let g = &self.single_grams[cand.index];
        self.selected_gram.hadamard_assign(g)?;
        self.selected_label_gram.hadamard_assign(g)?;
        self.selected_entropy = cand.terms.joint;
        self.selected_label_entropy = cand.terms.joint_label;
        self.remaining.remove(&cand.index);
        self.selected.push(cand.index);
        Ok(())
    }
}

/// The remaining feature maximizing `I(S' ∪ {x}; y)`; ties go to the lowest
/// index whatever order the candidates were scored in.
pub fn best_candidate(state: &SelectionState) -> Result<Candidate> {
    let pool: Vec<usize> = state.remaining.iter().copied().collect();
    if pool.is_empty() {
        return Err(Error::NoRemainingFeatures);
    }
    let scored = pool
        .par_iter()
        .map(|&j| state.candidate(j))
        .collect::<Result<Vec<_>>>()?;
    let mut best = scored[0];
    for c in &scored[1..] {
        if c.mi > best.mi {
            best = *c;
        }
    }
    Ok(best)
}

/// Runs the greedy search on a prepared state. `discretized` is required
/// for the ΔMI-χ² criterion.
pub fn select_with_state(
    mut state: SelectionState,
    feature_names: &[String],
    discretized: Option<&DiscretizedView>,
    config: &SelectionConfig,
) -> Result<SelectionTrace> {
    config.validate()?;
    if config.alpha != state.alpha {
        return Err(Error::InvalidConfig("state was built for a different alpha".into()));
    }
    let total = state.n_features();
    if total == 0 {
        return Err(Error::InvalidConfig("dataset has no features".into()));
    }
    let cap = config.max_features.unwrap_or(total).min(total);
    let full_mi = state.full_mi();
    let mut steps = Vec::new();
    let mut rejected = None;

    let stop_reason = loop {
        if state.selected.len() >= cap {
            break if cap == total { "exhausted" } else { "max-features" }.to_string();
        }
        let cand = best_candidate(&state)?;
        let step = state.selected.len() as u64;
        let decision = match config.criterion {
            Criterion::None => None,
            Criterion::CmiHeuristic => Some(criteria::cmi_heuristic(&state, &cand, config.epsilon)),
            Criterion::CmiPermutation => Some(criteria::cmi_permutation(
                &state,
                &cand,
                config.permutations,
                config.theta,
                config.seed,
                step,
            )?),
            Criterion::MiPermutation => Some(criteria::mi_permutation(
                &state,
                &cand,
                config.permutations,
                config.theta,
                config.seed,
                step,
            )?),
            Criterion::DeltaMiChi2 => {
                let view = discretized
                    .ok_or_else(|| Error::InvalidConfig("ΔMI-χ² needs a discretized view".into()))?;
                Some(criterion_delta_mi_chi2(&state, cand.index, view, config.theta)?)
            }
        };
        if let Some(d) = decision.as_ref().filter(|d| d.is_stop()) {
            let reason = d.detail.reason.clone().unwrap_or_else(|| config.criterion.name().to_string());
            rejected = Some(RejectedCandidate {
                feature: cand.index,
                name: feature_names[cand.index].clone(),
                mi: cand.mi,
                decision: d.clone(),
            });
            break reason;
        }
        let cmi = state.residual_cmi(&cand);
        state.commit(&cand)?;
        steps.push(StepRecord {
            feature: cand.index,
            name: feature_names[cand.index].clone(),
            mi: cand.mi,
            cmi,
            criterion: decision,
        });
    };

    Ok(SelectionTrace { steps, stop_reason, full_mi, rejected })
}

/// Standardizes `d`, builds the kernel caches and runs the greedy search.
pub fn greedy_select(d: &Dataset, config: &SelectionConfig) -> Result<SelectionTrace> {
    config.validate()?;
    if d.n_features() == 0 {
        return Err(Error::InvalidConfig("dataset has no features".into()));
    }
    let state = SelectionState::from_dataset(d, config.alpha)?;
    let view = (config.criterion == Criterion::DeltaMiChi2)
        .then(|| discretize_equal_frequency(&standardize(d), config.chi2_bins));
    select_with_state(state, d.feature_names(), view.as_ref(), config)
}
