//! Machine-readable run reports.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::evaluation::BootstrapResult;
use crate::selection::{RejectedCandidate, SelectionConfig, SelectionTrace, StepRecord};
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub path: Option<String>,
    /// Label column as given on the command line, if any.
    pub label: Option<String>,
    pub max_samples: usize,
    pub n_samples: usize,
    pub n_features: usize,
    pub n_classes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedFeature {
    pub index: usize,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub runs: usize,
    pub seed: u64,
    pub result: BootstrapResult,
}

/// Wall-clock seconds per phase. These are the only fields that differ
/// between otherwise identical runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub load_seconds: f64,
    pub select_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: SelectionConfig,
    pub input: InputEcho,
    pub selected: Vec<SelectedFeature>,
    pub steps: Vec<StepRecord>,
    pub stop_reason: String,
    pub full_mi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejected: Option<RejectedCandidate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapSummary>,
    pub timings: Timings,
}

impl RunReport {
    pub fn new(config: SelectionConfig, input: InputEcho, trace: SelectionTrace) -> Self {
        let selected = trace
            .steps
            .iter()
            .map(|s| SelectedFeature { index: s.feature, name: s.name.clone() })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            config,
            input,
            selected,
            steps: trace.steps,
            stop_reason: trace.stop_reason,
            full_mi: trace.full_mi,
            rejected: trace.rejected,
            bootstrap: None,
            timings: Timings::default(),
        }
    }

    pub fn selected_indices(&self) -> Vec<usize> {
        self.selected.iter().map(|s| s.index).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// The report with timings zeroed, for comparing runs.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        r.timings = Timings {
            bootstrap_seconds: r.timings.bootstrap_seconds.map(|_| 0.0),
            ..Timings::default()
        };
        r
    }
}
