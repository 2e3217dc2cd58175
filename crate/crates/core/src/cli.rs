//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::data::{discretize_equal_frequency, load_csv, save_csv, standardize, subsample, Dataset, LabelColumn};
use crate::entropy::Alpha;
use crate::error::{Error, Result};
use crate::evaluation::{
    bootstrap_accuracy, bootstrap_curve, optimal_feature_count, BootstrapResult, RankTable, OPTIMAL_SIGNIFICANCE,
};
use crate::report::{BootstrapSummary, InputEcho, RunReport};
use crate::selection::{greedy_select, select_with_state, Criterion, SelectionConfig, SelectionState};
use crate::stats::wilcoxon_rank_sum;
use crate::synthetic;

/// Environment variable capping the worker count (0 or unset = automatic).
pub const THREADS_ENV: &str = "RENYI_SELECT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "renyi-select", version, about = "Greedy feature selection with matrix-based Rényi entropy")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one stopping criterion and write a JSON report.
    Select(SelectArgs),
    /// Run the full greedy order and write MI/CMI per step as TSV.
    Curves(CurvesArgs),
    /// Compare all stopping criteria against the bootstrap-optimal size.
    Compare(CompareArgs),
    /// Write a synthetic dataset as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Label column name or 0-based index (default: last column).
    #[arg(long)]
    pub label: Option<String>,
    /// Stratified subsample size cap.
    #[arg(long, default_value_t = 1000)]
    pub max_samples: usize,
    /// Seed for every randomized step.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SelectionArgs {
    #[arg(long, default_value = "1.01", value_parser = parse_alpha)]
    pub alpha: Alpha,
    /// CMI-heuristic threshold.
    #[arg(long, default_value_t = 1e-4, allow_hyphen_values = true)]
    pub epsilon: f64,
    /// Permutations per step for the permutation criteria.
    #[arg(long, default_value_t = 100)]
    pub permutations: usize,
    /// Confidence level of the permutation and χ² criteria.
    #[arg(long, default_value_t = 0.95)]
    pub theta: f64,
    /// Equal-frequency bins per feature for ΔMI-χ².
    #[arg(long, default_value_t = 5)]
    pub chi2_bins: usize,
    #[arg(long)]
    pub max_features: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BootstrapArgs {
    /// Also estimate bootstrap classification accuracy.
    #[arg(long)]
    pub bootstrap: bool,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long, required_unless_present = "replay")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "cmi-heuristic")]
    pub criterion: Criterion,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub selection: SelectionArgs,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,
    /// Report path (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Re-run the configuration stored in a report and check that the
    /// same features come out in the same order.
    #[arg(long)]
    pub replay: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub selection: SelectionArgs,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// One or more datasets.
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub selection: SelectionArgs,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    /// Level of the pairwise rank-sum tests.
    #[arg(long, default_value_t = 0.1)]
    pub significance: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    /// Informative Gaussian features driving a binary label, plus noise.
    Synthetic,
    /// Breiman's three-class waveform data.
    Waveform,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = Generator::Synthetic)]
    pub kind: Generator,
    #[arg(long, default_value_t = 300)]
    pub samples: usize,
    #[arg(long, default_value_t = 5)]
    pub informative: usize,
    #[arg(long, default_value_t = 15)]
    pub noise: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_alpha(s: &str) -> std::result::Result<Alpha, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    Alpha::new(v).map_err(|e| e.to_string())
}

impl SelectionArgs {
    fn config(&self, criterion: Criterion, seed: u64) -> SelectionConfig {
        SelectionConfig {
            alpha: self.alpha,
            criterion,
            epsilon: self.epsilon,
            permutations: self.permutations,
            theta: self.theta,
            chi2_bins: self.chi2_bins,
            seed,
            max_features: self.max_features,
        }
    }
}

/// Errors caused by the flags rather than by the data.
fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidConfig(_) | Error::InvalidAlpha(_) | Error::InvalidProbability(_) | Error::InvalidPermutationCount
    )
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 on success, 1 for data errors, 2 for usage errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return 2;
    }
    let result = match cli.command {
        Command::Select(a) => run_select(&a),
        Command::Curves(a) => run_curves(&a),
        Command::Compare(a) => run_compare(&a),
        Command::Generate(a) => run_generate(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if is_usage_error(&e) {
                2
            } else {
                1
            }
        }
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("{THREADS_ENV} must be a non-negative integer, got {raw:?}"))?;
    if n > 0 {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn label_column(label: Option<&str>) -> LabelColumn {
    label.map_or(LabelColumn::Last, |s| LabelColumn::Name(s.to_string()))
}

fn load(path: &Path, label: Option<&str>, max_samples: usize, seed: u64) -> Result<Dataset> {
    let d = load_csv(path, &label_column(label))?;
    subsample(&d, max_samples, seed)
}

fn echo(path: Option<&Path>, label: Option<&str>, max_samples: usize, d: &Dataset) -> InputEcho {
    InputEcho {
        path: path.map(|p| p.display().to_string()),
        label: label.map(str::to_string),
        max_samples,
        n_samples: d.n_samples(),
        n_features: d.n_features(),
        n_classes: d.n_classes(),
    }
}

struct SelectPlan {
    config: SelectionConfig,
    input: PathBuf,
    label: Option<String>,
    max_samples: usize,
    bootstrap_runs: Option<usize>,
    expected: Option<Vec<usize>>,
}

fn select_plan(a: &SelectArgs) -> Result<SelectPlan> {
    let Some(path) = &a.replay else {
        return Ok(SelectPlan {
            config: a.selection.config(a.criterion, a.data.seed),
            input: a.input.clone().expect("clap enforces --input without --replay"),
            label: a.data.label.clone(),
            max_samples: a.data.max_samples,
            bootstrap_runs: a.bootstrap.bootstrap.then_some(a.bootstrap.runs),
            expected: None,
        });
    };
    let prior = RunReport::load(path)?;
    let input = match (&a.input, &prior.input.path) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => return Err(Error::InvalidConfig("report has no input path; pass --input".into())),
    };
    Ok(SelectPlan {
        expected: Some(prior.selected_indices()),
        bootstrap_runs: prior.bootstrap.as_ref().map(|b| b.runs),
        config: prior.config,
        input,
        label: prior.input.label,
        max_samples: prior.input.max_samples,
    })
}

fn run_select(a: &SelectArgs) -> Result<()> {
    let plan = select_plan(a)?;
    plan.config.validate()?;

    let t0 = Instant::now();
    let d = load(&plan.input, plan.label.as_deref(), plan.max_samples, plan.config.seed)?;
    let load_seconds = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let trace = greedy_select(&d, &plan.config)?;
    let select_seconds = t1.elapsed().as_secs_f64();

    let input = echo(Some(&plan.input), plan.label.as_deref(), plan.max_samples, &d);
    let mut report = RunReport::new(plan.config.clone(), input, trace);
    report.timings.load_seconds = load_seconds;
    report.timings.select_seconds = select_seconds;

    if let Some(expected) = plan.expected {
        let actual = report.selected_indices();
        if actual != expected {
            return Err(Error::ReplayMismatch { expected, actual });
        }
    }
    if let Some(runs) = plan.bootstrap_runs {
        let selected = report.selected_indices();
        if !selected.is_empty() {
            let t2 = Instant::now();
            let result = bootstrap_accuracy(&d, &selected, runs, plan.config.seed)?;
            report.timings.bootstrap_seconds = Some(t2.elapsed().as_secs_f64());
            report.bootstrap = Some(BootstrapSummary { runs, seed: plan.config.seed, result });
        }
    }
    emit(a.output.as_deref(), &report.to_json()?)
}

fn run_curves(a: &CurvesArgs) -> Result<()> {
    let config = a.selection.config(Criterion::None, a.data.seed);
    let d = load(&a.input, a.data.label.as_deref(), a.data.max_samples, a.data.seed)?;
    let trace = greedy_select(&d, &config)?;
    let curve = if a.bootstrap.bootstrap {
        Some(bootstrap_curve(&d, &trace.selected(), a.bootstrap.runs, a.data.seed)?)
    } else {
        None
    };

    let mut out = String::from("step\tfeature\tmi_bits\tcmi_bits");
    if curve.is_some() {
        out.push_str("\tacc_mean\tci_low\tci_high");
    }
    out.push('\n');
    for (t, s) in trace.steps.iter().enumerate() {
        let _ = write!(out, "{}\t{}\t{}\t{}", t + 1, s.name, s.mi, s.cmi);
        if let Some(c) = &curve {
            let _ = write!(out, "\t{}\t{}\t{}", c[t].mean, c[t].ci_low, c[t].ci_high);
        }
        out.push('\n');
    }
    emit(a.output.as_deref(), &out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub criterion: Criterion,
    pub selected: usize,
    pub stop_reason: String,
    /// Bootstrap accuracy at the selected size; absent when nothing was selected.
    pub accuracy: Option<Accuracy>,
    pub rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl From<&BootstrapResult> for Accuracy {
    fn from(b: &BootstrapResult) -> Self {
        Self { mean: b.mean, ci_low: b.ci_low, ci_high: b.ci_high }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetComparison {
    pub dataset: String,
    pub n_samples: usize,
    pub n_features: usize,
    pub optimal: usize,
    pub optimal_accuracy: Accuracy,
    pub criteria: Vec<CriterionOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSumTest {
    pub first: Criterion,
    pub second: Criterion,
    pub p_value: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub schema_version: u32,
    pub config: SelectionConfig,
    pub runs: usize,
    pub significance: f64,
    pub datasets: Vec<DatasetComparison>,
    pub average_ranks: Vec<(Criterion, f64)>,
    pub rank_sum_tests: Vec<RankSumTest>,
}

/// Runs every stopping criterion on `d`, estimates the optimal size from
/// the bootstrap curve of the full greedy order, and ranks the criteria.
pub fn compare_dataset(name: &str, d: &Dataset, base: &SelectionConfig, runs: usize) -> Result<DatasetComparison> {
    let state = SelectionState::from_dataset(d, base.alpha)?;
    let names = d.feature_names();
    let order = select_with_state(state.clone(), names, None, &SelectionConfig { criterion: Criterion::None, ..base.clone() })?
        .selected();
    let curve = bootstrap_curve(d, &order, runs, base.seed)?;
    let optimal = optimal_feature_count(&curve, OPTIMAL_SIGNIFICANCE);
    let view = discretize_equal_frequency(&standardize(d), base.chi2_bins);

    let mut outcomes = Vec::new();
    for criterion in Criterion::STOPPING {
        let config = SelectionConfig { criterion, ..base.clone() };
        let trace = select_with_state(state.clone(), names, Some(&view), &config)?;
        let k = trace.steps.len();
        outcomes.push(CriterionOutcome {
            criterion,
            selected: k,
            stop_reason: trace.stop_reason,
            accuracy: k.checked_sub(1).map(|i| Accuracy::from(&curve[i])),
            rank: 0,
        });
    }
    let counts: Vec<usize> = outcomes.iter().map(|o| o.selected).collect();
    let ranks = crate::evaluation::competition_ranks(&counts, optimal);
    for (o, r) in outcomes.iter_mut().zip(ranks) {
        o.rank = r;
    }
    Ok(DatasetComparison {
        dataset: name.to_string(),
        n_samples: d.n_samples(),
        n_features: d.n_features(),
        optimal,
        optimal_accuracy: Accuracy::from(&curve[optimal - 1]),
        criteria: outcomes,
    })
}

/// Average ranks and pairwise rank-sum tests over the per-dataset ranks.
pub fn summarize(datasets: &[DatasetComparison], significance: f64) -> Result<(Vec<(Criterion, f64)>, Vec<RankSumTest>)> {
    let criteria = Criterion::STOPPING;
    let mut table = RankTable::new(criteria.iter().map(|c| c.name().to_string()).collect());
    for d in datasets {
        let counts: Vec<usize> = d.criteria.iter().map(|o| o.selected).collect();
        table.add(d.dataset.clone(), &counts, d.optimal)?;
    }
    let averages = criteria.iter().copied().zip(table.average_ranks()).collect();
    let mut tests = Vec::new();
    for i in 0..criteria.len() {
        for j in i + 1..criteria.len() {
            let t = wilcoxon_rank_sum(&table.column(i), &table.column(j), significance)?;
            tests.push(RankSumTest { first: criteria[i], second: criteria[j], p_value: t.p_value, reject: t.reject });
        }
    }
    Ok((averages, tests))
}

fn run_compare(a: &CompareArgs) -> Result<()> {
    if !(a.significance > 0.0 && a.significance < 1.0) {
        return Err(Error::InvalidProbability(a.significance));
    }
    let base = a.selection.config(Criterion::None, a.data.seed);
    base.validate()?;
    let mut datasets = Vec::new();
    for path in &a.input {
        let d = load(path, a.data.label.as_deref(), a.data.max_samples, a.data.seed)?;
        let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        datasets.push(compare_dataset(&name, &d, &base, a.runs)?);
    }
    let (average_ranks, rank_sum_tests) = summarize(&datasets, a.significance)?;
    let report = CompareReport {
        schema_version: crate::report::SCHEMA_VERSION,
        config: base,
        runs: a.runs,
        significance: a.significance,
        datasets,
        average_ranks,
        rank_sum_tests,
    };
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Text => render_compare(&report),
    };
    emit(a.output.as_deref(), &text)
}

fn percent(a: &Accuracy) -> String {
    format!("{:.1}±{:.1}", 100.0 * a.mean, 50.0 * (a.ci_high - a.ci_low))
}

pub fn render_compare(r: &CompareReport) -> String {
    let mut out = String::new();
    for d in &r.datasets {
        let _ = writeln!(
            out,
            "dataset {} (n={}, features={})\toptimal {}\taccuracy {}",
            d.dataset,
            d.n_samples,
            d.n_features,
            d.optimal,
            percent(&d.optimal_accuracy)
        );
        let _ = writeln!(out, "criterion\tselected\taccuracy\trank\tstop_reason");
        for o in &d.criteria {
            let acc = o.accuracy.as_ref().map_or_else(|| "-".to_string(), percent);
            let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", o.criterion, o.selected, acc, o.rank, o.stop_reason);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "average rank");
    for (c, avg) in &r.average_ranks {
        let _ = writeln!(out, "{c}\t{avg:.2}");
    }
    let _ = writeln!(out, "\nrank-sum tests at significance {}", r.significance);
    let _ = writeln!(out, "first\tsecond\tp_value\treject");
    for t in &r.rank_sum_tests {
        let _ = writeln!(out, "{}\t{}\t{:.4}\t{}", t.first, t.second, t.p_value, u8::from(t.reject));
    }
    out
}

fn run_generate(a: &GenerateArgs) -> Result<()> {
    let d = match a.kind {
        Generator::Synthetic => synthetic::informative_plus_noise(a.samples, a.informative, a.noise, a.seed)?,
        Generator::Waveform => synthetic::waveform(a.samples, a.seed)?,
    };
    match &a.output {
        Some(p) => save_csv(&d, p),
        None => crate::data::write_csv(&d, io::stdout().lock()),
    }
}
