//! C interface to `renyi-select`.
//!
//! Datasets, configurations and selection traces are opaque handles owned
//! by the caller and released with the matching `*_free` function. Every
//! fallible call returns a [`RenyiStatus`]; on failure a description is
//! available from [`renyi_last_error`] on the same thread until the next
//! failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use renyi_select::entropy::{conditional_mutual_information, mutual_information};
use renyi_select::selection::{greedy_select, Criterion, SelectionConfig, SelectionState, SelectionTrace};
use renyi_select::stats::{chi2_quantile, wilcoxon_rank_sum};
use renyi_select::{data, Alpha, Dataset, Error, LabelColumn};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenyiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    InvalidData = 5,
    Numerical = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenyiCriterion {
    CmiHeuristic = 0,
    CmiPermutation = 1,
    MiPermutation = 2,
    DeltaMiChi2 = 3,
    None = 4,
}

impl From<RenyiCriterion> for Criterion {
    fn from(c: RenyiCriterion) -> Self {
        match c {
            RenyiCriterion::CmiHeuristic => Criterion::CmiHeuristic,
            RenyiCriterion::CmiPermutation => Criterion::CmiPermutation,
            RenyiCriterion::MiPermutation => Criterion::MiPermutation,
            RenyiCriterion::DeltaMiChi2 => Criterion::DeltaMiChi2,
            RenyiCriterion::None => Criterion::None,
        }
    }
}

pub struct RenyiDataset {
    inner: Dataset,
}

pub struct RenyiConfig {
    inner: SelectionConfig,
}

pub struct RenyiTrace {
    inner: SelectionTrace,
    stop_reason: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RenyiStatus {
    match e {
        Error::MissingFile(_) | Error::Io(_) => RenyiStatus::Io,
        Error::Parse { .. } | Error::Csv(_) | Error::Json(_) | Error::MissingLabelColumn(_) => RenyiStatus::Parse,
        Error::EigensolverFailure | Error::NegativeEigenvalue(_) | Error::InvalidKernel(_) => RenyiStatus::Numerical,
        Error::EmptyDataset
        | Error::InvalidDataset(_)
        | Error::MaxSamplesBelowClassCount { .. }
        | Error::TooFewSamples { .. } => RenyiStatus::InvalidData,
        _ => RenyiStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (RenyiStatus, String)>) -> RenyiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RenyiStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            RenyiStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (RenyiStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (RenyiStatus, String) {
    (RenyiStatus::NullPointer, format!("{name} is NULL"))
}

fn invalid(msg: impl Into<String>) -> (RenyiStatus, String) {
    (RenyiStatus::InvalidArgument, msg.into())
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (RenyiStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{name} is not valid UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], (RenyiStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), (RenyiStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn renyi_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn renyi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a CSV file with a header row. `label` names the label column (or
/// gives its 0-based index); NULL selects the last column.
///
/// # Safety
/// `path` and a non-NULL `label` must be NUL-terminated strings; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn renyi_dataset_load_csv(
    path: *const c_char,
    label: *const c_char,
    out: *mut *mut RenyiDataset,
) -> RenyiStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let label = if label.is_null() {
            LabelColumn::Last
        } else {
            LabelColumn::Name(str_arg(label, "label")?.to_string())
        };
        let d = data::load_csv(path, &label).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(RenyiDataset { inner: d })), "out")
    })
}

/// Builds a dataset from column-major values: feature `j` occupies
/// `values[j*n_samples .. (j+1)*n_samples]`. Labels are class codes.
///
/// # Safety
/// `values` must hold `n_samples * n_features` doubles, `labels` must hold
/// `n_samples` entries and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn renyi_dataset_from_columns(
    values: *const f64,
    n_samples: usize,
    n_features: usize,
    labels: *const usize,
    out: *mut *mut RenyiDataset,
) -> RenyiStatus {
    guard(|| {
        let total = n_samples
            .checked_mul(n_features)
            .ok_or_else(|| invalid("n_samples * n_features overflows"))?;
        let values = slice_arg(values, total, "values")?;
        let labels = slice_arg(labels, n_samples, "labels")?;
        let columns = if n_samples == 0 {
            vec![Vec::new(); n_features]
        } else {
            values.chunks(n_samples).map(<[f64]>::to_vec).collect()
        };
        let names = (0..n_features).map(|j| format!("f{j}")).collect();
        let d = Dataset::new(columns, labels.to_vec(), names).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(RenyiDataset { inner: d })), "out")
    })
}

/// # Safety
/// `d` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn renyi_dataset_free(d: *mut RenyiDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `d` must be NULL or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn renyi_dataset_n_samples(d: *const RenyiDataset) -> usize {
    d.as_ref().map_or(0, |d| d.inner.n_samples())
}

/// # Safety
/// `d` must be NULL or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn renyi_dataset_n_features(d: *const RenyiDataset) -> usize {
    d.as_ref().map_or(0, |d| d.inner.n_features())
}

/// # Safety
/// `d` must be NULL or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn renyi_dataset_n_classes(d: *const RenyiDataset) -> usize {
    d.as_ref().map_or(0, |d| d.inner.n_classes())
}

/// A configuration with the library defaults (α = 1.01, CMI-heuristic,
/// ε = 1e-4, P = 100, θ = 0.95, 5 bins, seed 0, no feature cap).
#[no_mangle]
pub extern "C" fn renyi_config_new() -> *mut RenyiConfig {
    Box::into_raw(Box::new(RenyiConfig { inner: SelectionConfig::default() }))
}

/// # Safety
/// `c` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn renyi_config_free(c: *mut RenyiConfig) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

unsafe fn with_config(c: *mut RenyiConfig, f: impl FnOnce(&mut SelectionConfig) -> Result<(), (RenyiStatus, String)>) -> RenyiStatus {
    guard(|| {
        let c = c.as_mut().ok_or_else(|| null("config"))?;
        let mut next = c.inner.clone();
        f(&mut next)?;
        next.validate().map_err(lib_err)?;
        c.inner = next;
        Ok(())
    })
}

/// # Safety
/// `c` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn renyi_config_set_alpha(c: *mut RenyiConfig, alpha: f64) -> RenyiStatus {
    with_config(c, |cfg| {
        cfg.alpha = Alpha::new(alpha).map_err(lib_err)?;
        Ok(())
    })
}

/// # Safety
/// `c` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn renyi_config_set_criterion(c: *mut RenyiConfig, criterion: RenyiCriterion) -> RenyiStatus {
    with_config(c, |cfg| {
        cfg.criterion = criterion.into();
        Ok(())
    })
}

/// # Safety
/// `c` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn renyi_config_set_epsilon(c: *mut RenyiConfig, epsilon: f64) -> RenyiStatus {
    with_config(c, |cfg| {
        cfg.epsilon = epsilon;
        Ok(())
    })
}

/// # Safety
/// `c` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn renyi_config_set_permutations(c: *mut RenyiConfig, permutations: usize) -> RenyiStatus {
    with_config(c, |cfg| {
        cfg.permutations = permutations;
        Ok(())
    })
}

/// # Safety
/// `c` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn renyi_config_set_theta(c: *mut RenyiConfig, theta: f64) -> RenyiStatus {
    with_config(c, |cfg| {
        cfg.theta = theta;
        Ok(())
    })
}

/// # Safety
/// `c` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn renyi_config_set_chi2_bins(c: *mut RenyiConfig, bins: usize) -> RenyiStatus {
    with_config(c, |cfg| {
        cfg.chi2_bins = bins;
        Ok(())
    })
}

/// # Safety
/// `c` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn renyi_config_set_seed(c: *mut RenyiConfig, seed: u64) -> RenyiStatus {
    with_config(c, |cfg| {
        cfg.seed = seed;
        Ok(())
    })
}

/// Caps the number of selected features; 0 removes the cap.
///
/// # Safety
/// `c` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn renyi_config_set_max_features(c: *mut RenyiConfig, max_features: usize) -> RenyiStatus {
    with_config(c, |cfg| {
        cfg.max_features = (max_features > 0).then_some(max_features);
        Ok(())
    })
}

/// Runs greedy forward selection. A NULL `config` uses the defaults.
///
/// # Safety
/// `d` must be a live dataset handle, `config` NULL or a live configuration
/// handle, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn renyi_select(
    d: *const RenyiDataset,
    config: *const RenyiConfig,
    out: *mut *mut RenyiTrace,
) -> RenyiStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("dataset"))?;
        let cfg = config.as_ref().map_or_else(SelectionConfig::default, |c| c.inner.clone());
        let trace = greedy_select(&d.inner, &cfg).map_err(lib_err)?;
        let stop_reason = CString::new(trace.stop_reason.clone()).unwrap_or_default();
        write_out(out, Box::into_raw(Box::new(RenyiTrace { inner: trace, stop_reason })), "out")
    })
}

/// # Safety
/// `t` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn renyi_trace_free(t: *mut RenyiTrace) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of selected features.
///
/// # Safety
/// `t` must be NULL or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn renyi_trace_len(t: *const RenyiTrace) -> usize {
    t.as_ref().map_or(0, |t| t.inner.steps.len())
}

/// Stop reason owned by the trace, or NULL for a NULL trace.
///
/// # Safety
/// `t` must be NULL or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn renyi_trace_stop_reason(t: *const RenyiTrace) -> *const c_char {
    t.as_ref().map_or(ptr::null(), |t| t.stop_reason.as_ptr())
}

/// `I(S; y)` over all features, in bits.
///
/// # Safety
/// `t` must be a live trace handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn renyi_trace_full_mi(t: *const RenyiTrace, out: *mut f64) -> RenyiStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("trace"))?;
        write_out(out, t.inner.full_mi, "out")
    })
}

/// Feature index, MI and residual CMI (bits) of selection step `step`.
/// Any of the output pointers may be NULL.
///
/// # Safety
/// `t` must be a live trace handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn renyi_trace_step(
    t: *const RenyiTrace,
    step: usize,
    feature: *mut usize,
    mi: *mut f64,
    cmi: *mut f64,
) -> RenyiStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("trace"))?;
        let s = t
            .inner
            .steps
            .get(step)
            .ok_or_else(|| invalid(format!("step {step} out of range for {} steps", t.inner.steps.len())))?;
        if !feature.is_null() {
            feature.write(s.feature);
        }
        if !mi.is_null() {
            mi.write(s.mi);
        }
        if !cmi.is_null() {
            cmi.write(s.cmi);
        }
        Ok(())
    })
}

unsafe fn indices<'a>(p: *const usize, len: usize, name: &str, features: usize) -> Result<&'a [usize], (RenyiStatus, String)> {
    let idx = slice_arg(p, len, name)?;
    if let Some(bad) = idx.iter().find(|&&j| j >= features) {
        return Err(invalid(format!("{name} contains index {bad} beyond {features} features")));
    }
    Ok(idx)
}

/// `I_α(x_features; y)` in bits using the standardized median-bandwidth
/// Gaussian kernels of the selection procedure.
///
/// # Safety
/// `d` must be a live dataset handle, `features` must hold `n` indices and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn renyi_mutual_information(
    d: *const RenyiDataset,
    features: *const usize,
    n: usize,
    alpha: f64,
    out: *mut f64,
) -> RenyiStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("dataset"))?;
        let idx = indices(features, n, "features", d.inner.n_features())?;
        let alpha = Alpha::new(alpha).map_err(lib_err)?;
        let state = SelectionState::from_dataset(&d.inner, alpha).map_err(lib_err)?;
        let grams: Vec<_> = idx.iter().map(|&j| state.single_gram(j)).collect();
        let v = mutual_information(state.label_gram(), &grams, alpha).map_err(lib_err)?;
        write_out(out, v, "out")
    })
}

/// `I_α(x_target; y | x_given)` in bits. An empty `given` list gives the
/// mutual information.
///
/// # Safety
/// `d` must be a live dataset handle, index arrays must hold the stated
/// counts and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn renyi_conditional_mutual_information(
    d: *const RenyiDataset,
    target: *const usize,
    n_target: usize,
    given: *const usize,
    n_given: usize,
    alpha: f64,
    out: *mut f64,
) -> RenyiStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("dataset"))?;
        let f = d.inner.n_features();
        let target = indices(target, n_target, "target", f)?;
        let given = indices(given, n_given, "given", f)?;
        let alpha = Alpha::new(alpha).map_err(lib_err)?;
        let state = SelectionState::from_dataset(&d.inner, alpha).map_err(lib_err)?;
        let c: Vec<_> = target.iter().map(|&j| state.single_gram(j)).collect();
        let a: Vec<_> = given.iter().map(|&j| state.single_gram(j)).collect();
        let v = conditional_mutual_information(&c, state.label_gram(), &a, alpha).map_err(lib_err)?;
        write_out(out, v, "out")
    })
}

/// Two-sided Wilcoxon rank-sum test. `reject` (may be NULL) receives 1 when
/// `p < significance`.
///
/// # Safety
/// `a` and `b` must hold `na` and `nb` values; `p_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn renyi_wilcoxon_rank_sum(
    a: *const f64,
    na: usize,
    b: *const f64,
    nb: usize,
    significance: f64,
    p_value: *mut f64,
    reject: *mut i32,
) -> RenyiStatus {
    guard(|| {
        let a = slice_arg(a, na, "a")?;
        let b = slice_arg(b, nb, "b")?;
        let t = wilcoxon_rank_sum(a, b, significance).map_err(lib_err)?;
        write_out(p_value, t.p_value, "p_value")?;
        if !reject.is_null() {
            reject.write(i32::from(t.reject));
        }
        Ok(())
    })
}

/// `p`-quantile of the chi-square distribution with `df` degrees of freedom.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn renyi_chi2_quantile(df: u64, p: f64, out: *mut f64) -> RenyiStatus {
    guard(|| {
        let q = chi2_quantile(df, p).map_err(lib_err)?;
        write_out(out, q, "out")
    })
}
