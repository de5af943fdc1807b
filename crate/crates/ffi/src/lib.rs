//! C ABI over the `dmiat` crate.
//!
//! Every fallible function returns a [`DmiatStatus`]; on failure the message is kept
//! per thread and read with [`dmiat_last_error_message`]. Handles are opaque and must
//! be released with their `_free` function. Strings returned through out-parameters
//! are owned by the caller and released with [`dmiat_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use dmiat::data::{self, ClassDistribution, Dataset, Format};
use dmiat::dmiat::{self as core, Criterion, CutFeature, Direction, DmiatConfig};
use dmiat::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmiatStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Io = 4,
    InvalidConfig = 5,
    Schema = 6,
    Domain = 7,
    OutOfRange = 8,
    Empty = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmiatFormat {
    Csv = 0,
    Keel = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmiatDirection {
    Low = 0,
    High = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmiatCriterionKind {
    EntropyZero = 0,
    Lift = 1,
}

/// One cut feature. `lift_threshold` is 0 for the entropy criterion.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmiatCutInfo {
    pub attr: usize,
    pub direction: DmiatDirection,
    pub threshold: f64,
    pub criterion: DmiatCriterionKind,
    pub lift_threshold: f64,
    pub target_class: usize,
    pub subset_size: usize,
    pub subset_class_count: usize,
    pub score: f64,
}

/// A parsed table.
pub struct DmiatDataset(Dataset);

/// Cuts generated from one dataset.
pub struct DmiatCuts {
    cuts: Vec<CutFeature>,
    class_domain: Vec<String>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

type Failure = (DmiatStatus, String);

fn status_of(e: &Error) -> DmiatStatus {
    match e {
        Error::Parse { .. } => DmiatStatus::Parse,
        Error::Io(_) => DmiatStatus::Io,
        Error::Config(_) => DmiatStatus::InvalidConfig,
        Error::NotContinuous(_) | Error::Schema(_) => DmiatStatus::Schema,
        Error::Domain(_) => DmiatStatus::Domain,
        Error::EmptyDataset | Error::EmptyVariant | Error::EmptyTestFold => DmiatStatus::Empty,
    }
}

fn lib(e: Error) -> Failure {
    (status_of(&e), e.to_string())
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DmiatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            DmiatStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DmiatStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    (DmiatStatus::NullArgument, format!("`{name}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        (
            DmiatStatus::InvalidUtf8,
            format!("`{name}` is not valid UTF-8"),
        )
    })
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(name))
    } else {
        Ok(std::slice::from_raw_parts(p, len))
    }
}

unsafe fn out_arg<T>(p: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    p.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null after a success. The
/// pointer stays valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn dmiat_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses CSV or KEEL text into a new dataset handle.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmiat_dataset_parse(
    text: *const c_char,
    format: DmiatFormat,
    out: *mut *mut DmiatDataset,
) -> DmiatStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let format = match format {
            DmiatFormat::Csv => Format::Csv,
            DmiatFormat::Keel => Format::Keel,
        };
        let ds = data::parse_table(text, format).map_err(lib)?;
        out_arg(out, Box::into_raw(Box::new(DmiatDataset(ds))), "out")
    })
}

/// Loads a dataset from disk; `.dat` and `.keel` files are read as KEEL, others as CSV.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmiat_dataset_load(
    path: *const c_char,
    out: *mut *mut DmiatDataset,
) -> DmiatStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let ds = data::load(Path::new(path)).map_err(lib)?;
        out_arg(out, Box::into_raw(Box::new(DmiatDataset(ds))), "out")
    })
}

/// # Safety
/// `ds` must be null or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn dmiat_dataset_free(ds: *mut DmiatDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Row count, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dmiat_dataset_n_rows(ds: *const DmiatDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n_rows())
}

/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dmiat_dataset_n_attributes(ds: *const DmiatDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n_attributes())
}

/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dmiat_dataset_n_classes(ds: *const DmiatDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n_classes())
}

/// Class id of every row, written to `out` (capacity `len` ≥ row count).
///
/// # Safety
/// `ds` must be a live handle; `out` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn dmiat_dataset_labels(
    ds: *const DmiatDataset,
    out: *mut usize,
    len: usize,
) -> DmiatStatus {
    guard(|| {
        let ds = &ref_arg(ds, "ds")?.0;
        fill(ds.labels().iter().copied(), ds.n_rows(), out, len)
    })
}

unsafe fn fill<T>(
    values: impl Iterator<Item = T>,
    n: usize,
    out: *mut T,
    len: usize,
) -> Result<(), Failure> {
    if len < n {
        return Err((
            DmiatStatus::OutOfRange,
            format!("output holds {len} elements, need {n}"),
        ));
    }
    if n > 0 && out.is_null() {
        return Err(null("out"));
    }
    for (i, v) in values.enumerate() {
        out.add(i).write(v);
    }
    Ok(())
}

/// Stratified k-fold split: writes the test-fold index of every row to `out`.
///
/// # Safety
/// `ds` must be a live handle; `out` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn dmiat_kfold_assign(
    ds: *const DmiatDataset,
    k: usize,
    seed: u64,
    out: *mut usize,
    len: usize,
) -> DmiatStatus {
    guard(|| {
        let ds = &ref_arg(ds, "ds")?.0;
        let folds = data::stratified_kfold(ds, k, seed).map_err(lib)?;
        let mut fold_of = vec![0usize; ds.n_rows()];
        for (i, f) in folds.iter().enumerate() {
            for &r in &f.test {
                fold_of[r] = i;
            }
        }
        fill(fold_of.into_iter(), ds.n_rows(), out, len)
    })
}

/// Generates cuts from the given training rows (all rows when `n_train` is 0).
/// `criteria` is a comma-separated list such as `"entropy0,lift1.5,lift2.0"`.
///
/// # Safety
/// `ds` must be a live handle; `train_rows` must hold `n_train` elements;
/// `criteria` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmiat_cuts_generate(
    ds: *const DmiatDataset,
    train_rows: *const usize,
    n_train: usize,
    supp_fraction: f64,
    criteria: *const c_char,
    out: *mut *mut DmiatCuts,
) -> DmiatStatus {
    guard(|| {
        let ds = &ref_arg(ds, "ds")?.0;
        let rows = slice_arg(train_rows, n_train, "train_rows")?;
        let rows = if rows.is_empty() {
            ds.all_rows()
        } else {
            rows.to_vec()
        };
        if let Some(&bad) = rows.iter().find(|&&r| r >= ds.n_rows()) {
            return Err((DmiatStatus::OutOfRange, format!("row {bad} out of range")));
        }
        let criteria = str_arg(criteria, "criteria")?
            .split(',')
            .map(|s| s.trim().parse::<Criterion>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(lib)?;
        let config = DmiatConfig::new(supp_fraction, criteria).map_err(lib)?;
        let cuts = DmiatCuts {
            cuts: core::generate_cuts(ds, &rows, &config),
            class_domain: ds.class_domain().to_vec(),
        };
        out_arg(out, Box::into_raw(Box::new(cuts)), "out")
    })
}

/// # Safety
/// `cuts` must be null or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn dmiat_cuts_free(cuts: *mut DmiatCuts) {
    if !cuts.is_null() {
        drop(Box::from_raw(cuts));
    }
}

/// Number of cuts, or 0 for a null handle.
///
/// # Safety
/// `cuts` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dmiat_cuts_len(cuts: *const DmiatCuts) -> usize {
    cuts.as_ref().map_or(0, |c| c.cuts.len())
}

/// # Safety
/// `cuts` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmiat_cuts_get(
    cuts: *const DmiatCuts,
    index: usize,
    out: *mut DmiatCutInfo,
) -> DmiatStatus {
    guard(|| {
        let cuts = ref_arg(cuts, "cuts")?;
        let c = cuts.cuts.get(index).ok_or_else(|| {
            (
                DmiatStatus::OutOfRange,
                format!("cut {index} of {}", cuts.cuts.len()),
            )
        })?;
        let (criterion, lift_threshold) = match c.criterion {
            Criterion::EntropyZero => (DmiatCriterionKind::EntropyZero, 0.0),
            Criterion::Lift(t) => (DmiatCriterionKind::Lift, t),
        };
        let info = DmiatCutInfo {
            attr: c.attr,
            direction: match c.direction {
                Direction::Low => DmiatDirection::Low,
                Direction::High => DmiatDirection::High,
            },
            threshold: c.threshold,
            criterion,
            lift_threshold,
            target_class: c.target_class,
            subset_size: c.evidence.subset_size,
            subset_class_count: c.evidence.subset_class_count,
            score: c.evidence.score,
        };
        out_arg(out, info, "out")
    })
}

/// Indicator values (0 or 1, one per cut) for one row of `ds`. Missing values map to 0.
///
/// # Safety
/// `cuts` and `ds` must be live handles; `out` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn dmiat_cuts_apply(
    cuts: *const DmiatCuts,
    ds: *const DmiatDataset,
    row: usize,
    out: *mut u8,
    len: usize,
) -> DmiatStatus {
    guard(|| {
        let cuts = ref_arg(cuts, "cuts")?;
        let ds = &ref_arg(ds, "ds")?.0;
        if row >= ds.n_rows() {
            return Err((DmiatStatus::OutOfRange, format!("row {row} out of range")));
        }
        let values = core::apply_cuts(&cuts.cuts, ds, &[row]).map_err(lib)?;
        fill(values.into_iter().map(|v| v[0]), cuts.cuts.len(), out, len)
    })
}

/// Tab-separated export of the cuts; free the string with [`dmiat_string_free`].
///
/// # Safety
/// `cuts` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmiat_cuts_export(
    cuts: *const DmiatCuts,
    out: *mut *mut c_char,
) -> DmiatStatus {
    guard(|| {
        let cuts = ref_arg(cuts, "cuts")?;
        let text = core::format_cuts(&cuts.cuts, &cuts.class_domain);
        let c = CString::new(text)
            .map_err(|_| (DmiatStatus::InvalidUtf8, "export contains NUL".to_string()))?;
        out_arg(out, c.into_raw(), "out")
    })
}

/// # Safety
/// `s` must be null or a string returned by this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn dmiat_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Shannon entropy in bits of a class-count vector.
///
/// # Safety
/// `counts` must hold `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmiat_entropy(
    counts: *const usize,
    n: usize,
    out: *mut f64,
) -> DmiatStatus {
    guard(|| {
        let counts = slice_arg(counts, n, "counts")?;
        let h = core::entropy(&ClassDistribution::new(counts.to_vec())).map_err(lib)?;
        out_arg(out, h, "out")
    })
}

/// Lift of `target` in a subset relative to the whole population; both count
/// vectors hold `n` classes.
///
/// # Safety
/// `subset` and `whole` must hold `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmiat_lift(
    subset: *const usize,
    whole: *const usize,
    n: usize,
    target: usize,
    out: *mut f64,
) -> DmiatStatus {
    guard(|| {
        let subset = ClassDistribution::new(slice_arg(subset, n, "subset")?.to_vec());
        let whole = ClassDistribution::new(slice_arg(whole, n, "whole")?.to_vec());
        let l = core::lift(&subset, &whole, target).map_err(lib)?;
        out_arg(out, l, "out")
    })
}
