//! C interface to bt-explain.
//!
//! Models are opaque handles created by the `bt_model_load_*` functions and
//! released with `bt_model_free`. Fallible functions return a `BtStatus`;
//! after a failure, `bt_last_error` describes it on the calling thread.
//!
//! Instances are `double` arrays with one value per attribute: numbers as-is,
//! categories by index, Booleans as 0/1. Terms are byte masks with one byte
//! per attribute, nonzero meaning the characteristic is kept.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use bt_explain::io::{native, xgboost, IoError};
use bt_explain::{
    is_abductive, sr_explain, ts_explain_multi, ts_sr_pipeline, BoostedTree, ExplainError,
    Instance, OracleConfig, OracleStatus, OrderingPolicy, SrConfig, Term, TsConfig,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidString = 2,
    Io = 3,
    InvalidModel = 4,
    InvalidArgument = 5,
    SeedNotAbductive = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BtVerdict {
    Proved = 0,
    Disproved = 1,
    Timeout = 2,
}

/// A loaded model.
pub struct BtModel {
    inner: BoostedTree,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(BtStatus, String);

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let status = match e {
            IoError::Io(_) => BtStatus::Io,
            _ => BtStatus::InvalidModel,
        };
        Failure(status, e.to_string())
    }
}

impl From<ExplainError> for Failure {
    fn from(e: ExplainError) -> Self {
        let status = match e {
            ExplainError::SeedNotAbductive => BtStatus::SeedNotAbductive,
            _ => BtStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(BtStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BtStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal error (panic)".into());
            BtStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(BtStatus::NullPointer, format!("`{what}` is null")))
    } else {
        Ok(())
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(BtStatus::InvalidString, format!("`{what}` is not UTF-8")))
}

unsafe fn model_ref<'a>(model: *const BtModel) -> Result<&'a BoostedTree, Failure> {
    non_null(model, "model")?;
    Ok(&(*model).inner)
}

unsafe fn instance_arg(bt: &BoostedTree, values: *const f64, len: usize) -> Result<Instance, Failure> {
    non_null(values, "values")?;
    let encoded = std::slice::from_raw_parts(values, len);
    Instance::from_encoded(bt.schema(), encoded).map_err(|e| invalid(e.to_string()))
}

unsafe fn term_arg(bt: &BoostedTree, mask: *const u8, len: usize) -> Result<Term, Failure> {
    non_null(mask, "mask")?;
    if len != bt.schema().len() {
        return Err(invalid(format!("mask has {len} entries, model has {} attributes", bt.schema().len())));
    }
    let mask = std::slice::from_raw_parts(mask, len);
    Ok(Term::from_indices((0..len).filter(|&i| mask[i] != 0)))
}

unsafe fn write_term(t: &Term, out: *mut u8, len: usize) -> Result<(), Failure> {
    non_null(out, "out_mask")?;
    let out = std::slice::from_raw_parts_mut(out, len);
    for (i, b) in out.iter_mut().enumerate() {
        *b = u8::from(t.contains(i));
    }
    Ok(())
}

fn check_mask_len(bt: &BoostedTree, len: usize) -> Result<(), Failure> {
    if len == bt.schema().len() {
        Ok(())
    } else {
        Err(invalid(format!("mask has {len} entries, model has {} attributes", bt.schema().len())))
    }
}

/// A positive number of seconds; infinity means no limit.
fn time_limit(secs: f64) -> Result<Option<Duration>, Failure> {
    if secs == f64::INFINITY {
        return Ok(None);
    }
    if secs.is_nan() || secs <= 0.0 {
        return Err(invalid("timeout must be a positive number of seconds"));
    }
    Duration::try_from_secs_f64(secs)
        .map(Some)
        .map_err(|e| invalid(e.to_string()))
}

fn sr_config(limit: Option<Duration>) -> SrConfig {
    let mut cfg = SrConfig {
        time_limit: limit,
        ..SrConfig::default()
    };
    cfg.oracle.time_limit = limit;
    cfg
}

fn ts_config(runs: usize, seed: u64) -> TsConfig {
    TsConfig {
        runs,
        seed,
        ordering: OrderingPolicy::Random,
    }
}

unsafe fn store_model(bt: BoostedTree, out: *mut *mut BtModel) {
    *out = Box::into_raw(Box::new(BtModel { inner: bt }));
}

/// The message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Loads a model in the native JSON format.
///
/// # Safety
/// `path` must be a nul-terminated string and `out_model` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bt_model_load_native(path: *const c_char, out_model: *mut *mut BtModel) -> BtStatus {
    guard(|| {
        non_null(out_model, "out_model")?;
        let bt = native::load(str_arg(path, "path")?)?;
        store_model(bt, out_model);
        Ok(())
    })
}

/// Parses a model in the native JSON format from a string.
///
/// # Safety
/// `json` must be a nul-terminated string and `out_model` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bt_model_from_native_json(json: *const c_char, out_model: *mut *mut BtModel) -> BtStatus {
    guard(|| {
        non_null(out_model, "out_model")?;
        let bt = native::from_json_str(str_arg(json, "json")?)?;
        store_model(bt, out_model);
        Ok(())
    })
}

/// Loads an XGBoost JSON dump. `num_class` 0 takes the class count from the
/// file (1 means binary).
///
/// # Safety
/// `path` must be a nul-terminated string and `out_model` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bt_model_load_xgboost(
    path: *const c_char,
    num_class: usize,
    tie_class: usize,
    out_model: *mut *mut BtModel,
) -> BtStatus {
    guard(|| {
        non_null(out_model, "out_model")?;
        let opts = xgboost::XgbOptions {
            num_class: (num_class > 0).then_some(num_class),
            tie_class,
            ..xgboost::XgbOptions::default()
        };
        let bt = xgboost::load(str_arg(path, "path")?, &opts)?;
        store_model(bt, out_model);
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from a `bt_model_*` constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn bt_model_free(model: *mut BtModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of attributes, or 0 for a null model.
///
/// # Safety
/// `model` must be null or a live model.
#[no_mangle]
pub unsafe extern "C" fn bt_model_attribute_count(model: *const BtModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.schema().len())
}

/// Number of classes, or 0 for a null model.
///
/// # Safety
/// `model` must be null or a live model.
#[no_mangle]
pub unsafe extern "C" fn bt_model_class_count(model: *const BtModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.num_classes())
}

/// Predicted class of an instance.
///
/// # Safety
/// `values` must point to `len` doubles and `out_class` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bt_classify(
    model: *const BtModel,
    values: *const f64,
    len: usize,
    out_class: *mut usize,
) -> BtStatus {
    guard(|| {
        let bt = model_ref(model)?;
        non_null(out_class, "out_class")?;
        let x = instance_arg(bt, values, len)?;
        *out_class = bt.classify(&x);
        Ok(())
    })
}

/// Shortest tree-specific explanation over `runs` random elimination orders.
///
/// # Safety
/// `values` must point to `len` doubles and `out_mask` to `mask_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn bt_explain_ts(
    model: *const BtModel,
    values: *const f64,
    len: usize,
    runs: usize,
    seed: u64,
    out_mask: *mut u8,
    mask_len: usize,
) -> BtStatus {
    guard(|| {
        let bt = model_ref(model)?;
        let x = instance_arg(bt, values, len)?;
        check_mask_len(bt, mask_len)?;
        let out = ts_explain_multi(bt, &x, &ts_config(runs, seed))?;
        write_term(&out.term, out_mask, mask_len)
    })
}

/// Sufficient reason by elimination from the full instance, in attribute
/// order. `out_minimal` is set to whether minimality was proved within
/// `timeout_secs`.
///
/// # Safety
/// `values` must point to `len` doubles, `out_mask` to `mask_len` bytes and
/// `out_minimal` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bt_explain_sr(
    model: *const BtModel,
    values: *const f64,
    len: usize,
    timeout_secs: f64,
    out_mask: *mut u8,
    mask_len: usize,
    out_minimal: *mut bool,
) -> BtStatus {
    guard(|| {
        let bt = model_ref(model)?;
        let x = instance_arg(bt, values, len)?;
        check_mask_len(bt, mask_len)?;
        non_null(out_minimal, "out_minimal")?;
        let cfg = sr_config(time_limit(timeout_secs)?);
        let n = bt.schema().len();
        let out = sr_explain(bt, &x, &Term::full(n), cfg.order(n).as_slice(), &cfg)?;
        write_term(&out.term, out_mask, mask_len)?;
        *out_minimal = out.minimal_proved;
        Ok(())
    })
}

/// Sufficient reason by elimination from the shortest tree-specific
/// explanation over `runs` orders; the time limit covers both stages.
///
/// # Safety
/// As for `bt_explain_sr`.
#[no_mangle]
pub unsafe extern "C" fn bt_explain_pipeline(
    model: *const BtModel,
    values: *const f64,
    len: usize,
    runs: usize,
    seed: u64,
    timeout_secs: f64,
    out_mask: *mut u8,
    mask_len: usize,
    out_minimal: *mut bool,
) -> BtStatus {
    guard(|| {
        let bt = model_ref(model)?;
        let x = instance_arg(bt, values, len)?;
        check_mask_len(bt, mask_len)?;
        non_null(out_minimal, "out_minimal")?;
        let cfg = sr_config(time_limit(timeout_secs)?);
        let out = ts_sr_pipeline(bt, &x, &ts_config(runs, seed), &cfg)?;
        write_term(&out.sr.term, out_mask, mask_len)?;
        *out_minimal = out.sr.minimal_proved;
        Ok(())
    })
}

/// Decides whether the masked term is an abductive explanation of the
/// instance.
///
/// # Safety
/// `values` must point to `len` doubles, `mask` to `mask_len` bytes and
/// `out_verdict` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bt_check_abductive(
    model: *const BtModel,
    values: *const f64,
    len: usize,
    mask: *const u8,
    mask_len: usize,
    timeout_secs: f64,
    out_verdict: *mut BtVerdict,
) -> BtStatus {
    guard(|| {
        let bt = model_ref(model)?;
        let x = instance_arg(bt, values, len)?;
        let t = term_arg(bt, mask, mask_len)?;
        non_null(out_verdict, "out_verdict")?;
        let cfg = OracleConfig {
            time_limit: time_limit(timeout_secs)?,
            ..OracleConfig::default()
        };
        let v = is_abductive(bt, &x, &t, &cfg)?;
        *out_verdict = match v.status {
            OracleStatus::Proved => BtVerdict::Proved,
            OracleStatus::Disproved => BtVerdict::Disproved,
            OracleStatus::Timeout => BtVerdict::Timeout,
        };
        Ok(())
    })
}
