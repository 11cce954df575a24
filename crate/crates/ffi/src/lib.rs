//! C ABI for the stratal library.
//!
//! Pools are opaque handles created by `stratal_pool_generate` or
//! `stratal_pool_load` and released with `stratal_pool_free`. Every
//! fallible call returns a [`StratalStatus`] code; a human-readable message
//! for the most recent failure on the calling thread is available through
//! `stratal_last_error_message`.
//!
//! The generated header is written to `include/stratal.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use stratal::datasets::{self, LabeledPool, SyntheticKind};
use stratal::error::Error;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized: String = message.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StratalStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InsufficientData = 3,
    DegenerateScope = 4,
    CapacityExceeded = 5,
    PoolExhausted = 6,
    SchemaError = 7,
    ParseError = 8,
    EmptyPool = 9,
    ConfigError = 10,
    IoError = 11,
    RunFailure = 12,
    Utf8Error = 13,
}

fn status_of(e: &Error) -> StratalStatus {
    match e {
        Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => {
            StratalStatus::InvalidArgument
        }
        Error::InsufficientData { .. } => StratalStatus::InsufficientData,
        Error::DegenerateScope { .. } => StratalStatus::DegenerateScope,
        Error::Capacity(_) => StratalStatus::CapacityExceeded,
        Error::ExhaustedPool => StratalStatus::PoolExhausted,
        Error::Schema(_) => StratalStatus::SchemaError,
        Error::Parse { .. } => StratalStatus::ParseError,
        Error::EmptyPool(_) => StratalStatus::EmptyPool,
        Error::Config { .. } => StratalStatus::ConfigError,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => StratalStatus::IoError,
        Error::Run { .. } => StratalStatus::RunFailure,
    }
}

fn fail(e: &Error) -> StratalStatus {
    set_last_error(&e.to_string());
    status_of(e)
}

/// Opaque candidate pool.
pub struct StratalPool {
    inner: LabeledPool,
}

/// Synthetic pool family for `stratal_pool_generate`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StratalCase {
    Linear = 0,
    Circular = 1,
    Hyperbolic = 2,
    Bat = 3,
}

impl From<StratalCase> for SyntheticKind {
    fn from(c: StratalCase) -> Self {
        match c {
            StratalCase::Linear => SyntheticKind::Linear,
            StratalCase::Circular => SyntheticKind::Circular,
            StratalCase::Hyperbolic => SyntheticKind::Hyperbolic,
            StratalCase::Bat => SyntheticKind::Bat,
        }
    }
}

unsafe fn path_arg<'a>(ptr: *const c_char) -> Result<&'a Path, StratalStatus> {
    if ptr.is_null() {
        set_last_error("null path");
        return Err(StratalStatus::NullPointer);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_last_error("path is not valid UTF-8");
            Err(StratalStatus::Utf8Error)
        }
    }
}

/// Generate a synthetic pool. On success `*out` owns the new handle.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn stratal_pool_generate(
    case: StratalCase,
    n: usize,
    seed: u64,
    out: *mut *mut StratalPool,
) -> StratalStatus {
    if out.is_null() {
        set_last_error("null output handle");
        return StratalStatus::NullPointer;
    }
    *out = ptr::null_mut();
    match datasets::generate(case.into(), n, seed) {
        Ok(pool) => {
            *out = Box::into_raw(Box::new(StratalPool { inner: pool }));
            StratalStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Load a pool previously written by the CLI's `generate` (a directory with
/// features.csv, outputs.csv, and pool.json).
///
/// # Safety
/// `dir` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn stratal_pool_load(
    dir: *const c_char,
    out: *mut *mut StratalPool,
) -> StratalStatus {
    if out.is_null() {
        set_last_error("null output handle");
        return StratalStatus::NullPointer;
    }
    *out = ptr::null_mut();
    let dir = match path_arg(dir) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match datasets::load_pool(dir) {
        Ok(pool) => {
            *out = Box::into_raw(Box::new(StratalPool { inner: pool }));
            StratalStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Release a pool handle. A null pointer is a no-op.
///
/// # Safety
/// `pool` must have been returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn stratal_pool_free(pool: *mut StratalPool) {
    if !pool.is_null() {
        drop(Box::from_raw(pool));
    }
}

/// Number of candidates, or 0 for a null handle.
///
/// # Safety
/// `pool` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn stratal_pool_len(pool: *const StratalPool) -> usize {
    pool.as_ref().map_or(0, |p| p.inner.len())
}

/// Number of feature columns, or 0 for a null handle.
///
/// # Safety
/// `pool` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn stratal_pool_feature_dim(pool: *const StratalPool) -> usize {
    pool.as_ref().map_or(0, |p| p.inner.feature_dim())
}

/// Number of output axes, or 0 for a null handle.
///
/// # Safety
/// `pool` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn stratal_pool_output_dim(pool: *const StratalPool) -> usize {
    pool.as_ref().map_or(0, |p| p.inner.output_dim())
}

/// Size of the ground-truth Pareto frontier, or 0 for a null handle.
///
/// # Safety
/// `pool` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn stratal_pool_frontier_size(pool: *const StratalPool) -> usize {
    pool.as_ref().map_or(0, |p| p.inner.truth().frontier().len())
}

/// Number of strata, or 0 for a null handle.
///
/// # Safety
/// `pool` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn stratal_pool_stratum_count(pool: *const StratalPool) -> usize {
    pool.as_ref().map_or(0, |p| p.inner.truth().stratum_count())
}

/// Ground-truth stratum number (1 = frontier) of one candidate.
///
/// # Safety
/// `pool` must be a live handle or null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn stratal_pool_stratum_of(
    pool: *const StratalPool,
    index: usize,
    out: *mut usize,
) -> StratalStatus {
    let Some(p) = pool.as_ref() else {
        set_last_error("null pool handle");
        return StratalStatus::NullPointer;
    };
    if out.is_null() {
        set_last_error("null output pointer");
        return StratalStatus::NullPointer;
    }
    if index >= p.inner.len() {
        set_last_error("candidate index out of range");
        return StratalStatus::InvalidArgument;
    }
    *out = p.inner.truth().stratum_of(index);
    StratalStatus::Ok
}

/// Execute every strategy of an experiment config file, writing trajectory
/// CSVs and the manifest exactly like the CLI's `run` subcommand.
///
/// # Safety
/// `config_path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn stratal_run_experiment(config_path: *const c_char) -> StratalStatus {
    let path = match path_arg(config_path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match stratal::cli::cmd_run(path) {
        Ok(()) => StratalStatus::Ok,
        Err(e) => fail(&e),
    }
}

/// Copy the calling thread's most recent error message (NUL-terminated)
/// into `buf`. Returns the full message length in bytes, excluding the NUL;
/// if it is `>= cap` the message was truncated. With a null or empty buffer
/// the call just reports the required length.
///
/// # Safety
/// `buf` must point to at least `cap` writable bytes, or be null.
#[no_mangle]
pub unsafe extern "C" fn stratal_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn stratal_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { CStr::from_ptr(stratal_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
