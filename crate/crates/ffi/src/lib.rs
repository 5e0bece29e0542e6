//! C ABI over `vilwav`: build a wavelet system from a parent array, copy out its tables,
//! and verify it.
//!
//! Every function returns a [`VilwavStatus`]; on failure a message is kept per thread and
//! read with [`vilwav_last_error`]. Systems are opaque handles released with
//! [`vilwav_system_free`]. Complex tables are copied as interleaved `re, im` doubles.
//!
//! Buffer protocol: pass `out = NULL` to query the required number of complex values in
//! `*len`; otherwise `capacity` is the number of complex values `out` can hold.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use vilwav::io::{parse_system, system_to_json, LoadError};
use vilwav::verify::verify_system;
use vilwav::{EdgePhases, Error, Limits, RootedTree, VerifyLevel, WaveletSystem};

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VilwavStatus {
    Ok = 0,
    NullPointer = 1,
    /// The parent array is not a rooted tree, or a phase is invalid.
    InvalidTree = 2,
    /// `p` is not prime.
    NotPrime = 3,
    /// A table would exceed the size cap.
    SizeCap = 4,
    /// `capacity` is smaller than the table; `*len` holds the required size.
    BufferTooSmall = 5,
    /// Wavelet index outside `1..p-1` (or `0..p-1` for β).
    OutOfRange = 6,
    /// Malformed JSON or inconsistent table shapes.
    Parse = 7,
    /// Verification ran and at least one check failed.
    VerifyFailed = 8,
    /// Any other library error.
    Failed = 9,
    /// A Rust panic was caught at the boundary.
    Panic = 10,
}

/// Opaque handle to an immutable wavelet system.
pub struct VilwavSystem {
    inner: WaveletSystem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: VilwavStatus, msg: impl Into<String>) -> VilwavStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> VilwavStatus {
    match e {
        Error::NotPrime(_) => VilwavStatus::NotPrime,
        Error::SizeCap { .. } => VilwavStatus::SizeCap,
        Error::WaveletIndex { .. } => VilwavStatus::OutOfRange,
        Error::WrongLength { .. }
        | Error::RootParent(_)
        | Error::VertexOutOfRange { .. }
        | Error::Cycle(_)
        | Error::PhaseOnNonEdge { .. }
        | Error::InvalidPhase(_) => VilwavStatus::InvalidTree,
        _ => VilwavStatus::Failed,
    }
}

fn from_error(e: Error) -> VilwavStatus {
    fail(status_of(&e), e.to_string())
}

/// Runs `f`, converting panics into [`VilwavStatus::Panic`].
fn guard(f: impl FnOnce() -> VilwavStatus) -> VilwavStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == VilwavStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            status
        }
        Err(_) => fail(VilwavStatus::Panic, "internal panic"),
    }
}

/// Message describing the most recent failure on this thread, or NULL after a success.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn vilwav_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds the system generated by the tree `parent[0..p]` (root 0, `parent[0] == 0`).
///
/// `phases_turns` may be NULL; otherwise it has `p` entries and `phases_turns[v]` is the
/// phase, in turns within `[0, 1)`, of the edge `parent[v] -> v` (entry 0 is ignored).
///
/// # Safety
/// `parent` must point to `p` readable values, `phases_turns` to `p` values or be NULL, and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vilwav_system_build(
    parent: *const usize,
    p: usize,
    phases_turns: *const f64,
    out: *mut *mut VilwavSystem,
) -> VilwavStatus {
    guard(|| {
        if parent.is_null() || out.is_null() {
            return fail(VilwavStatus::NullPointer, "parent and out must be non-null");
        }
        *out = ptr::null_mut();
        let parent = std::slice::from_raw_parts(parent, p);
        let tree = match RootedTree::validate(parent, p) {
            Ok(t) => t,
            Err(e) => return from_error(e),
        };
        let mut phases = EdgePhases::new();
        if !phases_turns.is_null() {
            let turns = std::slice::from_raw_parts(phases_turns, p);
            for (v, &t) in turns.iter().enumerate().skip(1) {
                if t != 0.0 {
                    phases.insert((parent[v], v), t);
                }
            }
        }
        match WaveletSystem::build(&tree, &phases, &Limits::from_env()) {
            Ok(system) => {
                *out = Box::into_raw(Box::new(VilwavSystem { inner: system }));
                VilwavStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Loads a system from the JSON produced by `vilwav build`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vilwav_system_from_json(json: *const c_char, out: *mut *mut VilwavSystem) -> VilwavStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return fail(VilwavStatus::NullPointer, "json and out must be non-null");
        }
        *out = ptr::null_mut();
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(_) => return fail(VilwavStatus::Parse, "json is not valid UTF-8"),
        };
        match parse_system(text, &Limits::from_env()) {
            Ok(system) => {
                *out = Box::into_raw(Box::new(VilwavSystem { inner: system }));
                VilwavStatus::Ok
            }
            Err(LoadError::Invalid(e)) => from_error(e),
            Err(e) => fail(VilwavStatus::Parse, e.to_string()),
        }
    })
}

/// Serializes the system as JSON into a new string released with [`vilwav_string_free`].
///
/// # Safety
/// `system` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vilwav_system_to_json(system: *const VilwavSystem, out: *mut *mut c_char) -> VilwavStatus {
    guard(|| {
        if system.is_null() || out.is_null() {
            return fail(VilwavStatus::NullPointer, "system and out must be non-null");
        }
        match CString::new(system_to_json(&(*system).inner)) {
            Ok(s) => {
                *out = s.into_raw();
                VilwavStatus::Ok
            }
            Err(_) => fail(VilwavStatus::Failed, "serialized JSON contains NUL"),
        }
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from [`vilwav_system_to_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn vilwav_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Releases a system handle. NULL is ignored.
///
/// # Safety
/// `system` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn vilwav_system_free(system: *mut VilwavSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// The prime `p`, or 0 for NULL.
///
/// # Safety
/// `system` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn vilwav_system_p(system: *const VilwavSystem) -> usize {
    system.as_ref().map_or(0, |s| s.inner.p.as_usize())
}

/// The support exponent `M = height - 2`, or 0 for NULL.
///
/// # Safety
/// `system` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn vilwav_system_m(system: *const VilwavSystem) -> usize {
    system.as_ref().map_or(0, |s| s.inner.m)
}

unsafe fn copy_out(values: &[vilwav::Complex64], out: *mut f64, capacity: usize, len: *mut usize) -> VilwavStatus {
    if len.is_null() {
        return fail(VilwavStatus::NullPointer, "len must be non-null");
    }
    *len = values.len();
    if out.is_null() {
        return VilwavStatus::Ok;
    }
    if capacity < values.len() {
        return fail(VilwavStatus::BufferTooSmall, format!("need {} complex values, got {capacity}", values.len()));
    }
    let dst = std::slice::from_raw_parts_mut(out, 2 * values.len());
    for (pair, v) in dst.chunks_exact_mut(2).zip(values) {
        pair[0] = v.re;
        pair[1] = v.im;
    }
    VilwavStatus::Ok
}

unsafe fn write_window(lo: *mut i32, hi: *mut i32, window: (i32, i32)) {
    if !lo.is_null() {
        *lo = window.0;
    }
    if !hi.is_null() {
        *hi = window.1;
    }
}

/// Copies `φ` (cells of `G_hi` inside `G_lo`, canonical order). `lo`/`hi` may be NULL.
///
/// # Safety
/// `system` must be live; `out` must hold `2 * capacity` doubles or be NULL; `len` writable.
#[no_mangle]
pub unsafe extern "C" fn vilwav_system_phi(
    system: *const VilwavSystem,
    out: *mut f64,
    capacity: usize,
    len: *mut usize,
    lo: *mut i32,
    hi: *mut i32,
) -> VilwavStatus {
    guard(|| {
        let Some(s) = system.as_ref() else {
            return fail(VilwavStatus::NullPointer, "system must be non-null");
        };
        let phi = &s.inner.phi;
        write_window(lo, hi, (phi.support_level(), phi.resolution_level()));
        copy_out(phi.values(), out, capacity, len)
    })
}

/// Copies `ψ_l`, `1 ≤ l ≤ p - 1`.
///
/// # Safety
/// As for [`vilwav_system_phi`].
#[no_mangle]
pub unsafe extern "C" fn vilwav_system_psi(
    system: *const VilwavSystem,
    l: usize,
    out: *mut f64,
    capacity: usize,
    len: *mut usize,
    lo: *mut i32,
    hi: *mut i32,
) -> VilwavStatus {
    guard(|| {
        let Some(s) = system.as_ref() else {
            return fail(VilwavStatus::NullPointer, "system must be non-null");
        };
        match s.inner.psi(l) {
            Ok(psi) => {
                write_window(lo, hi, (psi.support_level(), psi.resolution_level()));
                copy_out(psi.values(), out, capacity, len)
            }
            Err(e) => from_error(e),
        }
    })
}

/// Copies the `p²` refinement coefficients: `β` for `l = 0`, `β^{(l)}` for `1 ≤ l ≤ p - 1`.
/// Entry `j = a₋₁ + p·a₋₂` belongs to the shift `a₋₁g₋₁ + a₋₂g₋₂`.
///
/// # Safety
/// As for [`vilwav_system_phi`].
#[no_mangle]
pub unsafe extern "C" fn vilwav_system_beta(
    system: *const VilwavSystem,
    l: usize,
    out: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> VilwavStatus {
    guard(|| {
        let Some(s) = system.as_ref() else {
            return fail(VilwavStatus::NullPointer, "system must be non-null");
        };
        let p = s.inner.p.as_usize();
        if l >= p {
            return fail(VilwavStatus::OutOfRange, format!("wavelet index {l} out of range 0..={}", p - 1));
        }
        let beta = if l == 0 { &s.inner.beta } else { &s.inner.beta_l[l - 1] };
        copy_out(beta, out, capacity, len)
    })
}

/// Runs the verification suite (`full != 0` adds the time-domain and Gram checks).
/// Returns [`VilwavStatus::VerifyFailed`] if any check fails; `max_deviation` may be NULL.
///
/// # Safety
/// `system` must be live; `max_deviation` writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn vilwav_system_verify(
    system: *const VilwavSystem,
    full: i32,
    tol: f64,
    max_deviation: *mut f64,
) -> VilwavStatus {
    guard(|| {
        let Some(s) = system.as_ref() else {
            return fail(VilwavStatus::NullPointer, "system must be non-null");
        };
        if !(tol.is_finite() && tol > 0.0) {
            return fail(VilwavStatus::Failed, "tol must be positive and finite");
        }
        let level = if full != 0 { VerifyLevel::Full } else { VerifyLevel::Spectral };
        let report = verify_system(&s.inner, level, tol, &Limits::from_env());
        if !max_deviation.is_null() {
            *max_deviation = report.max_deviation();
        }
        if report.passed() {
            VilwavStatus::Ok
        } else {
            let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
            fail(VilwavStatus::VerifyFailed, format!("failed checks: {}", names.join(", ")))
        }
    })
}
