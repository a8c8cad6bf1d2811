//! C interface to `flipview`.
//!
//! Objects are opaque handles created by `fv_*_new`/`fv_*_parse` style
//! functions and released with the matching `fv_*_free`. Every fallible call
//! returns an `FvStatus`; on failure the message is available from
//! `fv_last_error_message` on the same thread until the next failing call.
//! Strings returned to the caller are released with `fv_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use flipview::error::Error;
use flipview::rect::linear_flip_sequence_neighbor_elbows;
use flipview::satisfied::greedy_sweep;
use flipview::transforms::{satisfied_to_rect, treerelax_to_rect};
use flipview::tree::run_heuristic;
use flipview::{
    AllowedElbows, Family, FamilySpec, FlipSequence, HeuristicPolicy, PermutationPointSet, Sign,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    LimitExceeded = 5,
    Verification = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FvSign {
    Both = 0,
    Plus = 1,
    Minus = 2,
}

impl From<FvSign> for Sign {
    fn from(s: FvSign) -> Self {
        match s {
            FvSign::Both => Sign::Both,
            FvSign::Plus => Sign::Plus,
            FvSign::Minus => Sign::Minus,
        }
    }
}

/// Opaque permutation handle.
pub struct FvPermutation(PermutationPointSet);

/// Opaque flip sequence handle.
pub struct FvFlipSequence(FlipSequence);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FvStatus {
    match e {
        Error::Parse { .. } => FvStatus::Parse,
        Error::LimitExceeded { .. } => FvStatus::LimitExceeded,
        Error::Replay { .. }
        | Error::InvalidState(_)
        | Error::Stuck { .. }
        | Error::Invariant { .. }
        | Error::Assertion(_) => FvStatus::Verification,
        _ => FvStatus::InvalidInput,
    }
}

// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (FvStatus, String)>) -> FvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FvStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FvStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (FvStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (FvStatus, String) {
    (FvStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (FvStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (FvStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (FvStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), (FvStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(v);
    Ok(())
}

/// Message of the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a permutation such as `"2,6,4,3,1,5"`.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fv_permutation_parse(
    text: *const c_char,
    out: *mut *mut FvPermutation,
) -> FvStatus {
    guard(|| {
        let x = flipview::parse_permutation(read_str(text, "text")?).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(FvPermutation(x))))
    })
}

/// Generate a permutation. `family` is `bit_reversal`, `sequential`,
/// `random` or `separable`; `seed` is used by the randomized families.
///
/// # Safety
/// `family` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fv_permutation_generate(
    family: *const c_char,
    n: usize,
    seed: u64,
    out: *mut *mut FvPermutation,
) -> FvStatus {
    guard(|| {
        let family: Family = read_str(family, "family")?
            .parse()
            .map_err(|e: String| (FvStatus::InvalidInput, e))?;
        let x = flipview::generate(FamilySpec::new(family, n, Some(seed))).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(FvPermutation(x))))
    })
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `perm` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fv_permutation_len(perm: *const FvPermutation) -> usize {
    perm.as_ref().map_or(0, |p| p.0.n())
}

/// # Safety
/// `perm` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fv_permutation_free(perm: *mut FvPermutation) {
    if !perm.is_null() {
        drop(Box::from_raw(perm));
    }
}

/// Size of the greedy superset for the given sign.
///
/// # Safety
/// `perm` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fv_greedy_cost(
    perm: *const FvPermutation,
    sign: FvSign,
    out: *mut usize,
) -> FvStatus {
    guard(|| {
        let x = &deref(perm, "perm")?.0;
        write_out(out, greedy_sweep(x, sign.into()).cost())
    })
}

/// Flip sequence from the greedy superset, with elbows forbidden.
///
/// # Safety
/// `perm` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fv_flips_from_greedy(
    perm: *const FvPermutation,
    out: *mut *mut FvFlipSequence,
) -> FvStatus {
    guard(|| {
        let x = &deref(perm, "perm")?.0;
        let y = greedy_sweep(x, Sign::Both);
        let fs = satisfied_to_rect(x, &y, AllowedElbows::NONE).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(FvFlipSequence(fs))))
    })
}

/// Flip sequence following a tree relaxation. `policy` is
/// `max_height_drop`, `max_width_gain`, `max_depth_gain` or `random:<seed>`.
///
/// # Safety
/// `perm` must be a live handle, `policy` a nul-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fv_flips_from_relaxation(
    perm: *const FvPermutation,
    policy: *const c_char,
    out: *mut *mut FvFlipSequence,
) -> FvStatus {
    guard(|| {
        let x = &deref(perm, "perm")?.0;
        let policy: HeuristicPolicy = read_str(policy, "policy")?
            .parse()
            .map_err(|e: String| (FvStatus::InvalidInput, e))?;
        let ef = run_heuristic(x, policy).map_err(lib_err)?;
        let fs = treerelax_to_rect(x, &ef).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(FvFlipSequence(fs))))
    })
}

/// Linear-cost flip sequence that allows the two downward elbows.
///
/// # Safety
/// `perm` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fv_flips_linear(
    perm: *const FvPermutation,
    out: *mut *mut FvFlipSequence,
) -> FvStatus {
    guard(|| {
        let x = &deref(perm, "perm")?.0;
        let fs =
            linear_flip_sequence_neighbor_elbows(x, AllowedElbows::DOWN_PAIR).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(FvFlipSequence(fs))))
    })
}

/// Parse a flip sequence file.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fv_flips_parse(
    text: *const c_char,
    out: *mut *mut FvFlipSequence,
) -> FvStatus {
    guard(|| {
        let fs = FlipSequence::parse(read_str(text, "text")?).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(FvFlipSequence(fs))))
    })
}

/// Number of flips, or 0 for a null handle.
///
/// # Safety
/// `seq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fv_flips_cost(seq: *const FvFlipSequence) -> usize {
    seq.as_ref().map_or(0, |s| s.0.cost())
}

/// Replay the sequence and report whether it ends in an end state.
///
/// # Safety
/// `seq` must be a live handle; `end_state` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fv_flips_replay(
    seq: *const FvFlipSequence,
    end_state: *mut bool,
) -> FvStatus {
    guard(|| {
        let s = deref(seq, "seq")?.0.replay().map_err(lib_err)?;
        write_out(end_state, s.is_end_state())
    })
}

/// Text form of the sequence; release with `fv_string_free`. Null on a null
/// handle.
///
/// # Safety
/// `seq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fv_flips_to_text(seq: *const FvFlipSequence) -> *mut c_char {
    match seq.as_ref() {
        Some(s) => CString::new(s.0.to_text()).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `seq` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fv_flips_free(seq: *mut FvFlipSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}
