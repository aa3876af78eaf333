//! C ABI over `tilespec`.
//!
//! Every function returns a [`TsStatus`]; on failure the message is
//! available from [`ts_last_error`] on the same thread. Variable-length
//! results use the two-call pattern: pass a null buffer (or a capacity
//! that is too small) to learn the required length, then call again.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tilespec::rulespec::{parse_rule_file, validate, RuleSpec};
use tilespec::supertile::{superword, Limits};
use tilespec::{spectral, transition, Error};

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    SemanticError = 4,
    RuntimeError = 5,
    BufferTooSmall = 6,
    InvalidArgument = 7,
    Panic = 8,
}

/// Opaque parsed rule.
pub struct TsRule {
    rule: RuleSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TsStatus {
    match e.exit_code() {
        2 if matches!(e, Error::Parse(_)) => TsStatus::ParseError,
        2 => TsStatus::InvalidArgument,
        3 => TsStatus::SemanticError,
        _ => TsStatus::RuntimeError,
    }
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard<F: FnOnce() -> Result<(), (TsStatus, String)>>(f: F) -> TsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TsStatus::Panic
        }
    }
}

fn lib(e: Error) -> (TsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (TsStatus, String) {
    (TsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn rule_ref<'a>(rule: *const TsRule) -> Result<&'a RuleSpec, (TsStatus, String)> {
    rule.as_ref().map(|r| &r.rule).ok_or_else(|| null("rule"))
}

/// Copies `data` into `buf` if it fits; always reports the length.
unsafe fn fill<T: Copy>(data: &[T], buf: *mut T, cap: usize, len_out: *mut usize) -> Result<(), (TsStatus, String)> {
    if len_out.is_null() {
        return Err(null("len_out"));
    }
    *len_out = data.len();
    if buf.is_null() || cap < data.len() {
        if buf.is_null() && cap == 0 {
            return Ok(());
        }
        return Err((
            TsStatus::BufferTooSmall,
            format!("need {} elements, capacity is {cap}", data.len()),
        ));
    }
    ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
    Ok(())
}

/// Parses rule-file text into a new handle written to `*out`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_rule_parse(text: *const c_char, out: *mut *mut TsRule) -> TsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if text.is_null() {
            return Err(null("text"));
        }
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| (TsStatus::InvalidUtf8, e.to_string()))?;
        let rule = parse_rule_file(s).map_err(|e| lib(e.into()))?;
        *out = Box::into_raw(Box::new(TsRule { rule }));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `rule` must come from `ts_rule_parse` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ts_rule_free(rule: *mut TsRule) {
    if !rule.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(rule))));
    }
}

/// Number of symbols in the rule's alphabet.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn ts_rule_alphabet_len(rule: *const TsRule, out: *mut usize) -> TsStatus {
    guard(|| {
        let r = rule_ref(rule)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = r.alphabet.len();
        Ok(())
    })
}

/// Runs validation; `*ok` tells whether no error-level issue was found and
/// `*n_issues` counts errors and warnings.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn ts_rule_validate(rule: *const TsRule, ok: *mut bool, n_issues: *mut usize) -> TsStatus {
    guard(|| {
        let r = rule_ref(rule)?;
        let ok = ok.as_mut().ok_or_else(|| null("ok"))?;
        let n = n_issues.as_mut().ok_or_else(|| null("n_issues"))?;
        let report = validate(r);
        *ok = report.ok;
        *n = report.issues.len();
        Ok(())
    })
}

/// Letters of `σ^level(letter)` as alphabet indices.
///
/// # Safety
/// `buf` must hold `cap` elements (or be null), `len_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ts_superword(
    rule: *const TsRule,
    letter: u32,
    level: usize,
    buf: *mut u32,
    cap: usize,
    len_out: *mut usize,
) -> TsStatus {
    guard(|| {
        let r = rule_ref(rule)?;
        let w = superword(r, letter, level, &Limits::default()).map_err(lib)?;
        fill(&w, buf, cap, len_out)
    })
}

/// Perron eigenvalue of the level-1 transition matrix.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn ts_perron_root(rule: *const TsRule, out: *mut f64) -> TsStatus {
    guard(|| {
        let r = rule_ref(rule)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let m = transition::transition_matrix(r, 1).map_err(lib)?;
        *out = spectral::algebraic_verdict(&m).map_err(lib)?.perron_root;
        Ok(())
    })
}

/// Letter frequencies per unit volume, in alphabet order.
///
/// # Safety
/// `buf` must hold `cap` elements (or be null), `len_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ts_letter_frequencies(rule: *const TsRule, buf: *mut f64, cap: usize, len_out: *mut usize) -> TsStatus {
    guard(|| {
        let r = rule_ref(rule)?;
        let f = transition::letter_frequencies(r).map_err(lib)?;
        fill(&f, buf, cap, len_out)
    })
}

/// Spectral report as JSON; free the string with `ts_string_free`.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn ts_spectral_report_json(rule: *const TsRule, out: *mut *mut c_char) -> TsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let r = rule_ref(rule)?;
        let report = spectral::spectral_report(r, &spectral::SpectralOptions::default()).map_err(lib)?;
        let v = tilespec::cli::to_json(&report).map_err(|e| (TsStatus::RuntimeError, e.to_string()))?;
        let s = CString::new(v.to_string()).map_err(|e| (TsStatus::RuntimeError, e.to_string()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ts_string_free(s: *mut c_char) {
    if !s.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(CString::from_raw(s))));
    }
}

/// Message for the last failure on this thread, empty after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn ts_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Version of the JSON report schema.
#[no_mangle]
pub extern "C" fn ts_schema_version() -> *const c_char {
    static VERSION: &CStr = c"1.0.0";
    VERSION.as_ptr()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_matches_core() {
        let v = unsafe { CStr::from_ptr(ts_schema_version()) };
        assert_eq!(v.to_str().unwrap(), tilespec::cli::report_schema_version());
    }

    #[test]
    fn fill_two_call() {
        let mut len = 0;
        unsafe {
            assert!(fill(&[1u32, 2, 3], ptr::null_mut(), 0, &mut len).is_ok());
            assert_eq!(len, 3);
            let mut small = [0u32; 2];
            assert_eq!(fill(&[1u32, 2, 3], small.as_mut_ptr(), 2, &mut len).unwrap_err().0, TsStatus::BufferTooSmall);
            let mut buf = [0u32; 3];
            assert!(fill(&[1u32, 2, 3], buf.as_mut_ptr(), 3, &mut len).is_ok());
            assert_eq!(buf, [1, 2, 3]);
        }
    }
}
