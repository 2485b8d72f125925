// SPDX-License-Identifier: Apache-2.0

//! C interface to the `wtg` solver.
//!
//! Games and verdicts are opaque heap objects owned by the caller and
//! released with the matching `*_free` function. Every fallible call
//! returns a [`WtgStatus`]; on failure a message is available from
//! [`wtg_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wtg::game::Game;
use wtg::rational::{fmt_q, parse_q, to_f64, Ext};
use wtg::solver::{decide_value, solve, Decision, Options, Verdict};
use wtg::Error;

/// Result codes of the C interface.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WtgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidGame = 4,
    NotAlmostNonZeno = 5,
    UnboundedClock = 6,
    TooManyClocks = 7,
    SolverError = 8,
    Panic = 9,
}

/// A parsed game.
pub struct WtgGame {
    game: Game,
}

/// The outcome of solving a game.
pub struct WtgVerdict {
    verdict: Verdict,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> WtgStatus {
    match e {
        Error::Parse(_) | Error::Io(_) => WtgStatus::ParseError,
        Error::Structural(_) | Error::Domain(_) | Error::MaxControlledCycle(_) => WtgStatus::InvalidGame,
        Error::NotAlmostNonZeno(_) => WtgStatus::NotAlmostNonZeno,
        Error::UnboundedClock(_) => WtgStatus::UnboundedClock,
        Error::MoreThanTwoClocks(_) => WtgStatus::TooManyClocks,
        _ => WtgStatus::SolverError,
    }
}

fn guard(f: impl FnOnce() -> Result<(), WtgStatus>) -> WtgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WtgStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            WtgStatus::Panic
        }
    }
}

fn fail(e: Error) -> WtgStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, WtgStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(WtgStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        WtgStatus::InvalidUtf8
    })
}

fn null_check<T>(p: *const T, what: &str) -> Result<(), WtgStatus> {
    if p.is_null() {
        set_error(format!("null {what}"));
        Err(WtgStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wtg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a game from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wtg_game_from_json(json: *const c_char, out: *mut *mut WtgGame) -> WtgStatus {
    guard(|| {
        null_check(out, "output pointer")?;
        *out = ptr::null_mut();
        let text = read_str(json)?;
        let game = wtg::io::parse_game(text).map_err(fail)?;
        *out = Box::into_raw(Box::new(WtgGame { game }));
        Ok(())
    })
}

/// Releases a game; null is ignored.
///
/// # Safety
/// `g` must come from [`wtg_game_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wtg_game_free(g: *mut WtgGame) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of clocks of a game, or -1 for null.
///
/// # Safety
/// `g` must be null or a live game.
#[no_mangle]
pub unsafe extern "C" fn wtg_game_num_clocks(g: *const WtgGame) -> i32 {
    g.as_ref().map_or(-1, |g| g.game.num_clocks() as i32)
}

/// Solves a game exactly.
///
/// # Safety
/// `g` must be a live game and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wtg_solve(g: *const WtgGame, out: *mut *mut WtgVerdict) -> WtgStatus {
    guard(|| {
        null_check(out, "output pointer")?;
        *out = ptr::null_mut();
        null_check(g, "game")?;
        let verdict = solve(&(*g).game, &Options::default()).map_err(fail)?;
        *out = Box::into_raw(Box::new(WtgVerdict { verdict }));
        Ok(())
    })
}

/// Releases a verdict; null is ignored.
///
/// # Safety
/// `v` must come from [`wtg_solve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wtg_verdict_free(v: *mut WtgVerdict) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// Whether the value is `+∞` (Min cannot force a goal).
///
/// # Safety
/// `v` must be a live verdict.
#[no_mangle]
pub unsafe extern "C" fn wtg_verdict_is_infinite(v: *const WtgVerdict) -> bool {
    v.as_ref().is_some_and(|v| v.verdict.value.is_inf())
}

/// The value as a newly allocated `"p/q"` (or `"+inf"`) string, to be
/// released with [`wtg_string_free`].
///
/// # Safety
/// `v` must be a live verdict and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wtg_verdict_value(v: *const WtgVerdict, out: *mut *mut c_char) -> WtgStatus {
    guard(|| {
        null_check(out, "output pointer")?;
        *out = ptr::null_mut();
        null_check(v, "verdict")?;
        let s = match &(*v).verdict.value {
            Ext::Fin(q) => fmt_q(q),
            Ext::Inf => "+inf".to_string(),
        };
        *out = CString::new(s).expect("no NUL in rationals").into_raw();
        Ok(())
    })
}

/// The value as a double, `INFINITY` when infinite, NaN for null.
///
/// # Safety
/// `v` must be null or a live verdict.
#[no_mangle]
pub unsafe extern "C" fn wtg_verdict_value_f64(v: *const WtgVerdict) -> f64 {
    match v.as_ref().map(|v| &v.verdict.value) {
        Some(Ext::Fin(q)) => to_f64(q),
        Some(Ext::Inf) => f64::INFINITY,
        None => f64::NAN,
    }
}

/// Compares a verdict with a `"p/q"` threshold: `*at_most` is set to 1 when
/// the value is at most the threshold and 0 otherwise.
///
/// # Safety
/// `v` must be a live verdict, `threshold` a NUL-terminated string and
/// `at_most` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wtg_verdict_decide(v: *const WtgVerdict, threshold: *const c_char, at_most: *mut i32) -> WtgStatus {
    guard(|| {
        null_check(at_most, "output pointer")?;
        null_check(v, "verdict")?;
        let c = parse_q(read_str(threshold)?).map_err(fail)?;
        *at_most = i32::from(decide_value(&(*v).verdict.value, &c) == Decision::AtMost);
        Ok(())
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wtg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wtg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
