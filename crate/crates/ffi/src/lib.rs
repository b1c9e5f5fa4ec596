//! C interface to the `target_defense` simulator.
//!
//! Objects cross the boundary as opaque handles created by `td_*_new` or
//! `td_trial_run` and released by the matching `td_*_free`. Every fallible
//! call returns a [`TdStatus`]; on failure [`td_last_error`] describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use target_defense::bounds::c_infinity;
use target_defense::engagement::{is_capturable, Objective};
use target_defense::engine::{run_trial, TrialRecord};
use target_defense::geometry::{GameParams, PolarPoint, RawParams};
use target_defense::policy::StrategyConfig;
use target_defense::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TdStatus {
    Ok = 0,
    NullPointer = 1,
    /// A value was out of range or a parameter was not positive.
    InvalidArgument = 2,
    /// The parameters break the sensing assumption.
    AssumptionViolation = 3,
    /// A geometric computation had no valid answer.
    Numerical = 4,
    Internal = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TdObjective {
    MinTime = 0,
    MinDistance = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TdCounters {
    pub arrived: u64,
    pub captured: u64,
    pub breached: u64,
    pub escaped: u64,
}

/// Validated game parameters.
pub struct TdParams(GameParams);

/// Log of one simulated trial.
pub struct TdTrial(TrialRecord);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn status_of(err: &Error) -> TdStatus {
    match err {
        Error::NonPositiveParameter { .. } | Error::Config { .. } => TdStatus::InvalidArgument,
        Error::AssumptionViolation { .. } => TdStatus::AssumptionViolation,
        Error::DegenerateCenter { .. }
        | Error::IntruderTooDeep { .. }
        | Error::OutOfDomain { .. }
        | Error::Unreachable { .. }
        | Error::Infeasible { .. } => TdStatus::Numerical,
        _ => TdStatus::Internal,
    }
}

/// Runs `body`, recording any error or panic for [`td_last_error`].
fn guard(body: impl FnOnce() -> Result<(), TdStatus>) -> TdStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => TdStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("panic inside target_defense".into());
            TdStatus::Panic
        }
    }
}

fn fail(err: Error) -> TdStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn null(what: &str) -> TdStatus {
    set_error(format!("`{what}` is null"));
    TdStatus::NullPointer
}

/// Message for the most recent failure on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn td_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Validates parameters and stores a new handle in `*out`.
///
/// # Safety
/// `out` must be null or valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn td_params_new(
    target_radius: f64,
    sensing_radius: f64,
    tsr_width: f64,
    speed_ratio: f64,
    period: f64,
    out: *mut *mut TdParams,
) -> TdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let raw = RawParams {
            target_radius,
            sensing_radius,
            tsr_width,
            speed_ratio,
            period,
        };
        let params = GameParams::try_from(raw).map_err(fail)?;
        *out = Box::into_raw(Box::new(TdParams(params)));
        Ok(())
    })
}

/// # Safety
/// `params` must be null or a handle from [`td_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn td_params_free(params: *mut TdParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// # Safety
/// `params` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn td_params_capture_radius(params: *const TdParams, out: *mut f64) -> TdStatus {
    guard(|| {
        let (Some(p), false) = (params.as_ref(), out.is_null()) else {
            return Err(null("params or out"));
        };
        *out = p.0.capture_radius();
        Ok(())
    })
}

/// Lower bound on the Earliest Breach capture fraction.
///
/// # Safety
/// `params` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn td_c_infinity(params: *const TdParams, out: *mut f64) -> TdStatus {
    guard(|| {
        let (Some(p), false) = (params.as_ref(), out.is_null()) else {
            return Err(null("params or out"));
        };
        *out = c_infinity(&p.0).map_err(fail)?.0;
        Ok(())
    })
}

/// Whether a defender at polar `(defender_r, defender_theta)` can guarantee
/// capture of an intruder at `(intruder_r, intruder_theta)`.
///
/// # Safety
/// `params` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn td_is_capturable(
    params: *const TdParams,
    defender_r: f64,
    defender_theta: f64,
    intruder_r: f64,
    intruder_theta: f64,
    out: *mut bool,
) -> TdStatus {
    guard(|| {
        let (Some(p), false) = (params.as_ref(), out.is_null()) else {
            return Err(null("params or out"));
        };
        *out = is_capturable(
            PolarPoint::new(defender_r, defender_theta),
            PolarPoint::new(intruder_r, intruder_theta),
            &p.0,
        );
        Ok(())
    })
}

/// Simulates one trial and stores its log in `*out`.
///
/// # Safety
/// `params` must be a live handle and `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn td_trial_run(
    params: *const TdParams,
    weight: f64,
    objective: TdObjective,
    horizon: f64,
    seed: u64,
    out: *mut *mut TdTrial,
) -> TdStatus {
    guard(|| {
        let (Some(p), false) = (params.as_ref(), out.is_null()) else {
            return Err(null("params or out"));
        };
        let objective = match objective {
            TdObjective::MinTime => Objective::MinTime,
            TdObjective::MinDistance => Objective::MinDistance,
        };
        let cfg = StrategyConfig::new(weight, objective).map_err(fail)?;
        let record = run_trial(&p.0, &cfg, horizon, seed).map_err(fail)?;
        *out = Box::into_raw(Box::new(TdTrial(record)));
        Ok(())
    })
}

/// # Safety
/// `trial` must be null or a handle from [`td_trial_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn td_trial_free(trial: *mut TdTrial) {
    if !trial.is_null() {
        drop(Box::from_raw(trial));
    }
}

/// # Safety
/// `trial` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn td_trial_counters(trial: *const TdTrial, out: *mut TdCounters) -> TdStatus {
    guard(|| {
        let (Some(t), false) = (trial.as_ref(), out.is_null()) else {
            return Err(null("trial or out"));
        };
        let c = t.0.counters;
        *out = TdCounters {
            arrived: c.arrived,
            captured: c.captured,
            breached: c.breached,
            escaped: c.escaped,
        };
        Ok(())
    })
}

/// Captured over arrived at the horizon.
///
/// # Safety
/// `trial` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn td_trial_capture_fraction(trial: *const TdTrial, out: *mut f64) -> TdStatus {
    guard(|| {
        let (Some(t), false) = (trial.as_ref(), out.is_null()) else {
            return Err(null("trial or out"));
        };
        *out = t.0.summary().final_fraction();
        Ok(())
    })
}

/// Writes the trial log as JSON into a new string owned by the caller;
/// release it with [`td_string_free`].
///
/// # Safety
/// `trial` must be a live handle and `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn td_trial_to_json(trial: *const TdTrial, out: *mut *mut c_char) -> TdStatus {
    guard(|| {
        let (Some(t), false) = (trial.as_ref(), out.is_null()) else {
            return Err(null("trial or out"));
        };
        let text = t.0.to_json().map_err(fail)?;
        *out = CString::new(text)
            .map_err(|e| {
                set_error(e.to_string());
                TdStatus::Internal
            })?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string from [`td_trial_to_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn td_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
