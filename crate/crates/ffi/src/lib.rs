//! C ABI over the pinchisac optimizer.
//!
//! Scenarios and results are opaque heap handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call
//! returns a [`PinchStatus`]; the message of the most recent failure on the
//! calling thread is available from [`pinch_last_error_message`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use pinchisac::experiments::{evaluate, Algorithm, Placement, ScenarioConfig};
use pinchisac::geometry::GroundPoint;
use pinchisac::sca::PipelineConfig;
use pinchisac::sensing::detection_probability;
use pinchisac::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PinchStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    Infeasible = 4,
    NumericalFailure = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PinchAlgorithm {
    Pinching = 0,
    Exhaustive = 1,
    Conventional = 2,
    UserCentric = 3,
    TargetOriented = 4,
    Midpoint = 5,
}

impl From<PinchAlgorithm> for Algorithm {
    fn from(a: PinchAlgorithm) -> Self {
        match a {
            PinchAlgorithm::Pinching => Algorithm::Pinching,
            PinchAlgorithm::Exhaustive => Algorithm::Exhaustive,
            PinchAlgorithm::Conventional => Algorithm::Conventional,
            PinchAlgorithm::UserCentric => Algorithm::UserCentric,
            PinchAlgorithm::TargetOriented => Algorithm::TargetOriented,
            PinchAlgorithm::Midpoint => Algorithm::Midpoint,
        }
    }
}

/// Scenario parameters plus one user/target pair.
pub struct PinchScenario {
    config: ScenarioConfig,
    user: GroundPoint,
    target: GroundPoint,
}

/// Outcome of one optimizer or benchmark run.
pub struct PinchResult {
    rate: f64,
    radar_snr: f64,
    sca_iterations: usize,
    positions: Vec<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> PinchStatus {
    match e {
        Error::Config(_) => PinchStatus::ConfigError,
        Error::Domain(_) | Error::AntennaOutOfRange { .. } | Error::SearchTooExpensive { .. } => {
            PinchStatus::InvalidArgument
        }
        Error::NumericalInfeasibility { .. }
        | Error::NonMonotoneStep { .. }
        | Error::RealizationFailure { .. }
        | Error::DegenerateChannel(_) => PinchStatus::NumericalFailure,
        Error::EmptyResults | Error::Io { .. } | Error::Csv(_) | Error::Json(_) => PinchStatus::Io,
    }
}

fn fail(status: PinchStatus, msg: impl Into<String>) -> PinchStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> PinchStatus {
    fail(status_of(&e), e.to_string())
}

/// Run `f`, turning a panic into [`PinchStatus::Panic`].
fn guarded(f: impl FnOnce() -> PinchStatus) -> PinchStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(PinchStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn scenario_from(config: ScenarioConfig) -> Box<PinchScenario> {
    let (user, target) = match config.placement {
        Placement::Fixed { user, target } => (user, target),
        Placement::Uniform { .. } => (GroundPoint::new(4.0, 8.0), GroundPoint::new(-4.0, 12.0)),
    };
    Box::new(PinchScenario { config, user, target })
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, PinchStatus> {
    if p.is_null() {
        return Err(fail(PinchStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(PinchStatus::InvalidArgument, "string is not valid UTF-8"))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn pinch_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Scenario with the default parameters, user at (4, 8) and target at (-4, 12).
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pinch_scenario_default(out: *mut *mut PinchScenario) -> PinchStatus {
    guarded(|| {
        if out.is_null() {
            return fail(PinchStatus::NullPointer, "out is null");
        }
        *out = Box::into_raw(scenario_from(ScenarioConfig::default()));
        PinchStatus::Ok
    })
}

/// Parse a scenario from TOML text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pinch_scenario_from_toml(text: *const c_char, out: *mut *mut PinchScenario) -> PinchStatus {
    guarded(|| {
        if out.is_null() {
            return fail(PinchStatus::NullPointer, "out is null");
        }
        let text = match str_arg(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match ScenarioConfig::from_toml_str(text) {
            Ok(cfg) => {
                *out = Box::into_raw(scenario_from(cfg));
                PinchStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Load a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pinch_scenario_load(path: *const c_char, out: *mut *mut PinchScenario) -> PinchStatus {
    guarded(|| {
        if out.is_null() {
            return fail(PinchStatus::NullPointer, "out is null");
        }
        let path = match str_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match ScenarioConfig::load(Path::new(path)) {
            Ok(cfg) => {
                *out = Box::into_raw(scenario_from(cfg));
                PinchStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `scenario` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pinch_scenario_free(scenario: *mut PinchScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

fn with_scenario(scenario: *mut PinchScenario, f: impl FnOnce(&mut PinchScenario) -> PinchStatus) -> PinchStatus {
    guarded(|| match unsafe { scenario.as_mut() } {
        Some(s) => f(s),
        None => fail(PinchStatus::NullPointer, "scenario is null"),
    })
}

/// Place the user and the target (metres).
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_scenario_set_entities(
    scenario: *mut PinchScenario,
    user_x: f64,
    user_y: f64,
    target_x: f64,
    target_y: f64,
) -> PinchStatus {
    with_scenario(scenario, |s| {
        let (u, t) = (GroundPoint::new(user_x, user_y), GroundPoint::new(target_x, target_y));
        let half = s.config.length / 2.0;
        let inside = |p: GroundPoint| p.x.abs() <= half && (0.0..=s.config.width).contains(&p.y);
        if !inside(u) || !inside(t) {
            return fail(PinchStatus::InvalidArgument, "user and target must lie inside the serving area");
        }
        s.user = u;
        s.target = t;
        PinchStatus::Ok
    })
}

/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_scenario_set_radar_snr_requirement(
    scenario: *mut PinchScenario,
    value: f64,
) -> PinchStatus {
    with_scenario(scenario, |s| {
        if !(value >= 0.0 && value.is_finite()) {
            return fail(
                PinchStatus::InvalidArgument,
                format!("radar SNR requirement must be finite and >= 0, got {value}"),
            );
        }
        s.config.detection.radar_snr_requirement = value;
        PinchStatus::Ok
    })
}

/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_scenario_set_p_max(scenario: *mut PinchScenario, watts: f64) -> PinchStatus {
    with_scenario(scenario, |s| {
        if !(watts > 0.0 && watts.is_finite()) {
            return fail(
                PinchStatus::InvalidArgument,
                format!("power budget must be finite and positive, got {watts}"),
            );
        }
        s.config.p_max = watts;
        PinchStatus::Ok
    })
}

/// Run one algorithm on the scenario's user/target pair. An unmet radar
/// requirement returns [`PinchStatus::Infeasible`] and leaves `*out` null.
///
/// # Safety
/// `scenario` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pinch_run(
    scenario: *const PinchScenario,
    algorithm: PinchAlgorithm,
    out: *mut *mut PinchResult,
) -> PinchStatus {
    guarded(|| {
        let Some(s) = scenario.as_ref() else {
            return fail(PinchStatus::NullPointer, "scenario is null");
        };
        if out.is_null() {
            return fail(PinchStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let problem = match s.config.problem(s.user, s.target) {
            Ok(p) => p,
            Err(e) => return from_error(e),
        };
        let e = match evaluate(&problem, algorithm.into(), &PipelineConfig::default(), s.config.exhaustive_step, &[]) {
            Ok(e) => e,
            Err(e) => return from_error(e),
        };
        if !e.feasible {
            return fail(PinchStatus::Infeasible, "the radar SNR requirement cannot be met");
        }
        *out = Box::into_raw(Box::new(PinchResult {
            rate: e.rate,
            radar_snr: e.radar_snr,
            sca_iterations: e.sca_iterations,
            positions: e.positions,
        }));
        PinchStatus::Ok
    })
}

/// # Safety
/// `result` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pinch_result_free(result: *mut PinchResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Achievable rate in bit/s/Hz; NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_result_rate(result: *const PinchResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.rate)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_result_radar_snr(result: *const PinchResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.radar_snr)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_result_sca_iterations(result: *const PinchResult) -> usize {
    result.as_ref().map_or(0, |r| r.sca_iterations)
}

/// Number of transmit antennas in the result.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_result_num_positions(result: *const PinchResult) -> usize {
    result.as_ref().map_or(0, |r| r.positions.len())
}

/// Copy the antenna positions into `buf`, which must hold at least
/// `pinch_result_num_positions` values.
///
/// # Safety
/// `result` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pinch_result_positions(result: *const PinchResult, buf: *mut f64, len: usize) -> PinchStatus {
    guarded(|| {
        let Some(r) = result.as_ref() else {
            return fail(PinchStatus::NullPointer, "result is null");
        };
        if buf.is_null() {
            return fail(PinchStatus::NullPointer, "buffer is null");
        }
        if len < r.positions.len() {
            return fail(
                PinchStatus::InvalidArgument,
                format!("buffer holds {len} values, need {}", r.positions.len()),
            );
        }
        ptr::copy_nonoverlapping(r.positions.as_ptr(), buf, r.positions.len());
        PinchStatus::Ok
    })
}

/// Neyman-Pearson detection probability for a radar SNR and false-alarm
/// probability; NaN outside the valid domain.
#[no_mangle]
pub extern "C" fn pinch_detection_probability(radar_snr: f64, false_alarm_probability: f64) -> f64 {
    if !(radar_snr >= 0.0) || !(false_alarm_probability > 0.0 && false_alarm_probability < 1.0) {
        return f64::NAN;
    }
    detection_probability(radar_snr, false_alarm_probability)
}
