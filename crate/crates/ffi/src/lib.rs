//! C interface to privtrade.
//!
//! Every fallible function returns a [`PtStatus`] and writes its result through an
//! out-pointer. On failure, [`pt_last_error`] describes the most recent error on the
//! calling thread. Infinite values are returned as IEEE `+inf`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use privtrade::common_info::gk_common_information;
use privtrade::measures::leakage;
use privtrade::probability::mutual_information;
use privtrade::solver::{solve_point, Scenario, ScenarioKind, SolverOptions, Status};
use privtrade::symmetric_pair::{pi_closed, sp_joint, SPParams};
use privtrade::{io, DistortionMeasure, Error, JointPmf, PrivacyMeasure};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    Unsupported = 4,
    Internal = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PtScenario {
    FullData = 0,
    OutputPerturbation = 1,
    Inference = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PtPointStatus {
    Optimal = 0,
    Approximate = 1,
    Infeasible = 2,
}

/// One solved tradeoff point. `pi` is `+inf` when infeasible.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PtPoint {
    pub delta: f64,
    pub pi: f64,
    pub gap: f64,
    pub status: PtPointStatus,
}

/// Opaque joint distribution of two variables.
pub struct PtJoint(JointPmf);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PtStatus {
    match e {
        Error::Json(_) => PtStatus::ParseError,
        Error::Unsupported(_) | Error::UnsupportedArity(_) => PtStatus::Unsupported,
        _ => PtStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic for [`pt_last_error`].
fn guard(f: impl FnOnce() -> Result<(), (PtStatus, String)>) -> PtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PtStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PtStatus::Internal
        }
    }
}

fn lib<T>(r: privtrade::Result<T>) -> Result<T, (PtStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (PtStatus, String) {
    (PtStatus::NullPointer, format!("{what} is null"))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (PtStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (PtStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn joint<'a>(p: *const PtJoint) -> Result<&'a JointPmf, (PtStatus, String)> {
    p.as_ref().map(|j| &j.0).ok_or_else(|| null("joint"))
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), (PtStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

fn kind(s: PtScenario) -> ScenarioKind {
    match s {
        PtScenario::FullData => ScenarioKind::FullData,
        PtScenario::OutputPerturbation => ScenarioKind::OutputPerturbation,
        PtScenario::Inference => ScenarioKind::Inference,
    }
}

/// Message for the last failed call on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn pt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a two-axis joint from JSON text. Free the result with [`pt_joint_free`].
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pt_joint_from_json(json: *const c_char, out: *mut *mut PtJoint) -> PtStatus {
    guard(|| {
        let text = c_str(json, "json")?;
        let j = lib(io::joint_from_json(text))?;
        if j.arity() != 2 {
            return Err((PtStatus::Unsupported, format!("joint has {} axes, expected 2", j.arity())));
        }
        write(out, Box::into_raw(Box::new(PtJoint(j))))
    })
}

/// The symmetric pair on `m` symbols with off-diagonal mass `p`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pt_sp_joint(m: usize, p: f64, out: *mut *mut PtJoint) -> PtStatus {
    guard(|| {
        let params = lib(SPParams::new(m, p))?;
        let j = lib(sp_joint(params))?;
        write(out, Box::into_raw(Box::new(PtJoint(j))))
    })
}

/// Releases a joint. Null is ignored.
///
/// # Safety
/// `joint` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pt_joint_free(joint: *mut PtJoint) {
    if !joint.is_null() {
        drop(Box::from_raw(joint));
    }
}

/// `I(X; Z)` in nats.
///
/// # Safety
/// `joint` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pt_mutual_information(joint: *const PtJoint, out: *mut f64) -> PtStatus {
    guard(|| write(out, mutual_information(self::joint(joint)?)))
}

/// Leakage in nats for `measure` in {"mi", "max-info", "sibson", "ip", "dp"}.
///
/// # Safety
/// `joint`, `measure` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pt_leakage(joint: *const PtJoint, measure: *const c_char, out: *mut f64) -> PtStatus {
    guard(|| {
        let m: PrivacyMeasure = lib(c_str(measure, "measure")?.parse())?;
        let v = lib(leakage(&m, self::joint(joint)?))?;
        write(out, v.value())
    })
}

/// Entropy of the common part of `X` and `Z`, in nats.
///
/// # Safety
/// `joint` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pt_gk_common_information(joint: *const PtJoint, out: *mut f64) -> PtStatus {
    guard(|| write(out, gk_common_information(self::joint(joint)?)))
}

/// Closed-form frontier of the symmetric pair under mutual information and error probability.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pt_sp_pi_closed(
    scenario: PtScenario,
    m: usize,
    p: f64,
    delta: f64,
    out: *mut f64,
) -> PtStatus {
    guard(|| {
        let params = lib(SPParams::new(m, p))?;
        let r = lib(pi_closed(&kind(scenario), params, delta))?;
        write(out, r.value.value())
    })
}

/// Minimum `I(X; Z)` subject to `Pr(Y != Z) <= delta` for `data` viewed as `(X, Y)`.
///
/// # Safety
/// `data` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pt_solve_point(
    data: *const PtJoint,
    scenario: PtScenario,
    delta: f64,
    seed: u64,
    out: *mut PtPoint,
) -> PtStatus {
    guard(|| {
        let s = lib(Scenario::new(joint(data)?.clone(), kind(scenario)))?;
        let opts = SolverOptions {
            seed,
            ..SolverOptions::default()
        };
        let pt = lib(solve_point(
            &s,
            &PrivacyMeasure::MutualInformation,
            &DistortionMeasure::ProbabilityOfError,
            delta,
            &opts,
        ))?;
        let status = match pt.status {
            Status::Optimal => PtPointStatus::Optimal,
            Status::Approximate(_) => PtPointStatus::Approximate,
            Status::Infeasible => PtPointStatus::Infeasible,
        };
        write(
            out,
            PtPoint {
                delta: pt.delta,
                pi: pt.pi.value(),
                gap: pt.gap,
                status,
            },
        )
    })
}
