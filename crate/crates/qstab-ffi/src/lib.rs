//! C ABI for the qstab library: opaque handles, integer status codes, and
//! copy-out accessors, so that other languages can load trajectories, run
//! the informativity analysis and read back certificates.
//!
//! Conventions: functions return [`QstabStatus`]; nonzero codes above zero
//! are negative analysis verdicts (the data genuinely fail to certify),
//! codes below zero are errors. Out-parameters are written only on
//! `QSTAB_STATUS_OK`. Strings returned by this library are heap-allocated
//! and must be released with `qstab_string_free`; handles with their
//! matching `_free` function. The per-thread message of the last failure is
//! available through `qstab_last_error`.

use libc::{c_char, c_double, c_int};
use qstab::informativity::{
    check_certificate, membership, sampled_sufficient, synthesize, DataQmi,
    StabilizationCertificate, SufficiencyVerdict, SynthesisVerdict, Theorem,
};
use qstab::linalg::{Mat, SymMatrix};
use qstab::noise::{NoiseBudget, RegularityCertificate};
use qstab::signals::csv::{read_trajectory, LoadedTrajectory};
use qstab::signals::{gramian_cont, gramian_disc, paper_example_signals, sample};
use std::cell::RefCell;
use std::ffi::{CStr, CString};

/// Status and verdict codes. Zero means success; positive codes are honest
/// negative verdicts of the analysis; negative codes are usage or numeric
/// errors (details via `qstab_last_error`).
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum QstabStatus {
    Ok = 0,
    NotInformative = 1,
    Indeterminate = 2,
    Insufficient = 3,
    InvalidArgument = -1,
    IoError = -2,
    NumericalError = -3,
}

/// Analysis mode selector for `qstab_analyze`.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum QstabMode {
    /// Continuous-data informativity (integral noise budget).
    Continuous = 0,
    /// Sampled-data informativity (discrete noise budget at `delta`).
    Sampled = 1,
    /// Sampled data with the regularity margin floor; certifies the
    /// underlying continuous-time plant.
    SampledSufficient = 2,
}

/// Opaque trajectory handle.
pub struct QstabTrajectory {
    inner: LoadedTrajectory,
}

/// Opaque certificate handle.
pub struct QstabCertificate {
    inner: StabilizationCertificate,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(msg).ok();
    });
}

/// Message describing the most recent failure on this thread, or NULL.
/// The caller owns the returned string (release with `qstab_string_free`).
#[no_mangle]
pub extern "C" fn qstab_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by a qstab function (or NULL)
/// and must not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn qstab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn qstab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Load a trajectory CSV (`t,x1..,u1..[,xdot..][,w..]`). A missing
/// derivative column is reconstructed by finite differences.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qstab_trajectory_from_csv(
    path: *const c_char,
    out: *mut *mut QstabTrajectory,
) -> QstabStatus {
    if path.is_null() || out.is_null() {
        set_error("null pointer argument");
        return QstabStatus::InvalidArgument;
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        set_error("path is not valid UTF-8");
        return QstabStatus::InvalidArgument;
    };
    match read_trajectory(std::path::Path::new(path)) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(QstabTrajectory { inner }));
            QstabStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            QstabStatus::IoError
        }
    }
}

/// Materialize the built-in benchmark dataset at grid step `h`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qstab_trajectory_paper_example(
    h: c_double,
    out: *mut *mut QstabTrajectory,
) -> QstabStatus {
    if out.is_null() {
        set_error("null pointer argument");
        return QstabStatus::InvalidArgument;
    }
    match paper_example_signals(h) {
        Ok((traj, noise)) => {
            let inner = LoadedTrajectory { traj, noise: Some(noise), xdot_estimated: false };
            *out = Box::into_raw(Box::new(QstabTrajectory { inner }));
            QstabStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            QstabStatus::InvalidArgument
        }
    }
}

/// # Safety
/// `t` must come from a qstab constructor and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn qstab_trajectory_free(t: *mut QstabTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Grid metadata of a trajectory. Any out-pointer may be NULL to skip it.
///
/// # Safety
/// `t` must be a live trajectory handle; non-NULL out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qstab_trajectory_info(
    t: *const QstabTrajectory,
    state_dim: *mut c_int,
    input_dim: *mut c_int,
    samples: *mut c_int,
    step: *mut c_double,
    horizon: *mut c_double,
) -> QstabStatus {
    let Some(t) = t.as_ref() else {
        set_error("null trajectory handle");
        return QstabStatus::InvalidArgument;
    };
    if !state_dim.is_null() {
        *state_dim = t.inner.traj.state_dim() as c_int;
    }
    if !input_dim.is_null() {
        *input_dim = t.inner.traj.input_dim() as c_int;
    }
    if !samples.is_null() {
        *samples = t.inner.traj.x.len() as c_int;
    }
    if !step.is_null() {
        *step = t.inner.traj.step();
    }
    if !horizon.is_null() {
        *horizon = t.inner.traj.horizon();
    }
    QstabStatus::Ok
}

unsafe fn budget_from_raw(
    q: *const c_double,
    n: usize,
    horizon: f64,
    delta: Option<f64>,
) -> Result<NoiseBudget, String> {
    let q_mat = if q.is_null() {
        SymMatrix::identity(n)
    } else {
        let slice = std::slice::from_raw_parts(q, n * n);
        SymMatrix::from_rows(n, slice)
    };
    match delta {
        None => NoiseBudget::continuous(q_mat, horizon).map_err(|e| e.to_string()),
        Some(d) => NoiseBudget::discrete(q_mat, horizon, d).map_err(|e| e.to_string()),
    }
}

unsafe fn qmi_for(
    t: &QstabTrajectory,
    mode: QstabMode,
    q: *const c_double,
    delta: c_double,
) -> Result<DataQmi, (QstabStatus, String)> {
    let traj = &t.inner.traj;
    let horizon = traj.horizon();
    let n = traj.state_dim();
    match mode {
        QstabMode::Continuous => {
            let budget = budget_from_raw(q, n, horizon, None)
                .map_err(|e| (QstabStatus::InvalidArgument, e))?;
            DataQmi::assemble(&gramian_cont(traj), &budget)
                .map_err(|e| (QstabStatus::InvalidArgument, e.to_string()))
        }
        QstabMode::Sampled | QstabMode::SampledSufficient => {
            if !(delta > 0.0) {
                return Err((
                    QstabStatus::InvalidArgument,
                    "sampled modes need a positive delta".into(),
                ));
            }
            let sampled = sample(traj, delta)
                .map_err(|e| (QstabStatus::InvalidArgument, e.to_string()))?;
            let budget = budget_from_raw(q, n, horizon, Some(delta))
                .map_err(|e| (QstabStatus::InvalidArgument, e))?;
            DataQmi::assemble(&gramian_disc(&sampled), &budget)
                .map_err(|e| (QstabStatus::InvalidArgument, e.to_string()))
        }
    }
}

/// Decide informativity for quadratic stabilization and, on success, hand
/// back a certificate handle. `q` is a row-major n-by-n budget matrix or
/// NULL for identity; `delta` is the stepsize for the sampled modes;
/// `lipschitz` is the assumed square-Lipschitz constant (sufficient mode
/// only). Verdict codes `NOT_INFORMATIVE` / `INSUFFICIENT` /
/// `INDETERMINATE` leave `out_cert` untouched.
///
/// # Safety
/// `t` must be a live trajectory handle; `q`, when non-NULL, must point to
/// n*n doubles; `out_cert` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qstab_analyze(
    t: *const QstabTrajectory,
    mode: QstabMode,
    q: *const c_double,
    delta: c_double,
    lipschitz: c_double,
    out_cert: *mut *mut QstabCertificate,
) -> QstabStatus {
    let Some(t) = t.as_ref() else {
        set_error("null trajectory handle");
        return QstabStatus::InvalidArgument;
    };
    if out_cert.is_null() {
        set_error("null certificate out-pointer");
        return QstabStatus::InvalidArgument;
    }
    let qmi = match qmi_for(t, mode, q, delta) {
        Ok(qmi) => qmi,
        Err((code, msg)) => {
            set_error(msg);
            return code;
        }
    };
    let outcome: Result<Result<StabilizationCertificate, QstabStatus>, String> = match mode {
        QstabMode::Continuous | QstabMode::Sampled => match synthesize(&qmi) {
            Ok(SynthesisVerdict::Informative(c)) => Ok(Ok(*c)),
            Ok(SynthesisVerdict::NotInformative { .. }) => Ok(Err(QstabStatus::NotInformative)),
            Ok(SynthesisVerdict::Indeterminate { .. }) => Ok(Err(QstabStatus::Indeterminate)),
            Err(e) => Err(e.to_string()),
        },
        QstabMode::SampledSufficient => {
            if !(lipschitz >= 0.0) {
                set_error("sufficient mode needs a nonnegative Lipschitz constant");
                return QstabStatus::InvalidArgument;
            }
            let reg = RegularityCertificate::assumed_square_lipschitz(lipschitz);
            match sampled_sufficient(&qmi, &reg) {
                Ok(SufficiencyVerdict::Certified(c)) => Ok(Ok(*c)),
                Ok(SufficiencyVerdict::Insufficient { .. }) => Ok(Err(QstabStatus::Insufficient)),
                Ok(SufficiencyVerdict::Indeterminate { .. }) => {
                    Ok(Err(QstabStatus::Indeterminate))
                }
                Err(e) => Err(e.to_string()),
            }
        }
    };
    match outcome {
        Ok(Ok(cert)) => {
            // defensive re-check so a handle never carries a stale verdict
            match check_certificate(&qmi, &cert.p, &cert.k, cert.beta) {
                Ok(chk) if chk.holds => {
                    *out_cert = Box::into_raw(Box::new(QstabCertificate { inner: cert }));
                    QstabStatus::Ok
                }
                _ => {
                    set_error("certificate failed its own re-check");
                    QstabStatus::NumericalError
                }
            }
        }
        Ok(Err(verdict)) => verdict,
        Err(msg) => {
            set_error(msg);
            QstabStatus::NumericalError
        }
    }
}

/// # Safety
/// `c` must come from `qstab_analyze` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn qstab_certificate_free(c: *mut QstabCertificate) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// State dimension n of the certificate, or -1 on a null handle.
///
/// # Safety
/// `c` must be a live certificate handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn qstab_certificate_state_dim(c: *const QstabCertificate) -> c_int {
    c.as_ref().map_or(-1, |c| c.inner.p.dim() as c_int)
}

/// Input dimension m of the certificate, or -1 on a null handle.
///
/// # Safety
/// `c` must be a live certificate handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn qstab_certificate_input_dim(c: *const QstabCertificate) -> c_int {
    c.as_ref().map_or(-1, |c| c.inner.k.rows() as c_int)
}

/// Certified margin β, or NaN on a null handle.
///
/// # Safety
/// `c` must be a live certificate handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn qstab_certificate_beta(c: *const QstabCertificate) -> c_double {
    c.as_ref().map_or(f64::NAN, |c| c.inner.beta)
}

/// Which inequality the certificate witnesses: 0 continuous data, 1 sampled
/// data, 2 sampled-sufficient.
///
/// # Safety
/// `c` must be a live certificate handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn qstab_certificate_theorem(c: *const QstabCertificate) -> c_int {
    c.as_ref().map_or(-1, |c| match c.inner.theorem {
        Theorem::ContinuousData => 0,
        Theorem::SampledData => 1,
        Theorem::SampledSufficient => 2,
    })
}

unsafe fn copy_out(matrix: &Mat, buf: *mut c_double, len: usize) -> QstabStatus {
    let needed = matrix.rows() * matrix.cols();
    if buf.is_null() || len < needed {
        set_error(format!("buffer of {len} doubles is too small, need {needed}"));
        return QstabStatus::InvalidArgument;
    }
    std::ptr::copy_nonoverlapping(matrix.data().as_ptr(), buf, needed);
    QstabStatus::Ok
}

/// Copy the Lyapunov matrix P (row-major n·n doubles) into `buf`.
///
/// # Safety
/// `c` must be a live certificate handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qstab_certificate_p(
    c: *const QstabCertificate,
    buf: *mut c_double,
    len: usize,
) -> QstabStatus {
    let Some(c) = c.as_ref() else {
        set_error("null certificate handle");
        return QstabStatus::InvalidArgument;
    };
    copy_out(&c.inner.p.to_mat(), buf, len)
}

/// Copy the feedback gain K (row-major m·n doubles) into `buf`.
///
/// # Safety
/// `c` must be a live certificate handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qstab_certificate_k(
    c: *const QstabCertificate,
    buf: *mut c_double,
    len: usize,
) -> QstabStatus {
    let Some(c) = c.as_ref() else {
        set_error("null certificate handle");
        return QstabStatus::InvalidArgument;
    };
    copy_out(&c.inner.k, buf, len)
}

/// Test whether the system (A, B) is consistent with the data under the
/// given budget. `a` is row-major n·n, `b` row-major n·m; `delta <= 0`
/// selects the continuous model, positive values the sampled model.
///
/// # Safety
/// `t` must be a live trajectory handle; `a`, `b` must point to n*n and
/// n*m doubles; `q` NULL or n*n doubles; `inside` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qstab_membership(
    t: *const QstabTrajectory,
    q: *const c_double,
    delta: c_double,
    a: *const c_double,
    b: *const c_double,
    inside: *mut bool,
) -> QstabStatus {
    let Some(t) = t.as_ref() else {
        set_error("null trajectory handle");
        return QstabStatus::InvalidArgument;
    };
    if a.is_null() || b.is_null() || inside.is_null() {
        set_error("null pointer argument");
        return QstabStatus::InvalidArgument;
    }
    let mode = if delta > 0.0 { QstabMode::Sampled } else { QstabMode::Continuous };
    let qmi = match qmi_for(t, mode, q, delta) {
        Ok(qmi) => qmi,
        Err((code, msg)) => {
            set_error(msg);
            return code;
        }
    };
    let n = t.inner.traj.state_dim();
    let m = t.inner.traj.input_dim();
    let a_mat = Mat::from_rows(n, n, std::slice::from_raw_parts(a, n * n));
    let b_mat = Mat::from_rows(n, m, std::slice::from_raw_parts(b, n * m));
    match membership(&a_mat, &b_mat, &qmi, 1e-9) {
        Ok(v) => {
            *inside = v;
            QstabStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            QstabStatus::InvalidArgument
        }
    }
}
