//! C ABI for `canodual`.
//!
//! Instances and solve reports are opaque heap objects owned by the caller
//! and released with their `*_free` function. Every entry point returns a
//! [`CdStatus`]; on failure a description is available from
//! [`cd_last_error_message`] on the same thread. Panics never cross the
//! boundary and are reported as [`CdStatus::Panic`].
//!
//! Vectors are copied into caller buffers: pass the buffer length and the
//! function fails with [`CdStatus::BufferTooSmall`] when it is shorter than
//! the instance dimension.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use canodual::{
    brute_force_solve, evaluate_primal, load_instance, solve, theorem5_solve, Certificate, Error,
    OracleConfig, PrimalPoint, ProblemInstance, SolveReport, SolverConfig,
};

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    InvalidInstance = 4,
    DimensionMismatch = 5,
    Numerical = 6,
    NotDiagonal = 7,
    TooLarge = 8,
    BufferTooSmall = 9,
    NotApplicable = 10,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdCertificate {
    GlobalOptimal = 0,
    KktOnly = 1,
    Failed = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdSolverConfig {
    pub grad_tol: f64,
    pub barrier_mu0: f64,
    pub barrier_shrink: f64,
    pub max_outer: u32,
    pub max_inner: u32,
    pub gap_tol: f64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdOracleConfig {
    pub n_starts: u32,
    pub grid_per_dim: u32,
    pub descent_tol: f64,
    pub max_n: u32,
    pub seed: u64,
}

/// Opaque problem instance.
pub struct CdInstance(ProblemInstance);

/// Opaque solve report.
pub struct CdReport(SolveReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> CdStatus {
    match e {
        Error::Parse(_) => CdStatus::Parse,
        Error::InvalidInstance(_) => CdStatus::InvalidInstance,
        Error::InvalidConfig(_) | Error::ZeroC { .. } => CdStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => CdStatus::DimensionMismatch,
        Error::NotDiagonal => CdStatus::NotDiagonal,
        Error::TooLarge { .. } => CdStatus::TooLarge,
        Error::NotInColumnSpace { .. }
        | Error::NonPositiveSigma2 { .. }
        | Error::SingularG
        | Error::TieAtZero { .. }
        | Error::NoInteriorPoint => CdStatus::Numerical,
    }
}

struct Fail(CdStatus);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        set_error(e.to_string());
        Fail(status_of(&e))
    }
}

fn fail<T>(status: CdStatus, msg: &str) -> Result<T, Fail> {
    set_error(msg);
    Err(Fail(status))
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> CdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CdStatus::Ok,
        Ok(Err(Fail(s))) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            CdStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    match p.as_ref() {
        Some(r) => Ok(r),
        None => fail(CdStatus::NullPointer, "null pointer argument"),
    }
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    match p.as_mut() {
        Some(r) => Ok(r),
        None => fail(CdStatus::NullPointer, "null output pointer"),
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(CdStatus::NullPointer, "null array argument");
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn copy_out(src: &[f64], dst: *mut f64, len: usize) -> Result<(), Fail> {
    if dst.is_null() {
        return fail(CdStatus::NullPointer, "null output buffer");
    }
    if len < src.len() {
        return fail(
            CdStatus::BufferTooSmall,
            &format!("buffer holds {len} values, {} needed", src.len()),
        );
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

fn to_usize(x: u32) -> usize {
    x as usize
}

impl From<CdSolverConfig> for SolverConfig {
    fn from(c: CdSolverConfig) -> Self {
        SolverConfig {
            grad_tol: c.grad_tol,
            barrier_mu0: c.barrier_mu0,
            barrier_shrink: c.barrier_shrink,
            max_outer: to_usize(c.max_outer),
            max_inner: to_usize(c.max_inner),
            gap_tol: c.gap_tol,
            seed: c.seed,
        }
    }
}

impl From<CdOracleConfig> for OracleConfig {
    fn from(c: CdOracleConfig) -> Self {
        OracleConfig {
            n_starts: to_usize(c.n_starts),
            grid_per_dim: to_usize(c.grid_per_dim),
            descent_tol: c.descent_tol,
            max_n: to_usize(c.max_n),
            seed: c.seed,
        }
    }
}

/// Message for the most recent failure on this thread, or NULL. The string
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn cd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by [`cd_report_to_json`].
///
/// # Safety
/// `s` must be NULL or a pointer obtained from this library that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn cd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn cd_solver_config_default() -> CdSolverConfig {
    let d = SolverConfig::default();
    CdSolverConfig {
        grad_tol: d.grad_tol,
        barrier_mu0: d.barrier_mu0,
        barrier_shrink: d.barrier_shrink,
        max_outer: d.max_outer as u32,
        max_inner: d.max_inner as u32,
        gap_tol: d.gap_tol,
        seed: d.seed,
    }
}

#[no_mangle]
pub extern "C" fn cd_oracle_config_default() -> CdOracleConfig {
    let d = OracleConfig::default();
    CdOracleConfig {
        n_starts: d.n_starts as u32,
        grid_per_dim: d.grid_per_dim as u32,
        descent_tol: d.descent_tol,
        max_n: d.max_n as u32,
        seed: d.seed,
    }
}

/// Parses a JSON problem file.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out_instance` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_instance_from_json(json: *const c_char, out_instance: *mut *mut CdInstance) -> CdStatus {
    guard(|| {
        let slot = out(out_instance)?;
        if json.is_null() {
            return fail(CdStatus::NullPointer, "null JSON string");
        }
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return fail(CdStatus::Parse, "JSON string is not valid UTF-8");
        };
        let inst = load_instance(text)?;
        *slot = Box::into_raw(Box::new(CdInstance(inst)));
        Ok(())
    })
}

/// Builds an instance from dense row-major `n x n` matrices.
///
/// # Safety
/// `a` and `b` must point to `n*n` doubles, `c` and `f` to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn cd_instance_new(
    n: usize,
    a: *const f64,
    b: *const f64,
    alpha: f64,
    c: *const f64,
    f: *const f64,
    out_instance: *mut *mut CdInstance,
) -> CdStatus {
    guard(|| {
        let slot = out(out_instance)?;
        if n == 0 {
            return fail(CdStatus::InvalidArgument, "dimension must be positive");
        }
        let Some(nn) = n.checked_mul(n) else {
            return fail(CdStatus::InvalidArgument, "dimension overflows");
        };
        let rows = |p: &[f64]| p.chunks(n).map(<[f64]>::to_vec).collect::<Vec<_>>();
        let a = rows(slice(a, nn)?);
        let b = rows(slice(b, nn)?);
        let inst = ProblemInstance::dense(&a, &b, alpha, slice(c, n)?.to_vec(), slice(f, n)?.to_vec())?;
        let violations = canodual::validate_instance(&inst);
        if !violations.is_empty() {
            return Err(Error::InvalidInstance(violations).into());
        }
        *slot = Box::into_raw(Box::new(CdInstance(inst)));
        Ok(())
    })
}

/// # Safety
/// `inst` must be a live instance and `out_n` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_instance_dim(inst: *const CdInstance, out_n: *mut usize) -> CdStatus {
    guard(|| {
        *out(out_n)? = deref(inst)?.0.n();
        Ok(())
    })
}

/// # Safety
/// `inst` must be NULL or a live instance; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn cd_instance_free(inst: *mut CdInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Primal objective at `(x, v)`.
///
/// # Safety
/// `x` and `v` must point to `n` doubles where `n` is the instance
/// dimension.
#[no_mangle]
pub unsafe extern "C" fn cd_evaluate_primal(
    inst: *const CdInstance,
    x: *const f64,
    v: *const f64,
    out_value: *mut f64,
) -> CdStatus {
    guard(|| {
        let inst = &deref(inst)?.0;
        let n = inst.n();
        let p = PrimalPoint::new(slice(x, n)?.to_vec(), slice(v, n)?.to_vec());
        *out(out_value)? = evaluate_primal(inst, &p)?;
        Ok(())
    })
}

/// Runs the dual solver. `config` may be NULL for defaults.
///
/// # Safety
/// `inst` must be a live instance, `config` NULL or valid, `out_report` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_solve(
    inst: *const CdInstance,
    config: *const CdSolverConfig,
    out_report: *mut *mut CdReport,
) -> CdStatus {
    guard(|| {
        let slot = out(out_report)?;
        let inst = &deref(inst)?.0;
        let cfg = config.as_ref().map_or_else(SolverConfig::default, |c| (*c).into());
        let report = solve(inst, &cfg)?;
        *slot = Box::into_raw(Box::new(CdReport(report)));
        Ok(())
    })
}

/// # Safety
/// `report` must be NULL or a live report; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn cd_report_free(report: *mut CdReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

fn certificate(r: &SolveReport) -> CdCertificate {
    match r.certificate {
        Certificate::GlobalOptimal => CdCertificate::GlobalOptimal,
        Certificate::KKTOnly => CdCertificate::KktOnly,
        Certificate::Failed => CdCertificate::Failed,
    }
}

unsafe fn get<T>(report: *const CdReport, out_value: *mut T, f: impl FnOnce(&SolveReport) -> T) -> CdStatus {
    guard(|| {
        let r = &deref(report)?.0;
        *out(out_value)? = f(r);
        Ok(())
    })
}

unsafe fn get_vec(report: *const CdReport, buf: *mut f64, len: usize, f: impl FnOnce(&SolveReport) -> &[f64]) -> CdStatus {
    guard(|| copy_out(f(&deref(report)?.0), buf, len))
}

/// # Safety
/// `report` must be a live report and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_report_certificate(report: *const CdReport, out_value: *mut CdCertificate) -> CdStatus {
    get(report, out_value, |r| certificate(r))
}

/// # Safety
/// `report` must be a live report and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_report_dual_value(report: *const CdReport, out_value: *mut f64) -> CdStatus {
    get(report, out_value, |r| r.dual_value)
}

/// # Safety
/// `report` must be a live report and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_report_primal_value(report: *const CdReport, out_value: *mut f64) -> CdStatus {
    get(report, out_value, |r| r.primal_value)
}

/// Primal minus dual value.
///
/// # Safety
/// `report` must be a live report and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_report_gap(report: *const CdReport, out_value: *mut f64) -> CdStatus {
    get(report, out_value, |r| r.gap)
}

/// Smallest eigenvalue of `G` at the dual optimum.
///
/// # Safety
/// `report` must be a live report and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_report_lambda_min(report: *const CdReport, out_value: *mut f64) -> CdStatus {
    get(report, out_value, |r| r.lambda_min_g)
}

/// # Safety
/// `report` must be a live report and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_report_sigma0(report: *const CdReport, out_value: *mut f64) -> CdStatus {
    get(report, out_value, |r| r.dual.sigma0)
}

/// # Safety
/// `report` must be a live report and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cd_report_copy_sigma1(report: *const CdReport, buf: *mut f64, len: usize) -> CdStatus {
    get_vec(report, buf, len, |r| &r.dual.sigma1)
}

/// # Safety
/// `report` must be a live report and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cd_report_copy_sigma2(report: *const CdReport, buf: *mut f64, len: usize) -> CdStatus {
    get_vec(report, buf, len, |r| &r.sigma2)
}

/// # Safety
/// `report` must be a live report and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cd_report_copy_x(report: *const CdReport, buf: *mut f64, len: usize) -> CdStatus {
    get_vec(report, buf, len, |r| &r.primal.x)
}

/// # Safety
/// `report` must be a live report and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cd_report_copy_v(report: *const CdReport, buf: *mut f64, len: usize) -> CdStatus {
    get_vec(report, buf, len, |r| &r.primal.v)
}

/// Serializes the report as JSON. Release the string with
/// [`cd_string_free`].
///
/// # Safety
/// `report` must be a live report and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_report_to_json(report: *const CdReport, out_json: *mut *mut c_char) -> CdStatus {
    guard(|| {
        let slot = out(out_json)?;
        let text = serde_json::to_string(&deref(report)?.0).expect("reports serialize");
        *slot = CString::new(text).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// Brute-force minimum over all binary `v`. `config` may be NULL.
///
/// # Safety
/// `x_out` and `v_out` must hold `len` doubles; other pointers must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn cd_oracle_solve(
    inst: *const CdInstance,
    config: *const CdOracleConfig,
    x_out: *mut f64,
    v_out: *mut f64,
    len: usize,
    out_value: *mut f64,
) -> CdStatus {
    guard(|| {
        let inst = &deref(inst)?.0;
        let value = out(out_value)?;
        let cfg = config.as_ref().map_or_else(OracleConfig::default, |c| (*c).into());
        let r = brute_force_solve(inst, &cfg)?;
        copy_out(&r.primal.x, x_out, len)?;
        copy_out(&r.primal.v, v_out, len)?;
        *value = r.value;
        Ok(())
    })
}

/// Closed-form solution of a diagonal instance. Returns
/// [`CdStatus::NotApplicable`] when its sign conditions fail.
///
/// # Safety
/// `x_out` and `v_out` must hold `len` doubles; other pointers must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn cd_decoupled_solve(
    inst: *const CdInstance,
    x_out: *mut f64,
    v_out: *mut f64,
    len: usize,
    out_value: *mut f64,
) -> CdStatus {
    guard(|| {
        let inst = &deref(inst)?.0;
        let value = out(out_value)?;
        let Some(sol) = theorem5_solve(inst)? else {
            return fail(CdStatus::NotApplicable, "closed-form conditions do not hold");
        };
        copy_out(&sol.primal.x, x_out, len)?;
        copy_out(&sol.primal.v, v_out, len)?;
        *value = sol.value;
        Ok(())
    })
}
