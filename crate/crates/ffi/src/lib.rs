//! C ABI for the `pnkhb` solver.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `pnkhb_*_new`/constructor function and released by the matching `_free`.
//! Fallible functions return a [`PnkhbStatus`]; on failure a message is
//! available from [`pnkhb_last_error_message`] on the same thread.
//!
//! Panics never unwind into C: each entry point catches them and reports
//! [`PnkhbStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicI32, Ordering};
use std::sync::Arc;

use pnkhb::config::apply_solver_key;
use pnkhb::operators::{check_gradient, HessianOperator, ObjectiveProblem};
use pnkhb::problems::{make_fig1_problem, make_synthetic_mlr, make_toy_ct, random_convex_qp, CtConfig, MlrConfig, QuadraticBoxProblem};
use pnkhb::solver::{solve, Method, SolverConfig, SolverResult, Status};
use pnkhb::{BoxBounds, Error, Matrix, Vector};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnkhbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    /// A linear solve or factorization broke down.
    Numerical = 4,
    /// A user callback returned nonzero.
    CallbackFailed = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnkhbMethod {
    Pnkhb = 0,
    ProjectedGradient = 1,
    PncgTwoMetric = 2,
}

/// How a solve ended. Hitting an iteration limit or a failed line search is
/// not an error; the result is still valid.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnkhbSolveStatus {
    ConvergedXtol = 0,
    ConvergedGtol = 1,
    MaxIterations = 2,
    LinesearchFailure = 3,
}

/// One outer iteration; `iter = 0` describes the starting point.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PnkhbRecord {
    pub iter: usize,
    pub f: f64,
    pub proj_grad_norm: f64,
    pub step_size: f64,
    pub ls_trials: usize,
    pub n_projections: usize,
    pub ipm_iters_total: usize,
    pub active_fraction: f64,
    pub operator_applies: usize,
    pub elapsed_seconds: f64,
}

/// `f(x)` into `*out`; return 0 on success.
pub type PnkhbValueFn = Option<extern "C" fn(user_data: *mut c_void, x: *const f64, n: usize, out: *mut f64) -> i32>;
/// `∇f(x)` into `out[0..n]`; return 0 on success.
pub type PnkhbGradientFn = Option<extern "C" fn(user_data: *mut c_void, x: *const f64, n: usize, out: *mut f64) -> i32>;
/// `∇²f(x) v` into `out[0..n]`; return 0 on success.
pub type PnkhbHessVecFn =
    Option<extern "C" fn(user_data: *mut c_void, x: *const f64, v: *const f64, n: usize, out: *mut f64) -> i32>;

type ValueFn = extern "C" fn(*mut c_void, *const f64, usize, *mut f64) -> i32;
type HessVecFn = extern "C" fn(*mut c_void, *const f64, *const f64, usize, *mut f64) -> i32;

/// Objective plus its default starting point.
pub struct PnkhbProblem {
    inner: Box<dyn ObjectiveProblem>,
    x0: Vector,
    callback_error: Option<Arc<AtomicI32>>,
}

pub struct PnkhbConfig {
    inner: SolverConfig,
}

pub struct PnkhbResult {
    inner: SolverResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(message).unwrap_or_default());
}

fn fail(status: PnkhbStatus, message: impl Into<String>) -> PnkhbStatus {
    set_error(message);
    status
}

fn status_of(e: &Error) -> PnkhbStatus {
    match e {
        Error::DimensionMismatch { .. } => PnkhbStatus::DimensionMismatch,
        Error::SingularTridiagonal | Error::SingularCore | Error::ZeroSeed => PnkhbStatus::Numerical,
        _ => PnkhbStatus::InvalidArgument,
    }
}

fn guard(body: impl FnOnce() -> PnkhbStatus) -> PnkhbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => {
            if status == PnkhbStatus::Ok {
                set_error("");
            }
            status
        }
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(PnkhbStatus::Panic, format!("internal panic: {what}"))
        }
    }
}

/// Copies `n` doubles; `None` when `ptr` is null.
unsafe fn read_vector(ptr: *const f64, n: usize) -> Option<Vector> {
    if ptr.is_null() {
        return None;
    }
    Some(Vector::from_column_slice(std::slice::from_raw_parts(ptr, n)))
}

unsafe fn store_problem(out: *mut *mut PnkhbProblem, problem: PnkhbProblem) {
    *out = Box::into_raw(Box::new(problem));
}

fn owned(inner: Box<dyn ObjectiveProblem>, x0: Vector) -> PnkhbProblem {
    PnkhbProblem {
        inner,
        x0,
        callback_error: None,
    }
}

fn quadratic(p: QuadraticBoxProblem) -> PnkhbProblem {
    let x0 = p.x0().clone();
    owned(Box::new(p), x0)
}

/// Message describing the last failure on this thread; empty after a success.
/// The pointer stays valid until the next `pnkhb_*` call on this thread.
#[no_mangle]
pub extern "C" fn pnkhb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pnkhb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `½ xᵀHx + bᵀx` over `[lower, upper]`. `hessian` is `n × n` row-major and
/// must be symmetric. Infinite bounds are allowed. `x0` may be null, in which
/// case the start is the clamp of the origin.
///
/// # Safety
/// `hessian` must point to `n*n` doubles; `linear`, `lower`, `upper` (and
/// `x0` unless null) to `n` doubles; `out` to writable storage for a pointer.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_problem_quadratic(
    n: usize,
    hessian: *const f64,
    linear: *const f64,
    lower: *const f64,
    upper: *const f64,
    x0: *const f64,
    out: *mut *mut PnkhbProblem,
) -> PnkhbStatus {
    guard(|| {
        if hessian.is_null() || linear.is_null() || lower.is_null() || upper.is_null() || out.is_null() {
            return fail(PnkhbStatus::NullPointer, "null argument to pnkhb_problem_quadratic");
        }
        if n == 0 {
            return fail(PnkhbStatus::InvalidArgument, "dimension must be positive");
        }
        let h = Matrix::from_row_slice(n, n, std::slice::from_raw_parts(hessian, n * n));
        let b = read_vector(linear, n).unwrap();
        let built = BoxBounds::new(read_vector(lower, n).unwrap(), read_vector(upper, n).unwrap())
            .and_then(|bounds| QuadraticBoxProblem::new(h, b, bounds, read_vector(x0, n)));
        match built {
            Ok(p) => {
                store_problem(out, quadratic(p));
                PnkhbStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// The two-dimensional example with `H = [[1,1],[1,2]]`, `b = [1,1]`, box
/// `[−5,0] × [3,8]` and start `[−3,7]`.
///
/// # Safety
/// `out` must point to writable storage for a pointer.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_problem_fig1(out: *mut *mut PnkhbProblem) -> PnkhbStatus {
    guard(|| {
        if out.is_null() {
            return fail(PnkhbStatus::NullPointer, "null output pointer");
        }
        store_problem(out, quadratic(make_fig1_problem()));
        PnkhbStatus::Ok
    })
}

/// Random strictly convex box QP of size `n`.
///
/// # Safety
/// `out` must point to writable storage for a pointer.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_problem_random_qp(n: usize, seed: u64, out: *mut *mut PnkhbProblem) -> PnkhbStatus {
    guard(|| {
        if out.is_null() {
            return fail(PnkhbStatus::NullPointer, "null output pointer");
        }
        if n == 0 {
            return fail(PnkhbStatus::InvalidArgument, "dimension must be positive");
        }
        store_problem(out, quadratic(random_convex_qp(n, seed)));
        PnkhbStatus::Ok
    })
}

/// Synthetic multinomial logistic regression; zero arguments select defaults.
/// Bounds are `±bound` on every weight (`bound ≤ 0` selects the default).
///
/// # Safety
/// `out` must point to writable storage for a pointer.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_problem_mlr(
    n_classes: usize,
    n_f: usize,
    m_f: usize,
    n_samples: usize,
    bound: f64,
    seed: u64,
    out: *mut *mut PnkhbProblem,
) -> PnkhbStatus {
    guard(|| {
        if out.is_null() {
            return fail(PnkhbStatus::NullPointer, "null output pointer");
        }
        let d = MlrConfig::default();
        let or = |v: usize, default: usize| if v == 0 { default } else { v };
        let cfg = MlrConfig {
            n_classes: or(n_classes, d.n_classes),
            n_f: or(n_f, d.n_f),
            m_f: or(m_f, d.m_f),
            n_samples: or(n_samples, d.n_samples),
            bound: if bound > 0.0 { bound } else { d.bound },
            seed,
            ..d
        };
        match make_synthetic_mlr(&cfg) {
            Ok(p) => {
                let x0 = Vector::zeros(p.dim());
                store_problem(out, owned(Box::new(p), x0));
                PnkhbStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Toy spectral CT reconstruction on a `side × side` image (0 selects the
/// default) with a tight upper bound `upper` (`≤ 0` selects the default).
///
/// # Safety
/// `out` must point to writable storage for a pointer.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_problem_toy_ct(side: usize, upper: f64, seed: u64, out: *mut *mut PnkhbProblem) -> PnkhbStatus {
    guard(|| {
        if out.is_null() {
            return fail(PnkhbStatus::NullPointer, "null output pointer");
        }
        let d = CtConfig::default();
        let cfg = CtConfig {
            image_side: if side == 0 { d.image_side } else { side },
            upper: if upper > 0.0 { upper } else { d.upper },
            seed,
            ..d
        };
        match make_toy_ct(&cfg) {
            Ok(p) => {
                let x0 = Vector::zeros(p.dim());
                store_problem(out, owned(Box::new(p), x0));
                PnkhbStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

struct CallbackProblem {
    bounds: BoxBounds,
    value: ValueFn,
    gradient: ValueFn,
    hessvec: HessVecFn,
    user_data: *mut c_void,
    /// First nonzero callback code; reported after the solve.
    error: Arc<AtomicI32>,
}

// The caller promises `user_data` may be used from whichever thread runs the
// solve; the solver itself calls back from a single thread.
unsafe impl Send for CallbackProblem {}
unsafe impl Sync for CallbackProblem {}

impl CallbackProblem {
    fn note(&self, code: i32) -> bool {
        if code != 0 {
            let _ = self.error.compare_exchange(0, code, Ordering::Relaxed, Ordering::Relaxed);
        }
        code == 0
    }
}

impl ObjectiveProblem for CallbackProblem {
    fn dim(&self) -> usize {
        self.bounds.dim()
    }

    fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    fn value(&self, x: &Vector) -> f64 {
        let mut f = f64::NAN;
        let code = (self.value)(self.user_data, x.as_ptr(), x.len(), &mut f);
        if self.note(code) {
            f
        } else {
            f64::NAN
        }
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let mut g = Vector::zeros(x.len());
        let code = (self.gradient)(self.user_data, x.as_ptr(), x.len(), g.as_mut_ptr());
        if !self.note(code) {
            g.fill(f64::NAN);
        }
        g
    }

    fn hessian(&self, x: &Vector) -> Box<dyn HessianOperator + '_> {
        Box::new(CallbackHessian { problem: self, x: x.clone() })
    }

    fn name(&self) -> &str {
        "callbacks"
    }
}

struct CallbackHessian<'a> {
    problem: &'a CallbackProblem,
    x: Vector,
}

impl HessianOperator for CallbackHessian<'_> {
    fn dim(&self) -> usize {
        self.x.len()
    }

    fn apply(&self, v: &Vector) -> Vector {
        let p = self.problem;
        let mut out = Vector::zeros(v.len());
        let code = (p.hessvec)(p.user_data, self.x.as_ptr(), v.as_ptr(), v.len(), out.as_mut_ptr());
        if !p.note(code) {
            out.fill(f64::NAN);
        }
        out
    }
}

/// Objective defined by C callbacks. The Hessian callback may return an
/// approximation (for example Gauss-Newton) but must be symmetric.
/// `x0` may be null, in which case the start is the clamp of the origin.
///
/// # Safety
/// `lower`, `upper` (and `x0` unless null) must point to `n` doubles; the
/// callbacks must stay valid, and `user_data` usable, until the problem is
/// freed.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_problem_callbacks(
    n: usize,
    lower: *const f64,
    upper: *const f64,
    x0: *const f64,
    value: PnkhbValueFn,
    gradient: PnkhbGradientFn,
    hessvec: PnkhbHessVecFn,
    user_data: *mut c_void,
    out: *mut *mut PnkhbProblem,
) -> PnkhbStatus {
    guard(|| {
        let (Some(value), Some(gradient), Some(hessvec)) = (value, gradient, hessvec) else {
            return fail(PnkhbStatus::NullPointer, "all three callbacks are required");
        };
        if lower.is_null() || upper.is_null() || out.is_null() {
            return fail(PnkhbStatus::NullPointer, "null argument to pnkhb_problem_callbacks");
        }
        if n == 0 {
            return fail(PnkhbStatus::InvalidArgument, "dimension must be positive");
        }
        let bounds = match BoxBounds::new(read_vector(lower, n).unwrap(), read_vector(upper, n).unwrap()) {
            Ok(b) => b,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        let start = match read_vector(x0, n) {
            Some(x) if !bounds.contains(&x) => return fail(PnkhbStatus::InvalidArgument, "x0 lies outside the box"),
            Some(x) => x,
            None => bounds.clamp(&Vector::zeros(n)),
        };
        let flag = Arc::new(AtomicI32::new(0));
        let problem = CallbackProblem {
            bounds,
            value,
            gradient,
            hessvec,
            user_data,
            error: Arc::clone(&flag),
        };
        store_problem(
            out,
            PnkhbProblem {
                inner: Box::new(problem),
                x0: start,
                callback_error: Some(flag),
            },
        );
        PnkhbStatus::Ok
    })
}

/// Number of variables; 0 for a null problem.
///
/// # Safety
/// `problem` must be null or a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_problem_dim(problem: *const PnkhbProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.dim())
}

/// Copies the default starting point into `out[0..n]`.
///
/// # Safety
/// `problem` must be a live handle and `out` must point to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_problem_x0(problem: *const PnkhbProblem, out: *mut f64, n: usize) -> PnkhbStatus {
    guard(|| {
        let Some(p) = problem.as_ref() else {
            return fail(PnkhbStatus::NullPointer, "null problem");
        };
        if out.is_null() {
            return fail(PnkhbStatus::NullPointer, "null output buffer");
        }
        if n != p.x0.len() {
            return fail(PnkhbStatus::DimensionMismatch, format!("buffer holds {n} values, problem has {}", p.x0.len()));
        }
        std::slice::from_raw_parts_mut(out, n).copy_from_slice(p.x0.as_slice());
        PnkhbStatus::Ok
    })
}

/// Largest relative error between the gradient and central differences of
/// `f` along 5 random directions at `x`.
///
/// # Safety
/// `problem` must be a live handle, `x` must point to `n` doubles and
/// `relative_error` to a writable double.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_problem_check_gradient(
    problem: *const PnkhbProblem,
    x: *const f64,
    n: usize,
    seed: u64,
    relative_error: *mut f64,
) -> PnkhbStatus {
    guard(|| {
        let Some(p) = problem.as_ref() else {
            return fail(PnkhbStatus::NullPointer, "null problem");
        };
        if x.is_null() || relative_error.is_null() {
            return fail(PnkhbStatus::NullPointer, "null argument to pnkhb_problem_check_gradient");
        }
        if n != p.inner.dim() {
            return fail(PnkhbStatus::DimensionMismatch, format!("x has {n} values, problem has {}", p.inner.dim()));
        }
        let x = read_vector(x, n).unwrap();
        *relative_error = check_gradient(p.inner.as_ref(), &x, 5, seed);
        callback_status(p).unwrap_or(PnkhbStatus::Ok)
    })
}

/// # Safety
/// `problem` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_problem_free(problem: *mut PnkhbProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Solver settings initialized to the library defaults.
#[no_mangle]
pub extern "C" fn pnkhb_config_new() -> *mut PnkhbConfig {
    Box::into_raw(Box::new(PnkhbConfig {
        inner: SolverConfig::default(),
    }))
}

/// Sets one option using the configuration-file key names, e.g.
/// `"solver.max_rank"`, `"solver.active_set"`, `"ipm.tol"`.
///
/// # Safety
/// `config` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_config_set(config: *mut PnkhbConfig, key: *const c_char, value: *const c_char) -> PnkhbStatus {
    guard(|| {
        let Some(cfg) = config.as_mut() else {
            return fail(PnkhbStatus::NullPointer, "null config");
        };
        if key.is_null() || value.is_null() {
            return fail(PnkhbStatus::NullPointer, "null key or value");
        }
        let (Ok(key), Ok(value)) = (CStr::from_ptr(key).to_str(), CStr::from_ptr(value).to_str()) else {
            return fail(PnkhbStatus::InvalidArgument, "key and value must be UTF-8");
        };
        let mut updated = cfg.inner.clone();
        if let Err(message) = apply_solver_key(&mut updated, key.trim(), value.trim()) {
            return fail(PnkhbStatus::InvalidArgument, format!("{key}: {message}"));
        }
        if let Err(e) = updated.validate() {
            return fail(PnkhbStatus::InvalidArgument, format!("{key}: {e}"));
        }
        cfg.inner = updated;
        PnkhbStatus::Ok
    })
}

/// # Safety
/// `config` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_config_free(config: *mut PnkhbConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

fn callback_status(p: &PnkhbProblem) -> Option<PnkhbStatus> {
    let code = p.callback_error.as_ref()?.swap(0, Ordering::Relaxed);
    (code != 0).then(|| fail(PnkhbStatus::CallbackFailed, format!("callback returned {code}")))
}

/// Minimizes `problem` from `x0` (null selects the problem's default start)
/// with `config` (null selects defaults). On success `*out` receives a result
/// handle to be released with [`pnkhb_result_free`].
///
/// # Safety
/// `problem` must be a live handle, `config` null or live, `x0` null or
/// pointing to `n` doubles, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_solve(
    problem: *const PnkhbProblem,
    config: *const PnkhbConfig,
    method: PnkhbMethod,
    x0: *const f64,
    n: usize,
    out: *mut *mut PnkhbResult,
) -> PnkhbStatus {
    guard(|| {
        let Some(p) = problem.as_ref() else {
            return fail(PnkhbStatus::NullPointer, "null problem");
        };
        if out.is_null() {
            return fail(PnkhbStatus::NullPointer, "null output pointer");
        }
        let default_cfg;
        let cfg = match config.as_ref() {
            Some(c) => &c.inner,
            None => {
                default_cfg = SolverConfig::default();
                &default_cfg
            }
        };
        let start = if x0.is_null() {
            p.x0.clone()
        } else if n != p.inner.dim() {
            return fail(PnkhbStatus::DimensionMismatch, format!("x0 has {n} values, problem has {}", p.inner.dim()));
        } else {
            read_vector(x0, n).unwrap()
        };
        let method = match method {
            PnkhbMethod::Pnkhb => Method::Pnkhb,
            PnkhbMethod::ProjectedGradient => Method::ProjectedGradient,
            PnkhbMethod::PncgTwoMetric => Method::PncgTwoMetric,
        };
        let outcome = solve(method, p.inner.as_ref(), &start, cfg);
        if let Some(status) = callback_status(p) {
            return status;
        }
        match outcome {
            Ok(result) => {
                *out = Box::into_raw(Box::new(PnkhbResult { inner: result }));
                PnkhbStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_result_status(result: *const PnkhbResult) -> PnkhbSolveStatus {
    match (*result).inner.status {
        Status::ConvergedXtol => PnkhbSolveStatus::ConvergedXtol,
        Status::ConvergedGtol => PnkhbSolveStatus::ConvergedGtol,
        Status::MaxIterations => PnkhbSolveStatus::MaxIterations,
        Status::LinesearchFailure => PnkhbSolveStatus::LinesearchFailure,
    }
}

/// Number of variables in the solution; 0 for a null result.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_result_dim(result: *const PnkhbResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.x.len())
}

/// Copies the final iterate into `out[0..n]`.
///
/// # Safety
/// `result` must be a live handle and `out` must point to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_result_x(result: *const PnkhbResult, out: *mut f64, n: usize) -> PnkhbStatus {
    guard(|| {
        let Some(r) = result.as_ref() else {
            return fail(PnkhbStatus::NullPointer, "null result");
        };
        if out.is_null() {
            return fail(PnkhbStatus::NullPointer, "null output buffer");
        }
        if n != r.inner.x.len() {
            return fail(PnkhbStatus::DimensionMismatch, format!("buffer holds {n} values, solution has {}", r.inner.x.len()));
        }
        std::slice::from_raw_parts_mut(out, n).copy_from_slice(r.inner.x.as_slice());
        PnkhbStatus::Ok
    })
}

/// Outer iterations performed; the history holds one more record.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_result_iterations(result: *const PnkhbResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.iterations())
}

/// Final objective value; NaN for a null result.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_result_final_f(result: *const PnkhbResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.final_f())
}

/// History record `index` in `0..=iterations`; record 0 is the start.
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_result_record(result: *const PnkhbResult, index: usize, out: *mut PnkhbRecord) -> PnkhbStatus {
    guard(|| {
        let Some(r) = result.as_ref() else {
            return fail(PnkhbStatus::NullPointer, "null result");
        };
        if out.is_null() {
            return fail(PnkhbStatus::NullPointer, "null output record");
        }
        let h = &r.inner.history;
        *out = if index == 0 {
            PnkhbRecord {
                f: h.initial_f,
                proj_grad_norm: h.initial_proj_grad_norm,
                operator_applies: h.initial_operator_applies,
                ..Default::default()
            }
        } else if let Some(rec) = h.records.get(index - 1) {
            PnkhbRecord {
                iter: rec.k,
                f: rec.f,
                proj_grad_norm: rec.proj_grad_norm,
                step_size: rec.step_size,
                ls_trials: rec.ls_trials,
                n_projections: rec.n_projections,
                ipm_iters_total: rec.ipm_iters_total,
                active_fraction: rec.active_fraction,
                operator_applies: rec.operator_applies,
                elapsed_seconds: rec.elapsed_seconds,
            }
        } else {
            return fail(PnkhbStatus::InvalidArgument, format!("record {index} out of range 0..={}", h.len()));
        };
        PnkhbStatus::Ok
    })
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pnkhb_result_free(result: *mut PnkhbResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
