//! C interface to the `homoclinic` solver.
//!
//! Every function returns an [`HcStatus`] (or a plain value for the few
//! infallible queries) and never unwinds across the boundary. Handles are
//! created by `hc_*_new` / `hc_minimize` / `hc_refine` and released with the
//! matching `*_free`. On failure the message is kept per thread and can be
//! read with [`hc_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use homoclinic::cli::Report;
use homoclinic::{
    coercivity_bound, minimize, refine_domain, sharp_coercivity_bound, verify, DescentMetric,
    Error, GridSpec, InitStrategy, Path, ProblemSpec, SolverConfig, WeightFamily, WeightProfile,
};

pub const HC_FAMILY_GAUSSIAN: i32 = 0;
pub const HC_FAMILY_SECH2: i32 = 1;
pub const HC_FAMILY_RATIONAL: i32 = 2;

pub const HC_METRIC_SOBOLEV: i32 = 0;
pub const HC_METRIC_EUCLIDEAN: i32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    Internal = 4,
    Panic = 5,
}

/// Solver settings; fill with [`hc_solver_options_default`] first.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HcSolverOptions {
    pub max_iters: u64,
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    /// Nonzero adds seeded noise to the initial bump.
    pub perturbed: i32,
    pub perturb_scale: f64,
    pub seed: u64,
    /// `HC_METRIC_SOBOLEV` or `HC_METRIC_EUCLIDEAN`.
    pub metric: i32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HcSummary {
    pub half_length: f64,
    pub n_points: u64,
    pub dim: u64,
    pub spacing: f64,
    pub i1: f64,
    pub i2: f64,
    pub action: f64,
    pub grad_norm: f64,
    pub iterations: u64,
    pub converged: i32,
    pub witness_action: f64,
    pub residual_l2: f64,
    pub residual_linf: f64,
    pub endpoint_q: f64,
    pub endpoint_qdot: f64,
    /// NaN when the tail is too small to fit.
    pub tail_rate: f64,
    pub residual_ok: i32,
    pub window_bound_ok: i32,
    pub qdot_bound_ok: i32,
    /// Number of domain-doubling levels that were solved.
    pub levels: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HcCoercivity {
    pub c_const: f64,
    pub x_star: f64,
    pub phi_min: f64,
    pub growth_threshold: f64,
    /// The same three constants with the sharp embedding constant.
    pub sharp_c_const: f64,
    pub sharp_x_star: f64,
    pub sharp_phi_min: f64,
}

/// A problem, its grid and solver options.
pub struct HcProblem {
    spec: ProblemSpec,
    grid: GridSpec,
    solver: SolverConfig,
}

/// The result of a solve.
pub struct HcReport {
    report: Report,
    orbit: Path,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(HcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Io(_) => HcStatus::Internal,
            _ => HcStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: HcStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            HcStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(HcStatus::NullPointer, format!("{what} is null")))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| fail(HcStatus::NullPointer, format!("{what} is null")))
}

fn family_of(code: i32) -> Result<WeightFamily, Failure> {
    match code {
        HC_FAMILY_GAUSSIAN => Ok(WeightFamily::Gaussian),
        HC_FAMILY_SECH2 => Ok(WeightFamily::SechSquared),
        HC_FAMILY_RATIONAL => Ok(WeightFamily::Rational),
        other => Err(fail(
            HcStatus::InvalidArgument,
            format!("unknown weight family {other}"),
        )),
    }
}

fn weight_of(family: i32, amplitude: f64, width: f64) -> Result<WeightProfile, Failure> {
    let family = family_of(family)?;
    let width = (family != WeightFamily::Rational).then_some(width);
    Ok(WeightProfile::new(family, amplitude, width)?)
}

fn options_of(cfg: &SolverConfig) -> HcSolverOptions {
    HcSolverOptions {
        max_iters: cfg.max_iters as u64,
        grad_tol: cfg.grad_tol,
        armijo_c: cfg.armijo_c,
        backtrack_factor: cfg.backtrack_factor,
        perturbed: i32::from(cfg.init_strategy == InitStrategy::ScaledBumpPerturbed),
        perturb_scale: cfg.perturb_scale,
        seed: cfg.seed,
        metric: match cfg.metric {
            DescentMetric::Sobolev => HC_METRIC_SOBOLEV,
            DescentMetric::Euclidean => HC_METRIC_EUCLIDEAN,
        },
    }
}

fn config_of(o: &HcSolverOptions) -> Result<SolverConfig, Failure> {
    let metric = match o.metric {
        HC_METRIC_SOBOLEV => DescentMetric::Sobolev,
        HC_METRIC_EUCLIDEAN => DescentMetric::Euclidean,
        other => {
            return Err(fail(
                HcStatus::InvalidArgument,
                format!("unknown metric {other}"),
            ))
        }
    };
    let max_iters = usize::try_from(o.max_iters)
        .map_err(|_| fail(HcStatus::InvalidArgument, "max_iters does not fit in usize"))?;
    let cfg = SolverConfig {
        max_iters,
        grad_tol: o.grad_tol,
        armijo_c: o.armijo_c,
        backtrack_factor: o.backtrack_factor,
        init_strategy: if o.perturbed != 0 {
            InitStrategy::ScaledBumpPerturbed
        } else {
            InitStrategy::ScaledBump
        },
        perturb_scale: o.perturb_scale,
        seed: o.seed,
        metric,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Writes the default solver options to `out`.
#[no_mangle]
pub unsafe extern "C" fn hc_solver_options_default(out: *mut HcSolverOptions) -> HcStatus {
    guard(|| {
        *deref_mut(out, "out")? = options_of(&SolverConfig::default());
        Ok(())
    })
}

/// Creates a problem on `[-half_length, half_length]` with `n_points` nodes
/// (odd, at least 5). `width` is ignored for the rational family.
#[no_mangle]
pub unsafe extern "C" fn hc_problem_new(
    alpha: f64,
    dim: usize,
    family: i32,
    amplitude: f64,
    width: f64,
    half_length: f64,
    n_points: usize,
    out: *mut *mut HcProblem,
) -> HcStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let spec = ProblemSpec::new(alpha, dim, weight_of(family, amplitude, width)?)?;
        let grid = GridSpec::new(half_length, n_points, dim)?;
        let problem = HcProblem {
            spec,
            grid,
            solver: SolverConfig::default(),
        };
        *out = Box::into_raw(Box::new(problem));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hc_problem_set_solver(
    problem: *mut HcProblem,
    options: *const HcSolverOptions,
) -> HcStatus {
    guard(|| {
        let problem = deref_mut(problem, "problem")?;
        problem.solver = config_of(deref(options, "options")?)?;
        Ok(())
    })
}

/// Releases a problem; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hc_problem_free(problem: *mut HcProblem) {
    if !problem.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(problem))));
    }
}

fn finish(
    problem: &HcProblem,
    levels: Vec<homoclinic::SolveReport>,
    out: &mut *mut HcReport,
) -> Result<(), Failure> {
    let last = levels
        .last()
        .ok_or_else(|| fail(HcStatus::Internal, "no solve levels"))?;
    let verdict = verify(&last.orbit, &problem.spec, problem.solver.grad_tol)?;
    let orbit = last.orbit.clone();
    let report = Report::new(&levels, verdict);
    *out = Box::into_raw(Box::new(HcReport { report, orbit }));
    Ok(())
}

/// Minimizes on the problem's grid. A run that stops before `grad_tol` still
/// succeeds; check `converged` in the summary.
#[no_mangle]
pub unsafe extern "C" fn hc_minimize(
    problem: *const HcProblem,
    out: *mut *mut HcReport,
) -> HcStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let problem = deref(problem, "problem")?;
        let report = minimize(&problem.spec, &problem.grid, &problem.solver)?;
        finish(problem, vec![report], out)
    })
}

/// Minimizes, then doubles the half-length (same spacing) up to
/// `max_doublings` times until the action changes by less than `tol`.
#[no_mangle]
pub unsafe extern "C" fn hc_refine(
    problem: *const HcProblem,
    tol: f64,
    max_doublings: usize,
    out: *mut *mut HcReport,
) -> HcStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let problem = deref(problem, "problem")?;
        let levels = refine_domain(
            &problem.spec,
            &problem.solver,
            &problem.grid,
            tol,
            max_doublings,
        )?;
        finish(problem, levels, out)
    })
}

/// Releases a report; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hc_report_free(report: *mut HcReport) {
    if !report.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(report))));
    }
}

#[no_mangle]
pub unsafe extern "C" fn hc_report_summary(
    report: *const HcReport,
    out: *mut HcSummary,
) -> HcStatus {
    guard(|| {
        let r = &deref(report, "report")?.report;
        *deref_mut(out, "out")? = HcSummary {
            half_length: r.grid.half_length,
            n_points: r.grid.n_points as u64,
            dim: r.spec.dim as u64,
            spacing: r.grid.h,
            i1: r.action.i1,
            i2: r.action.i2,
            action: r.action.total,
            grad_norm: r.grad_norm,
            iterations: r.iterations as u64,
            converged: i32::from(r.converged),
            witness_action: r.witness_action,
            residual_l2: r.residual.l2,
            residual_linf: r.residual.linf,
            endpoint_q: r.decay.endpoint_q,
            endpoint_qdot: r.decay.endpoint_qdot,
            tail_rate: r.decay.tail_rate.unwrap_or(f64::NAN),
            residual_ok: i32::from(r.checks.residual_ok),
            window_bound_ok: i32::from(r.checks.window_bound_ok),
            qdot_bound_ok: i32::from(r.checks.qdot_bound_ok),
            levels: r.refinement.len() as u64,
        };
        Ok(())
    })
}

/// Number of doubles in the orbit, `n_points * dim`.
#[no_mangle]
pub unsafe extern "C" fn hc_report_orbit_len(report: *const HcReport, out: *mut usize) -> HcStatus {
    guard(|| {
        let len = deref(report, "report")?.orbit.values().len();
        *deref_mut(out, "out")? = len;
        Ok(())
    })
}

/// Copies the orbit, row-major `n_points × dim`, into `buf`.
#[no_mangle]
pub unsafe extern "C" fn hc_report_orbit(
    report: *const HcReport,
    buf: *mut f64,
    len: usize,
) -> HcStatus {
    guard(|| {
        let values = deref(report, "report")?.orbit.values();
        if buf.is_null() {
            return Err(fail(HcStatus::NullPointer, "buf is null"));
        }
        if len < values.len() {
            return Err(fail(
                HcStatus::BufferTooSmall,
                format!("buffer holds {len} values, orbit has {}", values.len()),
            ));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        Ok(())
    })
}

/// Copies the `n_points` node times into `buf`.
#[no_mangle]
pub unsafe extern "C" fn hc_report_times(
    report: *const HcReport,
    buf: *mut f64,
    len: usize,
) -> HcStatus {
    guard(|| {
        let times = deref(report, "report")?.orbit.grid().times();
        if buf.is_null() {
            return Err(fail(HcStatus::NullPointer, "buf is null"));
        }
        if len < times.len() {
            return Err(fail(
                HcStatus::BufferTooSmall,
                format!("buffer holds {len} values, grid has {}", times.len()),
            ));
        }
        ptr::copy_nonoverlapping(times.as_ptr(), buf, times.len());
        Ok(())
    })
}

/// The report as JSON, in the same layout as `report.json`. Release the
/// string with [`hc_string_free`].
#[no_mangle]
pub unsafe extern "C" fn hc_report_json(
    report: *const HcReport,
    out: *mut *mut c_char,
) -> HcStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let json = deref(report, "report")?.report.to_json()?;
        let c = CString::new(json).map_err(|e| fail(HcStatus::Internal, e.to_string()))?;
        *out = c.into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hc_string_free(s: *mut c_char) {
    if !s.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(CString::from_raw(s))));
    }
}

/// Closed-form lower-bound constants for `I(q) ≥ ½x² - C x^α`.
#[no_mangle]
pub unsafe extern "C" fn hc_coercivity_bound(
    alpha: f64,
    family: i32,
    amplitude: f64,
    width: f64,
    out: *mut HcCoercivity,
) -> HcStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        let spec = ProblemSpec::new(alpha, 1, weight_of(family, amplitude, width)?)?;
        let b = coercivity_bound(&spec);
        let s = sharp_coercivity_bound(&spec);
        *out = HcCoercivity {
            c_const: b.c_const,
            x_star: b.x_star,
            phi_min: b.phi_min,
            growth_threshold: b.growth_threshold(),
            sharp_c_const: s.c_const,
            sharp_x_star: s.x_star,
            sharp_phi_min: s.phi_min,
        };
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len - 1` bytes) and returns the full message
/// length. Returns 0 when there is no message; `buf` may be null to query
/// the length.
#[no_mangle]
pub unsafe extern "C" fn hc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    catch_unwind(AssertUnwindSafe(|| {
        LAST_ERROR.with(|e| match &*e.borrow() {
            None => 0,
            Some(msg) => {
                let bytes = msg.as_bytes();
                if !buf.is_null() && len > 0 {
                    let n = bytes.len().min(len - 1);
                    ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                    *buf.add(n) = 0;
                }
                bytes.len()
            }
        })
    }))
    .unwrap_or(0)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
