//! C ABI over the gridmesh library.
//!
//! Scenarios and results are opaque heap handles owned by the caller and
//! released with their `*_free` function. Every fallible call returns a
//! [`GmStatus`]; on failure the message is available from
//! [`gm_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gridmesh::analytics::trace_csv;
use gridmesh::lp::{Backend, SolveOptions};
use gridmesh::model::{build_cem, total_cost, DispatchError, DispatchSolution};
use gridmesh::obadmm::{run_admm, solution_quality, AdmmConfig, AdmmError, AdmmStatus, ExchangeLedger, StoppingRule};
use gridmesh::pea::{apply_ledger, apply_pea};
use gridmesh::scenario::{load_scenario, parse_scenario, NetworkScenario};

/// Status codes; the nonzero values match the CLI exit codes where they overlap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmStatus {
    Ok = 0,
    InvalidInput = 2,
    Infeasible = 3,
    SolverFailure = 4,
    NotConverged = 5,
    NullPointer = 6,
    OutOfRange = 7,
    Panic = 8,
}

/// Opaque scenario handle.
pub struct GmScenario {
    inner: NetworkScenario,
}

/// Opaque result of a CEM or DEM solve.
pub struct GmResult {
    objective: f64,
    microgrid_objectives: Vec<f64>,
    iterations: usize,
    epsilon: f64,
    trace_csv: Option<CString>,
    ledger_csv: CString,
}

/// ADMM settings passed by value; start from `gm_admm_config_default()`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GmAdmmConfig {
    pub rho: f64,
    pub beta: f64,
    pub k_s: usize,
    pub epsilon_th: f64,
    pub max_iters: usize,
    /// Stop on the quality threshold alone instead of the combined rule.
    pub reference: bool,
    /// Reallocate exchanges proportionally after convergence.
    pub apply_pea: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: GmStatus, msg: impl Into<String>) -> GmStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> GmStatus) -> GmStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(GmStatus::Panic, "internal panic"))
}

fn dispatch_status(e: &DispatchError) -> GmStatus {
    match e {
        DispatchError::Infeasible(_) => GmStatus::Infeasible,
        _ => GmStatus::SolverFailure,
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, GmStatus> {
    if s.is_null() {
        return Err(fail(GmStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(GmStatus::InvalidInput, "string is not valid UTF-8"))
}

fn csv_string(text: String) -> CString {
    CString::new(text).unwrap_or_default()
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Loads and validates a scenario JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gm_scenario_load(path: *const c_char, out: *mut *mut GmScenario) -> GmStatus {
    guard(|| {
        if out.is_null() {
            return fail(GmStatus::NullPointer, "null output pointer");
        }
        let path = match read_str(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match load_scenario(path) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(GmScenario { inner }));
                GmStatus::Ok
            }
            Err(e) => fail(GmStatus::InvalidInput, e.to_string()),
        }
    })
}

/// Parses and validates a scenario from a JSON string.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gm_scenario_parse(json: *const c_char, out: *mut *mut GmScenario) -> GmStatus {
    guard(|| {
        if out.is_null() {
            return fail(GmStatus::NullPointer, "null output pointer");
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_scenario(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(GmScenario { inner }));
                GmStatus::Ok
            }
            Err(e) => fail(GmStatus::InvalidInput, e.to_string()),
        }
    })
}

/// # Safety
/// `scenario` must come from `gm_scenario_load`/`gm_scenario_parse` and not be
/// freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn gm_scenario_free(scenario: *mut GmScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Number of microgrids, or 0 for NULL.
///
/// # Safety
/// `scenario` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gm_scenario_num_microgrids(scenario: *const GmScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.inner.num_microgrids())
}

fn cem_result(s: &NetworkScenario, solutions: &[DispatchSolution], ledger: &ExchangeLedger) -> GmResult {
    let ids: Vec<usize> = s.microgrids.iter().map(|m| m.id).collect();
    GmResult {
        objective: total_cost(solutions, s),
        microgrid_objectives: solutions.iter().map(|d| d.cost(s).total).collect(),
        iterations: 0,
        epsilon: 0.0,
        trace_csv: None,
        ledger_csv: csv_string(ledger.to_csv(&ids)),
    }
}

/// Solves the centralized model with the backend named by `GRIDMESH_SOLVER`.
///
/// # Safety
/// `scenario` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gm_solve_cem(scenario: *const GmScenario, out: *mut *mut GmResult) -> GmStatus {
    guard(|| {
        let (Some(s), false) = (scenario.as_ref(), out.is_null()) else {
            return fail(GmStatus::NullPointer, "null argument");
        };
        let s = &s.inner;
        let backend = match Backend::from_env() {
            Ok(b) => b,
            Err(e) => return fail(GmStatus::InvalidInput, e.to_string()),
        };
        let opts = match backend {
            Backend::Highs => SolveOptions::external(),
            Backend::Mini => SolveOptions::default(),
        };
        match build_cem(s).solve(s.num_microgrids(), backend, &opts) {
            Ok((solutions, _)) => {
                let ledger = ExchangeLedger::from_solutions(&solutions);
                *out = Box::into_raw(Box::new(cem_result(s, &solutions, &ledger)));
                GmStatus::Ok
            }
            Err(e) => fail(dispatch_status(&e), e.to_string()),
        }
    })
}

/// Defaults: rho 0.001, beta 0.001, k_s 100, epsilon_th 0.1, 2000 iterations,
/// combined stopping rule, no reallocation.
#[no_mangle]
pub extern "C" fn gm_admm_config_default() -> GmAdmmConfig {
    let d = AdmmConfig::default();
    GmAdmmConfig {
        rho: d.rho,
        beta: d.beta,
        k_s: d.k_s,
        epsilon_th: d.epsilon_th,
        max_iters: d.max_iters,
        reference: false,
        apply_pea: false,
    }
}

/// Runs the decentralized solver. A result is produced even when the
/// iteration budget runs out; the status is then `NotConverged`.
///
/// # Safety
/// `scenario` must be a live handle, `config` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_solve_dem(
    scenario: *const GmScenario,
    config: *const GmAdmmConfig,
    out: *mut *mut GmResult,
) -> GmStatus {
    guard(|| {
        let (Some(s), Some(c), false) = (scenario.as_ref(), config.as_ref(), out.is_null()) else {
            return fail(GmStatus::NullPointer, "null argument");
        };
        let s = &s.inner;
        let backend = match Backend::from_env() {
            Ok(b) => b,
            Err(e) => return fail(GmStatus::InvalidInput, e.to_string()),
        };
        let cfg = AdmmConfig {
            rho: c.rho,
            beta: c.beta,
            k_s: c.k_s,
            epsilon_th: c.epsilon_th,
            max_iters: c.max_iters,
            ..AdmmConfig::default()
        };
        let rule = if c.reference {
            StoppingRule::Threshold
        } else {
            StoppingRule::Combined
        };
        let outcome = match run_admm(s, &cfg, backend, rule) {
            Ok(o) => o,
            Err(AdmmError::Config(e)) => return fail(GmStatus::InvalidInput, e.to_string()),
            Err(AdmmError::Agent { id, source }) => {
                return fail(dispatch_status(&source), format!("microgrid {id}: {source}"))
            }
        };
        let (solutions, ledger) = if c.apply_pea {
            match apply_pea(&outcome.ledger) {
                Ok(adjusted) => (apply_ledger(&outcome.solutions, &adjusted), adjusted),
                Err(e) => return fail(GmStatus::SolverFailure, e.to_string()),
            }
        } else {
            (outcome.solutions.clone(), outcome.ledger.clone())
        };
        let mut result = cem_result(s, &solutions, &ledger);
        result.iterations = outcome.iterations();
        result.epsilon = outcome.epsilon();
        result.trace_csv = trace_csv(&outcome.trace).ok().map(csv_string);
        *out = Box::into_raw(Box::new(result));
        match outcome.status {
            AdmmStatus::Converged => GmStatus::Ok,
            AdmmStatus::MaxIters => fail(GmStatus::NotConverged, "iteration budget exhausted"),
        }
    })
}

/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gm_result_objective(result: *const GmResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.objective)
}

/// Operating cost of the microgrid at position `index` (ascending id).
///
/// # Safety
/// `result` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_result_microgrid_objective(result: *const GmResult, index: usize, value: *mut f64) -> GmStatus {
    let (Some(r), false) = (result.as_ref(), value.is_null()) else {
        return fail(GmStatus::NullPointer, "null argument");
    };
    match r.microgrid_objectives.get(index) {
        Some(&v) => {
            *value = v;
            GmStatus::Ok
        }
        None => fail(GmStatus::OutOfRange, format!("no microgrid at index {index}")),
    }
}

/// Iterations run; 0 for centralized results.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gm_result_iterations(result: *const GmResult) -> usize {
    result.as_ref().map_or(0, |r| r.iterations)
}

/// Final solution quality; 0 for centralized results.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gm_result_epsilon(result: *const GmResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.epsilon)
}

/// Convergence trace as CSV, or NULL for centralized results. Owned by the
/// result handle.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gm_result_trace_csv(result: *const GmResult) -> *const c_char {
    result
        .as_ref()
        .and_then(|r| r.trace_csv.as_ref())
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// Exchange ledger as CSV. Owned by the result handle.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gm_result_ledger_csv(result: *const GmResult) -> *const c_char {
    result.as_ref().map_or(ptr::null(), |r| r.ledger_csv.as_ptr())
}

/// # Safety
/// `result` must come from a solve call and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn gm_result_free(result: *mut GmResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Euclidean norm of the stacked residual vectors; NaN on NULL input with
/// nonzero length.
///
/// # Safety
/// `r` and `s` must point to `nr` and `ns` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn gm_solution_quality(r: *const f64, nr: usize, s: *const f64, ns: usize) -> f64 {
    let slice = |p: *const f64, n: usize| {
        if n == 0 {
            Some(&[][..])
        } else if p.is_null() {
            None
        } else {
            Some(std::slice::from_raw_parts(p, n))
        }
    };
    match (slice(r, nr), slice(s, ns)) {
        (Some(r), Some(s)) => solution_quality(r, s),
        _ => f64::NAN,
    }
}
