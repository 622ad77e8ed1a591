//! C interface to `wassersolve`.
//!
//! Objects are opaque handles created by `ws_*_new`/`ws_*_load`/`ws_solve`
//! and released with the matching `ws_*_free`. Fallible calls return a
//! [`WsStatus`]; on failure [`ws_last_error`] describes the problem. The
//! message is per thread and stays valid until the next failing call on
//! that thread.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wassersolve::analysis::{level_setup, AnalyticCase, Level, Sampling, Scheme};
use wassersolve::mesh::{load_mesh, subdivide_to_nested, NestedMeshPair};
use wassersolve::ops::{CellField, Reconstruction};
use wassersolve::problem::TransportSetup;
use wassersolve::solver::{solve, Delta0Mode, Solution, SolverParams};
use wassersolve::Error;

/// Result of a fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    /// The mesh is not admissible or a triangle is not acute.
    Mesh = 5,
    /// Newton or barrier iteration failed.
    Solver = 6,
    /// The barrier floor was reached before the outer tolerance.
    NotConverged = 7,
    /// A Rust panic was caught at the boundary.
    Internal = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WsScheme {
    /// Potentials on the quadrilateral subdivision of the density mesh.
    Enriched = 0,
    NonEnriched = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WsReconstruction {
    Linear = 0,
    Harmonic = 1,
}

/// Barrier method settings. Fill with [`ws_solver_params_default`] and
/// adjust.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WsSolverParams {
    pub mu0: f64,
    pub theta: f64,
    pub eps0: f64,
    pub eps_mu: f64,
    pub alpha_min: f64,
    pub n_max: usize,
    pub theta_max: f64,
    /// Stop on the unperturbed residual instead of the gap bound.
    pub stop_on_residual: bool,
    pub mu_floor: f64,
    pub max_outer: usize,
}

impl From<&SolverParams> for WsSolverParams {
    fn from(p: &SolverParams) -> Self {
        Self {
            mu0: p.mu0,
            theta: p.theta,
            eps0: p.eps0,
            eps_mu: p.eps_mu,
            alpha_min: p.alpha_min,
            n_max: p.n_max,
            theta_max: p.theta_max,
            stop_on_residual: p.delta0_mode == Delta0Mode::Residual,
            mu_floor: p.mu_floor,
            max_outer: p.max_outer,
        }
    }
}

impl From<&WsSolverParams> for SolverParams {
    fn from(p: &WsSolverParams) -> Self {
        Self {
            mu0: p.mu0,
            theta: p.theta,
            eps0: p.eps0,
            eps_mu: p.eps_mu,
            alpha_min: p.alpha_min,
            n_max: p.n_max,
            theta_max: p.theta_max,
            delta0_mode: if p.stop_on_residual { Delta0Mode::Residual } else { Delta0Mode::Gap },
            mu_floor: p.mu_floor,
            max_outer: p.max_outer,
        }
    }
}

/// Density mesh and potential mesh.
pub struct WsMeshPair(NestedMeshPair);

/// Mesh pair, boundary densities, time steps and reconstruction.
pub struct WsProblem(TransportSetup);

pub struct WsSolution(Solution);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> WsStatus {
    match e {
        Error::InvalidArgument(_) | Error::MeshMismatch { .. } | Error::MassMismatch(..) | Error::UnsupportedKind => {
            WsStatus::InvalidArgument
        }
        Error::NotAcute { .. } | Error::AdmissibilityViolation { .. } => WsStatus::Mesh,
        Error::Parse { .. } => WsStatus::Parse,
        Error::Io(_) => WsStatus::Io,
        Error::NegativeDensity { .. }
        | Error::ZeroDensity { .. }
        | Error::SingularSystem(_)
        | Error::StepTooSmall { .. }
        | Error::InnerFailure { .. }
        | Error::MaxOuterIterations { .. } => WsStatus::Solver,
    }
}

fn fail(status: WsStatus, msg: &str) -> WsStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (WsStatus, String)>) -> WsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WsStatus::Ok,
        Ok(Err((s, msg))) => fail(s, &msg),
        Err(_) => fail(WsStatus::Internal, "internal panic"),
    }
}

fn lib(e: Error) -> (WsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (WsStatus, String) {
    (WsStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (WsStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (WsStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (WsStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), (WsStatus, String)> {
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < src.len() {
        return Err((WsStatus::InvalidArgument, format!("buffer holds {len} values, {} needed", src.len())));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Message of the last failure on this thread, empty if none. Owned by the
/// library.
#[no_mangle]
pub extern "C" fn ws_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn ws_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Writes the default barrier settings into `out`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `WsSolverParams`.
#[no_mangle]
pub unsafe extern "C" fn ws_solver_params_default(out: *mut WsSolverParams) -> WsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = WsSolverParams::from(&SolverParams::default());
        Ok(())
    })
}

/// Acute triangulation of the unit square with nominal size `hbar`, paired
/// with its subdivision (enriched) or with itself.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn ws_mesh_pair_generate(hbar: f64, scheme: WsScheme, out: *mut *mut WsMeshPair) -> WsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if !(hbar > 0.0) {
            return Err((WsStatus::InvalidArgument, "hbar must be positive".into()));
        }
        let pair = scheme_of(scheme).build_pair(hbar).map_err(lib)?;
        put(out, WsMeshPair(pair));
        Ok(())
    })
}

/// Loads a density mesh file and builds the pair for `scheme`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn ws_mesh_pair_load(
    path: *const c_char,
    scheme: WsScheme,
    out: *mut *mut WsMeshPair,
) -> WsStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mesh = load_mesh(path).map_err(lib)?;
        let pair = match scheme {
            WsScheme::Enriched => subdivide_to_nested(&mesh).map_err(lib)?,
            WsScheme::NonEnriched => NestedMeshPair::identical(mesh),
        };
        put(out, WsMeshPair(pair));
        Ok(())
    })
}

/// Cells of the density mesh, 0 for a null handle.
///
/// # Safety
/// `pair` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_mesh_pair_density_cells(pair: *const WsMeshPair) -> usize {
    pair.as_ref().map_or(0, |p| p.0.coarse().num_cells())
}

/// Cells of the potential mesh, 0 for a null handle.
///
/// # Safety
/// `pair` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_mesh_pair_potential_cells(pair: *const WsMeshPair) -> usize {
    pair.as_ref().map_or(0, |p| p.0.fine().num_cells())
}

/// Areas of the density cells.
///
/// # Safety
/// `pair` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ws_mesh_pair_density_areas(pair: *const WsMeshPair, buf: *mut f64, len: usize) -> WsStatus {
    guard(|| copy_out(handle(pair, "pair")?.0.coarse().measures(), buf, len))
}

/// # Safety
/// `pair` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ws_mesh_pair_free(pair: *mut WsMeshPair) {
    if !pair.is_null() {
        drop(Box::from_raw(pair));
    }
}

fn scheme_of(s: WsScheme) -> Scheme {
    match s {
        WsScheme::Enriched => Scheme::Enriched,
        WsScheme::NonEnriched => Scheme::NonEnriched,
    }
}

fn kind_of(k: WsReconstruction) -> Reconstruction {
    match k {
        WsReconstruction::Linear => Reconstruction::Linear,
        WsReconstruction::Harmonic => Reconstruction::Harmonic,
    }
}

/// Problem with user densities on the density mesh; `len` must equal its
/// cell count and both densities must carry the same mass. The pair is
/// copied, so it may be freed afterwards.
///
/// # Safety
/// `pair` must be a live handle, `rho_in`/`rho_f` readable for `len`
/// doubles, `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn ws_problem_new(
    pair: *const WsMeshPair,
    steps: usize,
    kind: WsReconstruction,
    rho_in: *const f64,
    rho_f: *const f64,
    len: usize,
    out: *mut *mut WsProblem,
) -> WsStatus {
    guard(|| {
        let pair = handle(pair, "pair")?;
        if rho_in.is_null() {
            return Err(null("rho_in"));
        }
        if rho_f.is_null() {
            return Err(null("rho_f"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let a = CellField(std::slice::from_raw_parts(rho_in, len).to_vec());
        let b = CellField(std::slice::from_raw_parts(rho_f, len).to_vec());
        let setup = TransportSetup::new(pair.0.clone(), steps, kind_of(kind), a, b).map_err(lib)?;
        put(out, WsProblem(setup));
        Ok(())
    })
}

/// Problem for a built-in case (`translation`, `compression`, `sinusoidal`,
/// `cross`) on the generated mesh of size `hbar`. `c` is the compression
/// factor and is ignored by the other cases.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn ws_problem_from_case(
    name: *const c_char,
    c: f64,
    scheme: WsScheme,
    kind: WsReconstruction,
    hbar: f64,
    steps: usize,
    out: *mut *mut WsProblem,
) -> WsStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !(hbar > 0.0) {
            return Err((WsStatus::InvalidArgument, "hbar must be positive".into()));
        }
        let case = AnalyticCase::from_name(name, c).map_err(lib)?;
        let (setup, _) = level_setup(&case, Level { hbar, steps }, scheme_of(scheme), kind_of(kind), Sampling::Center)
            .map_err(lib)?;
        put(out, WsProblem(setup));
        Ok(())
    })
}

/// Interior time steps of the problem, 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_problem_steps(problem: *const WsProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.0.steps())
}

/// # Safety
/// `problem` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ws_problem_free(problem: *mut WsProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Runs the barrier method. `params` may be null for the defaults. A
/// solution is returned in `out` also when the status is
/// `WS_STATUS_NOT_CONVERGED`; it must be freed in both cases.
///
/// # Safety
/// `problem` must be a live handle, `params` null or readable, `out` a
/// valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn ws_solve(
    problem: *const WsProblem,
    params: *const WsSolverParams,
    out: *mut *mut WsSolution,
) -> WsStatus {
    guard(|| {
        let problem = handle(problem, "problem")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let params = params.as_ref().map_or_else(SolverParams::default, SolverParams::from);
        params.validate().map_err(lib)?;
        let sol = solve(&problem.0, &params).map_err(lib)?;
        let converged = sol.converged;
        let mu = sol.mu;
        put(out, WsSolution(sol));
        if converged {
            Ok(())
        } else {
            Err((WsStatus::NotConverged, format!("barrier floor reached at mu = {mu:e}")))
        }
    })
}

/// Discrete distance, NaN for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_solution_w2(sol: *const WsSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.0.w2)
}

/// Barrier weight of the returned iterate, NaN for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_solution_mu(sol: *const WsSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.0.mu)
}

/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_solution_converged(sol: *const WsSolution) -> bool {
    sol.as_ref().is_some_and(|s| s.0.converged)
}

/// Outer iterations, rejected ones included.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_solution_outer_iterations(sol: *const WsSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.0.trace.outer.len())
}

/// Density at time `k / (steps + 1)` for `k` in `0..=steps + 1`.
///
/// # Safety
/// `sol` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ws_solution_density(sol: *const WsSolution, k: usize, buf: *mut f64, len: usize) -> WsStatus {
    guard(|| {
        let rho = &handle(sol, "sol")?.0.state.rho;
        let slice = rho
            .get(k)
            .ok_or_else(|| (WsStatus::InvalidArgument, format!("density slice {k} out of 0..={}", rho.len() - 1)))?;
        copy_out(slice, buf, len)
    })
}

/// Potential on the time interval `k` for `k` in `1..=steps + 1`.
///
/// # Safety
/// `sol` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ws_solution_potential(
    sol: *const WsSolution,
    k: usize,
    buf: *mut f64,
    len: usize,
) -> WsStatus {
    guard(|| {
        let phi = &handle(sol, "sol")?.0.state.phi;
        let slice = k
            .checked_sub(1)
            .and_then(|i| phi.get(i))
            .ok_or_else(|| (WsStatus::InvalidArgument, format!("potential slice {k} out of 1..={}", phi.len())))?;
        copy_out(slice, buf, len)
    })
}

/// # Safety
/// `sol` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ws_solution_free(sol: *mut WsSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}
