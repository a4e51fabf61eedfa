//! C ABI over the `pointgap` library.
//!
//! Models are opaque handles created by `pg_model_new_*` and released with
//! `pg_model_free`. Every fallible call returns a [`PgStatus`]; on failure
//! `pg_last_error_message` describes the error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use pointgap::fock::Sector;
use pointgap::model::{Boundary, ChainParams, DotParams, ExchangeConvention, Gauge, Model};
use pointgap::spectral::eigenvalues;
use pointgap::topology::{many_body_winding, one_body_invariants, WindingResult};
use pointgap::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    InvalidArgument = 2,
    /// The reference energy touches the spectrum somewhere on the loop.
    GapClosed = 3,
    /// Eigensolver failure or an unresolvable phase.
    Solver = 4,
    /// The output buffer is too short; the needed length was written.
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgBoundary {
    Twisted = 0,
    Periodic = 1,
    Open = 2,
}

/// Winding number of `det[H(θ) - E_ref]` over one period.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PgWinding {
    pub value: i64,
    pub raw_phase_change: f64,
    /// Smallest `|E - E_ref|` over the sampled loop.
    pub gap_margin: f64,
    pub grid_size_used: usize,
}

/// Opaque model handle.
pub struct PgModel {
    model: Model,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PgStatus {
    match e {
        Error::ReferenceOnSpectrum { .. } => PgStatus::GapClosed,
        Error::NoConvergence { .. } | Error::WindingUnresolvable { .. } | Error::NotPeriodic { .. } => PgStatus::Solver,
        Error::Io(_) | Error::Json(_) | Error::LeavesSector { .. } => PgStatus::Solver,
        _ => PgStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and catching panics.
fn guard(f: impl FnOnce() -> Result<(), (PgStatus, String)>) -> PgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("panic: {msg}"));
            PgStatus::Panic
        }
    }
}

fn lib(e: Error) -> (PgStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (PgStatus, String) {
    (PgStatus::NullPointer, format!("{what} is null"))
}

unsafe fn model_ref<'a>(model: *const PgModel) -> Result<&'a Model, (PgStatus, String)> {
    model.as_ref().map(|m| &m.model).ok_or_else(|| null("model"))
}

fn sector_of(n: u32, parity: i32) -> Result<Sector, (PgStatus, String)> {
    let p = i8::try_from(parity).map_err(|_| (PgStatus::InvalidArgument, format!("parity {parity} is not 1 or -1")))?;
    Sector::new(n, p).map_err(lib)
}

fn store(model: Model, out: *mut *mut PgModel) -> Result<(), (PgStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    model.validate().map_err(lib)?;
    unsafe { *out = Box::into_raw(Box::new(PgModel { model })) };
    Ok(())
}

fn copy_winding(w: &WindingResult) -> PgWinding {
    PgWinding { value: w.value, raw_phase_change: w.raw_phase_change, gap_margin: w.gap_margin, grid_size_used: w.grid_size_used }
}

/// Creates a two-orbital dot. `*out` is set only on success.
///
/// # Safety
/// `out` must be null or valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn pg_model_new_dot(
    lambda: f64,
    eps_a_up: f64,
    eps_a_down: f64,
    eps_b_up: f64,
    eps_b_down: f64,
    j: f64,
    v: f64,
    out: *mut *mut PgModel,
) -> PgStatus {
    guard(|| {
        let p = DotParams { lambda, eps_a_up, eps_a_down, eps_b_up, eps_b_down, j, v };
        store(Model::Dot(p), out)
    })
}

/// Creates a chain with the twist on the boundary link and the `J/2`
/// exchange prefactor.
///
/// # Safety
/// `out` must be null or valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn pg_model_new_chain(
    sites: usize,
    hopping: f64,
    j: f64,
    v: f64,
    boundary: PgBoundary,
    out: *mut *mut PgModel,
) -> PgStatus {
    guard(|| {
        let boundary = match boundary {
            PgBoundary::Twisted => Boundary::Twisted,
            PgBoundary::Periodic => Boundary::Periodic,
            PgBoundary::Open => Boundary::Open,
        };
        let mut p = ChainParams::new(sites, hopping).with_interaction(j, v).with_boundary(boundary);
        p.gauge = Gauge::BoundaryLink;
        p.exchange = ExchangeConvention::Half;
        store(Model::Chain(p), out)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle from `pg_model_new_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pg_model_free(model: *mut PgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of Fock states in sector `(n, parity)`.
///
/// # Safety
/// `model` must be a live handle; `out_dim` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn pg_sector_dim(model: *const PgModel, n: u32, parity: i32, out_dim: *mut usize) -> PgStatus {
    guard(|| {
        let m = model_ref(model)?;
        if out_dim.is_null() {
            return Err(null("out_dim"));
        }
        let dim = m.sector_basis(sector_of(n, parity)?).map_err(lib)?.dim();
        *out_dim = dim;
        Ok(())
    })
}

/// Eigenvalues of the sector Hamiltonian at twist `theta`, written to
/// `re[i], im[i]`. `*out_len` always receives the sector dimension; when it
/// exceeds `capacity` nothing else is written and `BufferTooSmall` is
/// returned.
///
/// # Safety
/// `re` and `im` must be valid for `capacity` writes; `out_len` for one.
#[no_mangle]
pub unsafe extern "C" fn pg_eigenvalues(
    model: *const PgModel,
    n: u32,
    parity: i32,
    theta: f64,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> PgStatus {
    guard(|| {
        let m = model_ref(model)?;
        if out_len.is_null() {
            return Err(null("out_len"));
        }
        let sector = sector_of(n, parity)?;
        let dim = m.sector_basis(sector).map_err(lib)?.dim();
        *out_len = dim;
        if dim > capacity {
            return Err((PgStatus::BufferTooSmall, format!("need {dim} slots, got {capacity}")));
        }
        if dim > 0 && (re.is_null() || im.is_null()) {
            return Err(null("output buffer"));
        }
        let values = eigenvalues(&m.many_body(theta, sector).map_err(lib)?.matrix).map_err(|e| lib(e.at_theta(theta)))?;
        for (i, z) in values.iter().enumerate() {
            *re.add(i) = z.re;
            *im.add(i) = z.im;
        }
        Ok(())
    })
}

/// Many-body winding of sector `(n, parity)` around `e_re + i e_im`,
/// starting from `n_grid` intervals.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn pg_many_body_winding(
    model: *const PgModel,
    n: u32,
    parity: i32,
    e_re: f64,
    e_im: f64,
    n_grid: usize,
    out: *mut PgWinding,
) -> PgStatus {
    guard(|| {
        let m = model_ref(model)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let w = many_body_winding(m, sector_of(n, parity)?, Complex64::new(e_re, e_im), n_grid).map_err(lib)?;
        *out = copy_winding(&w);
        Ok(())
    })
}

/// One-body winding `w` and twice the spin winding, `2 w_s = w_up - w_down`.
///
/// # Safety
/// `model` must be a live handle; `out` and `out_twice_spin` must be valid
/// for one write each.
#[no_mangle]
pub unsafe extern "C" fn pg_one_body_winding(
    model: *const PgModel,
    e_re: f64,
    e_im: f64,
    n_grid: usize,
    out: *mut PgWinding,
    out_twice_spin: *mut i64,
) -> PgStatus {
    guard(|| {
        let m = model_ref(model)?;
        if out.is_null() || out_twice_spin.is_null() {
            return Err(null("output pointer"));
        }
        let (w, ws) = one_body_invariants(m, Complex64::new(e_re, e_im), n_grid).map_err(lib)?;
        *out = copy_winding(&w);
        *out_twice_spin = ws.twice;
        Ok(())
    })
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
