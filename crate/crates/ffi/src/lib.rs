//! C ABI over `igeo`.
//!
//! Objects are opaque handles created by `igeo_*_builtin` / `igeo_*_from_json`
//! and released with the matching `*_free`. Every fallible call returns an
//! [`IgeoStatus`]; on failure `igeo_last_error()` describes the problem until
//! the next call on the same thread. Tensors are written row-major into
//! caller buffers: `g[i*n + j]`, `Γ[(i*n + j)*n + k]`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use igeo::cli::{execute, exit_code, Command, Options, SpecDoc};
use igeo::dualflat::{self, PotentialFamily};
use igeo::immersion::{self, Hypersurface};
use igeo::infogeo;
use igeo::models::{self, StatisticalModel};
use igeo::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IgeoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Schema = 3,
    UnknownSymbol = 4,
    OutOfDomain = 5,
    DimensionMismatch = 6,
    BufferTooSmall = 7,
    Numerical = 8,
    Degenerate = 9,
    Panic = 10,
}

pub struct IgeoModel {
    inner: StatisticalModel,
}

pub struct IgeoSurface {
    inner: Hypersurface,
}

pub struct IgeoFamily {
    inner: PotentialFamily,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> IgeoStatus {
    match e {
        Error::Schema(_) | Error::InvalidConfig(_) => IgeoStatus::Schema,
        Error::UnknownSymbol(_) => IgeoStatus::UnknownSymbol,
        Error::OutOfDomain { .. } | Error::StencilOutOfDomain { .. } | Error::OutOfDualDomain { .. } | Error::LeftDomain { .. } => {
            IgeoStatus::OutOfDomain
        }
        Error::DimensionMismatch { .. } => IgeoStatus::DimensionMismatch,
        Error::DegenerateH { .. }
        | Error::SingularFrame { .. }
        | Error::SingularMetric { .. }
        | Error::RankDeficientB { .. } => IgeoStatus::Degenerate,
        _ => IgeoStatus::Numerical,
    }
}

struct Fail(IgeoStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> IgeoStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IgeoStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            IgeoStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(IgeoStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(IgeoStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn parse(s: &str) -> Result<serde_json::Value, Fail> {
    serde_json::from_str(s).map_err(|e| Fail(IgeoStatus::Schema, format!("invalid JSON: {e}")))
}

unsafe fn point<'a>(p: *const f64, len: usize, dim: usize) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(Fail(IgeoStatus::NullPointer, "point is null".into()));
    }
    if len != dim {
        return Err(Fail(IgeoStatus::DimensionMismatch, format!("point has length {len}, expected {dim}")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(IgeoStatus::NullPointer, format!("{what} is null")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(IgeoStatus::NullPointer, "output pointer is null".into()));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Copies `values` into `out` if it is non-null and large enough.
unsafe fn fill<'a>(out: *mut f64, cap: usize, values: impl ExactSizeIterator<Item = &'a f64>) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(IgeoStatus::NullPointer, "output buffer is null".into()));
    }
    if cap < values.len() {
        return Err(Fail(IgeoStatus::BufferTooSmall, format!("buffer holds {cap}, need {}", values.len())));
    }
    for (i, v) in values.enumerate() {
        *out.add(i) = *v;
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null. Owned by the library.
#[no_mangle]
pub extern "C" fn igeo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn igeo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by the library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn igeo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn igeo_model_builtin(name: *const c_char, out: *mut *mut IgeoModel) -> IgeoStatus {
    guard(|| {
        let m = models::builtin(text(name, "name")?)?;
        store(out, IgeoModel { inner: m })
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn igeo_model_from_json(json: *const c_char, out: *mut *mut IgeoModel) -> IgeoStatus {
    guard(|| {
        let m = models::load_model_str(text(json, "json")?)?;
        store(out, IgeoModel { inner: m })
    })
}

/// Parameter dimension, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn igeo_model_dim(model: *const IgeoModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.dim())
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn igeo_model_free(model: *mut IgeoModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Fisher metric at `theta` into `out` (`n*n` entries).
///
/// # Safety
/// `theta` must hold `len` values and `out` `out_len` writable values.
#[no_mangle]
pub unsafe extern "C" fn igeo_fisher_metric(
    model: *const IgeoModel,
    theta: *const f64,
    len: usize,
    out: *mut f64,
    out_len: usize,
) -> IgeoStatus {
    guard(|| {
        let m = &handle(model, "model")?.inner;
        let g = infogeo::fisher_metric(m, point(theta, len, m.dim())?)?;
        fill(out, out_len, g.iter())
    })
}

/// Lowered α-connection `Γ_ij,k` at `theta` into `out` (`n*n*n` entries).
///
/// # Safety
/// `theta` must hold `len` values and `out` `out_len` writable values.
#[no_mangle]
pub unsafe extern "C" fn igeo_alpha_connection(
    model: *const IgeoModel,
    theta: *const f64,
    len: usize,
    alpha: f64,
    out: *mut f64,
    out_len: usize,
) -> IgeoStatus {
    guard(|| {
        let m = &handle(model, "model")?.inner;
        let c = infogeo::alpha_connection(m, point(theta, len, m.dim())?, alpha)?;
        fill(out, out_len, c.iter())
    })
}

/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn igeo_surface_builtin(name: *const c_char, out: *mut *mut IgeoSurface) -> IgeoStatus {
    guard(|| {
        let s = immersion::surface_by_name(text(name, "name")?)?;
        store(out, IgeoSurface { inner: s })
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn igeo_surface_from_json(json: *const c_char, out: *mut *mut IgeoSurface) -> IgeoStatus {
    guard(|| {
        let v = parse(text(json, "json")?)?;
        let s = immersion::load_surface(&v)?;
        store(out, IgeoSurface { inner: s })
    })
}

/// # Safety
/// `surface` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn igeo_surface_dim(surface: *const IgeoSurface) -> usize {
    surface.as_ref().map_or(0, |s| s.inner.dim())
}

/// # Safety
/// `surface` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn igeo_surface_free(surface: *mut IgeoSurface) {
    if !surface.is_null() {
        drop(Box::from_raw(surface));
    }
}

/// Induced connection (`n³`), affine fundamental form (`n²`), shape operator
/// `S[k*n + i]` (`n²`) and transversal form (`n`) at `u`. Each output may be
/// null to skip it; non-null outputs hold at least the listed size.
///
/// # Safety
/// `u` must hold `len` values; each non-null output must be writable for its size.
#[no_mangle]
pub unsafe extern "C" fn igeo_decompose(
    surface: *const IgeoSurface,
    u: *const f64,
    len: usize,
    gamma: *mut f64,
    h: *mut f64,
    shape: *mut f64,
    alpha: *mut f64,
) -> IgeoStatus {
    guard(|| {
        let s = &handle(surface, "surface")?.inner;
        let n = s.dim();
        let d = s.decompose(point(u, len, n)?)?;
        if !gamma.is_null() {
            fill(gamma, n * n * n, d.gamma.iter())?;
        }
        if !h.is_null() {
            fill(h, n * n, d.h.iter())?;
        }
        if !shape.is_null() {
            fill(shape, n * n, d.shape.iter())?;
        }
        if !alpha.is_null() {
            fill(alpha, n, d.alpha.iter())?;
        }
        Ok(())
    })
}

/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn igeo_family_builtin(name: *const c_char, out: *mut *mut IgeoFamily) -> IgeoStatus {
    guard(|| {
        let f = dualflat::family(text(name, "name")?)?;
        store(out, IgeoFamily { inner: f })
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn igeo_family_from_json(json: *const c_char, out: *mut *mut IgeoFamily) -> IgeoStatus {
    guard(|| {
        let v = parse(text(json, "json")?)?;
        let f = dualflat::load_family(&v)?;
        store(out, IgeoFamily { inner: f })
    })
}

/// # Safety
/// `family` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn igeo_family_dim(family: *const IgeoFamily) -> usize {
    family.as_ref().map_or(0, |f| f.inner.dim())
}

/// # Safety
/// `family` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn igeo_family_free(family: *mut IgeoFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// Potential `K(θ)`.
///
/// # Safety
/// `theta` must hold `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn igeo_family_potential(
    family: *const IgeoFamily,
    theta: *const f64,
    len: usize,
    out: *mut f64,
) -> IgeoStatus {
    guard(|| {
        let f = &handle(family, "family")?.inner;
        let k = f.potential(point(theta, len, f.dim())?)?;
        fill(out, 1, [k].iter())
    })
}

/// Dual coordinates `η = ∇K(θ)` into `out` (`n` entries).
///
/// # Safety
/// `theta` must hold `len` values and `out` `out_len` writable values.
#[no_mangle]
pub unsafe extern "C" fn igeo_family_dual_coords(
    family: *const IgeoFamily,
    theta: *const f64,
    len: usize,
    out: *mut f64,
    out_len: usize,
) -> IgeoStatus {
    guard(|| {
        let f = &handle(family, "family")?.inner;
        let eta = f.dual_coords(point(theta, len, f.dim())?)?;
        fill(out, out_len, eta.iter())
    })
}

/// Natural parameters for dual coordinates `eta` into `out` (`n` entries).
///
/// # Safety
/// `eta` must hold `len` values and `out` `out_len` writable values.
#[no_mangle]
pub unsafe extern "C" fn igeo_family_invert_dual(
    family: *const IgeoFamily,
    eta: *const f64,
    len: usize,
    out: *mut f64,
    out_len: usize,
) -> IgeoStatus {
    guard(|| {
        let f = &handle(family, "family")?.inner;
        let p = f.invert_dual(point(eta, len, f.dim())?)?;
        fill(out, out_len, p.theta.iter())
    })
}

/// Runs a verification spec (or suite). On `IGEO_STATUS_OK`, `report_json`
/// receives the report (free with `igeo_string_free`) and `exit_code` the
/// command-line exit code: 0 when nothing failed, 1 otherwise.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn igeo_verify(spec_json: *const c_char, report_json: *mut *mut c_char, exit: *mut i32) -> IgeoStatus {
    guard(|| {
        if report_json.is_null() || exit.is_null() {
            return Err(Fail(IgeoStatus::NullPointer, "output pointer is null".into()));
        }
        let doc = SpecDoc::from_str(text(spec_json, "spec")?)?;
        let report = execute(Command::Verify, &doc, &Options::default())?;
        let s = CString::new(report.to_json()).map_err(|e| Fail(IgeoStatus::Schema, e.to_string()))?;
        *report_json = s.into_raw();
        *exit = exit_code(&report);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_classes() {
        assert_eq!(status_of(&Error::OutOfDomain { point: vec![] }), IgeoStatus::OutOfDomain);
        assert_eq!(status_of(&Error::DegenerateH { det: 0.0 }), IgeoStatus::Degenerate);
        assert_eq!(status_of(&Error::NonConvergent { iterations: 3 }), IgeoStatus::Numerical);
        assert_eq!(status_of(&Error::Schema("x".into())), IgeoStatus::Schema);
    }

    #[test]
    fn guard_catches_panics() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, IgeoStatus::Panic);
        assert!(!igeo_last_error().is_null());
    }
}
