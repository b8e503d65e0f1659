//! C ABI over `funcoord`.
//!
//! Every function returns an [`FcStatus`]; results go through out-pointers.
//! On failure a message is kept per thread and read back with
//! [`fc_last_error_message`]. Complex arrays are interleaved `re, im`
//! doubles. Handles are opaque and released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;
use std::sync::Arc;

use funcoord::config::Experiment;
use funcoord::experiments;
use funcoord::grid::{Grid, SampledFunction, Side};
use funcoord::kernels::Kernel;
use funcoord::linalg::CMatrix;
use funcoord::projective::geodesic_residual;
use funcoord::spaces::{dual_metric_identity, space_from_kernel, CoordinateSpace};
use funcoord::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Singular = 4,
    Indefinite = 5,
    NotHermitian = 6,
    Config = 7,
    Io = 8,
    Numerical = 9,
    Panic = 10,
}

/// A one-dimensional grid.
pub struct FcGrid {
    grid: Arc<Grid>,
}

/// A coordinate space on a grid, built from a kernel.
pub struct FcSpace {
    space: CoordinateSpace,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FcStatus {
    match e {
        Error::InvalidArgument(_)
        | Error::InvalidGrid(_)
        | Error::Distributional { .. }
        | Error::NotSymmetric(_)
        | Error::IndexOutOfRange { .. }
        | Error::Expr(_) => FcStatus::InvalidArgument,
        Error::DimensionMismatch(_) | Error::GridMismatch(_) | Error::SideMismatch { .. } => {
            FcStatus::DimensionMismatch
        }
        Error::Singular { .. } | Error::ZeroBasePoint => FcStatus::Singular,
        Error::Indefinite { .. } => FcStatus::Indefinite,
        Error::NotHermitian { .. } => FcStatus::NotHermitian,
        Error::Config(_) => FcStatus::Config,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => FcStatus::Io,
        _ => FcStatus::Numerical,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, records any failure and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FcStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            FcStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            FcStatus::Panic
        }
    }
}

unsafe fn non_null<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Lib(Error::InvalidArgument(format!("{what} is not valid UTF-8"))))
}

unsafe fn complex_slice(p: *const f64, n: usize, what: &'static str) -> Result<Vec<Complex64>, Fail> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    let raw = slice::from_raw_parts(p, 2 * n);
    Ok(raw.chunks_exact(2).map(|z| Complex64::new(z[0], z[1])).collect())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn fc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Grid of `points` nodes on `[lo, hi]`; periodic grids leave out `hi`.
///
/// # Safety
/// `out_grid` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn fc_grid_line(
    lo: f64,
    hi: f64,
    points: usize,
    periodic: bool,
    out_grid: *mut *mut FcGrid,
) -> FcStatus {
    guard(|| {
        let slot = out(out_grid, "out_grid")?;
        let grid = Grid::line(lo, hi, points, periodic)?;
        *slot = Box::into_raw(Box::new(FcGrid { grid }));
        Ok(())
    })
}

/// Number of nodes.
///
/// # Safety
/// `grid` must come from [`fc_grid_line`]; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fc_grid_len(grid: *const FcGrid, out_len: *mut usize) -> FcStatus {
    guard(|| {
        let g = non_null(grid, "grid")?;
        *out(out_len, "out_len")? = g.grid.len();
        Ok(())
    })
}

/// Copies node coordinates into `coords` (capacity `len`).
///
/// # Safety
/// `coords` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fc_grid_nodes(grid: *const FcGrid, coords: *mut f64, len: usize) -> FcStatus {
    guard(|| {
        let g = non_null(grid, "grid")?;
        if len != g.grid.len() {
            return Err(Error::DimensionMismatch(format!("buffer of {len} for {} nodes", g.grid.len())).into());
        }
        if coords.is_null() {
            return Err(Fail::Null("coords"));
        }
        let dst = slice::from_raw_parts_mut(coords, len);
        for (d, x) in dst.iter_mut().zip(g.grid.nodes()) {
            *d = x[0];
        }
        Ok(())
    })
}

/// Releases a grid; null is ignored.
///
/// # Safety
/// `grid` must come from [`fc_grid_line`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fc_grid_free(grid: *mut FcGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Space with form `∫∫ k(x,y) conj f(x) g(y)` for a named kernel family
/// (`gauss_metric`, `gauss_rho`, `dirac`, ...). `scale` applies to
/// `gauss_metric`.
///
/// # Safety
/// `grid` must be live, `kernel` a NUL-terminated string, `out_space` writable.
#[no_mangle]
pub unsafe extern "C" fn fc_space_from_kernel(
    grid: *const FcGrid,
    kernel: *const c_char,
    scale: f64,
    out_space: *mut *mut FcSpace,
) -> FcStatus {
    guard(|| {
        let g = non_null(grid, "grid")?;
        let name = c_str(kernel, "kernel")?;
        let slot = out(out_space, "out_space")?;
        let k = Kernel::from_name(name, &[1], scale)?;
        let space = space_from_kernel(&k, &g.grid, Side::Primal)?;
        *slot = Box::into_raw(Box::new(FcSpace { space }));
        Ok(())
    })
}

/// `(f, g)` in the space; `f` and `g` are interleaved complex samples of
/// length `2 * len`.
///
/// # Safety
/// `space` must be live; `f` and `g` must hold `2 * len` doubles; `out_re`
/// and `out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fc_space_inner(
    space: *const FcSpace,
    f: *const f64,
    g: *const f64,
    len: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> FcStatus {
    guard(|| {
        let s = &non_null(space, "space")?.space;
        let grid = s.grid().clone();
        let wrap = |v: Vec<Complex64>| SampledFunction::new(grid.clone(), v.into(), Side::Primal);
        let fv = wrap(complex_slice(f, len, "f")?)?;
        let gv = wrap(complex_slice(g, len, "g")?)?;
        let z = s.inner(&fv, &gv)?;
        *out(out_re, "out_re")? = z.re;
        *out(out_im, "out_im")? = z.im;
        Ok(())
    })
}

/// Releases a space; null is ignored.
///
/// # Safety
/// `space` must come from [`fc_space_from_kernel`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fc_space_free(space: *mut FcSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Relative deviation of `ρρ*` (Gaussian `ρ`) from the assembled unit-height
/// Gaussian metric on a non-periodic line grid, after the best scalar.
/// The integration variable runs over the grid widened by `pad`.
///
/// # Safety
/// `grid` must be live; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn fc_dual_metric_deviation(
    grid: *const FcGrid,
    pad: f64,
    out_deviation: *mut f64,
    out_scalar: *mut f64,
) -> FcStatus {
    guard(|| {
        let g = non_null(grid, "grid")?;
        let rep = dual_metric_identity(&Kernel::GaussRho, &Kernel::gauss_metric(), &g.grid, pad)?;
        *out(out_deviation, "out_deviation")? = rep.deviation;
        *out(out_scalar, "out_scalar")? = rep.scalar.re;
        Ok(())
    })
}

/// Largest geodesic-equation residual along `e^{−iAτ}φ₀` for Hermitian `A`
/// (row-major, interleaved, `n × n`) and unit `φ₀`, over `ntaus` times.
///
/// # Safety
/// `a` must hold `2 n²` doubles, `phi0` `2 n`, `taus` `ntaus`; `out_residual`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn fc_geodesic_residual(
    n: usize,
    a: *const f64,
    phi0: *const f64,
    taus: *const f64,
    ntaus: usize,
    out_residual: *mut f64,
) -> FcStatus {
    guard(|| {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()).into());
        }
        let entries = complex_slice(a, n * n, "a")?;
        let am = CMatrix::from_row_slice(n, n, &entries);
        let phi = complex_slice(phi0, n, "phi0")?.into();
        let ts: &[f64] = if ntaus == 0 {
            &[]
        } else if taus.is_null() {
            return Err(Fail::Null("taus"));
        } else {
            slice::from_raw_parts(taus, ntaus)
        };
        *out(out_residual, "out_residual")? = geodesic_residual(&am, &phi, ts)?;
        Ok(())
    })
}

/// Runs a CLI experiment (`dual-metric`, `eigen`, `transform-check`, `embed`,
/// `geodesic`, `repro`) and writes its CSV tables and JSON summary to
/// `out_dir`. `config_text` may be null for the defaults. `out_passed` is set
/// to whether every tolerance was met.
///
/// # Safety
/// String arguments must be NUL-terminated; `out_passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fc_run_experiment(
    name: *const c_char,
    config_text: *const c_char,
    seed: u64,
    out_dir: *const c_char,
    out_passed: *mut bool,
) -> FcStatus {
    guard(|| {
        let experiment: Experiment =
            c_str(name, "name")?.parse().map_err(|m: String| Error::InvalidArgument(m))?;
        let text = if config_text.is_null() { None } else { Some(c_str(config_text, "config_text")?) };
        let dir = c_str(out_dir, "out_dir")?;
        let passed = out(out_passed, "out_passed")?;
        let (config, tol) = experiments::configure(experiment, text, Some(seed), &[])?;
        let report = experiments::run(&config, &tol)?;
        report.write(Path::new(dir))?;
        *passed = report.passed();
        Ok(())
    })
}
