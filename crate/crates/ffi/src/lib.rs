//! C ABI for the `fraclap` library.
//!
//! Every function returns a status code (`FL_OK` on success) and writes its
//! results through out-pointers. Weight tables live behind the opaque
//! `FlWeightSet` handle, created by `fl_weights_new` and released with
//! `fl_weights_free`. After a failure, `fl_last_error_message` returns the
//! message of the last error raised on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fraclap::error::Error;
use fraclap::grid::GridField;
use fraclap::operator::{apply_direct, apply_fast, energy};
use fraclap::specfun::riesz_constant;
use fraclap::symbol::symbol_from_weights;
use fraclap::weights::{cfl_cmax, make_weights, WeightFamily, WeightSet};

pub const FL_OK: c_int = 0;
/// Invalid argument: parameter out of range, mismatched lengths, etc.
pub const FL_ERR_DOMAIN: c_int = 1;
/// Numerical failure inside the library.
pub const FL_ERR_NUMERICAL: c_int = 2;
pub const FL_ERR_NULL: c_int = 3;
/// Internal panic caught at the boundary.
pub const FL_ERR_PANIC: c_int = 4;

pub const FL_FAMILY_SP: c_int = 0;
pub const FL_FAMILY_PER: c_int = 1;
pub const FL_FAMILY_GL: c_int = 2;
pub const FL_FAMILY_T: c_int = 3;
pub const FL_FAMILY_Q: c_int = 4;

/// Opaque weight table.
pub struct FlWeightSet {
    inner: WeightSet,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

enum Failure {
    Lib(Error),
    Null(&'static str),
    Arg(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> c_int {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FL_OK,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            if e.is_domain() {
                FL_ERR_DOMAIN
            } else {
                FL_ERR_NUMERICAL
            }
        }
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("null pointer passed as {name}"));
            FL_ERR_NULL
        }
        Ok(Err(Failure::Arg(msg))) => {
            set_error(msg);
            FL_ERR_DOMAIN
        }
        Err(_) => {
            set_error("internal panic".into());
            FL_ERR_PANIC
        }
    }
}

fn family(code: c_int) -> Result<WeightFamily, Failure> {
    match code {
        FL_FAMILY_SP => Ok(WeightFamily::Sp),
        FL_FAMILY_PER => Ok(WeightFamily::Per),
        FL_FAMILY_GL => Ok(WeightFamily::Gl),
        FL_FAMILY_T => Ok(WeightFamily::T),
        FL_FAMILY_Q => Ok(WeightFamily::Q),
        _ => Err(Failure::Arg(format!("unknown weight family code {code}"))),
    }
}

unsafe fn handle<'a>(ws: *const FlWeightSet) -> Result<&'a WeightSet, Failure> {
    ws.as_ref().map(|w| &w.inner).ok_or(Failure::Null("weight set"))
}

unsafe fn input<'a>(p: *const f64, n: usize, name: &'static str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn output<'a>(p: *mut f64, n: usize, name: &'static str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

unsafe fn scalar_out(p: *mut f64, v: f64) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null("out"));
    }
    *p = v;
    Ok(())
}

fn field(ws: &WeightSet, j0: i64, u: &[f64]) -> Result<GridField, Failure> {
    if u.is_empty() {
        return Err(Failure::Arg("field must have at least one sample".into()));
    }
    Ok(GridField::new(ws.h(), j0, u.to_vec())?)
}

/// Builds the weights `w_0 .. w_m` of `family` for `alpha` and spacing `h`.
/// On success `*out` holds a new handle owned by the caller.
///
/// # Safety
/// `out` must be null or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn fl_weights_new(
    family_code: c_int,
    alpha: f64,
    h: f64,
    m: usize,
    out: *mut *mut FlWeightSet,
) -> c_int {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = ptr::null_mut();
        let ws = make_weights(family(family_code)?, alpha, h, m)?;
        *out = Box::into_raw(Box::new(FlWeightSet { inner: ws }));
        Ok(())
    })
}

/// Releases a handle from `fl_weights_new`. Null is ignored.
///
/// # Safety
/// `ws` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fl_weights_free(ws: *mut FlWeightSet) {
    if !ws.is_null() {
        drop(Box::from_raw(ws));
    }
}

/// Number of stored weights, `m + 1`; zero for a null handle.
///
/// # Safety
/// `ws` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_weights_len(ws: *const FlWeightSet) -> usize {
    ws.as_ref().map_or(0, |w| w.inner.m() + 1)
}

/// Copies `w_0 .. w_m` into `buf`, which must hold `fl_weights_len` values.
///
/// # Safety
/// `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn fl_weights_copy(ws: *const FlWeightSet, buf: *mut f64, len: usize) -> c_int {
    guard(|| {
        let w = handle(ws)?.weights();
        if len < w.len() {
            return Err(Failure::Arg(format!("buffer holds {len} values, {} needed", w.len())));
        }
        output(buf, w.len(), "buf")?.copy_from_slice(w);
        Ok(())
    })
}

/// Closed-form `(-h^alpha w_0)^{-1}`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn fl_cfl_cmax(family_code: c_int, alpha: f64, out: *mut f64) -> c_int {
    guard(|| scalar_out(out, cfl_cmax(family(family_code)?, alpha)?))
}

/// Normalization constant `C_{1,alpha}` of the singular integral.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn fl_riesz_constant(alpha: f64, out: *mut f64) -> c_int {
    guard(|| scalar_out(out, riesz_constant(alpha)?))
}

/// Symbol `M(xi)` of the stored weights.
///
/// # Safety
/// `ws` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn fl_symbol(ws: *const FlWeightSet, xi: f64, out: *mut f64) -> c_int {
    guard(|| scalar_out(out, symbol_from_weights(handle(ws)?, xi)))
}

/// Direct sum of the scheme at every sample of the field `u_{j0} ..
/// u_{j0+n-1}`, extended by zero outside the window.
///
/// # Safety
/// `u` must be valid for `n` reads and `out` for `n` writes.
#[no_mangle]
pub unsafe extern "C" fn fl_apply_direct(
    ws: *const FlWeightSet,
    j0: i64,
    u: *const f64,
    n: usize,
    out: *mut f64,
) -> c_int {
    guard(|| {
        let ws = handle(ws)?;
        let f = field(ws, j0, input(u, n, "u")?)?;
        let v = apply_direct(ws, &f, f.indices())?;
        output(out, n, "out")?.copy_from_slice(&v);
        Ok(())
    })
}

/// FFT evaluation of the same sum as `fl_apply_direct`.
///
/// # Safety
/// `u` must be valid for `n` reads and `out` for `n` writes.
#[no_mangle]
pub unsafe extern "C" fn fl_apply_fast(ws: *const FlWeightSet, u: *const f64, n: usize, out: *mut f64) -> c_int {
    guard(|| {
        let ws = handle(ws)?;
        let f = field(ws, 0, input(u, n, "u")?)?;
        let v = apply_fast(ws, &f)?;
        output(out, n, "out")?.copy_from_slice(&v);
        Ok(())
    })
}

/// Discrete energy of the zero-extended field.
///
/// # Safety
/// `u` must be valid for `n` reads and `out` for a write.
#[no_mangle]
pub unsafe extern "C" fn fl_energy(ws: *const FlWeightSet, u: *const f64, n: usize, out: *mut f64) -> c_int {
    guard(|| {
        let ws = handle(ws)?;
        let f = field(ws, 0, input(u, n, "u")?)?;
        scalar_out(out, energy(ws, &f)?)
    })
}

/// Copies the last error message of this thread into `buf` as a NUL
/// terminated string, truncated to `len - 1` bytes. Returns the length the
/// full message needs including the terminator; pass a null `buf` to query
/// it.
///
/// # Safety
/// `buf` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn fl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}
