//! C ABI for `pdmchain`.
//!
//! Operators and spectra are opaque handles created and destroyed through
//! this interface. Every function returns a [`PdmStatus`]; on failure a
//! message is available from [`pdm_last_error_message`] on the same thread.
//! Panics are caught at the boundary and reported as [`PdmStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pdmchain::eigensolve::{self, sturm_count};
use pdmchain::observables::participation_ratio;
use pdmchain::{build_full, build_h0, build_h1, ChainSpec, Error, SolverOptions, Spectrum, TridiagonalOperator, Variant};

/// Status codes returned by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotConverged = 3,
    Domain = 4,
    Panic = 5,
}

/// Which operator [`pdm_operator_build`] constructs.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdmOperatorKind {
    /// Uniform hopping chain.
    Uniform = 0,
    /// Pure mass-gradient term.
    Gradient = 1,
    /// Full operator, canonical sign convention.
    Full = 2,
    /// Full operator with the literal-sum hopping.
    FullLiteral = 3,
}

/// Opaque tridiagonal operator.
pub struct PdmOperator {
    inner: TridiagonalOperator,
}

/// Opaque computed spectrum.
pub struct PdmSpectrum {
    inner: Spectrum,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> PdmStatus {
    match err {
        Error::NotConverged { .. } => PdmStatus::NotConverged,
        Error::Domain { .. } | Error::IndexOutOfRange { .. } | Error::NotNormalized(_) | Error::ZeroVector => {
            PdmStatus::Domain
        }
        _ => PdmStatus::InvalidArgument,
    }
}

fn fail(status: PdmStatus, msg: impl Into<String>) -> PdmStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), (PdmStatus, String)>) -> PdmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PdmStatus::Ok,
        Ok(Err((status, msg))) => fail(status, msg),
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(PdmStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn lift(err: Error) -> (PdmStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (PdmStatus, String) {
    (PdmStatus::NullPointer, format!("{what} is null"))
}

/// Builds an operator for `n_sites` sites and gradient `gamma`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn pdm_operator_build(
    kind: PdmOperatorKind,
    n_sites: usize,
    gamma: f64,
    out: *mut *mut PdmOperator,
) -> PdmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = ChainSpec::new(n_sites, gamma).map_err(lift)?;
        let inner = match kind {
            PdmOperatorKind::Uniform => build_h0(&spec),
            PdmOperatorKind::Gradient => build_h1(&spec),
            PdmOperatorKind::Full => build_full(&spec),
            PdmOperatorKind::FullLiteral => build_full(&spec.with_variant(Variant::LiteralSum)),
        };
        *out = Box::into_raw(Box::new(PdmOperator { inner }));
        Ok(())
    })
}

/// Builds an operator from `n` diagonal and `n - 1` off-diagonal entries.
///
/// # Safety
/// `diag` must point to `n` doubles, `off` to `n - 1` doubles (may be null
/// when `n == 1`), and `out` to storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn pdm_operator_from_arrays(
    diag: *const f64,
    off: *const f64,
    n: usize,
    out: *mut *mut PdmOperator,
) -> PdmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if diag.is_null() {
            return Err(null("diag"));
        }
        if n > 1 && off.is_null() {
            return Err(null("off"));
        }
        let d = std::slice::from_raw_parts(diag, n).to_vec();
        let e = if n > 1 {
            std::slice::from_raw_parts(off, n - 1).to_vec()
        } else {
            Vec::new()
        };
        let inner = TridiagonalOperator::new(d, e).map_err(lift)?;
        *out = Box::into_raw(Box::new(PdmOperator { inner }));
        Ok(())
    })
}

/// Releases an operator. Null is ignored.
///
/// # Safety
/// `op` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pdm_operator_free(op: *mut PdmOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Writes the number of sites.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pdm_operator_len(op: *const PdmOperator, out: *mut usize) -> PdmStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = op.inner.len();
        Ok(())
    })
}

/// Writes the Gershgorin enclosure of the spectrum.
///
/// # Safety
/// `op` must be a live handle; `lo` and `hi` writable.
#[no_mangle]
pub unsafe extern "C" fn pdm_operator_gershgorin(op: *const PdmOperator, lo: *mut f64, hi: *mut f64) -> PdmStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        let lo = lo.as_mut().ok_or_else(|| null("lo"))?;
        let hi = hi.as_mut().ok_or_else(|| null("hi"))?;
        (*lo, *hi) = op.inner.gershgorin_bounds();
        Ok(())
    })
}

/// Writes the number of eigenvalues strictly below `x`.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pdm_operator_sturm_count(op: *const PdmOperator, x: f64, out: *mut usize) -> PdmStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if x.is_nan() {
            return Err((PdmStatus::InvalidArgument, "x is NaN".into()));
        }
        *out = sturm_count(&op.inner, x);
        Ok(())
    })
}

/// Computes all eigenvalues, and eigenvectors when `with_vectors` is non-zero.
/// `tol` is relative to the spectral width; pass 0 for the default.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pdm_spectrum_compute(
    op: *const PdmOperator,
    tol: f64,
    with_vectors: i32,
    out: *mut *mut PdmSpectrum,
) -> PdmStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut opts = SolverOptions::default().with_vectors(with_vectors != 0);
        if tol != 0.0 {
            opts = opts.with_tol(tol);
        }
        opts.validate().map_err(lift)?;
        let inner = eigensolve::full_diagonalize(&op.inner, &opts).map_err(lift)?;
        *out = Box::into_raw(Box::new(PdmSpectrum { inner }));
        Ok(())
    })
}

/// Releases a spectrum. Null is ignored.
///
/// # Safety
/// `s` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pdm_spectrum_free(s: *mut PdmSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Writes the number of eigenvalues.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pdm_spectrum_len(s: *const PdmSpectrum, out: *mut usize) -> PdmStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("spectrum"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = s.inner.len();
        Ok(())
    })
}

/// Copies the ascending eigenvalues into `buf`, which holds `cap` doubles.
///
/// # Safety
/// `s` must be a live handle; `buf` must point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pdm_spectrum_eigenvalues(s: *const PdmSpectrum, buf: *mut f64, cap: usize) -> PdmStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("spectrum"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let v = &s.inner.eigenvalues;
        if cap < v.len() {
            return Err((PdmStatus::InvalidArgument, format!("buffer holds {cap}, need {}", v.len())));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
        Ok(())
    })
}

/// Copies eigenvector `index` (0-based, ascending energy) into `buf`.
///
/// # Safety
/// `s` must be a live handle; `buf` must point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pdm_spectrum_eigenvector(
    s: *const PdmSpectrum,
    index: usize,
    buf: *mut f64,
    cap: usize,
) -> PdmStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("spectrum"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if s.inner.eigenvectors.is_none() {
            return Err((PdmStatus::InvalidArgument, "spectrum was computed without vectors".into()));
        }
        let v = s.inner.eigenvector(index).ok_or_else(|| {
            lift(Error::IndexOutOfRange {
                index,
                n: s.inner.len(),
            })
        })?;
        if cap < v.len() {
            return Err((PdmStatus::InvalidArgument, format!("buffer holds {cap}, need {}", v.len())));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
        Ok(())
    })
}

/// Participation ratio of a unit-norm vector of length `n`.
///
/// # Safety
/// `coeffs` must point to `n` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn pdm_participation_ratio(coeffs: *const f64, n: usize, out: *mut f64) -> PdmStatus {
    guard(|| {
        if coeffs.is_null() {
            return Err(null("coeffs"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = participation_ratio(std::slice::from_raw_parts(coeffs, n)).map_err(lift)?;
        Ok(())
    })
}

/// Message for the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pdm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pdm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
