//! C ABI over `omega_index`.
//!
//! Pairs live behind an opaque [`OmegaPair`] handle. Every fallible call
//! returns an [`OmegaStatus`]; on failure, [`omega_last_error_message`]
//! describes the most recent error on the calling thread. Panics are caught
//! at the boundary and reported as [`OmegaStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use omega_index::index::{build_q, omega_from_q, spectral_report, theorem_bound};
use omega_index::operators::{build_commuting_grid, build_harmonic};
use omega_index::{scale_admissible, Complex64, ComplexMatrix, OmegaError, OperatorPair, Orientation};

/// Opaque handle to a validated operator pair.
pub struct OmegaPair {
    inner: OperatorPair,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OmegaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    DimensionMismatch = 3,
    NonHermitianInput = 4,
    NotPositiveDefinite = 5,
    ConvergenceFailure = 6,
    NonFinite = 7,
    ConfigParse = 8,
    CutTooLarge = 9,
    CalibrationMissing = 10,
    InadmissibleCommutator = 11,
    UnstableCount = 12,
    GapViolation = 13,
    Io = 14,
    BufferTooSmall = 15,
    Panic = 16,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OmegaOrientation {
    Literal = 0,
    Conjugate = 1,
    /// The calibrated default.
    Default = 2,
}

impl From<OmegaOrientation> for Orientation {
    fn from(o: OmegaOrientation) -> Self {
        match o {
            OmegaOrientation::Literal => Orientation::Literal,
            OmegaOrientation::Conjugate => Orientation::Conjugate,
            OmegaOrientation::Default => Orientation::Default,
        }
    }
}

impl From<Orientation> for OmegaOrientation {
    fn from(o: Orientation) -> Self {
        match o {
            Orientation::Literal => OmegaOrientation::Literal,
            Orientation::Conjugate => OmegaOrientation::Conjugate,
            Orientation::Default => OmegaOrientation::Default,
        }
    }
}

/// Result of [`omega_compute`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OmegaSummary {
    pub omega: i64,
    pub epsilon: f64,
    pub defect: f64,
    pub theorem_bound: f64,
    /// Resolved; never `OMEGA_ORIENTATION_DEFAULT`.
    pub orientation: OmegaOrientation,
}

impl From<&OmegaError> for OmegaStatus {
    fn from(e: &OmegaError) -> Self {
        match e {
            OmegaError::DimensionMismatch(_) => OmegaStatus::DimensionMismatch,
            OmegaError::NonHermitianInput { .. } => OmegaStatus::NonHermitianInput,
            OmegaError::NotPositiveDefinite { .. } => OmegaStatus::NotPositiveDefinite,
            OmegaError::ConvergenceFailure => OmegaStatus::ConvergenceFailure,
            OmegaError::NonFinite { .. } => OmegaStatus::NonFinite,
            OmegaError::InvalidParameter(_) => OmegaStatus::InvalidParameter,
            OmegaError::ConfigParse(_) => OmegaStatus::ConfigParse,
            OmegaError::CutTooLarge { .. } => OmegaStatus::CutTooLarge,
            OmegaError::CalibrationMissing => OmegaStatus::CalibrationMissing,
            OmegaError::InadmissibleCommutator { .. } => OmegaStatus::InadmissibleCommutator,
            OmegaError::UnstableCount { .. } => OmegaStatus::UnstableCount,
            OmegaError::GapViolation { .. } => OmegaStatus::GapViolation,
            OmegaError::Io(_) => OmegaStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: OmegaStatus, message: &str) -> OmegaStatus {
    set_last_error(message);
    status
}

/// Runs `body`, turning errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), OmegaStatus>) -> OmegaStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => OmegaStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(OmegaStatus::Panic, "panic inside omega_index"),
    }
}

fn lift<T>(r: Result<T, OmegaError>) -> Result<T, OmegaStatus> {
    r.map_err(|e| fail(OmegaStatus::from(&e), &e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), OmegaStatus> {
    if p.is_null() {
        Err(fail(OmegaStatus::NullPointer, &format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn into_handle(pair: OperatorPair, out: *mut *mut OmegaPair) {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(OmegaPair { inner: pair })) };
}

/// Message for the last failure on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn omega_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static, NUL-terminated library version.
#[no_mangle]
pub extern "C" fn omega_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Oscillator position and momentum scaled by `sqrt(lambda)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn omega_pair_harmonic(lambda: f64, dim: usize, out: *mut *mut OmegaPair) -> OmegaStatus {
    guard(|| {
        non_null(out, "out")?;
        into_handle(lift(build_harmonic(lambda, dim))?, out);
        Ok(())
    })
}

/// Commuting diagonal pair on the lattice disc of the given radius.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn omega_pair_commuting_grid(
    radius: usize,
    scale: f64,
    out: *mut *mut OmegaPair,
) -> OmegaStatus {
    guard(|| {
        non_null(out, "out")?;
        into_handle(lift(build_commuting_grid(radius, scale))?, out);
        Ok(())
    })
}

unsafe fn read_matrix(re: *const f64, im: *const f64, dim: usize) -> Result<ComplexMatrix, OmegaStatus> {
    let n = dim * dim;
    // SAFETY: the caller promises `dim * dim` readable doubles behind each non-null pointer.
    let re = unsafe { std::slice::from_raw_parts(re, n) };
    let entries: Vec<Complex64> = if im.is_null() {
        re.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    } else {
        let im = unsafe { std::slice::from_raw_parts(im, n) };
        re.iter().zip(im).map(|(&x, &y)| Complex64::new(x, y)).collect()
    };
    lift(ComplexMatrix::from_row_major(dim, dim, &entries))
}

/// Pair from row-major `dim × dim` arrays. Imaginary parts may be null.
///
/// # Safety
/// `a_re`, `b_re` and any non-null `a_im`, `b_im` must point to `dim * dim`
/// doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn omega_pair_from_row_major(
    a_re: *const f64,
    a_im: *const f64,
    b_re: *const f64,
    b_im: *const f64,
    dim: usize,
    boundary_window: usize,
    out: *mut *mut OmegaPair,
) -> OmegaStatus {
    guard(|| {
        non_null(out, "out")?;
        non_null(a_re, "a_re")?;
        non_null(b_re, "b_re")?;
        let a = unsafe { read_matrix(a_re, a_im, dim) }?;
        let b = unsafe { read_matrix(b_re, b_im, dim) }?;
        into_handle(lift(OperatorPair::new(a, b, "external", None, boundary_window))?, out);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `pair` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn omega_pair_free(pair: *mut OmegaPair) {
    if !pair.is_null() {
        drop(unsafe { Box::from_raw(pair) });
    }
}

/// Dimension of the pair, 0 for null.
///
/// # Safety
/// `pair` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn omega_pair_dim(pair: *const OmegaPair) -> usize {
    unsafe { pair.as_ref() }.map_or(0, |p| p.inner.dim())
}

/// Rescales the pair so that its commutator is at most `target`; writes a
/// new handle and the scale factor applied to both operators.
///
/// # Safety
/// `pair` must be a live handle; `out` and `scale` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn omega_pair_scale_admissible(
    pair: *const OmegaPair,
    target: f64,
    out: *mut *mut OmegaPair,
    scale: *mut f64,
) -> OmegaStatus {
    guard(|| {
        non_null(pair, "pair")?;
        non_null(out, "out")?;
        non_null(scale, "scale")?;
        let scaled = lift(scale_admissible(&unsafe { &*pair }.inner, target))?;
        unsafe { *scale = scaled.lambda_a };
        into_handle(scaled.pair, out);
        Ok(())
    })
}

/// The index over `n_cuts` cut sizes, which must all agree.
///
/// # Safety
/// `pair` must be a live handle, `cuts` must point to `n_cuts` values and
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn omega_compute(
    pair: *const OmegaPair,
    cuts: *const usize,
    n_cuts: usize,
    orientation: OmegaOrientation,
    gap_floor: f64,
    out: *mut OmegaSummary,
) -> OmegaStatus {
    guard(|| {
        non_null(pair, "pair")?;
        non_null(cuts, "cuts")?;
        non_null(out, "out")?;
        let cuts = unsafe { std::slice::from_raw_parts(cuts, n_cuts) };
        let qb = lift(build_q(&unsafe { &*pair }.inner, orientation.into()))?;
        let r = lift(omega_from_q(&qb, cuts, gap_floor))?;
        unsafe {
            *out = OmegaSummary {
                omega: r.omega,
                epsilon: r.epsilon,
                defect: r.defect,
                theorem_bound: r.theorem_bound,
                orientation: r.orientation.into(),
            }
        };
        Ok(())
    })
}

/// Ascending eigenvalues of the corner of size `2 * cut`.
///
/// Writes the count to `len`. If `capacity` is too small nothing else is
/// written and `OMEGA_STATUS_BUFFER_TOO_SMALL` is returned, so a call with
/// capacity 0 queries the size.
///
/// # Safety
/// `pair` must be a live handle, `values` must hold `capacity` doubles (may
/// be null when `capacity` is 0) and `len` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn omega_corner_spectrum(
    pair: *const OmegaPair,
    cut: usize,
    orientation: OmegaOrientation,
    values: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> OmegaStatus {
    guard(|| {
        non_null(pair, "pair")?;
        non_null(len, "len")?;
        let qb = lift(build_q(&unsafe { &*pair }.inner, orientation.into()))?;
        if cut > qb.interior() {
            let e = OmegaError::CutTooLarge { cut, limit: qb.interior() };
            return Err(fail(OmegaStatus::from(&e), &e.to_string()));
        }
        let report = lift(spectral_report(&qb, cut))?;
        let n = report.eigenvalues.len();
        unsafe { *len = n };
        if capacity < n {
            return Err(fail(OmegaStatus::BufferTooSmall, &format!("need room for {n} values, got {capacity}")));
        }
        non_null(values, "values")?;
        unsafe { ptr::copy_nonoverlapping(report.eigenvalues.as_ptr(), values, n) };
        Ok(())
    })
}

/// `(4ε − 2ε²)/(1 − ε)²` for `ε` in `[0, 1)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn omega_theorem_bound(epsilon: f64, out: *mut f64) -> OmegaStatus {
    guard(|| {
        non_null(out, "out")?;
        unsafe { *out = lift(theorem_bound(epsilon))? };
        Ok(())
    })
}
