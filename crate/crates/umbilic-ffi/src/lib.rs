//! C ABI over the umbilic crate.
//!
//! Surfaces are opaque handles created by `umb_surface_*` constructors and
//! released with `umb_surface_free`. Fallible calls return an [`UmbStatus`]
//! and write results through out-pointers; `umb_last_error_message` holds a
//! thread-local description of the most recent failure. All functions catch
//! panics at the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use umbilic::error::Error;
use umbilic::surfaces::SurfaceSpec;
use umbilic::{index, locus, tensor};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UmbStatus {
    Ok = 0,
    NullArgument,
    InvalidArgument,
    ParseError,
    AxisPoint,
    OffSurface,
    LeviDegenerate,
    NoConvergence,
    NoZeroFound,
    RankDeficient,
    NotUmbilical,
    CurveMeetsLocus,
    SamplingUnstable,
    UnstableIndex,
    BoundaryRoot,
    DegenerateWinding,
    Internal,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(e: &Error) -> UmbStatus {
    match e {
        Error::Jet(_) => UmbStatus::InvalidArgument,
        Error::InvalidSurface(_) | Error::NotRealSymmetric | Error::PscGuard(_) => {
            UmbStatus::InvalidArgument
        }
        Error::AxisPoint => UmbStatus::AxisPoint,
        Error::OffSurface(_) => UmbStatus::OffSurface,
        Error::ChartNoConvergence(_) => UmbStatus::NoConvergence,
        Error::LeviDegenerate(_) | Error::ScanAborted { .. } => UmbStatus::LeviDegenerate,
        Error::GridTooCoarse => UmbStatus::InvalidArgument,
        Error::NoZeroFound(_) => UmbStatus::NoZeroFound,
        Error::RankDeficientLocus => UmbStatus::RankDeficient,
        Error::NotUmbilical(..) => UmbStatus::NotUmbilical,
        Error::CurveMeetsLocus(..) => UmbStatus::CurveMeetsLocus,
        Error::SamplingUnstable(_) => UmbStatus::SamplingUnstable,
        Error::UnstableIndex => UmbStatus::UnstableIndex,
        Error::BoundaryRoot => UmbStatus::BoundaryRoot,
        Error::DegenerateWinding => UmbStatus::DegenerateWinding,
        Error::WindingMismatch(..) => UmbStatus::Internal,
        Error::Config(_) | Error::Toml(_) | Error::Json(_) => UmbStatus::ParseError,
        Error::Io(_) => UmbStatus::ParseError,
    }
}

/// Run a fallible body, translating errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), Error>) -> UmbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => UmbStatus::Ok,
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            UmbStatus::Internal
        }
    }
}

/// Opaque surface handle.
pub struct UmbSurface {
    inner: SurfaceSpec,
}

/// One evaluated point: chart parameters, position, `det A3`, `J`, `Q`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct UmbSample {
    pub theta: [f64; 3],
    pub z_re: f64,
    pub z_im: f64,
    pub w_re: f64,
    pub w_im: f64,
    pub det_re: f64,
    pub det_im: f64,
    pub j_on_m: f64,
    pub q_re: f64,
    pub q_im: f64,
    pub abs_q: f64,
    pub row_scale: f64,
}

/// Extremes of a grid scan.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct UmbScanSummary {
    pub min_abs_q: f64,
    pub median_abs_q: f64,
    pub min_abs_det: f64,
    pub min_theta: [f64; 3],
}

/// A refined umbilical zero.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct UmbRefined {
    pub theta: [f64; 3],
    pub z_re: f64,
    pub z_im: f64,
    pub w_re: f64,
    pub w_im: f64,
    pub abs_q: f64,
    pub scale: f64,
    pub iterations: usize,
}

/// Winding number and exact rational index of a closed curve.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct UmbIndex {
    pub winding: i64,
    pub index_num: i64,
    pub index_den: i64,
    pub n_samples: usize,
    pub max_phase_step: f64,
}

/// Message describing the most recent error on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn umb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// The unit sphere. Never fails; free with `umb_surface_free`.
#[no_mangle]
pub extern "C" fn umb_surface_sphere() -> *mut UmbSurface {
    Box::into_raw(Box::new(UmbSurface { inner: SurfaceSpec::sphere() }))
}

fn construct(
    out: *mut *mut UmbSurface,
    make: impl FnOnce() -> Result<SurfaceSpec, Error>,
) -> UmbStatus {
    if out.is_null() {
        set_error("null out pointer");
        return UmbStatus::NullArgument;
    }
    guard(|| {
        let surface = make()?;
        unsafe { *out = Box::into_raw(Box::new(UmbSurface { inner: surface })) };
        Ok(())
    })
}

/// Log-torus surface `(log|z|)^2 + (log|w|)^2 = eps^2`.
/// # Safety
/// `out` must be a valid pointer to writable surface-handle storage.
#[no_mangle]
pub unsafe extern "C" fn umb_surface_log_torus(eps: f64, out: *mut *mut UmbSurface) -> UmbStatus {
    construct(out, || SurfaceSpec::log_torus(eps))
}

/// Real ellipsoid with parameters `A, B >= 0`, `AB != 0`, and `eps > 0`.
/// # Safety
/// `out` must be a valid pointer to writable surface-handle storage.
#[no_mangle]
pub unsafe extern "C" fn umb_surface_ellipsoid(
    a: f64,
    b: f64,
    eps: f64,
    out: *mut *mut UmbSurface,
) -> UmbStatus {
    construct(out, || SurfaceSpec::ellipsoid(a, b, eps))
}

/// Parse a TOML or JSON surface description (same format as the CLI).
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer
/// to writable surface-handle storage.
#[no_mangle]
pub unsafe extern "C" fn umb_surface_parse(text: *const c_char, out: *mut *mut UmbSurface) -> UmbStatus {
    if text.is_null() {
        set_error("null text pointer");
        return UmbStatus::NullArgument;
    }
    construct(out, || {
        let text = unsafe { CStr::from_ptr(text) }
            .to_str()
            .map_err(|_| Error::Config("surface description is not valid UTF-8".into()))?;
        SurfaceSpec::parse(text)
    })
}

/// Release a surface handle. Null is accepted and ignored.
/// # Safety
/// `surface` must be null or a handle produced by a constructor of this
/// library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn umb_surface_free(surface: *mut UmbSurface) {
    if !surface.is_null() {
        drop(unsafe { Box::from_raw(surface) });
    }
}

unsafe fn surface_ref<'a>(surface: *const UmbSurface) -> Option<&'a SurfaceSpec> {
    surface.as_ref().map(|s| &s.inner)
}

/// Name of the surface kind ("sphere", "perturbed_sphere", "ellipsoid",
/// "log_torus"); a static string.
/// # Safety
/// `surface` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn umb_surface_kind(surface: *const UmbSurface) -> *const c_char {
    let name: &'static str = match unsafe { surface_ref(surface) } {
        Some(s) => match s.kind_name() {
            "sphere" => "sphere\0",
            "perturbed_sphere" => "perturbed_sphere\0",
            "ellipsoid" => "ellipsoid\0",
            _ => "log_torus\0",
        },
        None => "\0",
    };
    name.as_ptr() as *const c_char
}

/// Value of the defining function at a point of C^2.
/// # Safety
/// `surface` must be a live handle and `out` a valid pointer to one f64.
#[no_mangle]
pub unsafe extern "C" fn umb_rho(
    surface: *const UmbSurface,
    z_re: f64,
    z_im: f64,
    w_re: f64,
    w_im: f64,
    out: *mut f64,
) -> UmbStatus {
    if surface.is_null() || out.is_null() {
        set_error("null argument");
        return UmbStatus::NullArgument;
    }
    guard(|| {
        let s = unsafe { surface_ref(surface) }.unwrap();
        let value = s.rho_value((Complex64::new(z_re, z_im), Complex64::new(w_re, w_im)));
        unsafe { *out = value };
        Ok(())
    })
}

/// Chart map onto the surface; writes `z_re, z_im, w_re, w_im`.
/// # Safety
/// `surface` must be a live handle and `out` must point to at least four
/// writable f64 values.
#[no_mangle]
pub unsafe extern "C" fn umb_chart_point(
    surface: *const UmbSurface,
    t1: f64,
    t2: f64,
    t3: f64,
    out: *mut f64,
) -> UmbStatus {
    if surface.is_null() || out.is_null() {
        set_error("null argument");
        return UmbStatus::NullArgument;
    }
    guard(|| {
        let s = unsafe { surface_ref(surface) }.unwrap();
        let p = s.chart_point([t1, t2, t3])?;
        let coords = [p.0.re, p.0.im, p.1.re, p.1.im];
        unsafe { std::ptr::copy_nonoverlapping(coords.as_ptr(), out, 4) };
        Ok(())
    })
}

/// Evaluate `det A3`, `J` and `Q` at a chart parameter triple.
/// # Safety
/// `surface` must be a live handle and `out` a valid pointer to an
/// `UmbSample`.
#[no_mangle]
pub unsafe extern "C" fn umb_sample(
    surface: *const UmbSurface,
    t1: f64,
    t2: f64,
    t3: f64,
    out: *mut UmbSample,
) -> UmbStatus {
    if surface.is_null() || out.is_null() {
        set_error("null argument");
        return UmbStatus::NullArgument;
    }
    guard(|| {
        let s = unsafe { surface_ref(surface) }.unwrap();
        let smp = tensor::sample(s, [t1, t2, t3])?;
        unsafe {
            *out = UmbSample {
                theta: smp.theta,
                z_re: smp.z_re,
                z_im: smp.z_im,
                w_re: smp.w_re,
                w_im: smp.w_im,
                det_re: smp.det_re,
                det_im: smp.det_im,
                j_on_m: smp.j_on_m,
                q_re: smp.q_re,
                q_im: smp.q_im,
                abs_q: smp.abs_q,
                row_scale: smp.row_scale,
            };
        }
        Ok(())
    })
}

/// Scan `|Q|` over an `n1 x n2 x n3` chart grid and report the extremes.
/// # Safety
/// `surface` must be a live handle and `out` a valid pointer to an
/// `UmbScanSummary`.
#[no_mangle]
pub unsafe extern "C" fn umb_scan_summary(
    surface: *const UmbSurface,
    n1: usize,
    n2: usize,
    n3: usize,
    out: *mut UmbScanSummary,
) -> UmbStatus {
    if surface.is_null() || out.is_null() {
        set_error("null argument");
        return UmbStatus::NullArgument;
    }
    guard(|| {
        let s = unsafe { surface_ref(surface) }.unwrap();
        let scan = locus::scan(s, [n1, n2, n3])?;
        unsafe {
            *out = UmbScanSummary {
                min_abs_q: scan.min_abs_q,
                median_abs_q: scan.median_abs_q,
                min_abs_det: scan.min_abs_det,
                min_theta: scan.min_at,
            };
        }
        Ok(())
    })
}

/// Gauss-Newton refinement of an umbilical zero from a chart-parameter seed.
/// # Safety
/// `surface` must be a live handle and `out` a valid pointer to an
/// `UmbRefined`.
#[no_mangle]
pub unsafe extern "C" fn umb_refine_zero(
    surface: *const UmbSurface,
    t1: f64,
    t2: f64,
    t3: f64,
    out: *mut UmbRefined,
) -> UmbStatus {
    if surface.is_null() || out.is_null() {
        set_error("null argument");
        return UmbStatus::NullArgument;
    }
    guard(|| {
        let s = unsafe { surface_ref(surface) }.unwrap();
        let zero = locus::refine_zero(s, [t1, t2, t3])?;
        unsafe {
            *out = UmbRefined {
                theta: zero.theta,
                z_re: zero.z_re,
                z_im: zero.z_im,
                w_re: zero.w_re,
                w_im: zero.w_im,
                abs_q: zero.abs_q,
                scale: zero.scale,
                iterations: zero.iterations,
            };
        }
        Ok(())
    })
}

fn write_index(out: *mut UmbIndex, report: &index::IndexReport) {
    unsafe {
        *out = UmbIndex {
            winding: report.winding,
            index_num: *report.index.numer(),
            index_den: *report.index.denom(),
            n_samples: report.n_samples,
            max_phase_step: report.max_phase_step,
        };
    }
}

/// Winding index of `Q` along the circle of the given radius around `center`,
/// in the chart plane orthogonal to `normal`.
/// # Safety
/// `surface` must be a live handle; `center` and `normal` must point to at
/// least three f64 values each; `out` must be a valid `UmbIndex` pointer.
#[no_mangle]
pub unsafe extern "C" fn umb_circle_index(
    surface: *const UmbSurface,
    center: *const f64,
    normal: *const f64,
    radius: f64,
    n0: usize,
    out: *mut UmbIndex,
) -> UmbStatus {
    if surface.is_null() || center.is_null() || normal.is_null() || out.is_null() {
        set_error("null argument");
        return UmbStatus::NullArgument;
    }
    guard(|| {
        let s = unsafe { surface_ref(surface) }.unwrap();
        let center = unsafe { [*center, *center.add(1), *center.add(2)] };
        let n_raw = unsafe { [*normal, *normal.add(1), *normal.add(2)] };
        let len = (n_raw[0] * n_raw[0] + n_raw[1] * n_raw[1] + n_raw[2] * n_raw[2]).sqrt();
        let valid = len > 0.0 && radius > 0.0 && len.is_finite() && radius.is_finite();
        if !valid {
            return Err(Error::Config("normal and radius must be positive and finite".into()));
        }
        let n = [n_raw[0] / len, n_raw[1] / len, n_raw[2] / len];
        let axis = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let raw_u = [
            n[1] * axis[2] - n[2] * axis[1],
            n[2] * axis[0] - n[0] * axis[2],
            n[0] * axis[1] - n[1] * axis[0],
        ];
        let ulen = (raw_u[0] * raw_u[0] + raw_u[1] * raw_u[1] + raw_u[2] * raw_u[2]).sqrt();
        let u = [raw_u[0] / ulen, raw_u[1] / ulen, raw_u[2] / ulen];
        let v = [
            n[1] * u[2] - n[2] * u[1],
            n[2] * u[0] - n[0] * u[2],
            n[0] * u[1] - n[1] * u[0],
        ];
        let curve = index::ParamCurve::Circle { center, u, v, radius };
        let report = index::curve_index(s, &curve, n0.max(8))?;
        write_index(out, &report);
        Ok(())
    })
}

/// Local index of a smooth umbilical-curve point (radius auto-shrinks).
/// # Safety
/// `surface` must be a live handle and `out` a valid pointer to an
/// `UmbIndex`.
#[no_mangle]
pub unsafe extern "C" fn umb_local_index(
    surface: *const UmbSurface,
    t1: f64,
    t2: f64,
    t3: f64,
    out: *mut UmbIndex,
) -> UmbStatus {
    if surface.is_null() || out.is_null() {
        set_error("null argument");
        return UmbStatus::NullArgument;
    }
    guard(|| {
        let s = unsafe { surface_ref(surface) }.unwrap();
        let li = index::local_index(s, [t1, t2, t3])?;
        unsafe {
            *out = UmbIndex {
                winding: li.winding,
                index_num: *li.index.numer(),
                index_den: *li.index.denom(),
                n_samples: 0,
                max_phase_step: 0.0,
            };
        }
        Ok(())
    })
}
