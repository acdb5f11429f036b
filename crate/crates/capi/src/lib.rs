//! C ABI for the spectral workbench: opaque handles, integer status codes,
//! thread-local error messages. Mirrors the CLI exit-code contract
//! (0 ok, 1 schema, 2 numeric, 3 inconclusive).

use gspec::error::Error;
use gspec::modelfile::{self, LoadedModel};
use gspec::spectral::{hausdorff_distance, SpectralSet};
use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum GspecStatus {
    Ok = 0,
    /// Model file failed schema validation.
    Schema = 1,
    /// Numeric or structural failure.
    Numeric = 2,
    /// Result is inconclusive at the materialized scale.
    Inconclusive = 3,
    /// A required pointer argument was null.
    NullArgument = 4,
}

/// Opaque handle: a loaded scenario with its computation options.
pub struct GspecModel {
    inner: LoadedModel,
    name: CString,
}

/// Opaque handle: a finite point cloud in the complex plane.
pub struct GspecCloud {
    inner: SpectralSet,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> GspecStatus {
    match err.exit_code() {
        1 => GspecStatus::Schema,
        3 => GspecStatus::Inconclusive,
        _ => GspecStatus::Numeric,
    }
}

fn guard<T>(
    out: *mut T,
    body: impl FnOnce() -> Result<T, Error> + std::panic::UnwindSafe,
) -> GspecStatus {
    if out.is_null() {
        set_error("null output pointer");
        return GspecStatus::NullArgument;
    }
    match catch_unwind(body) {
        Ok(Ok(v)) => {
            unsafe { out.write(v) };
            GspecStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            GspecStatus::Numeric
        }
    }
}

/// Message of the last failing call on this thread; valid until the next
/// failing call.
#[no_mangle]
pub extern "C" fn gspec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Load a model file (TOML) from a path.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. The returned handle must be released with `gspec_model_free`.
#[no_mangle]
pub unsafe extern "C" fn gspec_model_load(
    path: *const c_char,
    out: *mut *mut GspecModel,
) -> GspecStatus {
    if path.is_null() {
        set_error("null path");
        return GspecStatus::NullArgument;
    }
    let path = match CStr::from_ptr(path).to_str() {
        Ok(p) => p.to_owned(),
        Err(_) => {
            set_error("path is not valid UTF-8");
            return GspecStatus::Schema;
        }
    };
    guard(out, move || {
        let inner = modelfile::load_path(Path::new(&path))?;
        let name = CString::new(inner.model.name.clone()).unwrap_or_default();
        Ok(Box::into_raw(Box::new(GspecModel { inner, name })))
    })
}

/// Load a model from TOML text.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gspec_model_load_str(
    text: *const c_char,
    out: *mut *mut GspecModel,
) -> GspecStatus {
    if text.is_null() {
        set_error("null text");
        return GspecStatus::NullArgument;
    }
    let text = match CStr::from_ptr(text).to_str() {
        Ok(t) => t.to_owned(),
        Err(_) => {
            set_error("text is not valid UTF-8");
            return GspecStatus::Schema;
        }
    };
    guard(out, move || {
        let inner = modelfile::load(&text)?;
        let name = CString::new(inner.model.name.clone()).unwrap_or_default();
        Ok(Box::into_raw(Box::new(GspecModel { inner, name })))
    })
}

/// # Safety
/// `model` must come from a load call and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gspec_model_free(model: *mut GspecModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Scenario name; borrowed pointer valid while the model lives.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gspec_model_name(model: *const GspecModel) -> *const c_char {
    if model.is_null() {
        return std::ptr::null();
    }
    (*model).name.as_ptr()
}

/// Essential spectrum via the boundary-formula decomposition.
///
/// # Safety
/// `model` must be live; `out` valid. Free the cloud with `gspec_cloud_free`.
#[no_mangle]
pub unsafe extern "C" fn gspec_essential_boundary(
    model: *const GspecModel,
    out: *mut *mut GspecCloud,
) -> GspecStatus {
    if model.is_null() {
        set_error("null model");
        return GspecStatus::NullArgument;
    }
    let m = &*model;
    guard(out, AssertUnwindSafe(|| {
        let cloud = m.inner.model.essential_spectrum_boundary()?;
        Ok(Box::into_raw(Box::new(GspecCloud { inner: cloud })))
    }))
}

/// Essential spectrum via the filtered truncation oracle (Hermitian models).
///
/// # Safety
/// As for `gspec_essential_boundary`.
#[no_mangle]
pub unsafe extern "C" fn gspec_essential_truncation(
    model: *const GspecModel,
    out: *mut *mut GspecCloud,
) -> GspecStatus {
    if model.is_null() {
        set_error("null model");
        return GspecStatus::NullArgument;
    }
    let m = &*model;
    guard(out, AssertUnwindSafe(|| {
        let cloud = m.inner.model.essential_spectrum_truncation(&m.inner.truncation)?;
        Ok(Box::into_raw(Box::new(GspecCloud { inner: cloud })))
    }))
}

/// Eigenvalue cloud of one truncation window.
///
/// # Safety
/// As for `gspec_essential_boundary`.
#[no_mangle]
pub unsafe extern "C" fn gspec_spectrum_window(
    model: *const GspecModel,
    window: usize,
    out: *mut *mut GspecCloud,
) -> GspecStatus {
    if model.is_null() {
        set_error("null model");
        return GspecStatus::NullArgument;
    }
    let m = &*model;
    guard(out, AssertUnwindSafe(move || {
        let cloud = m.inner.model.spectrum_at_window(window)?;
        Ok(Box::into_raw(Box::new(GspecCloud { inner: cloud })))
    }))
}

/// Fredholm verdict for H - lambda: writes 1 (Fredholm) or 0 plus the margin
/// (distance of lambda to the essential-spectrum cloud).
///
/// # Safety
/// `model` live; `verdict` and `margin` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gspec_fredholm(
    model: *const GspecModel,
    lambda_re: f64,
    lambda_im: f64,
    verdict: *mut c_int,
    margin: *mut f64,
) -> GspecStatus {
    if model.is_null() || verdict.is_null() || margin.is_null() {
        set_error("null argument");
        return GspecStatus::NullArgument;
    }
    let m = &*model;
    match catch_unwind(AssertUnwindSafe(|| {
        m.inner.model.fredholm_check(Complex64::new(lambda_re, lambda_im))
    })) {
        Ok(Ok(rep)) => {
            verdict.write(if rep.fredholm { 1 } else { 0 });
            margin.write(rep.margin);
            GspecStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            GspecStatus::Numeric
        }
    }
}

/// Number of points in a cloud.
///
/// # Safety
/// `cloud` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gspec_cloud_len(cloud: *const GspecCloud) -> usize {
    if cloud.is_null() {
        return 0;
    }
    (*cloud).inner.len()
}

/// Read point `index` of a cloud.
///
/// # Safety
/// `cloud` live; `re`/`im` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gspec_cloud_get(
    cloud: *const GspecCloud,
    index: usize,
    re: *mut f64,
    im: *mut f64,
) -> GspecStatus {
    if cloud.is_null() || re.is_null() || im.is_null() {
        set_error("null argument");
        return GspecStatus::NullArgument;
    }
    let c = &*cloud;
    match c.inner.points().get(index) {
        Some(z) => {
            re.write(z.re);
            im.write(z.im);
            GspecStatus::Ok
        }
        None => {
            set_error("cloud index out of range");
            GspecStatus::Numeric
        }
    }
}

/// Symmetric Hausdorff distance between two clouds.
///
/// # Safety
/// Both clouds live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn gspec_hausdorff(
    a: *const GspecCloud,
    b: *const GspecCloud,
    out: *mut f64,
) -> GspecStatus {
    if a.is_null() || b.is_null() {
        set_error("null cloud");
        return GspecStatus::NullArgument;
    }
    let (a, b) = (&*a, &*b);
    guard(out, AssertUnwindSafe(|| Ok(hausdorff_distance(&a.inner, &b.inner)?)))
}

/// # Safety
/// `cloud` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gspec_cloud_free(cloud: *mut GspecCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_compute_free_roundtrip() {
        let toml = r#"
schema_version = 1

[scenario]
factory = "wiener_hopf_line"
symbol = [{ offset = [1], re = 1.0 }]
"#;
        let ctext = CString::new(toml).unwrap();
        let mut model: *mut GspecModel = std::ptr::null_mut();
        let st = unsafe { gspec_model_load_str(ctext.as_ptr(), &mut model) };
        assert!(st == GspecStatus::Ok);
        let name = unsafe { CStr::from_ptr(gspec_model_name(model)) };
        assert!(name.to_str().unwrap().starts_with("wiener-hopf"));

        let mut cloud: *mut GspecCloud = std::ptr::null_mut();
        let st = unsafe { gspec_essential_boundary(model, &mut cloud) };
        assert!(st == GspecStatus::Ok);
        let n = unsafe { gspec_cloud_len(cloud) };
        assert!(n > 100);
        let (mut re, mut im) = (0.0f64, 0.0f64);
        let st = unsafe { gspec_cloud_get(cloud, 0, &mut re, &mut im) };
        assert!(st == GspecStatus::Ok);
        assert!(((re * re + im * im).sqrt() - 1.0).abs() < 1e-10);

        let (mut verdict, mut margin) = (0i32, 0.0f64);
        let st = unsafe { gspec_fredholm(model, 0.0, 0.0, &mut verdict, &mut margin) };
        assert!(st == GspecStatus::Ok);
        assert_eq!(verdict, 1);
        assert!(margin > 0.9);

        unsafe {
            gspec_cloud_free(cloud);
            gspec_model_free(model);
        }
    }

    #[test]
    fn schema_error_reported() {
        let ctext = CString::new("schema_version = 1\n[scenario]\nfactory = \"nope\"\n").unwrap();
        let mut model: *mut GspecModel = std::ptr::null_mut();
        let st = unsafe { gspec_model_load_str(ctext.as_ptr(), &mut model) };
        assert!(st == GspecStatus::Schema);
        let msg = unsafe { CStr::from_ptr(gspec_last_error()) };
        assert!(!msg.to_bytes().is_empty());
    }
}
