//! C interface to the `blab` toolkit.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`BlabStatus`]; on failure `blab_last_error_message` describes the error
//! until the next failing call on the same thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use blab::bounds::{lemma_check, TheoremChecker};
use blab::critical::{critical_points, CriticalSet};
use blab::means::hardy_mean;
use blab::regions::default_type_grid;
use blab::{BlaschkeProduct, BoundarySet, Error, ModelFunction, StolzSpec, ZeroSequence};
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SamplingFailed = 3,
    NoConvergence = 4,
    Numerical = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BlabComplex {
    pub re: f64,
    pub im: f64,
}

impl From<BlabComplex> for Complex64 {
    fn from(z: BlabComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl From<Complex64> for BlabComplex {
    fn from(z: Complex64) -> Self {
        BlabComplex { re: z.re, im: z.im }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlabModelKind {
    Linear = 0,
    TruncatedPower = 1,
    ExpTangential = 2,
}

/// Model function; `param` is `gamma` or `rho` and ignored for `Linear`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct BlabModel {
    pub kind: BlabModelKind,
    pub param: f64,
}

impl BlabModel {
    fn to_model(self) -> Result<ModelFunction, Error> {
        let model = match self.kind {
            BlabModelKind::Linear => ModelFunction::Linear,
            BlabModelKind::TruncatedPower => ModelFunction::TruncatedPower { gamma: self.param },
            BlabModelKind::ExpTangential => ModelFunction::ExpTangential { rho: self.param },
        };
        model.validate()?;
        Ok(model)
    }
}

pub struct BlabProduct {
    inner: BlaschkeProduct,
}

pub struct BlabBoundarySet {
    inner: BoundarySet,
}

pub struct BlabCriticalSet {
    inner: CriticalSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn status_of(err: &Error) -> BlabStatus {
    match err {
        Error::Sampling(_) => BlabStatus::SamplingFailed,
        Error::NoConvergence { .. } | Error::CountMismatch { .. } => BlabStatus::NoConvergence,
        Error::InconclusiveContour { .. } | Error::Resolution(_) => BlabStatus::Numerical,
        _ => BlabStatus::InvalidArgument,
    }
}

/// Runs `body`, converting errors and panics into a status.
fn guard<F>(body: F) -> BlabStatus
where
    F: FnOnce() -> Result<(), (BlabStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => BlabStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BlabStatus::Panic
        }
    }
}

fn fail(err: Error) -> (BlabStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(name: &str) -> (BlabStatus, String) {
    (BlabStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn read_str<'a>(text: *const c_char, name: &str) -> Result<&'a str, (BlabStatus, String)> {
    if text.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(text)
        .to_str()
        .map_err(|_| (BlabStatus::InvalidArgument, format!("`{name}` is not UTF-8")))
}

unsafe fn out_ref<'a, T>(out: *mut T, name: &str) -> Result<&'a mut T, (BlabStatus, String)> {
    out.as_mut().ok_or_else(|| null(name))
}

unsafe fn in_ref<'a, T>(handle: *const T, name: &str) -> Result<&'a T, (BlabStatus, String)> {
    handle.as_ref().ok_or_else(|| null(name))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn blab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn blab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Product with the `n` zeros at `zeros`.
#[no_mangle]
pub unsafe extern "C" fn blab_product_new(zeros: *const BlabComplex, n: usize, out: *mut *mut BlabProduct) -> BlabStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let points: &[BlabComplex] = if n == 0 {
            &[]
        } else if zeros.is_null() {
            return Err(null("zeros"));
        } else {
            std::slice::from_raw_parts(zeros, n)
        };
        let seq = ZeroSequence::from_points(points.iter().map(|&z| Complex64::from(z))).map_err(fail)?;
        *out = Box::into_raw(Box::new(BlabProduct {
            inner: BlaschkeProduct::new(seq),
        }));
        Ok(())
    })
}

/// Product from the zero-set text format (`re im` or `r@theta` per line).
#[no_mangle]
pub unsafe extern "C" fn blab_product_parse(text: *const c_char, out: *mut *mut BlabProduct) -> BlabStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let seq = ZeroSequence::parse(read_str(text, "text")?).map_err(fail)?;
        *out = Box::into_raw(Box::new(BlabProduct {
            inner: BlaschkeProduct::new(seq),
        }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn blab_product_free(product: *mut BlabProduct) {
    if !product.is_null() {
        drop(Box::from_raw(product));
    }
}

/// Number of zeros; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn blab_product_degree(product: *const BlabProduct) -> usize {
    product.as_ref().map_or(0, |p| p.inner.degree())
}

/// `sum (1 - |z_n|)`.
#[no_mangle]
pub unsafe extern "C" fn blab_product_alpha(product: *const BlabProduct, out: *mut f64) -> BlabStatus {
    guard(|| {
        *out_ref(out, "out")? = in_ref(product, "product")?.inner.alpha();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn blab_product_eval(product: *const BlabProduct, z: BlabComplex, out: *mut BlabComplex) -> BlabStatus {
    guard(|| {
        let p = in_ref(product, "product")?;
        *out_ref(out, "out")? = p.inner.eval(z.into()).into();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn blab_product_derivative(
    product: *const BlabProduct,
    z: BlabComplex,
    out: *mut BlabComplex,
) -> BlabStatus {
    guard(|| {
        let p = in_ref(product, "product")?;
        *out_ref(out, "out")? = p.inner.derivative(z.into()).into();
        Ok(())
    })
}

fn boxed_set(set: Result<BoundarySet, Error>, out: &mut *mut BlabBoundarySet) -> Result<(), (BlabStatus, String)> {
    *out = Box::into_raw(Box::new(BlabBoundarySet { inner: set.map_err(fail)? }));
    Ok(())
}

/// Finite set of `n` points `e^{i angle}`.
#[no_mangle]
pub unsafe extern "C" fn blab_boundary_points(
    angles: *const f64,
    n: usize,
    out: *mut *mut BlabBoundarySet,
) -> BlabStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if angles.is_null() && n > 0 {
            return Err(null("angles"));
        }
        let slice = if n == 0 { &[][..] } else { std::slice::from_raw_parts(angles, n) };
        boxed_set(BoundarySet::points(slice), out)
    })
}

/// Closed arc from `start` to `end` (radians, `end >= start`).
#[no_mangle]
pub unsafe extern "C" fn blab_boundary_arc(start: f64, end: f64, out: *mut *mut BlabBoundarySet) -> BlabStatus {
    guard(|| boxed_set(BoundarySet::arc(start, end), out_ref(out, "out")?))
}

/// Boundary set from its JSON description.
#[no_mangle]
pub unsafe extern "C" fn blab_boundary_from_json(json: *const c_char, out: *mut *mut BlabBoundarySet) -> BlabStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        boxed_set(BoundarySet::from_json(read_str(json, "json")?), out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn blab_boundary_free(set: *mut BlabBoundarySet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Euclidean distance from `z` to the set.
#[no_mangle]
pub unsafe extern "C" fn blab_boundary_distance(set: *const BlabBoundarySet, z: BlabComplex, out: *mut f64) -> BlabStatus {
    guard(|| {
        *out_ref(out, "out")? = in_ref(set, "set")?.inner.distance(z.into());
        Ok(())
    })
}

/// Type of the set on the default grid `x = 2^-4 .. 2^-14`.
#[no_mangle]
pub unsafe extern "C" fn blab_boundary_type(set: *const BlabBoundarySet, out: *mut f64) -> BlabStatus {
    guard(|| {
        let set = in_ref(set, "set")?;
        *out_ref(out, "out")? = set.inner.type_beta(&default_type_grid()).map_err(fail)?;
        Ok(())
    })
}

/// `|B'(z)|` and its bound `2(2C + K)^2 sum(1 - |z_n|) / phi(d(z, E)/6)^2`;
/// `rhs` is infinite where `phi(d/6)` vanishes.
#[no_mangle]
pub unsafe extern "C" fn blab_theorem_bound(
    product: *const BlabProduct,
    model: BlabModel,
    set: *const BlabBoundarySet,
    k: f64,
    z: BlabComplex,
    lhs: *mut f64,
    rhs: *mut f64,
) -> BlabStatus {
    guard(|| {
        let product = in_ref(product, "product")?;
        let set = in_ref(set, "set")?;
        let lhs = out_ref(lhs, "lhs")?;
        let rhs = out_ref(rhs, "rhs")?;
        let spec = StolzSpec::new(model.to_model().map_err(fail)?, set.inner.clone(), k).map_err(fail)?;
        let bound = TheoremChecker::new(&product.inner, &spec)
            .and_then(|c| c.bound(z.into()))
            .map_err(fail)?;
        *lhs = bound.lhs;
        *rhs = bound.rhs;
        Ok(())
    })
}

/// Seeded lemma suite at the vertex `e^{i vertex_angle}`.
#[no_mangle]
pub unsafe extern "C" fn blab_lemma_check(
    model: BlabModel,
    vertex_angle: f64,
    k: f64,
    samples: u64,
    seed: u64,
    violations: *mut u64,
    worst_ratio: *mut f64,
) -> BlabStatus {
    guard(|| {
        let violations = out_ref(violations, "violations")?;
        let worst_ratio = out_ref(worst_ratio, "worst_ratio")?;
        let spec = StolzSpec::vertex(model.to_model().map_err(fail)?, vertex_angle, k).map_err(fail)?;
        let report = lemma_check(&spec, samples, seed).map_err(fail)?;
        *violations = report.violations;
        *worst_ratio = report.worst_ratio;
        Ok(())
    })
}

/// Critical points of the product (degree - 1 of them, with multiplicity).
#[no_mangle]
pub unsafe extern "C" fn blab_critical_points(product: *const BlabProduct, out: *mut *mut BlabCriticalSet) -> BlabStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let cs = critical_points(&in_ref(product, "product")?.inner).map_err(fail)?;
        *out = Box::into_raw(Box::new(BlabCriticalSet { inner: cs }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn blab_critical_set_len(set: *const BlabCriticalSet) -> usize {
    set.as_ref().map_or(0, |s| s.inner.len())
}

/// Point `index` and its residual `|B'|`.
#[no_mangle]
pub unsafe extern "C" fn blab_critical_set_get(
    set: *const BlabCriticalSet,
    index: usize,
    point: *mut BlabComplex,
    residual: *mut f64,
) -> BlabStatus {
    guard(|| {
        let set = in_ref(set, "set")?;
        let point = out_ref(point, "point")?;
        let residual = out_ref(residual, "residual")?;
        if index >= set.inner.len() {
            return Err((
                BlabStatus::InvalidArgument,
                format!("index {index} out of range for {} points", set.inner.len()),
            ));
        }
        *point = set.inner.points[index].into();
        *residual = set.inner.residuals[index];
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn blab_critical_set_free(set: *mut BlabCriticalSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// `((1/2pi) int |B'(r e^{i theta})|^p d theta)^(1/p)`, starting from `nodes` nodes.
#[no_mangle]
pub unsafe extern "C" fn blab_hardy_mean(
    product: *const BlabProduct,
    p: f64,
    r: f64,
    nodes: usize,
    out: *mut f64,
) -> BlabStatus {
    guard(|| {
        let product = in_ref(product, "product")?;
        *out_ref(out, "out")? = hardy_mean(&product.inner, p, r, nodes).map_err(fail)?;
        Ok(())
    })
}
