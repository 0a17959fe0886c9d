//! C interface to sectkit.
//!
//! Objects are opaque handles created by `sectkit_*_new`-style functions and
//! released with the matching `*_free`. Every fallible call returns a
//! [`SectkitStatus`]; on failure the message is available from
//! [`sectkit_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use sectkit::ecc::DirectionGrid;
use sectkit::infer::{
    chi2_two_sample, permutation_test, randomization_nhst, Decision, EctGroup, SectGroup,
    TestSettings,
};
use sectkit::sect::{default_backend, rho_discrete, sect_field, ECTField, LevelGrid, SECTField};
use sectkit::shapes::{
    load_mesh, make_deterministic_shape, sample_random_shape, BuiltinShape, FamilyParams,
    ShapeSpec,
};
use sectkit::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectkitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Validation = 4,
    Containment = 5,
    Resource = 6,
    GridMismatch = 7,
    NumericalRank = 8,
    Io = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectkitMethod {
    Chi2 = 0,
    Permutation = 1,
    Nhst = 2,
}

/// Outcome of a two-sample test. Optional integers are -1 when absent.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectkitReport {
    pub statistic: f64,
    pub threshold: f64,
    pub p_value: f64,
    /// 1 for Reject, 0 for Accept.
    pub reject: i32,
    pub l_hat: i64,
    /// 0-based.
    pub direction_index: i64,
    pub k_star: i64,
    pub r_f: f64,
    pub r_inf: f64,
}

/// A shape to be filtered.
pub struct SectkitShape(ShapeSpec);

/// The SECT and ECT of one shape on a shared grid.
pub struct SectkitFields {
    sect: SECTField,
    ect: ECTField,
}

/// A growing collection of field pairs.
pub struct SectkitGroup(Vec<SectkitFields>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SectkitStatus {
    match e {
        Error::Parse(_) | Error::Json(_) => SectkitStatus::Parse,
        Error::Validation(_) => SectkitStatus::Validation,
        Error::Containment(_) => SectkitStatus::Containment,
        Error::Resource(_) => SectkitStatus::Resource,
        Error::GridMismatch(_) => SectkitStatus::GridMismatch,
        Error::NumericalRank(_) => SectkitStatus::NumericalRank,
        Error::InvalidArgument(_) => SectkitStatus::InvalidArgument,
        Error::File { .. } | Error::Io(_) => SectkitStatus::Io,
    }
}

struct Fail(SectkitStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SectkitStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SectkitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SectkitStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {message}"));
            SectkitStatus::Panic
        }
    }
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sectkit_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// One of the deterministic two-arc shapes: `which` is 1 for K1, 2 for K2.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn sectkit_shape_builtin(
    which: u32,
    curve_points: usize,
    out: *mut *mut SectkitShape,
) -> SectkitStatus {
    guard(|| {
        let which = match which {
            1 => BuiltinShape::K1,
            2 => BuiltinShape::K2,
            _ => {
                return Err(Fail(
                    SectkitStatus::InvalidArgument,
                    format!("builtin shape must be 1 or 2, got {which}"),
                ))
            }
        };
        write_out(out, SectkitShape(make_deterministic_shape(which, curve_points)?))
    })
}

/// A random member of the perturbed two-arc family, drawn from `seed`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn sectkit_shape_family(
    epsilon: f64,
    seed: u64,
    curve_points: usize,
    out: *mut *mut SectkitShape,
) -> SectkitStatus {
    guard(|| {
        let params = FamilyParams {
            epsilon,
            curve_points,
            ..FamilyParams::default()
        };
        let shape = sample_random_shape(&params, &mut sectkit::rng::stream(seed, &[]))?;
        write_out(out, SectkitShape(shape))
    })
}

/// A triangle mesh read from an OFF file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sectkit_shape_from_off(
    path: *const c_char,
    out: *mut *mut SectkitShape,
) -> SectkitStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Fail(SectkitStatus::InvalidArgument, "path is not UTF-8".into()))?;
        let shape = ShapeSpec::from_mesh(load_mesh(Path::new(path))?)?;
        write_out(out, SectkitShape(shape))
    })
}

/// # Safety
/// `shape` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sectkit_shape_free(shape: *mut SectkitShape) {
    if !shape.is_null() {
        drop(Box::from_raw(shape));
    }
}

/// SECT and ECT of a planar shape on `gamma` directions and `delta` levels.
/// Directions are `(p − 1)π/Γ` when `half_circle` is nonzero and
/// `(p − 1)2π/Γ` otherwise.
///
/// # Safety
/// `shape` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sectkit_compute_fields(
    shape: *const SectkitShape,
    gamma: usize,
    half_circle: i32,
    delta: usize,
    out: *mut *mut SectkitFields,
) -> SectkitStatus {
    guard(|| {
        let shape = &borrow(shape, "shape")?.0;
        let grid = if half_circle != 0 {
            DirectionGrid::half_circle(gamma)?
        } else {
            DirectionGrid::uniform_circle(gamma)?
        };
        let levels = LevelGrid::new(shape.horizon(), delta)?;
        let (sect, ect) = sect_field(shape, &grid, &levels, default_backend(shape))?;
        write_out(out, SectkitFields { sect, ect })
    })
}

/// # Safety
/// `fields` must be a live handle; `gamma` and `delta` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sectkit_fields_dims(
    fields: *const SectkitFields,
    gamma: *mut usize,
    delta: *mut usize,
) -> SectkitStatus {
    guard(|| {
        let f = borrow(fields, "fields")?;
        if gamma.is_null() || delta.is_null() {
            return Err(null("output pointer"));
        }
        *gamma = f.sect.directions();
        *delta = f.sect.width();
        Ok(())
    })
}

fn check_len(len: usize, want: usize) -> Result<(), Fail> {
    if len < want {
        return Err(Fail(
            SectkitStatus::InvalidArgument,
            format!("buffer holds {len} values, need {want}"),
        ));
    }
    Ok(())
}

/// Copies the Γ×Δ SECT values, row by direction, into `buf`.
///
/// # Safety
/// `buf` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sectkit_fields_sect(
    fields: *const SectkitFields,
    buf: *mut f64,
    len: usize,
) -> SectkitStatus {
    guard(|| {
        let v = borrow(fields, "fields")?.sect.values();
        if buf.is_null() {
            return Err(null("buffer"));
        }
        check_len(len, v.len())?;
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
        Ok(())
    })
}

/// Copies the Γ×Δ ECT values, row by direction, into `buf`.
///
/// # Safety
/// `buf` must point to at least `len` writable integers.
#[no_mangle]
pub unsafe extern "C" fn sectkit_fields_ect(
    fields: *const SectkitFields,
    buf: *mut i64,
    len: usize,
) -> SectkitStatus {
    guard(|| {
        let v = borrow(fields, "fields")?.ect.values();
        if buf.is_null() {
            return Err(null("buffer"));
        }
        check_len(len, v.len())?;
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
        Ok(())
    })
}

/// Discrete ρ distance between the ECTs of two field pairs.
///
/// # Safety
/// `a` and `b` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sectkit_fields_distance(
    a: *const SectkitFields,
    b: *const SectkitFields,
    out: *mut f64,
) -> SectkitStatus {
    guard(|| {
        let (a, b) = (borrow(a, "a")?, borrow(b, "b")?);
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = rho_discrete(&a.ect, &b.ect)?;
        Ok(())
    })
}

/// # Safety
/// `fields` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sectkit_fields_free(fields: *mut SectkitFields) {
    if !fields.is_null() {
        drop(Box::from_raw(fields));
    }
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sectkit_group_new(out: *mut *mut SectkitGroup) -> SectkitStatus {
    guard(|| write_out(out, SectkitGroup(Vec::new())))
}

/// Appends a copy of `fields`; the caller keeps ownership of `fields`.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn sectkit_group_push(
    group: *mut SectkitGroup,
    fields: *const SectkitFields,
) -> SectkitStatus {
    guard(|| {
        let f = borrow(fields, "fields")?;
        let g = group.as_mut().ok_or_else(|| null("group"))?;
        if let Some(first) = g.0.first() {
            first.sect.check_same_grid(&f.sect)?;
        }
        g.0.push(SectkitFields {
            sect: f.sect.clone(),
            ect: f.ect.clone(),
        });
        Ok(())
    })
}

/// # Safety
/// `group` must be a live handle and `len` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sectkit_group_len(group: *const SectkitGroup, len: *mut usize) -> SectkitStatus {
    guard(|| {
        let g = borrow(group, "group")?;
        if len.is_null() {
            return Err(null("output pointer"));
        }
        *len = g.0.len();
        Ok(())
    })
}

/// # Safety
/// `group` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sectkit_group_free(group: *mut SectkitGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// Two-sample test between two groups. `permutations` and `seed` are
/// ignored by the χ² method.
///
/// # Safety
/// Both groups must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sectkit_test(
    group1: *const SectkitGroup,
    group2: *const SectkitGroup,
    method: SectkitMethod,
    alpha: f64,
    permutations: usize,
    seed: u64,
    out: *mut SectkitReport,
) -> SectkitStatus {
    guard(|| {
        let (g1, g2) = (borrow(group1, "group1")?, borrow(group2, "group2")?);
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let permutations = match method {
            SectkitMethod::Chi2 => permutations.max(1),
            _ => permutations,
        };
        let settings = TestSettings {
            alpha,
            permutations,
            seed,
            ..TestSettings::default()
        };
        let sect = |g: &SectkitGroup| SectGroup::new(g.0.iter().map(|f| f.sect.clone()).collect());
        let ect = |g: &SectkitGroup| EctGroup::new(g.0.iter().map(|f| f.ect.clone()).collect());
        let report = match method {
            SectkitMethod::Chi2 => chi2_two_sample(&sect(g1)?, &sect(g2)?, &settings)?,
            SectkitMethod::Permutation => permutation_test(&sect(g1)?, &sect(g2)?, &settings)?,
            SectkitMethod::Nhst => randomization_nhst(&ect(g1)?, &ect(g2)?, &settings)?,
        };
        let opt = |v: Option<usize>| v.map_or(-1, |x| x as i64);
        *out = SectkitReport {
            statistic: report.statistic,
            threshold: report.threshold,
            p_value: report.p_value,
            reject: i32::from(report.decision == Decision::Reject),
            l_hat: opt(report.l_hat),
            direction_index: opt(report.direction_index),
            k_star: opt(report.k_star),
            r_f: report.r_f.unwrap_or(f64::NAN),
            r_inf: report.r_inf.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}
