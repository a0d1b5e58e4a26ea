//! C ABI over `farsplit`.
//!
//! Every function returns an [`FsStatus`]; on failure the message is kept per
//! thread and read with [`fs_last_error_message`]. Handles are opaque and
//! released with their `*_free` function. Complex arrays cross the boundary as
//! separate real and imaginary `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use farsplit::bounds::{evaluate_bound, BoundData, BoundGeometry, BoundOptions, SignVariant, TheoremId};
use farsplit::farfield::{AngularGrid, FarField, C64};
use farsplit::picard::{picard_threshold, squared_singular_value, PowerBudget};
use farsplit::split_l1::{fista_split, L1Config, L1Geometry, Weights};
use farsplit::split_ls::{assemble, Geometry, SplitSolution};
use farsplit::synth::{scene_farfield, Scene};
use farsplit::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Precondition = 3,
    LengthMismatch = 4,
    Geometry = 5,
    Singular = 6,
    Parse = 7,
    Io = 8,
    Panic = 9,
}

/// Sampled far field on an equidistant grid.
pub struct FsFarField(FarField);

/// Parsed and validated scene.
pub struct FsScene(Scene);

/// Result of a split or completion.
pub struct FsSolution(SplitSolution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> FsStatus {
    match err {
        Error::Domain(_) | Error::InfinitePower { .. } => FsStatus::Domain,
        Error::Precondition(_) => FsStatus::Precondition,
        Error::LengthMismatch { .. } => FsStatus::LengthMismatch,
        Error::Geometry(_) | Error::GeneratorMismatch { .. } => FsStatus::Geometry,
        Error::Singular { .. } => FsStatus::Singular,
        Error::Parse(_) | Error::Json(_) => FsStatus::Parse,
        Error::Io(_) => FsStatus::Io,
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

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FsStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            FsStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            FsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
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
        .map_err(|_| Fail::Lib(Error::Parse(format!("{what} is not UTF-8"))))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_complex(values: &[C64], re: *mut f64, im: *mut f64, len: usize) -> Result<(), Fail> {
    if len != values.len() {
        return Err(Error::LengthMismatch {
            expected: values.len(),
            found: len,
        }
        .into());
    }
    if re.is_null() || im.is_null() {
        return Err(Fail::Null("output arrays"));
    }
    for (i, v) in values.iter().enumerate() {
        *re.add(i) = v.re;
        *im.add(i) = v.im;
    }
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail::Lib(Error::Parse("string contains NUL".into())))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library (or be NULL) and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out_value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_squared_singular_value(n: i64, r: f64, out_value: *mut f64) -> FsStatus {
    guard(|| {
        *out(out_value, "out_value")? = squared_singular_value(n, r)?;
        Ok(())
    })
}

/// Writes the number of non-evanescent modes to `out_n`; `out_found` is 0 when
/// no mode reaches the level.
///
/// # Safety
/// Output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_picard_threshold(r: f64, ratio: f64, out_n: *mut u64, out_found: *mut i32) -> FsStatus {
    guard(|| {
        let n = picard_threshold(r, PowerBudget::from_ratio(ratio)?)?;
        *out(out_found, "out_found")? = i32::from(n.is_some());
        *out(out_n, "out_n")? = n.unwrap_or(0) as u64;
        Ok(())
    })
}

/// # Safety
/// `re` and `im` must point to `size` doubles; `out_field` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_farfield_from_samples(
    size: usize,
    re: *const f64,
    im: *const f64,
    out_field: *mut *mut FsFarField,
) -> FsStatus {
    guard(|| {
        let grid = AngularGrid::new(size)?;
        let re = slice(re, size, "re")?;
        let im = slice(im, size, "im")?;
        let samples = re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect();
        let field = FarField::from_samples(grid, samples)?;
        *out(out_field, "out_field")? = Box::into_raw(Box::new(FsFarField(field)));
        Ok(())
    })
}

/// # Safety
/// `field` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_farfield_size(field: *const FsFarField, out_size: *mut usize) -> FsStatus {
    guard(|| {
        *out(out_size, "out_size")? = deref(field, "field")?.0.grid().size();
        Ok(())
    })
}

/// Copies grid samples into `re`/`im`, each of length `len` (the grid size).
///
/// # Safety
/// `field` must be a live handle; arrays must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fs_farfield_samples(
    field: *const FsFarField,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> FsStatus {
    guard(|| write_complex(deref(field, "field")?.0.samples(), re, im, len))
}

/// # Safety
/// `field` must be a live handle; arrays must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fs_farfield_coeffs(
    field: *const FsFarField,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> FsStatus {
    guard(|| write_complex(deref(field, "field")?.0.coeffs(), re, im, len))
}

/// # Safety
/// `field` must come from this library (or be NULL).
#[no_mangle]
pub unsafe extern "C" fn fs_farfield_free(field: *mut FsFarField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// `json` must be a NUL-terminated string; `out_scene` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_scene_from_json(json: *const c_char, out_scene: *mut *mut FsScene) -> FsStatus {
    guard(|| {
        let scene = Scene::from_json(c_str(json, "json")?)?;
        *out(out_scene, "out_scene")? = Box::into_raw(Box::new(FsScene(scene)));
        Ok(())
    })
}

/// # Safety
/// `scene` must come from this library (or be NULL).
#[no_mangle]
pub unsafe extern "C" fn fs_scene_free(scene: *mut FsScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Measured data `gamma` of the scene (masked, with noise).
///
/// # Safety
/// `scene` must be a live handle; `out_gamma` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_scene_gamma(scene: *const FsScene, out_gamma: *mut *mut FsFarField) -> FsStatus {
    guard(|| {
        let data = scene_farfield(&deref(scene, "scene")?.0)?;
        *out(out_gamma, "out_gamma")? = Box::into_raw(Box::new(FsFarField(data.gamma)));
        Ok(())
    })
}

/// Least-squares split using the scene's centers, orders and missing arc.
///
/// # Safety
/// Handles must be live; `out_solution` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_split_ls(
    scene: *const FsScene,
    gamma: *const FsFarField,
    out_solution: *mut *mut FsSolution,
) -> FsStatus {
    guard(|| {
        let scene = &deref(scene, "scene")?.0;
        let gamma = &deref(gamma, "gamma")?.0;
        let sol = assemble(&Geometry::from_scene(scene)?)?.solve(gamma)?;
        *out(out_solution, "out_solution")? = Box::into_raw(Box::new(FsSolution(sol)));
        Ok(())
    })
}

/// Basis-pursuit split. `band` nonzero restricts windows to the scene orders;
/// `auto_weights` nonzero uses distance-based weights.
///
/// # Safety
/// Handles must be live; `out_solution` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_split_l1(
    scene: *const FsScene,
    gamma: *const FsFarField,
    mu: f64,
    max_iters: usize,
    tol: f64,
    band: i32,
    auto_weights: i32,
    out_solution: *mut *mut FsSolution,
) -> FsStatus {
    guard(|| {
        let scene = &deref(scene, "scene")?.0;
        let gamma = &deref(gamma, "gamma")?.0;
        let geometry = L1Geometry::new(scene.k, scene.grid()?, scene.centers(), scene.omega.clone())?;
        let config = L1Config {
            mu,
            max_iters,
            tol,
            weights: if auto_weights != 0 { Weights::Auto } else { Weights::Uniform },
            lipschitz: None,
            windows: (band != 0).then(|| scene.orders()),
        };
        let run = fista_split(gamma, &geometry, &config)?;
        *out(out_solution, "out_solution")? = Box::into_raw(Box::new(FsSolution(run.solution)));
        Ok(())
    })
}

/// # Safety
/// `solution` must come from this library (or be NULL).
#[no_mangle]
pub unsafe extern "C" fn fs_solution_free(solution: *mut FsSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// # Safety
/// `solution` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_solution_component_count(solution: *const FsSolution, out_count: *mut usize) -> FsStatus {
    guard(|| {
        *out(out_count, "out_count")? = deref(solution, "solution")?.0.alphas.len();
        Ok(())
    })
}

/// Window order `N_i` of component `i`; its coefficient arrays have `2N_i+1` entries.
///
/// # Safety
/// `solution` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_solution_order(solution: *const FsSolution, index: usize, out_order: *mut usize) -> FsStatus {
    guard(|| {
        let sol = &deref(solution, "solution")?.0;
        let a = sol.alphas.get(index).ok_or_else(|| {
            Error::Precondition(format!("component {index} out of range ({})", sol.alphas.len()))
        })?;
        *out(out_order, "out_order")? = a.order();
        Ok(())
    })
}

/// Coefficients of component `index`, ordered from `-N_i` to `N_i`.
///
/// # Safety
/// `solution` must be a live handle; arrays must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fs_solution_coefficients(
    solution: *const FsSolution,
    index: usize,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> FsStatus {
    guard(|| {
        let sol = &deref(solution, "solution")?.0;
        let a = sol.alphas.get(index).ok_or_else(|| {
            Error::Precondition(format!("component {index} out of range ({})", sol.alphas.len()))
        })?;
        write_complex(a.values(), re, im, len)
    })
}

/// Far field restored on the missing arc (zero elsewhere).
///
/// # Safety
/// `solution` must be a live handle; `out_field` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_solution_restored(solution: *const FsSolution, out_field: *mut *mut FsFarField) -> FsStatus {
    guard(|| {
        let field = deref(solution, "solution")?.0.restored_segment();
        *out(out_field, "out_field")? = Box::into_raw(Box::new(FsFarField(field)));
        Ok(())
    })
}

/// Residual and condition number (NaN when not computed).
///
/// # Safety
/// `solution` must be a live handle; outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_solution_diagnostics(
    solution: *const FsSolution,
    out_residual: *mut f64,
    out_condition: *mut f64,
) -> FsStatus {
    guard(|| {
        let sol = &deref(solution, "solution")?.0;
        *out(out_residual, "out_residual")? = sol.residual;
        *out(out_condition, "out_condition")? = sol.diagnostics.condition_number.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Solution as JSON; free with [`fs_string_free`].
///
/// # Safety
/// `solution` must be a live handle; `out_json` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_solution_to_json(solution: *const FsSolution, out_json: *mut *mut c_char) -> FsStatus {
    guard(|| {
        let text = deref(solution, "solution")?.0.to_json()?;
        *out(out_json, "out_json")? = into_c_string(text)?;
        Ok(())
    })
}

/// Evaluates one stability estimate. `geometry_json` holds `k`, `centers` and
/// optionally `orders`, `l0`, `omega_measure`. `conservative` nonzero selects
/// the conservative sign variant. Writes the largest constant, the bound and
/// whether all hypotheses hold.
///
/// # Safety
/// Strings must be NUL-terminated; outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_evaluate_bound(
    theorem: *const c_char,
    geometry_json: *const c_char,
    value: f64,
    conservative: i32,
    out_constant: *mut f64,
    out_rhs: *mut f64,
    out_feasible: *mut i32,
) -> FsStatus {
    guard(|| {
        let id: TheoremId = c_str(theorem, "theorem")?.parse()?;
        let geometry: BoundGeometry =
            serde_json::from_str(c_str(geometry_json, "geometry_json")?).map_err(Error::from)?;
        let options = BoundOptions {
            sign: if conservative != 0 {
                SignVariant::Conservative
            } else {
                SignVariant::AsPrinted
            },
            ..BoundOptions::default()
        };
        let report = evaluate_bound(id, &geometry, &BoundData { value: Some(value), tau: None }, &options)?;
        *out(out_constant, "out_constant")? = report.constant;
        *out(out_rhs, "out_rhs")? = report.rhs;
        *out(out_feasible, "out_feasible")? = i32::from(report.hypotheses_ok);
        Ok(())
    })
}
