//! C interface to the LQG landscape library.
//!
//! Plants and controllers live behind opaque handles created by the
//! `*_new` functions and released with the matching `*_free`. Matrices cross
//! the boundary as row-major `double` arrays whose sizes the caller derives
//! from the dimensions: a plant has `A` n×n, `B` n×m, `C` p×n, `W` n×n,
//! `V` p×p, `Q` n×n, `R` m×m; a controller has `A_K` q×q, `B_K` q×p and
//! `C_K` m×q. Every pointer argument must be valid for the stated size or,
//! for arrays of zero length, may be null.
//!
//! Every function returns an [`LqgStatus`]. On failure a description is kept
//! per thread and can be read with [`lqg_last_error_message`]. Panics are
//! caught at the boundary and reported as [`LqgStatus::Panic`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lqg_landscape::connectivity::{component_sign, ComponentSign};
use lqg_landscape::cost::{lqg_cost as cost_of, lqg_gradient as gradient_of};
use lqg_landscape::error::Error;
use lqg_landscape::io::plant_from_json;
use lqg_landscape::linalg::{Mat, TimeDomain};
use lqg_landscape::model::{is_stabilizing, Controller, Plant};
use lqg_landscape::synthesis::{analyze_stationary, riccati_controller, StationaryVerdict};

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LqgStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Inputs are malformed or violate a documented invariant.
    Validation = 2,
    /// The problem is well posed but the computation failed, for example
    /// because the controller does not stabilize the plant.
    Numerical = 3,
    NoPathFound = 4,
    /// A panic was caught at the boundary.
    Panic = 5,
}

/// Classification returned by [`lqg_analyze_stationary`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LqgVerdict {
    GlobalOptimum = 0,
    NonMinimalStationary = 1,
    NotStationary = 2,
    Inconclusive = 3,
}

/// Opaque plant handle.
pub struct LqgPlant(Plant);

/// Opaque controller handle.
pub struct LqgController(Controller);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn set_last_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).expect("interior NULs were removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> LqgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            LqgStatus::Ok
        }
        Ok(Err(Failure::Null(name))) => {
            set_last_error(&format!("null pointer: {name}"));
            LqgStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(&e.to_string());
            match e {
                Error::NoPathFound(_) => LqgStatus::NoPathFound,
                e if e.is_validation() => LqgStatus::Validation,
                _ => LqgStatus::Numerical,
            }
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            LqgStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(name))
}

unsafe fn read_mat(p: *const f64, rows: usize, cols: usize, name: &'static str) -> Result<Mat, Failure> {
    let len = rows * cols;
    if len == 0 {
        return Ok(Mat::zeros(rows, cols));
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(Mat::from_row_slice(rows, cols, std::slice::from_raw_parts(p, len)))
}

unsafe fn write_mat(p: *mut f64, m: &Mat, name: &'static str) -> Result<(), Failure> {
    if m.is_empty() {
        return Ok(());
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    let dst = std::slice::from_raw_parts_mut(p, m.len());
    for (i, row) in m.row_iter().enumerate() {
        dst[i * m.ncols()..(i + 1) * m.ncols()].iter_mut().zip(row.iter()).for_each(|(d, s)| *d = *s);
    }
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Builds a plant from row-major matrices. `discrete` selects the time domain.
#[no_mangle]
pub unsafe extern "C" fn lqg_plant_new(
    n: usize,
    m: usize,
    p: usize,
    a: *const f64,
    b: *const f64,
    c: *const f64,
    w: *const f64,
    v: *const f64,
    q: *const f64,
    r: *const f64,
    discrete: bool,
    plant_out: *mut *mut LqgPlant,
) -> LqgStatus {
    guard(|| {
        let slot = out(plant_out, "plant_out")?;
        *slot = ptr::null_mut();
        let domain = if discrete { TimeDomain::Discrete } else { TimeDomain::Continuous };
        let plant = Plant::new(
            read_mat(a, n, n, "A")?,
            read_mat(b, n, m, "B")?,
            read_mat(c, p, n, "C")?,
            read_mat(w, n, n, "W")?,
            read_mat(v, p, p, "V")?,
            read_mat(q, n, n, "Q")?,
            read_mat(r, m, m, "R")?,
            domain,
        )?;
        *slot = boxed(LqgPlant(plant));
        Ok(())
    })
}

/// Parses a plant from a NUL-terminated JSON document.
#[no_mangle]
pub unsafe extern "C" fn lqg_plant_from_json(json: *const c_char, plant_out: *mut *mut LqgPlant) -> LqgStatus {
    guard(|| {
        let slot = out(plant_out, "plant_out")?;
        *slot = ptr::null_mut();
        if json.is_null() {
            return Err(Failure::Null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Error::Invalid(format!("plant JSON is not UTF-8: {e}")))?;
        *slot = boxed(LqgPlant(plant_from_json(text)?));
        Ok(())
    })
}

/// Releases a plant; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lqg_plant_free(plant: *mut LqgPlant) {
    if !plant.is_null() {
        drop(Box::from_raw(plant));
    }
}

/// State, input and output dimensions of a plant.
#[no_mangle]
pub unsafe extern "C" fn lqg_plant_dims(plant: *const LqgPlant, n: *mut usize, m: *mut usize, p: *mut usize) -> LqgStatus {
    guard(|| {
        let plant = &deref(plant, "plant")?.0;
        *out(n, "n")? = plant.n();
        *out(m, "m")? = plant.m();
        *out(p, "p")? = plant.p();
        Ok(())
    })
}

/// Builds a strictly proper controller of order `q` with `m` outputs and
/// `p` inputs.
#[no_mangle]
pub unsafe extern "C" fn lqg_controller_new(
    q: usize,
    m: usize,
    p: usize,
    a_k: *const f64,
    b_k: *const f64,
    c_k: *const f64,
    controller_out: *mut *mut LqgController,
) -> LqgStatus {
    guard(|| {
        let slot = out(controller_out, "controller_out")?;
        *slot = ptr::null_mut();
        let k = Controller::new(read_mat(a_k, q, q, "A_K")?, read_mat(b_k, q, p, "B_K")?, read_mat(c_k, m, q, "C_K")?)?;
        *slot = boxed(LqgController(k));
        Ok(())
    })
}

/// Releases a controller; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lqg_controller_free(controller: *mut LqgController) {
    if !controller.is_null() {
        drop(Box::from_raw(controller));
    }
}

/// Order, output count and input count of a controller.
#[no_mangle]
pub unsafe extern "C" fn lqg_controller_dims(
    controller: *const LqgController,
    q: *mut usize,
    m: *mut usize,
    p: *mut usize,
) -> LqgStatus {
    guard(|| {
        let k = &deref(controller, "controller")?.0;
        *out(q, "q")? = k.order();
        *out(m, "m")? = k.outputs();
        *out(p, "p")? = k.inputs();
        Ok(())
    })
}

/// Copies the controller matrices into caller buffers of sizes q×q, q×p
/// and m×q.
#[no_mangle]
pub unsafe extern "C" fn lqg_controller_get(
    controller: *const LqgController,
    a_k: *mut f64,
    b_k: *mut f64,
    c_k: *mut f64,
) -> LqgStatus {
    guard(|| {
        let k = &deref(controller, "controller")?.0;
        write_mat(a_k, k.a(), "A_K")?;
        write_mat(b_k, k.b(), "B_K")?;
        write_mat(c_k, k.c(), "C_K")?;
        Ok(())
    })
}

/// Riccati-optimal full-order controller and its cost. `cost_out` may be null.
#[no_mangle]
pub unsafe extern "C" fn lqg_riccati_controller(
    plant: *const LqgPlant,
    controller_out: *mut *mut LqgController,
    cost_out: *mut f64,
) -> LqgStatus {
    guard(|| {
        let plant = &deref(plant, "plant")?.0;
        let slot = out(controller_out, "controller_out")?;
        *slot = ptr::null_mut();
        let opt = riccati_controller(plant)?;
        if let Some(j) = cost_out.as_mut() {
            *j = opt.j;
        }
        *slot = boxed(LqgController(opt.controller));
        Ok(())
    })
}

/// LQG cost of a stabilizing controller.
#[no_mangle]
pub unsafe extern "C" fn lqg_cost(plant: *const LqgPlant, controller: *const LqgController, cost_out: *mut f64) -> LqgStatus {
    guard(|| {
        let plant = &deref(plant, "plant")?.0;
        let k = &deref(controller, "controller")?.0;
        let slot = out(cost_out, "cost_out")?;
        *slot = cost_of(plant, k)?.j;
        Ok(())
    })
}

/// Gradient blocks written into buffers shaped like `A_K`, `B_K`, `C_K`,
/// and the Frobenius norm of the whole gradient (`norm_out` may be null).
#[no_mangle]
pub unsafe extern "C" fn lqg_gradient(
    plant: *const LqgPlant,
    controller: *const LqgController,
    grad_a: *mut f64,
    grad_b: *mut f64,
    grad_c: *mut f64,
    norm_out: *mut f64,
) -> LqgStatus {
    guard(|| {
        let plant = &deref(plant, "plant")?.0;
        let k = &deref(controller, "controller")?.0;
        let g = gradient_of(plant, k)?;
        write_mat(grad_a, &g.ga, "grad_a")?;
        write_mat(grad_b, &g.gb, "grad_b")?;
        write_mat(grad_c, &g.gc, "grad_c")?;
        if let Some(n) = norm_out.as_mut() {
            *n = g.norm;
        }
        Ok(())
    })
}

/// Whether the closed loop is stable, with its stability margin (largest
/// real part, or spectral radius minus one in discrete time). `margin_out`
/// may be null.
#[no_mangle]
pub unsafe extern "C" fn lqg_is_stabilizing(
    plant: *const LqgPlant,
    controller: *const LqgController,
    stable_out: *mut bool,
    margin_out: *mut f64,
) -> LqgStatus {
    guard(|| {
        let plant = &deref(plant, "plant")?.0;
        let k = &deref(controller, "controller")?.0;
        let slot = out(stable_out, "stable_out")?;
        let rep = is_stabilizing(plant, k)?;
        *slot = rep.stable;
        if let Some(m) = margin_out.as_mut() {
            *m = rep.margin;
        }
        Ok(())
    })
}

/// Classifies a stabilizing full-order controller; `tol` is the gradient
/// norm treated as zero.
#[no_mangle]
pub unsafe extern "C" fn lqg_analyze_stationary(
    plant: *const LqgPlant,
    controller: *const LqgController,
    tol: f64,
    verdict_out: *mut LqgVerdict,
) -> LqgStatus {
    guard(|| {
        let plant = &deref(plant, "plant")?.0;
        let k = &deref(controller, "controller")?.0;
        let slot = out(verdict_out, "verdict_out")?;
        *slot = match analyze_stationary(plant, k, tol)?.verdict {
            StationaryVerdict::GlobalOptimum => LqgVerdict::GlobalOptimum,
            StationaryVerdict::NonMinimalStationary => LqgVerdict::NonMinimalStationary,
            StationaryVerdict::NotStationary => LqgVerdict::NotStationary,
            StationaryVerdict::Inconclusive => LqgVerdict::Inconclusive,
        };
        Ok(())
    })
}

/// Sign (+1 or -1) of the determinant of the lifted similarity factor of a
/// full-order controller. Controllers with different signs cannot be joined
/// without passing through a reduced-order controller.
#[no_mangle]
pub unsafe extern "C" fn lqg_component_sign(
    plant: *const LqgPlant,
    controller: *const LqgController,
    sign_out: *mut i32,
) -> LqgStatus {
    guard(|| {
        let plant = &deref(plant, "plant")?.0;
        let k = &deref(controller, "controller")?.0;
        let slot = out(sign_out, "sign_out")?;
        *slot = match component_sign(plant, k)? {
            ComponentSign::Plus => 1,
            ComponentSign::Minus => -1,
        };
        Ok(())
    })
}

/// Message of the last failed call on this thread (empty after a success).
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn lqg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn lqg_status_string(status: LqgStatus) -> *const c_char {
    let text: &'static CStr = match status {
        LqgStatus::Ok => c"ok",
        LqgStatus::NullPointer => c"null pointer argument",
        LqgStatus::Validation => c"invalid input",
        LqgStatus::Numerical => c"numerical failure",
        LqgStatus::NoPathFound => c"no path found",
        LqgStatus::Panic => c"internal panic",
    };
    text.as_ptr()
}
