//! C interface. Sets and estimators are opaque heap handles released with
//! their `_free` function; every call returns a [`CzprStatus`] and stores
//! a message for [`czpr_last_error`] on failure. Matrices are row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use czpr::conzono::ConstrainedZonotope;
use czpr::error::Error;
use czpr::estimator::{Estimator, EstimatorState, Limits};
use czpr::harness::{self, Benchmark, ConfigOverrides};
use czpr::interval::IntervalVector;
use nalgebra::{DMatrix, DVector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CzprStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Shape = 3,
    Unsupported = 4,
    InvalidInput = 5,
    EmptySet = 6,
    Config = 7,
    NotInitialized = 8,
    Panic = 9,
}

/// Opaque constrained zonotope.
pub struct CzprSet {
    inner: ConstrainedZonotope,
}

/// Opaque estimator bound to one registered benchmark system.
pub struct CzprEstimator {
    system: Benchmark,
    estimator: Estimator,
    state: Option<EstimatorState>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CzprStatus {
    match e {
        Error::Domain(_) => CzprStatus::Domain,
        Error::Shape(_) => CzprStatus::Shape,
        Error::UnsupportedOp(_) => CzprStatus::Unsupported,
        Error::Input(_) => CzprStatus::InvalidInput,
        Error::EmptySet => CzprStatus::EmptySet,
        Error::Config(_) => CzprStatus::Config,
    }
}

struct Fail(CzprStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(CzprStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CzprStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CzprStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            CzprStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(CzprStatus::InvalidInput, format!("{what} is not UTF-8")))
}

unsafe fn set_ref<'a>(s: *const CzprSet) -> Result<&'a ConstrainedZonotope, Fail> {
    s.as_ref().map(|s| &s.inner).ok_or_else(|| null("set"))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn write_hull(h: &IntervalVector, lo: &mut [f64], hi: &mut [f64]) {
    for (i, iv) in h.iter().enumerate() {
        lo[i] = iv.lo;
        hi[i] = iv.hi;
    }
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn czpr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates `{G ξ + c : |ξ|∞ ≤ 1, A ξ = b}` with `G` (`n × n_g`) and `A`
/// (`n_c × n_g`) row-major.
///
/// # Safety
/// Array arguments must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn czpr_set_new(
    n: usize,
    n_g: usize,
    n_c: usize,
    g: *const f64,
    c: *const f64,
    a: *const f64,
    b: *const f64,
    out: *mut *mut CzprSet,
) -> CzprStatus {
    guard(|| {
        let g = DMatrix::from_row_slice(n, n_g, slice(g, n * n_g, "G")?);
        let c = DVector::from_column_slice(slice(c, n, "c")?);
        let a = DMatrix::from_row_slice(n_c, n_g, slice(a, n_c * n_g, "A")?);
        let b = DVector::from_column_slice(slice(b, n_c, "b")?);
        put(
            out,
            CzprSet {
                inner: ConstrainedZonotope::new(g, c, a, b)?,
            },
        )
    })
}

/// Creates the box `[lo, hi]`.
///
/// # Safety
/// `lo` and `hi` must hold `n` elements.
#[no_mangle]
pub unsafe extern "C" fn czpr_set_from_box(
    n: usize,
    lo: *const f64,
    hi: *const f64,
    out: *mut *mut CzprSet,
) -> CzprStatus {
    guard(|| {
        let iv = IntervalVector::from_bounds(slice(lo, n, "lo")?, slice(hi, n, "hi")?)?;
        put(
            out,
            CzprSet {
                inner: ConstrainedZonotope::from_interval(&iv),
            },
        )
    })
}

/// # Safety
/// `set` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn czpr_set_free(set: *mut CzprSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Writes dimension, generator count and constraint count. Any output
/// pointer may be null.
///
/// # Safety
/// `set` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn czpr_set_size(
    set: *const CzprSet,
    n: *mut usize,
    n_g: *mut usize,
    n_c: *mut usize,
) -> CzprStatus {
    guard(|| {
        let z = set_ref(set)?;
        for (p, v) in [(n, z.dim()), (n_g, z.n_g()), (n_c, z.n_c())] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Interval hull into `lo`/`hi` (each of the set's dimension).
///
/// # Safety
/// `lo` and `hi` must have room for `n` values.
#[no_mangle]
pub unsafe extern "C" fn czpr_set_hull(
    set: *const CzprSet,
    lo: *mut f64,
    hi: *mut f64,
) -> CzprStatus {
    guard(|| {
        let z = set_ref(set)?;
        let n = z.dim();
        let (lo, hi) = (slice_mut(lo, n, "lo")?, slice_mut(hi, n, "hi")?);
        write_hull(&z.hull()?, lo, hi);
        Ok(())
    })
}

/// Point membership; `*inside` is 1 or 0.
///
/// # Safety
/// `x` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn czpr_set_contains(
    set: *const CzprSet,
    x: *const f64,
    inside: *mut i32,
) -> CzprStatus {
    guard(|| {
        let z = set_ref(set)?;
        let x = slice(x, z.dim(), "x")?;
        if inside.is_null() {
            return Err(null("inside"));
        }
        *inside = z.contains(x)? as i32;
        Ok(())
    })
}

/// Enclosing set with at most `max_gens` generators and `max_cons`
/// constraints, as a new handle.
///
/// # Safety
/// `set` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn czpr_set_reduce(
    set: *const CzprSet,
    max_gens: usize,
    max_cons: usize,
    out: *mut *mut CzprSet,
) -> CzprStatus {
    guard(|| {
        let z = set_ref(set)?;
        put(
            out,
            CzprSet {
                inner: z.reduce(max_gens, max_cons),
            },
        )
    })
}

/// Estimator for a registered system (`example1`, `example2`, `example3`).
/// Zero limits select the system defaults.
///
/// # Safety
/// `system` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn czpr_estimator_new(
    system: *const c_char,
    gen_limit: usize,
    con_limit: usize,
    out: *mut *mut CzprEstimator,
) -> CzprStatus {
    guard(|| {
        let sys = harness::system(str_arg(system, "system")?, None)?;
        let d = sys.default_limits;
        let limits = Limits {
            max_gens: if gen_limit == 0 {
                d.max_gens
            } else {
                gen_limit
            },
            max_cons: if con_limit == 0 {
                d.max_cons
            } else {
                con_limit
            },
        };
        if limits.max_gens < sys.n_x() {
            return Err(Fail(
                CzprStatus::Config,
                "gen_limit below the state dimension".into(),
            ));
        }
        let estimator = Estimator::new(
            sys.model.clone(),
            ConstrainedZonotope::from_interval(&sys.w_box),
            ConstrainedZonotope::from_interval(&sys.v_box),
            limits,
        )?;
        put(
            out,
            CzprEstimator {
                system: sys,
                estimator,
                state: None,
            },
        )
    })
}

/// # Safety
/// `est` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn czpr_estimator_free(est: *mut CzprEstimator) {
    if !est.is_null() {
        drop(Box::from_raw(est));
    }
}

/// State, disturbance, noise and output dimensions. Null outputs are skipped.
///
/// # Safety
/// `est` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn czpr_estimator_dims(
    est: *const CzprEstimator,
    n_x: *mut usize,
    n_w: *mut usize,
    n_v: *mut usize,
    n_y: *mut usize,
) -> CzprStatus {
    guard(|| {
        let m = &est.as_ref().ok_or_else(|| null("estimator"))?.system.model;
        for (p, v) in [(n_x, m.n_x), (n_w, m.n_w), (n_v, m.n_v), (n_y, m.n_y)] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Starts from the system's initial set and the measurement `y0`.
///
/// # Safety
/// `y0` must hold `n_y` values.
#[no_mangle]
pub unsafe extern "C" fn czpr_estimator_initialize(
    est: *mut CzprEstimator,
    y0: *const f64,
) -> CzprStatus {
    guard(|| {
        let e = est.as_mut().ok_or_else(|| null("estimator"))?;
        let y0 = slice(y0, e.system.model.n_y, "y0")?;
        e.state = Some(e.estimator.initialize(&e.system.x0_set, &[], y0)?);
        Ok(())
    })
}

/// Advances one step with the measurement `y`.
///
/// # Safety
/// `y` must hold `n_y` values.
#[no_mangle]
pub unsafe extern "C" fn czpr_estimator_step(est: *mut CzprEstimator, y: *const f64) -> CzprStatus {
    guard(|| {
        let e = est.as_mut().ok_or_else(|| null("estimator"))?;
        let y = slice(y, e.system.model.n_y, "y")?;
        let state = e.state.as_ref().ok_or_else(|| {
            Fail(
                CzprStatus::NotInitialized,
                "estimator not initialized".into(),
            )
        })?;
        let u = e.system.inputs(state.k);
        e.state = Some(e.estimator.step(state, &u, &[], y)?);
        Ok(())
    })
}

unsafe fn state_ref<'a>(est: *const CzprEstimator) -> Result<&'a EstimatorState, Fail> {
    est.as_ref()
        .ok_or_else(|| null("estimator"))?
        .state
        .as_ref()
        .ok_or_else(|| {
            Fail(
                CzprStatus::NotInitialized,
                "estimator not initialized".into(),
            )
        })
}

/// Current step index and interval hull of the current enclosure.
///
/// # Safety
/// `lo` and `hi` must have room for `n_x` values; `k` may be null.
#[no_mangle]
pub unsafe extern "C" fn czpr_estimator_hull(
    est: *const CzprEstimator,
    k: *mut usize,
    lo: *mut f64,
    hi: *mut f64,
) -> CzprStatus {
    guard(|| {
        let s = state_ref(est)?;
        let n = s.hull.len();
        write_hull(&s.hull, slice_mut(lo, n, "lo")?, slice_mut(hi, n, "hi")?);
        if !k.is_null() {
            *k = s.k;
        }
        Ok(())
    })
}

/// Copy of the current enclosure as a set handle.
///
/// # Safety
/// `est` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn czpr_estimator_set(
    est: *const CzprEstimator,
    out: *mut *mut CzprSet,
) -> CzprStatus {
    guard(|| {
        let s = state_ref(est)?;
        put(
            out,
            CzprSet {
                inner: s.xhat.clone(),
            },
        )
    })
}

/// Runs a benchmark described by `key=value` config text and returns the
/// CSV in `*csv` (release with [`czpr_string_free`]). `*contained` is 1
/// when the true state stayed inside every enclosure.
///
/// # Safety
/// `config` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn czpr_run(
    config: *const c_char,
    csv: *mut *mut c_char,
    contained: *mut i32,
) -> CzprStatus {
    guard(|| {
        let cfg = ConfigOverrides::parse(str_arg(config, "config")?)?.resolve()?;
        let report = harness::run(&cfg)?;
        if !contained.is_null() {
            *contained = report.all_contained() as i32;
        }
        if let Some(text) = harness::write_csv(&cfg, &report.records)? {
            if !csv.is_null() {
                *csv = CString::new(text)
                    .map_err(|_| Fail(CzprStatus::Panic, "NUL in CSV".into()))?
                    .into_raw();
            }
        } else if !csv.is_null() {
            *csv = ptr::null_mut();
        }
        Ok(())
    })
}

/// # Safety
/// `s` must come from [`czpr_run`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn czpr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
