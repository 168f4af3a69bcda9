//! C ABI over `polyconv`.
//!
//! Distributions and polyhedra are opaque handles created by the library and
//! released with the matching `*_free` function. Every fallible call returns a
//! [`PcStatus`]; on failure a message is available from
//! [`pc_last_error_message`] on the same thread until the next failing call.
//! Panics never cross the boundary; they are reported as
//! [`PcStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use polyconv::dist::{
    char_fn, compound_poisson, convolve, format_distribution, mixture, parse_distribution, power_exact,
    total_variation,
};
use polyconv::poly::{kolmogorov_rho, measure};
use polyconv::{DiscreteDistribution, Error, Point, Polyhedron};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Parse = 3,
    ResourceLimit = 4,
    Utf8 = 5,
    Io = 6,
    Panic = 7,
}

/// Opaque finite-support probability distribution.
pub struct PcDistribution(DiscreteDistribution);

/// Opaque convex polyhedron.
pub struct PcPolyhedron(Polyhedron);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PcStatus {
    match e {
        Error::InvalidInput(_) => PcStatus::InvalidInput,
        Error::ResourceLimit(_) => PcStatus::ResourceLimit,
        Error::Parse { .. } => PcStatus::Parse,
        Error::Io(_) => PcStatus::Io,
    }
}

struct Failure(PcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PcStatus::NullPointer, format!("{what} is null"))
}

fn guard<F>(f: F) -> PcStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PcStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Failure(PcStatus::Utf8, format!("{what}: {e}")))
}

unsafe fn dist<'a>(d: *const PcDistribution, what: &str) -> Result<&'a DiscreteDistribution, Failure> {
    d.as_ref().map(|d| &d.0).ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_dist(out: *mut *mut PcDistribution, d: DiscreteDistribution) -> Result<(), Failure> {
    put(out, Box::into_raw(Box::new(PcDistribution(d))), "out")
}

/// Message of the last failing call on this thread, or NULL. The pointer
/// stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn pc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a distribution literal.
///
/// # Safety
/// `literal` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_distribution_parse(literal: *const c_char, out: *mut *mut PcDistribution) -> PcStatus {
    guard(|| {
        let d = parse_distribution(text(literal, "literal")?)?;
        put_dist(out, d)
    })
}

/// Builds a distribution from `len` atoms; `coords` holds `len * dim`
/// values row by row. Masses must sum to 1.
///
/// # Safety
/// `coords` and `masses` must point to that many readable doubles.
#[no_mangle]
pub unsafe extern "C" fn pc_distribution_from_atoms(
    dim: usize,
    coords: *const f64,
    masses: *const f64,
    len: usize,
    out: *mut *mut PcDistribution,
) -> PcStatus {
    guard(|| {
        let total = len.checked_mul(dim).ok_or_else(|| Failure(PcStatus::InvalidInput, "size overflow".into()))?;
        let c = slice(coords, total, "coords")?;
        let m = slice(masses, len, "masses")?;
        let atoms = m
            .iter()
            .enumerate()
            .map(|(i, &w)| Ok((Point::new(c[i * dim..(i + 1) * dim].to_vec())?, w)))
            .collect::<Result<Vec<_>, Error>>()?;
        put_dist(out, DiscreteDistribution::new(dim, atoms)?)
    })
}

/// Writes the literal form of `d` to `out`; release it with [`pc_string_free`].
///
/// # Safety
/// `d` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_distribution_format(d: *const PcDistribution, out: *mut *mut c_char) -> PcStatus {
    guard(|| {
        let s = format_distribution(dist(d, "distribution")?);
        let c = CString::new(s).map_err(|e| Failure(PcStatus::InvalidInput, e.to_string()))?;
        put(out, c.into_raw(), "out")
    })
}

/// Dimension of `d`, or 0 for NULL.
///
/// # Safety
/// `d` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_distribution_dim(d: *const PcDistribution) -> usize {
    d.as_ref().map_or(0, |d| d.0.dim())
}

/// Number of atoms of `d`, or 0 for NULL.
///
/// # Safety
/// `d` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_distribution_len(d: *const PcDistribution) -> usize {
    d.as_ref().map_or(0, |d| d.0.len())
}

/// Mass of the atom at `x` (0 when absent).
///
/// # Safety
/// `x` must point to `dim` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn pc_distribution_mass_at(
    d: *const PcDistribution,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> PcStatus {
    guard(|| {
        let d = dist(d, "distribution")?;
        if dim != d.dim() {
            return Err(Failure(PcStatus::InvalidInput, format!("point has dimension {dim}, law has {}", d.dim())));
        }
        put(out, d.mass_at(slice(x, dim, "x")?), "out")
    })
}

/// # Safety
/// `d` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_distribution_free(d: *mut PcDistribution) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `F * G`.
///
/// # Safety
/// `f`, `g` must be live handles and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_convolve(
    f: *const PcDistribution,
    g: *const PcDistribution,
    out: *mut *mut PcDistribution,
) -> PcStatus {
    guard(|| put_dist(out, convolve(dist(f, "f")?, dist(g, "g")?)?))
}

/// `F^n`; `F^0` is the unit mass at the origin.
///
/// # Safety
/// `f` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_power(f: *const PcDistribution, n: u64, out: *mut *mut PcDistribution) -> PcStatus {
    guard(|| put_dist(out, power_exact(dist(f, "f")?, n)?))
}

/// `e(alpha H)` truncated at tail mass `tol`; the truncated mass goes to
/// `error_bound` when it is not NULL.
///
/// # Safety
/// `h` must be a live handle, `out` writable, `error_bound` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn pc_compound_poisson(
    alpha: f64,
    h: *const PcDistribution,
    tol: f64,
    out: *mut *mut PcDistribution,
    error_bound: *mut f64,
) -> PcStatus {
    guard(|| {
        let r = compound_poisson(alpha, dist(h, "h")?, tol)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !error_bound.is_null() {
            error_bound.write(r.error_bound);
        }
        put_dist(out, r.dist)
    })
}

/// `(1 - p) E + p V`.
///
/// # Safety
/// `v` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_mixture(p: f64, v: *const PcDistribution, out: *mut *mut PcDistribution) -> PcStatus {
    guard(|| put_dist(out, mixture(p, dist(v, "v")?)?))
}

/// Characteristic function of `f` at `t`.
///
/// # Safety
/// `t` must point to `dim` readable doubles; `re`, `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_char_fn(
    f: *const PcDistribution,
    t: *const f64,
    dim: usize,
    re: *mut f64,
    im: *mut f64,
) -> PcStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let z = char_fn(dist(f, "f")?, slice(t, dim, "t")?)?;
        re.write(z.re);
        im.write(z.im);
        Ok(())
    })
}

/// Total-variation distance.
///
/// # Safety
/// `f`, `g` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_total_variation(
    f: *const PcDistribution,
    g: *const PcDistribution,
    out: *mut f64,
) -> PcStatus {
    guard(|| put(out, total_variation(dist(f, "f")?, dist(g, "g")?)?, "out"))
}

/// Exact Kolmogorov distance `sup_x |G(x) - H(x)|` over lower orthants.
///
/// # Safety
/// `g`, `h` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_kolmogorov(
    g: *const PcDistribution,
    h: *const PcDistribution,
    out: *mut f64,
) -> PcStatus {
    guard(|| put(out, kolmogorov_rho(dist(g, "g")?, dist(h, "h")?)?.value, "out"))
}

/// Parses a polyhedron literal: `m <count>`, then one `<t_1 .. t_d> <b|inf>`
/// line per face.
///
/// # Safety
/// `literal` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_polyhedron_parse(literal: *const c_char, out: *mut *mut PcPolyhedron) -> PcStatus {
    guard(|| {
        let p = Polyhedron::parse(text(literal, "literal")?)?;
        put(out, Box::into_raw(Box::new(PcPolyhedron(p))), "out")
    })
}

/// # Safety
/// `p` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_polyhedron_free(p: *mut PcPolyhedron) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// `F{P}`.
///
/// # Safety
/// `f`, `p` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_measure(f: *const PcDistribution, p: *const PcPolyhedron, out: *mut f64) -> PcStatus {
    guard(|| {
        let p = p.as_ref().map(|p| &p.0).ok_or_else(|| null("polyhedron"))?;
        put(out, measure(dist(f, "f")?, p)?, "out")
    })
}
