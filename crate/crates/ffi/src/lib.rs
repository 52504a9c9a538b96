//! C ABI over `hyperlap`.
//!
//! Conventions: every fallible function returns an [`HlStatus`]; outputs go
//! through caller-supplied pointers. Array outputs take a buffer and its
//! capacity and always report the required length; a short buffer yields
//! `HL_BUFFER_TOO_SMALL` with nothing written. On failure a message is kept
//! per thread and can be copied out with [`hl_last_error`].
//!
//! Hypergraphs are opaque [`HlHypergraph`] handles released with
//! [`hl_hypergraph_free`]. Strings returned by the library are released with
//! [`hl_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hyperlap::apps::level_spectrum;
use hyperlap::combin::{binom, kneser_spectrum};
use hyperlap::hypergraph::{complete, sample, Hypergraph, RandomModel};
use hyperlap::laplacian::complete_spectrum;
use hyperlap::walks::gk_formula;
use hyperlap::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Overflow = 3,
    TooLarge = 4,
    Disconnected = 5,
    Numerical = 6,
    Parse = 7,
    BufferTooSmall = 8,
    Io = 9,
    Panic = 10,
}

/// Opaque hypergraph handle.
pub struct HlHypergraph {
    inner: Hypergraph,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> HlStatus {
    match err {
        Error::Overflow(_) => HlStatus::Overflow,
        Error::TooLarge { .. } => HlStatus::TooLarge,
        Error::Disconnected(_) | Error::ZeroDegree(_) => HlStatus::Disconnected,
        Error::EigenFail { .. } => HlStatus::Numerical,
        Error::Parse { .. } => HlStatus::Parse,
        Error::Io(_) => HlStatus::Io,
        _ => HlStatus::InvalidArgument,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (HlStatus, String)>) -> HlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside hyperlap");
            HlStatus::Panic
        }
    }
}

fn lib<T>(r: hyperlap::Result<T>) -> Result<T, (HlStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (HlStatus, String) {
    (HlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn handle<'a>(h: *const HlHypergraph) -> Result<&'a Hypergraph, (HlStatus, String)> {
    h.as_ref()
        .map(|x| &x.inner)
        .ok_or_else(|| null("hypergraph handle"))
}

/// Copies `src` into `dst[..cap]` when it fits; always stores the length in `len`.
unsafe fn fill<T: Copy>(
    src: &[T],
    dst: *mut T,
    cap: usize,
    len: *mut usize,
) -> Result<(), (HlStatus, String)> {
    if len.is_null() {
        return Err(null("length output"));
    }
    *len = src.len();
    if src.len() > cap {
        return Err((
            HlStatus::BufferTooSmall,
            format!("need room for {} values, got {cap}", src.len()),
        ));
    }
    if !src.is_empty() {
        if dst.is_null() {
            return Err(null("output buffer"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    }
    Ok(())
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), (HlStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = v;
    Ok(())
}

fn to_u64(v: u128, what: &str) -> Result<u64, (HlStatus, String)> {
    u64::try_from(v).map_err(|_| {
        (
            HlStatus::Overflow,
            format!("{what} = {v} does not fit in 64 bits"),
        )
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `cap`). Returns the full message length including the NUL, or
/// 0 when there is no message.
#[no_mangle]
pub unsafe extern "C" fn hl_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            return 0;
        };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Exact binomial coefficient `C(n, k)`.
#[no_mangle]
pub unsafe extern "C" fn hl_binom(n: u64, k: u64, out: *mut u64) -> HlStatus {
    guard(|| {
        let v = lib(binom(n as usize, k as usize))?;
        put(out, to_u64(v, "binomial")?)
    })
}

/// Exact number of good closed s-walks of length `2k` with `k` distinct edges
/// and the maximum number of vertices.
#[no_mangle]
pub unsafe extern "C" fn hl_extremal_walk_count(
    n: u64,
    r: u64,
    s: u64,
    k: u64,
    out: *mut u64,
) -> HlStatus {
    guard(|| {
        let v = lib(gk_formula(n as usize, r as usize, s as usize, k as usize))?;
        put(out, to_u64(v, "walk count")?)
    })
}

/// The complete hypergraph `K^r_n`.
#[no_mangle]
pub unsafe extern "C" fn hl_hypergraph_complete(
    n: u64,
    r: u64,
    out: *mut *mut HlHypergraph,
) -> HlStatus {
    guard(|| {
        let h = lib(complete(n as usize, r as usize))?;
        put(out, Box::into_raw(Box::new(HlHypergraph { inner: h })))
    })
}

/// A sample of `H^r(n, p)` for `(seed, trial)`.
#[no_mangle]
pub unsafe extern "C" fn hl_hypergraph_sample(
    n: u64,
    r: u64,
    p: f64,
    seed: u64,
    trial: u64,
    out: *mut *mut HlHypergraph,
) -> HlStatus {
    guard(|| {
        let model = lib(RandomModel::new(n as usize, r as usize, p, seed))?.for_trial(trial);
        let h = lib(sample(&model))?;
        put(out, Box::into_raw(Box::new(HlHypergraph { inner: h })))
    })
}

/// Parses the text fixture format (`n r m` header, then one edge per line).
#[no_mangle]
pub unsafe extern "C" fn hl_hypergraph_from_text(
    text: *const c_char,
    out: *mut *mut HlHypergraph,
) -> HlStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| (HlStatus::Parse, format!("text is not UTF-8: {e}")))?;
        let h = lib(Hypergraph::from_text(text))?;
        put(out, Box::into_raw(Box::new(HlHypergraph { inner: h })))
    })
}

/// Serializes to the text fixture format; release the string with [`hl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn hl_hypergraph_to_text(
    h: *const HlHypergraph,
    out: *mut *mut c_char,
) -> HlStatus {
    guard(|| {
        let h = handle(h)?;
        let s =
            CString::new(h.to_text()).map_err(|e| (HlStatus::InvalidArgument, e.to_string()))?;
        put(out, s.into_raw())
    })
}

/// Vertex count, edge size and edge count.
#[no_mangle]
pub unsafe extern "C" fn hl_hypergraph_counts(
    h: *const HlHypergraph,
    n: *mut u64,
    r: *mut u64,
    m: *mut u64,
) -> HlStatus {
    guard(|| {
        let h = handle(h)?;
        put(n, h.n() as u64)?;
        put(r, h.r() as u64)?;
        put(m, h.edge_count() as u64)
    })
}

#[no_mangle]
pub unsafe extern "C" fn hl_hypergraph_free(h: *mut HlHypergraph) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

#[no_mangle]
pub unsafe extern "C" fn hl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Ascending eigenvalues of the s-th Laplacian on the positive-degree s-sets.
#[no_mangle]
pub unsafe extern "C" fn hl_loose_spectrum(
    h: *const HlHypergraph,
    s: u64,
    values: *mut f64,
    cap: usize,
    len: *mut usize,
) -> HlStatus {
    guard(|| {
        let level = lib(level_spectrum(handle(h)?, s as usize))?;
        fill(&level.spectrum.values, values, cap, len)
    })
}

/// Spectral radius `max(1 - lambda_1, lambda_max - 1)`; `HL_DISCONNECTED` when
/// the auxiliary graph is disconnected or has zero-degree s-sets.
#[no_mangle]
pub unsafe extern "C" fn hl_spectral_radius(
    h: *const HlHypergraph,
    s: u64,
    out: *mut f64,
) -> HlStatus {
    guard(|| {
        let level = lib(level_spectrum(handle(h)?, s as usize))?;
        put(out, lib(level.lambda_bar())?)
    })
}

/// Closed-form spectrum of the s-th Laplacian of `K^r_n`: distinct values with multiplicities.
#[no_mangle]
pub unsafe extern "C" fn hl_complete_spectrum(
    n: u64,
    r: u64,
    s: u64,
    values: *mut f64,
    multiplicities: *mut u64,
    cap: usize,
    len: *mut usize,
) -> HlStatus {
    guard(|| {
        let pairs = lib(complete_spectrum(n as usize, r as usize, s as usize))?;
        let v: Vec<f64> = pairs.iter().map(|e| e.value).collect();
        let m = pairs
            .iter()
            .map(|e| to_u64(e.multiplicity, "multiplicity"))
            .collect::<Result<Vec<_>, _>>()?;
        fill(&v, values, cap, len)?;
        fill(&m, multiplicities, cap, len)
    })
}

/// Kneser graph `K(n, s)` adjacency spectrum: integer values with multiplicities.
#[no_mangle]
pub unsafe extern "C" fn hl_kneser_spectrum(
    n: u64,
    s: u64,
    values: *mut i64,
    multiplicities: *mut u64,
    cap: usize,
    len: *mut usize,
) -> HlStatus {
    guard(|| {
        let pairs = lib(kneser_spectrum(n as usize, s as usize))?;
        let v: Vec<i64> = pairs.iter().map(|e| e.value.round() as i64).collect();
        let m = pairs
            .iter()
            .map(|e| to_u64(e.multiplicity, "multiplicity"))
            .collect::<Result<Vec<_>, _>>()?;
        fill(&v, values, cap, len)?;
        fill(&m, multiplicities, cap, len)
    })
}
