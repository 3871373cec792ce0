//! C interface to `ldproj`.
//!
//! Every fallible function returns an [`LdprojStatus`]; on failure the
//! message is available from [`ldproj_last_error_message`] on the same
//! thread. Exponents are passed as `double`, with `INFINITY` for `p = ∞`;
//! an optional `p` or `lambda` is absent when it is `NAN`. Rates equal to
//! `+inf` come back as `INFINITY`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ldproj::rates::{moment_m, RateConfig, RateCurve, RateName, RateQuery};
use ldproj::sampling::{count_hits, generate_values, Method, PExponent, Quantity, QuantityConfig};
use ldproj::verify::{
    clopper_pearson, exact_v1_interval_probability, exact_v_interval_probability, ks_two_sample, oracle_quadrature,
};
use ldproj::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LdprojStatus {
    Ok = 0,
    Domain = 1,
    Precondition = 2,
    UnsupportedRegime = 3,
    NonConvergence = 4,
    Io = 5,
    Format = 6,
    NullPointer = 7,
    InvalidString = 8,
    Panic = 9,
}

enum Failure {
    Core(Error),
    Null(&'static str),
    BadString(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn status(&self) -> LdprojStatus {
        match self {
            Failure::Null(_) => LdprojStatus::NullPointer,
            Failure::BadString(_) => LdprojStatus::InvalidString,
            Failure::Core(e) => match e {
                Error::Domain(_) => LdprojStatus::Domain,
                Error::Precondition(_) => LdprojStatus::Precondition,
                Error::UnsupportedRegime(_) => LdprojStatus::UnsupportedRegime,
                Error::NonConvergence { .. } => LdprojStatus::NonConvergence,
                Error::Io(_) => LdprojStatus::Io,
                Error::Format(_) => LdprojStatus::Format,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Null(arg) => format!("null pointer passed as `{arg}`"),
            Failure::BadString(arg) => format!("`{arg}` is not valid UTF-8"),
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LdprojStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            LdprojStatus::Ok
        }
        Ok(Err(fail)) => {
            set_last_error(fail.message());
            fail.status()
        }
        Err(panic) => {
            let what = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {what}"));
            LdprojStatus::Panic
        }
    }
}

unsafe fn text<'a>(ptr: *const c_char, arg: &'static str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure::Null(arg));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| Failure::BadString(arg))
}

unsafe fn write<T>(ptr: *mut T, value: T, arg: &'static str) -> Result<(), Failure> {
    if ptr.is_null() {
        return Err(Failure::Null(arg));
    }
    ptr.write(value);
    Ok(())
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, arg: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure::Null(arg));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn exponent(p: f64) -> Result<PExponent, Failure> {
    Ok(PExponent::new(p)?)
}

fn optional_exponent(p: f64) -> Result<Option<PExponent>, Failure> {
    if p.is_nan() {
        Ok(None)
    } else {
        exponent(p).map(Some)
    }
}

fn optional(v: f64) -> Option<f64> {
    (!v.is_nan()).then_some(v)
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `ldproj_*` call on the thread.
#[no_mangle]
pub extern "C" fn ldproj_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ldproj_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// A configured sampler of one quantity.
pub struct LdprojSampler {
    cfg: QuantityConfig,
    seed: u64,
}

/// Creates a sampler. `quantity` is one of `scaled_norm`, `factor_U`,
/// `factor_V`, `factor_V1`, `factor_W`, `mean_Z2`, `mean_Zp`, `mean_G2`;
/// `method` is `direct` or `product` (NULL means `product`).
///
/// # Safety
/// String arguments must be NULL or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldproj_sampler_new(
    quantity: *const c_char,
    n: usize,
    k: usize,
    p: f64,
    method: *const c_char,
    seed: u64,
    out: *mut *mut LdprojSampler,
) -> LdprojStatus {
    guard(|| {
        let quantity: Quantity = text(quantity, "quantity")?.parse()?;
        let method: Method = if method.is_null() { Method::Product } else { text(method, "method")?.parse()? };
        let cfg = QuantityConfig {
            quantity,
            n,
            k,
            p: exponent(p)?,
            method,
        };
        cfg.validate()?;
        write(out, Box::into_raw(Box::new(LdprojSampler { cfg, seed })), "out")
    })
}

/// Replaces the seed; the next fill starts a fresh sequence.
///
/// # Safety
/// `sampler` must come from [`ldproj_sampler_new`] and not be freed.
#[no_mangle]
pub unsafe extern "C" fn ldproj_sampler_set_seed(sampler: *mut LdprojSampler, seed: u64) -> LdprojStatus {
    guard(|| {
        let s = sampler.as_mut().ok_or(Failure::Null("sampler"))?;
        s.seed = seed;
        Ok(())
    })
}

/// Writes `count` draws to `out`. Equal seeds give equal values for any
/// `workers`.
///
/// # Safety
/// `sampler` must be live and `out` must hold `count` doubles.
#[no_mangle]
pub unsafe extern "C" fn ldproj_sampler_fill(
    sampler: *const LdprojSampler,
    count: usize,
    workers: usize,
    out: *mut f64,
) -> LdprojStatus {
    guard(|| {
        let s = sampler.as_ref().ok_or(Failure::Null("sampler"))?;
        if count == 0 {
            return Ok(());
        }
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let values = generate_values(&s.cfg, s.seed, count, workers.max(1))?;
        std::slice::from_raw_parts_mut(out, count).copy_from_slice(&values);
        Ok(())
    })
}

/// Counts the draws among `trials` that fall in `[lo, hi]` (`hi` may be
/// `INFINITY`), without storing them.
///
/// # Safety
/// `sampler` must be live and `hits` writable.
#[no_mangle]
pub unsafe extern "C" fn ldproj_sampler_count_hits(
    sampler: *const LdprojSampler,
    trials: usize,
    lo: f64,
    hi: f64,
    workers: usize,
    hits: *mut u64,
) -> LdprojStatus {
    guard(|| {
        let s = sampler.as_ref().ok_or(Failure::Null("sampler"))?;
        let h = count_hits(&s.cfg, s.seed, trials, lo, hi, workers.max(1))?;
        write(hits, h, "hits")
    })
}

/// Frees a sampler; NULL is ignored.
///
/// # Safety
/// `sampler` must be NULL or come from [`ldproj_sampler_new`], freed once.
#[no_mangle]
pub unsafe extern "C" fn ldproj_sampler_free(sampler: *mut LdprojSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}

fn rate_query(name: &str, p: f64, lambda: f64, y: f64) -> Result<RateQuery, Failure> {
    let q = RateQuery {
        name: name.parse::<RateName>()?,
        p: optional_exponent(p)?,
        lambda: optional(lambda),
        y,
    };
    q.validate()?;
    Ok(q)
}

/// Evaluates the named rate (`rate_U`, `rate_V`, `rate_V1`, `rate_W`,
/// `rate_projection`, `rate_Z2_sum`, `rate_G_mean`, `rate_Zp_mean`) at `y`.
///
/// # Safety
/// `name` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ldproj_rate(
    name: *const c_char,
    p: f64,
    lambda: f64,
    y: f64,
    out: *mut f64,
) -> LdprojStatus {
    guard(|| {
        let v = rate_query(text(name, "name")?, p, lambda, y)?.evaluate()?;
        write(out, v.to_f64(), "out")
    })
}

/// A rate function tabulated on a grid.
pub struct LdprojRateCurve {
    curve: RateCurve,
}

/// Tabulates a rate on the strictly increasing points `ys[0..count]`.
///
/// # Safety
/// `name` must be NUL-terminated, `ys` must hold `count` doubles and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldproj_rate_curve_new(
    name: *const c_char,
    p: f64,
    lambda: f64,
    ys: *const f64,
    count: usize,
    out: *mut *mut LdprojRateCurve,
) -> LdprojStatus {
    guard(|| {
        let q = rate_query(text(name, "name")?, p, lambda, 0.0)?;
        let ys = slice(ys, count, "ys")?;
        let curve = RateCurve::compute(q.name, q.p, q.lambda, ys, &RateConfig::default())?;
        write(out, Box::into_raw(Box::new(LdprojRateCurve { curve })), "out")
    })
}

/// Number of grid points; 0 for NULL.
///
/// # Safety
/// `curve` must be NULL or live.
#[no_mangle]
pub unsafe extern "C" fn ldproj_rate_curve_len(curve: *const LdprojRateCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.curve.grid.len())
}

/// The `index`-th point and its rate value.
///
/// # Safety
/// `curve` must be live; `y` and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn ldproj_rate_curve_get(
    curve: *const LdprojRateCurve,
    index: usize,
    y: *mut f64,
    value: *mut f64,
) -> LdprojStatus {
    guard(|| {
        let c = curve.as_ref().ok_or(Failure::Null("curve"))?;
        let &(py, pv) = c
            .curve
            .grid
            .get(index)
            .ok_or_else(|| Error::Domain(format!("index {index} out of range (len {})", c.curve.grid.len())))?;
        write(y, py, "y")?;
        write(value, pv.to_f64(), "value")
    })
}

/// Frees a rate curve; NULL is ignored.
///
/// # Safety
/// `curve` must be NULL or come from [`ldproj_rate_curve_new`], freed once.
#[no_mangle]
pub unsafe extern "C" fn ldproj_rate_curve_free(curve: *mut LdprojRateCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// `m_p = E Z²` for the p-generalized Gaussian, by quadrature.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldproj_moment_m(p: f64, out: *mut f64) -> LdprojStatus {
    guard(|| write(out, moment_m(exponent(p)?)?, "out"))
}

/// `P(a1 ≤ V ≤ a2)` with `V²` ~ Beta(k/2, (n−k)/2).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldproj_exact_v_interval_probability(
    n: usize,
    k: usize,
    a1: f64,
    a2: f64,
    out: *mut f64,
) -> LdprojStatus {
    guard(|| write(out, exact_v_interval_probability(n, k, a1, a2)?, "out"))
}

/// `P(a1 ≤ U^{1/n} V ≤ a2)` by quadrature.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldproj_exact_v1_interval_probability(
    n: usize,
    k: usize,
    a1: f64,
    a2: f64,
    out: *mut f64,
) -> LdprojStatus {
    guard(|| write(out, exact_v1_interval_probability(n, k, a1, a2, &oracle_quadrature())?, "out"))
}

/// Clopper–Pearson bounds for `hits` out of `trials` at confidence `level`.
///
/// # Safety
/// `lo` and `hi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldproj_clopper_pearson(
    hits: u64,
    trials: u64,
    level: f64,
    lo: *mut f64,
    hi: *mut f64,
) -> LdprojStatus {
    guard(|| {
        let (l, h) = clopper_pearson(hits, trials, level)?;
        write(lo, l, "lo")?;
        write(hi, h, "hi")
    })
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
///
/// # Safety
/// `a` and `b` must hold `na` and `nb` doubles; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldproj_ks_two_sample(
    a: *const f64,
    na: usize,
    b: *const f64,
    nb: usize,
    statistic: *mut f64,
    p_value: *mut f64,
) -> LdprojStatus {
    guard(|| {
        let r = ks_two_sample(slice(a, na, "a")?, slice(b, nb, "b")?)?;
        write(statistic, r.statistic, "statistic")?;
        write(p_value, r.p_value, "p_value")
    })
}
