//! C ABI for `qcw`.
//!
//! Every fallible function returns a [`QcwStatus`]. On failure a message is
//! kept per thread and can be read with [`qcw_last_error_message`]. Opaque
//! handles are created by `*_new`/`qcw_simulate_path` and released with the
//! matching `*_free`; passing null to a free function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use qcw::calibration::{fit_spread_params, FitOptions};
use qcw::market::{simulate_path, PathSeries, PostTrade, Side, SimConfig, SimMode};
use qcw::operator::{eigenprices, PriceOperator2};
use qcw::statistics::{SpreadCdf, SpreadLaw};
use qcw::wave::StateVector;
use qcw::{Error, ModelParams};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcwStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Invalid parameters or inputs.
    Validation = 2,
    /// Numeric abort, e.g. the price-positivity guard.
    Numeric = 3,
    Io = 4,
    Parse = 5,
    /// Index past the end of a path.
    OutOfRange = 6,
    /// Internal panic caught at the boundary.
    Internal = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: QcwStatus, msg: impl Into<String>) -> QcwStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> QcwStatus {
    let status = match e {
        Error::Validation(_) => QcwStatus::Validation,
        Error::Parse { .. } => QcwStatus::Parse,
        Error::NonPositivePrice { .. } => QcwStatus::Numeric,
        Error::Io { .. } => QcwStatus::Io,
    };
    fail(status, e.to_string())
}

/// Runs `f`, clearing the error slot first and turning panics into `Internal`.
fn guard(f: impl FnOnce() -> QcwStatus) -> QcwStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(QcwStatus::Internal, format!("internal error: {msg}"))
        }
    }
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next `qcw_*` call on the same thread.
#[no_mangle]
pub extern "C" fn qcw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qcw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QcwPriceLevels {
    pub s_ask: f64,
    pub s_bid: f64,
    pub s_mid: f64,
    pub delta: f64,
}

/// Eigenprices of `[[s11, s12], [conj(s12), s22]]` with `s12 = s12_re + i·s12_im`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `QcwPriceLevels`.
#[no_mangle]
pub unsafe extern "C" fn qcw_eigenprices(
    s11: f64,
    s22: f64,
    s12_re: f64,
    s12_im: f64,
    out: *mut QcwPriceLevels,
) -> QcwStatus {
    guard(|| {
        if out.is_null() {
            return fail(QcwStatus::NullPointer, "out is null");
        }
        match PriceOperator2::new(s11, s22, Complex64::new(s12_re, s12_im)) {
            Ok(op) => {
                let lv = eigenprices(&op);
                *out = QcwPriceLevels {
                    s_ask: lv.s_ask,
                    s_bid: lv.s_bid,
                    s_mid: lv.s_mid,
                    delta: lv.delta,
                };
                QcwStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Modified Bessel function `I0(x)`.
#[no_mangle]
pub extern "C" fn qcw_bessel_i0(x: f64) -> f64 {
    qcw::bessel::bessel_i0(x)
}

/// Exponentially scaled `e^{-|x|} I0(x)`.
#[no_mangle]
pub extern "C" fn qcw_bessel_i0e(x: f64) -> f64 {
    qcw::bessel::bessel_i0e(x)
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QcwModelParams {
    pub sigma: f64,
    pub xi0: f64,
    pub xi1: f64,
    pub kappa0: f64,
    pub kappa1: f64,
    pub tau: f64,
    pub s0: f64,
    pub dt: f64,
    /// True draws a uniform phase for the coupling element.
    pub complex_kappa: bool,
}

impl From<QcwModelParams> for ModelParams {
    fn from(p: QcwModelParams) -> Self {
        ModelParams {
            sigma: p.sigma,
            xi0: p.xi0,
            xi1: p.xi1,
            kappa0: p.kappa0,
            kappa1: p.kappa1,
            tau: p.tau,
            s0: p.s0,
            dt: p.dt,
            complex_kappa: p.complex_kappa,
        }
    }
}

#[no_mangle]
pub extern "C" fn qcw_model_params_default() -> QcwModelParams {
    let p = ModelParams::default();
    QcwModelParams {
        sigma: p.sigma,
        xi0: p.xi0,
        xi1: p.xi1,
        kappa0: p.kappa0,
        kappa1: p.kappa1,
        tau: p.tau,
        s0: p.s0,
        dt: p.dt,
        complex_kappa: p.complex_kappa,
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcwSimMode {
    Balanced = 0,
    ImbalanceCoupled = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcwPostTrade {
    PhaseScramble = 0,
    Collapse = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcwSide {
    Bid = 0,
    Ask = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QcwSimConfig {
    pub n_steps: u64,
    pub initial_price: f64,
    /// Initial imbalance in [-1, 1]; the state has real amplitudes.
    pub initial_imbalance: f64,
    pub mode: QcwSimMode,
    pub c_i: f64,
    pub post_trade: QcwPostTrade,
    pub seed: u64,
}

#[no_mangle]
pub extern "C" fn qcw_sim_config_default() -> QcwSimConfig {
    let c = SimConfig::default();
    QcwSimConfig {
        n_steps: c.n_steps as u64,
        initial_price: c.initial_price,
        initial_imbalance: 0.0,
        mode: QcwSimMode::Balanced,
        c_i: c.c_i,
        post_trade: QcwPostTrade::PhaseScramble,
        seed: c.seed,
    }
}

fn to_sim_config(c: &QcwSimConfig) -> qcw::Result<SimConfig> {
    let n_steps = usize::try_from(c.n_steps).map_err(|_| Error::validation("n_steps too large"))?;
    Ok(SimConfig {
        n_steps,
        initial_price: c.initial_price,
        initial_state: StateVector::from_imbalance(c.initial_imbalance)?,
        mode: match c.mode {
            QcwSimMode::Balanced => SimMode::Balanced,
            QcwSimMode::ImbalanceCoupled => SimMode::ImbalanceCoupled,
        },
        c_i: c.c_i,
        post_trade: match c.post_trade {
            QcwPostTrade::PhaseScramble => PostTrade::PhaseScramble,
            QcwPostTrade::Collapse => PostTrade::Collapse,
        },
        seed: c.seed,
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QcwPathPoint {
    pub t: u64,
    pub s_bid: f64,
    pub s_ask: f64,
    pub s_trade: f64,
    pub side: QcwSide,
    pub imbalance: f64,
}

/// Simulated path (opaque).
pub struct QcwPath {
    inner: PathSeries,
}

/// Simulates one path and stores a new handle in `*out`.
///
/// # Safety
/// `config` and `params` must be null or valid for reads; `out` must be null
/// or valid for one pointer write. Free the handle with `qcw_path_free`.
#[no_mangle]
pub unsafe extern "C" fn qcw_simulate_path(
    config: *const QcwSimConfig,
    params: *const QcwModelParams,
    out: *mut *mut QcwPath,
) -> QcwStatus {
    guard(|| {
        if config.is_null() || params.is_null() || out.is_null() {
            return fail(QcwStatus::NullPointer, "config, params and out must be non-null");
        }
        *out = ptr::null_mut();
        let run = to_sim_config(&*config).and_then(|c| simulate_path(&c, &ModelParams::from(*params)));
        match run {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(QcwPath { inner }));
                QcwStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of points in `path`; 0 for null.
///
/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qcw_path_len(path: *const QcwPath) -> usize {
    path.as_ref().map_or(0, |p| p.inner.len())
}

/// Copies point `index` of `path` into `*out`.
///
/// # Safety
/// `path` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qcw_path_get(path: *const QcwPath, index: usize, out: *mut QcwPathPoint) -> QcwStatus {
    guard(|| {
        let (Some(p), false) = (path.as_ref(), out.is_null()) else {
            return fail(QcwStatus::NullPointer, "path and out must be non-null");
        };
        let Some(pt) = p.inner.points.get(index) else {
            return fail(
                QcwStatus::OutOfRange,
                format!("index {index} out of range for path of length {}", p.inner.len()),
            );
        };
        *out = QcwPathPoint {
            t: pt.t,
            s_bid: pt.s_bid,
            s_ask: pt.s_ask,
            s_trade: pt.s_trade,
            side: match pt.side {
                Side::Bid => QcwSide::Bid,
                Side::Ask => QcwSide::Ask,
            },
            imbalance: pt.imbalance,
        };
        QcwStatus::Ok
    })
}

/// # Safety
/// `path` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qcw_path_free(path: *mut QcwPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Spread density and its tabulated CDF (opaque).
pub struct QcwSpreadLaw {
    cdf: SpreadCdf,
}

/// Builds the spread law for scales `xi1, kappa1 > 0`.
///
/// # Safety
/// `out` must be null or valid for one pointer write. Free with
/// `qcw_spread_law_free`.
#[no_mangle]
pub unsafe extern "C" fn qcw_spread_law_new(xi1: f64, kappa1: f64, out: *mut *mut QcwSpreadLaw) -> QcwStatus {
    guard(|| {
        if out.is_null() {
            return fail(QcwStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        match SpreadLaw::new(xi1, kappa1) {
            Ok(law) => {
                *out = Box::into_raw(Box::new(QcwSpreadLaw {
                    cdf: SpreadCdf::new(law),
                }));
                QcwStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Density at `delta`; NaN for a null handle.
///
/// # Safety
/// `law` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qcw_spread_law_pdf(law: *const QcwSpreadLaw, delta: f64) -> f64 {
    law.as_ref().map_or(f64::NAN, |l| l.cdf.law().pdf(delta))
}

/// CDF at `delta`; NaN for a null handle.
///
/// # Safety
/// `law` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qcw_spread_law_cdf(law: *const QcwSpreadLaw, delta: f64) -> f64 {
    law.as_ref().map_or(f64::NAN, |l| l.cdf.cdf(delta))
}

/// # Safety
/// `law` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qcw_spread_law_free(law: *mut QcwSpreadLaw) {
    if !law.is_null() {
        drop(Box::from_raw(law));
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QcwFitResult {
    pub xi1_hat: f64,
    pub kappa1_hat: f64,
    pub loglik: f64,
    pub n: u64,
    pub converged: bool,
    pub iterations: u64,
}

/// Maximum-likelihood fit of the spread law to `n` positive samples with
/// default options (at most 500 iterations, tolerance 1e-8).
///
/// # Safety
/// `samples` must be valid for `n` reads; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qcw_fit_spreads(samples: *const f64, n: usize, out: *mut QcwFitResult) -> QcwStatus {
    guard(|| {
        if samples.is_null() || out.is_null() {
            return fail(QcwStatus::NullPointer, "samples and out must be non-null");
        }
        let data = std::slice::from_raw_parts(samples, n);
        match fit_spread_params(data, None, &FitOptions::default()) {
            Ok(f) => {
                *out = QcwFitResult {
                    xi1_hat: f.xi1_hat,
                    kappa1_hat: f.kappa1_hat,
                    loglik: f.loglik,
                    n: f.n as u64,
                    converged: f.converged,
                    iterations: f.iterations as u64,
                };
                QcwStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
