//! C ABI over the `beamspace` crate.
//!
//! Every fallible call returns a [`BsStatus`]. On failure a message is kept in
//! thread-local storage and can be copied out with [`bs_last_error`].
//! Objects are opaque handles released with their matching `*_free` call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use beamspace::analysis::{
    amplitude_threshold, detection_probability_lower_bound, power_ratio_lower_bound,
    AmplitudeThreshold,
};
use beamspace::estimators::{omp_estimate, sd_estimate};
use beamspace::experiments::{emit_results, run_experiment, ExperimentConfig, OutputFormat, ResultTable};
use beamspace::measurement::{generate_combiner, mutual_coherence, Combiner};
use beamspace::rng::from_seed;
use beamspace::{CVector, Complex64, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    SingularSystem = 4,
    Config = 5,
    Io = 6,
    Panic = 7,
}

/// Complex double, layout-compatible with C99 `double _Complex`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsComplex {
    pub re: f64,
    pub im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsFormat {
    Csv = 0,
    Json = 1,
}

/// Opaque measurement combiner.
pub struct BsCombiner {
    inner: Combiner,
}

/// Opaque experiment configuration.
pub struct BsExperimentConfig {
    inner: ExperimentConfig,
}

/// Opaque result table.
pub struct BsResultTable {
    inner: ResultTable,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> BsStatus {
    match e {
        Error::InvalidParameter(_) | Error::ZeroNorm | Error::SupportTooLarge { .. } => {
            BsStatus::InvalidArgument
        }
        Error::DimensionMismatch { .. } => BsStatus::DimensionMismatch,
        Error::SingularSystem { .. } => BsStatus::SingularSystem,
        Error::Config(_) | Error::Json(_) => BsStatus::Config,
        Error::Io(_) => BsStatus::Io,
    }
}

fn fail(status: BsStatus, msg: impl Into<String>) -> BsStatus {
    set_error(msg);
    status
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), BsStatus>) -> BsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(BsStatus::Panic, "internal panic"),
    }
}

fn check<T>(r: beamspace::Result<T>) -> Result<T, BsStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), BsStatus> {
    if p.is_null() {
        Err(fail(BsStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn read_vector(data: *const BsComplex, len: usize) -> Result<CVector, BsStatus> {
    non_null(data, "input vector")?;
    let s = slice::from_raw_parts(data, len);
    Ok(CVector::from_iterator(len, s.iter().map(|c| Complex64::new(c.re, c.im))))
}

unsafe fn write_vector(v: &CVector, out: *mut BsComplex, len: usize) -> Result<(), BsStatus> {
    non_null(out, "output vector")?;
    if v.len() != len {
        return Err(fail(
            BsStatus::DimensionMismatch,
            format!("output length {len}, expected {}", v.len()),
        ));
    }
    let s = slice::from_raw_parts_mut(out, len);
    for (o, x) in s.iter_mut().zip(v.iter()) {
        *o = BsComplex { re: x.re, im: x.im };
    }
    Ok(())
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, BsStatus> {
    non_null(s, what)?;
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(BsStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn bs_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Draws a `q × n` Bernoulli combiner from `seed`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn bs_combiner_new(q: usize, n: usize, seed: u64, out: *mut *mut BsCombiner) -> BsStatus {
    guard(|| {
        non_null(out, "out")?;
        let mut rng = from_seed(seed);
        let inner = check(generate_combiner(q, n, &mut rng))?;
        *out = Box::into_raw(Box::new(BsCombiner { inner }));
        Ok(())
    })
}

/// # Safety
/// `c` must be null or a handle from [`bs_combiner_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bs_combiner_free(c: *mut BsCombiner) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// # Safety
/// `c` must be a live handle; `q` and `n` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bs_combiner_dims(c: *const BsCombiner, q: *mut usize, n: *mut usize) -> BsStatus {
    guard(|| {
        non_null(c, "combiner")?;
        non_null(q, "q")?;
        non_null(n, "n")?;
        *q = (*c).inner.num_measurements();
        *n = (*c).inner.num_beams();
        Ok(())
    })
}

/// Combiner entry at row `i`, column `j` (0-based).
///
/// # Safety
/// `c` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_combiner_entry(c: *const BsCombiner, i: usize, j: usize, out: *mut f64) -> BsStatus {
    guard(|| {
        non_null(c, "combiner")?;
        non_null(out, "out")?;
        let m = (*c).inner.matrix();
        if i >= m.nrows() || j >= m.ncols() {
            return Err(fail(BsStatus::InvalidArgument, format!("entry ({i}, {j}) out of range")));
        }
        *out = m[(i, j)];
        Ok(())
    })
}

/// # Safety
/// `c` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_combiner_mutual_coherence(c: *const BsCombiner, out: *mut f64) -> BsStatus {
    guard(|| {
        non_null(c, "combiner")?;
        non_null(out, "out")?;
        *out = check(mutual_coherence(&(*c).inner))?;
        Ok(())
    })
}

/// Noiseless measurement `z = W h`. `h` has `n` entries, `z` has `q`.
///
/// # Safety
/// `c` must be a live handle; `h` and `z` must hold `n` and `q` elements.
#[no_mangle]
pub unsafe extern "C" fn bs_combiner_measure(
    c: *const BsCombiner,
    h: *const BsComplex,
    n: usize,
    z: *mut BsComplex,
    q: usize,
) -> BsStatus {
    guard(|| {
        non_null(c, "combiner")?;
        let hv = read_vector(h, n)?;
        let zv = check((*c).inner.measure(&hv))?;
        write_vector(&zv, z, q)
    })
}

/// Support-detection estimate of one user. `z` has `q` entries and the
/// estimate written to `out` has `n`.
///
/// # Safety
/// `c` must be a live handle; `z` and `out` must hold `q` and `n` elements.
#[no_mangle]
pub unsafe extern "C" fn bs_sd_estimate(
    c: *const BsCombiner,
    z: *const BsComplex,
    q: usize,
    num_nlos: usize,
    v: usize,
    out: *mut BsComplex,
    n: usize,
) -> BsStatus {
    guard(|| {
        non_null(c, "combiner")?;
        let zv = read_vector(z, q)?;
        let e = check(sd_estimate(&zv, &(*c).inner, num_nlos, v))?;
        write_vector(&e.vector, out, n)
    })
}

/// OMP estimate with a fixed iteration count.
///
/// # Safety
/// Same contract as [`bs_sd_estimate`].
#[no_mangle]
pub unsafe extern "C" fn bs_omp_estimate(
    c: *const BsCombiner,
    z: *const BsComplex,
    q: usize,
    sparsity: usize,
    out: *mut BsComplex,
    n: usize,
) -> BsStatus {
    guard(|| {
        non_null(c, "combiner")?;
        let zv = read_vector(z, q)?;
        let e = check(omp_estimate(&zv, &(*c).inner, sparsity))?;
        write_vector(&e.vector, out, n)
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_power_ratio_lower_bound(n: usize, v: usize, out: *mut f64) -> BsStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = check(power_ratio_lower_bound(n, v))?;
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_detection_probability_lower_bound(n: usize, alpha: f64, out: *mut f64) -> BsStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = check(detection_probability_lower_bound(n, alpha))?;
        Ok(())
    })
}

/// Peak-amplitude threshold. When the bound is vacuous `*vacuous` is set to 1
/// and `*out` to NaN.
///
/// # Safety
/// `out` and `vacuous` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bs_amplitude_threshold(
    sigma2_ul: f64,
    alpha: f64,
    mu: f64,
    n: usize,
    out: *mut f64,
    vacuous: *mut i32,
) -> BsStatus {
    guard(|| {
        non_null(out, "out")?;
        non_null(vacuous, "vacuous")?;
        match check(amplitude_threshold(sigma2_ul, alpha, mu, n))? {
            AmplitudeThreshold::Finite { value } => {
                *out = value;
                *vacuous = 0;
            }
            AmplitudeThreshold::Vacuous { .. } => {
                *out = f64::NAN;
                *vacuous = 1;
            }
        }
        Ok(())
    })
}

/// Parses and validates a JSON experiment configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_config_from_json(json: *const c_char, out: *mut *mut BsExperimentConfig) -> BsStatus {
    guard(|| {
        non_null(out, "out")?;
        let text = read_str(json, "json")?;
        let inner = check(ExperimentConfig::from_json(text))?;
        *out = Box::into_raw(Box::new(BsExperimentConfig { inner }));
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle from [`bs_config_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bs_config_free(cfg: *mut BsExperimentConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the configured sweep. `threads == 0` uses every core.
///
/// # Safety
/// `cfg` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_run_experiment(
    cfg: *const BsExperimentConfig,
    threads: usize,
    out: *mut *mut BsResultTable,
) -> BsStatus {
    guard(|| {
        non_null(cfg, "config")?;
        non_null(out, "out")?;
        let threads = (threads > 0).then_some(threads);
        let inner = check(run_experiment(&(*cfg).inner, threads))?;
        *out = Box::into_raw(Box::new(BsResultTable { inner }));
        Ok(())
    })
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bs_result_table_len(t: *const BsResultTable) -> usize {
    if t.is_null() {
        0
    } else {
        (*t).inner.len()
    }
}

/// Mean, standard error and successful-trial count of row `row`.
///
/// # Safety
/// `t` must be a live handle; output pointers valid.
#[no_mangle]
pub unsafe extern "C" fn bs_result_table_row(
    t: *const BsResultTable,
    row: usize,
    mean: *mut f64,
    stderr: *mut f64,
    trials: *mut usize,
) -> BsStatus {
    guard(|| {
        non_null(t, "table")?;
        non_null(mean, "mean")?;
        non_null(stderr, "stderr")?;
        non_null(trials, "trials")?;
        let table = &*t;
        let r = table.inner.rows.get(row).ok_or_else(|| {
            fail(BsStatus::InvalidArgument, format!("row {row} out of range"))
        })?;
        *mean = r.mean;
        *stderr = r.stderr;
        *trials = r.trials;
        Ok(())
    })
}

/// Writes the table as CSV or JSON.
///
/// # Safety
/// `t` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bs_result_table_write(t: *const BsResultTable, path: *const c_char, format: BsFormat) -> BsStatus {
    guard(|| {
        non_null(t, "table")?;
        let p = read_str(path, "path")?;
        let format = match format {
            BsFormat::Csv => OutputFormat::Csv,
            BsFormat::Json => OutputFormat::Json,
        };
        check(emit_results(&(*t).inner, Path::new(p), format))
    })
}

/// # Safety
/// `t` must be null or a handle from [`bs_run_experiment`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bs_result_table_free(t: *mut BsResultTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}
