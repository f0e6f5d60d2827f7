//! C ABI over the spiking-pipeline core: synthetic data, spike tensors,
//! model training/prediction, metrics and the penalised-accuracy score.
//!
//! Conventions: every function returns a `TsStatus`; out-parameters are
//! written only on `TS_STATUS_OK`. Handles are opaque and must be released
//! with their `_free` function. `ts_last_error` returns a thread-local
//! message for the most recent failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;

use tickspike::engine::Checkpoint;
use tickspike::error::Error;
use tickspike::market::{generate_synthetic_ticks, load_ticks, write_ticks_csv, SyntheticConfig};
use tickspike::metrics::{evaluate, label_ground_truth, psa};
use tickspike::pipeline::{
    fit_and_encode, prepare_day, train_model, DayInput, ModelSpec, PrepConfig, TrainedModel,
};
use tickspike::tensor::SpikeTensor;

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    DataError = 4,
    RuntimeError = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_for(err: &Error) -> TsStatus {
    match err {
        Error::InvalidConfig(_) | Error::InvalidParam(_) => TsStatus::InvalidConfig,
        Error::NoTicks
        | Error::EmptyDay
        | Error::NoRealSpikes
        | Error::InsufficientHistory { .. }
        | Error::CsvRow { .. }
        | Error::NonMonotoneTimestamp { .. }
        | Error::Container(_)
        | Error::MissingArtifact(_)
        | Error::ZeroPrice(_)
        | Error::UnnormalizedInput { .. } => TsStatus::DataError,
        _ => TsStatus::RuntimeError,
    }
}

fn fail(err: Error) -> TsStatus {
    set_error(&err.to_string());
    status_for(&err)
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated string.
unsafe fn take_str<'a>(ptr: *const c_char) -> Result<&'a str, TsStatus> {
    if ptr.is_null() {
        set_error("null argument");
        return Err(TsStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        TsStatus::InvalidUtf8
    })
}

/// Opaque spike tensor handle.
pub struct TsTensor {
    inner: SpikeTensor,
}

/// Opaque trained-model handle.
pub struct TsModel {
    inner: TrainedModel,
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ts_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent error on this thread; valid until the next
/// failing call from the same thread.
#[no_mangle]
pub extern "C" fn ts_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Release a string returned by this library.
///
/// # Safety
/// `ptr` must have been produced by a `ts_*` function returning an owned
/// string, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ts_string_free(ptr: *mut c_char) {
    if !ptr.is_null() {
        drop(CString::from_raw(ptr));
    }
}

/// Generate synthetic tick days from a JSON config and write one CSV per
/// day under `out_dir`.
///
/// # Safety
/// Both pointers must be valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn ts_synth_write(
    config_json: *const c_char,
    out_dir: *const c_char,
) -> TsStatus {
    let (config_json, out_dir) = match (take_str(config_json), take_str(out_dir)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    let config: SyntheticConfig = match serde_json::from_str(config_json) {
        Ok(c) => c,
        Err(e) => {
            set_error(&format!("bad synthetic config: {e}"));
            return TsStatus::InvalidConfig;
        }
    };
    let days = match generate_synthetic_ticks(&config) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    let dir = PathBuf::from(out_dir);
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return fail(e.into());
    }
    for day in &days {
        if let Err(e) = write_ticks_csv(
            dir.join(format!("day_{}.csv", day.date)),
            &day.date,
            &day.ticks,
        ) {
            return fail(e);
        }
    }
    TsStatus::Ok
}

/// Preprocess the first trading day of a tick CSV into a spike tensor:
/// VWAP aggregation, features per the model spec, normalization fitted on
/// the day itself, Poisson encoding. Writes the tensor container to
/// `out_spk` and returns the day's VWAP length via `out_n_bars`.
///
/// # Safety
/// String pointers must be valid NUL-terminated strings; `out_n_bars` may
/// be null.
#[no_mangle]
pub unsafe extern "C" fn ts_encode_csv(
    ticks_csv: *const c_char,
    prep_json: *const c_char,
    model_spec_json: *const c_char,
    encode_seed: u64,
    out_spk: *const c_char,
    out_n_bars: *mut usize,
) -> TsStatus {
    let (ticks_csv, prep_json, spec_json, out_spk) = match (
        take_str(ticks_csv),
        take_str(prep_json),
        take_str(model_spec_json),
        take_str(out_spk),
    ) {
        (Ok(a), Ok(b), Ok(c), Ok(d)) => (a, b, c, d),
        (Err(s), _, _, _) | (_, Err(s), _, _) | (_, _, Err(s), _) | (_, _, _, Err(s)) => return s,
    };
    let prep: PrepConfig = match serde_json::from_str(prep_json) {
        Ok(p) => p,
        Err(e) => {
            set_error(&format!("bad prep config: {e}"));
            return TsStatus::InvalidConfig;
        }
    };
    let spec: ModelSpec = match serde_json::from_str(spec_json) {
        Ok(s) => s,
        Err(e) => {
            set_error(&format!("bad model spec: {e}"));
            return TsStatus::InvalidConfig;
        }
    };
    let days = match load_ticks(ticks_csv) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    let Some(first) = days.into_iter().next() else {
        return fail(Error::NoTicks);
    };
    let day = DayInput {
        date: first.date,
        ticks: first.ticks,
    };
    let prepared = match prepare_day(&day, &prep, spec.feature_kind()) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let (tensor, _) = match fit_and_encode(&prepared, &prep, encode_seed) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    if let Err(e) = tensor.save(out_spk) {
        return fail(e);
    }
    if !out_n_bars.is_null() {
        *out_n_bars = prepared.vwap.len();
    }
    TsStatus::Ok
}

/// Load a spike-tensor container.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_tensor_load(path: *const c_char, out: *mut *mut TsTensor) -> TsStatus {
    let path = match take_str(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    if out.is_null() {
        set_error("null out pointer");
        return TsStatus::NullArgument;
    }
    match SpikeTensor::load(path) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(TsTensor { inner }));
            TsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Tensor shape: timestamps, channels, timesteps.
///
/// # Safety
/// `tensor` must be a live handle; out pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn ts_tensor_shape(
    tensor: *const TsTensor,
    out_timestamps: *mut usize,
    out_channels: *mut usize,
    out_timesteps: *mut usize,
) -> TsStatus {
    let Some(t) = tensor.as_ref() else {
        set_error("null tensor");
        return TsStatus::NullArgument;
    };
    if !out_timestamps.is_null() {
        *out_timestamps = t.inner.n_timestamps();
    }
    if !out_channels.is_null() {
        *out_channels = t.inner.n_channels();
    }
    if !out_timesteps.is_null() {
        *out_timesteps = t.inner.timesteps();
    }
    TsStatus::Ok
}

/// Read one bit of the tensor (1 = spike).
///
/// # Safety
/// `tensor` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_tensor_spike(
    tensor: *const TsTensor,
    timestamp: usize,
    channel: usize,
    timestep: usize,
    out: *mut u8,
) -> TsStatus {
    let Some(t) = tensor.as_ref() else {
        set_error("null tensor");
        return TsStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null out pointer");
        return TsStatus::NullArgument;
    }
    if timestamp >= t.inner.n_timestamps()
        || channel >= t.inner.n_channels()
        || timestep >= t.inner.timesteps()
    {
        set_error("tensor index out of range");
        return TsStatus::DataError;
    }
    *out = u8::from(t.inner.spike(timestamp, channel, timestep));
    TsStatus::Ok
}

/// # Safety
/// `tensor` must be a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ts_tensor_free(tensor: *mut TsTensor) {
    if !tensor.is_null() {
        drop(Box::from_raw(tensor));
    }
}

/// Train a model described by a JSON model spec on a tensor.
///
/// `labels` may be null for unsupervised specs; otherwise it must hold one
/// byte per timestamp: 0 = not a real spike, 1 = real spike, 2 = unlabeled.
///
/// # Safety
/// Pointers must be valid; `labels`, when non-null, must point at
/// `labels_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ts_model_train(
    model_spec_json: *const c_char,
    tensor: *const TsTensor,
    labels: *const u8,
    labels_len: usize,
    init_seed: u64,
    train_seed: u64,
    out: *mut *mut TsModel,
) -> TsStatus {
    let spec_json = match take_str(model_spec_json) {
        Ok(s) => s,
        Err(s) => return s,
    };
    let Some(t) = tensor.as_ref() else {
        set_error("null tensor");
        return TsStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null out pointer");
        return TsStatus::NullArgument;
    }
    let spec: ModelSpec = match serde_json::from_str(spec_json) {
        Ok(s) => s,
        Err(e) => {
            set_error(&format!("bad model spec: {e}"));
            return TsStatus::InvalidConfig;
        }
    };
    let label_vec: Vec<Option<bool>> = if labels.is_null() {
        Vec::new()
    } else {
        std::slice::from_raw_parts(labels, labels_len)
            .iter()
            .map(|&b| match b {
                0 => Some(false),
                1 => Some(true),
                _ => None,
            })
            .collect()
    };
    match train_model(&spec, &t.inner, &label_vec, init_seed, train_seed) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(TsModel { inner }));
            TsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Predict one boolean per tensor timestamp into `out_buf`.
///
/// # Safety
/// `model` and `tensor` must be live handles; `out_buf` must hold at least
/// `buf_len >= n_timestamps` bytes.
#[no_mangle]
pub unsafe extern "C" fn ts_model_predict(
    model: *mut TsModel,
    tensor: *const TsTensor,
    out_buf: *mut u8,
    buf_len: usize,
) -> TsStatus {
    let Some(m) = model.as_mut() else {
        set_error("null model");
        return TsStatus::NullArgument;
    };
    let Some(t) = tensor.as_ref() else {
        set_error("null tensor");
        return TsStatus::NullArgument;
    };
    if out_buf.is_null() {
        set_error("null out buffer");
        return TsStatus::NullArgument;
    }
    let n = t.inner.n_timestamps();
    if buf_len < n {
        set_error("prediction buffer too small");
        return TsStatus::DataError;
    }
    match m.inner.predict_day(&t.inner, 0, n) {
        Ok(preds) => {
            let buf = std::slice::from_raw_parts_mut(out_buf, n);
            for (b, p) in buf.iter_mut().zip(&preds) {
                *b = u8::from(*p);
            }
            TsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Write the model checkpoint (topology, weights, decoding threshold) as
/// JSON.
///
/// # Safety
/// `model` must be a live handle and `path` a valid string.
#[no_mangle]
pub unsafe extern "C" fn ts_model_save(model: *const TsModel, path: *const c_char) -> TsStatus {
    let Some(m) = model.as_ref() else {
        set_error("null model");
        return TsStatus::NullArgument;
    };
    let path = match take_str(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match Checkpoint::from_network(&m.inner.net, m.inner.d_thresh).save(path) {
        Ok(()) => TsStatus::Ok,
        Err(e) => fail(e),
    }
}

/// Load a checkpoint back into a model handle.
///
/// # Safety
/// `path` must be a valid string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_model_load(path: *const c_char, out: *mut *mut TsModel) -> TsStatus {
    let path = match take_str(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    if out.is_null() {
        set_error("null out pointer");
        return TsStatus::NullArgument;
    }
    let ck = match Checkpoint::load(path) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    match ck.into_network() {
        Ok((net, d_thresh)) => {
            *out = Box::into_raw(Box::new(TsModel {
                inner: TrainedModel { net, d_thresh },
            }));
            TsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `model` must be a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ts_model_free(model: *mut TsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Label a VWAP series, evaluate predictions against it, and return the
/// metric bundle as a JSON string (release it with `ts_string_free`).
///
/// # Safety
/// `predictions` and `vwap` must point at `len` elements; `out_json` must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_evaluate(
    predictions: *const u8,
    vwap: *const f64,
    len: usize,
    label_window: usize,
    alpha: f64,
    out_json: *mut *mut c_char,
) -> TsStatus {
    if predictions.is_null() || vwap.is_null() || out_json.is_null() {
        set_error("null argument");
        return TsStatus::NullArgument;
    }
    let preds: Vec<bool> = std::slice::from_raw_parts(predictions, len)
        .iter()
        .map(|&b| b != 0)
        .collect();
    let vwap = std::slice::from_raw_parts(vwap, len);
    let truth = match label_ground_truth(vwap, label_window, None) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let report = match evaluate(&preds, &truth, alpha) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    match serde_json::to_string(&report) {
        Ok(json) => match CString::new(json) {
            Ok(c) => {
                *out_json = c.into_raw();
                TsStatus::Ok
            }
            Err(_) => {
                set_error("report contained interior NUL");
                TsStatus::RuntimeError
            }
        },
        Err(e) => fail(e.into()),
    }
}

/// Penalised spike accuracy and spike-rate deviation.
///
/// # Safety
/// Out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ts_psa(
    spike_accuracy: f64,
    spiking_rate: f64,
    real_spiking_rate: f64,
    alpha: f64,
    out_psa: *mut f64,
    out_srd: *mut f64,
) -> TsStatus {
    if out_psa.is_null() || out_srd.is_null() {
        set_error("null out pointer");
        return TsStatus::NullArgument;
    }
    match psa(spike_accuracy, spiking_rate, real_spiking_rate, alpha) {
        Ok((p, s)) => {
            *out_psa = p;
            *out_srd = s;
            TsStatus::Ok
        }
        Err(e) => fail(e),
    }
}
