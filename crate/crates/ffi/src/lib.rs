//! C ABI over the `viewpulse` library.
//!
//! Every fallible function returns a [`VpStatus`]; on failure a message is
//! available from [`vp_last_error`] on the same thread until the next
//! failing call. Handles are opaque and must be released with their
//! matching `*_free` function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::slice;

use viewpulse::data::{read_fvseq, FeatureSequence};
use viewpulse::metrics::{self, MetricReport};
use viewpulse::mfcc::{extract_audio_features, read_wav, MfccConfig};
use viewpulse::models::{load_checkpoint, ModalInputs, ModelKind, ModelState};
use viewpulse::numcore::Matrix;
use viewpulse::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    Dimension = 5,
    UndefinedCorrelation = 6,
    MissingData = 7,
    Panic = 8,
}

/// A trained model loaded from a checkpoint file.
pub struct VpModel {
    inner: ModelState,
}

/// A `rows x cols` feature matrix, row-major.
pub struct VpFeatures {
    inner: FeatureSequence,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(VpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Dimension { .. } | Error::OutOfRange { .. } => VpStatus::Dimension,
            Error::UndefinedCorrelation(_) => VpStatus::UndefinedCorrelation,
            Error::Format { .. }
            | Error::Truncated { .. }
            | Error::CorruptCheckpoint(_)
            | Error::UnsupportedEncoding(_) => VpStatus::Format,
            Error::MissingModality(_) | Error::MissingData(_) => VpStatus::MissingData,
            Error::Io { .. } => VpStatus::Io,
            _ => VpStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(VpStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> VpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VpStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            VpStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| Fail(VpStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

unsafe fn series<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, n))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads a checkpoint. On success `*out` owns a new handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vp_model_load(path: *const c_char, out: *mut *mut VpModel) -> VpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = load_checkpoint(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(VpModel { inner: model }));
        Ok(())
    })
}

/// Releases a model handle. NULL is ignored.
///
/// # Safety
/// `model` must come from [`vp_model_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vp_model_free(model: *mut VpModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Architecture name, e.g. `high-fusion`; NULL for a NULL handle.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vp_model_kind(model: *const VpModel) -> *const c_char {
    let Some(m) = model.as_ref() else { return ptr::null() };
    let name: &CStr = match m.inner.spec().kind {
        ModelKind::UnimodalVisual => c"unimodal-visual",
        ModelKind::UnimodalAudio => c"unimodal-audio",
        ModelKind::LowFusion => c"low-fusion",
        ModelKind::MidFusion => c"mid-fusion",
        ModelKind::HighFusion => c"high-fusion",
    };
    name.as_ptr()
}

/// Expected feature widths; 0 for a modality the model does not use.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn vp_model_dims(
    model: *const VpModel,
    visual_dim: *mut usize,
    audio_dim: *mut usize,
) -> VpStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if visual_dim.is_null() || audio_dim.is_null() {
            return Err(null("dimension output"));
        }
        *visual_dim = m.inner.spec().visual_dim;
        *audio_dim = m.inner.spec().audio_dim;
        Ok(())
    })
}

/// Predicts `t` per-second values into `out`. `visual` holds `t x visual_dim`
/// and `audio` holds `t x audio_dim` values, row-major; a modality the
/// model does not use may be NULL.
///
/// # Safety
/// Buffers must hold the stated number of values.
#[no_mangle]
pub unsafe extern "C" fn vp_model_predict(
    model: *const VpModel,
    visual: *const f64,
    audio: *const f64,
    t: usize,
    out: *mut f64,
) -> VpStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let spec = m.inner.spec();
        let matrix = |p: *const f64, d: usize, what: &str| -> Result<Option<Matrix>, Fail> {
            if d == 0 || p.is_null() {
                return Ok(None);
            }
            Ok(Some(Matrix::from_vec(t, d, series(p, t * d, what)?.to_vec())?))
        };
        let v = matrix(visual, spec.visual_dim, "visual")?;
        let a = matrix(audio, spec.audio_dim, "audio")?;
        let pred = m.inner.predict("ffi", ModalInputs::new(v.as_ref(), a.as_ref()))?;
        if t > 0 {
            if out.is_null() {
                return Err(null("out"));
            }
            slice::from_raw_parts_mut(out, t).copy_from_slice(&pred.values);
        }
        Ok(())
    })
}

/// Reads an FVSEQ1 feature file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vp_features_read(path: *const c_char, out: *mut *mut VpFeatures) -> VpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let seq = read_fvseq(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(VpFeatures { inner: seq }));
        Ok(())
    })
}

/// Extracts `T x 26` MFCC features from a PCM16 or float32 WAV file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vp_features_from_wav(path: *const c_char, out: *mut *mut VpFeatures) -> VpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = path_arg(path)?;
        let id = path.file_stem().map_or("audio".into(), |s| s.to_string_lossy().into_owned());
        let seq = extract_audio_features(&read_wav(&path)?, &MfccConfig::default(), &id)?;
        *out = Box::into_raw(Box::new(VpFeatures { inner: seq }));
        Ok(())
    })
}

/// Number of rows (seconds); 0 for NULL.
///
/// # Safety
/// `f` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vp_features_rows(f: *const VpFeatures) -> usize {
    f.as_ref().map_or(0, |f| f.inner.len())
}

/// Number of columns (feature width); 0 for NULL.
///
/// # Safety
/// `f` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vp_features_cols(f: *const VpFeatures) -> usize {
    f.as_ref().map_or(0, |f| f.inner.dim())
}

/// Row-major values, valid while the handle lives; NULL for NULL.
///
/// # Safety
/// `f` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vp_features_data(f: *const VpFeatures) -> *const f64 {
    f.as_ref().map_or(ptr::null(), |f| f.inner.matrix().as_slice().as_ptr())
}

/// Releases a feature handle. NULL is ignored.
///
/// # Safety
/// `f` must come from a `vp_features_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vp_features_free(f: *mut VpFeatures) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

unsafe fn pairwise(
    a: *const f64,
    b: *const f64,
    n: usize,
    out: *mut f64,
    f: fn(&[f64], &[f64]) -> viewpulse::Result<f64>,
) -> VpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = f(series(a, n, "a")?, series(b, n, "b")?)?;
        Ok(())
    })
}

/// Mean absolute error of `n` pairs.
///
/// # Safety
/// `a` and `b` must hold `n` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn vp_mae(p: *const f64, y: *const f64, n: usize, out: *mut f64) -> VpStatus {
    pairwise(p, y, n, out, metrics::mae)
}

/// Root mean squared error.
///
/// # Safety
/// As [`vp_mae`].
#[no_mangle]
pub unsafe extern "C" fn vp_rmse(p: *const f64, y: *const f64, n: usize, out: *mut f64) -> VpStatus {
    pairwise(p, y, n, out, metrics::rmse)
}

/// Root mean squared log error, `1 + x` clamped at 1e-9.
///
/// # Safety
/// As [`vp_mae`].
#[no_mangle]
pub unsafe extern "C" fn vp_rmsle(p: *const f64, y: *const f64, n: usize, out: *mut f64) -> VpStatus {
    pairwise(p, y, n, out, metrics::rmsle)
}

/// Pearson correlation.
///
/// # Safety
/// As [`vp_mae`].
#[no_mangle]
pub unsafe extern "C" fn vp_pcc(a: *const f64, b: *const f64, n: usize, out: *mut f64) -> VpStatus {
    pairwise(a, b, n, out, metrics::pcc)
}

/// Cosine similarity.
///
/// # Safety
/// As [`vp_mae`].
#[no_mangle]
pub unsafe extern "C" fn vp_cosine(a: *const f64, b: *const f64, n: usize, out: *mut f64) -> VpStatus {
    pairwise(a, b, n, out, metrics::cosine)
}

/// Spearman rank correlation with average ranks for ties.
///
/// # Safety
/// As [`vp_mae`].
#[no_mangle]
pub unsafe extern "C" fn vp_srcc(a: *const f64, b: *const f64, n: usize, out: *mut f64) -> VpStatus {
    pairwise(a, b, n, out, metrics::srcc)
}

/// `3·srcc − mae − rmse − rmsle`.
#[no_mangle]
pub extern "C" fn vp_composite(mae: f64, rmse: f64, rmsle: f64, srcc: f64) -> f64 {
    metrics::composite(&MetricReport::new(0, mae, rmse, rmsle, srcc))
}
