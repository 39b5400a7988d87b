//! C interface to `ksc`.
//!
//! Objects are opaque handles created by `*_new`/`*_load`/`ksc_train` and
//! released with the matching `*_free`. Every fallible call returns a
//! [`KscStatus`]; on failure the message is kept per thread and can be read
//! with [`ksc_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use ksc::data::{self, SpiralParams};
use ksc::{
    BiasVariant, Dataset, Encoding, KernelKind, KernelSpec, KscError, SparseKscModel, TrainConfig,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KscStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Numerical = 4,
    Io = 5,
    Parse = 6,
    ModelFormat = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KscKernel {
    Rbf = 0,
    ChiSquare = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KscEncoding {
    Sign = 0,
    Direction = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KscBias {
    Proposed = 0,
    Original = 1,
}

/// Training options. Fill with [`ksc_train_options_default`] first.
/// `n_tr = 0` trains on every row.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct KscTrainOptions {
    pub k_clusters: usize,
    pub kernel: KscKernel,
    pub param: f64,
    pub n_tr: usize,
    pub eps_tol: f64,
    pub r_max: usize,
    pub seed: u64,
    pub encoding: KscEncoding,
    pub bias: KscBias,
}

/// Opaque dataset handle.
pub struct KscDataset {
    inner: Dataset,
}

/// Opaque trained model handle.
pub struct KscModel {
    inner: SparseKscModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &KscError) -> KscStatus {
    match e.class() {
        "dimension" => KscStatus::Dimension,
        "degree" | "linalg" | "non-finite" | "patterns" => KscStatus::Numerical,
        "io" => KscStatus::Io,
        "parse" | "image" => KscStatus::Parse,
        "model-version" | "model-format" => KscStatus::ModelFormat,
        _ => KscStatus::InvalidArgument,
    }
}

struct Failure(KscStatus, String);

impl From<KscError> for Failure {
    fn from(e: KscError) -> Self {
        Failure(status_of(&e), format!("{}: {e}", e.class()))
    }
}

fn null(what: &str) -> Failure {
    Failure(KscStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(KscStatus::InvalidArgument, msg.into())
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KscStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KscStatus::Ok,
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
            set_error(format!("internal panic: {msg}"));
            KscStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid("path is not valid UTF-8"))?;
    Ok(PathBuf::from(s))
}

unsafe fn out_arg<'a, T>(p: *mut *mut T) -> Result<&'a mut *mut T, Failure> {
    let out = p.as_mut().ok_or_else(|| null("output pointer"))?;
    *out = ptr::null_mut();
    Ok(out)
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut_arg<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn ksc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ksc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Dataset from `rows × cols` row-major values (copied). `labels` may be NULL.
///
/// # Safety
/// `values` must point to `rows * cols` doubles and `labels`, when not NULL,
/// to `rows` integers.
#[no_mangle]
pub unsafe extern "C" fn ksc_dataset_new(
    values: *const f64,
    rows: usize,
    cols: usize,
    labels: *const i64,
    out: *mut *mut KscDataset,
) -> KscStatus {
    guard(|| {
        let out = out_arg(out)?;
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| invalid("rows * cols overflows"))?;
        let v = slice_arg(values, len, "values")?;
        let mut ds = Dataset::new(rows, cols, v.to_vec())?;
        if !labels.is_null() {
            ds = ds.with_labels(slice_arg(labels, rows, "labels")?.to_vec())?;
        }
        *out = boxed(KscDataset { inner: ds });
        Ok(())
    })
}

/// Loads a CSV dataset; with `labeled` the last column holds integer labels.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ksc_dataset_load_csv(
    path: *const c_char,
    labeled: bool,
    out: *mut *mut KscDataset,
) -> KscStatus {
    guard(|| {
        let out = out_arg(out)?;
        let ds = data::load_csv(path_arg(path)?, labeled)?;
        *out = boxed(KscDataset { inner: ds });
        Ok(())
    })
}

/// Labelled two-spiral dataset with the default shape.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ksc_dataset_two_spirals(
    n: usize,
    noise: f64,
    seed: u64,
    out: *mut *mut KscDataset,
) -> KscStatus {
    guard(|| {
        let out = out_arg(out)?;
        let ds = data::generate_two_spirals(n, noise, seed, &SpiralParams::default())?;
        *out = boxed(KscDataset { inner: ds });
        Ok(())
    })
}

/// Number of rows, 0 for NULL.
///
/// # Safety
/// `ds` must be NULL or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn ksc_dataset_len(ds: *const KscDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.len())
}

/// Number of columns, 0 for NULL.
///
/// # Safety
/// `ds` must be NULL or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn ksc_dataset_dim(ds: *const KscDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.dim())
}

/// Copies the labels into `out` (length `len`, at least the row count).
///
/// # Safety
/// `ds` must be a live handle and `out` must hold `len` integers.
#[no_mangle]
pub unsafe extern "C" fn ksc_dataset_labels(
    ds: *const KscDataset,
    out: *mut i64,
    len: usize,
) -> KscStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        let labels = ds
            .inner
            .labels()
            .ok_or_else(|| invalid("dataset has no labels"))?;
        let dst = slice_mut_arg(out, len, "labels")?;
        if dst.len() < labels.len() {
            return Err(invalid(format!(
                "label buffer holds {len}, need {}",
                labels.len()
            )));
        }
        dst[..labels.len()].copy_from_slice(labels);
        Ok(())
    })
}

/// # Safety
/// `ds` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ksc_dataset_free(ds: *mut KscDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Defaults: 2 clusters, RBF with parameter 1, all rows, eps_tol 1e-3,
/// r_max 500, seed 0, sign encoding, proposed bias.
///
/// # Safety
/// `opts` must be NULL or point to writable memory for the struct.
#[no_mangle]
pub unsafe extern "C" fn ksc_train_options_default(opts: *mut KscTrainOptions) {
    if let Some(o) = opts.as_mut() {
        let base = TrainConfig::new(2, KernelSpec::rbf(1.0).expect("positive parameter"), 0);
        *o = KscTrainOptions {
            k_clusters: base.k_clusters,
            kernel: KscKernel::Rbf,
            param: 1.0,
            n_tr: 0,
            eps_tol: base.eps_tol,
            r_max: base.r_max,
            seed: base.seed,
            encoding: KscEncoding::Sign,
            bias: KscBias::Proposed,
        };
    }
}

fn config(o: &KscTrainOptions, n: usize) -> Result<TrainConfig, Failure> {
    let kind = match o.kernel {
        KscKernel::Rbf => KernelKind::Rbf,
        KscKernel::ChiSquare => KernelKind::ChiSquare,
    };
    let mut cfg = TrainConfig::new(
        o.k_clusters,
        KernelSpec::new(kind, o.param)?,
        if o.n_tr == 0 { n } else { o.n_tr },
    );
    cfg.eps_tol = o.eps_tol;
    cfg.r_max = o.r_max;
    cfg.seed = o.seed;
    cfg.encoding = match o.encoding {
        KscEncoding::Sign => Encoding::SignCodebook,
        KscEncoding::Direction => Encoding::Direction,
    };
    cfg.bias_variant = match o.bias {
        KscBias::Proposed => BiasVariant::Proposed,
        KscBias::Original => BiasVariant::Original,
    };
    Ok(cfg)
}

/// Trains a model. `opts` may be NULL for the defaults.
///
/// # Safety
/// `ds` must be a live handle, `opts` NULL or valid, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ksc_train(
    ds: *const KscDataset,
    opts: *const KscTrainOptions,
    out: *mut *mut KscModel,
) -> KscStatus {
    guard(|| {
        let out = out_arg(out)?;
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        let opts = match opts.as_ref() {
            Some(o) => *o,
            None => {
                let mut o = std::mem::MaybeUninit::<KscTrainOptions>::uninit();
                ksc_train_options_default(o.as_mut_ptr());
                o.assume_init()
            }
        };
        let (m, _) = ksc::model::train(&ds.inner, &config(&opts, ds.inner.len())?)?;
        *out = boxed(KscModel { inner: m });
        Ok(())
    })
}

/// Number of reduced-set points, 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn ksc_model_rank(m: *const KscModel) -> usize {
    m.as_ref().map_or(0, |m| m.inner.rank())
}

/// Number of clusters, 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn ksc_model_clusters(m: *const KscModel) -> usize {
    m.as_ref().map_or(0, |m| m.inner.k_clusters)
}

/// Cluster label of every row of `ds`, written to `labels` (length `len`,
/// at least the row count).
///
/// # Safety
/// Handles must be live and `labels` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn ksc_model_predict(
    m: *const KscModel,
    ds: *const KscDataset,
    labels: *mut usize,
    len: usize,
) -> KscStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("model"))?;
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        let dst = slice_mut_arg(labels, len, "labels")?;
        if dst.len() < ds.inner.len() {
            return Err(invalid(format!(
                "label buffer holds {len}, need {}",
                ds.inner.len()
            )));
        }
        let got = m.inner.predict(&ds.inner)?;
        dst[..got.len()].copy_from_slice(&got);
        Ok(())
    })
}

/// Row-major `rows × (K−1)` score matrix of `ds`, written to `scores`.
///
/// # Safety
/// Handles must be live and `scores` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ksc_model_scores(
    m: *const KscModel,
    ds: *const KscDataset,
    scores: *mut f64,
    len: usize,
) -> KscStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("model"))?;
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        let k = m.inner.k_clusters - 1;
        let need = ds.inner.len() * k;
        let dst = slice_mut_arg(scores, len, "scores")?;
        if dst.len() < need {
            return Err(invalid(format!("score buffer holds {len}, need {need}")));
        }
        let s = m.inner.scores(&ds.inner)?;
        for i in 0..ds.inner.len() {
            for c in 0..k {
                dst[i * k + c] = s.values[(i, c)];
            }
        }
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ksc_model_save(m: *const KscModel, path: *const c_char) -> KscStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("model"))?;
        ksc::modelfile::save(&path_arg(path)?, &m.inner)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ksc_model_load(path: *const c_char, out: *mut *mut KscModel) -> KscStatus {
    guard(|| {
        let out = out_arg(out)?;
        let m = ksc::modelfile::load(&path_arg(path)?)?;
        *out = boxed(KscModel { inner: m });
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ksc_model_free(m: *mut KscModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Adjusted Rand index of two labelings of length `n`.
///
/// # Safety
/// `a` and `b` must hold `n` integers and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ksc_adjusted_rand_index(
    a: *const i64,
    b: *const i64,
    n: usize,
    out: *mut f64,
) -> KscStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("output pointer"))?;
        let a = slice_arg(a, n, "a")?;
        let b = slice_arg(b, n, "b")?;
        *out = ksc::metrics::adjusted_rand_index(a, b)?;
        Ok(())
    })
}
