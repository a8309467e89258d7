//! C ABI over `csp_transfer`.
//!
//! Every fallible function returns a [`CspStatus`] and writes its results
//! through out-pointers. On failure the message is kept per thread and can be
//! read with [`csp_last_error_message`]. Handles are opaque, owned by the
//! caller once returned and released with their `_free` function; a handle
//! must not be used from two threads at the same time.
//!
//! Matrices cross the boundary as `f64` buffers. Square and basis matrices
//! are column-major; a trial is `channels × samples`, row-major (one
//! contiguous run of samples per channel).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use csp_transfer::csp::{csp_train, SpatialFilterBank};
use csp_transfer::data::{load_dataset, save_dataset, SubjectRecord};
use csp_transfer::harness::{
    run_pipeline, run_real_experiment, run_toy_experiment, select_and_evaluate, ExperimentConfig, Method, MethodSpec,
    Params, Workspace,
};
use csp_transfer::metrics::{paired_permutation_test, symmetric_kl};
use csp_transfer::numerics::{principal_angle_similarity, Matrix, OrthonormalBasis, SymMatrix};
use csp_transfer::toygen::{gen_population, PerturbTarget, PopulationSpec, ToySpec};
use csp_transfer::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CspStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotPositiveDefinite = 4,
    Numerical = 5,
    Io = 6,
    Format = 7,
    TooFewSubjects = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CspMethod {
    Csp = 0,
    CovCsp = 1,
    MtCsp = 2,
    SsCsp = 3,
    SsMtCsp = 4,
    SsCspNoiseOnly = 5,
}

/// Which mixing matrix of the synthetic population is perturbed.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CspPerturb {
    None = 0,
    A = 1,
    B = 2,
    Both = 3,
}

/// Parameters of one grid point. Only the fields of the chosen method are
/// read: `lambda` (covcsp), `lambda1`/`lambda2` (mtcsp), `l`/`nu` (sscsp
/// variants), all four of the latter for ss+mtcsp.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CspParams {
    pub lambda: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub l: usize,
    pub nu: usize,
}

/// Subjects loaded from disk or generated, with lazily built statistics.
pub struct CspDataset {
    records: &'static [SubjectRecord],
    workspace: Option<Workspace<'static>>,
}

/// Trained spatial filters and their patterns.
pub struct CspFilterBank {
    bank: SpatialFilterBank,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> CspStatus {
    match err.root() {
        Error::NotSymmetric { .. } | Error::NotAntisymmetric { .. } | Error::InvalidParameter(_) | Error::NoDonors(_) => {
            CspStatus::InvalidArgument
        }
        Error::DimensionMismatch { .. } => CspStatus::DimensionMismatch,
        Error::NotPositiveDefinite { .. } => CspStatus::NotPositiveDefinite,
        Error::NotOrthonormal { .. }
        | Error::NonFinite
        | Error::Singular(_)
        | Error::ConstraintRankLoss { .. }
        | Error::NonFiniteObjective { .. }
        | Error::EmptyClass(_)
        | Error::EmptyTrialSet => CspStatus::Numerical,
        Error::Io(_) => CspStatus::Io,
        Error::BadMagic { .. } | Error::TruncatedPayload { .. } | Error::Json(_) | Error::Csv(_) => CspStatus::Format,
        Error::TooFewSubjects { .. } => CspStatus::TooFewSubjects,
        Error::Context { .. } => unreachable!("root() strips context"),
    }
}

/// Failure raised on the C side of the boundary (bad pointers, sizes).
struct Reject(CspStatus, String);

impl From<Error> for Reject {
    fn from(e: Error) -> Self {
        Reject(status_of(&e), e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Reject>) -> CspStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CspStatus::Ok
        }
        Ok(Err(Reject(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            CspStatus::Panic
        }
    }
}

fn null(what: &str) -> Reject {
    Reject(CspStatus::NullPointer, format!("{what} is NULL"))
}

fn invalid(message: impl Into<String>) -> Reject {
    Reject(CspStatus::InvalidArgument, message.into())
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Reject> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Reject> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Reject> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Reject> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Reject> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

fn area(rows: usize, cols: usize) -> Result<usize, Reject> {
    rows.checked_mul(cols).ok_or_else(|| invalid("matrix size overflows"))
}

unsafe fn square(p: *const f64, dim: usize, what: &str) -> Result<SymMatrix, Reject> {
    if dim == 0 {
        return Err(invalid(format!("{what}: dimension must be ≥ 1")));
    }
    let data = slice(p, area(dim, dim)?, what)?;
    Ok(SymMatrix::new(Matrix::from_column_slice(dim, dim, data))?)
}

fn method_of(m: CspMethod) -> Method {
    match m {
        CspMethod::Csp => Method::Csp,
        CspMethod::CovCsp => Method::CovCsp,
        CspMethod::MtCsp => Method::MtCsp,
        CspMethod::SsCsp => Method::SsCsp,
        CspMethod::SsMtCsp => Method::SsMtCsp,
        CspMethod::SsCspNoiseOnly => Method::SsCspNoiseOnly,
    }
}

fn params_of(method: Method, p: &CspParams) -> Params {
    match method {
        Method::Csp => Params::None,
        Method::CovCsp => Params::Shrinkage { lambda: p.lambda },
        Method::MtCsp => Params::MultiTask {
            global: p.lambda1,
            specific: p.lambda2,
        },
        Method::SsCsp | Method::SsCspNoiseOnly => Params::Subspace { l: p.l, nu: p.nu },
        Method::SsMtCsp => Params::Combined {
            l: p.l,
            nu: p.nu,
            global: p.lambda1,
            specific: p.lambda2,
        },
    }
}

fn params_to_c(p: Params) -> CspParams {
    let mut out = CspParams::default();
    match p {
        Params::None => {}
        Params::Shrinkage { lambda } => out.lambda = lambda,
        Params::MultiTask { global, specific } => (out.lambda1, out.lambda2) = (global, specific),
        Params::Subspace { l, nu } => (out.l, out.nu) = (l, nu),
        Params::Combined { l, nu, global, specific } => {
            (out.l, out.nu, out.lambda1, out.lambda2) = (l, nu, global, specific)
        }
    }
    out
}

impl CspDataset {
    fn new(records: Vec<SubjectRecord>) -> Box<CspDataset> {
        Box::new(CspDataset {
            records: Box::leak(records.into_boxed_slice()),
            workspace: None,
        })
    }

    fn workspace(&mut self, m: usize) -> Result<&Workspace<'static>, Reject> {
        if self.workspace.as_ref().is_none_or(|w| w.filters_per_class() != m) {
            self.workspace = Some(Workspace::new(self.records, m)?);
        }
        Ok(self.workspace.as_ref().expect("just built"))
    }

    fn check_target(&self, target: usize) -> Result<(), Reject> {
        if target >= self.records.len() {
            return Err(invalid(format!("subject index {target} out of range 0..{}", self.records.len())));
        }
        Ok(())
    }
}

impl Drop for CspDataset {
    fn drop(&mut self) {
        // The workspace borrows the records; release it first.
        self.workspace = None;
        let records = std::mem::take(&mut self.records) as *const [SubjectRecord] as *mut [SubjectRecord];
        // SAFETY: `records` came from `Box::leak` in `new` and nothing else
        // refers to it once the workspace is gone.
        drop(unsafe { Box::from_raw(records) });
    }
}

/// Copies `src` into `dst` when it fits; always reports the required length.
fn copy_out(src: &[f64], dst: &mut [f64], required: &mut usize) -> Result<(), Reject> {
    *required = src.len();
    if dst.len() < src.len() {
        return Err(invalid(format!("buffer holds {} values, {} needed", dst.len(), src.len())));
    }
    dst[..src.len()].copy_from_slice(src);
    Ok(())
}

// ------------------------------------------------------------------ errors

/// Copies the calling thread's last error message (NUL-terminated, truncated
/// to fit) into `buf` and returns the buffer size needed for the full
/// message including its NUL, or 0 when the last call succeeded.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn csp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len) - 1;
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn csp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn csp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ----------------------------------------------------------------- dataset

/// Loads a dataset directory.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn csp_dataset_load(path: *const c_char, out: *mut *mut CspDataset) -> CspStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let path = PathBuf::from(c_str(path, "path")?);
        *out = Box::into_raw(CspDataset::new(load_dataset(&path)?));
        Ok(())
    })
}

/// Generates a synthetic population with the default source layout
/// (80 channels, 100 trials per class).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn csp_dataset_generate_toy(
    n_subjects: usize,
    eta: f64,
    perturb: CspPerturb,
    seed: u64,
    out: *mut *mut CspDataset,
) -> CspStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let target = match perturb {
            CspPerturb::None => PerturbTarget::None,
            CspPerturb::A => PerturbTarget::A,
            CspPerturb::B => PerturbTarget::B,
            CspPerturb::Both => PerturbTarget::Both,
        };
        let (records, _) = gen_population(&ToySpec::default(), &PopulationSpec::new(n_subjects, eta, target, seed))?;
        *out = Box::into_raw(CspDataset::new(records));
        Ok(())
    })
}

/// Writes the dataset to a directory.
///
/// # Safety
/// `dataset` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn csp_dataset_save(dataset: *const CspDataset, path: *const c_char) -> CspStatus {
    guard(|| {
        let ds = handle(dataset, "dataset")?;
        save_dataset(ds.records, &PathBuf::from(c_str(path, "path")?))?;
        Ok(())
    })
}

/// # Safety
/// `dataset` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn csp_dataset_subject_count(dataset: *const CspDataset, out: *mut usize) -> CspStatus {
    guard(|| {
        *out_ref(out, "out")? = handle(dataset, "dataset")?.records.len();
        Ok(())
    })
}

/// # Safety
/// `dataset` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn csp_dataset_channels(dataset: *const CspDataset, out: *mut usize) -> CspStatus {
    guard(|| {
        let ds = handle(dataset, "dataset")?;
        *out_ref(out, "out")? = ds.records.first().map_or(0, |r| r.channels());
        Ok(())
    })
}

/// Releases a dataset. NULL is ignored.
///
/// # Safety
/// `dataset` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn csp_dataset_free(dataset: *mut CspDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

// ---------------------------------------------------------------- pipelines

/// Trains `method` for subject `target` with every other subject as donor
/// and `m` filters per class.
///
/// # Safety
/// `dataset` must be a live handle; `params` readable (NULL allowed for
/// `CSP_METHOD_CSP`); `out` writable.
#[no_mangle]
pub unsafe extern "C" fn csp_train_filters(
    dataset: *mut CspDataset,
    method: CspMethod,
    target: usize,
    params: *const CspParams,
    m: usize,
    out: *mut *mut CspFilterBank,
) -> CspStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let ds = out_ref(dataset, "dataset")?;
        ds.check_target(target)?;
        let method = method_of(method);
        let params = match params.as_ref() {
            Some(p) => params_of(method, p),
            None if method == Method::Csp => Params::None,
            None => return Err(null("params")),
        };
        let donors = donors_for(method, ds.records.len(), target);
        let bank = ds.workspace(m)?.filters(method, target, &donors, params)?;
        *out = Box::into_raw(Box::new(CspFilterBank { bank }));
        Ok(())
    })
}

fn donors_for(method: Method, n: usize, target: usize) -> Vec<usize> {
    if method.needs_donors() {
        (0..n).filter(|&i| i != target).collect()
    } else {
        Vec::new()
    }
}

/// Trains with fixed parameters and reports training- and test-session
/// accuracy of the LDA pipeline.
///
/// # Safety
/// As for [`csp_train_filters`]; the accuracy pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn csp_evaluate(
    dataset: *mut CspDataset,
    method: CspMethod,
    target: usize,
    params: *const CspParams,
    m: usize,
    train_accuracy: *mut f64,
    test_accuracy: *mut f64,
) -> CspStatus {
    guard(|| {
        let (train_out, test_out) = (out_ref(train_accuracy, "train_accuracy")?, out_ref(test_accuracy, "test_accuracy")?);
        let ds = out_ref(dataset, "dataset")?;
        ds.check_target(target)?;
        let method = method_of(method);
        let params = match params.as_ref() {
            Some(p) => params_of(method, p),
            None if method == Method::Csp => Params::None,
            None => return Err(null("params")),
        };
        let donors = donors_for(method, ds.records.len(), target);
        let e = run_pipeline(ds.workspace(m)?, method, target, &donors, params)?;
        (*train_out, *test_out) = (e.train_accuracy, e.test_accuracy);
        Ok(())
    })
}

/// Selects parameters by leave-one-subject-out over the other subjects on
/// the default grid, then evaluates the target. `params_out` receives the
/// selection.
///
/// # Safety
/// `dataset` must be a live handle; all out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn csp_evaluate_loso(
    dataset: *mut CspDataset,
    method: CspMethod,
    target: usize,
    m: usize,
    params_out: *mut CspParams,
    train_accuracy: *mut f64,
    test_accuracy: *mut f64,
) -> CspStatus {
    guard(|| {
        let params_out = out_ref(params_out, "params_out")?;
        let (train_out, test_out) = (out_ref(train_accuracy, "train_accuracy")?, out_ref(test_accuracy, "test_accuracy")?);
        let ds = out_ref(dataset, "dataset")?;
        ds.check_target(target)?;
        let method = method_of(method);
        let cfg = ExperimentConfig {
            dataset: None,
            toy: None,
            methods: vec![MethodSpec::new(method)],
            m,
            repetitions: 1,
            seed: 0,
            output: None,
        };
        let (_, params, e) = select_and_evaluate(ds.workspace(m)?, &cfg, target)?
            .pop()
            .expect("one method configured");
        *params_out = params_to_c(params);
        (*train_out, *test_out) = (e.train_accuracy, e.test_accuracy);
        Ok(())
    })
}

/// Runs an experiment described by an `ExperimentConfig` JSON document
/// (toy study or dataset directory) and returns the result table as CSV.
/// Release the string with [`csp_string_free`].
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `csv_out` writable.
#[no_mangle]
pub unsafe extern "C" fn csp_run_experiment_json(config_json: *const c_char, csv_out: *mut *mut c_char) -> CspStatus {
    guard(|| {
        let csv_out = out_ref(csv_out, "csv_out")?;
        let cfg: ExperimentConfig = serde_json::from_str(c_str(config_json, "config_json")?).map_err(Error::from)?;
        let table = if cfg.toy.is_some() { run_toy_experiment(&cfg)? } else { run_real_experiment(&cfg)? };
        let text = table.to_csv_string()?;
        *csv_out = CString::new(text).map_err(|_| invalid("CSV contains NUL"))?.into_raw();
        Ok(())
    })
}

// ------------------------------------------------------------- filter bank

/// Plain CSP from two class covariances (`dim × dim`, column-major).
///
/// # Safety
/// `sigma1` and `sigma2` must point to `dim·dim` readable values; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn csp_filter_bank_from_covariances(
    sigma1: *const f64,
    sigma2: *const f64,
    dim: usize,
    m: usize,
    out: *mut *mut CspFilterBank,
) -> CspStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let bank = csp_train(&square(sigma1, dim, "sigma1")?, &square(sigma2, dim, "sigma2")?, m)?;
        *out = Box::into_raw(Box::new(CspFilterBank { bank }));
        Ok(())
    })
}

/// # Safety
/// `bank` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn csp_filter_bank_shape(
    bank: *const CspFilterBank,
    channels: *mut usize,
    filters: *mut usize,
) -> CspStatus {
    guard(|| {
        let b = &handle(bank, "bank")?.bank;
        *out_ref(channels, "channels")? = b.channels();
        *out_ref(filters, "filters")? = b.filters().ncols();
        Ok(())
    })
}

/// Filters as a `channels × filters` column-major matrix. `written`
/// receives the number of values required even when `len` is too small.
///
/// # Safety
/// `bank` must be a live handle; `buf` must hold `len` values; `written`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn csp_filter_bank_filters(
    bank: *const CspFilterBank,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> CspStatus {
    guard(|| {
        let b = &handle(bank, "bank")?.bank;
        copy_out(b.filters().as_slice(), slice_mut(buf, len, "buf")?, out_ref(written, "written")?)
    })
}

/// Patterns, laid out like [`csp_filter_bank_filters`].
///
/// # Safety
/// As for [`csp_filter_bank_filters`].
#[no_mangle]
pub unsafe extern "C" fn csp_filter_bank_patterns(
    bank: *const CspFilterBank,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> CspStatus {
    guard(|| {
        let b = &handle(bank, "bank")?.bank;
        copy_out(b.patterns().as_slice(), slice_mut(buf, len, "buf")?, out_ref(written, "written")?)
    })
}

/// Log-variance features of one trial (`channels × samples`, row-major);
/// one value per filter.
///
/// # Safety
/// `trial` must hold `channels·samples` values; `features` must hold
/// `len` values; `written` writable.
#[no_mangle]
pub unsafe extern "C" fn csp_filter_bank_features(
    bank: *const CspFilterBank,
    trial: *const f64,
    channels: usize,
    samples: usize,
    features: *mut f64,
    len: usize,
    written: *mut usize,
) -> CspStatus {
    guard(|| {
        let b = &handle(bank, "bank")?.bank;
        let data = slice(trial, area(channels, samples)?, "trial")?;
        let x = Matrix::from_row_slice(channels, samples, data);
        let f = b.log_variance_features(&x)?;
        copy_out(f.as_slice(), slice_mut(features, len, "features")?, out_ref(written, "written")?)
    })
}

/// Releases a filter bank. NULL is ignored.
///
/// # Safety
/// `bank` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn csp_filter_bank_free(bank: *mut CspFilterBank) {
    if !bank.is_null() {
        drop(Box::from_raw(bank));
    }
}

// ------------------------------------------------------------------ metrics

/// Symmetric KL divergence between two zero-mean Gaussians given by their
/// `dim × dim` covariances.
///
/// # Safety
/// `a`, `b` must hold `dim·dim` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn csp_symmetric_kl(a: *const f64, b: *const f64, dim: usize, out: *mut f64) -> CspStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = symmetric_kl(&square(a, dim, "a")?, &square(b, dim, "b")?)?;
        Ok(())
    })
}

/// Mean squared cosine of the principal angles between two subspaces given
/// by orthonormal column-major bases (`ambient × dim_u`, `ambient × dim_v`).
///
/// # Safety
/// `u` must hold `ambient·dim_u` values, `v` `ambient·dim_v`; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn csp_subspace_similarity(
    u: *const f64,
    dim_u: usize,
    v: *const f64,
    dim_v: usize,
    ambient: usize,
    out: *mut f64,
) -> CspStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let basis = |p, d, what| -> Result<OrthonormalBasis, Reject> {
            let data = slice(p, area(ambient, d)?, what)?;
            Ok(OrthonormalBasis::new(Matrix::from_column_slice(ambient, d, data))?)
        };
        *out = principal_angle_similarity(&basis(u, dim_u, "u")?, &basis(v, dim_v, "v")?)?;
        Ok(())
    })
}

/// One-sided paired permutation test of `mean(a − b) > 0`.
///
/// # Safety
/// `a`, `b` must hold `n` values; `p_value` writable.
#[no_mangle]
pub unsafe extern "C" fn csp_paired_permutation_test(
    a: *const f64,
    b: *const f64,
    n: usize,
    p_value: *mut f64,
) -> CspStatus {
    guard(|| {
        let out = out_ref(p_value, "p_value")?;
        *out = paired_permutation_test(slice(a, n, "a")?, slice(b, n, "b")?)?.p_value;
        Ok(())
    })
}
