//! C ABI over `knnrate`.
//!
//! Every fallible function returns a [`KnnrateStatus`]; on failure the
//! message is available from [`knnrate_last_error`] on the same thread.
//! Handles are opaque and must be released with their `_free` function.
//! Absent bound constants are passed as NaN (or 0 for the intrinsic
//! dimension).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use knnrate::bounds::{self, BoundParams, KMode};
use knnrate::harness::{run_experiment, to_csv, ExperimentConfig, ExperimentKind};
use knnrate::structures::{self, PointCloud, Provenance};
use knnrate::{Dataset, Error, KdTree, PointSet, Regressor};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnnrateStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    InvalidK = 4,
    NonFinite = 5,
    EmptyInput = 6,
    MissingParameter = 7,
    Overflow = 8,
    /// The caller's buffer is too small; the required length was written.
    BufferTooSmall = 9,
    Config = 10,
    Io = 11,
    Unsupported = 12,
    DegenerateFit = 13,
    Panic = 14,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> KnnrateStatus {
    match e {
        Error::EmptyPointSet | Error::EmptyProbes | Error::EmptyTruth | Error::EmptyCloud => {
            KnnrateStatus::EmptyInput
        }
        Error::NonFiniteCoordinate { .. } | Error::NonFiniteObservation { .. } => {
            KnnrateStatus::NonFinite
        }
        Error::DimensionMismatch { .. } => KnnrateStatus::DimensionMismatch,
        Error::InvalidK { .. } => KnnrateStatus::InvalidK,
        Error::InvalidRadius(_) | Error::InvalidParameter { .. } => KnnrateStatus::InvalidArgument,
        Error::MissingParameter(_) => KnnrateStatus::MissingParameter,
        Error::Overflow(_) => KnnrateStatus::Overflow,
        Error::DegenerateFit(_) => KnnrateStatus::DegenerateFit,
        Error::UnsupportedManifold(_) => KnnrateStatus::Unsupported,
        Error::Parse { .. } | Error::Config(_) => KnnrateStatus::Config,
        Error::Io { .. } => KnnrateStatus::Io,
    }
}

struct Failure(KnnrateStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn fail<T>(status: KnnrateStatus, message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, message.into()))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KnnrateStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            KnnrateStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".to_string());
            KnnrateStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        return fail(KnnrateStatus::NullPointer, format!("`{name}` is null"));
    }
    Ok(())
}

unsafe fn doubles<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    non_null(p, name)?;
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn write<T>(p: *mut T, value: T, name: &str) -> Result<(), Failure> {
    non_null(p, name)?;
    p.write(value);
    Ok(())
}

unsafe fn point_set(coords: *const f64, n: usize, dim: usize) -> Result<PointSet, Failure> {
    let len = n
        .checked_mul(dim)
        .ok_or_else(|| Failure(KnnrateStatus::Overflow, "n * dim overflows".into()))?;
    if len == 0 {
        return fail(KnnrateStatus::EmptyInput, "point set is empty");
    }
    Ok(PointSet::new(
        dim,
        doubles(coords, len, "coords")?.to_vec(),
    )?)
}

/// Copies `members` into `out` (capacity `cap`) and stores the count.
unsafe fn write_indices(
    members: &[usize],
    out: *mut usize,
    cap: usize,
    count: *mut usize,
) -> Result<(), Failure> {
    write(count, members.len(), "out_count")?;
    if members.len() > cap {
        return fail(
            KnnrateStatus::BufferTooSmall,
            format!("need {} slots, buffer holds {cap}", members.len()),
        );
    }
    if !members.is_empty() {
        non_null(out, "out_indices")?;
        ptr::copy_nonoverlapping(members.as_ptr(), out, members.len());
    }
    Ok(())
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    non_null(p, name)?;
    CStr::from_ptr(p).to_str().or_else(|_| {
        fail(
            KnnrateStatus::InvalidArgument,
            format!("`{name}` is not UTF-8"),
        )
    })
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn knnrate_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Exact k-NN index over a point set.
pub struct KnnrateIndex {
    points: PointSet,
    tree: KdTree,
}

/// Builds an index over `n` points of dimension `dim`, row-major in `coords`.
///
/// # Safety
/// `coords` must point to `n * dim` readable doubles and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn knnrate_index_new(
    coords: *const f64,
    n: usize,
    dim: usize,
    out: *mut *mut KnnrateIndex,
) -> KnnrateStatus {
    guard(|| {
        let points = point_set(coords, n, dim)?;
        let tree = KdTree::build(&points);
        write(
            out,
            Box::into_raw(Box::new(KnnrateIndex { points, tree })),
            "out",
        )
    })
}

/// # Safety
/// `index` must be null or a handle from [`knnrate_index_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn knnrate_index_free(index: *mut KnnrateIndex) {
    if !index.is_null() {
        drop(Box::from_raw(index));
    }
}

/// Tie-inclusive k-NN query. Writes the k-NN radius and the ascending member
/// indices. When `cap` is too small, writes the required count and returns
/// `BufferTooSmall`.
///
/// # Safety
/// `index` must be a live handle, `query` must hold the index dimension,
/// `out_indices` must have room for `cap` entries.
#[no_mangle]
pub unsafe extern "C" fn knnrate_index_knn(
    index: *const KnnrateIndex,
    query: *const f64,
    k: usize,
    out_radius: *mut f64,
    out_indices: *mut usize,
    cap: usize,
    out_count: *mut usize,
) -> KnnrateStatus {
    guard(|| {
        non_null(index, "index")?;
        let index = &*index;
        let q = doubles(query, index.points.dim(), "query")?;
        let ns = index.tree.knn(q, k)?;
        write(out_radius, ns.radius, "out_radius")?;
        write_indices(&ns.members, out_indices, cap, out_count)
    })
}

/// Indices of all points within distance `r` of `query`, ascending.
///
/// # Safety
/// As for [`knnrate_index_knn`].
#[no_mangle]
pub unsafe extern "C" fn knnrate_index_range(
    index: *const KnnrateIndex,
    query: *const f64,
    r: f64,
    out_indices: *mut usize,
    cap: usize,
    out_count: *mut usize,
) -> KnnrateStatus {
    guard(|| {
        non_null(index, "index")?;
        let index = &*index;
        let q = doubles(query, index.points.dim(), "query")?;
        let members = index.tree.range(q, r)?;
        write_indices(&members, out_indices, cap, out_count)
    })
}

/// k-NN regressor owning a copy of its data.
pub struct KnnrateRegressor {
    reg: Regressor,
}

/// # Safety
/// `x` must hold `n * dim` doubles, `y` must hold `n` doubles and `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn knnrate_regressor_new(
    x: *const f64,
    y: *const f64,
    n: usize,
    dim: usize,
    k: usize,
    out: *mut *mut KnnrateRegressor,
) -> KnnrateStatus {
    guard(|| {
        let points = point_set(x, n, dim)?;
        let y = doubles(y, n, "y")?.to_vec();
        let reg = Regressor::new(Dataset::new(points, y)?, k)?;
        write(
            out,
            Box::into_raw(Box::new(KnnrateRegressor { reg })),
            "out",
        )
    })
}

/// # Safety
/// `reg` must be null or a handle from [`knnrate_regressor_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn knnrate_regressor_free(reg: *mut KnnrateRegressor) {
    if !reg.is_null() {
        drop(Box::from_raw(reg));
    }
}

/// Predictions at `m` queries, row-major in `queries`, written to `out`.
///
/// # Safety
/// `reg` must be live, `queries` must hold `m * dim` doubles and `out` must
/// have room for `m` doubles.
#[no_mangle]
pub unsafe extern "C" fn knnrate_regressor_predict(
    reg: *const KnnrateRegressor,
    queries: *const f64,
    m: usize,
    out: *mut f64,
) -> KnnrateStatus {
    guard(|| {
        non_null(reg, "reg")?;
        let reg = &(*reg).reg;
        let dim = reg.data().dim();
        if m == 0 {
            return Ok(());
        }
        let qs = point_set(queries, m, dim)?;
        let preds = reg.predict_all(&qs)?;
        non_null(out, "out")?;
        ptr::copy_nonoverlapping(preds.as_ptr(), out, m);
        Ok(())
    })
}

/// k-NN radius at `query`.
///
/// # Safety
/// `reg` must be live, `query` must hold the data dimension.
#[no_mangle]
pub unsafe extern "C" fn knnrate_regressor_radius(
    reg: *const KnnrateRegressor,
    query: *const f64,
    out: *mut f64,
) -> KnnrateStatus {
    guard(|| {
        non_null(reg, "reg")?;
        let reg = &(*reg).reg;
        let q = doubles(query, reg.data().dim(), "query")?;
        write(out, reg.knn_radius(q)?, "out")
    })
}

/// Sample indices whose prediction is at least `lambda - epsilon`.
///
/// # Safety
/// `reg` must be live and `out_indices` must have room for `cap` entries.
#[no_mangle]
pub unsafe extern "C" fn knnrate_regressor_level_set(
    reg: *const KnnrateRegressor,
    lambda: f64,
    epsilon: f64,
    out_indices: *mut usize,
    cap: usize,
    out_count: *mut usize,
) -> KnnrateStatus {
    guard(|| {
        non_null(reg, "reg")?;
        let est = structures::estimate_level_set(&(*reg).reg, lambda, epsilon)?;
        write_indices(&est.member_indices, out_indices, cap, out_count)
    })
}

/// Sample index with the largest prediction (smallest index on ties).
///
/// # Safety
/// `reg` must be live; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn knnrate_regressor_argmax(
    reg: *const KnnrateRegressor,
    out_index: *mut usize,
    out_value: *mut f64,
) -> KnnrateStatus {
    guard(|| {
        non_null(reg, "reg")?;
        let m = structures::estimate_maxima(&(*reg).reg)?;
        write(out_index, m.argmax_index, "out_index")?;
        write(out_value, m.value, "out_value")
    })
}

/// Hausdorff distance between two point sets of dimension `dim`.
///
/// # Safety
/// `a` must hold `na * dim` doubles and `b` must hold `nb * dim`.
#[no_mangle]
pub unsafe extern "C" fn knnrate_hausdorff(
    a: *const f64,
    na: usize,
    b: *const f64,
    nb: usize,
    dim: usize,
    out: *mut f64,
) -> KnnrateStatus {
    guard(|| {
        let ca = PointCloud::from_points(&point_set(a, na, dim)?, Provenance::Samples);
        let cb = PointCloud::from_points(&point_set(b, nb, dim)?, Provenance::Samples);
        write(out, structures::hausdorff_distance(&ca, &cb)?, "out")
    })
}

/// Bound constants; NaN marks an absent value, `d = 0` an absent intrinsic
/// dimension.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct KnnrateBoundParams {
    pub dim: usize,
    pub gamma: f64,
    pub p0: f64,
    pub r0: f64,
    pub sigma: f64,
    pub delta: f64,
    pub alpha: f64,
    pub c_alpha: f64,
    pub beta: f64,
    pub c_low: f64,
    pub c_high: f64,
    pub r_m: f64,
    pub d: usize,
    pub tau: f64,
    pub m2: f64,
}

/// Parameters for dimension `dim` with every constant absent.
#[no_mangle]
pub extern "C" fn knnrate_bound_params_init(dim: usize) -> KnnrateBoundParams {
    KnnrateBoundParams {
        dim,
        gamma: f64::NAN,
        p0: f64::NAN,
        r0: f64::NAN,
        sigma: f64::NAN,
        delta: f64::NAN,
        alpha: f64::NAN,
        c_alpha: f64::NAN,
        beta: f64::NAN,
        c_low: f64::NAN,
        c_high: f64::NAN,
        r_m: f64::NAN,
        d: 0,
        tau: f64::NAN,
        m2: f64::NAN,
    }
}

fn opt(v: f64) -> Option<f64> {
    (!v.is_nan()).then_some(v)
}

impl KnnrateBoundParams {
    fn to_params(self) -> Result<BoundParams, Failure> {
        let p = BoundParams {
            dim: self.dim,
            gamma: opt(self.gamma),
            p0: opt(self.p0),
            r0: opt(self.r0),
            sigma: opt(self.sigma),
            delta: opt(self.delta),
            alpha: opt(self.alpha),
            c_alpha: opt(self.c_alpha),
            beta: opt(self.beta),
            c_low: opt(self.c_low),
            c_high: opt(self.c_high),
            r_m: opt(self.r_m),
            d: (self.d > 0).then_some(self.d),
            tau: opt(self.tau),
            m2: opt(self.m2),
        };
        p.validate()?;
        Ok(p)
    }
}

unsafe fn bound(
    params: *const KnnrateBoundParams,
    out: *mut f64,
    f: impl FnOnce(&BoundParams) -> knnrate::Result<f64>,
) -> KnnrateStatus {
    guard(|| {
        non_null(params, "params")?;
        let p = (*params).to_params()?;
        write(out, f(&p)?, "out")
    })
}

/// `2 sigma sqrt((D log n + log(2/delta)) / k)`.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn knnrate_variance_term(
    params: *const KnnrateBoundParams,
    n: usize,
    k: usize,
    out: *mut f64,
) -> KnnrateStatus {
    bound(params, out, |p| bounds::variance_term(p, n, k))
}

/// `(2k / (gamma v_D n p0))^{1/D}`.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn knnrate_radius_bound(
    params: *const KnnrateBoundParams,
    n: usize,
    k: usize,
    out: *mut f64,
) -> KnnrateStatus {
    bound(params, out, |p| bounds::radius_bound(p, n, k))
}

/// `(4k / (v_d n p0))^{1/d}`.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn knnrate_manifold_radius_bound(
    params: *const KnnrateBoundParams,
    n: usize,
    k: usize,
    out: *mut f64,
) -> KnnrateStatus {
    bound(params, out, |p| bounds::manifold_radius_bound(p, n, k))
}

/// Uniform error bound; `manifold != 0` uses the intrinsic radius bound.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn knnrate_holder_bound(
    params: *const KnnrateBoundParams,
    n: usize,
    k: usize,
    manifold: bool,
    out: *mut f64,
) -> KnnrateStatus {
    bound(params, out, |p| bounds::holder_bound(p, n, k, manifold))
}

/// Squared-distance bound on the k-NN argmax.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn knnrate_maxima_bound_sq(
    params: *const KnnrateBoundParams,
    n: usize,
    k: usize,
    out: *mut f64,
) -> KnnrateStatus {
    bound(params, out, |p| bounds::maxima_bound_sq(p, n, k))
}

/// Hausdorff bound for the level-set estimate.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn knnrate_level_set_bound(
    params: *const KnnrateBoundParams,
    n: usize,
    k: usize,
    out: *mut f64,
) -> KnnrateStatus {
    bound(params, out, |p| bounds::level_set_bound(p, n, k))
}

/// Rate-optimal k modes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnnrateKMode {
    Regression = 0,
    LevelSet = 1,
    Maxima = 2,
}

/// `max(1, round(n^e))` with the mode's optimal exponent.
#[no_mangle]
pub extern "C" fn knnrate_optimal_k(n: usize, alpha: f64, dim: usize, mode: KnnrateKMode) -> usize {
    let mode = match mode {
        KnnrateKMode::Regression => KMode::Regression,
        KnnrateKMode::LevelSet => KMode::LevelSet,
        KnnrateKMode::Maxima => KMode::Maxima,
    };
    bounds::optimal_k(n, alpha, dim, mode)
}

/// `D * n^D`, failing with `Overflow` when it exceeds 64 bits.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn knnrate_set_count_bound(n: u64, dim: u32, out: *mut u64) -> KnnrateStatus {
    guard(|| {
        let b = bounds::knn_set_count_bound(n, dim)?;
        let b = u64::try_from(b)
            .or_else(|_| fail(KnnrateStatus::Overflow, "D * n^D exceeds 64 bits"))?;
        write(out, b, "out")
    })
}

/// Runs the experiment `kind` (`regress`, `manifold`, `levelset`, `maxima`,
/// `coverage`, `setcount`) from a config file and writes its CSV records to
/// `out_path`.
///
/// # Safety
/// All pointers must be nul-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn knnrate_run_experiment(
    config_path: *const c_char,
    kind: *const c_char,
    out_path: *const c_char,
) -> KnnrateStatus {
    guard(|| {
        let config_path = c_str(config_path, "config_path")?;
        let kind: ExperimentKind = c_str(kind, "kind")?.parse()?;
        let out_path = c_str(out_path, "out_path")?;
        let cfg = ExperimentConfig::read(config_path)?;
        let csv = to_csv(&run_experiment(&cfg, kind)?.records)?;
        std::fs::write(out_path, csv).map_err(|source| {
            Error::Io {
                path: out_path.into(),
                source,
            }
            .into()
        })
    })
}
