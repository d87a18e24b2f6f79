//! C ABI for the spillover-did estimators.
//!
//! Every fallible function returns an [`SdStatus`]. On failure a description
//! is stored per thread and can be read with [`sd_last_error`]. Objects are
//! handed out as opaque pointers and must be released with the matching
//! `*_free` function; strings returned by the library are released with
//! [`sd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spillover_did::analysis::{analyze, AnalysisConfig};
use spillover_did::datamodel::{read_panel_csv, FeatureMap, PanelDataset};
use spillover_did::estimators::{Contrast, EffectEstimate, Estimator};
use spillover_did::report::{Metadata, ReportDocument};
use spillover_did::simulation::{
    generate_panel, run_monte_carlo, DgpKind, Scenario, ScenarioSpec, SimulationConfig,
};
use spillover_did::Error;

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Invalid option, flag value or feature map.
    Config = 3,
    /// Input data does not follow the panel schema.
    Data = 4,
    /// An exposure group is empty or a propensity is zero.
    Positivity = 5,
    /// A design or information matrix is rank deficient.
    Singular = 6,
    /// An argument lies outside its admissible range.
    Domain = 7,
    Io = 8,
    /// Index past the end of a result set.
    OutOfRange = 9,
    /// A Rust panic was caught at the boundary.
    Internal = 10,
}

impl From<&Error> for SdStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Config(_) => SdStatus::Config,
            Error::Data { .. } | Error::Structure(_) | Error::Specification(_) | Error::Csv(_) => {
                SdStatus::Data
            }
            Error::Positivity(_) => SdStatus::Positivity,
            Error::Singular(_) => SdStatus::Singular,
            Error::Domain(_) => SdStatus::Domain,
            Error::Io(_) | Error::Json(_) => SdStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).ok());
}

fn fail(status: SdStatus, msg: impl Into<String>) -> SdStatus {
    set_last_error(msg);
    status
}

fn from_error(e: Error) -> SdStatus {
    let status = SdStatus::from(&e);
    fail(status, e.to_string())
}

/// Runs `f`, converting panics into `SdStatus::Internal`.
fn guarded(f: impl FnOnce() -> SdStatus) -> SdStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(SdStatus::Internal, format!("internal error: {msg}"))
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, SdStatus> {
    if p.is_null() {
        return Err(fail(SdStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SdStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

/// Optional string: NULL or empty means "use the default".
unsafe fn read_opt_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, SdStatus> {
    if p.is_null() {
        return Ok(None);
    }
    let s = read_str(p, what)?;
    Ok((!s.trim().is_empty()).then_some(s))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn sd_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library that has not been
/// freed yet.
#[no_mangle]
pub unsafe extern "C" fn sd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---------------------------------------------------------------------------
// Datasets

/// Opaque panel dataset.
pub struct SdDataset(PanelDataset);

/// Loads a wide panel CSV.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sd_dataset_read_csv(
    path: *const c_char,
    out: *mut *mut SdDataset,
) -> SdStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SdStatus::NullPointer, "out is NULL");
        }
        let path = match read_str(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match read_panel_csv(path) {
            Ok(d) => {
                *out = Box::into_raw(Box::new(SdDataset(d)));
                SdStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Draws one panel of `n` units from a built-in design. `dgp` is
/// "two-period" or "multi-period"; NULL selects two-period. Stream 0 of
/// `seed` is used, matching `simulate --dump-data`.
///
/// # Safety
/// `dgp` must be NULL or NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sd_dataset_simulate(
    dgp: *const c_char,
    n: usize,
    seed: u64,
    out: *mut *mut SdDataset,
) -> SdStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SdStatus::NullPointer, "out is NULL");
        }
        let kind = match read_opt_str(dgp, "dgp") {
            Ok(Some(s)) => match s.parse::<DgpKind>() {
                Ok(k) => k,
                Err(e) => return from_error(e),
            },
            Ok(None) => DgpKind::TwoPeriod,
            Err(s) => return s,
        };
        let params = match kind.params(None, None, None) {
            Ok(p) => p,
            Err(e) => return from_error(e),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        match generate_panel(&params, n, &mut rng) {
            Ok(d) => {
                *out = Box::into_raw(Box::new(SdDataset(d)));
                SdStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `d` must be NULL or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn sd_dataset_n_units(d: *const SdDataset) -> usize {
    d.as_ref().map_or(0, |d| d.0.n_units())
}

/// Number of post-treatment periods T.
///
/// # Safety
/// `d` must be NULL or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn sd_dataset_periods(d: *const SdDataset) -> usize {
    d.as_ref().map_or(0, |d| d.0.periods())
}

/// # Safety
/// `d` must be NULL or a dataset handle that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn sd_dataset_free(d: *mut SdDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

// ---------------------------------------------------------------------------
// Estimation

/// Opaque set of estimates from one call to [`sd_estimate`].
pub struct SdEstimates {
    rows: Vec<EffectEstimate>,
    names: Vec<CString>,
    json: String,
}

/// One estimate row. `time_index` is -1 for two-period data and for
/// time-averaged rows.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SdEffect {
    pub point: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
    pub time_index: i64,
}

fn parse_list<T: std::str::FromStr<Err = Error>>(
    text: Option<&str>,
    default: T,
) -> Result<Vec<T>, Error> {
    match text {
        None => Ok(vec![default]),
        Some(s) => s.split(',').map(|p| p.trim().parse()).collect(),
    }
}

/// Fits the nuisance models and computes the requested estimates.
///
/// `ps_map` and `om_map` use the feature-map syntax (`"1 + x1 + x2^2"`);
/// NULL means linear in every covariate. `estimands` and `estimators` are
/// comma lists (`"ATT,AOTT"`, `"IPW,DR"`); NULL means AOTT and DR.
///
/// # Safety
/// `d` must be a live dataset handle; string arguments must be NULL or
/// NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sd_estimate(
    d: *const SdDataset,
    ps_map: *const c_char,
    om_map: *const c_char,
    estimands: *const c_char,
    estimators: *const c_char,
    out: *mut *mut SdEstimates,
) -> SdStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SdStatus::NullPointer, "out is NULL");
        }
        let Some(d) = d.as_ref() else {
            return fail(SdStatus::NullPointer, "dataset is NULL");
        };
        let texts = (|| {
            Ok::<_, SdStatus>((
                read_opt_str(ps_map, "ps_map")?,
                read_opt_str(om_map, "om_map")?,
                read_opt_str(estimands, "estimands")?,
                read_opt_str(estimators, "estimators")?,
            ))
        })();
        let (ps, om, ests, estrs) = match texts {
            Ok(t) => t,
            Err(s) => return s,
        };
        let q = d.0.n_covariates();
        let result = (|| {
            let map =
                |t: Option<&str>| t.map_or_else(|| Ok(FeatureMap::linear(q)), FeatureMap::parse);
            let mut cfg = AnalysisConfig::new(q);
            cfg.ps_map = map(ps)?;
            cfg.om_map = map(om)?;
            cfg.contrasts = parse_list(ests, Contrast::Aott)?;
            cfg.estimators = parse_list(estrs, Estimator::Dr)?;
            let output = analyze(&d.0, &cfg)?;
            let doc = ReportDocument::for_analysis(
                Metadata::new("estimate", Default::default()),
                &output,
            );
            let mut json = Vec::new();
            doc.to_writer(&mut json)?;
            Ok::<_, Error>((doc.estimates, String::from_utf8_lossy(&json).into_owned()))
        })();
        match result {
            Ok((rows, json)) => {
                let names = rows
                    .iter()
                    .map(|r| CString::new(r.estimand.name()).unwrap_or_default())
                    .collect();
                *out = Box::into_raw(Box::new(SdEstimates { rows, names, json }));
                SdStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `e` must be NULL or a live estimates handle.
#[no_mangle]
pub unsafe extern "C" fn sd_estimates_len(e: *const SdEstimates) -> usize {
    e.as_ref().map_or(0, |e| e.rows.len())
}

/// Copies row `i` into `out`.
///
/// # Safety
/// `e` must be a live estimates handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sd_estimates_get(
    e: *const SdEstimates,
    i: usize,
    out: *mut SdEffect,
) -> SdStatus {
    guarded(|| {
        let (Some(e), false) = (e.as_ref(), out.is_null()) else {
            return fail(SdStatus::NullPointer, "estimates or out is NULL");
        };
        let Some(r) = e.rows.get(i) else {
            return fail(SdStatus::OutOfRange, format!("row {i} of {}", e.rows.len()));
        };
        *out = SdEffect {
            point: r.point,
            se: r.se,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            n: r.n,
            time_index: r.time_index.map_or(-1, |t| t as i64),
        };
        SdStatus::Ok
    })
}

/// Estimand label of row `i` (`"AOTT"`, `"TimeAvgATT"`, ...), or NULL when
/// out of range. Owned by the handle.
///
/// # Safety
/// `e` must be NULL or a live estimates handle.
#[no_mangle]
pub unsafe extern "C" fn sd_estimates_estimand(e: *const SdEstimates, i: usize) -> *const c_char {
    e.as_ref()
        .and_then(|e| e.names.get(i))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// Estimator label of row `i` (`"IPW"`, `"Reg"` or `"DR"`), or NULL.
///
/// # Safety
/// `e` must be NULL or a live estimates handle.
#[no_mangle]
pub unsafe extern "C" fn sd_estimates_estimator(e: *const SdEstimates, i: usize) -> *const c_char {
    let Some(row) = e.as_ref().and_then(|e| e.rows.get(i)) else {
        return ptr::null();
    };
    match row.estimator {
        Estimator::Ipw => c"IPW".as_ptr(),
        Estimator::Reg => c"Reg".as_ptr(),
        Estimator::Dr => c"DR".as_ptr(),
    }
}

/// Full report document, including nuisance diagnostics, as JSON. Free the
/// result with [`sd_string_free`].
///
/// # Safety
/// `e` must be NULL or a live estimates handle.
#[no_mangle]
pub unsafe extern "C" fn sd_estimates_json(e: *const SdEstimates) -> *mut c_char {
    e.as_ref()
        .map_or(ptr::null_mut(), |e| into_c_string(e.json.clone()))
}

/// # Safety
/// `e` must be NULL or an estimates handle that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn sd_estimates_free(e: *mut SdEstimates) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

// ---------------------------------------------------------------------------
// Simulation

/// Runs a Monte Carlo study described by a TOML document with the keys
/// `scenario`, `n`, `reps`, `seed`, `dgp`, `theta01`, `theta10` and `T`
/// (all optional), and writes the JSON report to `*out`.
///
/// # Safety
/// `config` must be NULL or NUL-terminated; `out` must be a valid pointer.
/// Free the result with [`sd_string_free`].
#[no_mangle]
pub unsafe extern "C" fn sd_simulate_json(
    config: *const c_char,
    threads: usize,
    out: *mut *mut c_char,
) -> SdStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SdStatus::NullPointer, "out is NULL");
        }
        let text = match read_opt_str(config, "config") {
            Ok(t) => t.unwrap_or(""),
            Err(s) => return s,
        };
        let result = (|| {
            let cfg = SimulationConfig::from_toml_str(text)?;
            let kind = cfg.dgp.unwrap_or(DgpKind::TwoPeriod);
            let dgp = kind.params(cfg.theta01, cfg.theta10, cfg.periods)?;
            let scenarios: Vec<Scenario> = match &cfg.scenario {
                Some(s) => s.split(',').map(str::parse).collect::<Result<_, _>>()?,
                None => vec![Scenario::A],
            };
            let mut reports = Vec::with_capacity(scenarios.len());
            for scenario in scenarios {
                let mut spec = ScenarioSpec::new(
                    scenario,
                    dgp.clone(),
                    cfg.n.unwrap_or(2000),
                    cfg.reps.unwrap_or(1000),
                    cfg.seed.unwrap_or(2024),
                );
                spec.threads = threads;
                reports.push(run_monte_carlo(&spec)?);
            }
            let doc = ReportDocument::for_simulation(
                Metadata::new("simulate", Default::default()),
                reports,
            );
            let mut json = Vec::new();
            doc.to_writer(&mut json)?;
            Ok::<_, Error>(String::from_utf8_lossy(&json).into_owned())
        })();
        match result {
            Ok(json) => {
                *out = into_c_string(json);
                SdStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
