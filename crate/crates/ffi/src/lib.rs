//! C interface to `frogtree`.
//!
//! Every fallible function returns an [`FtStatus`]; on failure a message is
//! available from [`ft_last_error_message`] on the same thread until the
//! next call. Objects are opaque handles created by `*_new`/constructor
//! functions and released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use frogtree::certificates;
use frogtree::dist::{self, DominanceVerdict, Pmf};
use frogtree::operator::{self, StarParams};
use frogtree::sim::{self, FrogLaw, SimConfig, Variant};
use frogtree::transience;
use frogtree::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    InvalidPmf = 3,
    Precondition = 4,
    SupportCapExceeded = 5,
    Bracket = 6,
    Supercritical = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtVariant {
    Simple = 0,
    Nonbacktracking = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtDominanceKind {
    Dominates = 0,
    NotDominates = 1,
    Inconclusive = 2,
}

/// Result of a dominance check. `witness` is set for `NotDominates`,
/// `slack` for `Inconclusive`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FtDominance {
    pub kind: FtDominanceKind,
    pub witness: u64,
    pub slack: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FtTrialResult {
    pub root_visits: u64,
    pub frogs_woken: u64,
    pub absorbed_at_cap: u64,
    pub frog_steps: u64,
    /// Step at which the work budget stopped the trial, 0 if it did not.
    pub truncated_at: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FtBatchStats {
    pub trials: u64,
    pub mean_visits: f64,
    pub variance: f64,
    pub stderr_visits: f64,
    pub mean_woken: f64,
    pub mean_absorbed: f64,
    pub truncated_trials: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FtWeightParams {
    pub theta: f64,
    pub m: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FtCoverStats {
    pub mean: f64,
    pub stderr_time: f64,
    pub p10: u64,
    pub p50: u64,
    pub p90: u64,
}

/// Opaque truncated distribution.
pub struct FtPmf(Pmf);

/// Opaque simulation configuration.
pub struct FtSimConfig(SimConfig);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FtStatus {
    match e {
        Error::InvalidParameter { .. } => FtStatus::InvalidArgument,
        Error::InvalidPmf(_) => FtStatus::InvalidPmf,
        Error::Precondition(_) => FtStatus::Precondition,
        Error::SupportCapExceeded { .. } => FtStatus::SupportCapExceeded,
        Error::Bracket { .. } => FtStatus::Bracket,
        Error::Supercritical { .. } => FtStatus::Supercritical,
    }
}

fn null_pointer(name: &str) -> FtStatus {
    set_error(format!("{name} is null"));
    FtStatus::NullPointer
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F>(f: F) -> FtStatus
where
    F: FnOnce() -> Result<(), FtStatus>,
{
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FtStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal error: {msg}"));
            FtStatus::Panic
        }
    }
}

fn check(r: frogtree::Result<()>) -> Result<(), FtStatus> {
    lift(r)
}

fn lift<T>(r: frogtree::Result<T>) -> Result<T, FtStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

unsafe fn write_out<T>(out: *mut T, name: &str, value: T) -> Result<(), FtStatus> {
    if out.is_null() {
        return Err(null_pointer(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn borrow<'a, T>(p: *const T, name: &str) -> Result<&'a T, FtStatus> {
    p.as_ref().ok_or_else(|| null_pointer(name))
}

fn boxed_pmf(pmf: Pmf) -> *mut FtPmf {
    Box::into_raw(Box::new(FtPmf(pmf)))
}

/// Message describing the last failure on this thread, or null. The
/// pointer stays valid until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn ft_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ft_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Builds a pmf from `len` masses on `0..len` and the mass beyond them.
///
/// # Safety
/// `masses` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_pmf_new(
    masses: *const f64,
    len: usize,
    tail_mass: f64,
    tol: f64,
    out: *mut *mut FtPmf,
) -> FtStatus {
    guard(|| {
        if masses.is_null() && len > 0 {
            return Err(null_pointer("masses"));
        }
        let values = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(masses, len).to_vec()
        };
        let pmf = lift(Pmf::new(values, tail_mass, tol))?;
        write_out(out, "out", boxed_pmf(pmf))
    })
}

/// `Poi(rate)` truncated so the tail is at most `tol`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_pmf_poisson(rate: f64, tol: f64, out: *mut *mut FtPmf) -> FtStatus {
    guard(|| {
        let pmf = lift(dist::poisson_pmf(rate, tol))?;
        write_out(out, "out", boxed_pmf(pmf))
    })
}

/// # Safety
/// `pmf` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ft_pmf_free(pmf: *mut FtPmf) {
    if !pmf.is_null() {
        drop(Box::from_raw(pmf));
    }
}

/// Number of explicit masses (support `0..len`).
///
/// # Safety
/// `pmf` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ft_pmf_len(pmf: *const FtPmf) -> usize {
    pmf.as_ref().map_or(0, |p| p.0.masses().len())
}

/// Mass at `k`; zero outside the explicit support or for a null handle.
///
/// # Safety
/// `pmf` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ft_pmf_mass(pmf: *const FtPmf, k: usize) -> f64 {
    pmf.as_ref().map_or(0.0, |p| p.0.mass(k))
}

/// # Safety
/// `pmf` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ft_pmf_tail_mass(pmf: *const FtPmf) -> f64 {
    pmf.as_ref().map_or(0.0, |p| p.0.tail_mass())
}

/// # Safety
/// `pmf` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ft_pmf_mean(pmf: *const FtPmf) -> f64 {
    pmf.as_ref().map_or(f64::NAN, |p| p.0.mean())
}

/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_pmf_total_variation(a: *const FtPmf, b: *const FtPmf, out: *mut f64) -> FtStatus {
    guard(|| {
        let (a, b) = (borrow(a, "a")?, borrow(b, "b")?);
        write_out(out, "out", a.0.total_variation(&b.0))
    })
}

/// Whether `lower ⪯ upper`, accounting for truncated tails.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_dominates(lower: *const FtPmf, upper: *const FtPmf, out: *mut FtDominance) -> FtStatus {
    guard(|| {
        let (lower, upper) = (borrow(lower, "lower")?, borrow(upper, "upper")?);
        let verdict = match dist::dominates(&lower.0, &upper.0) {
            DominanceVerdict::Dominates => FtDominance {
                kind: FtDominanceKind::Dominates,
                witness: 0,
                slack: 0.0,
            },
            DominanceVerdict::NotDominates { witness } => FtDominance {
                kind: FtDominanceKind::NotDominates,
                witness: witness as u64,
                slack: 0.0,
            },
            DominanceVerdict::Inconclusive { slack } => FtDominance {
                kind: FtDominanceKind::Inconclusive,
                witness: 0,
                slack,
            },
        };
        write_out(out, "out", verdict)
    })
}

/// Star-graph operator applied to an arbitrary law.
///
/// # Safety
/// `pmf` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_operator_apply(
    pmf: *const FtPmf,
    d: usize,
    mu: f64,
    tol: f64,
    out: *mut *mut FtPmf,
) -> FtStatus {
    guard(|| {
        let pmf = borrow(pmf, "pmf")?;
        let params = lift(StarParams::new(d, mu, tol))?;
        let image = lift(operator::apply_general(&pmf.0, &params))?;
        write_out(out, "out", boxed_pmf(image))
    })
}

/// Star-graph operator applied to `Poi(lambda)` in closed form.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_operator_apply_poisson(
    lambda: f64,
    d: usize,
    mu: f64,
    tol: f64,
    out: *mut *mut FtPmf,
) -> FtStatus {
    guard(|| {
        let params = lift(StarParams::new(d, mu, tol))?;
        let image = lift(operator::apply_poisson(lambda, &params))?;
        write_out(out, "out", boxed_pmf(image))
    })
}

/// Largest certified bootstrap step. `*has_value` is false when none exists.
///
/// # Safety
/// `out` and `has_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_epsilon_max(d: usize, mu: f64, out: *mut f64, has_value: *mut bool) -> FtStatus {
    guard(|| {
        let cert = lift(certificates::epsilon_max(d, mu))?;
        write_out(has_value, "has_value", cert.epsilon_max.is_some())?;
        write_out(out, "out", cert.epsilon_max.unwrap_or(f64::NAN))
    })
}

/// Checks the bootstrap inequality on the default lambda grid.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_verify_nbound(d: usize, mu: f64, epsilon: f64, out: *mut bool) -> FtStatus {
    guard(|| {
        let holds = lift(certificates::verify_nbound(
            d,
            mu,
            epsilon,
            &certificates::default_lambda_grid(),
        ))?;
        write_out(out, "out", holds)
    })
}

/// `x^-2 + x^(-2/x)` for `x >= 2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_cim_value(x: f64, out: *mut f64) -> FtStatus {
    guard(|| {
        let (value, _) = lift(certificates::cim_check(x))?;
        write_out(out, "out", value)
    })
}

/// Optimal weight exponent and expansion factor for mean frog count `eta_mean`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_optimal_theta(d: usize, eta_mean: f64, out: *mut FtWeightParams) -> FtStatus {
    guard(|| {
        let p = lift(transience::optimal_theta(d, eta_mean))?;
        write_out(out, "out", FtWeightParams { theta: p.theta, m: p.m })
    })
}

/// New simulation config with Poisson(`mu`) sleeping frogs.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_sim_config_new(
    d: usize,
    mu: f64,
    variant: FtVariant,
    horizon: u32,
    depth_cap: u32,
    trials: u64,
    seed: u64,
    out: *mut *mut FtSimConfig,
) -> FtStatus {
    guard(|| {
        let variant = match variant {
            FtVariant::Simple => Variant::Simple,
            FtVariant::Nonbacktracking => Variant::Nonbacktracking,
        };
        let config = SimConfig::new(d, FrogLaw::Poisson { mu }, variant, horizon, depth_cap, trials, seed);
        check(config.validate())?;
        write_out(out, "out", Box::into_raw(Box::new(FtSimConfig(config))))
    })
}

/// Replaces the frog law with a fixed count per vertex.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ft_sim_config_set_fixed(config: *mut FtSimConfig, k: u32) -> FtStatus {
    guard(|| {
        let c = config.as_mut().ok_or_else(|| null_pointer("config"))?;
        c.0.frog_law = FrogLaw::Fixed { k };
        Ok(())
    })
}

/// Drops frogs that cannot reach the root before the horizon.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ft_sim_config_set_prune(config: *mut FtSimConfig, prune: bool) -> FtStatus {
    guard(|| {
        let c = config.as_mut().ok_or_else(|| null_pointer("config"))?;
        c.0.prune_unreachable = prune;
        Ok(())
    })
}

/// Per-trial work budget in frog moves; 0 restores the default.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ft_sim_config_set_max_frog_steps(config: *mut FtSimConfig, steps: u64) -> FtStatus {
    guard(|| {
        let c = config.as_mut().ok_or_else(|| null_pointer("config"))?;
        c.0.max_frog_steps = (steps > 0).then_some(steps);
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ft_sim_config_free(config: *mut FtSimConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs trial `index` of `config`.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_run_trial(config: *const FtSimConfig, index: u64, out: *mut FtTrialResult) -> FtStatus {
    guard(|| {
        let c = borrow(config, "config")?;
        let o = lift(sim::run_trial(&c.0, index))?;
        write_out(
            out,
            "out",
            FtTrialResult {
                root_visits: o.root_visits,
                frogs_woken: o.frogs_woken,
                absorbed_at_cap: o.absorbed_at_cap,
                frog_steps: o.frog_steps,
                truncated_at: o.truncated_at.unwrap_or(0),
            },
        )
    })
}

/// Runs all trials of `config`. `visits`, when not null, receives a new
/// handle with the empirical root-visit law.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable; `visits` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn ft_run_batch(
    config: *const FtSimConfig,
    out: *mut FtBatchStats,
    visits: *mut *mut FtPmf,
) -> FtStatus {
    guard(|| {
        let c = borrow(config, "config")?;
        let s = lift(sim::run_batch(&c.0))?;
        write_out(
            out,
            "out",
            FtBatchStats {
                trials: s.trials,
                mean_visits: s.mean_visits,
                variance: s.variance,
                stderr_visits: s.stderr,
                mean_woken: s.mean_woken,
                mean_absorbed: s.mean_absorbed,
                truncated_trials: s.truncated_trials,
            },
        )?;
        if !visits.is_null() {
            visits.write(boxed_pmf(s.visits));
        }
        Ok(())
    })
}

/// Cover-time statistics of the one-per-site model on the finite tree.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_cover_time(
    d: usize,
    height: u32,
    trials: u64,
    seed: u64,
    out: *mut FtCoverStats,
) -> FtStatus {
    guard(|| {
        let s = lift(sim::cover_time(d, height, trials, seed))?;
        write_out(
            out,
            "out",
            FtCoverStats {
                mean: s.mean,
                stderr_time: s.stderr,
                p10: s.p10,
                p50: s.p50,
                p90: s.p90,
            },
        )
    })
}
