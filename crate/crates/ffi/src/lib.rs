//! C ABI over the scoutnav simulator.
//!
//! All objects are opaque heap handles created by `*_new`/`*_load`/`scn_run`
//! and released with the matching `*_free`. Every fallible call returns a
//! [`ScnStatus`]; on failure the message is kept per thread and can be read
//! with [`scn_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use scoutnav::harness::{run_episode, scenarios, EpisodeLog, EpisodeOptions, Outcome, Policy, RunConfig};
use scoutnav::world::{load_scenario, parse_scenario, Scenario};
use scoutnav::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScnStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Invalid = 4,
    UnknownPolicy = 5,
    Io = 6,
    NotFound = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Episode outcome as an integer.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScnOutcome {
    Success = 0,
    BudgetExhausted = 1,
    Stuck = 2,
}

/// Opaque scenario handle.
pub struct ScnScenario(Scenario);

/// Opaque run configuration handle.
pub struct ScnConfig(RunConfig);

/// Opaque finished-episode handle.
pub struct ScnEpisode(EpisodeLog);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> ScnStatus {
    match e {
        Error::Parse { .. } => ScnStatus::Parse,
        Error::Invalid { .. } => ScnStatus::Invalid,
        Error::UnknownPolicy(_) => ScnStatus::UnknownPolicy,
        Error::Io { .. } | Error::Csv(_) | Error::Json(_) => ScnStatus::Io,
    }
}

fn fail(status: ScnStatus, msg: impl Into<String>) -> ScnStatus {
    set_error(msg);
    status
}

fn from_core(e: Error) -> ScnStatus {
    fail(status_of(&e), e.to_string())
}

/// Runs `f`, turning a panic into [`ScnStatus::Panic`].
fn guard(f: impl FnOnce() -> ScnStatus) -> ScnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(ScnStatus::Panic, msg)
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, ScnStatus> {
    if p.is_null() {
        return Err(fail(ScnStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(ScnStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

macro_rules! try_arg {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> ScnStatus {
    *out = Box::into_raw(Box::new(value));
    ScnStatus::Ok
}

macro_rules! need {
    ($p:expr, $what:literal) => {
        if $p.is_null() {
            return fail(ScnStatus::NullArgument, concat!($what, " is null"));
        }
    };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn scn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (always
/// NUL-terminated when `cap > 0`). Returns the full message length without
/// the terminator, so a caller can retry with a larger buffer.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn scn_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Loads a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scn_scenario_load(path: *const c_char, out: *mut *mut ScnScenario) -> ScnStatus {
    guard(|| {
        need!(out, "out");
        let path = try_arg!(str_arg(path, "path"));
        match load_scenario(path) {
            Ok(s) => put(out, ScnScenario(s)),
            Err(e) => from_core(e),
        }
    })
}

/// Parses scenario text in the file format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scn_scenario_parse(text: *const c_char, out: *mut *mut ScnScenario) -> ScnStatus {
    guard(|| {
        need!(out, "out");
        let text = try_arg!(str_arg(text, "text"));
        match parse_scenario(text) {
            Ok(s) => put(out, ScnScenario(s)),
            Err(e) => from_core(e),
        }
    })
}

/// One of the built-in scenarios by name (`open_field`, `corridor`,
/// `dead_end`, `buildings`, `object_search`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scn_scenario_builtin(name: *const c_char, out: *mut *mut ScnScenario) -> ScnStatus {
    guard(|| {
        need!(out, "out");
        let name = try_arg!(str_arg(name, "name"));
        match scenarios::by_name(name) {
            Some(s) => put(out, ScnScenario(s)),
            None => fail(ScnStatus::NotFound, format!("no built-in scenario `{name}`")),
        }
    })
}

/// Tick budget of a scenario.
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scn_scenario_budget(s: *const ScnScenario, out: *mut usize) -> ScnStatus {
    need!(s, "scenario");
    need!(out, "out");
    *out = (*s).0.budget;
    ScnStatus::Ok
}

/// # Safety
/// `s` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn scn_scenario_free(s: *mut ScnScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Default configuration (scored-graph policy, standard parameters).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scn_config_new(out: *mut *mut ScnConfig) -> ScnStatus {
    need!(out, "out");
    put(out, ScnConfig(RunConfig::default()))
}

/// Loads a `key = value` configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scn_config_load(path: *const c_char, out: *mut *mut ScnConfig) -> ScnStatus {
    guard(|| {
        need!(out, "out");
        let path = try_arg!(str_arg(path, "path"));
        match RunConfig::load(path) {
            Ok(c) => put(out, ScnConfig(c)),
            Err(e) => from_core(e),
        }
    })
}

/// Sets one parameter by its configuration key, e.g. `("alpha", "10")` or
/// `("policy", "vanilla")`. The whole configuration is re-validated.
///
/// # Safety
/// `c` must be a live config handle; `key` and `value` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn scn_config_set(c: *mut ScnConfig, key: *const c_char, value: *const c_char) -> ScnStatus {
    guard(|| {
        need!(c, "config");
        let key = try_arg!(str_arg(key, "key"));
        let value = try_arg!(str_arg(value, "value"));
        let mut next = (*c).0.clone();
        if let Err(e) = next.set(key, value).and_then(|_| next.validate()) {
            return from_core(e);
        }
        (*c).0 = next;
        ScnStatus::Ok
    })
}

/// # Safety
/// `c` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn scn_config_free(c: *mut ScnConfig) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Runs one episode. `config` may be null for the defaults; `policy` may be
/// null to keep the configured one.
///
/// # Safety
/// Handles must be live; `policy` null or NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scn_run(
    scenario: *const ScnScenario,
    config: *const ScnConfig,
    policy: *const c_char,
    seed: u64,
    out: *mut *mut ScnEpisode,
) -> ScnStatus {
    guard(|| {
        need!(scenario, "scenario");
        need!(out, "out");
        let mut cfg = if config.is_null() {
            RunConfig::default()
        } else {
            (*config).0.clone()
        };
        if !policy.is_null() {
            let name = try_arg!(str_arg(policy, "policy"));
            match name.parse::<Policy>() {
                Ok(p) => cfg.policy = p,
                Err(e) => return from_core(e),
            }
        }
        match run_episode(&(*scenario).0, &cfg, seed, EpisodeOptions::default()) {
            Ok(log) => put(out, ScnEpisode(log)),
            Err(e) => from_core(e),
        }
    })
}

/// # Safety
/// `e` must be a live episode handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scn_episode_outcome(e: *const ScnEpisode, out: *mut ScnOutcome) -> ScnStatus {
    need!(e, "episode");
    need!(out, "out");
    *out = match (*e).0.outcome {
        Outcome::Success => ScnOutcome::Success,
        Outcome::BudgetExhausted => ScnOutcome::BudgetExhausted,
        Outcome::Stuck => ScnOutcome::Stuck,
    };
    ScnStatus::Ok
}

/// # Safety
/// `e` must be a live episode handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scn_episode_ticks(e: *const ScnEpisode, out: *mut usize) -> ScnStatus {
    need!(e, "episode");
    need!(out, "out");
    *out = (*e).0.tick_count;
    ScnStatus::Ok
}

/// Trajectory length in metres.
///
/// # Safety
/// `e` must be a live episode handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scn_episode_length(e: *const ScnEpisode, out: *mut f64) -> ScnStatus {
    need!(e, "episode");
    need!(out, "out");
    *out = (*e).0.trajectory_length;
    ScnStatus::Ok
}

/// Distance between the last goal estimate and the true goal, metres.
///
/// # Safety
/// `e` must be a live episode handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scn_episode_goal_error(e: *const ScnEpisode, out: *mut f64) -> ScnStatus {
    need!(e, "episode");
    need!(out, "out");
    *out = (*e).0.final_goal_error;
    ScnStatus::Ok
}

/// Copies the trajectory as interleaved `x, y` pairs. `*len` receives the
/// number of points; with `xy` null only the count is reported. Fails with
/// [`ScnStatus::BufferTooSmall`] when `cap_points` is short.
///
/// # Safety
/// `e` must be a live episode handle; `xy` null or `2 * cap_points`
/// writable doubles; `len` writable.
#[no_mangle]
pub unsafe extern "C" fn scn_episode_trajectory(
    e: *const ScnEpisode,
    xy: *mut f64,
    cap_points: usize,
    len: *mut usize,
) -> ScnStatus {
    need!(e, "episode");
    need!(len, "len");
    let t = &(*e).0.trajectory;
    *len = t.len();
    if xy.is_null() {
        return ScnStatus::Ok;
    }
    if cap_points < t.len() {
        return fail(
            ScnStatus::BufferTooSmall,
            format!("trajectory has {} points, buffer holds {cap_points}", t.len()),
        );
    }
    for (i, p) in t.iter().enumerate() {
        *xy.add(2 * i) = p.x;
        *xy.add(2 * i + 1) = p.y;
    }
    ScnStatus::Ok
}

/// Writes the per-tick CSV log.
///
/// # Safety
/// `e` must be a live episode handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn scn_episode_write_csv(e: *const ScnEpisode, path: *const c_char) -> ScnStatus {
    guard(|| {
        need!(e, "episode");
        let path = try_arg!(str_arg(path, "path"));
        let file = match std::fs::File::create(path) {
            Ok(f) => f,
            Err(err) => return from_core(Error::io(path, err)),
        };
        match (*e).0.write_ticks_csv(std::io::BufWriter::new(file)) {
            Ok(()) => ScnStatus::Ok,
            Err(err) => from_core(err),
        }
    })
}

/// # Safety
/// `e` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn scn_episode_free(e: *mut ScnEpisode) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}
