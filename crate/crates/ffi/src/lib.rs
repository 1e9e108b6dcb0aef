//! C ABI over the two-state engine.
//!
//! Systems are opaque heap handles created by `*_new` / `*_preset` and
//! released with the matching `*_free`. Every fallible call returns a
//! [`TssStatus`]; on failure `tss_last_error_message` describes what went
//! wrong on the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tsslab::driven::{mollow_positions, px_probabilities, quasi_energies, rotate_rwa, solve_driven, DriveSystem};
use tsslab::presets::{build, to_microelectronvolts, AmmoniaReading, Preset, PresetName, PresetParams, WaveguidePair};
use tsslab::two_state::{average_energy, definite_energies, solve_matrix, EnergyRoute, StateVector2, StaticSystem};
use tsslab::{Error, C64};

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TssComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for TssComplex {
    fn from(c: C64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

impl From<TssComplex> for C64 {
    fn from(c: TssComplex) -> Self {
        C64::new(c.re, c.im)
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TssStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Convergence = 3,
    Panic = 4,
}

/// Waveguide pair / ammonia reading selectors for [`TssPresetParams`].
pub const TSS_PAIR_EQUAL: u32 = 0;
pub const TSS_PAIR_UNEQUAL: u32 = 1;
pub const TSS_READING_DIRECT: u32 = 0;
pub const TSS_READING_DOUBLED: u32 = 1;

/// Preset parameters; start from `tss_preset_params_default`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TssPresetParams {
    pub b: f64,
    pub b_z: f64,
    pub b_x: f64,
    pub g: f64,
    pub delta_c_frac: f64,
    pub omega0: f64,
    pub e0: f64,
    pub pair: u32,
    pub reading: u32,
}

/// Time-independent two-level system.
pub struct TssStaticSystem {
    inner: StaticSystem,
}

/// Harmonically driven two-level system.
pub struct TssDriveSystem {
    inner: DriveSystem,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).expect("nul bytes removed"));
}

fn status_of(err: &Error) -> TssStatus {
    match err {
        Error::Convergence(_) | Error::Fit { .. } => TssStatus::Convergence,
        _ => TssStatus::InvalidArgument,
    }
}

struct Fail(TssStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(TssStatus::NullPointer, format!("{what} is null"))
}

/// Run `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TssStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TssStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TssStatus::Panic
        }
    }
}

unsafe fn read_state(c0: *const TssComplex) -> Result<StateVector2, Fail> {
    if c0.is_null() {
        return Err(null("initial state"));
    }
    let s = std::slice::from_raw_parts(c0, 2);
    Ok(StateVector2::new(s[0].into(), s[1].into())?)
}

unsafe fn write_state(out: *mut TssComplex, c: &StateVector2) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output state"));
    }
    let [a, b] = c.as_array();
    *out = a.into();
    *out.add(1) = b.into();
    Ok(())
}

unsafe fn preset_from(name: *const c_char, params: *const TssPresetParams) -> Result<Preset, Fail> {
    if name.is_null() {
        return Err(null("preset name"));
    }
    let name = CStr::from_ptr(name)
        .to_str()
        .map_err(|_| Fail(TssStatus::InvalidArgument, "preset name is not UTF-8".into()))?;
    let name: PresetName = name.parse()?;
    let p = if params.is_null() { tss_preset_params_default() } else { *params };
    let pair = match p.pair {
        TSS_PAIR_EQUAL => WaveguidePair::Equal,
        TSS_PAIR_UNEQUAL => WaveguidePair::Unequal,
        other => return Err(Fail(TssStatus::InvalidArgument, format!("unknown waveguide pair {other}"))),
    };
    let reading = match p.reading {
        TSS_READING_DIRECT => AmmoniaReading::Direct,
        TSS_READING_DOUBLED => AmmoniaReading::Doubled,
        other => return Err(Fail(TssStatus::InvalidArgument, format!("unknown ammonia reading {other}"))),
    };
    let params = PresetParams {
        b: p.b,
        b_z: p.b_z,
        b_x: p.b_x,
        g: p.g,
        delta_c_frac: p.delta_c_frac,
        omega0: p.omega0,
        e0: p.e0,
        pair,
        reading,
    };
    Ok(build(name, &params)?)
}

/// Message for the last failed call on this thread ("" after a success).
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn tss_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn tss_to_microelectronvolts(omega: f64) -> f64 {
    to_microelectronvolts(omega)
}

#[no_mangle]
pub extern "C" fn tss_preset_params_default() -> TssPresetParams {
    let p = PresetParams::default();
    TssPresetParams {
        b: p.b,
        b_z: p.b_z,
        b_x: p.b_x,
        g: p.g,
        delta_c_frac: p.delta_c_frac,
        omega0: p.omega0,
        e0: p.e0,
        pair: TSS_PAIR_EQUAL,
        reading: TSS_READING_DIRECT,
    }
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn tss_static_new(
    omega0: f64,
    omega11: f64,
    omega_d_mag: f64,
    phi_d: f64,
    out: *mut *mut TssStaticSystem,
) -> TssStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = StaticSystem::new(omega0, omega11, omega_d_mag, phi_d)?;
        *out = Box::into_raw(Box::new(TssStaticSystem { inner }));
        Ok(())
    })
}

/// Static presets; the waveguide preset is returned as its equivalent
/// static system (units 1/mm).
///
/// # Safety
/// `name` must be a NUL-terminated string; `params` may be null for
/// defaults; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tss_static_preset(
    name: *const c_char,
    params: *const TssPresetParams,
    out: *mut *mut TssStaticSystem,
) -> TssStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = match preset_from(name, params)? {
            Preset::Static(s) => s,
            Preset::Waveguide(wg) => wg.as_static(),
            Preset::Driven(_) => {
                return Err(Fail(TssStatus::InvalidArgument, "preset is driven; use tss_drive_preset".into()))
            }
        };
        *out = Box::into_raw(Box::new(TssStaticSystem { inner }));
        Ok(())
    })
}

/// # Safety
/// `sys` must come from this library and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tss_static_free(sys: *mut TssStaticSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Definite energies (level_p ≥ level_n), rad/s.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tss_static_energies(
    sys: *const TssStaticSystem,
    level_p: *mut f64,
    level_n: *mut f64,
) -> TssStatus {
    guard(|| {
        let sys = sys.as_ref().ok_or_else(|| null("system"))?;
        if level_p.is_null() || level_n.is_null() {
            return Err(null("output"));
        }
        let (p, n) = definite_energies(&sys.inner);
        *level_p = p;
        *level_n = n;
        Ok(())
    })
}

/// Amplitudes at time t from a normalized two-component launch state.
///
/// # Safety
/// `c0` must point to 2 readable values and `out` to 2 writable ones.
#[no_mangle]
pub unsafe extern "C" fn tss_static_solve(
    sys: *const TssStaticSystem,
    c0: *const TssComplex,
    t: f64,
    out: *mut TssComplex,
) -> TssStatus {
    guard(|| {
        let sys = sys.as_ref().ok_or_else(|| null("system"))?;
        let c0 = read_state(c0)?;
        write_state(out, &solve_matrix(&sys.inner, &c0, t))
    })
}

/// Average energy of a launch state. `route`: 0 weighted, 1 bracket,
/// 2 density (canonical), 3 density (eigenbasis).
///
/// # Safety
/// `c0` must point to 2 readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tss_static_average_energy(
    sys: *const TssStaticSystem,
    c0: *const TssComplex,
    route: u32,
    out: *mut f64,
) -> TssStatus {
    guard(|| {
        let sys = sys.as_ref().ok_or_else(|| null("system"))?;
        let c0 = read_state(c0)?;
        let route = *EnergyRoute::ALL
            .get(route as usize)
            .ok_or_else(|| Fail(TssStatus::InvalidArgument, format!("unknown energy route {route}")))?;
        if out.is_null() {
            return Err(null("output"));
        }
        *out = average_energy(&sys.inner, &c0, route);
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tss_drive_new(
    omega0: f64,
    omega_a: f64,
    omega_d: TssComplex,
    omega_c: f64,
    out: *mut *mut TssDriveSystem,
) -> TssStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = DriveSystem::new(omega0, omega_a, omega_d.into(), omega_c)?;
        *out = Box::into_raw(Box::new(TssDriveSystem { inner }));
        Ok(())
    })
}

/// # Safety
/// As for `tss_static_preset`.
#[no_mangle]
pub unsafe extern "C" fn tss_drive_preset(
    name: *const c_char,
    params: *const TssPresetParams,
    out: *mut *mut TssDriveSystem,
) -> TssStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = match preset_from(name, params)? {
            Preset::Driven(d) => d,
            _ => return Err(Fail(TssStatus::InvalidArgument, "preset is not driven; use tss_static_preset".into())),
        };
        *out = Box::into_raw(Box::new(TssDriveSystem { inner }));
        Ok(())
    })
}

/// # Safety
/// `sys` must come from this library and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tss_drive_free(sys: *mut TssDriveSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Generalized Rabi frequency of the rotating-frame system, rad/s.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tss_drive_split(sys: *const TssDriveSystem, out: *mut f64) -> TssStatus {
    guard(|| {
        let sys = sys.as_ref().ok_or_else(|| null("system"))?;
        if out.is_null() {
            return Err(null("output"));
        }
        *out = sys.inner.omega_gr();
        Ok(())
    })
}

/// Back-rotated RWA amplitudes at time t.
///
/// # Safety
/// `c0` must point to 2 readable values and `out` to 2 writable ones.
#[no_mangle]
pub unsafe extern "C" fn tss_drive_solve(
    sys: *const TssDriveSystem,
    c0: *const TssComplex,
    t: f64,
    out: *mut TssComplex,
) -> TssStatus {
    guard(|| {
        let sys = sys.as_ref().ok_or_else(|| null("system"))?;
        let c0 = read_state(c0)?;
        write_state(out, &solve_driven(&sys.inner, &c0, t))
    })
}

/// Rotating-frame eigenstate P (`which` = 0) or N (`which` = 1).
///
/// # Safety
/// `out` must point to 2 writable values.
#[no_mangle]
pub unsafe extern "C" fn tss_drive_eigenstate(sys: *const TssDriveSystem, which: u32, out: *mut TssComplex) -> TssStatus {
    guard(|| {
        let sys = sys.as_ref().ok_or_else(|| null("system"))?;
        let rot = rotate_rwa(&sys.inner);
        let state = match which {
            0 => rot.xi_p(),
            1 => rot.xi_n(),
            other => return Err(Fail(TssStatus::InvalidArgument, format!("eigenstate index {other} is not 0 or 1"))),
        };
        write_state(out, &state)
    })
}

/// Quasi-energies in the order P low, P high, N low, N high (rad/s).
///
/// # Safety
/// `out` must point to 4 writable values.
#[no_mangle]
pub unsafe extern "C" fn tss_drive_quartet(sys: *const TssDriveSystem, out: *mut f64) -> TssStatus {
    guard(|| {
        let sys = sys.as_ref().ok_or_else(|| null("system"))?;
        if out.is_null() {
            return Err(null("output"));
        }
        let q = quasi_energies(&sys.inner).as_array();
        ptr::copy_nonoverlapping(q.as_ptr(), out, 4);
        Ok(())
    })
}

/// Mollow line positions: center, red, blue (rad/s).
///
/// # Safety
/// `out` must point to 3 writable values.
#[no_mangle]
pub unsafe extern "C" fn tss_drive_mollow(sys: *const TssDriveSystem, out: *mut f64) -> TssStatus {
    guard(|| {
        let sys = sys.as_ref().ok_or_else(|| null("system"))?;
        if out.is_null() {
            return Err(null("output"));
        }
        let m = mollow_positions(&sys.inner);
        ptr::copy_nonoverlapping([m.center, m.red, m.blue].as_ptr(), out, 3);
        Ok(())
    })
}

/// Probabilities of the (C1 ± C2)/√2 superpositions at time t.
///
/// # Safety
/// `c0` must point to 2 readable values; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn tss_drive_px(
    sys: *const TssDriveSystem,
    c0: *const TssComplex,
    t: f64,
    p_plus: *mut f64,
    p_minus: *mut f64,
) -> TssStatus {
    guard(|| {
        let sys = sys.as_ref().ok_or_else(|| null("system"))?;
        let c0 = read_state(c0)?;
        if p_plus.is_null() || p_minus.is_null() {
            return Err(null("output"));
        }
        let (p, m) = px_probabilities(&sys.inner, &c0, t);
        *p_plus = p;
        *p_minus = m;
        Ok(())
    })
}
