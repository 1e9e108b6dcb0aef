//! Brute-force fixed-step RK4 integration of dC/dt = −j·H(t)·C, with no
//! rotating frame and no rotating-wave approximation. The closed-form paths
//! are checked against it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::driven::{solve_driven, DriveSystem};
use crate::error::{Error, Result};
use crate::linalg::{adjoint, matvec, max_abs_diff_vec, norm_sqr, HermitianMatrix, Mat, Vector, C64};
use crate::presets::{
    ammonia_eta, build, to_microelectronvolts, Preset, PresetName, PresetParams, AMMONIA_DRIVE, AMMONIA_TUNNELING,
};
use crate::spectrum::dominant_frequency;
use crate::trace::AmplitudeTrace;
use crate::two_state::StateVector2;

/// Runs abort once the norm has drifted this far.
pub const ABORT_DRIFT: f64 = 1e-6;

/// A Hermitian matrix function of time with a known frequency ceiling.
pub trait TimeDependentHamiltonian<const N: usize> {
    fn at(&self, t: f64) -> Mat<N>;
    /// Largest angular frequency present (eigenvalue scale or drive frequency).
    fn max_frequency(&self) -> f64;
}

/// Upper bound on the spectral radius: largest absolute row sum.
pub fn row_sum_bound<const N: usize>(m: &Mat<N>) -> f64 {
    m.iter().map(|row| row.iter().map(|c| c.norm()).sum::<f64>()).fold(0.0, f64::max)
}

impl<const N: usize> TimeDependentHamiltonian<N> for HermitianMatrix<N> {
    fn at(&self, _t: f64) -> Mat<N> {
        *self.entries()
    }
    fn max_frequency(&self) -> f64 {
        row_sum_bound(self.entries())
    }
}

impl TimeDependentHamiltonian<2> for DriveSystem {
    fn at(&self, t: f64) -> Mat<2> {
        self.lab_hamiltonian(t)
    }
    fn max_frequency(&self) -> f64 {
        row_sum_bound(&self.lab_hamiltonian(0.0)).max(self.omega_c().abs())
    }
}

/// Wraps a closure together with its frequency ceiling.
pub struct FnHamiltonian<F> {
    pub f: F,
    pub omega_max: f64,
}

impl<const N: usize, F: Fn(f64) -> Mat<N>> TimeDependentHamiltonian<N> for FnHamiltonian<F> {
    fn at(&self, t: f64) -> Mat<N> {
        (self.f)(t)
    }
    fn max_frequency(&self) -> f64 {
        self.omega_max
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSpec {
    pub method: Method,
    pub dt: f64,
    pub t_end: f64,
    pub record_stride: usize,
}

impl IntegratorSpec {
    pub fn new(dt: f64, t_end: f64, record_stride: usize) -> Self {
        Self { method: Method::Rk4Fixed, dt, t_end, record_stride }
    }

    /// Step resolving the fastest frequency with `steps_per_period` steps.
    pub fn resolving(omega_max: f64, steps_per_period: f64, t_end: f64, record_stride: usize) -> Self {
        Self::new(2.0 * PI / (steps_per_period * omega_max.max(f64::MIN_POSITIVE)), t_end, record_stride)
    }

    pub fn validate(&self, omega_max: f64) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0 && self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::Validation(format!(
                "integrator needs positive dt and t_end, got dt={} t_end={}",
                self.dt, self.t_end
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::Validation("record_stride must be at least 1".into()));
        }
        if omega_max > 0.0 && self.dt > 2.0 * PI / (50.0 * omega_max) {
            return Err(Error::Validation(format!(
                "dt={} does not resolve the fastest frequency {omega_max}; need dt <= {}",
                self.dt,
                2.0 * PI / (50.0 * omega_max)
            )));
        }
        Ok(())
    }

    pub fn halved(&self) -> Self {
        Self { dt: 0.5 * self.dt, record_stride: self.record_stride * 2, ..*self }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleRun<const N: usize> {
    pub trace: AmplitudeTrace<N>,
    pub final_state: Vector<N>,
    pub max_norm_drift: f64,
    pub steps: usize,
    pub dt: f64,
}

fn rhs<const N: usize>(h: &Mat<N>, c: &Vector<N>) -> Vector<N> {
    let minus_j = C64::new(0.0, -1.0);
    matvec(h, c).map(|x| x * minus_j)
}

fn axpy<const N: usize>(c: &Vector<N>, k: &Vector<N>, s: f64) -> Vector<N> {
    let mut out = *c;
    for (o, x) in out.iter_mut().zip(k) {
        *o += x * s;
    }
    out
}

/// Classical RK4 with a step that divides t_end exactly (never longer than
/// the requested dt). The state is never renormalized.
pub fn integrate_tdse<const N: usize, H: TimeDependentHamiltonian<N> + ?Sized>(
    h: &H,
    c0: &Vector<N>,
    spec: &IntegratorSpec,
) -> Result<OracleRun<N>> {
    spec.validate(h.max_frequency())?;
    if (norm_sqr(c0) - 1.0).abs() > crate::two_state::NORM_TOL {
        return Err(Error::Validation(format!("initial state is not normalized: {:.17e}", norm_sqr(c0))));
    }
    let steps = (spec.t_end / spec.dt).ceil() as usize;
    let dt = spec.t_end / steps as f64;
    let mut c = *c0;
    let mut trace = AmplitudeTrace { times: vec![0.0], amplitudes: vec![c] };
    let mut max_drift: f64 = 0.0;
    for i in 0..steps {
        let t = i as f64 * dt;
        let h0 = h.at(t);
        let hm = h.at(t + 0.5 * dt);
        let h1 = h.at(t + dt);
        let k1 = rhs(&h0, &c);
        let k2 = rhs(&hm, &axpy(&c, &k1, 0.5 * dt));
        let k3 = rhs(&hm, &axpy(&c, &k2, 0.5 * dt));
        let k4 = rhs(&h1, &axpy(&c, &k3, dt));
        for j in 0..N {
            c[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (dt / 6.0);
        }
        let step = i + 1;
        if step % spec.record_stride == 0 || step == steps {
            let drift = (norm_sqr(&c) - 1.0).abs();
            max_drift = max_drift.max(drift);
            if drift > ABORT_DRIFT {
                return Err(Error::Convergence(format!(
                    "norm drift {drift:e} at t={} exceeds {ABORT_DRIFT:e}; step {dt:e} is too coarse",
                    step as f64 * dt
                )));
            }
            trace.times.push(step as f64 * dt);
            trace.amplitudes.push(c);
        }
    }
    Ok(OracleRun { trace, final_state: c, max_norm_drift: max_drift, steps, dt })
}

/// Differences between runs at dt, dt/2 and dt/4 (final states).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepHalving {
    pub coarse_error: f64,
    pub fine_error: f64,
    /// coarse_error / fine_error, ≈ 16 for a fourth-order method.
    pub ratio: f64,
}

pub fn step_halving<const N: usize, H: TimeDependentHamiltonian<N> + ?Sized>(
    h: &H,
    c0: &Vector<N>,
    spec: &IntegratorSpec,
) -> Result<StepHalving> {
    let long_stride = IntegratorSpec { record_stride: usize::MAX, ..*spec };
    let a = integrate_tdse(h, c0, &long_stride)?.final_state;
    let b = integrate_tdse(h, c0, &IntegratorSpec { dt: spec.dt / 2.0, ..long_stride })?.final_state;
    let c = integrate_tdse(h, c0, &IntegratorSpec { dt: spec.dt / 4.0, ..long_stride })?.final_state;
    let coarse_error = max_abs_diff_vec(&a, &b);
    let fine_error = max_abs_diff_vec(&b, &c);
    Ok(StepHalving { coarse_error, fine_error, ratio: coarse_error / fine_error })
}

/// Oracle versus rotating-wave populations for one driven system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RwaComparison {
    /// max over samples and levels of |p_oracle − p_rwa|.
    pub max_error: f64,
    /// |Ω_D| / ω_A.
    pub drive_ratio: f64,
    pub rabi_periods: f64,
    pub max_norm_drift: f64,
}

/// Compare drive-basis populations. `basis` maps drive-basis amplitudes to
/// the basis the lab Hamiltonian is written in (identity when they coincide);
/// the oracle starts from the mapped state and its output is mapped back.
pub fn rwa_fidelity_in_basis<H: TimeDependentHamiltonian<2> + ?Sized>(
    sys: &DriveSystem,
    lab: &H,
    basis: &Mat<2>,
    c0: &StateVector2,
    rabi_periods: f64,
    steps_per_period: f64,
) -> Result<RwaComparison> {
    let t_end = rabi_periods * 2.0 * PI / sys.omega_gr();
    let spec = IntegratorSpec::resolving(lab.max_frequency(), steps_per_period, t_end, 8);
    let start = matvec(basis, &c0.as_array());
    let run = integrate_tdse(lab, &start, &spec)?;
    let mut max_error: f64 = 0.0;
    let back = adjoint(basis);
    for (t, lab_c) in run.trace.times.iter().zip(&run.trace.amplitudes) {
        let c = matvec(&back, lab_c);
        let rwa = solve_driven(sys, c0, *t).as_array();
        for j in 0..2 {
            max_error = max_error.max((c[j].norm_sqr() - rwa[j].norm_sqr()).abs());
        }
    }
    Ok(RwaComparison {
        max_error,
        drive_ratio: sys.omega_d().norm() / sys.omega_a().abs(),
        rabi_periods,
        max_norm_drift: run.max_norm_drift,
    })
}

pub fn rwa_fidelity(sys: &DriveSystem, c0: &StateVector2, rabi_periods: f64, steps_per_period: f64) -> Result<RwaComparison> {
    rwa_fidelity_in_basis(sys, sys, &crate::linalg::identity(), c0, rabi_periods, steps_per_period)
}

/// RWA check for one driven preset in units of its transition frequency.
/// Ammonia is integrated in the left/right well basis, where its drive sits
/// on the diagonal, and compared through the symmetric/antisymmetric map.
pub fn rwa_fidelity_preset(
    name: PresetName,
    g: f64,
    delta_c_frac: f64,
    c0: &StateVector2,
    rabi_periods: f64,
    steps_per_period: f64,
) -> Result<RwaComparison> {
    let params = PresetParams { g, delta_c_frac, ..PresetParams::default() };
    let sys = match build(name, &params)? {
        Preset::Driven(sys) => sys,
        _ => return Err(Error::Usage(format!("preset '{name}' is not driven"))),
    };
    let sys = sys.rescaled(sys.omega_a())?;
    if name == PresetName::AmmoniaDriven {
        let well = ammonia_well_rescaled(g * AMMONIA_DRIVE / (2.0 * AMMONIA_TUNNELING), sys.omega_c());
        rwa_fidelity_in_basis(&sys, &well, &ammonia_eta(), c0, rabi_periods, steps_per_period)
    } else {
        rwa_fidelity(&sys, c0, rabi_periods, steps_per_period)
    }
}

/// Ammonia's well-basis Hamiltonian in units of the inversion frequency:
/// [[−r cos ω_C t, −1/2], [−1/2, r cos ω_C t]] with r = G·ω_D/ω_A.
pub fn ammonia_well_rescaled(drive_ratio: f64, omega_c: f64) -> FnHamiltonian<impl Fn(f64) -> Mat<2>> {
    FnHamiltonian {
        f: move |t: f64| {
            let d = drive_ratio * (omega_c * t).cos();
            [[C64::new(-d, 0.0), C64::new(-0.5, 0.0)], [C64::new(-0.5, 0.0), C64::new(d, 0.0)]]
        },
        omega_max: (0.5 + drive_ratio.abs()).max(omega_c.abs()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArbitrationReport {
    pub g: f64,
    pub delta_c_frac: f64,
    /// Population oscillation frequency found by the oracle (rad/s).
    pub measured_split: f64,
    /// Prediction with drive amplitude G·ω_D (rad/s).
    pub predicted_direct: f64,
    /// Prediction with drive amplitude 2·G·ω_D (rad/s).
    pub predicted_doubled: f64,
    pub measured_split_uev: f64,
    pub predicted_direct_uev: f64,
    pub predicted_doubled_uev: f64,
    pub step_halving: StepHalving,
    pub max_norm_drift: f64,
    /// "direct" or "doubled", whichever prediction is closer.
    pub verdict: &'static str,
}

/// Integrate the diagonally driven ammonia Hamiltonian in the well basis,
/// launched in the lower (symmetric) state, and measure the oscillation
/// frequency of the upper-state population.
pub fn arbitrate_ammonia_factor(g: f64, delta_c_frac: f64) -> Result<ArbitrationReport> {
    if !(g.is_finite() && g > 0.0 && delta_c_frac.is_finite() && delta_c_frac.abs() < 0.5) {
        return Err(Error::Validation(format!(
            "arbitration needs G > 0 and |deltaC_frac| < 0.5, got G={g}, deltaC_frac={delta_c_frac}"
        )));
    }
    let omega_a = 2.0 * AMMONIA_TUNNELING;
    let r = g * AMMONIA_DRIVE / omega_a;
    let detuning = delta_c_frac;
    let direct = detuning.hypot(r);
    let doubled = detuning.hypot(2.0 * r);
    if r > 0.1 {
        return Err(Error::Validation(format!("drive ratio {r} is outside the weak-drive regime (<= 0.1)")));
    }
    let t_end = 40.0 * 2.0 * PI / direct;
    let h = ammonia_well_rescaled(r, 1.0 - delta_c_frac);
    let spec = IntegratorSpec::resolving(h.max_frequency(), 1000.0, t_end, 1);
    let steps = t_end / spec.dt;
    if steps > 5e7 {
        return Err(Error::Validation(format!(
            "G={g} needs {steps:.2e} steps for 40 beat periods; raise G or the detuning"
        )));
    }
    let spec = IntegratorSpec { record_stride: ((0.25 / spec.dt).floor() as usize).max(1), ..spec };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let lower = [C64::new(s, 0.0), C64::new(s, 0.0)];
    let run = integrate_tdse(&h, &lower, &spec)?;
    let upper_pop: Vec<f64> = run
        .trace
        .amplitudes
        .iter()
        .map(|c| ((c[0] - c[1]) * s).norm_sqr())
        .collect();
    // the recorded grid is uniform except possibly the final sample
    let n = if run.steps % spec.record_stride == 0 { upper_pop.len() } else { upper_pop.len() - 1 };
    let measured = dominant_frequency(&upper_pop[..n], &run.trace.times[..n], 0.5);
    let halving = step_halving(&h, &lower, &spec)?;
    let verdict = if (measured - direct).abs() <= (measured - doubled).abs() { "direct" } else { "doubled" };
    Ok(ArbitrationReport {
        g,
        delta_c_frac,
        measured_split: measured * omega_a,
        predicted_direct: direct * omega_a,
        predicted_doubled: doubled * omega_a,
        measured_split_uev: to_microelectronvolts(measured * omega_a),
        predicted_direct_uev: to_microelectronvolts(direct * omega_a),
        predicted_doubled_uev: to_microelectronvolts(doubled * omega_a),
        step_halving: halving,
        max_norm_drift: run.max_norm_drift,
        verdict,
    })
}

/// Trace CSV for an oracle run.
pub fn trace_csv<const N: usize>(run: &OracleRun<N>) -> String {
    run.trace.to_csv()
}
