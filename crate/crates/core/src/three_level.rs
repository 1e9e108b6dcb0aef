//! Three-level coupling/probe simulation in the rotating frame.
//!
//! Levels are ordered (g, e, r). A coupling field links g and e; a weak probe
//! links r to e (`ProbeE`) or to g (`ProbeG`). Sweeping the probe detuning and
//! recording the largest population reached in r maps out the dressed
//! doublet of the coupled pair.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_lorentzian, LorentzianFit};
use crate::linalg::{eig3_hermitian, inner, EigenSystem, HermitianMatrix, Vector, C64, ZERO};
use crate::two_state::{classify, StaticSystem, Symmetry, NORM_TOL};

/// Index of the probe-target level.
pub const R: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    ProbeE,
    ProbeG,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::ProbeE => "probe_e",
            Scenario::ProbeG => "probe_g",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "probe_e" => Ok(Scenario::ProbeE),
            "probe_g" => Ok(Scenario::ProbeG),
            _ => Err(Error::Usage(format!("unknown scenario '{s}' (expected probe_e or probe_g)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeLevelConfig {
    /// Gap between g and e.
    pub omega_eg: f64,
    /// Gap between e and r.
    pub omega_re: f64,
    /// Coupling-field matrix element between g and e.
    pub d_c: C64,
    /// Probe matrix element.
    pub d_p: C64,
    pub omega_c: f64,
    pub omega_p: f64,
    pub scenario: Scenario,
    pub c0: [C64; 3],
}

impl ThreeLevelConfig {
    /// Dimensionless defaults: |D_C| = 1, |D_P| = 0.05, resonant coupling and
    /// probe, launched in g.
    pub fn dimensionless(scenario: Scenario) -> Self {
        let omega_eg = 20.0;
        let omega_re = 30.0;
        let mut cfg = Self {
            omega_eg,
            omega_re,
            d_c: C64::new(1.0, 0.0),
            d_p: C64::new(0.05, 0.0),
            omega_c: omega_eg,
            omega_p: 0.0,
            scenario,
            c0: [C64::new(1.0, 0.0), ZERO, ZERO],
        };
        cfg.omega_p = cfg.probe_transition();
        cfg
    }

    pub fn delta_c(&self) -> f64 {
        self.omega_eg - self.omega_c
    }

    /// Frequency of the transition the probe drives.
    pub fn probe_transition(&self) -> f64 {
        match self.scenario {
            Scenario::ProbeE => self.omega_re,
            Scenario::ProbeG => self.omega_eg + self.omega_re,
        }
    }

    /// Probe detuning: transition frequency minus probe frequency.
    pub fn probe_detuning(&self) -> f64 {
        self.probe_transition() - self.omega_p
    }

    pub fn with_coupling_detuning(mut self, delta_c: f64) -> Self {
        self.omega_c = self.omega_eg - delta_c;
        self
    }

    pub fn with_probe_detuning(mut self, delta_p: f64) -> Self {
        self.omega_p = self.probe_transition() - delta_p;
        self
    }

    pub fn with_initial_state(mut self, c0: [C64; 3]) -> Self {
        self.c0 = c0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega_eg, self.omega_re, self.omega_c, self.omega_p, self.d_c.re, self.d_c.im, self.d_p.re, self.d_p.im]
            .iter()
            .chain(self.c0.iter().flat_map(|c| [&c.re, &c.im]))
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Validation("three-level configuration has non-finite values".into()));
        }
        let n: f64 = self.c0.iter().map(|c| c.norm_sqr()).sum();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!("initial state is not normalized: sum |c|^2 = {n:.17e}")));
        }
        Ok(())
    }

    /// The g/e block alone: [[−δ_C/2, D_C/2], [D_C*/2, δ_C/2]].
    pub fn coupling_block(&self) -> StaticSystem {
        let half = 0.5 * self.d_c;
        let phase = if half.norm() == 0.0 { 0.0 } else { -half.arg() };
        StaticSystem::new(0.0, 0.5 * self.delta_c(), half.norm(), phase).expect("finite configuration")
    }
}

/// Rotating-frame Hamiltonian of either probing scenario.
pub fn build_rwa_hamiltonian(cfg: &ThreeLevelConfig) -> Result<HermitianMatrix<3>> {
    cfg.validate()?;
    let dc = cfg.delta_c();
    let dp = cfg.probe_detuning();
    let re = |x: f64| C64::new(x, 0.0);
    let hc = 0.5 * cfg.d_c;
    let hp = 0.5 * cfg.d_p;
    let m = match cfg.scenario {
        Scenario::ProbeE => [
            [re(-0.5 * dc), hc, ZERO],
            [hc.conj(), re(0.5 * dc), hp],
            [ZERO, hp.conj(), re(dp + 0.5 * dc)],
        ],
        Scenario::ProbeG => [
            [re(-0.5 * dc), hc, hp],
            [hc.conj(), re(0.5 * dc), ZERO],
            [hp.conj(), ZERO, re(dp - 0.5 * dc)],
        ],
    };
    HermitianMatrix::new(m)
}

fn evolve_with(es: &EigenSystem<3>, c0: &Vector<3>, t: f64) -> Vector<3> {
    let mut out = [ZERO; 3];
    for k in 0..3 {
        let u = es.vector(k);
        let amp = inner(&u, c0) * C64::from_polar(1.0, -es.values[k] * t);
        for i in 0..3 {
            out[i] += u[i] * amp;
        }
    }
    out
}

/// State at time t, C(t) = Ξ·e^{−jΛt}·Ξ⁻¹·C(0).
pub fn evolve3(cfg: &ThreeLevelConfig, t: f64) -> Result<Vector<3>> {
    let es = eig3_hermitian(&build_rwa_hamiltonian(cfg)?)?;
    Ok(evolve_with(&es, &cfg.c0, t))
}

/// A coupling-block eigenvector padded with an empty r level, with its label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenLaunch {
    pub label: Symmetry,
    /// Eigenvalue of the coupling block this launch belongs to.
    pub lambda: f64,
    pub state: [C64; 3],
}

/// Launch states matching the two dressed levels of the coupled pair,
/// higher eigenvalue first.
pub fn eigen_launches(cfg: &ThreeLevelConfig) -> [EigenLaunch; 2] {
    let block = cfg.coupling_block();
    let make = |v: crate::two_state::StateVector2, lambda: f64| EigenLaunch {
        label: classify(&v.as_array()),
        lambda,
        state: [v.c1, v.c2, ZERO],
    };
    [make(block.xi_p(), block.omega_p()), make(block.xi_n(), -block.omega_p())]
}

/// Probe detuning at which r is resonant with the dressed level `lambda`.
pub fn resonant_detuning(cfg: &ThreeLevelConfig, lambda: f64) -> f64 {
    match cfg.scenario {
        Scenario::ProbeE => lambda - 0.5 * cfg.delta_c(),
        Scenario::ProbeG => lambda + 0.5 * cfg.delta_c(),
    }
}

/// How long to watch for the population maximum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Horizon {
    /// Two periods of the slowest beat, 4π/Ω_slow.
    Adaptive { samples: usize },
    Fixed { t_end: f64, samples: usize },
}

impl Default for Horizon {
    fn default() -> Self {
        Horizon::Adaptive { samples: 2000 }
    }
}

impl Horizon {
    fn samples(&self) -> usize {
        match *self {
            Horizon::Adaptive { samples } | Horizon::Fixed { samples, .. } => samples,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples() < 2 {
            return Err(Error::Validation(format!("horizon needs at least 2 samples, got {}", self.samples())));
        }
        if let Horizon::Fixed { t_end, .. } = *self {
            if !(t_end.is_finite() && t_end > 0.0) {
                return Err(Error::Validation(format!("horizon t_end must be positive, got {t_end}")));
            }
        }
        Ok(())
    }

    /// End time for a given eigenvalue set.
    pub fn t_end(&self, values: &[f64; 3]) -> f64 {
        match *self {
            Horizon::Fixed { t_end, .. } => t_end,
            Horizon::Adaptive { .. } => {
                let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
                let slow = [values[0] - values[1], values[1] - values[2], values[0] - values[2]]
                    .into_iter()
                    .filter(|g| *g > 1e-9 * scale)
                    .fold(f64::INFINITY, f64::min);
                let slow = if slow.is_finite() { slow } else if scale > 0.0 { scale } else { 1.0 };
                4.0 * std::f64::consts::PI / slow
            }
        }
    }
}

/// Peak r population over the horizon and the lower-level population left
/// at that instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferPeak {
    pub max_population_r: f64,
    pub time: f64,
    pub lower_population: f64,
    /// Largest |Σ|C_i|² − 1| seen over the samples.
    pub norm_drift: f64,
}

pub fn transfer_peak(cfg: &ThreeLevelConfig, horizon: &Horizon) -> Result<TransferPeak> {
    horizon.validate()?;
    let es = eig3_hermitian(&build_rwa_hamiltonian(cfg)?)?;
    let t_end = horizon.t_end(&es.values);
    let n = horizon.samples();
    let mut best = TransferPeak { max_population_r: -1.0, time: 0.0, lower_population: 0.0, norm_drift: 0.0 };
    for i in 0..n {
        let t = t_end * i as f64 / (n - 1) as f64;
        let c = evolve_with(&es, &cfg.c0, t);
        let pops = c.map(|x| x.norm_sqr());
        best.norm_drift = best.norm_drift.max((pops.iter().sum::<f64>() - 1.0).abs());
        if pops[R] > best.max_population_r {
            best.max_population_r = pops[R];
            best.time = t;
            best.lower_population = pops[0] + pops[1];
        }
    }
    Ok(best)
}

/// Largest r population over the horizon.
pub fn max_population_r(cfg: &ThreeLevelConfig, horizon: &Horizon) -> Result<f64> {
    Ok(transfer_peak(cfg, horizon)?.max_population_r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSweepResult {
    pub detunings: Vec<f64>,
    pub max_population_r: Vec<f64>,
    pub fits: Vec<LorentzianFit>,
}

/// Uniform detuning grid from `start` to `end` inclusive.
pub fn detuning_grid(start: f64, end: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(start.is_finite() && end.is_finite()) || end <= start {
        return Err(Error::Validation(format!(
            "detuning range needs finite start < end and n >= 2, got [{start}, {end}] with n={n}"
        )));
    }
    Ok((0..n).map(|i| start + (end - start) * i as f64 / (n - 1) as f64).collect())
}

/// Sweep the probe detuning and fit every peak found in the response.
pub fn sweep_probe(template: &ThreeLevelConfig, detunings: &[f64], horizon: &Horizon) -> Result<ProbeSweepResult> {
    template.validate()?;
    horizon.validate()?;
    let max_population_r = detunings
        .par_iter()
        .map(|&d| max_population_r(&template.with_probe_detuning(d), horizon))
        .collect::<Result<Vec<f64>>>()?;
    let fits = fit_peaks(detunings, &max_population_r)?;
    Ok(ProbeSweepResult { detunings: detunings.to_vec(), max_population_r, fits })
}

/// Indices of local maxima above 10% of the curve maximum.
pub fn peak_indices(ys: &[f64]) -> Vec<usize> {
    let top = ys.iter().copied().fold(0.0, f64::max);
    (1..ys.len().saturating_sub(1))
        .filter(|&i| ys[i] > ys[i - 1] && ys[i] >= ys[i + 1] && ys[i] > 0.1 * top)
        .collect()
}

/// Fit each detected peak on the window bounded by the neighbouring minima.
pub fn fit_peaks(xs: &[f64], ys: &[f64]) -> Result<Vec<LorentzianFit>> {
    let peaks = peak_indices(ys);
    let mut fits = Vec::with_capacity(peaks.len());
    for (k, &p) in peaks.iter().enumerate() {
        let lo = if k == 0 { 0 } else { argmin(ys, peaks[k - 1], p) };
        let hi = if k + 1 == peaks.len() { ys.len() - 1 } else { argmin(ys, p, peaks[k + 1]) };
        fits.push(fit_lorentzian(&xs[lo..=hi], &ys[lo..=hi])?);
    }
    Ok(fits)
}

fn argmin(ys: &[f64], from: usize, to: usize) -> usize {
    (from..=to).min_by(|&a, &b| ys[a].total_cmp(&ys[b])).unwrap()
}

/// Refine the probe detuning that maximizes transfer, by golden-section
/// search inside [lo, hi].
pub fn optimal_probe_detuning(template: &ThreeLevelConfig, lo: f64, hi: f64, horizon: &Horizon) -> Result<(f64, TransferPeak)> {
    let eval = |d: f64| transfer_peak(&template.with_probe_detuning(d), horizon);
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - golden * (b - a);
    let mut x2 = a + golden * (b - a);
    let mut f1 = eval(x1)?.max_population_r;
    let mut f2 = eval(x2)?.max_population_r;
    for _ in 0..80 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - golden * (b - a);
            f1 = eval(x1)?.max_population_r;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + golden * (b - a);
            f2 = eval(x2)?.max_population_r;
        }
        if b - a < 1e-12 {
            break;
        }
    }
    let d = 0.5 * (a + b);
    Ok((d, eval(d)?))
}

/// Grid for the linewidth study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinewidthGrid {
    pub delta_c: Vec<f64>,
    pub d_c: Vec<f64>,
    pub d_p: Vec<f64>,
    pub scenario: Scenario,
    /// Sweep points per line.
    pub points: usize,
}

impl Default for LinewidthGrid {
    fn default() -> Self {
        Self {
            delta_c: vec![0.0, 0.2, 0.4, 0.8],
            d_c: vec![0.5, 1.0, 2.0],
            d_p: vec![0.02, 0.05, 0.1],
            scenario: Scenario::ProbeE,
            points: 301,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinewidthRow {
    pub delta_c: f64,
    pub d_c: f64,
    pub d_p: f64,
    pub scenario: Scenario,
    pub init_label: String,
    /// Launch amplitude on the level the probe couples to.
    pub launch_amplitude: f64,
    pub predicted_center: f64,
    /// Width of the bare coupled pair's transfer curve, |D_C|/2.
    pub isolated_width: f64,
    pub fit: Option<LorentzianFit>,
    pub error: Option<String>,
}

/// Fit one Lorentzian per dressed level for every grid cell.
pub fn linewidth_study(grid: &LinewidthGrid) -> Result<Vec<LinewidthRow>> {
    let cells = grid.delta_c.len() * grid.d_c.len() * grid.d_p.len();
    if cells == 0 || cells > 300 {
        return Err(Error::Validation(format!("linewidth grid must have 1..=300 cells, got {cells}")));
    }
    if grid.points < 16 {
        return Err(Error::Validation("linewidth sweeps need at least 16 points".into()));
    }
    if grid.d_p.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Validation("probe strengths must be positive".into()));
    }
    let mut jobs = Vec::new();
    for &delta_c in &grid.delta_c {
        for &d_c in &grid.d_c {
            for &d_p in &grid.d_p {
                jobs.push((delta_c, d_c, d_p));
            }
        }
    }
    let horizon = Horizon::default();
    let rows: Vec<Vec<LinewidthRow>> = jobs
        .par_iter()
        .map(|&(delta_c, d_c, d_p)| {
            let mut base = ThreeLevelConfig::dimensionless(grid.scenario).with_coupling_detuning(delta_c);
            base.d_c = C64::new(d_c, 0.0);
            base.d_p = C64::new(d_p, 0.0);
            let coupled = match grid.scenario {
                Scenario::ProbeE => 1,
                Scenario::ProbeG => 0,
            };
            eigen_launches(&base)
                .iter()
                .map(|launch| {
                    let cfg = base.with_initial_state(launch.state);
                    let center = resonant_detuning(&cfg, launch.lambda);
                    let amp = launch.state[coupled].norm();
                    let width = 12.0 * d_p * amp.max(0.05);
                    let outcome = detuning_grid(center - width, center + width, grid.points)
                        .and_then(|xs| {
                            let ys = xs
                                .iter()
                                .map(|&d| max_population_r(&cfg.with_probe_detuning(d), &horizon))
                                .collect::<Result<Vec<_>>>()?;
                            fit_lorentzian(&xs, &ys)
                        });
                    let (fit, error) = match outcome {
                        Ok(f) => (Some(f), None),
                        Err(e) => (None, Some(e.to_string())),
                    };
                    LinewidthRow {
                        delta_c,
                        d_c,
                        d_p,
                        scenario: grid.scenario,
                        init_label: launch.label.to_string(),
                        launch_amplitude: amp,
                        predicted_center: center,
                        isolated_width: 0.5 * d_c,
                        fit,
                        error,
                    }
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}
