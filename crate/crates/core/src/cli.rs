//! Command-line driver. Everything here is configuration, dispatch and file
//! output; the numbers come from the library modules.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::driven::{px_probabilities, quasi_energy_spectrum, rotate_rwa, solve_driven, DriveSystem};
use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};
use crate::oracle::{arbitrate_ammonia_factor, rwa_fidelity_preset, ArbitrationReport, RwaComparison};
use crate::presets::{build, Preset, PresetName, PresetParams};
use crate::report::{energy_report, system_report, EnergyReport};
use crate::spectrum::SpectralPeak;
use crate::three_level::{
    detuning_grid, eigen_launches, linewidth_study, sweep_probe, Horizon, LinewidthGrid, Scenario, ThreeLevelConfig,
};
use crate::fit::LorentzianFit;
use crate::trace::{csv_string, fmt_num, write_file, AmplitudeTrace, TimeGrid};
use crate::two_state::{average_energy, solve_matrix, EnergyRoute, StateVector2, StaticSystem};

/// Largest automatically chosen time grid.
pub const MAX_AUTO_SAMPLES: usize = 1 << 22;
pub const DEFAULT_OUT: &str = "tsslab-out";

#[derive(Parser, Debug)]
#[command(name = "tsslab", version, about = "Two- and three-level quantum dynamics toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Gaps, splits and quasi-energies of a preset, with quoted reference values.
    EnergyReport(CommonArgs),
    /// Amplitude, probability and energy traces on a time grid.
    Evolve(CommonArgs),
    /// Three-level probe sweep with Lorentzian fits.
    SweepProbe(CommonArgs),
    /// Quasi-energy spectrum of a driven (or static) trace.
    Spectrum(CommonArgs),
    /// Brute-force integration checks: ammonia arbitration and RWA fidelity.
    OracleCheck(CommonArgs),
    /// Fitted linewidth table over a parameter grid.
    Linewidths(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::EnergyReport(_) => "energy-report",
            Command::Evolve(_) => "evolve",
            Command::SweepProbe(_) => "sweep-probe",
            Command::Spectrum(_) => "spectrum",
            Command::OracleCheck(_) => "oracle-check",
            Command::Linewidths(_) => "linewidths",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::EnergyReport(a)
            | Command::Evolve(a)
            | Command::SweepProbe(a)
            | Command::Spectrum(a)
            | Command::OracleCheck(a)
            | Command::Linewidths(a) => a,
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override a config field by dotted path, e.g. `params.g=2e5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Shorthand for `--set preset=NAME`.
    #[arg(long)]
    pub preset: Option<String>,
    /// Output directory (overrides the config and TSSLAB_OUT).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Also write a small plotting script next to every CSV.
    #[arg(long)]
    pub plot_stub: bool,
}

/// Two-level system given by its parameters instead of a preset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InlineSystem {
    Static { omega0: f64, omega11: f64, omega_d: f64, phi_d: f64 },
    Driven { omega0: f64, omega_a: f64, omega_d: C64, omega_c: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    Canonical { index: usize },
    EigenP,
    EigenN,
    /// Must already be normalized.
    Explicit { amplitudes: Vec<C64> },
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Canonical { index: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Trace,
    Probabilities,
    Energies,
    Spectrum,
    Sweep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Launch {
    EigenP,
    EigenN,
    /// The `c0` of the three-level config.
    Config,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub start: f64,
    pub end: f64,
    pub n: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self { start: -3.0, end: 3.0, n: 601 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThreeLevelSection {
    pub system: ThreeLevelConfig,
    /// Coupling-field detuning applied on top of `system`.
    pub delta_c: f64,
    pub sweep: SweepGrid,
    pub launches: Vec<Launch>,
    pub horizon: Horizon,
}

impl Default for ThreeLevelSection {
    fn default() -> Self {
        Self {
            system: ThreeLevelConfig::dimensionless(Scenario::ProbeE),
            delta_c: 0.0,
            sweep: SweepGrid::default(),
            launches: vec![Launch::EigenP, Launch::EigenN],
            horizon: Horizon::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    /// Amplification used for the ammonia arbitration run.
    pub g: f64,
    pub delta_c_frac: f64,
    /// Field amplification for the RWA fidelity runs (1 = typical field).
    pub fidelity_g: f64,
    pub fidelity_delta_c_frac: f64,
    pub rabi_periods: f64,
    pub steps_per_period: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            g: 2e6,
            delta_c_frac: 0.06,
            fidelity_g: 1.0,
            fidelity_delta_c_frac: 0.06,
            rabi_periods: 10.0,
            steps_per_period: 2000.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: PresetName,
    pub params: PresetParams,
    /// Replaces the preset when present.
    pub system: Option<InlineSystem>,
    /// Divide every frequency of a driven system by its transition frequency.
    pub rescaled: bool,
    pub initial_state: InitialState,
    /// Chosen from the system's time scales when absent.
    pub time_grid: Option<TimeGrid>,
    pub outputs: Vec<OutputKind>,
    pub output_dir: Option<PathBuf>,
    pub plot_stub: bool,
    pub three_level: ThreeLevelSection,
    pub linewidths: LinewidthGrid,
    pub oracle: OracleSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: PresetName::ProtonStatic,
            params: PresetParams::default(),
            system: None,
            rescaled: false,
            initial_state: InitialState::default(),
            time_grid: None,
            outputs: vec![OutputKind::Probabilities],
            output_dir: None,
            plot_stub: false,
            three_level: ThreeLevelSection::default(),
            linewidths: LinewidthGrid::default(),
            oracle: OracleSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Usage(format!("invalid config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    /// Apply `key=value` overrides. Values are read as JSON when they parse,
    /// otherwise as plain strings.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut doc = serde_json::to_value(self).expect("config is always serializable");
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("override '{item}' is not of the form key=value")))?;
            let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            set_path(&mut doc, key, value)?;
        }
        serde_json::from_value(doc).map_err(|e| Error::Usage(format!("invalid override: {e}")))
    }

    /// --out, then the config, then TSSLAB_OUT, then a fixed default.
    pub fn resolve_output_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| self.output_dir.clone())
            .or_else(|| std::env::var_os("TSSLAB_OUT").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }
}

fn set_path(doc: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Usage(format!("bad override key '{key}'")));
    }
    for (i, part) in parts.iter().enumerate() {
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
        let next = match node {
            Value::Object(map) => map.entry(part.to_string()).or_insert(Value::Null),
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| Error::Usage(format!("'{part}' in '{key}' must index an array")))?;
                items
                    .get_mut(idx)
                    .ok_or_else(|| Error::Usage(format!("index {idx} out of range in '{key}'")))?
            }
            _ => return Err(Error::Usage(format!("'{key}' descends into a scalar"))),
        };
        if i + 1 == parts.len() {
            *next = value;
            return Ok(());
        }
        node = next;
    }
    unreachable!("loop returns on the last part")
}

/// Config as seen by a command: file, then --preset, then --set.
pub fn load_config(args: &CommonArgs) -> Result<RunConfig> {
    let base = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    let mut overrides = Vec::new();
    if let Some(p) = &args.preset {
        let name: PresetName = p.parse()?;
        overrides.push(format!("preset=\"{name}\""));
    }
    overrides.extend(args.set.iter().cloned());
    let mut cfg = base.with_overrides(&overrides)?;
    if args.plot_stub {
        cfg.plot_stub = true;
    }
    Ok(cfg)
}

/// Files written and text for stdout.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub written: Vec<PathBuf>,
    pub stdout: String,
}

struct Writer {
    dir: PathBuf,
    plot_stub: bool,
    out: RunOutput,
}

impl Writer {
    fn file(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        write_file(&path, contents)?;
        self.out.written.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("reports are serializable");
        text.push('\n');
        self.file(name, &text)
    }

    /// CSV plus an optional plotting stub for the given columns.
    fn csv(&mut self, name: &str, contents: &str, x: &str, ys: &[&str]) -> Result<()> {
        self.file(name, contents)?;
        if self.plot_stub {
            let stem = name.trim_end_matches(".csv");
            self.file(&format!("plot_{stem}.py"), &plot_stub(name, x, ys))?;
        }
        Ok(())
    }
}

fn plot_stub(csv_name: &str, x: &str, ys: &[&str]) -> String {
    let stem = csv_name.trim_end_matches(".csv");
    let cols: Vec<String> = ys.iter().map(|c| format!("\"{c}\"")).collect();
    let mut s = String::new();
    let _ = writeln!(s, "import csv");
    let _ = writeln!(s, "import matplotlib.pyplot as plt");
    let _ = writeln!(s);
    let _ = writeln!(s, "rows = list(csv.DictReader(open(\"{csv_name}\")))");
    let _ = writeln!(s, "x = [float(r[\"{x}\"]) for r in rows]");
    let _ = writeln!(s, "for col in [{}]:", cols.join(", "));
    let _ = writeln!(s, "    plt.plot(x, [float(r[col]) for r in rows], label=col)");
    let _ = writeln!(s, "plt.xlabel(\"{x}\")");
    let _ = writeln!(s, "plt.legend()");
    let _ = writeln!(s, "plt.savefig(\"{stem}.png\", dpi=150)");
    s
}

/// Run one subcommand end to end.
pub fn run(command: &Command) -> Result<RunOutput> {
    let args = command.args();
    let cfg = load_config(args)?;
    let dir = cfg.resolve_output_dir(args.out.as_deref());
    let mut w = Writer { dir, plot_stub: cfg.plot_stub, out: RunOutput::default() };
    match command {
        Command::EnergyReport(_) => cmd_energy_report(&cfg, &mut w)?,
        Command::Evolve(_) => cmd_evolve(&cfg, &cfg.outputs, &mut w)?,
        Command::Spectrum(_) => {
            let mut outputs = cfg.outputs.clone();
            if !outputs.contains(&OutputKind::Spectrum) {
                outputs.push(OutputKind::Spectrum);
            }
            outputs.retain(|o| *o != OutputKind::Probabilities || cfg.outputs.contains(&OutputKind::Spectrum));
            cmd_evolve(&cfg, &outputs, &mut w)?
        }
        Command::SweepProbe(_) => cmd_sweep(&cfg, &mut w)?,
        Command::OracleCheck(_) => cmd_oracle(&cfg, &mut w)?,
        Command::Linewidths(_) => cmd_linewidths(&cfg, &mut w)?,
    }
    // the effective configuration, so the run can be repeated exactly
    let mut effective = cfg.clone();
    effective.output_dir = Some(w.dir.clone());
    w.file("config.json", &(effective.to_json() + "\n"))?;
    for path in &w.out.written {
        let _ = writeln!(w.out.stdout, "wrote {}", path.display());
    }
    Ok(w.out)
}

/// The two-level system a config describes.
pub fn resolve_system(cfg: &RunConfig) -> Result<Preset> {
    let preset = match cfg.system {
        Some(InlineSystem::Static { omega0, omega11, omega_d, phi_d }) => {
            Preset::Static(StaticSystem::new(omega0, omega11, omega_d, phi_d)?)
        }
        Some(InlineSystem::Driven { omega0, omega_a, omega_d, omega_c }) => {
            Preset::Driven(DriveSystem::new(omega0, omega_a, omega_d, omega_c)?)
        }
        None => build(cfg.preset, &cfg.params)?,
    };
    if !cfg.rescaled {
        return Ok(preset);
    }
    match preset {
        Preset::Driven(sys) => Ok(Preset::Driven(sys.rescaled(sys.omega_a())?)),
        _ => Err(Error::Usage("`rescaled` applies to driven systems only".into())),
    }
}

/// The initial two-level state, with eigenstates taken from the static
/// system (or the rotating-frame system for drives).
pub fn resolve_state(cfg: &RunConfig, system: &Preset) -> Result<StateVector2> {
    let eigen_source = match system {
        Preset::Static(s) => *s,
        Preset::Waveguide(wg) => wg.as_static(),
        Preset::Driven(d) => rotate_rwa(d),
    };
    match &cfg.initial_state {
        InitialState::Canonical { index: 0 } => StateVector2::new(ONE, ZERO),
        InitialState::Canonical { index: 1 } => StateVector2::new(ZERO, ONE),
        InitialState::Canonical { index } => {
            Err(Error::Validation(format!("canonical index {index} out of range for a two-level system")))
        }
        InitialState::EigenP => Ok(eigen_source.xi_p()),
        InitialState::EigenN => Ok(eigen_source.xi_n()),
        InitialState::Explicit { amplitudes } => match amplitudes.as_slice() {
            [a, b] => StateVector2::new(*a, *b),
            other => Err(Error::Validation(format!("expected 2 amplitudes, got {}", other.len()))),
        },
    }
}

/// Slowest and fastest frequencies that matter for sampling.
fn time_scales(system: &Preset) -> (f64, f64) {
    match system {
        Preset::Static(s) => (s.omega_gr(), s.omega0().abs() + s.omega_p()),
        Preset::Waveguide(wg) => (wg.omega_gr(), wg.beta_avg().abs() + wg.omega_p()),
        Preset::Driven(d) => {
            let q = crate::driven::quasi_energies(d);
            let fastest = q.as_array().iter().fold(0.0f64, |m, x| m.max(x.abs()));
            (d.omega_gr(), fastest.max(d.omega_gr()))
        }
    }
}

/// Grid covering `periods` beat periods, sampling the fastest phase four
/// times per cycle (at least 2001 points).
pub fn auto_grid(system: &Preset, periods: f64) -> Result<TimeGrid> {
    let (slow, fast) = time_scales(system);
    if !(slow > 0.0) {
        return Err(Error::Validation(
            "system has no beat frequency; give an explicit time_grid".into(),
        ));
    }
    let t_end = periods * 2.0 * std::f64::consts::PI / slow;
    let needed = (t_end * fast / (0.5 * std::f64::consts::PI)).ceil() as usize + 1;
    let n = needed.max(2001);
    if n > MAX_AUTO_SAMPLES {
        return Err(Error::Validation(format!(
            "automatic grid would need {n} samples to resolve a fastest frequency {fast:e} over {periods} beat \
             periods; give an explicit time_grid or a stronger drive"
        )));
    }
    TimeGrid::new(0.0, t_end, n)
}

fn trace_for(system: &Preset, c0: &StateVector2, grid: &TimeGrid) -> AmplitudeTrace<2> {
    match system {
        Preset::Static(s) => AmplitudeTrace::from_fn(grid, |t| solve_matrix(s, c0, t).as_array()),
        Preset::Waveguide(wg) => {
            let a0 = c0.as_array();
            AmplitudeTrace::from_fn(grid, |z| wg.evolve(&a0, z))
        }
        Preset::Driven(d) => AmplitudeTrace::from_fn(grid, |t| solve_driven(d, c0, t).as_array()),
    }
}

fn cmd_energy_report(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let report = if cfg.system.is_some() || cfg.rescaled {
        system_report(&resolve_system(cfg)?, &cfg.params)
    } else {
        energy_report(cfg.preset, &cfg.params)?
    };
    w.json("energy_report.json", &report)?;
    w.out.stdout.push_str(&render_report(&report));
    Ok(())
}

/// Plain-text table of a report.
pub fn render_report(report: &EnergyReport) -> String {
    let mut s = String::new();
    let label = report.preset.map(|p| p.to_string()).unwrap_or_else(|| "inline system".into());
    let _ = writeln!(s, "{label}");
    for line in &report.lines {
        let unit = serde_json::to_value(line.unit).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let _ = write!(s, "  {:<16} {:>24} {unit}", line.quantity, fmt_num(line.value));
        if let Some(e) = line.microelectronvolts {
            let _ = write!(s, "  = {} ueV", fmt_num(e));
        }
        if let Some(q) = &line.quoted {
            let _ = write!(s, "  [quoted {} ; diff {:+.3}%]", q.value, 100.0 * q.relative_difference);
        }
        s.push('\n');
    }
    s
}

fn cmd_evolve(cfg: &RunConfig, outputs: &[OutputKind], w: &mut Writer) -> Result<()> {
    if outputs.contains(&OutputKind::Sweep) {
        return Err(Error::Usage("the `sweep` output belongs to the sweep-probe command".into()));
    }
    let system = resolve_system(cfg)?;
    let c0 = resolve_state(cfg, &system)?;
    let spectrum_wanted = outputs.contains(&OutputKind::Spectrum);
    let grid = match cfg.time_grid {
        Some(g) => {
            g.validate()?;
            g
        }
        None => auto_grid(&system, if spectrum_wanted { 40.0 } else { 10.0 })?,
    };
    let trace = trace_for(&system, &c0, &grid);
    for kind in outputs {
        match kind {
            OutputKind::Trace => w.csv("trace.csv", &trace.to_csv(), "t", &["re_c1", "im_c1", "re_c2", "im_c2"])?,
            OutputKind::Probabilities => {
                let (csv, cols) = probability_csv(&system, &c0, &trace);
                w.csv("probabilities.csv", &csv, "t", &cols)?
            }
            OutputKind::Energies => w.json("energies.json", &launch_energies(cfg, &system, &c0))?,
            OutputKind::Spectrum => {
                let peaks = quasi_energy_spectrum(&trace)?;
                w.csv("spectrum.csv", &spectrum_csv(&peaks), "frequency_rad_s", &["magnitude"])?
            }
            OutputKind::Sweep => unreachable!("rejected above"),
        }
    }
    Ok(())
}

fn probability_csv(system: &Preset, c0: &StateVector2, trace: &AmplitudeTrace<2>) -> (String, Vec<&'static str>) {
    let driven = match system {
        Preset::Driven(d) => Some(d),
        _ => None,
    };
    let mut header = vec!["t", "p1", "p2"];
    if driven.is_some() {
        header.extend(["p_plus_x", "p_minus_x"]);
    }
    let mut rows = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for (t, p) in trace.times.iter().zip(trace.populations()) {
        let mut row = vec![fmt_num(*t), fmt_num(p[0]), fmt_num(p[1])];
        if let Some(d) = driven {
            let (plus, minus) = px_probabilities(d, c0, *t);
            row.push(fmt_num(plus));
            row.push(fmt_num(minus));
        }
        rows.push(row);
    }
    (csv_string(&rows), header[1..].to_vec())
}

fn spectrum_csv(peaks: &[SpectralPeak]) -> String {
    let mut rows = vec![vec!["component".to_string(), "frequency_rad_s".into(), "magnitude".into()]];
    for p in peaks {
        rows.push(vec![(p.component + 1).to_string(), fmt_num(p.frequency), fmt_num(p.magnitude)]);
    }
    csv_string(&rows)
}

#[derive(Serialize)]
struct LaunchEnergies {
    report: EnergyReport,
    /// Average energy of the launch state by every route (static systems).
    average_energy: Vec<(String, f64)>,
}

fn launch_energies(cfg: &RunConfig, system: &Preset, c0: &StateVector2) -> LaunchEnergies {
    let report = system_report(system, &cfg.params);
    let average_energy = match system {
        Preset::Static(s) => EnergyRoute::ALL
            .iter()
            .map(|r| (r.as_str().to_string(), average_energy(s, c0, *r)))
            .collect(),
        _ => Vec::new(),
    };
    LaunchEnergies { report, average_energy }
}

#[derive(Serialize)]
struct SweepFits {
    init_label: String,
    scenario: Scenario,
    delta_c: f64,
    fits: Vec<LorentzianFit>,
}

fn three_level_launches(section: &ThreeLevelSection, base: &ThreeLevelConfig) -> Vec<(String, [C64; 3])> {
    let eig = eigen_launches(base);
    section
        .launches
        .iter()
        .map(|l| match l {
            Launch::EigenP => (eig[0].label.to_string(), eig[0].state),
            Launch::EigenN => (eig[1].label.to_string(), eig[1].state),
            Launch::Config => ("general".to_string(), base.c0),
        })
        .collect()
}

fn cmd_sweep(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let section = &cfg.three_level;
    let base = section.system.with_coupling_detuning(section.delta_c);
    base.validate()?;
    let xs = detuning_grid(section.sweep.start, section.sweep.end, section.sweep.n)?;
    let mut rows = vec![vec![
        "detuning_rad_s".to_string(),
        "max_pop_r".into(),
        "scenario".into(),
        "init_label".into(),
    ]];
    let mut fits = Vec::new();
    for (label, state) in three_level_launches(section, &base) {
        let res = sweep_probe(&base.with_initial_state(state), &xs, &section.horizon)?;
        for (d, p) in res.detunings.iter().zip(&res.max_population_r) {
            rows.push(vec![fmt_num(*d), fmt_num(*p), base.scenario.to_string(), label.clone()]);
        }
        fits.push(SweepFits { init_label: label, scenario: base.scenario, delta_c: base.delta_c(), fits: res.fits });
    }
    w.csv("sweep.csv", &csv_string(&rows), "detuning_rad_s", &["max_pop_r"])?;
    w.json("fits.json", &fits)
}

#[derive(Serialize)]
struct FidelityRow {
    preset: PresetName,
    g: f64,
    comparison: RwaComparison,
    /// Error with the drive halved, divided by the error at full drive.
    halved_drive_ratio: f64,
}

#[derive(Serialize)]
struct OracleReport {
    arbitration: ArbitrationReport,
    rwa_fidelity: Vec<FidelityRow>,
}

fn cmd_oracle(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let o = &cfg.oracle;
    let arbitration = arbitrate_ammonia_factor(o.g, o.delta_c_frac)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let launch = StateVector2::new(C64::new(s, 0.0), C64::new(s, 0.0))?;
    let mut rwa = Vec::new();
    for name in [PresetName::ProtonDriven, PresetName::CesiumClock, PresetName::AmmoniaDriven] {
        let full = rwa_fidelity_preset(name, o.fidelity_g, o.fidelity_delta_c_frac, &launch, o.rabi_periods, o.steps_per_period)?;
        let half =
            rwa_fidelity_preset(name, 0.5 * o.fidelity_g, o.fidelity_delta_c_frac, &launch, o.rabi_periods, o.steps_per_period)?;
        rwa.push(FidelityRow { preset: name, g: o.fidelity_g, comparison: full, halved_drive_ratio: half.max_error / full.max_error });
    }
    let ratio = arbitration.step_halving.ratio;
    let report = OracleReport { arbitration, rwa_fidelity: rwa };
    w.json("oracle_check.json", &report)?;
    let a = &report.arbitration;
    let _ = writeln!(
        w.out.stdout,
        "ammonia split: measured {:.6} ueV, direct {:.6} ueV, doubled {:.6} ueV -> {} (step-halving ratio {:.2})",
        a.measured_split_uev, a.predicted_direct_uev, a.predicted_doubled_uev, a.verdict, ratio
    );
    if !(12.0..=20.0).contains(&ratio) {
        return Err(Error::Convergence(format!("step-halving ratio {ratio} is not fourth order (expected 16 +/- 4)")));
    }
    Ok(())
}

fn cmd_linewidths(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let rows = linewidth_study(&cfg.linewidths)?;
    let mut table = vec![[
        "delta_c",
        "d_c",
        "d_p",
        "scenario",
        "init_label",
        "launch_amplitude",
        "predicted_center",
        "isolated_width",
        "center",
        "Q",
        "amplitude",
        "residual_rms",
        "error",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect::<Vec<_>>()];
    for r in &rows {
        let fit = |f: fn(&LorentzianFit) -> f64| r.fit.as_ref().map(|x| fmt_num(f(x))).unwrap_or_default();
        table.push(vec![
            fmt_num(r.delta_c),
            fmt_num(r.d_c),
            fmt_num(r.d_p),
            r.scenario.to_string(),
            r.init_label.clone(),
            fmt_num(r.launch_amplitude),
            fmt_num(r.predicted_center),
            fmt_num(r.isolated_width),
            fit(|x| x.center),
            fit(|x| x.q),
            fit(|x| x.amplitude),
            fit(|x| x.residual_rms),
            r.error.clone().unwrap_or_default().replace(',', ";"),
        ]);
    }
    w.csv("linewidths.csv", &csv_string(&table), "d_p", &["Q"])?;
    w.json("linewidths.json", &rows)
}

/// Used by tests that drive the CLI in-process.
pub fn parse_and_run<I, T>(argv: I) -> Result<RunOutput>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Usage(e.to_string()))?;
    run(&cli.command)
}
