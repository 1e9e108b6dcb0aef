//! The command-line tool against direct library calls.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::tempdir;

use tsslab::driven::{quasi_energy_spectrum, rotate_rwa, solve_driven};
use tsslab::presets::{build, Preset, PresetName, PresetParams};
use tsslab::report::{energy_report, EnergyReport};
use tsslab::three_level::{detuning_grid, eigen_launches, sweep_probe, Horizon, Scenario, ThreeLevelConfig};
use tsslab::trace::{AmplitudeTrace, TimeGrid};
use tsslab::two_state::{solve_matrix, StateVector2};
use tsslab::C64;

fn tsslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsslab")).args(args).env_remove("TSSLAB_OUT").output().unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn energy_report_matches_library() {
    let dir = tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&tsslab(&["energy-report", "--preset", "cesium-clock", "--set", "params.g=1e4", "--set", "params.delta_c_frac=0.06", "--out", out]));
    let written: EnergyReport = serde_json::from_str(&read(dir.path(), "energy_report.json")).unwrap();
    let params = PresetParams { g: 1e4, delta_c_frac: 0.06, ..PresetParams::default() };
    assert_eq!(written, energy_report(PresetName::CesiumClock, &params).unwrap());
}

#[test]
fn evolve_trace_matches_library() {
    let dir = tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&tsslab(&[
        "evolve",
        "--preset",
        "proton-static",
        "--set",
        r#"time_grid={"t_start":0,"t_end":2e-8,"n":257}"#,
        "--set",
        r#"outputs=["trace","probabilities"]"#,
        "--set",
        r#"initial_state={"kind":"canonical","index":1}"#,
        "--out",
        out,
    ]));
    let sys = match build(PresetName::ProtonStatic, &PresetParams::default()).unwrap() {
        Preset::Static(s) => s,
        other => panic!("{other:?}"),
    };
    let c0 = StateVector2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0)).unwrap();
    let grid = TimeGrid::new(0.0, 2e-8, 257).unwrap();
    let trace = AmplitudeTrace::from_fn(&grid, |t| solve_matrix(&sys, &c0, t).as_array());
    assert_eq!(read(dir.path(), "trace.csv"), trace.to_csv());

    let probs = read(dir.path(), "probabilities.csv");
    let mut lines = probs.lines();
    assert_eq!(lines.next().unwrap(), "t,p1,p2");
    for (line, pops) in lines.zip(trace.populations()) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[1] - pops[0]).abs() < 1e-15 && (cols[2] - pops[1]).abs() < 1e-15);
    }
}

#[test]
fn spectrum_matches_library() {
    let dir = tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&tsslab(&[
        "spectrum",
        "--preset",
        "cesium-clock",
        "--set",
        "params.g=1e4",
        "--set",
        "params.delta_c_frac=0.06",
        "--set",
        "rescaled=true",
        "--set",
        r#"initial_state={"kind":"eigen_p"}"#,
        "--set",
        r#"time_grid={"t_start":0,"t_end":3000,"n":8192}"#,
        "--out",
        out,
    ]));
    let params = PresetParams { g: 1e4, delta_c_frac: 0.06, ..PresetParams::default() };
    let sys = match build(PresetName::CesiumClock, &params).unwrap() {
        Preset::Driven(s) => s.rescaled(s.omega_a()).unwrap(),
        other => panic!("{other:?}"),
    };
    let c0 = rotate_rwa(&sys).xi_p();
    let grid = TimeGrid::new(0.0, 3000.0, 8192).unwrap();
    let trace = AmplitudeTrace::from_fn(&grid, |t| solve_driven(&sys, &c0, t).as_array());
    let peaks = quasi_energy_spectrum(&trace).unwrap();
    assert_eq!(peaks.len(), 2);

    let csv = read(dir.path(), "spectrum.csv");
    let rows: Vec<Vec<f64>> = csv.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), peaks.len());
    for (row, p) in rows.iter().zip(&peaks) {
        assert_eq!(row[0] as usize, p.component + 1);
        assert!((row[1] - p.frequency).abs() <= 1e-12 * p.frequency.abs());
        assert!((row[2] - p.magnitude).abs() <= 1e-12);
    }
}

#[test]
fn sweep_matches_library() {
    let dir = tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&tsslab(&[
        "sweep-probe",
        "--set",
        "three_level.delta_c=0.4",
        "--set",
        r#"three_level.sweep={"start":-1,"end":1,"n":201}"#,
        "--set",
        r#"three_level.launches=["eigen_p"]"#,
        "--out",
        out,
    ]));
    let base = ThreeLevelConfig::dimensionless(Scenario::ProbeE).with_coupling_detuning(0.4);
    let launch = eigen_launches(&base)[0];
    let xs = detuning_grid(-1.0, 1.0, 201).unwrap();
    let expected = sweep_probe(&base.with_initial_state(launch.state), &xs, &Horizon::default()).unwrap();

    let csv = read(dir.path(), "sweep.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "detuning_rad_s,max_pop_r,scenario,init_label");
    let mut n = 0;
    for (line, (&x, &y)) in lines.zip(expected.detunings.iter().zip(&expected.max_population_r)) {
        let cols: Vec<&str> = line.split(',').collect();
        assert!((cols[0].parse::<f64>().unwrap() - x).abs() < 1e-14);
        assert!((cols[1].parse::<f64>().unwrap() - y).abs() < 1e-14);
        assert_eq!(cols[2], "probe_e");
        assert_eq!(cols[3], launch.label.to_string());
        n += 1;
    }
    assert_eq!(n, 201);

    let fits: Value = serde_json::from_str(&read(dir.path(), "fits.json")).unwrap();
    let centers: Vec<f64> = fits[0]["fits"].as_array().unwrap().iter().map(|f| f["center"].as_f64().unwrap()).collect();
    let lib: Vec<f64> = expected.fits.iter().map(|f| f.center).collect();
    assert_eq!(centers, lib);
}

#[test]
fn written_config_reproduces_the_run() {
    let first = tempdir().unwrap();
    let second = tempdir().unwrap();
    ok(&tsslab(&[
        "evolve",
        "--preset",
        "proton-driven",
        "--set",
        "params.g=2e5",
        "--set",
        "params.delta_c_frac=0.06",
        "--set",
        "rescaled=true",
        "--set",
        r#"outputs=["trace","probabilities","energies"]"#,
        "--plot-stub",
        "--out",
        first.path().to_str().unwrap(),
    ]));
    let config = first.path().join("config.json");
    ok(&tsslab(&["evolve", "--config", config.to_str().unwrap(), "--out", second.path().to_str().unwrap()]));
    for name in ["trace.csv", "probabilities.csv", "energies.json", "plot_trace.py", "plot_probabilities.py"] {
        assert_eq!(read(first.path(), name), read(second.path(), name), "{name}");
    }
    let header = read(first.path(), "probabilities.csv");
    assert!(header.starts_with("t,p1,p2,p_plus_x,p_minus_x\n"));
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let unknown = tsslab(&["energy-report", "--preset", "nope", "--out", out]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("proton-static"));

    let unnormalized = tsslab(&[
        "evolve",
        "--set",
        r#"initial_state={"kind":"explicit","amplitudes":[[1,0],[1,0]]}"#,
        "--out",
        out,
    ]);
    assert_eq!(unnormalized.status.code(), Some(2));

    let unknown_field = tsslab(&["evolve", "--set", "no_such_field=1", "--out", out]);
    assert_eq!(unknown_field.status.code(), Some(2));
}

#[test]
fn integrator_drift_exits_with_three() {
    let dir = tempdir().unwrap();
    let run = tsslab(&[
        "oracle-check",
        "--set",
        "oracle.steps_per_period=50",
        "--set",
        "oracle.rabi_periods=40",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stderr).contains("norm drift"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempdir().unwrap();
    let target = dir.path().join("from-env");
    let run = Command::new(env!("CARGO_BIN_EXE_tsslab"))
        .args(["energy-report", "--preset", "ammonia-free"])
        .env("TSSLAB_OUT", &target)
        .output()
        .unwrap();
    ok(&run);
    assert!(target.join("energy_report.json").exists());
    assert!(String::from_utf8_lossy(&run.stdout).contains("gap"));
}
