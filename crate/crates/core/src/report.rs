//! Energy reports for the presets, with the published reference values
//! alongside so they can be diffed.

use serde::{Deserialize, Serialize};

use crate::driven::{mollow_positions, quasi_energies};
use crate::presets::{build, to_microelectronvolts, AmmoniaReading, Preset, PresetName, PresetParams, WaveguidePair};
use crate::two_state::definite_energies;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "rad/s")]
    RadPerSecond,
    #[serde(rename = "1/mm")]
    InverseMillimetre,
}

/// A value quoted in the literature for this quantity at these parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quoted {
    /// In µeV for energies, 1/mm for waveguide wavenumbers.
    pub value: f64,
    pub relative_difference: f64,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportLine {
    pub quantity: String,
    pub unit: Unit,
    pub value: f64,
    /// Energy equivalent; absent for waveguide wavenumbers.
    pub microelectronvolts: Option<f64>,
    pub quoted: Option<Quoted>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Absent for systems given by their parameters.
    pub preset: Option<PresetName>,
    pub params: PresetParams,
    pub lines: Vec<ReportLine>,
}

impl EnergyReport {
    pub fn line(&self, quantity: &str) -> Option<&ReportLine> {
        self.lines.iter().find(|l| l.quantity == quantity)
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1e-300)
}

/// Reference values, keyed by preset, quantity and the parameters they hold at.
fn quoted_value(name: PresetName, quantity: &str, p: &PresetParams) -> Option<(f64, &'static str)> {
    let default = PresetParams::default();
    let at = |g: f64, frac: f64| close(p.g, g) && (p.delta_c_frac - frac).abs() < 1e-12;
    match (name, quantity) {
        (PresetName::ProtonStatic, "gap") if close(p.b, 3.0) => Some((1.056, "proton at 3 T")),
        (PresetName::AmmoniaFree, "gap") => Some((98.4, "inversion line")),
        (PresetName::AmmoniaDc, "gap") => Some((98.4, "inversion line plus an extremely small Stark correction")),
        (PresetName::Waveguides, "beat") => match p.pair {
            WaveguidePair::Equal => Some((1.3, "equal guides, rounded from 2 x 0.63")),
            WaveguidePair::Unequal => Some((2.5, "unequal guides")),
        },
        (PresetName::CesiumClock, "gap") => Some((38.0, "clock transition, approximate")),
        (PresetName::CesiumClock, "split") if at(1.0, 0.0) => Some((2.1e-4, "typical field on resonance")),
        (PresetName::CesiumClock, "split") if at(1e4, 0.06) => Some((3.1, "amplified field, red detuned")),
        (PresetName::ProtonDriven, "split")
            if close(p.b_z, default.b_z) && close(p.b_x, default.b_x) && at(2e5, 0.06) =>
        {
            Some((0.083, "amplified field, red detuned"))
        }
        (PresetName::ProtonDriven, "split") if close(p.b_z, default.b_z) && close(p.b_x, default.b_x) && at(1.0, 0.0) => {
            Some((2.6e-7, "typical field on resonance"))
        }
        (PresetName::AmmoniaDriven, "split") if at(2e6, 0.06) => Some((9.5, reading_note(p.reading))),
        (PresetName::AmmoniaDriven, "split") if at(1.0, 0.0) => Some((3.7e-6, reading_note(p.reading))),
        _ => None,
    }
}

fn reading_note(reading: AmmoniaReading) -> &'static str {
    match reading {
        AmmoniaReading::Direct => "quoted value; computed with drive amplitude G*omega_D",
        AmmoniaReading::Doubled => "quoted value; computed with drive amplitude 2*G*omega_D",
    }
}

fn line(name: Option<PresetName>, p: &PresetParams, quantity: &str, unit: Unit, value: f64) -> ReportLine {
    let scaled = match unit {
        Unit::RadPerSecond => to_microelectronvolts(value),
        Unit::InverseMillimetre => value,
    };
    let quoted = name.and_then(|n| quoted_value(n, quantity, p)).map(|(v, note)| Quoted {
        value: v,
        relative_difference: (scaled - v) / v,
        note: note.to_string(),
    });
    ReportLine {
        quantity: quantity.to_string(),
        unit,
        value,
        microelectronvolts: (unit == Unit::RadPerSecond).then_some(scaled),
        quoted,
    }
}

/// Gaps, splits and level positions of a preset.
pub fn energy_report(name: PresetName, p: &PresetParams) -> Result<EnergyReport> {
    let preset = build(name, p)?;
    Ok(EnergyReport { preset: Some(name), params: p.clone(), lines: lines(Some(name), p, &preset) })
}

/// Same quantities for an arbitrary system, without reference values.
pub fn system_report(system: &Preset, p: &PresetParams) -> EnergyReport {
    EnergyReport { preset: None, params: p.clone(), lines: lines(None, p, system) }
}

fn lines(name: Option<PresetName>, p: &PresetParams, system: &Preset) -> Vec<ReportLine> {
    let rad = Unit::RadPerSecond;
    match *system {
        Preset::Static(sys) => {
            let (ep, en) = definite_energies(&sys);
            vec![
                line(name, p, "gap", rad, ep - en),
                line(name, p, "level_p", rad, ep),
                line(name, p, "level_n", rad, en),
            ]
        }
        Preset::Waveguide(wg) => {
            let mm = Unit::InverseMillimetre;
            let (kp, kn) = wg.levels();
            vec![
                line(name, p, "beat", mm, wg.omega_gr()),
                line(name, p, "level_p", mm, kp),
                line(name, p, "level_n", mm, kn),
                line(name, p, "delta_beta", mm, wg.delta_beta()),
                line(name, p, "k_eff", mm, wg.k_eff),
            ]
        }
        Preset::Driven(sys) => {
            let q = quasi_energies(&sys);
            let m = mollow_positions(&sys);
            vec![
                line(name, p, "gap", rad, sys.omega_a()),
                line(name, p, "split", rad, sys.omega_gr()),
                line(name, p, "drive_frequency", rad, sys.omega_c()),
                line(name, p, "detuning", rad, sys.delta_c()),
                line(name, p, "rabi", rad, sys.omega_d().norm()),
                line(name, p, "quasi_p_low", rad, q.p_low),
                line(name, p, "quasi_p_high", rad, q.p_high),
                line(name, p, "quasi_n_low", rad, q.n_low),
                line(name, p, "quasi_n_high", rad, q.n_high),
                line(name, p, "mollow_red", rad, m.red),
                line(name, p, "mollow_blue", rad, m.blue),
            ]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proton_gap_quoted_only_at_three_tesla() {
        let r = energy_report(PresetName::ProtonStatic, &PresetParams::default()).unwrap();
        let gap = r.line("gap").unwrap();
        assert!(gap.quoted.as_ref().unwrap().relative_difference.abs() < 0.01);
        let other = PresetParams { b: 1.0, ..PresetParams::default() };
        let r = energy_report(PresetName::ProtonStatic, &other).unwrap();
        assert!(r.line("gap").unwrap().quoted.is_none());
    }

    #[test]
    fn waveguide_lines_have_no_energy() {
        let r = energy_report(PresetName::Waveguides, &PresetParams::default()).unwrap();
        let beat = r.line("beat").unwrap();
        assert_eq!(beat.unit, Unit::InverseMillimetre);
        assert!(beat.microelectronvolts.is_none());
        assert!((beat.value - 1.26).abs() < 1e-12);
    }

    #[test]
    fn driven_split_is_reported() {
        let p = PresetParams { g: 1e4, delta_c_frac: 0.06, ..PresetParams::default() };
        let r = energy_report(PresetName::CesiumClock, &p).unwrap();
        let split = r.line("split").unwrap();
        assert!(split.quoted.as_ref().unwrap().relative_difference.abs() < 0.02);
        assert!(r.line("quasi_p_low").is_some());
    }
}
