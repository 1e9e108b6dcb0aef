//! Concrete physical systems and unit conversion for energy reports.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::driven::DriveSystem;
use crate::error::{Error, Result};
use crate::linalg::{adjoint, matmul, matvec, Mat, Vector, C64};
use crate::two_state::StaticSystem;

/// Reduced Planck constant in eV·s, used only when reporting energies.
pub const HBAR_EV_S: f64 = 6.582119569e-16;
/// Reduced Planck constant in J·s.
pub const HBAR_J_S: f64 = 1.054571817e-34;
/// Proton factor (rad s⁻¹ T⁻¹) multiplying the field to give the level offset.
pub const GAMMA_P: f64 = 2.67e8;
/// Ammonia permanent electric dipole moment (C·m).
pub const AMMONIA_DIPOLE: f64 = 4.9098e-30;
/// Half the ammonia inversion splitting, ½·2π·23.786 GHz.
pub const AMMONIA_TUNNELING: f64 = 0.5 * 2.0 * PI * 23.786e9;
/// Ammonia coupling to a typical microwave field (rad/s).
pub const AMMONIA_DRIVE: f64 = 2.82e3;
/// Static-field coupling per unit field (rad s⁻¹ per V/m): 2.82e3 rad/s at 2.36e-2 V/m.
pub const AMMONIA_FIELD_COUPLING: f64 = 2.82e3 / 2.36e-2;
/// Cesium ground hyperfine splitting, 2π·9.192631770 GHz.
pub const CESIUM_SPLITTING: f64 = 2.0 * PI * 9.192631770e9;
/// Cesium Rabi frequency at typical microwave power (rad/s).
pub const CESIUM_TYPICAL_RABI: f64 = 2.0 * PI * 5e4;

/// Vacuum wavelength of the waveguide example (mm).
pub const WAVEGUIDE_WAVELENGTH_MM: f64 = 0.8e-3;
/// Effective index of the reference waveguide.
pub const WAVEGUIDE_INDEX: f64 = 1.5018;
pub const WAVEGUIDE_K_EQUAL: f64 = 0.63;
pub const WAVEGUIDE_K_UNEQUAL: f64 = 0.71;
/// Half the propagation-constant mismatch of the unequal pair (mm⁻¹), chosen
/// so that with K = 0.71 the level gap is the reported 2.5 mm⁻¹.
pub const WAVEGUIDE_DELTA_BETA_UNEQUAL: f64 = 1.03;

/// ħ·ω expressed in µeV.
pub fn to_microelectronvolts(omega: f64) -> f64 {
    HBAR_EV_S * omega * 1e6
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} must be positive, got {v}")))
    }
}

fn require_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} must be finite, got {v}")))
    }
}

/// Proton in a constant field along z: diagonal, no coupling.
pub fn proton_static(b: f64) -> Result<StaticSystem> {
    require_positive("B", b)?;
    StaticSystem::new(0.0, GAMMA_P * b, 0.0, 0.0)
}

/// Free ammonia: degenerate wells coupled by tunnelling with a π phase.
pub fn free_ammonia(omega0: f64) -> Result<StaticSystem> {
    require_finite("omega0", omega0)?;
    StaticSystem::new(omega0, 0.0, AMMONIA_TUNNELING, PI)
}

/// Static-field dipole frequency from the bare moment, μ·E0/ħ.
pub fn dipole_frequency_from_moment(e0: f64) -> f64 {
    AMMONIA_DIPOLE * e0 / HBAR_J_S
}

/// Static-field coupling used by [`ammonia_static_field`].
pub fn ammonia_field_frequency(e0: f64) -> f64 {
    AMMONIA_FIELD_COUPLING * e0
}

/// Ammonia in a constant electric field: the field shifts the first well
/// up by ω_E, so the stored offset is −ω_E.
pub fn ammonia_static_field(e0: f64, omega0: f64) -> Result<StaticSystem> {
    if !(e0.is_finite() && e0 >= 0.0) {
        return Err(Error::Validation(format!("E0 must be >= 0, got {e0}")));
    }
    require_finite("omega0", omega0)?;
    StaticSystem::new(omega0, -ammonia_field_frequency(e0), AMMONIA_TUNNELING, PI)
}

/// Two evanescently coupled waveguides; `z` plays the role of time and the
/// amplitudes evolve as dA/dz = +j·H·A.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveguideSystem {
    pub beta_l: f64,
    pub beta_r: f64,
    pub k_eff: f64,
}

impl WaveguideSystem {
    pub fn new(beta_l: f64, beta_r: f64, k_eff: f64) -> Result<Self> {
        require_finite("betaL", beta_l)?;
        require_finite("betaR", beta_r)?;
        require_positive("Keff", k_eff)?;
        if beta_r < beta_l {
            return Err(Error::Validation(format!(
                "betaR must be >= betaL (got betaL={beta_l}, betaR={beta_r}); swap the guides"
            )));
        }
        Ok(Self { beta_l, beta_r, k_eff })
    }

    pub fn beta_avg(&self) -> f64 {
        0.5 * (self.beta_l + self.beta_r)
    }

    pub fn delta_beta(&self) -> f64 {
        0.5 * (self.beta_r - self.beta_l)
    }

    pub fn omega_p(&self) -> f64 {
        self.delta_beta().hypot(self.k_eff)
    }

    /// Spatial beat frequency, the gap between the two supermode constants.
    pub fn omega_gr(&self) -> f64 {
        2.0 * self.omega_p()
    }

    /// (K_P, K_N) = β_avg ± Ω_P.
    pub fn levels(&self) -> (f64, f64) {
        (self.beta_avg() + self.omega_p(), self.beta_avg() - self.omega_p())
    }

    pub fn as_static(&self) -> StaticSystem {
        StaticSystem::new(self.beta_avg(), self.delta_beta(), self.k_eff, 0.0).expect("validated parameters")
    }

    /// Field amplitudes at distance z (mm). Powers need not be normalized.
    pub fn evolve(&self, a0: &Vector<2>, z: f64) -> Vector<2> {
        matvec(&self.as_static().evolution_operator(-z), a0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveguidePair {
    Equal,
    Unequal,
}

impl FromStr for WaveguidePair {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" => Ok(Self::Equal),
            "unequal" => Ok(Self::Unequal),
            _ => Err(Error::Usage(format!("unknown waveguide pair '{s}' (expected equal or unequal)"))),
        }
    }
}

pub fn waveguide_beta() -> f64 {
    2.0 * PI * WAVEGUIDE_INDEX / WAVEGUIDE_WAVELENGTH_MM
}

pub fn waveguides(pair: WaveguidePair) -> WaveguideSystem {
    let beta = waveguide_beta();
    match pair {
        WaveguidePair::Equal => WaveguideSystem::new(beta, beta, WAVEGUIDE_K_EQUAL),
        WaveguidePair::Unequal => WaveguideSystem::new(
            beta - WAVEGUIDE_DELTA_BETA_UNEQUAL,
            beta + WAVEGUIDE_DELTA_BETA_UNEQUAL,
            WAVEGUIDE_K_UNEQUAL,
        ),
    }
    .expect("fixed parameters are valid")
}

/// Proton with a static field B_z and a transverse oscillating field B_x
/// amplified by G. Only the co-rotating half of the linear drive couples.
pub fn driven_proton(b_z: f64, b_x: f64, g: f64, delta_c_frac: f64) -> Result<DriveSystem> {
    require_positive("Bz", b_z)?;
    require_positive("Bx", b_x)?;
    require_positive("G", g)?;
    require_finite("deltaC_frac", delta_c_frac)?;
    let omega_a = 2.0 * GAMMA_P * b_z;
    DriveSystem::with_detuning(0.0, omega_a, C64::new(-0.5 * GAMMA_P * g * b_x, 0.0), delta_c_frac * omega_a)
}

pub fn cesium_clock(g: f64, delta_c_frac: f64) -> Result<DriveSystem> {
    require_positive("G", g)?;
    require_finite("deltaC_frac", delta_c_frac)?;
    DriveSystem::with_detuning(
        0.0,
        CESIUM_SPLITTING,
        C64::new(g * CESIUM_TYPICAL_RABI, 0.0),
        delta_c_frac * CESIUM_SPLITTING,
    )
}

/// Which drive amplitude to attribute to the ammonia molecule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmmoniaReading {
    /// Amplitude obtained by transforming the well-basis Hamiltonian, G·ω_D.
    Direct,
    /// Twice that, 2·G·ω_D.
    Doubled,
}

impl FromStr for AmmoniaReading {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Self::Direct),
            "doubled" => Ok(Self::Doubled),
            _ => Err(Error::Usage(format!("unknown ammonia reading '{s}' (expected direct or doubled)"))),
        }
    }
}

/// Columns are the symmetric and antisymmetric well combinations, in that
/// order. The matrix is its own inverse.
pub fn ammonia_eta() -> Mat<2> {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    [[s, s], [s, -s]]
}

/// Well-basis (left/right) ammonia Hamiltonian with the field acting on the
/// diagonal: ω0·I + [[−Gω_D cos ω_C t, −ω_A/2], [−ω_A/2, Gω_D cos ω_C t]].
pub fn ammonia_well_hamiltonian(g: f64, omega0: f64, omega_c: f64, t: f64) -> Mat<2> {
    let drive = g * AMMONIA_DRIVE * (omega_c * t).cos();
    let omega_a = 2.0 * AMMONIA_TUNNELING;
    [
        [C64::new(omega0 - drive, 0.0), C64::new(-0.5 * omega_a, 0.0)],
        [C64::new(-0.5 * omega_a, 0.0), C64::new(omega0 + drive, 0.0)],
    ]
}

/// Driven ammonia read off in the symmetric/antisymmetric basis.
pub fn driven_ammonia(g: f64, delta_c_frac: f64, omega0: f64, reading: AmmoniaReading) -> Result<DriveSystem> {
    require_positive("G", g)?;
    require_finite("deltaC_frac", delta_c_frac)?;
    require_finite("omega0", omega0)?;
    let eta = ammonia_eta();
    let to_eta = |m: &Mat<2>| matmul(&adjoint(&eta), &matmul(m, &eta));
    // split into the undriven part and the drive amplitude (cos = 1) before
    // transforming, so the small drive is not lost against ω_A
    let well_static = ammonia_well_hamiltonian(0.0, omega0, 0.0, 0.0);
    let well_full = ammonia_well_hamiltonian(g, omega0, 0.0, 0.0);
    let mut well_drive = well_full;
    for (row, base) in well_drive.iter_mut().zip(&well_static) {
        for (x, b) in row.iter_mut().zip(base) {
            *x -= b;
        }
    }
    let h_static = to_eta(&well_static);
    let omega_a = h_static[1][1].re - h_static[0][0].re;
    let mut omega_d = to_eta(&well_drive)[0][1];
    if reading == AmmoniaReading::Doubled {
        omega_d *= 2.0;
    }
    DriveSystem::with_detuning(omega0, omega_a, omega_d, delta_c_frac * omega_a)
}

/// Stable preset identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetName {
    ProtonStatic,
    AmmoniaFree,
    AmmoniaDc,
    Waveguides,
    ProtonDriven,
    CesiumClock,
    AmmoniaDriven,
}

impl PresetName {
    pub const ALL: [PresetName; 7] = [
        PresetName::ProtonStatic,
        PresetName::AmmoniaFree,
        PresetName::AmmoniaDc,
        PresetName::Waveguides,
        PresetName::ProtonDriven,
        PresetName::CesiumClock,
        PresetName::AmmoniaDriven,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PresetName::ProtonStatic => "proton-static",
            PresetName::AmmoniaFree => "ammonia-free",
            PresetName::AmmoniaDc => "ammonia-dc",
            PresetName::Waveguides => "waveguides",
            PresetName::ProtonDriven => "proton-driven",
            PresetName::CesiumClock => "cesium-clock",
            PresetName::AmmoniaDriven => "ammonia-driven",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|p| p.as_str()).collect();
            Error::Usage(format!("unknown preset '{s}'; valid presets: {}", names.join(", ")))
        })
    }
}

/// Tunable parameters shared by all presets; each preset reads the ones it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PresetParams {
    /// Static field for `proton-static` (T).
    pub b: f64,
    pub b_z: f64,
    pub b_x: f64,
    /// Field amplification factor.
    pub g: f64,
    /// Drive detuning as a fraction of the transition frequency.
    pub delta_c_frac: f64,
    pub omega0: f64,
    /// Static electric field for `ammonia-dc` (V/m).
    pub e0: f64,
    pub pair: WaveguidePair,
    pub reading: AmmoniaReading,
}

impl Default for PresetParams {
    fn default() -> Self {
        Self {
            b: 3.0,
            b_z: 3.0,
            b_x: 3e-6,
            g: 1.0,
            delta_c_frac: 0.0,
            omega0: 0.0,
            e0: 2.36e-2,
            pair: WaveguidePair::Equal,
            reading: AmmoniaReading::Direct,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Preset {
    Static(StaticSystem),
    Waveguide(WaveguideSystem),
    Driven(DriveSystem),
}

pub fn build(name: PresetName, p: &PresetParams) -> Result<Preset> {
    Ok(match name {
        PresetName::ProtonStatic => Preset::Static(proton_static(p.b)?),
        PresetName::AmmoniaFree => Preset::Static(free_ammonia(p.omega0)?),
        PresetName::AmmoniaDc => Preset::Static(ammonia_static_field(p.e0, p.omega0)?),
        PresetName::Waveguides => Preset::Waveguide(waveguides(p.pair)),
        PresetName::ProtonDriven => Preset::Driven(driven_proton(p.b_z, p.b_x, p.g, p.delta_c_frac)?),
        PresetName::CesiumClock => Preset::Driven(cesium_clock(p.g, p.delta_c_frac)?),
        PresetName::AmmoniaDriven => Preset::Driven(driven_ammonia(p.g, p.delta_c_frac, p.omega0, p.reading)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs_diff, norm_sqr, ONE, ZERO};
    use crate::two_state::{classify, definite_energies, modulation_depth, Symmetry};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn unit_conversion() {
        assert!(rel(to_microelectronvolts(1.6e9), 1.0531) < 1e-3);
        assert!(rel(to_microelectronvolts(2.0 * PI * 23.786e9), 98.37) < 1e-3);
        assert_eq!(to_microelectronvolts(0.0), 0.0);
    }

    #[test]
    fn proton_levels() {
        let sys = proton_static(3.0).unwrap();
        assert!(rel(sys.omega11(), 8.01e8) < 1e-12);
        let (ep, en) = definite_energies(&sys);
        assert_eq!(ep, -en);
        assert!(rel(to_microelectronvolts(ep - en), 1.056) < 0.01);
        assert!(proton_static(0.0).is_err());
        // precession period 2π/(2ω) ≈ 4 ns
        let period = 2.0 * PI / sys.omega_gr();
        assert!((period - 3.9e-9).abs() < 0.2e-9);
    }

    #[test]
    fn ammonia_eigenvectors_and_period() {
        let sys = free_ammonia(0.0).unwrap();
        assert_eq!(classify(&sys.xi_p().as_array()), Symmetry::Asym);
        assert_eq!(classify(&sys.xi_n().as_array()), Symmetry::Symm);
        assert!(rel(to_microelectronvolts(sys.omega_gr()), 98.4) < 0.01);
        let period = 2.0 * PI / sys.omega_gr();
        assert!((period - 42e-12).abs() < 1e-12);
    }

    #[test]
    fn ammonia_static_field_limits() {
        assert!(rel(ammonia_field_frequency(2.36e-2), 2.82e3) < 1e-12);
        let zero = ammonia_static_field(0.0, 5.0).unwrap();
        let free = free_ammonia(5.0).unwrap();
        assert_eq!(zero.omega_p(), free.omega_p());
        assert_eq!(zero.theta_r(), free.theta_r());
        let sys = ammonia_static_field(2.36e-2, 0.0).unwrap();
        assert!(sys.omega_gr() > free.omega_gr());
        assert!(rel(sys.omega_gr(), free.omega_gr()) < 1e-12);
        assert!(sys.hamiltonian().entries()[0][0].re > 0.0);
    }

    #[test]
    fn waveguide_power_and_transfer() {
        let eq = waveguides(WaveguidePair::Equal);
        assert!((eq.omega_gr() - 1.26).abs() < 1e-12);
        let a0 = [ONE, ZERO];
        let beat = 2.0 * PI / eq.omega_gr();
        let half = eq.evolve(&a0, beat / 2.0);
        assert!((half[1].norm_sqr() - 1.0).abs() < 1e-9);
        assert!((modulation_depth(&eq.as_static()) - 1.0).abs() < 1e-15);

        let uneq = waveguides(WaveguidePair::Unequal);
        assert!((uneq.omega_gr() - 2.5).abs() < 0.01);
        assert!(modulation_depth(&uneq.as_static()) < 1.0);
        assert!(2.0 * PI / uneq.omega_gr() < beat);
        let a0 = [C64::new(3.0, 0.0), C64::new(0.0, 1.0)];
        for k in 0..=100 {
            let z = k as f64 * 2.0 * PI / uneq.omega_gr();
            assert!((norm_sqr(&uneq.evolve(&a0, z)) - 10.0).abs() < 1e-12 * 10.0);
        }
        assert!(WaveguideSystem::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn waveguide_sign_is_opposite_to_quantum() {
        let wg = WaveguideSystem::new(1.0, 1.0, 0.5).unwrap();
        let z = 0.3;
        let a = wg.evolve(&[ONE, ZERO], z);
        // dA/dz = +jHA at small z: A ≈ (1 + jβz, jKz)
        let h = 1e-7;
        let b = wg.evolve(&[ONE, ZERO], h);
        assert!((b[1] - C64::new(0.0, 0.5 * h)).norm() < 1e-12);
        assert!(a[0].norm() < 1.0);
    }

    #[test]
    fn driven_proton_numbers() {
        let sys = driven_proton(3.0, 3e-6, 2e5, 0.06).unwrap();
        assert!(rel(sys.omega_a(), 16.02e8) < 1e-12);
        assert!(rel(sys.omega_d().norm(), 0.801e8) < 1e-12);
        assert!(rel(sys.omega_c(), 15.06e8) < 1e-3);
        assert!(rel(sys.omega_gr(), 1.25e8) < 0.01);
    }

    #[test]
    fn cesium_numbers() {
        let sys = cesium_clock(1e4, 0.06).unwrap();
        assert!(rel(sys.delta_c(), 3.4655e9) < 1e-3);
        assert!(rel(sys.omega_gr(), 4.68e9) < 1e-3);
        let typical = cesium_clock(1.0, 0.0).unwrap();
        assert!(rel(to_microelectronvolts(typical.omega_gr()), 2.07e-4) < 0.01);
        assert!(rel(to_microelectronvolts(typical.omega_a()), 38.0) < 0.01);
    }

    #[test]
    fn ammonia_preparation() {
        let eta = ammonia_eta();
        assert!(max_abs_diff(&matmul(&eta, &eta), &identity()) < 1e-15);
        let direct = driven_ammonia(3.0, 0.0, 0.0, AmmoniaReading::Direct).unwrap();
        assert!(rel(direct.omega_d().norm(), 3.0 * AMMONIA_DRIVE) < 1e-12);
        assert!(rel(direct.omega_a(), 2.0 * AMMONIA_TUNNELING) < 1e-12);
        let doubled = driven_ammonia(3.0, 0.0, 0.0, AmmoniaReading::Doubled).unwrap();
        assert!(rel(doubled.omega_d().norm(), 6.0 * AMMONIA_DRIVE) < 1e-12);
    }

    #[test]
    fn preset_names_round_trip() {
        for p in PresetName::ALL {
            assert_eq!(p.as_str().parse::<PresetName>().unwrap(), p);
            assert!(build(p, &PresetParams::default()).is_ok());
        }
        let err = "hydrogen".parse::<PresetName>().unwrap_err();
        assert!(err.to_string().contains("cesium-clock"));
    }
}
