//! Harmonically driven two-state systems: rotating frame, rotating-wave
//! approximation, back-rotation, quasi-energies and Mollow sidebands.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat, C64};
use crate::spectrum::{dft, SpectralPeak};
use crate::trace::AmplitudeTrace;
use crate::two_state::{abcd_coefficients, solve_matrix, AbcdCoefficients, StateVector2, StaticSystem};

/// ω0·I + [[−ω_A/2, Ω_D cos ω_C t], [Ω_D* cos ω_C t, ω_A/2]].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveSystem {
    omega0: f64,
    omega_a: f64,
    omega_d: C64,
    omega_c: f64,
}

impl DriveSystem {
    pub fn new(omega0: f64, omega_a: f64, omega_d: C64, omega_c: f64) -> Result<Self> {
        for (name, v) in [
            ("omega0", omega0),
            ("omegaA", omega_a),
            ("OmegaD.re", omega_d.re),
            ("OmegaD.im", omega_d.im),
            ("omegaC", omega_c),
        ] {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(Self { omega0, omega_a, omega_d, omega_c })
    }

    /// Build from the detuning δ_C = ω_A − ω_C instead of the drive frequency.
    pub fn with_detuning(omega0: f64, omega_a: f64, omega_d: C64, delta_c: f64) -> Result<Self> {
        Self::new(omega0, omega_a, omega_d, omega_a - delta_c)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }
    pub fn omega_a(&self) -> f64 {
        self.omega_a
    }
    pub fn omega_d(&self) -> C64 {
        self.omega_d
    }
    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }
    pub fn delta_c(&self) -> f64 {
        self.omega_a - self.omega_c
    }

    /// √((δ_C/2)² + |Ω_D/2|²).
    pub fn omega_pt(&self) -> f64 {
        (0.5 * self.delta_c()).hypot(0.5 * self.omega_d.norm())
    }

    /// Generalized Rabi frequency of the driven system, 2·Ω_P,t.
    pub fn omega_gr(&self) -> f64 {
        2.0 * self.omega_pt()
    }

    /// Same system with every frequency divided by `scale`.
    pub fn rescaled(&self, scale: f64) -> Result<Self> {
        Self::new(self.omega0 / scale, self.omega_a / scale, self.omega_d / scale, self.omega_c / scale)
    }

    /// Lab-frame Hamiltonian without any approximation.
    pub fn lab_hamiltonian(&self, t: f64) -> Mat<2> {
        let drive = self.omega_d * (self.omega_c * t).cos();
        [
            [C64::new(self.omega0 - 0.5 * self.omega_a, 0.0), drive],
            [drive.conj(), C64::new(self.omega0 + 0.5 * self.omega_a, 0.0)],
        ]
    }
}

/// The rotating-frame Hamiltonian after dropping counter-rotating terms:
/// ω0·I + [[−δ_C/2, Ω_D/2], [Ω_D*/2, δ_C/2]].
pub fn rotate_rwa(sys: &DriveSystem) -> StaticSystem {
    let half = 0.5 * sys.omega_d;
    let phase = if half.norm() == 0.0 { 0.0 } else { -half.arg() };
    StaticSystem::new(sys.omega0, 0.5 * sys.delta_c(), half.norm(), phase)
        .expect("finite drive parameters give a finite static system")
}

/// Amplitudes in the rotating frame; the frame coincides with the lab at t = 0.
pub fn solve_rotating(sys: &DriveSystem, c0: &StateVector2, t: f64) -> StateVector2 {
    solve_matrix(&rotate_rwa(sys), c0, t)
}

/// Lab-frame amplitudes: rotating-frame solution followed by back-rotation.
pub fn solve_driven(sys: &DriveSystem, c0: &StateVector2, t: f64) -> StateVector2 {
    let x = solve_rotating(sys, c0, t);
    let half = C64::from_polar(1.0, 0.5 * sys.omega_c * t);
    StateVector2 { c1: x.c1 * half, c2: x.c2 * half.conj() }
}

/// The (A, B, C, D) constants of the rotated static system.
pub fn driven_abcd(sys: &DriveSystem, c0: &StateVector2) -> AbcdCoefficients {
    abcd_coefficients(&rotate_rwa(sys), c0)
}

/// Explicit two-exponential form with the back-rotation phases folded in.
pub fn solve_driven_abcd(sys: &DriveSystem, k: &AbcdCoefficients, t: f64) -> StateVector2 {
    let w = sys.omega_pt();
    let up = C64::from_polar(1.0, w * t);
    let down = up.conj();
    StateVector2 {
        c1: (k.a * up + k.b * down) * C64::from_polar(1.0, -(sys.omega0 - 0.5 * sys.omega_c) * t),
        c2: (k.c * up + k.d * down) * C64::from_polar(1.0, -(sys.omega0 + 0.5 * sys.omega_c) * t),
    }
}

/// Same amplitudes written term by term on the quasi-energy quartet.
pub fn solve_driven_quartet(sys: &DriveSystem, k: &AbcdCoefficients, t: f64) -> StateVector2 {
    let q = quasi_energies(sys);
    let ph = |w: f64| C64::from_polar(1.0, -w * t);
    StateVector2 {
        c1: k.a * ph(q.n_low) + k.b * ph(q.p_low),
        c2: k.c * ph(q.n_high) + k.d * ph(q.p_high),
    }
}

/// Phase speeds of the four terms of a driven stationary-state pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiEnergyQuartet {
    pub p_low: f64,
    pub p_high: f64,
    pub n_low: f64,
    pub n_high: f64,
}

impl QuasiEnergyQuartet {
    pub fn as_array(&self) -> [f64; 4] {
        [self.p_low, self.p_high, self.n_low, self.n_high]
    }
}

pub fn quasi_energies(sys: &DriveSystem) -> QuasiEnergyQuartet {
    let (w0, half_c, w) = (sys.omega0, 0.5 * sys.omega_c, sys.omega_pt());
    QuasiEnergyQuartet {
        p_low: w0 - half_c + w,
        p_high: w0 + half_c + w,
        n_low: w0 - half_c - w,
        n_high: w0 + half_c - w,
    }
}

/// The same four levels computed from the bare upper/lower energies
/// ω_a = ω0 + ω_A/2 and ω_b = ω0 − ω_A/2: returns (a+, a−, b+, b−).
pub fn bare_level_form(sys: &DriveSystem) -> [f64; 4] {
    let wa = sys.omega0 + 0.5 * sys.omega_a;
    let wb = sys.omega0 - 0.5 * sys.omega_a;
    let d = sys.delta_c();
    let w = sys.omega_pt();
    [wa - 0.5 * d + w, wa - 0.5 * d - w, wb + 0.5 * d + w, wb + 0.5 * d - w]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MollowTriplet {
    pub center: f64,
    pub red: f64,
    pub blue: f64,
}

pub fn mollow_positions(sys: &DriveSystem) -> MollowTriplet {
    let g = sys.omega_gr();
    MollowTriplet { center: sys.omega_c, red: sys.omega_c - g, blue: sys.omega_c + g }
}

/// Probabilities of the ±x superpositions (C1 ± C2)/√2, computed directly.
pub fn px_probabilities(sys: &DriveSystem, c0: &StateVector2, t: f64) -> (f64, f64) {
    let c = solve_driven(sys, c0, t);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (((c.c1 + c.c2) * s).norm_sqr(), ((c.c1 - c.c2) * s).norm_sqr())
}

/// Four-cosine closed form of the ±x probabilities. Requires real coefficients.
pub fn px_probabilities_closed_form(sys: &DriveSystem, c0: &StateVector2, t: f64) -> Result<(f64, f64)> {
    let k = driven_abcd(sys, c0);
    if !k.is_real(1e-12) {
        return Err(Error::Validation(
            "closed-form ±x probabilities need real A, B, C, D; use px_probabilities".into(),
        ));
    }
    let (a, b, c, d) = (k.a.re, k.b.re, k.c.re, k.d.re);
    let g = sys.omega_gr();
    let wc = sys.omega_c;
    let u1 = a * b + c * d;
    let u2 = a * c + b * d;
    let u3 = b * c;
    let u4 = a * d;
    let common = 0.5 + u1 * (g * t).cos();
    let signed = u2 * (wc * t).cos() + u3 * ((g - wc) * t).cos() + u4 * ((g + wc) * t).cos();
    Ok((common + signed, common - signed))
}

/// Peaks of the DFTs of C1(t) and C2(t), tagged by component.
pub fn quasi_energy_spectrum(trace: &AmplitudeTrace<2>) -> Result<Vec<SpectralPeak>> {
    let dt = trace.uniform_step()?;
    let mut peaks = Vec::new();
    for component in 0..2 {
        let spec = dft(&trace.component(component), dt);
        for (frequency, magnitude) in spec.peaks() {
            peaks.push(SpectralPeak { component, frequency, magnitude });
        }
    }
    Ok(peaks)
}

/// Frequency resolution of the spectrum of a trace.
pub fn spectrum_bin_width(trace: &AmplitudeTrace<2>) -> Result<f64> {
    let dt = trace.uniform_step()?;
    Ok(2.0 * std::f64::consts::PI / (trace.len() as f64 * dt))
}
