//! Time-independent two-state systems: both closed-form solutions, stationary
//! states, definite energies, average energy and modulation depth.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    adjoint, eig2_from_params, inner, matmul, matvec, mixing_angle, EigenSystem, HermitianMatrix, Mat, C64,
    ZERO,
};

/// Normalization tolerance for state vectors.
pub const NORM_TOL: f64 = 1e-12;

/// A normalized pair of probability amplitudes (C1, C2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector2 {
    pub c1: C64,
    pub c2: C64,
}

impl StateVector2 {
    /// Rejects states whose norm is off by more than 1e-12.
    pub fn new(c1: C64, c2: C64) -> Result<Self> {
        let s = Self { c1, c2 };
        let n = s.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!(
                "state is not normalized: |c1|^2+|c2|^2 = {n:.17e}"
            )));
        }
        Ok(s)
    }

    pub(crate) fn from_array_unchecked(v: [C64; 2]) -> Self {
        Self { c1: v[0], c2: v[1] }
    }

    pub fn as_array(&self) -> [C64; 2] {
        [self.c1, self.c2]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    pub fn probabilities(&self) -> (f64, f64) {
        (self.c1.norm_sqr(), self.c2.norm_sqr())
    }

    pub fn density_matrix(&self) -> DensityMatrix2 {
        DensityMatrix2::from_state(self)
    }
}

/// Stationary-state labelling of an eigenvector with real or complex components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Symm,
    Asym,
    Complex,
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symmetry::Symm => "Symm",
            Symmetry::Asym => "Asym",
            Symmetry::Complex => "complex",
        })
    }
}

/// Classify a vector after rotating away its global phase (first nonzero
/// component made real and non-negative).
pub fn classify<const N: usize>(v: &[C64; N]) -> Symmetry {
    const TOL: f64 = 1e-12;
    let lead = v.iter().find(|c| c.norm() > TOL).copied().unwrap_or(C64::new(1.0, 0.0));
    let fix = C64::from_polar(1.0, -lead.arg());
    let fixed: Vec<C64> = v.iter().map(|c| c * fix).collect();
    if fixed.iter().any(|c| c.im.abs() > TOL) {
        return Symmetry::Complex;
    }
    if fixed.iter().all(|c| c.re >= -TOL) {
        Symmetry::Symm
    } else {
        Symmetry::Asym
    }
}

/// The four-parameter time-independent two-state Hamiltonian
/// ω0·I + [[−ω11, |ωD|e^{−jφ}], [|ωD|e^{+jφ}, ω11]].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StaticSystem {
    omega0: f64,
    omega11: f64,
    omega_d_mag: f64,
    phi_d: f64,
    omega_p: f64,
    theta_r: f64,
    /// Eigensystem of the traceless part (eigenvalues ±Ω_P).
    eigen: EigenSystem<2>,
}

impl StaticSystem {
    pub fn new(omega0: f64, omega11: f64, omega_d_mag: f64, phi_d: f64) -> Result<Self> {
        for (name, v) in [("omega0", omega0), ("omega11", omega11), ("omegaD_mag", omega_d_mag), ("phiD", phi_d)] {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be finite, got {v}")));
            }
        }
        if omega_d_mag < 0.0 {
            return Err(Error::Validation(format!("omegaD_mag must be >= 0, got {omega_d_mag}")));
        }
        let eigen = eig2_from_params(0.0, omega11, omega_d_mag, phi_d);
        Ok(Self {
            omega0,
            omega11,
            omega_d_mag,
            phi_d,
            omega_p: omega11.hypot(omega_d_mag),
            theta_r: mixing_angle(omega11, omega_d_mag),
            eigen,
        })
    }

    /// Read the four parameters off an arbitrary 2x2 Hermitian matrix.
    pub fn from_hamiltonian(h: &HermitianMatrix<2>) -> Result<Self> {
        let e = h.entries();
        let lower = e[1][0];
        let phase = if lower.norm() == 0.0 { 0.0 } else { lower.arg() };
        Self::new(0.5 * (e[0][0].re + e[1][1].re), 0.5 * (e[1][1].re - e[0][0].re), lower.norm(), phase)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }
    pub fn omega11(&self) -> f64 {
        self.omega11
    }
    pub fn omega_d_mag(&self) -> f64 {
        self.omega_d_mag
    }
    pub fn phi_d(&self) -> f64 {
        self.phi_d
    }
    /// Ω_P = √(ω11² + |ωD|²).
    pub fn omega_p(&self) -> f64 {
        self.omega_p
    }
    /// Generalized Rabi frequency λ_P − λ_N = 2Ω_P.
    pub fn omega_gr(&self) -> f64 {
        2.0 * self.omega_p
    }
    pub fn theta_r(&self) -> f64 {
        self.theta_r
    }

    /// Full Hamiltonian including ω0.
    pub fn hamiltonian(&self) -> HermitianMatrix<2> {
        let off = C64::from_polar(self.omega_d_mag, -self.phi_d);
        HermitianMatrix::new([
            [C64::new(self.omega0 - self.omega11, 0.0), off],
            [off.conj(), C64::new(self.omega0 + self.omega11, 0.0)],
        ])
        .expect("finite parameters give a Hermitian matrix")
    }

    /// Eigensystem of the full Hamiltonian: values ω0 ± Ω_P, vectors ξ_P, ξ_N.
    pub fn eigensystem(&self) -> EigenSystem<2> {
        let mut es = self.eigen;
        es.values = [self.omega0 + self.omega_p, self.omega0 - self.omega_p];
        es
    }

    pub fn xi_p(&self) -> StateVector2 {
        StateVector2::from_array_unchecked(self.eigen.vector(0))
    }

    pub fn xi_n(&self) -> StateVector2 {
        StateVector2::from_array_unchecked(self.eigen.vector(1))
    }

    /// e^{−jHt}, valid for any (not necessarily normalized) amplitude pair.
    pub fn evolution_operator(&self, t: f64) -> Mat<2> {
        let mut u = self.eigen.propagator(t);
        let global = C64::from_polar(1.0, -self.omega0 * t);
        for c in u.iter_mut().flatten() {
            *c *= global;
        }
        u
    }
}

/// The constants (A, B, C, D) of the explicit two-exponential solution.
/// A and C ride on the N eigenvalue, B and D on the P eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbcdCoefficients {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl AbcdCoefficients {
    /// True when the state is the P eigenvector (A = C = 0) to `tol`.
    pub fn is_p_stationary(&self, tol: f64) -> bool {
        self.a.norm() <= tol && self.c.norm() <= tol
    }

    /// True when the state is the N eigenvector (B = D = 0) to `tol`.
    pub fn is_n_stationary(&self, tol: f64) -> bool {
        self.b.norm() <= tol && self.d.norm() <= tol
    }

    pub fn is_stationary(&self, tol: f64) -> bool {
        self.is_p_stationary(tol) || self.is_n_stationary(tol)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        [self.a, self.b, self.c, self.d].iter().all(|x| x.im.abs() <= tol)
    }
}

/// C(t) = e^{−jω0t} · Ξ · diag(e^{−jΩ_P t}, e^{+jΩ_P t}) · Ξ⁻¹ · C(0).
pub fn solve_matrix(sys: &StaticSystem, c0: &StateVector2, t: f64) -> StateVector2 {
    StateVector2::from_array_unchecked(matvec(&sys.evolution_operator(t), &c0.as_array()))
}

pub fn abcd_coefficients(sys: &StaticSystem, c0: &StateVector2) -> AbcdCoefficients {
    let (s, c) = sys.theta_r.sin_cos();
    let em = C64::from_polar(1.0, -sys.phi_d);
    let ep = em.conj();
    let (x1, x2) = (c0.c1, c0.c2);
    AbcdCoefficients {
        a: x1 * (c * c) - em * x2 * (c * s),
        b: x1 * (s * s) + em * x2 * (c * s),
        c: -ep * x1 * (c * s) + x2 * (s * s),
        d: ep * x1 * (c * s) + x2 * (c * c),
    }
}

/// C1(t) = [A e^{+jΩ_P t} + B e^{−jΩ_P t}] e^{−jω0t}, C2 likewise with C, D.
pub fn solve_abcd(sys: &StaticSystem, coeffs: &AbcdCoefficients, t: f64) -> StateVector2 {
    let up = C64::from_polar(1.0, sys.omega_p * t);
    let down = up.conj();
    let global = C64::from_polar(1.0, -sys.omega0 * t);
    StateVector2 {
        c1: (coeffs.a * up + coeffs.b * down) * global,
        c2: (coeffs.c * up + coeffs.d * down) * global,
    }
}

/// Occupation probabilities from the coefficients, general complex form.
pub fn probabilities(coeffs: &AbcdCoefficients, omega_p: f64, t: f64) -> (f64, f64) {
    let beat = C64::from_polar(1.0, 2.0 * omega_p * t);
    let p1 = coeffs.a.norm_sqr() + coeffs.b.norm_sqr() + 2.0 * (coeffs.a * coeffs.b.conj() * beat).re;
    let p2 = coeffs.c.norm_sqr() + coeffs.d.norm_sqr() + 2.0 * (coeffs.c * coeffs.d.conj() * beat).re;
    (p1, p2)
}

/// Real-coefficient simplification; only meaningful when all four are real.
pub fn probabilities_real(coeffs: &AbcdCoefficients, omega_p: f64, t: f64) -> (f64, f64) {
    let (a, b, c, d) = (coeffs.a.re, coeffs.b.re, coeffs.c.re, coeffs.d.re);
    let cos = (2.0 * omega_p * t).cos();
    (a * a + b * b + 2.0 * a * b * cos, c * c + d * d + 2.0 * c * d * cos)
}

/// (E_P, E_N) = (ω0 + Ω_P, ω0 − Ω_P).
pub fn definite_energies(sys: &StaticSystem) -> (f64, f64) {
    (sys.omega0 + sys.omega_p, sys.omega0 - sys.omega_p)
}

/// Eigenbasis amplitudes (D_P, D_N) = Ξ⁻¹·C. Works for any amplitude pair.
pub fn to_eigenbasis(sys: &StaticSystem, c: &StateVector2) -> StateVector2 {
    StateVector2::from_array_unchecked(matvec(&adjoint(&sys.eigen.vectors), &c.as_array()))
}

/// C = Ξ·D.
pub fn from_eigenbasis(sys: &StaticSystem, d: &StateVector2) -> StateVector2 {
    StateVector2::from_array_unchecked(matvec(&sys.eigen.vectors, &d.as_array()))
}

/// The four equivalent ways of computing ⟨E⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyRoute {
    /// |D_P|²·E_P + |D_N|²·E_N.
    Weighted,
    /// C†·H·C.
    Bracket,
    /// Expanded trace of ρ·H in the canonical basis.
    DensityCanonical,
    /// tr(ρ_ξ · Ξ†HΞ) in the eigenbasis.
    DensityEigen,
}

impl EnergyRoute {
    pub const ALL: [EnergyRoute; 4] =
        [EnergyRoute::Weighted, EnergyRoute::Bracket, EnergyRoute::DensityCanonical, EnergyRoute::DensityEigen];

    pub fn as_str(&self) -> &'static str {
        match self {
            EnergyRoute::Weighted => "weighted",
            EnergyRoute::Bracket => "bracket",
            EnergyRoute::DensityCanonical => "density_canonical",
            EnergyRoute::DensityEigen => "density_eigen",
        }
    }
}

impl FromStr for EnergyRoute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown energy route '{s}' (expected weighted, bracket, density_canonical or density_eigen)"
                ))
            })
    }
}

pub fn average_energy(sys: &StaticSystem, c0: &StateVector2, route: EnergyRoute) -> f64 {
    average_energy_at(sys, c0, route, 0.0)
}

/// ⟨E⟩ of the state evolved to time t. Constant in t.
pub fn average_energy_at(sys: &StaticSystem, c0: &StateVector2, route: EnergyRoute, t: f64) -> f64 {
    let c = solve_matrix(sys, c0, t);
    match route {
        EnergyRoute::Weighted => {
            let d = to_eigenbasis(sys, &c);
            let (ep, en) = definite_energies(sys);
            d.c1.norm_sqr() * ep + d.c2.norm_sqr() * en
        }
        EnergyRoute::Bracket => {
            let v = c.as_array();
            inner(&v, &sys.hamiltonian().apply(&v)).re
        }
        EnergyRoute::DensityCanonical => {
            let coupling = C64::from_polar(sys.omega_d_mag, sys.phi_d);
            c.c1.norm_sqr() * (sys.omega0 - sys.omega11)
                + c.c2.norm_sqr() * (sys.omega0 + sys.omega11)
                + 2.0 * (c.c1 * c.c2.conj() * coupling).re
        }
        EnergyRoute::DensityEigen => {
            let rho = to_eigenbasis(sys, &c).density_matrix();
            let xi = sys.eigen.vectors;
            let h_eig = matmul(&adjoint(&xi), &matmul(sys.hamiltonian().entries(), &xi));
            let prod = matmul(&rho.entries, &h_eig);
            (prod[0][0] + prod[1][1]).re
        }
    }
}

/// Largest population transferable out of a basis state, |ωD|²/(ω11²+|ωD|²).
pub fn modulation_depth(sys: &StaticSystem) -> f64 {
    let denom = sys.omega11 * sys.omega11 + sys.omega_d_mag * sys.omega_d_mag;
    if denom == 0.0 {
        0.0
    } else {
        sys.omega_d_mag * sys.omega_d_mag / denom
    }
}

/// Pure-state density matrix ρ = C·C†.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix2 {
    pub entries: Mat<2>,
}

impl DensityMatrix2 {
    pub fn from_state(s: &StateVector2) -> Self {
        let v = s.as_array();
        let mut entries = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                entries[i][j] = v[i] * v[j].conj();
            }
        }
        Self { entries }
    }

    pub fn trace(&self) -> f64 {
        (self.entries[0][0] + self.entries[1][1]).re
    }

    /// max |ρ² − ρ|.
    pub fn purity_defect(&self) -> f64 {
        crate::linalg::max_abs_diff(&matmul(&self.entries, &self.entries), &self.entries)
    }
}
