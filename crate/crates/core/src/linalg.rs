//! Small dense complex matrices and Hermitian eigensolvers (2x2 closed form,
//! 3x3 cyclic Jacobi) plus the propagator built from them.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Vector<const N: usize> = [C64; N];
/// Row-major square matrix.
pub type Mat<const N: usize> = [[C64; N]; N];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

const HERMITIAN_RTOL: f64 = 1e-14;
const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

pub fn identity<const N: usize>() -> Mat<N> {
    let mut m = [[ZERO; N]; N];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

pub fn matmul<const N: usize>(a: &Mat<N>, b: &Mat<N>) -> Mat<N> {
    let mut out = [[ZERO; N]; N];
    for i in 0..N {
        for j in 0..N {
            out[i][j] = (0..N).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn matvec<const N: usize>(a: &Mat<N>, v: &Vector<N>) -> Vector<N> {
    let mut out = [ZERO; N];
    for (o, row) in out.iter_mut().zip(a) {
        *o = row.iter().zip(v).map(|(x, y)| x * y).sum();
    }
    out
}

pub fn adjoint<const N: usize>(a: &Mat<N>) -> Mat<N> {
    let mut out = [[ZERO; N]; N];
    for i in 0..N {
        for j in 0..N {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

pub fn norm_sqr<const N: usize>(v: &Vector<N>) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// ⟨a|b⟩, conjugating the left argument.
pub fn inner<const N: usize>(a: &Vector<N>, b: &Vector<N>) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn max_abs_diff<const N: usize>(a: &Mat<N>, b: &Mat<N>) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_vec<const N: usize>(a: &Vector<N>, b: &Vector<N>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_abs<const N: usize>(a: &Mat<N>) -> f64 {
    a.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
}

/// A validated Hermitian matrix with finite entries (angular frequencies).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermitianMatrix<const N: usize> {
    entries: Mat<N>,
}

impl<const N: usize> HermitianMatrix<N> {
    pub fn new(entries: Mat<N>) -> Result<Self> {
        if entries.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Validation("matrix has non-finite entries".into()));
        }
        let scale = max_abs(&entries).max(f64::MIN_POSITIVE);
        for i in 0..N {
            for j in i..N {
                let mismatch = (entries[i][j] - entries[j][i].conj()).norm();
                if mismatch > HERMITIAN_RTOL * scale {
                    return Err(Error::Validation(format!(
                        "matrix is not Hermitian: entry ({i},{j}) differs from conj of ({j},{i}) by {mismatch:e}"
                    )));
                }
            }
        }
        // Snap to exact Hermitian form so downstream algebra sees a clean matrix.
        let mut clean = entries;
        for i in 0..N {
            clean[i][i] = C64::new(entries[i][i].re, 0.0);
            for j in (i + 1)..N {
                clean[j][i] = clean[i][j].conj();
            }
        }
        Ok(Self { entries: clean })
    }

    pub fn entries(&self) -> &Mat<N> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..N).map(|i| self.entries[i][i].re).sum()
    }

    pub fn apply(&self, v: &Vector<N>) -> Vector<N> {
        matvec(&self.entries, v)
    }
}

/// Eigenvalues sorted descending, eigenvectors stored as the matching columns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenSystem<const N: usize> {
    pub values: [f64; N],
    /// `vectors[i][k]` is component `i` of eigenvector `k`.
    pub vectors: Mat<N>,
}

impl<const N: usize> EigenSystem<N> {
    pub fn vector(&self, k: usize) -> Vector<N> {
        let mut v = [ZERO; N];
        for (i, c) in v.iter_mut().enumerate() {
            *c = self.vectors[i][k];
        }
        v
    }

    /// Ξ · diag(e^{-jλt}) · Ξ†.
    pub fn propagator(&self, t: f64) -> Mat<N> {
        let mut scaled = self.vectors;
        for row in scaled.iter_mut() {
            for (k, c) in row.iter_mut().enumerate() {
                *c *= C64::from_polar(1.0, -self.values[k] * t);
            }
        }
        matmul(&scaled, &adjoint(&self.vectors))
    }

    /// Ξ · Λ · Ξ†, for reconstruction checks.
    pub fn reconstruct(&self) -> Mat<N> {
        let mut scaled = self.vectors;
        for row in scaled.iter_mut() {
            for (k, c) in row.iter_mut().enumerate() {
                *c *= self.values[k];
            }
        }
        matmul(&scaled, &adjoint(&self.vectors))
    }
}

/// Mixing angle of a two-level coupling, in [0, π/2].
///
/// `omega11` follows the convention H[0][0] = mean − ω11, H[1][1] = mean + ω11.
/// Zero coupling and zero splitting both give 0.
pub fn mixing_angle(omega11: f64, coupling_mag: f64) -> f64 {
    let omega_p = omega11.hypot(coupling_mag);
    if omega_p == 0.0 {
        return 0.0;
    }
    0.5 * (omega11 / omega_p).clamp(-1.0, 1.0).acos()
}

/// Closed-form eigensystem of mean·I + [[−ω11, m·e^{−jφ}], [m·e^{+jφ}, ω11]].
pub fn eig2_from_params(mean: f64, omega11: f64, coupling_mag: f64, phase: f64) -> EigenSystem<2> {
    let omega_p = omega11.hypot(coupling_mag);
    let theta = mixing_angle(omega11, coupling_mag);
    let (s, c) = theta.sin_cos();
    let rot = C64::from_polar(1.0, phase);
    // columns: P = (s, c·e^{jφ}), N = (c, −s·e^{jφ})
    EigenSystem {
        values: [mean + omega_p, mean - omega_p],
        vectors: [[C64::new(s, 0.0), C64::new(c, 0.0)], [rot * c, -rot * s]],
    }
}

pub fn eig2_hermitian(h: &HermitianMatrix<2>) -> EigenSystem<2> {
    let e = h.entries();
    let mean = 0.5 * (e[0][0].re + e[1][1].re);
    let omega11 = 0.5 * (e[1][1].re - e[0][0].re);
    let lower = e[1][0];
    let mag = lower.norm();
    let phase = if mag == 0.0 { 0.0 } else { lower.arg() };
    eig2_from_params(mean, omega11, mag, phase)
}

/// Cyclic complex Jacobi. Converged once every off-diagonal magnitude is
/// below 1e-13 of the largest diagonal magnitude.
pub fn eig3_hermitian(h: &HermitianMatrix<3>) -> Result<EigenSystem<3>> {
    jacobi(h)
}

fn jacobi<const N: usize>(h: &HermitianMatrix<N>) -> Result<EigenSystem<N>> {
    let mut a = *h.entries();
    let mut v: Mat<N> = identity();
    let frob = a.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>().sqrt();

    let converged = |a: &Mat<N>| {
        let diag = (0..N).map(|i| a[i][i].norm()).fold(0.0, f64::max);
        let scale = if diag > 0.0 { diag } else { frob };
        let off = (0..N)
            .flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j].norm())
            .fold(0.0, f64::max);
        off <= JACOBI_TOL * scale
    };

    let mut sweeps = 0;
    while !converged(&a) {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Convergence(format!(
                "Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps"
            )));
        }
        sweeps += 1;
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[p][q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                // Phase the q axis so the pair coupling becomes real, then rotate.
                let phase = C64::from_polar(1.0, -apq.arg());
                let tau = (a[q][q].re - a[p][p].re) / (2.0 * mag);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let mut j: Mat<N> = identity();
                j[p][p] = C64::new(c, 0.0);
                j[p][q] = C64::new(s, 0.0);
                j[q][p] = phase * (-s);
                j[q][q] = phase * c;
                a = matmul(&adjoint(&j), &matmul(&a, &j));
                a[p][q] = ZERO;
                a[q][p] = ZERO;
                v = matmul(&v, &j);
            }
        }
    }

    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&x, &y| a[y][y].re.total_cmp(&a[x][x].re));
    let mut values = [0.0; N];
    let mut vectors = [[ZERO; N]; N];
    for (k, &src) in order.iter().enumerate() {
        values[k] = a[src][src].re;
        let lead = (0..N)
            .map(|i| v[i][src])
            .find(|c| c.norm() > 1e-13)
            .unwrap_or(ONE);
        let fix = C64::from_polar(1.0, -lead.arg());
        for i in 0..N {
            vectors[i][k] = v[i][src] * fix;
        }
    }
    Ok(EigenSystem { values, vectors })
}

/// Anything with a Hermitian eigensystem of fixed size.
pub trait Diagonalize<const N: usize> {
    fn eigensystem(&self) -> Result<EigenSystem<N>>;
}

impl Diagonalize<2> for HermitianMatrix<2> {
    fn eigensystem(&self) -> Result<EigenSystem<2>> {
        Ok(eig2_hermitian(self))
    }
}

impl Diagonalize<3> for HermitianMatrix<3> {
    fn eigensystem(&self) -> Result<EigenSystem<3>> {
        eig3_hermitian(self)
    }
}

/// U(t) = e^{-jHt}.
pub fn propagator<const N: usize>(h: &HermitianMatrix<N>, t: f64) -> Result<Mat<N>>
where
    HermitianMatrix<N>: Diagonalize<N>,
{
    if !t.is_finite() {
        return Err(Error::Validation(format!("time must be finite, got {t}")));
    }
    Ok(h.eigensystem()?.propagator(t))
}
