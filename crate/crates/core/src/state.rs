//! Density matrices of dimension 2 and 3, the two-level Bloch vector and
//! the validity diagnostics the rest of the crate checks against.
//!
//! Level indices are 1-based in the physics and 0-based in storage, so
//! `rho[(0, 1)]` is ρ₁₂.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum |ρ_jk − conj(ρ_kj)| accepted as Hermitian on input.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Maximum |tr ρ − 1| after an evolution step.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted as positive semidefinite.
pub const MIN_EIGENVALUE_TOL: f64 = -1e-9;
/// Slack on |R| ≤ 1.
pub const BLOCH_NORM_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A `D × D` complex matrix used as a density operator. Only `D = 2` and
/// `D = 3` are supported; other sizes fail to compile when constructed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix<const D: usize> {
    entries: [[Complex64; D]; D],
}

pub type Density2 = DensityMatrix<2>;
pub type Density3 = DensityMatrix<3>;

impl<const D: usize> DensityMatrix<D> {
    const SUPPORTED: () = assert!(D == 2 || D == 3, "only dimensions 2 and 3 are supported");

    pub fn from_entries(entries: [[Complex64; D]; D]) -> Self {
        #[allow(clippy::let_unit_value)]
        let _ = Self::SUPPORTED;
        Self { entries }
    }

    pub fn zeros() -> Self {
        Self::from_entries([[ZERO; D]; D])
    }

    /// Diagonal matrix with the given real populations.
    pub fn diagonal(populations: [f64; D]) -> Self {
        let mut m = Self::zeros();
        for (j, p) in populations.iter().enumerate() {
            m.entries[j][j] = Complex64::new(*p, 0.0);
        }
        m
    }

    /// The pure state |level⟩⟨level| with `level` counted from 1.
    pub fn basis(level: usize) -> Self {
        assert!(
            (1..=D).contains(&level),
            "level {level} out of range 1..={D}"
        );
        let mut m = Self::zeros();
        m.entries[level - 1][level - 1] = Complex64::new(1.0, 0.0);
        m
    }

    pub const fn dim(&self) -> usize {
        D
    }

    pub fn entries(&self) -> &[[Complex64; D]; D] {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        (0..D).map(|j| self.entries[j][j]).sum()
    }

    /// Real parts of the diagonal.
    pub fn populations(&self) -> [f64; D] {
        let mut p = [0.0; D];
        for (j, pj) in p.iter_mut().enumerate() {
            *pj = self.entries[j][j].re;
        }
        p
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for j in 0..D {
            for k in 0..D {
                m.entries[j][k] = self.entries[k][j].conj();
            }
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let mut m = Self::zeros();
        for j in 0..D {
            for k in 0..D {
                m.entries[j][k] = (0..D)
                    .map(|l| self.entries[j][l] * other.entries[l][k])
                    .sum();
            }
        }
        m
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut m = *self;
        m.entries.iter_mut().flatten().for_each(|z| *z *= factor);
        m
    }

    /// max_{j,k} |ρ_jk − conj(ρ_kj)|
    pub fn hermiticity_residue(&self) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..D {
            for k in j..D {
                worst = worst.max((self.entries[j][k] - self.entries[k][j].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part of the matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = self.hermitian_part();
        match D {
            2 => min_eigenvalue_2(&h.entries[0][0], &h.entries[0][1], &h.entries[1][1]),
            3 => {
                let e = &h.entries;
                min_eigenvalue_3([
                    [e[0][0], e[0][1], e[0][2]],
                    [e[1][0], e[1][1], e[1][2]],
                    [e[2][0], e[2][1], e[2][2]],
                ])
            }
            _ => unreachable!(),
        }
    }

    fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        let mut m = Self::zeros();
        for j in 0..D {
            for k in 0..D {
                m.entries[j][k] = (self.entries[j][k] + adj.entries[j][k]) * 0.5;
            }
        }
        m
    }
}

impl<const D: usize> Index<(usize, usize)> for DensityMatrix<D> {
    type Output = Complex64;

    fn index(&self, (j, k): (usize, usize)) -> &Complex64 {
        &self.entries[j][k]
    }
}

impl<const D: usize> IndexMut<(usize, usize)> for DensityMatrix<D> {
    fn index_mut(&mut self, (j, k): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[j][k]
    }
}

impl<const D: usize> Add for DensityMatrix<D> {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self
            .entries
            .iter_mut()
            .flatten()
            .zip(rhs.entries.iter().flatten())
        {
            *a += b;
        }
        self
    }
}

impl<const D: usize> Sub for DensityMatrix<D> {
    type Output = Self;

    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self
            .entries
            .iter_mut()
            .flatten()
            .zip(rhs.entries.iter().flatten())
        {
            *a -= b;
        }
        self
    }
}

impl<const D: usize> Mul<f64> for DensityMatrix<D> {
    type Output = Self;

    fn mul(mut self, rhs: f64) -> Self {
        self.entries.iter_mut().flatten().for_each(|z| *z *= rhs);
        self
    }
}

fn min_eigenvalue_2(a: &Complex64, b: &Complex64, d: &Complex64) -> f64 {
    let (a, d) = (a.re, d.re);
    let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    0.5 * (a + d) - half_gap
}

/// Smallest eigenvalue of a Hermitian 3 × 3 matrix. `H = A + iB` is
/// embedded as the real symmetric `[[A, −B], [B, A]]`, whose spectrum is
/// that of `H` with every eigenvalue doubled, and diagonalized by cyclic
/// Jacobi rotations. Backward stable, so nearly pure states keep their
/// zero eigenvalues to rounding precision.
fn min_eigenvalue_3(m: [[Complex64; 3]; 3]) -> f64 {
    let mut a = [[0.0_f64; 6]; 6];
    for j in 0..3 {
        for k in 0..3 {
            a[j][k] = m[j][k].re;
            a[j + 3][k + 3] = m[j][k].re;
            a[j][k + 3] = -m[j][k].im;
            a[j + 3][k] = m[j][k].im;
        }
    }
    jacobi_eigenvalues(&mut a)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

#[allow(clippy::needless_range_loop)]
fn jacobi_eigenvalues<const N: usize>(a: &mut [[f64; N]; N]) -> [f64; N] {
    for _sweep in 0..50 {
        let off: f64 = (0..N)
            .flat_map(|p| ((p + 1)..N).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        let scale: f64 = (0..N).map(|p| a[p][p] * a[p][p]).sum::<f64>() + off;
        if off <= f64::EPSILON * f64::EPSILON * scale || off == 0.0 {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig = [0.0; N];
    for (j, e) in eig.iter_mut().enumerate() {
        *e = a[j][j];
    }
    eig
}

/// Residues reported by [`validate_density`]. Pass/fail is left to the caller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub hermiticity_residue: f64,
    pub trace_residue: f64,
    pub min_eigenvalue: f64,
}

impl Diagnostics {
    pub fn within(&self, hermiticity: f64, trace: f64, min_eigenvalue: f64) -> bool {
        self.hermiticity_residue <= hermiticity
            && self.trace_residue <= trace
            && self.min_eigenvalue >= min_eigenvalue
    }
}

impl std::fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "hermiticity residue {:.3e}, trace residue {:.3e}, min eigenvalue {:.3e}",
            self.hermiticity_residue, self.trace_residue, self.min_eigenvalue
        )
    }
}

pub fn validate_density<const D: usize>(rho: &DensityMatrix<D>) -> Diagnostics {
    Diagnostics {
        hermiticity_residue: rho.hermiticity_residue(),
        trace_residue: (rho.trace() - 1.0).norm(),
        min_eigenvalue: rho.min_eigenvalue(),
    }
}

/// Real Bloch vector of a two-level state. `r3` is the inversion P₂ − P₁.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl BlochVector {
    pub const GROUND: BlochVector = BlochVector::new(0.0, 0.0, -1.0);

    pub const fn new(r1: f64, r2: f64, r3: f64) -> Self {
        Self { r1, r2, r3 }
    }

    pub fn norm(&self) -> f64 {
        (self.r1 * self.r1 + self.r2 * self.r2 + self.r3 * self.r3).sqrt()
    }

    /// Probability of level 2.
    pub fn p2(&self) -> f64 {
        0.5 * (self.r3 + 1.0)
    }
}

/// R₁ = ρ₁₂ + ρ₂₁, R₂ = i(ρ₁₂ − ρ₂₁), R₃ = ρ₂₂ − ρ₁₁.
pub fn bloch_from_density(rho: &Density2) -> Result<BlochVector> {
    let residue = rho.hermiticity_residue();
    if residue > HERMITICITY_TOL {
        return Err(Error::InvalidState(format!(
            "non-Hermitian density matrix (residue {residue:.3e})"
        )));
    }
    let (r12, r21) = (rho[(0, 1)], rho[(1, 0)]);
    let r1 = r12 + r21;
    let r2 = Complex64::i() * (r12 - r21);
    let r3 = rho[(1, 1)] - rho[(0, 0)];
    for (name, z) in [("R1", r1), ("R2", r2), ("R3", r3)] {
        if z.im.abs() > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "{name} has imaginary residue {:.3e}",
                z.im
            )));
        }
    }
    Ok(BlochVector::new(r1.re, r2.re, r3.re))
}

pub fn density_from_bloch(r: &BlochVector) -> Result<Density2> {
    let norm = r.norm();
    if !(norm <= 1.0 + BLOCH_NORM_TOL) {
        return Err(Error::NonPhysical(format!(
            "Bloch vector norm {norm} exceeds 1"
        )));
    }
    let rho12 = Complex64::new(r.r1, -r.r2) * 0.5;
    Ok(Density2::from_entries([
        [Complex64::new(0.5 * (1.0 - r.r3), 0.0), rho12],
        [rho12.conj(), Complex64::new(0.5 * (1.0 + r.r3), 0.0)],
    ]))
}
