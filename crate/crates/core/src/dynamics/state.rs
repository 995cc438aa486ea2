use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Vector2, Vector3};
use serde::Serialize;

use super::NhHamiltonian;
use crate::error::{Error, Result};
use crate::qmat::{self, Axis, CMat2, C64, I, ONE, ZERO};

/// Normalized two-level state vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState(Vector2<C64>);

impl PureState {
    /// Normalizes the given amplitudes.
    pub fn new(up: C64, down: C64) -> Result<Self> {
        Self::from_vector(Vector2::new(up, down))
    }

    pub fn from_vector(v: Vector2<C64>) -> Result<Self> {
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("state amplitudes"));
        }
        let norm = v.norm();
        if norm < 1e-300 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Ok(Self(v / C64::from(norm)))
    }

    pub fn up_z() -> Self {
        Self(Vector2::new(ONE, ZERO))
    }

    pub fn down_z() -> Self {
        Self(Vector2::new(ZERO, ONE))
    }

    /// `(i, 1)ᵗ/√2`, the −1 eigenvector of the pinned `σ_y`.
    pub fn up_y() -> Self {
        Self(Vector2::new(I, ONE) * C64::from(FRAC_1_SQRT_2))
    }

    /// `(−i, 1)ᵗ/√2`, the +1 eigenvector of the pinned `σ_y`.
    pub fn down_y() -> Self {
        Self(Vector2::new(-I, ONE) * C64::from(FRAC_1_SQRT_2))
    }

    /// State whose Bloch vector points along polar/azimuthal angles.
    pub fn from_bloch_angles(polar: f64, azimuth: f64) -> Self {
        let (s, c) = (0.5 * polar).sin_cos();
        Self(Vector2::new(C64::from(c), C64::from_polar(s, azimuth)))
    }

    pub fn vector(&self) -> Vector2<C64> {
        self.0
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.0.dotc(&other.0)
    }

    /// Bloch vector `S = ½⟨σ⟩`.
    pub fn bloch(&self) -> Vector3<f64> {
        let (a, b) = (self.0[0], self.0[1]);
        let ab = a.conj() * b;
        Vector3::new(ab.re, ab.im, 0.5 * (a.norm_sqr() - b.norm_sqr()))
    }
}

/// Density matrix `ρ = ½𝕀 + S·σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(CMat2);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity to 1e-10.
    pub fn new(m: CMat2) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("density matrix"));
        }
        let herm = qmat::hermiticity_defect(&m);
        if herm > 1e-10 {
            return Err(Error::InvalidState(format!("not Hermitian ({herm:.2e})")));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {tr} ≠ 1")));
        }
        let [lo, _] = qmat::hermitian_eigenvalues_2x2(&m);
        if lo < -1e-10 {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo:e}")));
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: CMat2) -> Self {
        Self(m)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let v = psi.vector();
        Self(v * v.adjoint())
    }

    pub fn from_bloch(s: &Vector3<f64>) -> Result<Self> {
        if s.norm() > 0.5 + 1e-8 {
            return Err(Error::InvalidState(format!("|S| = {} exceeds 1/2", s.norm())));
        }
        Ok(Self(qmat::identity2() * C64::from(0.5) + qmat::sigma_dot(s)))
    }

    pub fn maximally_mixed() -> Self {
        Self(qmat::identity2() * C64::from(0.5))
    }

    pub fn matrix(&self) -> &CMat2 {
        &self.0
    }

    pub fn bloch(&self) -> Vector3<f64> {
        let m = &self.0;
        Vector3::new(m[(1, 0)].re, m[(1, 0)].im, 0.5 * (m[(0, 0)].re - m[(1, 1)].re))
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// `tr(ρ O)`.
    pub fn expectation(&self, op: &CMat2) -> f64 {
        (self.0 * op).trace().re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Frame {
    /// Laboratory `x, y, z` axes.
    Cartesian,
    /// `(Â, B̂, n̂)` axes of a Hamiltonian.
    Abn,
}

/// Real Bloch vector tagged with the frame its components refer to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochVector {
    pub s: [f64; 3],
    pub frame: Frame,
}

impl BlochVector {
    pub fn cartesian(s: Vector3<f64>) -> Self {
        Self { s: s.into(), frame: Frame::Cartesian }
    }

    pub fn vector(&self) -> Vector3<f64> {
        Vector3::from(self.s)
    }

    pub fn norm(&self) -> f64 {
        self.vector().norm()
    }

    /// `tr ρ² = ½ + 2|S|²`.
    pub fn purity(&self) -> f64 {
        0.5 + 2.0 * self.vector().norm_squared()
    }

    /// Re-expresses the vector in `target` using the frame of `h`.
    pub fn to_frame(&self, h: &NhHamiltonian, target: Frame) -> Self {
        if self.frame == target {
            return *self;
        }
        let basis = h.abn_frame();
        let v = self.vector();
        let s = match target {
            Frame::Abn => Vector3::new(basis[0].dot(&v), basis[1].dot(&v), basis[2].dot(&v)),
            Frame::Cartesian => basis[0] * v.x + basis[1] * v.y + basis[2] * v.z,
        };
        Self { s: s.into(), frame: target }
    }
}

/// Projector onto the eigenvector of `q·σ` with eigenvalue `sign` (±1).
pub fn spin_projector(q: &Vector3<f64>, sign: f64) -> CMat2 {
    (qmat::identity2() + qmat::sigma_dot(q) * C64::from(sign)) * C64::from(0.5)
}

/// `⟨ψ|σ_axis|ψ⟩` with the pinned Pauli matrices.
pub fn pauli_expectation(psi: &PureState, axis: Axis) -> f64 {
    let v = psi.vector();
    v.dotc(&(qmat::pauli(axis) * v)).re
}
