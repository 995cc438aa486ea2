use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmat::{self, CMat2, C64, I};

/// Largest admissible non-Hermiticity angle; both the Bloch closed forms and
/// the metric operator diverge at π/2.
pub const THETA_MAX: f64 = FRAC_PI_2 - 1e-6;

/// Checks `θ ∈ [0, THETA_MAX]`.
pub fn check_theta(theta: f64) -> Result<()> {
    if !theta.is_finite() || !(0.0..=THETA_MAX).contains(&theta) {
        return Err(Error::Domain(format!(
            "theta = {theta} outside [0, π/2 − 1e-6]"
        )));
    }
    Ok(())
}

/// Non-Hermitian two-level Hamiltonian `H = scale · (A − iB)·σ` with
/// `A·B = 0` and `|A| > |B|`, so the spectrum `±scale·√(A² − B²)` is real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NhHamiltonian {
    a: [f64; 3],
    b: [f64; 3],
    scale: f64,
    /// `√(A² − B²)` before scaling. Stored so the canonical family can carry
    /// the exact value 1 instead of a cancellation-prone difference.
    gap: f64,
    theta: Option<f64>,
}

impl NhHamiltonian {
    pub fn new(a: Vector3<f64>, b: Vector3<f64>) -> Result<Self> {
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Hamiltonian vectors"));
        }
        let (na, nb) = (a.norm(), b.norm());
        if a.dot(&b).abs() > 1e-12 * na * nb {
            return Err(Error::InvalidHamiltonian(format!(
                "A·B = {:e} is not zero",
                a.dot(&b)
            )));
        }
        if na <= nb {
            return Err(Error::InvalidHamiltonian(format!(
                "|A| = {na} must exceed |B| = {nb} (complex spectrum or exceptional point)"
            )));
        }
        Ok(Self {
            a: a.into(),
            b: b.into(),
            scale: 1.0,
            gap: ((na - nb) * (na + nb)).sqrt(),
            theta: None,
        })
    }

    /// `H_θ = secθ σ_x + i tanθ σ_z`, i.e. `A = secθ x̂`, `B = −tanθ ẑ`.
    pub fn canonical(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self {
            a: [1.0 / theta.cos(), 0.0, 0.0],
            b: [0.0, 0.0, -theta.tan()],
            scale: 1.0,
            gap: 1.0,
            theta: Some(theta),
        })
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::InvalidHamiltonian(format!("scale {scale} must be positive")));
        }
        self.scale = scale;
        Ok(self)
    }

    /// Effective `A` including the scale factor.
    pub fn a(&self) -> Vector3<f64> {
        Vector3::from(self.a) * self.scale
    }

    /// Effective `B` including the scale factor.
    pub fn b(&self) -> Vector3<f64> {
        Vector3::from(self.b) * self.scale
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Non-Hermiticity angle, for members of the canonical family.
    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    /// Magnitude of the (real) eigenvalues.
    pub fn omega(&self) -> f64 {
        self.scale * self.gap
    }

    /// Period of the normalized dynamics, `π/ω`.
    pub fn period(&self) -> f64 {
        PI / self.omega()
    }

    pub fn matrix(&self) -> CMat2 {
        qmat::sigma_dot(&self.a()) - qmat::sigma_dot(&self.b()) * I
    }

    pub fn adjoint(&self) -> CMat2 {
        self.matrix().adjoint()
    }

    /// `exp(−iHt)`. `H` is traceless with `H² = ω²𝕀`, so this is
    /// `cos(ωt)𝕀 − i sin(ωt)/ω · H`.
    pub fn propagator(&self, t: f64) -> CMat2 {
        let w = self.omega();
        let (s, c) = (w * t).sin_cos();
        qmat::identity2() * C64::from(c) - self.matrix() * (I * (s / w))
    }

    /// Orthonormal frame `(Â, B̂, n̂ = Â × B̂)`. When `B = 0` any unit vector
    /// orthogonal to `Â` is used for `B̂`.
    pub fn abn_frame(&self) -> [Vector3<f64>; 3] {
        let a_hat = Vector3::from(self.a).normalize();
        let b = Vector3::from(self.b);
        let b_hat = if b.norm() > 0.0 {
            b.normalize()
        } else {
            let trial = if a_hat.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
            (trial - a_hat * a_hat.dot(&trial)).normalize()
        };
        [a_hat, b_hat, a_hat.cross(&b_hat)]
    }
}
