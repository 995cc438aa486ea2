//! Fixed-size complex linear algebra for 2×2 and 4×4 operators.
//!
//! Representation is pinned: `σ_y = [[0, −i], [i, 0]]`, `|↑_z⟩ = (1, 0)ᵗ`,
//! `|↓_z⟩ = (0, 1)ᵗ`. Kronecker products are ordered `ancilla ⊗ system`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::dynamics::DensityMatrix;
use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat2 = Matrix2<C64>;
pub type CMat4 = Matrix4<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// Default absolute tolerance for linear-algebra identities.
pub const LINALG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn pauli(axis: Axis) -> CMat2 {
    match axis {
        Axis::X => CMat2::new(ZERO, ONE, ONE, ZERO),
        Axis::Y => CMat2::new(ZERO, -I, I, ZERO),
        Axis::Z => CMat2::new(ONE, ZERO, ZERO, -ONE),
    }
}

pub fn identity2() -> CMat2 {
    CMat2::identity()
}

/// `v·σ` for a real 3-vector.
pub fn sigma_dot(v: &nalgebra::Vector3<f64>) -> CMat2 {
    pauli(Axis::X) * C64::from(v.x) + pauli(Axis::Y) * C64::from(v.y) + pauli(Axis::Z) * C64::from(v.z)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat2, b: &CMat2) -> CMat4 {
    let mut out = CMat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Frobenius norm of `M − M†`.
pub fn hermiticity_defect<const N: usize>(
    m: &nalgebra::SMatrix<C64, N, N>,
) -> f64 {
    (m - m.adjoint()).norm()
}

/// Frobenius norm of `M†M − 𝕀`.
pub fn unitarity_defect<const N: usize>(m: &nalgebra::SMatrix<C64, N, N>) -> f64 {
    (m.adjoint() * m - nalgebra::SMatrix::<C64, N, N>::identity()).norm()
}

fn all_finite<const N: usize>(m: &nalgebra::SMatrix<C64, N, N>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `cos(z)` and `sin(z)/z` for complex `z`, with the `z → 0` limit handled by series.
fn cos_and_sinc(z: C64) -> (C64, C64) {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        let cos = ONE - z2 / 2.0 + z2 * z2 / 24.0 - z2 * z2 * z2 / 720.0;
        let sinc = ONE - z2 / 6.0 + z2 * z2 / 120.0 - z2 * z2 * z2 / 5040.0;
        (cos, sinc)
    } else {
        (z.cos(), z.sin() / z)
    }
}

/// Computes `exp(−i M t)` for a 2×2 complex matrix.
///
/// Any 2×2 matrix splits as `M = m₀𝕀 + N` with `N` traceless, and a traceless
/// 2×2 matrix squares to `c𝕀` with `c = −det N`. Hence
/// `exp(−iMt) = e^{−i m₀ t} [cos(√c t) 𝕀 − i t sinc(√c t) N]`, which is exact
/// for every input; both factors are even in `√c`, so the branch is irrelevant.
pub fn exp_2x2(m: &CMat2, t: f64) -> Result<CMat2> {
    if !all_finite(m) || !t.is_finite() {
        return Err(Error::NonFinite("exp_2x2 input"));
    }
    let m0 = (m[(0, 0)] + m[(1, 1)]) / 2.0;
    let n = m - identity2() * m0;
    let c = -(n[(0, 0)] * n[(1, 1)] - n[(0, 1)] * n[(1, 0)]);
    let root = c.sqrt();
    let (cos, sinc) = cos_and_sinc(root * t);
    let phase = (-I * m0 * t).exp();
    Ok((identity2() * cos - n * (I * t * sinc)) * phase)
}

/// Computes the unitary `exp(−i M t)` of a Hermitian 4×4 matrix by spectral
/// decomposition.
pub fn exp_hermitian_4x4(m: &CMat4, t: f64) -> Result<CMat4> {
    if !all_finite(m) || !t.is_finite() {
        return Err(Error::NonFinite("exp_hermitian_4x4 input"));
    }
    let deviation = hermiticity_defect(m);
    if deviation > LINALG_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    // Symmetrize so the eigen-solver sees an exactly Hermitian matrix.
    let h = (m + m.adjoint()) * C64::from(0.5);
    let eig = h.symmetric_eigen();
    let mut phases = CMat4::zeros();
    for k in 0..4 {
        phases[(k, k)] = (-I * eig.eigenvalues[k] * t).exp();
    }
    Ok(eig.eigenvectors * phases * eig.eigenvectors.adjoint())
}

/// Eigenvalues of a Hermitian 2×2 matrix, ascending.
pub fn hermitian_eigenvalues_2x2(m: &CMat2) -> [f64; 2] {
    let mean = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
    let half_diff = 0.5 * (m[(0, 0)].re - m[(1, 1)].re);
    let off = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
    let radius = (half_diff * half_diff + off.norm_sqr()).sqrt();
    [mean - radius, mean + radius]
}

/// Trace distance `½ Tr|ρ₁ − ρ₂|`.
pub fn trace_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> f64 {
    let diff = rho1.matrix() - rho2.matrix();
    let [lo, hi] = hermitian_eigenvalues_2x2(&diff);
    (0.5 * (lo.abs() + hi.abs())).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::PureState;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn close2(a: &CMat2, b: &CMat2, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (pauli(Axis::X), pauli(Axis::Y), pauli(Axis::Z));
        assert!(close2(&(x * y), &(z * I), 1e-15));
        assert!(close2(&(z * z), &identity2(), 1e-15));
        assert!(close2(&(y * y), &identity2(), 1e-15));
    }

    #[test]
    fn up_y_is_minus_one_eigenvector_of_pinned_sigma_y() {
        let up_y = PureState::up_y();
        let image = pauli(Axis::Y) * up_y.vector();
        assert!((image + up_y.vector()).norm() < 1e-15);
        // (i, 1)/√2 spelled out explicitly
        assert!((up_y.vector()[0] - I * FRAC_1_SQRT_2).norm() < 1e-15);
    }

    #[test]
    fn exp_half_period_rotation() {
        let u = exp_2x2(&pauli(Axis::X), FRAC_PI_2).unwrap();
        assert!(close2(&u, &(pauli(Axis::X) * -I), 1e-15));
    }

    #[test]
    fn exp_canonical_hamiltonian_closed_form() {
        let theta: f64 = 0.9;
        let h = pauli(Axis::X) * C64::from(1.0 / theta.cos())
            + pauli(Axis::Z) * (I * theta.tan());
        for &t in &[0.1f64, 0.7, 2.3, -1.1] {
            let expected = identity2() * C64::from(t.cos()) - h * (I * t.sin());
            assert!(close2(&exp_2x2(&h, t).unwrap(), &expected, 1e-13));
        }
    }

    #[test]
    fn exp_at_zero_and_nilpotent_limit() {
        let m = CMat2::new(C64::new(0.3, -1.0), C64::new(2.0, 0.5), C64::new(-0.7, 0.1), C64::new(1.2, 0.4));
        assert!(close2(&exp_2x2(&m, 0.0).unwrap(), &identity2(), 1e-15));
        // nilpotent: exp(−iNt) = 𝕀 − iNt
        let n = CMat2::new(ZERO, ONE, ZERO, ZERO);
        let expected = identity2() - n * (I * 0.8);
        assert!(close2(&exp_2x2(&n, 0.8).unwrap(), &expected, 1e-15));
    }

    #[test]
    fn exp_rejects_non_finite() {
        let mut m = pauli(Axis::X);
        m[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(exp_2x2(&m, 1.0), Err(Error::NonFinite(_))));
        assert!(exp_2x2(&pauli(Axis::X), f64::INFINITY).is_err());
    }

    #[test]
    fn exp_hermitian_rejects_non_hermitian() {
        let mut m = CMat4::identity();
        m[(0, 1)] = ONE;
        assert!(matches!(exp_hermitian_4x4(&m, 1.0), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn exp_hermitian_identity_at_zero() {
        let m = kron(&pauli(Axis::Y), &pauli(Axis::Z)) + kron(&identity2(), &pauli(Axis::X));
        let u = exp_hermitian_4x4(&m, 0.0).unwrap();
        assert!((u - CMat4::identity()).norm() < 1e-13);
    }

    #[test]
    fn kron_ordering() {
        // (σ_x ⊗ 𝕀)|↑_z⟩⊗|ψ⟩ lands in the ancilla-↓ block
        let k = kron(&pauli(Axis::X), &identity2());
        assert_eq!(k[(2, 0)], ONE);
        assert_eq!(k[(3, 1)], ONE);
        assert_eq!(k[(0, 0)], ZERO);
    }

    #[test]
    fn trace_distance_basics() {
        let up = DensityMatrix::from_pure(&PureState::up_z());
        let down = DensityMatrix::from_pure(&PureState::down_z());
        assert_eq!(trace_distance(&up, &up), 0.0);
        assert!((trace_distance(&up, &down) - 1.0).abs() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed();
        assert!((trace_distance(&up, &mixed) - 0.5).abs() < 1e-15);
    }
}
