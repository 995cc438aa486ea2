use nalgebra::{Matrix4, Vector3, Vector4};

use super::ode::{self, Tolerances};
use super::{DensityMatrix, NhHamiltonian, PureState};
use crate::error::{Error, Result};
use crate::qmat::{self, CMat2, C64, I};

/// `N(t) exp(−iHt) ψ₀`, renormalized to unit norm.
pub fn evolve_pure(h: &NhHamiltonian, psi0: &PureState, t: f64) -> Result<PureState> {
    let v = h.propagator(t) * psi0.vector();
    let norm = v.norm();
    if !(norm >= 1e-14) {
        return Err(Error::DegenerateEvolution { t, norm });
    }
    PureState::from_vector(v)
}

/// Reciprocal norm `N(t) = 1/‖exp(−iHt)ψ₀‖`.
pub fn normalization(h: &NhHamiltonian, psi0: &PureState, t: f64) -> f64 {
    1.0 / (h.propagator(t) * psi0.vector()).norm()
}

fn sandwich_normalized(u: &CMat2, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    let m = u * rho.matrix() * u.adjoint();
    let tr = m.trace().re;
    if !(tr >= 1e-14) {
        return Err(Error::DegenerateEvolution { t, norm: tr.max(0.0).sqrt() });
    }
    let m = m / C64::from(tr);
    // restore exact Hermiticity lost to rounding
    Ok(DensityMatrix::from_matrix_unchecked((m + m.adjoint()) * C64::from(0.5)))
}

/// `exp(−iHt) ρ₀ exp(iH†t)` divided by its trace.
pub fn evolve_density(h: &NhHamiltonian, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if t == 0.0 {
        return Ok(*rho0);
    }
    sandwich_normalized(&h.propagator(t), rho0, t)
}

fn pack(m: &CMat2) -> [f64; 8] {
    [
        m[(0, 0)].re,
        m[(0, 0)].im,
        m[(0, 1)].re,
        m[(0, 1)].im,
        m[(1, 0)].re,
        m[(1, 0)].im,
        m[(1, 1)].re,
        m[(1, 1)].im,
    ]
}

fn unpack(y: &[f64; 8]) -> CMat2 {
    CMat2::new(
        C64::new(y[0], y[1]),
        C64::new(y[2], y[3]),
        C64::new(y[4], y[5]),
        C64::new(y[6], y[7]),
    )
}

/// Right-hand side of the noisy density-matrix equation
/// `dρ/dt = −i[A·σ, ρ] − {B·σ, ρ} + 2 tr(ρ B·σ) ρ + κ(𝕀 − 2ρ)`.
pub fn density_rhs(h: &NhHamiltonian, kappa: f64, rho: &CMat2) -> CMat2 {
    let a = qmat::sigma_dot(&h.a());
    let b = qmat::sigma_dot(&h.b());
    let commutator = a * rho - rho * a;
    let anticommutator = b * rho + rho * b;
    let gain = (rho * b).trace() * 2.0;
    -commutator * I - anticommutator
        + rho * gain
        + (qmat::identity2() - rho * C64::from(2.0)) * C64::from(kappa)
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::Domain(format!("kappa = {kappa} must be finite and ≥ 0")));
    }
    Ok(())
}

/// Integrates the noisy density-matrix equation with adaptive RK 5(4) and
/// returns `ρ` at every entry of `times` (which must start at 0).
pub fn evolve_density_noisy_series(
    h: &NhHamiltonian,
    rho0: &DensityMatrix,
    kappa: f64,
    times: &[f64],
    tol: Tolerances,
) -> Result<Vec<DensityMatrix>> {
    check_kappa(kappa)?;
    let ys = ode::integrate(
        |_, y: &[f64; 8]| pack(&density_rhs(h, kappa, &unpack(y))),
        pack(rho0.matrix()),
        times,
        tol,
    )?;
    Ok(ys.iter().map(|y| DensityMatrix::from_matrix_unchecked(unpack(y))).collect())
}

/// Noisy propagation of `ρ₀` for a duration `t` by direct RK integration.
pub fn evolve_density_noisy(
    h: &NhHamiltonian,
    rho0: &DensityMatrix,
    kappa: f64,
    t: f64,
) -> Result<DensityMatrix> {
    if t == 0.0 {
        return Ok(*rho0);
    }
    if t < 0.0 {
        return Err(Error::Domain("noisy evolution runs forward in time only".into()));
    }
    let out = evolve_density_noisy_series(h, rho0, kappa, &[0.0, t], Tolerances::default())?;
    Ok(out[1])
}

/// Exact transfer map of the noisy equation.
///
/// Writing `ρ = X / tr X`, the nonlinear equation becomes linear in `X`:
/// `Ẋ = −i(HX − XH†) + κ(tr X 𝕀 − 2X)`. Exponentiating that generator
/// directly is hopeless close to the exceptional point (huge, strongly
/// non-normal entries), so the map is built in better coordinates:
///
/// * `X' = S X S` with `S = η^{1/2}`, `η = 𝕀 + r n̂·σ`, `r = |B|/|A|`,
///   `n̂ = Â × B̂`. Here `H` acts as the Hermitian `ω Â·σ`, so without noise
///   `X' = (x₀/2)𝕀 + x·σ` just rotates about `Â`.
/// * Noise adds `κ(tr(η⁻¹X') η − 2X')`. In the variable `z = x₀ − 2r x_n` the
///   rank-one part cancels (`ż = −4rω x_B`), leaving one large coupling
///   `κ r z / (1 − r²)` into `x_n`, which is balanced by rescaling `z`.
///
/// The transfer matrix acts on `(x_A, x_B, x_n, c z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyPropagator {
    transfer: Matrix4<f64>,
    /// `S = p𝕀 + q n̂·σ`
    p: f64,
    q: f64,
    r: f64,
    c: f64,
    frame: [Vector3<f64>; 3],
    t: f64,
}

impl NoisyPropagator {
    pub fn new(h: &NhHamiltonian, kappa: f64, t: f64) -> Result<Self> {
        check_kappa(kappa)?;
        if !t.is_finite() {
            return Err(Error::NonFinite("propagation time"));
        }
        let (a, b) = (h.a(), h.b());
        let (na, nb) = (a.norm(), b.norm());
        let omega = h.omega();
        let r = nb / na;
        // 1 − r² without cancellation
        let one_minus_r2 = (omega / na).powi(2);
        let a_hat = a / na;
        let n_hat = if nb > 0.0 {
            a.cross(&b) / (na * nb)
        } else {
            // any unit vector orthogonal to Â
            let trial = if a_hat.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
            a_hat.cross(&trial).normalize()
        };
        let b_hat = n_hat.cross(&a_hat);
        let sqrt_plus = (1.0 + r).sqrt();
        let sqrt_minus = (omega / na) / sqrt_plus;
        let (p, q) = (0.5 * (sqrt_plus + sqrt_minus), 0.5 * (sqrt_plus - sqrt_minus));

        let c = if kappa > 0.0 && r > 0.0 {
            (kappa / (4.0 * omega * one_minus_r2)).sqrt()
        } else {
            1.0
        };
        let w = 2.0 * omega;
        #[rustfmt::skip]
        let mut g = Matrix4::new(
            -2.0 * kappa, 0.0, 0.0, 0.0,
            0.0, -2.0 * kappa, -w, 0.0,
            0.0, w, -2.0 * kappa, kappa * r / (c * one_minus_r2),
            0.0, -2.0 * r * w * c, 0.0, 0.0,
        );
        // only the direction of X' matters: remove the dominant growth rate so
        // strong noise cannot overflow the exponential
        let abscissa =
            g.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        if abscissa.is_finite() {
            g -= Matrix4::identity() * abscissa;
        }
        Ok(Self { transfer: (g * t).exp(), p, q, r, c, frame: [a_hat, b_hat, n_hat], t })
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let [a_hat, b_hat, n_hat] = self.frame;
        let sq = qmat::sigma_dot(&(n_hat * self.q));
        let s = qmat::identity2() * C64::from(self.p) + sq;
        // S⁻¹ up to a positive factor; the trace normalization removes it
        let s_inv = qmat::identity2() * C64::from(self.p) - sq;

        let x = s * rho.matrix() * s;
        let x0 = x.trace().re;
        let v = Vector3::new(x[(0, 1)].re, -x[(0, 1)].im, 0.5 * (x[(0, 0)].re - x[(1, 1)].re));
        let (xa, xb, xn) = (a_hat.dot(&v), b_hat.dot(&v), n_hat.dot(&v));
        let y = self.transfer * Vector4::new(xa, xb, xn, self.c * (x0 - 2.0 * self.r * xn));

        let v = a_hat * y[0] + b_hat * y[1] + n_hat * y[2];
        let x0 = y[3] / self.c + 2.0 * self.r * y[2];
        let x = qmat::identity2() * C64::from(0.5 * x0) + qmat::sigma_dot(&v);
        let m = s_inv * x * s_inv;
        let tr = m.trace().re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::DegenerateEvolution { t: self.t, norm: tr.max(0.0).sqrt() });
        }
        let m = m / C64::from(tr);
        Ok(DensityMatrix::from_matrix_unchecked((m + m.adjoint()) * C64::from(0.5)))
    }
}

/// Exact noisy propagation via [`NoisyPropagator`].
pub fn evolve_density_noisy_exact(
    h: &NhHamiltonian,
    rho0: &DensityMatrix,
    kappa: f64,
    t: f64,
) -> Result<DensityMatrix> {
    NoisyPropagator::new(h, kappa, t)?.apply(rho0)
}

/// Density-matrix propagator for a fixed duration, with or without noise.
#[derive(Debug, Clone, Copy)]
pub enum DensityPropagator {
    Noiseless { u: CMat2, t: f64 },
    Noisy(NoisyPropagator),
}

impl DensityPropagator {
    /// Uses the closed-form unitary-like propagator when `κ = 0` and the exact
    /// linearized transfer map otherwise.
    pub fn new(h: &NhHamiltonian, kappa: f64, t: f64) -> Result<Self> {
        check_kappa(kappa)?;
        if kappa == 0.0 {
            Ok(Self::Noiseless { u: h.propagator(t), t })
        } else {
            Ok(Self::Noisy(NoisyPropagator::new(h, kappa, t)?))
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        match self {
            Self::Noiseless { t: 0.0, .. } => Ok(*rho),
            Self::Noiseless { u, t } => sandwich_normalized(u, rho, *t),
            Self::Noisy(p) => p.apply(rho),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{pauli, Axis};

    #[test]
    fn hermitian_rabi_rotation() {
        let h = NhHamiltonian::canonical(0.0).unwrap();
        for &t in &[0.1, 0.9, 2.0] {
            let psi = evolve_pure(&h, &PureState::up_y(), t).unwrap();
            let p = PureState::down_y().inner(&psi).norm_sqr();
            assert!((p - t.sin().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn reaches_down_y_at_half_period_for_any_theta() {
        for &theta in &[0.0, 0.4, 1.0, 1.5] {
            let h = NhHamiltonian::canonical(theta).unwrap();
            let psi = evolve_pure(&h, &PureState::up_y(), std::f64::consts::FRAC_PI_2).unwrap();
            let overlap = PureState::down_y().inner(&psi).norm();
            assert!((overlap - 1.0).abs() < 1e-12, "theta {theta}: {overlap}");
        }
    }

    #[test]
    fn density_at_zero_is_identity_map() {
        let h = NhHamiltonian::canonical(0.8).unwrap();
        let rho = DensityMatrix::from_bloch(&Vector3::new(0.1, 0.2, -0.1)).unwrap();
        assert_eq!(evolve_density(&h, &rho, 0.0).unwrap(), rho);
        assert_eq!(evolve_density_noisy(&h, &rho, 0.3, 0.0).unwrap(), rho);
    }

    #[test]
    fn density_matches_pure_projector() {
        let h = NhHamiltonian::canonical(1.1).unwrap();
        let psi0 = PureState::up_y();
        for &t in &[0.3, 1.2, 2.9] {
            let via_pure = DensityMatrix::from_pure(&evolve_pure(&h, &psi0, t).unwrap());
            let via_rho = evolve_density(&h, &DensityMatrix::from_pure(&psi0), t).unwrap();
            assert!((via_pure.matrix() - via_rho.matrix()).norm() < 1e-10);
        }
    }

    #[test]
    fn noiseless_rk_matches_exponential() {
        let h = NhHamiltonian::canonical(0.9).unwrap();
        let rho0 = DensityMatrix::from_pure(&PureState::from_bloch_angles(0.7, 2.0));
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * std::f64::consts::PI / 20.0).collect();
        let series =
            evolve_density_noisy_series(&h, &rho0, 0.0, &times, Tolerances::default()).unwrap();
        for (t, rho) in times.iter().zip(&series) {
            let exact = evolve_density(&h, &rho0, *t).unwrap();
            assert!((rho.matrix() - exact.matrix()).norm() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn pure_relaxation_rate() {
        // A = B = 0 is not a valid Hamiltonian, so apply the right-hand side directly
        let h = NhHamiltonian::canonical(0.0).unwrap();
        let rho = DensityMatrix::from_pure(&PureState::up_z());
        let rhs = density_rhs(&h, 0.25, rho.matrix()) - density_rhs(&h, 0.0, rho.matrix());
        // κ(𝕀 − 2ρ) = −2κ S·σ
        let expected = pauli(Axis::Z) * C64::from(-0.25);
        assert!((rhs - expected).norm() < 1e-15);
    }

    #[test]
    fn linearized_noisy_map_matches_rk() {
        let h = NhHamiltonian::canonical(1.2).unwrap();
        let rho0 = DensityMatrix::from_bloch(&Vector3::new(0.2, -0.3, 0.1)).unwrap();
        for &kappa in &[0.0, 0.05, 0.7] {
            for &t in &[0.2, 1.0, 2.5] {
                let rk = evolve_density_noisy(&h, &rho0, kappa, t).unwrap();
                let exact = evolve_density_noisy_exact(&h, &rho0, kappa, t).unwrap();
                assert!((rk.matrix() - exact.matrix()).norm() < 1e-8, "κ {kappa} t {t}");
            }
        }
    }

    #[test]
    fn linearized_map_is_stable_near_exceptional_point() {
        let h = NhHamiltonian::canonical(std::f64::consts::FRAC_PI_2 - 1e-3).unwrap();
        let rho0 = DensityMatrix::from_pure(&PureState::from_bloch_angles(1.1, 4.0));
        let tight = Tolerances { rtol: 1e-12, atol: 1e-14 };
        for &kappa in &[0.0, 1e-7, 1e-5, 1e-3, 1.0, 100.0, 1e4] {
            for &t in &[0.3, 1.5, 1.6, 3.0] {
                let rk = evolve_density_noisy_series(&h, &rho0, kappa, &[0.0, t], tight).unwrap()[1];
                let exact = evolve_density_noisy_exact(&h, &rho0, kappa, t).unwrap();
                let err = (rk.matrix() - exact.matrix()).norm();
                assert!(err < 1e-7, "κ {kappa} t {t}: {err:e}");
            }
        }
    }

    #[test]
    fn rejects_negative_kappa() {
        let h = NhHamiltonian::canonical(0.2).unwrap();
        let rho = DensityMatrix::maximally_mixed();
        assert!(evolve_density_noisy(&h, &rho, -1.0, 1.0).is_err());
        assert!(DensityPropagator::new(&h, f64::NAN, 1.0).is_err());
    }
}
