use super::{evolve_pure, NhHamiltonian, PureState};
use crate::error::Result;

/// `arccos |⟨ψ|φ⟩|`, in `[0, π/2]`, evaluated as an `atan2` of the parallel
/// and perpendicular parts so it stays accurate near 0 and π/2.
pub fn geodesic_distance(psi: &PureState, phi: &PureState) -> f64 {
    let overlap = psi.inner(phi);
    let perp = (phi.vector() - psi.vector() * overlap).norm();
    perp.atan2(overlap.norm())
}

/// Distance between `N(t) exp(−iH_θ t)|↑⟩_y` and `|↓⟩_y`:
/// `arccos √(sin²t (1 − sinθ) / (1 + cos 2t sinθ))`.
///
/// Since `1 − sin²t(1 − sinθ)/(1 + cos 2t sinθ) = cos²t(1 + sinθ)/(1 + cos 2t sinθ)`,
/// this equals `atan2(|cos t|√(1 + sinθ), |sin t|√(1 − sinθ))`, which is used.
pub fn geodesic_closed_form(theta: f64, t: f64) -> f64 {
    let s = theta.sin();
    (t.cos().abs() * (1.0 + s).sqrt()).atan2(t.sin().abs() * (1.0 - s).sqrt())
}

/// `‖φ − ⟨ψ|φ⟩ψ‖² = 1 − |⟨ψ|φ⟩|²` for unit vectors, without the cancellation
/// of the direct form.
fn fidelity_loss(psi: &PureState, phi: &PureState) -> f64 {
    let overlap = psi.inner(phi);
    (phi.vector() - psi.vector() * overlap).norm_squared()
}

const SPEED_STEP: f64 = 1e-4;

/// Coefficient of `δt²` in `1 − |⟨ψ(t)|ψ(t+δt)⟩|²` along the normalized
/// trajectory through `ψ₀`.
///
/// Symmetric differences at `δt = 10⁻⁴` and `5·10⁻⁵` are combined by
/// Richardson extrapolation.
pub fn speed(h: &NhHamiltonian, psi0: &PureState, t: f64) -> Result<f64> {
    let psi_t = evolve_pure(h, psi0, t)?;
    let quotient = |dt: f64| -> Result<f64> {
        let fwd = evolve_pure(h, &psi_t, dt)?;
        let bwd = evolve_pure(h, &psi_t, -dt)?;
        Ok((fidelity_loss(&psi_t, &fwd) + fidelity_loss(&psi_t, &bwd)) / (2.0 * dt * dt))
    };
    let coarse = quotient(SPEED_STEP)?;
    let fine = quotient(0.5 * SPEED_STEP)?;
    Ok(((4.0 * fine - coarse) / 3.0).max(0.0))
}

/// `cos²θ / (1 + cos 2t sinθ)²` for `H_θ` and `ψ₀ = |↑⟩_y`.
pub fn speed_closed_form(theta: f64, t: f64) -> f64 {
    let den = 1.0 + (2.0 * t).cos() * theta.sin();
    theta.cos().powi(2) / (den * den)
}
