//! Four-dimensional Hermitian dilation of `H_θ`.
//!
//! The ancilla is the first tensor factor (`ancilla ⊗ system`). States of the
//! form `N_T (|↑_z⟩ ⊗ ψ + |↓_z⟩ ⊗ ηψ)` keep that form under `exp(−iH_T t)`, so
//! projecting onto ancilla `|↑_z⟩` and renormalizing recovers the normalized
//! non-Hermitian evolution of `ψ`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Vector2, Vector4};
use serde::Serialize;

use crate::dynamics::{check_theta, DensityMatrix, NhHamiltonian, PureState};
use crate::error::{Error, Result};
use crate::lgi::{JointTable, LgiInputs, LgiResult, Observable, Outcome};
use crate::qmat::{self, Axis, CMat2, CMat4, C64, LINALG_TOL};

/// Post-selection probabilities below this are treated as starvation.
pub const MIN_SELECTION_PROBABILITY: f64 = 1e-14;

/// Metric operator `η = secθ 𝕀 + tanθ σ_y`, satisfying `η H_θ = H_θ† η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric {
    pub eta: CMat2,
    pub theta: f64,
}

pub fn build_metric(theta: f64) -> Result<Metric> {
    check_theta(theta)?;
    let eta = qmat::identity2() * C64::from(1.0 / theta.cos())
        + qmat::pauli(Axis::Y) * C64::from(theta.tan());
    let h = NhHamiltonian::canonical(theta)?;
    let (hm, hd) = (h.matrix(), h.adjoint());
    // rounding grows with the entry magnitudes, which diverge as θ → π/2
    let defect = (eta * hm - hd * eta).norm();
    if defect > LINALG_TOL * (1.0 + eta.norm() * hm.norm()) {
        return Err(Error::Domain(format!("metric intertwining fails ({defect:e})")));
    }
    Ok(Metric { eta, theta })
}

/// System part `H_s = cosθ σ_x` and coupling `V = −sinθ σ_z`.
pub fn embedding_blocks(theta: f64) -> (CMat2, CMat2) {
    (
        qmat::pauli(Axis::X) * C64::from(theta.cos()),
        qmat::pauli(Axis::Z) * C64::from(-theta.sin()),
    )
}

/// `H_T = 𝕀 ⊗ H_s + σ_y ⊗ V`.
pub fn build_ht(theta: f64) -> Result<CMat4> {
    check_theta(theta)?;
    let (hs, v) = embedding_blocks(theta);
    Ok(qmat::kron(&qmat::identity2(), &hs) + qmat::kron(&qmat::pauli(Axis::Y), &v))
}

/// `θ = π/2 − δ`, rejecting `δ` outside the admissible range.
pub fn theta_from_delta(delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!(
            "delta = {delta}: at δ = 0 the embedded state is separable and the dilation degenerates"
        )));
    }
    let theta = FRAC_PI_2 - delta;
    check_theta(theta)?;
    Ok(theta)
}

/// Unit-norm state in the η-structured subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddedState {
    pub vector: Vector4<C64>,
    pub n_t: f64,
}

impl EmbeddedState {
    pub fn upper(&self) -> Vector2<C64> {
        Vector2::new(self.vector[0], self.vector[1])
    }

    pub fn lower(&self) -> Vector2<C64> {
        Vector2::new(self.vector[2], self.vector[3])
    }

    /// `‖lower − η·upper‖`, zero for states of the dilation form.
    pub fn form_defect(&self, metric: &Metric) -> f64 {
        (self.lower() - metric.eta * self.upper()).norm()
    }
}

/// `N_T (|↑_z⟩ ⊗ ψ + |↓_z⟩ ⊗ ηψ)` with `N_T = 1/√⟨ψ|(𝕀 + η²)|ψ⟩`.
pub fn build_psi_t(theta: f64, psi: &PureState) -> Result<EmbeddedState> {
    let metric = build_metric(theta)?;
    let upper = psi.vector();
    let lower = metric.eta * upper;
    let n_t = 1.0 / (upper.norm_squared() + lower.norm_squared()).sqrt();
    let scale = C64::from(n_t);
    Ok(EmbeddedState {
        vector: Vector4::new(upper[0] * scale, upper[1] * scale, lower[0] * scale, lower[1] * scale),
        n_t,
    })
}

/// `N_T = cosθ / √(2(1 − sinθ))` for `ψ = |↑⟩_y`.
pub fn n_t_closed_form(theta: f64) -> f64 {
    theta.cos() / (2.0 * (1.0 - theta.sin())).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostSelected {
    /// Renormalized system state on the ancilla-`|↑_z⟩` branch.
    pub state: PureState,
    /// `⟨Ψ_T(t)|P_↑|Ψ_T(t)⟩`.
    pub p_select: f64,
    /// The full evolved 4-vector before projection.
    pub embedded: EmbeddedState,
}

/// Evolves the dilation unitarily and post-selects the ancilla on `|↑_z⟩`.
pub fn evolve_and_postselect(theta: f64, psi0: &PureState, t: f64) -> Result<PostSelected> {
    let start = build_psi_t(theta, psi0)?;
    let u = qmat::exp_hermitian_4x4(&build_ht(theta)?, t)?;
    postselect(&start, &u)
}

fn postselect(start: &EmbeddedState, u: &CMat4) -> Result<PostSelected> {
    let evolved = EmbeddedState { vector: u * start.vector, n_t: start.n_t };
    let upper = evolved.upper();
    let p_select = upper.norm_squared();
    if !(p_select >= MIN_SELECTION_PROBABILITY) {
        return Err(Error::PostSelectionStarved { probability: p_select });
    }
    Ok(PostSelected { state: PureState::from_vector(upper)?, p_select, embedded: evolved })
}

/// Two-time measurement protocol run entirely inside the dilation: unitary
/// evolution, ancilla post-selection, projective collapse of the system,
/// re-embedding of the collapsed state, further evolution and post-selection.
pub fn k3_via_embedding(
    theta: f64,
    psi0: &PureState,
    q: &Observable,
    times: [f64; 3],
) -> Result<LgiResult> {
    let [t1, t2, t3] = times;
    if !(t1 >= 0.0 && t2 > t1 && t3 > t2 && t3.is_finite()) {
        return Err(Error::Domain(format!("need 0 ≤ t1 < t2 < t3, got {times:?}")));
    }
    let ht = build_ht(theta)?;
    let start = build_psi_t(theta, psi0)?;
    let evolve_from = |state: &EmbeddedState, t: f64| -> Result<PureState> {
        Ok(postselect(state, &qmat::exp_hermitian_4x4(&ht, t)?)?.state)
    };

    let at_t1 = evolve_from(&start, t1)?;
    let at_t2 = evolve_from(&start, t2)?;
    let collapsed = [
        build_psi_t(theta, &q.eigenstate(Outcome::Plus))?,
        build_psi_t(theta, &q.eigenstate(Outcome::Minus))?,
    ];

    let table = |before: &PureState, t_i: f64, t_j: f64| -> Result<JointTable> {
        let rho = DensityMatrix::from_pure(before);
        let mut probs = [[0.0; 2]; 2];
        for (i, qi) in Outcome::BOTH.into_iter().enumerate() {
            let p_i = q.probability(&rho, qi);
            let later = DensityMatrix::from_pure(&evolve_from(&collapsed[i], t_j - t_i)?);
            for (j, qj) in Outcome::BOTH.into_iter().enumerate() {
                probs[i][j] = p_i * q.probability(&later, qj);
            }
        }
        Ok(JointTable { t_i, t_j, probs })
    };

    let tables = [table(&at_t1, t1, t2)?, table(&at_t2, t2, t3)?, table(&at_t1, t1, t3)?];
    let inputs = LgiInputs {
        hamiltonian: NhHamiltonian::canonical(theta)?,
        initial_bloch: psi0.bloch().into(),
        observable: *q,
        times,
        kappa: 0.0,
    };
    Ok(LgiResult::from_tables(tables, inputs))
}

/// One row of the direct-versus-embedded comparison report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceSample {
    pub t: f64,
    pub fidelity: f64,
    pub p_select: f64,
    /// `p_select · N(t)² / N_T²`, ideally 1.
    pub selection_identity: f64,
}

/// Compares post-selected and direct evolution of `ψ₀` at time `t`.
pub fn equivalence_sample(theta: f64, psi0: &PureState, t: f64) -> Result<EquivalenceSample> {
    let h = NhHamiltonian::canonical(theta)?;
    let direct = crate::dynamics::evolve_pure(&h, psi0, t)?;
    let post = evolve_and_postselect(theta, psi0, t)?;
    let n = crate::dynamics::normalization(&h, psi0, t);
    Ok(EquivalenceSample {
        t,
        fidelity: direct.inner(&post.state).norm_sqr(),
        p_select: post.p_select,
        selection_identity: post.p_select * n * n / (post.embedded.n_t * post.embedded.n_t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, SQRT_2};

    #[test]
    fn metric_values() {
        let m0 = build_metric(0.0).unwrap();
        assert!((m0.eta - qmat::identity2()).norm() < 1e-15);
        let m = build_metric(FRAC_PI_4).unwrap();
        let expected = qmat::identity2() * C64::from(SQRT_2) + qmat::pauli(Axis::Y);
        assert!((m.eta - expected).norm() < 1e-14);
        let m1 = build_metric(1.0).unwrap();
        let h = NhHamiltonian::canonical(1.0).unwrap();
        assert!((m1.eta * h.matrix() - h.adjoint() * m1.eta).norm() <= 1e-12);
        let [lo, _] = qmat::hermitian_eigenvalues_2x2(&m1.eta);
        assert!(lo > 0.0);
        assert!(build_metric(FRAC_PI_2).is_err());
    }

    #[test]
    fn ht_hermitian_limit_and_blocks() {
        let h0 = build_ht(0.0).unwrap();
        assert!((h0 - qmat::kron(&qmat::identity2(), &qmat::pauli(Axis::X))).norm() < 1e-15);
        for &theta in &[0.3, 0.8, 1.3] {
            let (hs, v) = embedding_blocks(theta);
            let eta = build_metric(theta).unwrap().eta;
            let h = NhHamiltonian::canonical(theta).unwrap();
            let i = qmat::I;
            assert!((hs - v * eta * i - h.matrix()).norm() <= 1e-12);
            assert!((v * i + hs * eta - eta * h.matrix()).norm() <= 1e-12);
            assert!(qmat::hermiticity_defect(&build_ht(theta).unwrap()) < 1e-15);
        }
    }

    #[test]
    fn ht_delta_form() {
        let delta: f64 = 0.2;
        let ht = build_ht(theta_from_delta(delta).unwrap()).unwrap();
        let expected = qmat::kron(&qmat::identity2(), &(qmat::pauli(Axis::X) * C64::from(delta.sin())))
            - qmat::kron(&qmat::pauli(Axis::Y), &(qmat::pauli(Axis::Z) * C64::from(delta.cos())));
        assert!((ht - expected).norm() < 1e-14);
        assert!(theta_from_delta(0.0).is_err());
    }

    #[test]
    fn embedded_state_normalization() {
        let psi = PureState::from_bloch_angles(0.4, 1.0);
        let e0 = build_psi_t(0.0, &psi).unwrap();
        assert!((e0.n_t - 1.0 / SQRT_2).abs() < 1e-15);
        assert!((e0.upper() - e0.lower()).norm() < 1e-15);
        for &theta in &[0.2, 0.9, 1.4] {
            let e = build_psi_t(theta, &PureState::up_y()).unwrap();
            assert!((e.n_t - n_t_closed_form(theta)).abs() < 1e-12);
            assert!((e.vector.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_form_branch_amplitudes() {
        let delta: f64 = 0.3;
        let e = build_psi_t(theta_from_delta(delta).unwrap(), &PureState::up_y()).unwrap();
        let up_y = PureState::up_y().vector();
        let a = ((1.0 + delta.cos()) / 2.0).sqrt();
        let b = ((1.0 - delta.cos()) / 2.0).sqrt();
        assert!((e.upper() - up_y * C64::from(a)).norm() < 1e-12);
        assert!((e.lower() - up_y * C64::from(b)).norm() < 1e-12);
    }

    #[test]
    fn hermitian_selection_is_half() {
        for &t in &[0.0, 0.7, 2.5] {
            let post = evolve_and_postselect(0.0, &PureState::up_y(), t).unwrap();
            assert!((post.p_select - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn form_invariance_under_evolution() {
        let theta = 1.1;
        let metric = build_metric(theta).unwrap();
        for &t in &[0.3, 1.0, 2.2] {
            let post = evolve_and_postselect(theta, &PureState::up_y(), t).unwrap();
            assert!(post.embedded.form_defect(&metric) < 1e-8);
        }
    }

    #[test]
    fn embedding_k3_matches_direct() {
        let theta = std::f64::consts::FRAC_PI_6;
        let r = k3_via_embedding(theta, &PureState::up_y(), &Observable::canonical_axis(), [0.0, FRAC_PI_4, 2.0 * FRAC_PI_4])
            .unwrap();
        assert!((r.k3 - 1.75).abs() < 1e-8);
        assert!(k3_via_embedding(theta, &PureState::up_y(), &Observable::canonical_axis(), [0.0, 0.0, 1.0]).is_err());
    }
}
