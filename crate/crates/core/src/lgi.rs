//! Dichotomic measurements, two-time joint probabilities, correlators and the
//! three-time Leggett–Garg combination `K₃ = C₁₂ + C₂₃ − C₁₃`.
//!
//! Measurements are ideal projective (von Neumann) collapses: the state after
//! observing outcome `q` is the rank-1 projector `P_q`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::Vector3;
use serde::Serialize;

use crate::dynamics::{
    spin_projector, DensityMatrix, DensityPropagator, NhHamiltonian, PureState,
};
use crate::error::{Error, Result};
use crate::qmat::CMat2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }
}

/// Dichotomic observable `q·σ` with outcomes ±1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observable {
    q: [f64; 3],
}

impl Observable {
    /// `q` must be a unit vector to within 1e-12.
    pub fn new(q: Vector3<f64>) -> Result<Self> {
        if q.iter().any(|v| !v.is_finite()) || (q.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("observable axis {q:?} is not a unit vector")));
        }
        Ok(Self { q: q.into() })
    }

    pub fn from_angles(polar: f64, azimuth: f64) -> Self {
        let (sp, cp) = polar.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Self { q: [sp * ca, sp * sa, cp] }
    }

    /// The axis for which `|↑⟩_y = (i, 1)ᵗ/√2` is the +1 eigenstate, i.e.
    /// `q = −ŷ` under the pinned `σ_y`.
    pub fn canonical_axis() -> Self {
        Self { q: [0.0, -1.0, 0.0] }
    }

    pub fn axis(&self) -> Vector3<f64> {
        Vector3::from(self.q)
    }

    pub fn projector(&self, outcome: Outcome) -> CMat2 {
        spin_projector(&self.axis(), outcome.value())
    }

    /// Normalized eigenvector for `outcome`.
    pub fn eigenstate(&self, outcome: Outcome) -> PureState {
        let d = self.axis() * outcome.value();
        let polar = d.z.clamp(-1.0, 1.0).acos();
        let azimuth = d.y.atan2(d.x);
        PureState::from_bloch_angles(polar, azimuth)
    }

    /// Born probability `tr(P_q ρ)`, clamped to `[0, 1]`.
    pub fn probability(&self, rho: &DensityMatrix, outcome: Outcome) -> f64 {
        rho.expectation(&self.projector(outcome)).clamp(0.0, 1.0)
    }
}

/// Joint probabilities `P_ij(q_i, q_j)` of two sequential measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointTable {
    pub t_i: f64,
    pub t_j: f64,
    /// Indexed `[q_i][q_j]` with `+` first.
    pub probs: [[f64; 2]; 2],
}

impl JointTable {
    pub fn get(&self, q_i: Outcome, q_j: Outcome) -> f64 {
        self.probs[q_i.index()][q_j.index()]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().flatten().sum()
    }

    /// `Σ q_i q_j P_ij(q_i, q_j)`.
    pub fn correlator(&self) -> f64 {
        let mut c = 0.0;
        for qi in Outcome::BOTH {
            for qj in Outcome::BOTH {
                c += qi.value() * qj.value() * self.get(qi, qj);
            }
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LgiInputs {
    pub hamiltonian: NhHamiltonian,
    pub initial_bloch: [f64; 3],
    pub observable: Observable,
    pub times: [f64; 3],
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LgiResult {
    pub c12: f64,
    pub c23: f64,
    pub c13: f64,
    pub k3: f64,
    pub tables: [JointTable; 3],
    pub inputs: LgiInputs,
}

impl LgiResult {
    pub(crate) fn from_tables(tables: [JointTable; 3], inputs: LgiInputs) -> Self {
        let [c12, c23, c13] = tables.map(|t| t.correlator());
        Self { c12, c23, c13, k3: c12 + c23 - c13, tables, inputs }
    }
}

fn check_times(t_i: f64, t_j: f64) -> Result<()> {
    if !(t_i >= 0.0 && t_j > t_i && t_j.is_finite()) {
        return Err(Error::Domain(format!("need 0 ≤ t_i < t_j, got ({t_i}, {t_j})")));
    }
    Ok(())
}

/// Table for a measurement on `rho_at_ti`, followed by evolution through
/// `gap` and a second measurement.
fn table_from(
    rho_at_ti: &DensityMatrix,
    q: &Observable,
    gap: &DensityPropagator,
    t_i: f64,
    t_j: f64,
) -> Result<JointTable> {
    let mut probs = [[0.0; 2]; 2];
    for qi in Outcome::BOTH {
        let p_i = q.probability(rho_at_ti, qi);
        let collapsed = DensityMatrix::from_pure(&q.eigenstate(qi));
        let later = gap.apply(&collapsed)?;
        for qj in Outcome::BOTH {
            probs[qi.index()][qj.index()] = p_i * q.probability(&later, qj);
        }
    }
    Ok(JointTable { t_i, t_j, probs })
}

/// All four joint probabilities for measurements at `t_i < t_j`.
pub fn joint_table(
    h: &NhHamiltonian,
    rho_initial: &DensityMatrix,
    q: &Observable,
    t_i: f64,
    t_j: f64,
    kappa: f64,
) -> Result<JointTable> {
    check_times(t_i, t_j)?;
    let rho_i = DensityPropagator::new(h, kappa, t_i)?.apply(rho_initial)?;
    let gap = DensityPropagator::new(h, kappa, t_j - t_i)?;
    table_from(&rho_i, q, &gap, t_i, t_j)
}

#[allow(clippy::too_many_arguments)]
pub fn joint_probability(
    h: &NhHamiltonian,
    rho_initial: &DensityMatrix,
    q: &Observable,
    t_i: f64,
    t_j: f64,
    q_i: Outcome,
    q_j: Outcome,
    kappa: f64,
) -> Result<f64> {
    Ok(joint_table(h, rho_initial, q, t_i, t_j, kappa)?.get(q_i, q_j))
}

pub fn correlator(
    h: &NhHamiltonian,
    rho_initial: &DensityMatrix,
    q: &Observable,
    t_i: f64,
    t_j: f64,
    kappa: f64,
) -> Result<f64> {
    Ok(joint_table(h, rho_initial, q, t_i, t_j, kappa)?.correlator())
}

/// `K₃` for measurements at `0 ≤ t1 < t2 < t3`.
pub fn k3(
    h: &NhHamiltonian,
    rho_initial: &DensityMatrix,
    q: &Observable,
    times: [f64; 3],
    kappa: f64,
) -> Result<LgiResult> {
    let [t1, t2, t3] = times;
    check_times(t1, t2)?;
    check_times(t2, t3)?;
    let rho1 = DensityPropagator::new(h, kappa, t1)?.apply(rho_initial)?;
    let rho2 = DensityPropagator::new(h, kappa, t2 - t1)?.apply(&rho1)?;
    let tables = [
        table_from(&rho1, q, &DensityPropagator::new(h, kappa, t2 - t1)?, t1, t2)?,
        table_from(&rho2, q, &DensityPropagator::new(h, kappa, t3 - t2)?, t2, t3)?,
        table_from(&rho1, q, &DensityPropagator::new(h, kappa, t3 - t1)?, t1, t3)?,
    ];
    let inputs = LgiInputs {
        hamiltonian: *h,
        initial_bloch: rho_initial.bloch().into(),
        observable: *q,
        times,
        kappa,
    };
    Ok(LgiResult::from_tables(tables, inputs))
}

/// `K₃` for the canonical configuration: `H_θ`, `|↑⟩_y`, the canonical axis, and
/// measurement times `0, t, 2t`.
pub fn k3_canonical(theta: f64, t: f64, kappa: f64) -> Result<LgiResult> {
    let h = NhHamiltonian::canonical(theta)?;
    k3(
        &h,
        &DensityMatrix::from_pure(&PureState::up_y()),
        &Observable::canonical_axis(),
        [0.0, t, 2.0 * t],
        kappa,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormK3 {
    pub c12: f64,
    pub c23: f64,
    pub c13: f64,
    pub k3: f64,
}

fn check_closed_form_domain(theta: f64, t: f64) -> Result<()> {
    if !(0.0..FRAC_PI_2).contains(&theta) {
        return Err(Error::Domain(format!("theta = {theta} outside [0, π/2)")));
    }
    if !(t > 0.0 && t <= FRAC_PI_2) {
        return Err(Error::Domain(format!("t = {t} outside (0, π/2]")));
    }
    Ok(())
}

/// Closed-form correlators for the canonical configuration:
///
/// `C₁₂ = (cos 2t + sinθ)/(1 + cos 2t sinθ)`, `C₁₃ = (cos 4t + sinθ)/(1 + cos 4t sinθ)`,
/// `C₂₃ = −[cos²2t cos²θ sinθ + sin²2t sin²θ + cos 2t (cos²θ + sin²2t sinθ)]
///        / [(cos 2t sinθ − 1)(1 + cos 2t sinθ)²]`.
pub fn k3_closed_form(theta: f64, t: f64) -> Result<ClosedFormK3> {
    check_closed_form_domain(theta, t)?;
    let (s, c) = theta.sin_cos();
    let (s2t, c2t) = (2.0 * t).sin_cos();
    let c4t = (4.0 * t).cos();
    let c12 = (c2t + s) / (1.0 + c2t * s);
    let c13 = (c4t + s) / (1.0 + c4t * s);
    let num = c2t * c2t * c * c * s + s2t * s2t * s * s + c2t * (c * c + s2t * s2t * s);
    let c23 = -num / ((c2t * s - 1.0) * (1.0 + c2t * s).powi(2));
    Ok(ClosedFormK3 { c12, c23, c13, k3: c12 + c23 - c13 })
}

/// Closed-form joint probability tables `(P₁₂, P₂₃, P₁₃)` for the canonical
/// configuration.
pub fn joint_tables_closed_form(theta: f64, t: f64) -> Result<[JointTable; 3]> {
    check_closed_form_domain(theta, t)?;
    let s = theta.sin();
    let (st, ct) = t.sin_cos();
    let c2t = (2.0 * t).cos();
    let s2t = (2.0 * t).sin();
    let c4t = (4.0 * t).cos();
    let d = 1.0 + c2t * s;
    let e = c2t * s - 1.0;
    let p12 = [[ct * ct * (1.0 + s) / d, st * st * (1.0 - s) / d], [0.0, 0.0]];
    let p23 = [
        [
            ct.powi(4) * (1.0 + s).powi(2) / (d * d),
            -ct * ct * st * st * (s - 1.0) * (1.0 + s) / (d * d),
        ],
        [
            st.powi(4) * (s - 1.0) * (1.0 + s) / (e * d),
            -ct * ct * st * st * (s - 1.0).powi(2) / (e * d),
        ],
    ];
    let p13 = [
        [c2t * c2t * (1.0 + s) / (1.0 + c4t * s), s2t * s2t * (1.0 - s) / (1.0 + c4t * s)],
        [0.0, 0.0],
    ];
    Ok([
        JointTable { t_i: 0.0, t_j: t, probs: p12 },
        JointTable { t_i: t, t_j: 2.0 * t, probs: p23 },
        JointTable { t_i: 0.0, t_j: 2.0 * t, probs: p13 },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    #[test]
    fn observable_validation_and_projectors() {
        assert!(Observable::new(Vector3::new(1.0, 1.0, 0.0)).is_err());
        let q = Observable::from_angles(0.8, 2.1);
        let (p, m) = (q.projector(Outcome::Plus), q.projector(Outcome::Minus));
        assert!((p + m - CMat2::identity()).norm() < 1e-15);
        assert!((p * p - p).norm() < 1e-15);
        for o in Outcome::BOTH {
            let rho = DensityMatrix::from_pure(&q.eigenstate(o));
            assert!((q.probability(&rho, o) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn up_y_is_plus_eigenstate_of_canonical_axis() {
        let rho = DensityMatrix::from_pure(&PureState::up_y());
        assert!((Observable::canonical_axis().probability(&rho, Outcome::Plus) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quarter_period_joint_probabilities() {
        for &theta in &[0.0, 0.4, 1.2] {
            let h = NhHamiltonian::canonical(theta).unwrap();
            let rho = DensityMatrix::from_pure(&PureState::up_y());
            let q = Observable::canonical_axis();
            let p12 = joint_table(&h, &rho, &q, 0.0, FRAC_PI_4, 0.0).unwrap();
            assert!((p12.get(Outcome::Plus, Outcome::Plus) - 0.5 * (1.0 + theta.sin())).abs() < 1e-12);
            assert!(p12.get(Outcome::Minus, Outcome::Plus).abs() < 1e-15);
            assert!(p12.get(Outcome::Minus, Outcome::Minus).abs() < 1e-15);
            let p13 = joint_table(&h, &rho, &q, 0.0, FRAC_PI_2, 0.0).unwrap();
            assert!((p13.get(Outcome::Plus, Outcome::Minus) - 1.0).abs() < 1e-12);
            assert!((p13.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn canonical_k3_at_pi_over_six() {
        let r = k3_canonical(FRAC_PI_6, FRAC_PI_4, 0.0).unwrap();
        assert!((r.c12 - 0.5).abs() < 1e-12);
        assert!((r.c23 - 0.25).abs() < 1e-12);
        assert!((r.c13 + 1.0).abs() < 1e-12);
        assert!((r.k3 - 1.75).abs() < 1e-12);
        let hermitian = k3_canonical(0.0, FRAC_PI_4, 0.0).unwrap();
        assert!((hermitian.k3 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_reduces_at_quarter_period() {
        for &theta in &[0.0, 0.3, 1.0, 1.5] {
            let cf = k3_closed_form(theta, FRAC_PI_4).unwrap();
            let s: f64 = theta.sin();
            assert!((cf.c12 - s).abs() < 1e-12);
            assert!((cf.c23 - s * s).abs() < 1e-12);
            assert!((cf.c13 + 1.0).abs() < 1e-12);
        }
        let near = k3_closed_form(FRAC_PI_2 - 1e-7, FRAC_PI_4).unwrap();
        assert!((near.k3 - 3.0).abs() < 1e-10);
        assert!(k3_closed_form(FRAC_PI_2, 0.5).is_err());
        assert!(k3_closed_form(0.5, 0.0).is_err());
    }

    #[test]
    fn closed_form_tables_match_protocol() {
        for &(theta, t) in &[(0.3, 0.4), (1.0, 0.2), (0.7, 1.1)] {
            let r = k3_canonical(theta, t, 0.0).unwrap();
            let cf = joint_tables_closed_form(theta, t).unwrap();
            for (num, closed) in r.tables.iter().zip(&cf) {
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((num.probs[i][j] - closed.probs[i][j]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_unordered_times() {
        let h = NhHamiltonian::canonical(0.2).unwrap();
        let rho = DensityMatrix::maximally_mixed();
        let q = Observable::canonical_axis();
        assert!(joint_table(&h, &rho, &q, 0.5, 0.5, 0.0).is_err());
        assert!(k3(&h, &rho, &q, [0.0, 0.6, 0.3], 0.0).is_err());
        assert!(k3(&h, &rho, &q, [-0.1, 0.6, 0.9], 0.0).is_err());
    }
}
