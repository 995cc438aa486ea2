//! Nonlinear Bloch equation for non-Hermitian evolution and its closed-form
//! great-circle solution.

use nalgebra::Vector3;

use super::ode::{self, Tolerances};
use super::trajectory::{Trajectory, TrajectoryMeta};
use super::{BlochVector, Frame, NhHamiltonian};
use crate::error::{Error, Result};

/// `dS/dt = 2A×S − B + 4(B·S)S − 2κS`.
///
/// The `−2κS` term is the noise contribution `κ(𝕀 − 2ρ)` rewritten for
/// `ρ = ½𝕀 + S·σ`.
pub fn bloch_rhs(s: &Vector3<f64>, h: &NhHamiltonian, kappa: f64) -> Vector3<f64> {
    let (a, b) = (h.a(), h.b());
    a.cross(s) * 2.0 - b + s * (4.0 * b.dot(s)) - s * (2.0 * kappa)
}

/// Integrates the Bloch equation with adaptive RK 5(4) and samples the
/// solution at `times` (strictly increasing, starting at the initial time).
pub fn integrate_bloch(
    s0: &BlochVector,
    h: &NhHamiltonian,
    kappa: f64,
    times: &[f64],
) -> Result<Trajectory> {
    integrate_bloch_with(s0, h, kappa, times, Tolerances::default())
}

pub fn integrate_bloch_with(
    s0: &BlochVector,
    h: &NhHamiltonian,
    kappa: f64,
    times: &[f64],
    tol: Tolerances,
) -> Result<Trajectory> {
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::Domain(format!("kappa = {kappa} must be ≥ 0")));
    }
    let start = s0.to_frame(h, Frame::Cartesian).vector();
    let ys = ode::integrate(
        |_, y: &[f64; 3]| bloch_rhs(&Vector3::from(*y), h, kappa).into(),
        start.into(),
        times,
        tol,
    )?;
    let states = ys
        .into_iter()
        .map(|y| BlochVector::cartesian(Vector3::from(y)))
        .collect();
    Trajectory::new(
        times.to_vec(),
        states,
        TrajectoryMeta {
            hamiltonian: *h,
            kappa,
            integrator: format!("dormand-prince-5(4) rtol={:e} atol={:e}", tol.rtol, tol.atol),
        },
    )
}

fn check_magnitudes(a_mag: f64, b_mag: f64) -> Result<f64> {
    if !(b_mag >= 0.0) || !(a_mag > b_mag) || !a_mag.is_finite() {
        return Err(Error::Domain(format!(
            "closed form requires |A| > |B| ≥ 0 (got {a_mag}, {b_mag})"
        )));
    }
    Ok(((a_mag - b_mag) * (a_mag + b_mag)).sqrt())
}

/// Printed closed form of the great-circle solution in the `(B̂, n̂)` plane:
///
/// `S_B = ½ √((A²−B²) sin²(2ωt) / (A − B cos 2ωt)²)`,
/// `S_n = ½ (B − A cos 2ωt) / (A − B cos 2ωt)`, with `ω = √(A² − B²)`.
///
/// This is the orbit of the equation with `B → −B`; see
/// [`analytic_sb_sn_resolved`] for the orbit actually followed under `H`.
pub fn analytic_sb_sn(a_mag: f64, b_mag: f64, t: f64) -> Result<(f64, f64)> {
    let w = check_magnitudes(a_mag, b_mag)?;
    let c = (2.0 * w * t).cos();
    let s = (2.0 * w * t).sin();
    let den = a_mag - b_mag * c;
    let sb = 0.5 * (w * w * s * s / (den * den)).sqrt();
    let sn = 0.5 * (b_mag - a_mag * c) / den;
    Ok((sb, sn))
}

/// Closed-form orbit of `dS/dt = 2A×S − B + 4(B·S)S` starting from
/// `S(0) = −½ n̂` (the `|↑⟩_y` state of the canonical family), in `(B̂, n̂)`
/// components:
///
/// `S_B = ½ ω sin(2ωt) / (A + B cos 2ωt)`,
/// `S_n = −½ (B + A cos 2ωt) / (A + B cos 2ωt)`.
///
/// It coincides with [`analytic_sb_sn`] evaluated at `B → −B`, with the sign of
/// `S_B` following `sin 2ωt`.
pub fn analytic_sb_sn_resolved(a_mag: f64, b_mag: f64, t: f64) -> Result<(f64, f64)> {
    let w = check_magnitudes(a_mag, b_mag)?;
    let c = (2.0 * w * t).cos();
    let s = (2.0 * w * t).sin();
    let den = a_mag + b_mag * c;
    Ok((0.5 * w * s / den, -0.5 * (b_mag + a_mag * c) / den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn larmor_precession() {
        let h = NhHamiltonian::canonical(0.0).unwrap();
        let s = Vector3::new(0.0, 0.0, 0.5);
        let rhs = bloch_rhs(&s, &h, 0.0);
        assert!((rhs - Vector3::new(0.0, -1.0, 0.0)).norm() < 1e-15);
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.1).collect();
        let traj = integrate_bloch(&BlochVector::cartesian(s), &h, 0.0, &times).unwrap();
        for (t, st) in traj.times().iter().zip(traj.states()) {
            let expected = Vector3::new(0.0, -0.5 * (2.0 * t).sin(), 0.5 * (2.0 * t).cos());
            assert!((st.vector() - expected).norm() < 1e-9);
        }
    }

    #[test]
    fn pure_norm_is_conserved_by_rhs() {
        let h = NhHamiltonian::new(Vector3::new(0.0, 1.3, 0.2), Vector3::new(0.5, 0.0, 0.0)).unwrap();
        for &(p, a) in &[(0.3, 1.0), (1.7, 4.0), (2.9, 5.5)] {
            let s = crate::dynamics::PureState::from_bloch_angles(p, a).bloch();
            assert!(s.dot(&bloch_rhs(&s, &h, 0.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_endpoints() {
        let (a, b) = (2.0, 1.2);
        let (sb, sn) = analytic_sb_sn(a, b, 0.0).unwrap();
        assert_eq!(sb, 0.0);
        assert!((sn + 0.5).abs() < 1e-15);
        let w: f64 = (a * a - b * b).sqrt();
        let (sb, sn) = analytic_sb_sn(a, b, PI / (2.0 * w)).unwrap();
        assert!(sb.abs() < 1e-12);
        assert!((sn - 0.5).abs() < 1e-15);
        for &t in &[0.1, 0.77, 2.0] {
            let p = PI / w;
            let (x0, y0) = analytic_sb_sn(a, b, t).unwrap();
            let (x1, y1) = analytic_sb_sn(a, b, t + p).unwrap();
            assert!((x0 - x1).abs() < 1e-12 && (y0 - y1).abs() < 1e-12);
        }
    }

    #[test]
    fn resolved_form_is_printed_form_with_flipped_b() {
        let (a, b) = (1.5, 0.9);
        for &t in &[0.05, 0.4, 1.0, 1.6] {
            let (sb, sn) = analytic_sb_sn_resolved(a, b, t).unwrap();
            // printed expressions with B → −B
            let w = (a * a - b * b).sqrt();
            let c = (2.0 * w * t).cos();
            let pb = 0.5 * (w * w * (2.0 * w * t).sin().powi(2) / (a + b * c).powi(2)).sqrt();
            let pn = 0.5 * (-b - a * c) / (a + b * c);
            assert!((sb.abs() - pb).abs() < 1e-14);
            assert!((sn - pn).abs() < 1e-14);
            assert!((sb * sb + sn * sn - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_rejects_broken_spectrum() {
        assert!(analytic_sb_sn(1.0, 1.0, 0.3).is_err());
        assert!(analytic_sb_sn_resolved(1.0, 2.0, 0.3).is_err());
    }
}
