//! The acceptance suite: ten end-to-end checks, each at its stated tolerance.
//!
//! Every check returns a [`CriterionReport`] rather than panicking, so the same
//! code backs the integration test target and the `check` CLI subcommand.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::ode::{self, Tolerances};
use crate::dynamics::{
    analytic_sb_sn_resolved, evolve_density, evolve_density_noisy, geodesic_closed_form,
    geodesic_distance, integrate_bloch_with, speed, speed_closed_form, BlochVector,
    DensityMatrix, DensityPropagator, Frame, NhHamiltonian, PureState,
};
use crate::embedding::{equivalence_sample, k3_via_embedding, theta_from_delta};
use crate::error::Result;
use crate::lgi::{k3_canonical, Observable};
use crate::qmat::{trace_distance, C64};
use crate::scan::{
    default_kappa_grid, k3max_vs_noise, maximize_k3, maximize_speed, ScanConfig,
    DEFAULT_NOISE_DELTA,
};

/// Seed used by every stochastic part of the suite.
pub const SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionReport {
    fn new(id: u8, name: &'static str, passed: bool, detail: String) -> Self {
        Self { id, name, passed, detail }
    }

    fn from_result(id: u8, name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Self::new(id, name, passed, detail),
            Err(e) => Self::new(id, name, false, format!("error: {e}")),
        }
    }

    /// `PASS [3] name: detail`
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} [{}] {}: {}", self.id, self.name, self.detail)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
}

const THETA_NEAR_EP: f64 = FRAC_PI_2 - 1e-3;

/// 1. Numeric-protocol `K₃` at `t = π/4` equals `1 + sinθ + sin²θ` to 1e-8.
pub fn closed_form_k3() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let thetas = [0.0, PI / 6.0, FRAC_PI_4, PI / 3.0, 1.4, THETA_NEAR_EP];
        let mut worst = 0.0f64;
        for theta in thetas {
            let s = theta.sin();
            let got = k3_canonical(theta, FRAC_PI_4, 0.0)?.k3;
            worst = worst.max((got - (1.0 + s + s * s)).abs());
        }
        Ok((worst <= 1e-8, format!("max |K3 - (1+s+s^2)| = {worst:.2e} (tol 1e-8)")))
    };
    CriterionReport::from_result(1, "closed-form K3", run())
}

/// 2. `C₁₃ = (cos4t + sinθ)/(1 + cos4t sinθ)` against the protocol on a 20×20
///    grid, and `C₁₃(π/4) = −1` for every θ.
pub fn c13_pinning() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let mut grid_err = 0.0f64;
        for theta in linspace(0.0, THETA_NEAR_EP, 20) {
            for t in linspace(FRAC_PI_2 / 20.0, FRAC_PI_2, 20) {
                let s = theta.sin();
                let c4 = (4.0 * t).cos();
                let formula = (c4 + s) / (1.0 + c4 * s);
                grid_err = grid_err.max((k3_canonical(theta, t, 0.0)?.c13 - formula).abs());
            }
        }
        let mut pin_err = 0.0f64;
        for theta in linspace(0.0, THETA_NEAR_EP, 20) {
            pin_err = pin_err.max((k3_canonical(theta, FRAC_PI_4, 0.0)?.c13 + 1.0).abs());
        }
        Ok((
            grid_err <= 1e-8 && pin_err <= 1e-8,
            format!("grid max err {grid_err:.2e}, max |C13(pi/4) + 1| = {pin_err:.2e} (tol 1e-8)"),
        ))
    };
    CriterionReport::from_result(2, "C13 pinning", run())
}

/// 3. `K₃ᵐᵃˣ(0) = 3/2 ± 1e-3` and `K₃ᵐᵃˣ(π/2 − 0.1) ≥ 2.98` at the default budget.
pub fn luder_recovery() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let budget = ScanConfig::default().budget;
        let hermitian = maximize_k3(0.0, 0.0, budget, SEED)?.objective;
        let near = maximize_k3(FRAC_PI_2 - 0.1, 0.0, budget, SEED)?.objective;
        Ok((
            (hermitian - 1.5).abs() <= 1e-3 && near >= 2.98,
            format!("K3max(0) = {hermitian:.6} (1.5 ± 1e-3), K3max(pi/2-0.1) = {near:.6} (≥ 2.98)"),
        ))
    };
    CriterionReport::from_result(3, "Luder recovery", run())
}

/// 4. `K₃` through the dilation at `δ = 0.1` equals `3(1 − δ²/2)` within 5e-3.
pub fn algebraic_maximum() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let delta = 0.1;
        let theta = theta_from_delta(delta)?;
        let got = k3_via_embedding(
            theta,
            &PureState::up_y(),
            &Observable::canonical_axis(),
            [0.0, FRAC_PI_4, FRAC_PI_2],
        )?
        .k3;
        let target = 3.0 * (1.0 - delta * delta / 2.0);
        let err = (got - target).abs();
        Ok((err <= 5e-3, format!("K3 = {got:.6}, target {target:.6}, |diff| = {err:.2e} (tol 5e-3)")))
    };
    CriterionReport::from_result(4, "algebraic-maximum approach", run())
}

/// 5. Post-selected dilation reproduces direct evolution: fidelity ≥ 1 − 1e-10
///    and `p_select·N² = N_T²` to 1e-10.
pub fn embedding_equivalence() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let mut worst_fid = 0.0f64;
        let mut worst_sel = 0.0f64;
        let psi0 = PureState::up_y();
        for theta in [0.0, 0.5, 1.0, 1.4] {
            for t in linspace(0.0, PI, 50) {
                let s = equivalence_sample(theta, &psi0, t)?;
                worst_fid = worst_fid.max(1.0 - s.fidelity);
                // selection_identity = p·N²/N_T²
                let n_t2 = crate::embedding::n_t_closed_form(theta).powi(2);
                worst_sel = worst_sel.max(((s.selection_identity - 1.0) * n_t2).abs());
            }
        }
        Ok((
            worst_fid <= 1e-10 && worst_sel <= 1e-10,
            format!("max 1-F = {worst_fid:.2e}, max |p N^2 - N_T^2| = {worst_sel:.2e} (tol 1e-10)"),
        ))
    };
    CriterionReport::from_result(5, "embedding equivalence", run())
}

fn schrodinger_rk(h: &NhHamiltonian, psi0: &PureState, times: &[f64]) -> Result<Vec<PureState>> {
    let m = h.matrix();
    let v0 = psi0.vector();
    let ys = ode::integrate(
        |_, y: &[f64; 4]| {
            let psi = nalgebra::Vector2::new(C64::new(y[0], y[1]), C64::new(y[2], y[3]));
            let d = m * psi * C64::new(0.0, -1.0);
            [d[0].re, d[0].im, d[1].re, d[1].im]
        },
        [v0[0].re, v0[0].im, v0[1].re, v0[1].im],
        times,
        Tolerances { rtol: 1e-12, atol: 1e-14 },
    )?;
    ys.iter()
        .map(|y| {
            PureState::from_vector(nalgebra::Vector2::new(C64::new(y[0], y[1]), C64::new(y[2], y[3])))
        })
        .collect()
}

/// 6. Closed forms against independent numerics: the sign-resolved great
///    circle against RK (1e-6), the geodesic distance against RK-integrated
///    Schrödinger evolution (1e-8), and the speed against the finite-difference
///    overlap (1e-4 relative).
pub fn dynamics_oracles() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let thetas = [0.3, 0.9, 1.4];
        let times: Vec<f64> = linspace(0.0, PI, 101).collect();
        let tight = Tolerances { rtol: 1e-12, atol: 1e-14 };

        let mut orbit_err = 0.0f64;
        let mut geo_err = 0.0f64;
        for theta in thetas {
            let h = NhHamiltonian::canonical(theta)?;
            let (a, b) = (h.a().norm(), h.b().norm());
            let start = BlochVector::cartesian(PureState::up_y().bloch());
            let traj = integrate_bloch_with(&start, &h, 0.0, &times, tight)?;
            for (t, s) in traj.times().iter().zip(traj.states()) {
                let abn = s.to_frame(&h, Frame::Abn).vector();
                let (sb, sn) = analytic_sb_sn_resolved(a, b, *t)?;
                orbit_err = orbit_err.max((abn.y - sb).abs()).max((abn.z - sn).abs());
            }
            let states = schrodinger_rk(&h, &PureState::up_y(), &times)?;
            for (t, psi) in times.iter().zip(&states) {
                let numeric = geodesic_distance(psi, &PureState::down_y());
                geo_err = geo_err.max((numeric - geodesic_closed_form(theta, *t)).abs());
            }
        }

        let mut speed_err = 0.0f64;
        for theta in [0.0, 0.5, 1.0, 1.4] {
            let h = NhHamiltonian::canonical(theta)?;
            for t in linspace(0.0, PI, 41) {
                let exact = speed_closed_form(theta, t);
                let numeric = speed(&h, &PureState::up_y(), t)?;
                speed_err = speed_err.max((numeric - exact).abs() / exact);
            }
        }
        Ok((
            orbit_err <= 1e-6 && geo_err <= 1e-8 && speed_err <= 1e-4,
            format!(
                "orbit {orbit_err:.2e} (1e-6), geodesic {geo_err:.2e} (1e-8), speed rel {speed_err:.2e} (1e-4)"
            ),
        ))
    };
    CriterionReport::from_result(6, "dynamics oracles", run())
}

/// 7. Over `t ∈ [0, 10π]` at `κ = 0`: Bloch norm drift ≤ 1e-8, `S_A = 0`
///    preserved to 1e-8, and period π to 1e-6.
pub fn conservation() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let times: Vec<f64> = linspace(0.0, 10.0 * PI, 1001).collect();
        let mut drift = 0.0f64;
        let mut sa = 0.0f64;
        let mut period = 0.0f64;
        for theta in [0.0, 0.7, 1.2, 1.4] {
            let h = NhHamiltonian::canonical(theta)?;
            // generic pure state for the norm, the |↑⟩_y orbit for S_A = 0
            for (psi, check_sa) in
                [(PureState::from_bloch_angles(1.0, 0.4), false), (PureState::up_y(), true)]
            {
                let start = BlochVector::cartesian(psi.bloch());
                let traj = integrate_bloch_with(&start, &h, 0.0, &times, Tolerances::default())?;
                let states = traj.states();
                for s in states {
                    drift = drift.max((s.norm() - 0.5).abs());
                    if check_sa {
                        sa = sa.max(s.to_frame(&h, Frame::Abn).vector().x.abs());
                    }
                }
                // samples are 10π/1000 apart, so index k + 100 is one period later
                for k in 0..states.len() - 100 {
                    period = period.max((states[k + 100].vector() - states[k].vector()).amax());
                }
            }
        }
        Ok((
            drift <= 1e-8 && sa <= 1e-8 && period <= 1e-6,
            format!("norm drift {drift:.2e} (1e-8), |S_A| {sa:.2e} (1e-8), period {period:.2e} (1e-6)"),
        ))
    };
    CriterionReport::from_result(7, "conservation properties", run())
}

/// Noise-scan output for the default grid close to the exceptional point.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSeries {
    pub theta: f64,
    pub kappa: Vec<f64>,
    pub k3max: Vec<f64>,
}

pub fn default_noise_series(seed: u64) -> Result<NoiseSeries> {
    let theta = theta_from_delta(DEFAULT_NOISE_DELTA)?;
    let grid = default_kappa_grid();
    let results = k3max_vs_noise(theta, &grid, ScanConfig::default().budget, seed)?;
    Ok(NoiseSeries { theta, kappa: grid, k3max: results.iter().map(|r| r.objective).collect() })
}

/// 8. With `κ = 0` the noisy propagators reproduce the noiseless one to 1e-8;
///    on the default grid `K₃ᵐᵃˣ(κ)` is non-increasing (1e-3 slack), its `κ = 0`
///    entry matches the noiseless scan to 1e-6, and its last entry is ≤ 1.01.
pub fn noise_behavior() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let mut prop_err = 0.0f64;
        for theta in [0.3, 1.0, THETA_NEAR_EP] {
            let h = NhHamiltonian::canonical(theta)?;
            let rho0 = DensityMatrix::from_pure(&PureState::from_bloch_angles(0.8, 2.5));
            for t in [0.4, 1.3, 2.9] {
                let clean = evolve_density(&h, &rho0, t)?;
                let exact = crate::dynamics::evolve_density_noisy_exact(&h, &rho0, 0.0, t)?;
                let rk = evolve_density_noisy(&h, &rho0, 0.0, t)?;
                let via = DensityPropagator::new(&h, 0.0, t)?.apply(&rho0)?;
                for other in [exact, rk, via] {
                    prop_err = prop_err.max((other.matrix() - clean.matrix()).norm());
                }
            }
        }

        let series = default_noise_series(SEED)?;
        let rises = series
            .k3max
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        let noiseless = maximize_k3(series.theta, 0.0, ScanConfig::default().budget, SEED)?.objective;
        let zero_err = (series.k3max[0] - noiseless).abs();
        let last = *series.k3max.last().expect("non-empty grid");
        let kmax = *series.kappa.last().expect("non-empty grid");
        Ok((
            prop_err <= 1e-8 && rises <= 1e-3 && zero_err <= 1e-6 && last <= 1.01,
            format!(
                "kappa=0 propagator err {prop_err:.2e} (1e-8); largest rise {rises:.2e} (slack 1e-3); \
                 K3max(0) vs noiseless {zero_err:.2e} (1e-6); K3max(kappa={kmax:e}) = {last:.6} (≤ 1.01); \
                 series {:.4} → {:.4}",
                series.k3max[0], last
            ),
        ))
    };
    CriterionReport::from_result(8, "noise behavior", run())
}

/// θ grid for the speed/violation comparison.
pub const THETA_GRID: [f64; 6] = [0.0, 0.3, 0.6, 0.9, 1.2, 1.47];

fn ranking(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    idx
}

/// 9. The θ grid ranked by `vᵐᵃˣ` and by `K₃ᵐᵃˣ` gives the same order.
pub fn speed_violation_correlation() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let budget = ScanConfig::default().budget;
        let mut k = Vec::new();
        let mut v = Vec::new();
        for theta in THETA_GRID {
            k.push(maximize_k3(theta, 0.0, budget, SEED)?.objective);
            v.push(maximize_speed(theta, budget, SEED)?.objective);
        }
        let (rk, rv) = (ranking(&k), ranking(&v));
        let fmt = |xs: &[f64]| xs.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
        Ok((rk == rv, format!("K3max [{}]; vmax [{}]", fmt(&k), fmt(&v))))
    };
    CriterionReport::from_result(9, "speed-violation correlation", run())
}

/// 10. `D = sin δ` for random pure-state pairs, to 1e-10.
pub fn trace_geodesic_identity() -> CriterionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    let n = 10_000;
    for _ in 0..n {
        let mut draw = || {
            let z = Vector3::new(
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
            );
            let (theta, phi) = (z.x.acos(), PI * (z.y + 1.0));
            PureState::from_bloch_angles(theta, phi)
        };
        let (psi, phi) = (draw(), draw());
        let d = trace_distance(&DensityMatrix::from_pure(&psi), &DensityMatrix::from_pure(&phi));
        worst = worst.max((d - geodesic_distance(&psi, &phi).sin()).abs());
    }
    CriterionReport::new(
        10,
        "trace distance = sin(geodesic)",
        worst <= 1e-10,
        format!("{n} random pairs, max |D - sin d| = {worst:.2e} (tol 1e-10)"),
    )
}

/// Runs all ten criteria in order.
pub fn run_all() -> Vec<CriterionReport> {
    vec![
        closed_form_k3(),
        c13_pinning(),
        luder_recovery(),
        algebraic_maximum(),
        embedding_equivalence(),
        dynamics_oracles(),
        conservation(),
        noise_behavior(),
        speed_violation_correlation(),
        trace_geodesic_identity(),
    ]
}
