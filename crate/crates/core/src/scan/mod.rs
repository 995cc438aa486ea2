//! Multi-start direct search for the maximal `K₃` and the maximal evolution
//! speed over initial states, observables and measurement times.
//!
//! Every objective value reported is the value of an actually evaluated
//! feasible point, so results are lower bounds on the true maxima.

mod lhs;
pub mod nelder_mead;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{check_theta, speed, DensityMatrix, NhHamiltonian, PureState};
use crate::error::{Error, Result};
use crate::lgi::{k3, Observable};

pub use lhs::latin_hypercube;
use nelder_mead::NelderMeadConfig;

/// Smallest gap between successive measurement times.
const MIN_GAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub restarts: usize,
    pub simplex_tolerance: f64,
    /// Total objective evaluations, including the Latin-hypercube seeding.
    pub budget: usize,
    pub lhs_points: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { restarts: 16, simplex_tolerance: 1e-8, budget: 200_000, lhs_points: 512 }
    }
}

impl ScanConfig {
    pub fn with_budget(budget: usize) -> Self {
        Self { budget, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    K3,
    Speed,
}

/// Location of the best point found. Fields that the objective does not use
/// are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Argmax {
    pub theta_s: f64,
    pub phi_s: f64,
    pub theta_q: Option<f64>,
    pub phi_q: Option<f64>,
    pub t1: f64,
    pub t2: Option<f64>,
    pub t3: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub objective_kind: Objective,
    pub theta: f64,
    pub kappa: f64,
    pub objective: f64,
    pub argmax: Argmax,
    pub evals: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Best point in search coordinates (the unit box).
    #[serde(skip)]
    pub unit_point: Vec<f64>,
}

/// Maps the 7-dimensional unit box onto `(θ_s, φ_s, θ_q, φ_q, t₁, t₂, t₃)`
/// with `0 ≤ t₁ < t₂ < t₃ ≤ π`. Times are built from `t₁` and two positive
/// gaps, each taking a fraction of the time still available.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K3Point {
    pub theta_s: f64,
    pub phi_s: f64,
    pub theta_q: f64,
    pub phi_q: f64,
    pub times: [f64; 3],
}

impl K3Point {
    pub const DIM: usize = 7;

    pub fn from_unit(u: &[f64]) -> Self {
        let avail = PI - 2.0 * MIN_GAP;
        let t1 = avail * u[4];
        let g1 = MIN_GAP + (avail - t1) * u[5];
        let g2 = MIN_GAP + (avail - t1 - (g1 - MIN_GAP)) * u[6];
        Self {
            theta_s: PI * u[0],
            phi_s: 2.0 * PI * u[1],
            theta_q: PI * u[2],
            phi_q: 2.0 * PI * u[3],
            times: [t1, t1 + g1, t1 + g1 + g2],
        }
    }

    pub fn to_unit(&self) -> Vec<f64> {
        let avail = PI - 2.0 * MIN_GAP;
        let [t1, t2, t3] = self.times;
        let (g1, g2) = (t2 - t1, t3 - t2);
        vec![
            self.theta_s / PI,
            self.phi_s / (2.0 * PI),
            self.theta_q / PI,
            self.phi_q / (2.0 * PI),
            t1 / avail,
            (g1 - MIN_GAP) / (avail - t1),
            (g2 - MIN_GAP) / (avail - t1 - (g1 - MIN_GAP)),
        ]
    }

    /// `|↑⟩_y`, the `−ŷ` observable and times `0, π/4, π/2`.
    pub fn canonical() -> Self {
        Self {
            theta_s: FRAC_PI_2,
            phi_s: 1.5 * PI,
            theta_q: FRAC_PI_2,
            phi_q: 1.5 * PI,
            times: [0.0, FRAC_PI_4, FRAC_PI_2],
        }
    }

    pub fn evaluate(&self, h: &NhHamiltonian, kappa: f64) -> Result<f64> {
        let rho = DensityMatrix::from_pure(&PureState::from_bloch_angles(self.theta_s, self.phi_s));
        let q = Observable::from_angles(self.theta_q, self.phi_q);
        Ok(k3(h, &rho, &q, self.times, kappa)?.k3)
    }

    fn argmax(&self) -> Argmax {
        Argmax {
            theta_s: self.theta_s,
            phi_s: self.phi_s,
            theta_q: Some(self.theta_q),
            phi_q: Some(self.phi_q),
            t1: self.times[0],
            t2: Some(self.times[1]),
            t3: Some(self.times[2]),
        }
    }
}

/// Maps `[0, 1]³` onto `(θ_s, φ_s, t)` with `t ∈ [0, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedPoint {
    pub theta_s: f64,
    pub phi_s: f64,
    pub t: f64,
}

impl SpeedPoint {
    pub const DIM: usize = 3;

    pub fn from_unit(u: &[f64]) -> Self {
        Self { theta_s: PI * u[0], phi_s: 2.0 * PI * u[1], t: PI * u[2] }
    }

    pub fn to_unit(&self) -> Vec<f64> {
        vec![self.theta_s / PI, self.phi_s / (2.0 * PI), self.t / PI]
    }

    /// `|↑⟩_y` at `t = π/2`.
    pub fn canonical() -> Self {
        Self { theta_s: FRAC_PI_2, phi_s: 1.5 * PI, t: FRAC_PI_2 }
    }

    pub fn evaluate(&self, h: &NhHamiltonian) -> Result<f64> {
        speed(h, &PureState::from_bloch_angles(self.theta_s, self.phi_s), self.t)
    }

    fn argmax(&self) -> Argmax {
        Argmax {
            theta_s: self.theta_s,
            phi_s: self.phi_s,
            theta_q: None,
            phi_q: None,
            t1: self.t,
            t2: None,
            t3: None,
        }
    }
}

struct Found {
    x: Vec<f64>,
    value: f64,
    evals: usize,
}

/// Generic multi-start driver: Latin-hypercube seeding, then Nelder–Mead from
/// the best seeds plus the caller's `extra_starts`.
fn multistart<F>(
    objective: F,
    dim: usize,
    cfg: &ScanConfig,
    seed: u64,
    extra_starts: &[Vec<f64>],
) -> Result<(Found, usize)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if cfg.restarts == 0 {
        return Err(Error::Config("at least one restart is required".into()));
    }
    let min_restart = 10 * (dim + 1);
    let seeding = cfg.lhs_points + extra_starts.len();
    if cfg.budget < seeding + min_restart {
        return Err(Error::Config(format!(
            "budget {} cannot cover {} seeding evaluations plus one restart of {}",
            cfg.budget, seeding, min_restart
        )));
    }
    let restarts = cfg.restarts.min((cfg.budget - seeding) / min_restart);
    let per_restart = (cfg.budget - seeding) / restarts;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<(Vec<f64>, f64)> = latin_hypercube(cfg.lhs_points, dim, &mut rng)
        .into_iter()
        .chain(extra_starts.iter().cloned())
        .map(|x| {
            let v = objective(&x);
            (x, if v.is_finite() { v } else { f64::NEG_INFINITY })
        })
        .collect();
    let mut evals = candidates.len();

    // explicit starts always get a restart; fill the rest with the best seeds
    let n_lhs = cfg.lhs_points;
    let mut starts: Vec<Vec<f64>> = candidates[n_lhs..].iter().map(|(x, _)| x.clone()).collect();
    let mut lhs_sorted: Vec<(Vec<f64>, f64)> = candidates.drain(..n_lhs).collect();
    lhs_sorted.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (x, _) in lhs_sorted.iter() {
        if starts.len() >= restarts {
            break;
        }
        starts.push(x.clone());
    }
    starts.truncate(restarts.max(extra_starts.len()));
    let mut best_seed = lhs_sorted.first().map(|(x, v)| (x.clone(), *v));
    for (x, v) in candidates {
        if best_seed.as_ref().is_none_or(|(_, b)| v > *b) {
            best_seed = Some((x, v));
        }
    }

    let run = |(idx, start): (usize, &Vec<f64>)| -> Found {
        let mut local = ChaCha8Rng::seed_from_u64(seed);
        local.set_stream(idx as u64 + 1);
        let mut x = start.clone();
        let mut step = 0.05 + 0.15 * local.gen::<f64>();
        let mut used = 0usize;
        let mut best = Found { x: x.clone(), value: f64::NEG_INFINITY, evals: 0 };
        // restart the simplex around the incumbent until it stops improving
        while per_restart.saturating_sub(used) > dim + 1 {
            let nm = NelderMeadConfig {
                initial_step: step,
                tolerance: cfg.simplex_tolerance,
                max_evals: per_restart - used,
            };
            let out = nelder_mead::maximize(&objective, &x, &nm);
            used += out.evals;
            let improved = out.value > best.value + cfg.simplex_tolerance;
            if out.value > best.value {
                best.value = out.value;
                best.x = out.x.clone();
            }
            if !improved || !out.converged {
                break;
            }
            x = best.x.clone();
            step = (step * 0.5).max(1e-3);
        }
        best.evals = used;
        best
    };

    #[cfg(feature = "parallel")]
    let results: Vec<Found> = {
        use rayon::prelude::*;
        starts.par_iter().enumerate().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Found> = starts.iter().enumerate().map(run).collect();

    let mut best = match best_seed {
        Some((x, value)) => Found { x, value, evals: 0 },
        None => Found { x: vec![0.5; dim], value: f64::NEG_INFINITY, evals: 0 },
    };
    // order-independent reduction: strictly larger wins, ties keep the earlier index
    for r in results {
        evals += r.evals;
        if r.value > best.value {
            best = r;
        }
    }
    if !best.value.is_finite() {
        return Err(Error::Config("no feasible point found".into()));
    }
    Ok((Found { evals, ..best }, starts.len()))
}

/// Maximal `K₃` over the 7-parameter space for `H_θ` with noise `κ`.
pub fn maximize_k3(theta: f64, kappa: f64, budget: usize, seed: u64) -> Result<ScanResult> {
    maximize_k3_with(theta, kappa, &ScanConfig::with_budget(budget), seed, &[])
}

/// As [`maximize_k3`], with explicit configuration and additional starting
/// points (unit-box coordinates). The canonical configuration is always
/// among the starts.
pub fn maximize_k3_with(
    theta: f64,
    kappa: f64,
    cfg: &ScanConfig,
    seed: u64,
    warm_starts: &[Vec<f64>],
) -> Result<ScanResult> {
    check_theta(theta)?;
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::Domain(format!("kappa = {kappa} must be ≥ 0")));
    }
    let h = NhHamiltonian::canonical(theta)?;
    let objective = |u: &[f64]| {
        K3Point::from_unit(u).evaluate(&h, kappa).unwrap_or(f64::NEG_INFINITY)
    };
    let mut starts = vec![K3Point::canonical().to_unit()];
    starts.extend(warm_starts.iter().cloned());
    let (found, restarts) = multistart(objective, K3Point::DIM, cfg, seed, &starts)?;
    let point = K3Point::from_unit(&found.x);
    Ok(ScanResult {
        objective_kind: Objective::K3,
        theta,
        kappa,
        objective: found.value,
        argmax: point.argmax(),
        evals: found.evals,
        restarts,
        seed,
        unit_point: found.x,
    })
}

/// Maximal speed over initial states and a single time in `[0, π]`.
pub fn maximize_speed(theta: f64, budget: usize, seed: u64) -> Result<ScanResult> {
    maximize_speed_with(theta, &ScanConfig::with_budget(budget), seed)
}

pub fn maximize_speed_with(theta: f64, cfg: &ScanConfig, seed: u64) -> Result<ScanResult> {
    check_theta(theta)?;
    let h = NhHamiltonian::canonical(theta)?;
    let objective =
        |u: &[f64]| SpeedPoint::from_unit(u).evaluate(&h).unwrap_or(f64::NEG_INFINITY);
    let starts = vec![SpeedPoint::canonical().to_unit()];
    let (found, restarts) = multistart(objective, SpeedPoint::DIM, cfg, seed, &starts)?;
    Ok(ScanResult {
        objective_kind: Objective::Speed,
        theta,
        kappa: 0.0,
        objective: found.value,
        argmax: SpeedPoint::from_unit(&found.x).argmax(),
        evals: found.evals,
        restarts,
        seed,
        unit_point: found.x,
    })
}

/// `K₃ᵐᵃˣ` at each noise strength.
///
/// The grid is swept upwards, each search also starting from the previous
/// optimum so narrow ridges are followed as they shrink. A downward pass then
/// re-polishes every entry from its right neighbour's optimum, since a
/// configuration found at larger noise is a valid candidate at smaller noise.
pub fn k3max_vs_noise(
    theta: f64,
    kappa_grid: &[f64],
    budget: usize,
    seed: u64,
) -> Result<Vec<ScanResult>> {
    k3max_vs_noise_with(theta, kappa_grid, &ScanConfig::with_budget(budget), seed)
}

pub fn k3max_vs_noise_with(
    theta: f64,
    kappa_grid: &[f64],
    cfg: &ScanConfig,
    seed: u64,
) -> Result<Vec<ScanResult>> {
    if kappa_grid.is_empty() {
        return Err(Error::Config("empty noise grid".into()));
    }
    let mut out: Vec<ScanResult> = Vec::with_capacity(kappa_grid.len());
    for &kappa in kappa_grid {
        let warm: Vec<Vec<f64>> =
            out.last().map(|r| vec![r.unit_point.clone()]).unwrap_or_default();
        out.push(maximize_k3_with(theta, kappa, cfg, seed, &warm)?);
    }
    let h = NhHamiltonian::canonical(theta)?;
    let polish = NelderMeadConfig {
        initial_step: 0.01,
        tolerance: cfg.simplex_tolerance,
        max_evals: (cfg.budget / 10).max(10 * (K3Point::DIM + 1)),
    };
    for i in (0..out.len() - 1).rev() {
        let kappa = out[i].kappa;
        let objective = |u: &[f64]| {
            K3Point::from_unit(u).evaluate(&h, kappa).unwrap_or(f64::NEG_INFINITY)
        };
        let start = out[i + 1].unit_point.clone();
        if objective(&start) <= out[i].objective {
            out[i].evals += 1;
            continue;
        }
        let found = nelder_mead::maximize(&objective, &start, &polish);
        let r = &mut out[i];
        r.evals += found.evals + 1;
        if found.value > r.objective {
            r.objective = found.value;
            r.argmax = K3Point::from_unit(&found.x).argmax();
            r.unit_point = found.x;
        }
    }
    Ok(out)
}

/// Default noise grid: 0 followed by two points per decade from
/// [`DEFAULT_KAPPA_MIN`] to [`DEFAULT_KAPPA_MAX`].
///
/// The upper end is set by the physics rather than by any unit convention:
/// close to the exceptional point the state flips at rates of order
/// `|A| + |B|`, and violations survive until `κ` is comparable to them.
pub fn default_kappa_grid() -> Vec<f64> {
    let decades = (DEFAULT_KAPPA_MAX / DEFAULT_KAPPA_MIN).log10().round() as i32;
    let mut grid = vec![0.0];
    grid.extend((0..=2 * decades).map(|k| DEFAULT_KAPPA_MIN * 10f64.powf(f64::from(k) / 2.0)));
    grid
}

pub const DEFAULT_KAPPA_MIN: f64 = 1e-6;
pub const DEFAULT_KAPPA_MAX: f64 = 1e4;
/// Distance `π/2 − θ` used for noise studies near the exceptional point.
pub const DEFAULT_NOISE_DELTA: f64 = 1e-3;

/// Smallest noise strength (to a relative precision of `rel_tol`) at which
/// `K₃ᵐᵃˣ ≤ level`, found by geometric bisection on `[lo, hi]`.
pub fn saturation_threshold(
    theta: f64,
    level: f64,
    lo: f64,
    hi: f64,
    cfg: &ScanConfig,
    seed: u64,
    rel_tol: f64,
) -> Result<f64> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Config(format!("invalid bracket [{lo}, {hi}]")));
    }
    let below = |kappa: f64| -> Result<bool> {
        Ok(maximize_k3_with(theta, kappa, cfg, seed, &[])?.objective <= level)
    };
    if !below(hi)? {
        return Err(Error::Config(format!("K3max still above {level} at kappa = {hi}")));
    }
    if below(lo)? {
        return Ok(lo);
    }
    let (mut a, mut b) = (lo, hi);
    while b / a > 1.0 + rel_tol {
        let mid = (a * b).sqrt();
        if below(mid)? {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k3_point_round_trip() {
        let p = K3Point::canonical();
        let back = K3Point::from_unit(&p.to_unit());
        for (a, b) in back.times.iter().zip(&p.times) {
            assert!((a - b).abs() < 1e-12);
        }
        let u = [0.2, 0.4, 0.6, 0.8, 0.3, 0.5, 0.9];
        let q = K3Point::from_unit(&u);
        assert!(q.times[0] < q.times[1] && q.times[1] < q.times[2] && q.times[2] <= PI);
        for (a, b) in q.to_unit().iter().zip(&u) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn extreme_unit_points_stay_feasible() {
        for u in [[0.0; 7], [1.0; 7]] {
            let p = K3Point::from_unit(&u);
            assert!(p.times[0] >= 0.0 && p.times[1] > p.times[0] && p.times[2] > p.times[1]);
            assert!(p.times[2] <= PI + 1e-12);
            let h = NhHamiltonian::canonical(0.5).unwrap();
            assert!(p.evaluate(&h, 0.0).unwrap().is_finite());
        }
    }

    #[test]
    fn canonical_point_value() {
        let h = NhHamiltonian::canonical(0.6).unwrap();
        let v = K3Point::canonical().evaluate(&h, 0.0).unwrap();
        let s = 0.6f64.sin();
        assert!((v - (1.0 + s + s * s)).abs() < 1e-12);
    }

    #[test]
    fn small_budget_is_rejected() {
        assert!(matches!(maximize_k3(0.3, 0.0, 100, 1), Err(Error::Config(_))));
        assert!(matches!(maximize_speed(0.3, 520, 1), Err(Error::Config(_))));
    }

    #[test]
    fn scan_is_deterministic_and_sound() {
        let cfg = ScanConfig { budget: 6000, restarts: 4, ..Default::default() };
        let a = maximize_k3_with(0.4, 0.0, &cfg, 11, &[]).unwrap();
        let b = maximize_k3_with(0.4, 0.0, &cfg, 11, &[]).unwrap();
        assert_eq!(a, b);
        assert!(a.evals <= cfg.budget);
        let h = NhHamiltonian::canonical(0.4).unwrap();
        let recomputed = K3Point::from_unit(&a.unit_point).evaluate(&h, 0.0).unwrap();
        assert_eq!(recomputed, a.objective);
        let s = 0.4f64.sin();
        assert!(a.objective >= 1.0 + s + s * s - 1e-6);
    }

    #[test]
    fn default_grid_shape() {
        let g = default_kappa_grid();
        assert_eq!(g[0], 0.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g.len(), 22);
        assert!((g[g.len() - 1] / DEFAULT_KAPPA_MAX - 1.0).abs() < 1e-12);
    }
}
