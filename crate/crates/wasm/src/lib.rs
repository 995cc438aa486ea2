//! Browser bindings for the demo page in `www/`.
//!
//! Each export returns a flat `Float64Array` of fixed-width rows so the page
//! can plot without any JSON round trip.

use nhlgi::dynamics::{
    geodesic_distance, speed_closed_form, DensityMatrix, DensityPropagator, NhHamiltonian,
    PureState,
};
use nhlgi::lgi;
use wasm_bindgen::prelude::*;

const MAX_SAMPLES: usize = 20_000;

fn grid(t_max: f64, samples: usize) -> nhlgi::Result<Vec<f64>> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(nhlgi::Error::Domain(format!("t_max = {t_max} must be positive")));
    }
    if !(2..=MAX_SAMPLES).contains(&samples) {
        return Err(nhlgi::Error::Domain(format!("samples = {samples} outside [2, {MAX_SAMPLES}]")));
    }
    let dt = t_max / (samples - 1) as f64;
    Ok((0..samples).map(|k| k as f64 * dt).collect())
}

/// Rows `(t, K₃)` for the canonical configuration with times `0, t, 2t`.
/// The first sample (t = 0) is skipped.
pub fn k3_rows(theta: f64, kappa: f64, t_max: f64, samples: usize) -> nhlgi::Result<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * samples);
    for &t in grid(t_max, samples)?.iter().skip(1) {
        let k3 = lgi::k3_canonical(theta, t, kappa)?.k3;
        out.extend([t, k3]);
    }
    Ok(out)
}

/// Rows `(t, δ, v)`: geodesic distance from `|↓⟩_y` and the evolution speed.
pub fn distance_rows(theta: f64, t_max: f64, samples: usize) -> nhlgi::Result<Vec<f64>> {
    let h = NhHamiltonian::canonical(theta)?;
    let (start, target) = (PureState::up_y(), PureState::down_y());
    let mut out = Vec::with_capacity(3 * samples);
    for t in grid(t_max, samples)? {
        let psi = nhlgi::dynamics::evolve_pure(&h, &start, t)?;
        out.extend([t, geodesic_distance(&psi, &target), speed_closed_form(theta, t)]);
    }
    Ok(out)
}

/// Rows `(t, x, y, z)` of the Bloch vector from `|↑⟩_y` under noise `κ`.
pub fn trajectory_rows(theta: f64, kappa: f64, t_max: f64, samples: usize) -> nhlgi::Result<Vec<f64>> {
    let h = NhHamiltonian::canonical(theta)?;
    let rho0 = DensityMatrix::from_pure(&PureState::up_y());
    let mut out = Vec::with_capacity(4 * samples);
    for t in grid(t_max, samples)? {
        let s = DensityPropagator::new(&h, kappa, t)?.apply(&rho0)?.bloch();
        out.extend([t, s.x, s.y, s.z]);
    }
    Ok(out)
}

fn js(r: nhlgi::Result<Vec<f64>>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn k3_curve(theta: f64, kappa: f64, t_max: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    js(k3_rows(theta, kappa, t_max, samples))
}

#[wasm_bindgen]
pub fn distance_curve(theta: f64, t_max: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    js(distance_rows(theta, t_max, samples))
}

#[wasm_bindgen]
pub fn bloch_trajectory(theta: f64, kappa: f64, t_max: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    js(trajectory_rows(theta, kappa, t_max, samples))
}
