//! Embedded Runge–Kutta 5(4) integrator (Dormand–Prince coefficients) with
//! adaptive step control. Steps are clipped so every requested output time is
//! hit exactly.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 5th-order minus embedded 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 50_000_000;

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])], h: f64) -> [f64; N] {
    let mut out = *y;
    for (coef, k) in terms {
        for i in 0..N {
            out[i] += h * coef * k[i];
        }
    }
    out
}

/// Integrates `dy/dt = f(t, y)` from `times[0]` and returns the state at every
/// entry of `times` (the first entry is `y0` itself).
pub fn integrate<const N: usize, F>(
    mut f: F,
    y0: [f64; N],
    times: &[f64],
    tol: Tolerances,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    if times.is_empty() {
        return Ok(Vec::new());
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("output times must be strictly increasing".into()));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ODE initial state"));
    }

    let mut out = Vec::with_capacity(times.len());
    out.push(y0);
    let mut t = times[0];
    let mut y = y0;
    let mut k1 = f(t, &y);
    let span = times[times.len() - 1] - times[0];
    let mut h = (span * 1e-3).clamp(1e-6, 1e-2);
    let mut steps = 0usize;
    let mut last_rejected = false;

    for &target in &times[1..] {
        while t < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Stiffness { t, h });
            }
            let remaining = target - t;
            let landing = h >= remaining;
            let step = if landing { remaining } else { h };
            if step < 1e-14 * t.abs().max(1.0) && !landing {
                return Err(Error::Stiffness { t, h: step });
            }

            let k2 = f(t + C2 * step, &axpy(&y, &[(A21, &k1)], step));
            let k3 = f(t + C3 * step, &axpy(&y, &[(A31, &k1), (A32, &k2)], step));
            let k4 = f(
                t + C4 * step,
                &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], step),
            );
            let k5 = f(
                t + C5 * step,
                &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], step),
            );
            let k6 = f(
                t + step,
                &axpy(
                    &y,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                    step,
                ),
            );
            let y_new = axpy(
                &y,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
                step,
            );
            let k7 = f(t + step, &y_new);

            let mut err: f64 = 0.0;
            for i in 0..N {
                let e = step
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max(e.abs() / scale);
            }
            if !err.is_finite() {
                return Err(Error::NonFinite("ODE right-hand side"));
            }

            let accepted = err <= 1.0;
            if accepted {
                t = if landing { target } else { t + step };
                y = y_new;
                k1 = k7;
            }
            let mut factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // no growth straight after a rejection
            if !accepted || last_rejected {
                factor = factor.min(1.0);
            }
            last_rejected = !accepted;
            // a clipped landing step says nothing about the natural step size
            if !(landing && accepted && factor > 1.0) {
                h = step * factor;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Stiffness { t, h });
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.25).collect();
        let ys = integrate(|_, y: &[f64; 1]| [-1.3 * y[0]], [2.0], &times, Tolerances::default())
            .unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y[0] - 2.0 * (-1.3 * t).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn harmonic_oscillator_period() {
        let times = [0.0, std::f64::consts::PI, 2.0 * std::f64::consts::PI];
        let ys = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], [1.0, 0.0], &times, Tolerances::default())
            .unwrap();
        assert!((ys[1][0] + 1.0).abs() < 1e-9);
        assert!((ys[2][0] - 1.0).abs() < 1e-9);
        assert!(ys[2][1].abs() < 1e-9);
    }

    #[test]
    fn finite_time_blowup_reports_stiffness() {
        // y' = y², y(0) = 1 blows up at t = 1
        let res = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], [1.0], &[0.0, 2.0], Tolerances::default());
        assert!(matches!(res, Err(Error::Stiffness { .. }) | Err(Error::NonFinite(_))));
    }

    #[test]
    fn rejects_unordered_times() {
        let res = integrate(|_, y: &[f64; 1]| [y[0]], [1.0], &[0.0, 1.0, 1.0], Tolerances::default());
        assert!(res.is_err());
    }
}
