//! Nelder–Mead simplex search on the unit box `[0, 1]^n`. Trial points are
//! clamped to the box.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadConfig {
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Converged once the spread of objective values across the simplex
    /// falls below this.
    pub tolerance: f64,
    pub max_evals: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self { initial_step: 0.1, tolerance: 1e-8, max_evals: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn clamp_box(x: &mut [f64]) {
    for v in x.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

/// Maximizes `f` starting from `x0`. Non-finite objective values are treated
/// as −∞.
pub fn maximize<F>(mut f: F, x0: &[f64], cfg: &NelderMeadConfig) -> SearchOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        // minimize the negation
        if v.is_finite() {
            -v
        } else {
            f64::INFINITY
        }
    };

    let mut start = x0.to_vec();
    clamp_box(&mut start);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(&start, &mut evals);
    simplex.push((start.clone(), f0));
    for i in 0..n {
        let mut p = start.clone();
        p[i] += if p[i] + cfg.initial_step <= 1.0 { cfg.initial_step } else { -cfg.initial_step };
        clamp_box(&mut p);
        let fp = eval(&p, &mut evals);
        simplex.push((p, fp));
    }

    let mut converged = false;
    while evals < cfg.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= cfg.tolerance {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for (p, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let along = |coef: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + coef * (c - w))
                .collect();
            clamp_box(&mut p);
            p
        };

        let xr = along(REFLECT);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(EXPAND);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let xc = along(CONTRACT);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-CONTRACT);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for (p, fp) in simplex.iter_mut().skip(1) {
            for (v, a) in p.iter_mut().zip(&anchor) {
                *v = a + SHRINK * (*v - a);
            }
            *fp = eval(p, &mut evals);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = simplex.swap_remove(0);
    SearchOutcome { x, value: -v, evals, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_quadratic_maximum() {
        let target = [0.3, 0.7, 0.55];
        let f = |x: &[f64]| -x.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let out = maximize(f, &[0.9, 0.1, 0.2], &NelderMeadConfig { tolerance: 1e-14, ..Default::default() });
        assert!(out.converged);
        for (a, b) in out.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn respects_box_boundary() {
        let f = |x: &[f64]| x[0] + x[1];
        let out = maximize(f, &[0.5, 0.5], &NelderMeadConfig::default());
        assert!((out.value - 2.0).abs() < 1e-6);
        assert!(out.x.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn honours_budget_and_nan() {
        let f = |x: &[f64]| if x[0] > 0.8 { f64::NAN } else { x[0] };
        let out = maximize(f, &[0.1, 0.1], &NelderMeadConfig { max_evals: 50, ..Default::default() });
        assert!(out.evals <= 50 + 3);
        assert!(out.value <= 0.8 && out.value.is_finite());
    }
}
