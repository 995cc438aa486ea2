use super::{evolve_pure, BlochVector, Frame, NhHamiltonian, PureState};
use crate::error::{Error, Result};
use crate::export::Table;

/// Default sampling step for exported trajectories.
pub const DEFAULT_STEP: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub hamiltonian: NhHamiltonian,
    pub kappa: f64,
    pub integrator: String,
}

/// Time-ordered samples of a Bloch-vector trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<BlochVector>,
    meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<BlochVector>, meta: TrajectoryMeta) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::Domain(format!(
                "{} times but {} states",
                times.len(),
                states.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("trajectory times must be strictly increasing".into()));
        }
        Ok(Self { times, states, meta })
    }

    /// Samples `N(t) exp(−iHt) ψ₀` directly from the propagator.
    pub fn sample_pure(h: &NhHamiltonian, psi0: &PureState, times: &[f64]) -> Result<Self> {
        let states = times
            .iter()
            .map(|&t| evolve_pure(h, psi0, t).map(|psi| BlochVector::cartesian(psi.bloch())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            times.to_vec(),
            states,
            TrajectoryMeta { hamiltonian: *h, kappa: 0.0, integrator: "exponential".into() },
        )
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[BlochVector] {
        &self.states
    }

    pub fn meta(&self) -> &TrajectoryMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Plot-ready table with columns `t`, the three components in `frame`,
    /// and `purity`.
    pub fn to_table(&self, frame: Frame) -> Table {
        let h = &self.meta.hamiltonian;
        let columns = match frame {
            Frame::Cartesian => ["t", "S_x", "S_y", "S_z", "purity"],
            Frame::Abn => ["t", "S_A", "S_B", "S_n", "purity"],
        };
        let mut table = Table::new(&columns);
        table.meta("frame", format!("{frame:?}"));
        if let Some(theta) = h.theta() {
            table.meta("theta", theta);
        }
        table.meta("scale", h.scale());
        table.meta("kappa", self.meta.kappa);
        table.meta("integrator", &self.meta.integrator);
        for (t, s) in self.times.iter().zip(&self.states) {
            let v = s.to_frame(h, frame).vector();
            table.push(vec![*t, v.x, v.y, v.z, s.purity()]);
        }
        table
    }
}

/// `start, start + step, …` up to `stop` inclusive (within 1e-9 of a step).
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !step.is_finite() || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Domain(format!("invalid grid step {step}")));
    }
    if stop < start {
        return Err(Error::Domain(format!("grid stop {stop} precedes start {start}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}
