//! Non-Hermitian two-level propagation: state vectors, density matrices, the
//! nonlinear Bloch equation, and speed/distance diagnostics.

mod bloch;
mod evolve;
mod geometry;
mod hamiltonian;
pub mod ode;
mod state;
mod trajectory;

pub use bloch::{
    analytic_sb_sn, analytic_sb_sn_resolved, bloch_rhs, integrate_bloch, integrate_bloch_with,
};
pub use evolve::{
    density_rhs, evolve_density, evolve_density_noisy, evolve_density_noisy_exact,
    evolve_density_noisy_series, evolve_pure, normalization, DensityPropagator, NoisyPropagator,
};
pub use geometry::{geodesic_closed_form, geodesic_distance, speed, speed_closed_form};
pub use hamiltonian::{check_theta, NhHamiltonian, THETA_MAX};
pub use state::{
    pauli_expectation, spin_projector, BlochVector, DensityMatrix, Frame, PureState,
};
pub use trajectory::{uniform_grid, Trajectory, TrajectoryMeta, DEFAULT_STEP};
