//! Gaussian-moment dynamics and observables.

mod evolve;
mod moments;
mod observables;

pub use evolve::{
    evolve, first_moment_at, observe_moments, second_moments_at, uniform_grid, validate_grid, Trajectory,
    TrajectoryPoint, DEFAULT_GRID_POINTS,
};
pub use moments::{to_complex, to_real, ComplexMoments, RealMoments, PHYSICALITY_SLACK};
pub use observables::{
    coherence_energy_basis, coherence_ss_basis, energy, entropy, fidelity, gibbs_moments,
    occupation_energy_basis, occupation_ss_basis, steady_state_from_forcing,
    steady_state_moments, thermal_entropy,
};
