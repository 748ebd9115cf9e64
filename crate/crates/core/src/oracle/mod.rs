//! Brute-force solvers used to validate the Gaussian-moment results.

pub mod fock;
pub mod mufti;

pub use fock::{
    build_generator, evolve_fock, evolve_fock_gaussian, interaction_picture_check,
    FockDensityMatrix, FockPoint, FockSettings, FockTrajectory, Generator,
};
pub use mufti::{evolve_mufti, MuftiPoint, MuftiState};
