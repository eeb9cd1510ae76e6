//! Independent eigenvalue solvers: radial shooting for rotationally
//! symmetric models and a finite-volume solver for 2-D polar metrics.

mod banded;
mod polar2d;
mod shooting;

use serde::Serialize;

pub use polar2d::{assembly_asymmetry, eigen_2d_polar, eigen_2d_polar_study, rayleigh_quotient_2d, Mesh2D, MeshStudy};
pub use shooting::{shoot_area, shoot_radial_lambda1};

/// First eigenvalue and eigenfunction. Radial eigenfunctions are sampled at
/// the grid nodes with `f(0) = 1` and `f(R) = 0`; 2-D eigenfunctions are
/// listed center first, then ring by ring, scaled to peak 1.
#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub lambda1: f64,
    #[serde(skip)]
    pub eigenfunction: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}
