//! Truncated momentum equation: the spectral step with drag source,
//! pressure recovery and the heat-flow splitting of the velocity.

mod duhamel;
mod solver;

pub use duhamel::{duhamel_split, DuhamelNorms, DuhamelSplit};
pub use solver::{
    advection, convection, pressure_solve, rhs, rhs_with, stokes_residual, FluidParams, FluidState, Forcing, Scheme,
    StepInfo, CFL_LIMIT,
};
