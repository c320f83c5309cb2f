//! Periodic-box Fourier representation of fields and the operators acting on them.

mod field;
mod grid;
mod ops;
pub mod snapshot;

pub use field::{to_spectral, SpectralField};
pub use grid::Grid;
pub use ops::{
    dealias, derive, friedrichs_project, grad_linf, hdot_norm, heat_propagate, leray_project,
    linf, lp_norm, magnitude, norms, truncate_ball, Derivative, Norms,
};
