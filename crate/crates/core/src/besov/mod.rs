//! Littlewood–Paley shells, Besov and Chemin–Lerner norms, the heat-flow
//! characterization, Lorentz norms and interpolation checkers.

mod chemin_lerner;
mod dyadic;
mod heat_char;
mod interpolation;
mod lorentz;

pub use chemin_lerner::{bochner_norm, chemin_lerner_norm, time_norm};
pub use dyadic::{
    besov_norm, dyadic_decompose, shell_index, shell_project, shell_range, DyadicSpectrum,
    RadialEnergy, Summation,
};
pub use heat_char::{heat_characterization_norm, heat_time_grid, POINTS_PER_OCTAVE};
pub use interpolation::{
    decay_exponent, interpolation_check, theta_gradient, theta_l2, InterpolationReport,
};
pub use lorentz::{lorentz_norm, ReArrangement};

use crate::error::Result;
use crate::spectral::SpectralField;

/// `‖z‖_{Ḃ^s_{2,r}}` straight from a field.
pub fn field_besov_norm(z: &SpectralField, s: f64, r: f64) -> Result<f64> {
    besov_norm(&dyadic_decompose(z)?, s, r)
}
