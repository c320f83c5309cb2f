use super::dyadic::{check_mean_free, RadialEnergy};
use crate::error::{Result, VnsError};
use crate::spectral::SpectralField;

/// Points per octave of the geometric time grid.
pub const POINTS_PER_OCTAVE: usize = 8;

/// Geometric time grid from `(πN/L)⁻²` to `(2π/L)⁻²`.
pub fn heat_time_grid(k_nyquist: f64, k_unit: f64) -> Vec<f64> {
    let t_min = k_nyquist.powi(-2);
    let t_max = k_unit.powi(-2);
    let ratio = 2f64.powf(1.0 / POINTS_PER_OCTAVE as f64);
    let mut out = Vec::new();
    let mut m = 0;
    loop {
        let t = t_min * ratio.powi(m);
        if t > t_max * (1.0 + 1e-12) {
            break;
        }
        out.push(t);
        m += 1;
    }
    out
}

/// `sup_t t^{σ/2}‖e^{tΔ}z‖_{L²}` over the geometric grid; the heat-flow
/// form of the `Ḃ^{−σ}_{2,∞}` norm.
pub fn heat_characterization_norm(z: &SpectralField, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(VnsError::Usage(format!("sigma must be positive, got {sigma}")));
    }
    check_mean_free(z)?;
    let g = z.grid();
    let bins = RadialEnergy::from_field(z);
    Ok(heat_time_grid(g.k_nyquist(), g.k_unit())
        .into_iter()
        .map(|t| t.powf(sigma / 2.0) * bins.heat_energy(t).sqrt())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::{E, PI};

    #[test]
    fn single_mode_matches_calculus() {
        let g = Grid::new(2, 64, 2.0 * PI).unwrap();
        for (k0, sigma) in [(3.0, 1.5), (5.0, 0.5), (1.0, 1.0)] {
            let z = SpectralField::from_fn(&g, 1, |x, _| (k0 * x[0]).cos());
            let a = z.norm_l2();
            let exact = a * (sigma / (2.0 * E * k0 * k0)).powf(sigma / 2.0);
            let v = heat_characterization_norm(&z, sigma).unwrap();
            assert!(v <= exact * (1.0 + 1e-12));
            assert!((exact - v) / exact < 1e-3, "k0={k0} sigma={sigma} {v} {exact}");
        }
    }

    #[test]
    fn zero_and_errors() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let z = SpectralField::zeros_scalar(&g);
        assert_eq!(heat_characterization_norm(&z, 1.0).unwrap(), 0.0);
        assert!(heat_characterization_norm(&z, 0.0).is_err());
        let c = SpectralField::from_fn(&g, 1, |_, _| 2.0);
        assert!(heat_characterization_norm(&c, 1.0).is_err());
    }
}
