use serde::Serialize;

use crate::besov::{bochner_norm, dyadic_decompose, time_norm, DyadicSpectrum};
use crate::error::{Result, VnsError};
use crate::spectral::{friedrichs_project, hdot_norm, heat_propagate, SpectralField};

/// Free heat part, forced heat part and remainder of a velocity history.
#[derive(Clone, Debug)]
pub struct DuhamelSplit {
    pub dt: f64,
    pub free: Vec<SpectralField>,
    pub forced: Vec<SpectralField>,
    pub remainder: Vec<SpectralField>,
}

/// Norms of the three parts and of the data they are controlled by.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DuhamelNorms {
    /// `‖u₀‖_{Ḣ^{1/2}}`.
    pub u0_h_half: f64,
    /// `‖S‖_{L^{4/3}_t L²}`.
    pub source_l43_l2: f64,
    /// `‖u_L¹‖_{L^∞Ḣ^{1/2}}`, `‖u_L¹‖_{L²Ḃ^{3/2}_{2,1}}`, `‖u_L¹‖_{L̃¹Ḣ^{5/2}}`.
    pub free: [f64; 3],
    /// `‖u_L²‖_{L^∞Ḣ^{1/2}}`, `‖u_L²‖_{L²Ḃ^{3/2}_{2,1}}`, `‖u_L²‖_{L^{4/3}Ḣ²}`.
    pub forced: [f64; 3],
    /// `‖ũ‖_{L^∞Ḃ^{1/2}_{2,1}}`, `‖ũ‖_{L²Ḃ^{3/2}_{2,1}}`, `‖ũ‖_{L¹Ḃ^{5/2}_{2,1}}`.
    pub remainder: [f64; 3],
}

/// Splits `u = u_L¹ + u_L² + ũ` with `u_L¹ = e^{tΔ}u₀` and
/// `u_L² = ∫e^{(t−τ)Δ}J_n P S`.
///
/// `u` holds `m + 1` samples at spacing `dt`, `source` the `m` midpoint values
/// of `S = j − ρu`. The forced part uses the midpoint rule in the
/// integrating-factor variable.
pub fn duhamel_split(u: &[SpectralField], source: &[SpectralField], dt: f64, cutoff: f64) -> Result<DuhamelSplit> {
    if u.is_empty() || source.len() + 1 != u.len() {
        return Err(VnsError::Usage(format!(
            "need one source sample per interval: {} velocities, {} sources",
            u.len(),
            source.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(VnsError::Usage(format!("dt must be positive, got {dt}")));
    }
    let g = u[0].grid();
    let mut free = Vec::with_capacity(u.len());
    let mut forced = Vec::with_capacity(u.len());
    let mut remainder = Vec::with_capacity(u.len());
    let mut f = u[0].clone();
    let mut l2 = SpectralField::zeros(g, g.dim());
    for (i, ui) in u.iter().enumerate() {
        if i > 0 {
            f = heat_propagate(&f, dt)?;
            l2 = heat_propagate(&l2, dt)?;
            let s = friedrichs_project(&source[i - 1], cutoff)?;
            l2.axpy(dt, &heat_propagate(&s, 0.5 * dt)?);
        }
        let mut r = ui.clone();
        r.axpy(-1.0, &f);
        r.axpy(-1.0, &l2);
        free.push(f.clone());
        forced.push(l2.clone());
        remainder.push(r);
    }
    Ok(DuhamelSplit { dt, free, forced, remainder })
}

impl DuhamelSplit {
    pub fn norms(&self, source: &[SpectralField]) -> Result<DuhamelNorms> {
        let dt = self.dt;
        let spectra = |h: &[SpectralField]| -> Result<Vec<DyadicSpectrum>> { h.iter().map(dyadic_decompose).collect() };
        let sup = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
        let free = spectra(&self.free)?;
        let forced = spectra(&self.forced)?;
        let rem = spectra(&self.remainder)?;
        let h = |hist: &[SpectralField], s: f64| hist.iter().map(|z| hdot_norm(z, s)).collect::<Vec<_>>();
        // sources sit at midpoints: the midpoint rule is the natural quadrature
        let src_l43 = source.iter().map(|s| s.norm_l2().powf(4.0 / 3.0) * dt).sum::<f64>().powf(0.75);
        Ok(DuhamelNorms {
            u0_h_half: hdot_norm(&self.free[0], 0.5),
            source_l43_l2: src_l43,
            free: [
                sup(h(&self.free, 0.5)),
                bochner_norm(&free, dt, 2.0, 1.5, 1.0)?,
                crate::besov::chemin_lerner_norm(&free, dt, 1.0, 2.5, 2.0)?,
            ],
            forced: [
                sup(h(&self.forced, 0.5)),
                bochner_norm(&forced, dt, 2.0, 1.5, 1.0)?,
                time_norm(&h(&self.forced, 2.0), dt, 4.0 / 3.0),
            ],
            remainder: [
                bochner_norm(&rem, dt, f64::INFINITY, 0.5, 1.0)?,
                bochner_norm(&rem, dt, 2.0, 1.5, 1.0)?,
                bochner_norm(&rem, dt, 1.0, 2.5, 1.0)?,
            ],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluid::solver::{FluidParams, FluidState, Forcing};
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    fn data(g: &Grid) -> SpectralField {
        friedrichs_project(
            &SpectralField::from_fn(g, 2, |x, c| (x[0] + 2.0 * x[1] + c as f64).sin() + 0.5 * (3.0 * x[0]).cos()),
            g.dealias_radius(),
        )
        .unwrap()
    }

    #[test]
    fn linear_unforced_has_no_remainder() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let params = FluidParams { nonlinear: false, ..FluidParams::new(&g) };
        let mut s = FluidState::new(&data(&g), &params).unwrap();
        let mut hist = vec![s.u.clone()];
        let src = vec![SpectralField::zeros_vector(&g); 20];
        for _ in 0..20 {
            s.step(&Forcing::None, 0.01, &params).unwrap();
            hist.push(s.u.clone());
        }
        let split = duhamel_split(&hist, &src, 0.01, params.cutoff).unwrap();
        assert!(split.forced.iter().all(|z| z.norm_l2() == 0.0));
        assert!(split.remainder.iter().all(|z| z.norm_l2() < 1e-13));
        let n = split.norms(&src).unwrap();
        assert_eq!(n.forced, [0.0; 3]);
        assert!((n.free[0] - n.u0_h_half).abs() < 1e-12);
    }

    #[test]
    fn constant_source_linear_response() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let params = FluidParams { nonlinear: false, ..FluidParams::new(&g) };
        let s0 = data(&g);
        let mut s = FluidState::new(&SpectralField::zeros_vector(&g), &params).unwrap();
        let mut hist = vec![s.u.clone()];
        for _ in 0..40 {
            s.step(&Forcing::Fixed(&s0), 0.01, &params).unwrap();
            hist.push(s.u.clone());
        }
        let split = duhamel_split(&hist, &vec![s0.clone(); 40], 0.01, params.cutoff).unwrap();
        let rel = split.remainder[40].norm_l2() / split.forced[40].norm_l2();
        assert!(rel < 1e-3, "{rel}");
    }

    #[test]
    fn history_gap_is_usage_error() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let u = vec![SpectralField::zeros_vector(&g); 3];
        assert!(matches!(duhamel_split(&u, &u, 0.1, 1.0), Err(VnsError::Usage(_))));
    }
}
