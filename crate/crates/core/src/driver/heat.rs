use serde::Serialize;

use super::config::RunConfig;
use super::init::build_grid;
use crate::diagnostics::{decay_fit, DecayFit};
use crate::error::Result;
use crate::spectral::{hdot_norm, heat_propagate, SpectralField};

/// Samples per decade of the geometric time grid.
const SAMPLES_PER_DECADE: usize = 24;

/// Free heat decay of a centred Gaussian with its mean removed.
#[derive(Clone, Debug, Serialize)]
pub struct HeatDecayReport {
    pub t: Vec<f64>,
    /// `‖e^{tΔ}z₀‖²`.
    pub l2_sq: Vec<f64>,
    /// `‖∇e^{tΔ}z₀‖²`.
    pub grad_sq: Vec<f64>,
    pub fit_l2: DecayFit,
    pub fit_grad: DecayFit,
    /// Whole-space exponents `−d/2` and `−d/2 − 1`.
    pub expected_l2: f64,
    pub expected_grad: f64,
}

pub fn heat_decay(cfg: &RunConfig) -> Result<HeatDecayReport> {
    let grid = build_grid(cfg)?;
    let d = cfg.dim;
    let c = cfg.center();
    let l = cfg.length;
    let w2 = cfg.heat_width * cfg.heat_width;
    let mut z0 = SpectralField::from_fn(&grid, 1, |x, _| {
        let r2: f64 = (0..d).map(|a| (x[a] - c[a] - l * ((x[a] - c[a]) / l).round()).powi(2)).sum();
        (-r2 / (2.0 * w2)).exp()
    });
    z0.remove_mean();
    let (a, b) = cfg.heat_window;
    let count = ((b / a).log10() * SAMPLES_PER_DECADE as f64).ceil().max(10.0) as usize;
    let mut rep = HeatDecayReport {
        t: Vec::with_capacity(count + 1),
        l2_sq: Vec::new(),
        grad_sq: Vec::new(),
        fit_l2: DecayFit { exponent: 0.0, stderr: 0.0, log_prefactor: 0.0, samples: 0, window: (a, b) },
        fit_grad: DecayFit { exponent: 0.0, stderr: 0.0, log_prefactor: 0.0, samples: 0, window: (a, b) },
        expected_l2: -(d as f64) / 2.0,
        expected_grad: -(d as f64) / 2.0 - 1.0,
    };
    for i in 0..=count {
        let t = a * (b / a).powf(i as f64 / count as f64);
        let z = heat_propagate(&z0, t)?;
        rep.t.push(t);
        rep.l2_sq.push(z.norm_l2_sq());
        rep.grad_sq.push(hdot_norm(&z, 1.0).powi(2));
    }
    // guard the endpoints against rounding in the geometric grid
    let window = (a * (1.0 - 1e-12), b * (1.0 + 1e-12));
    rep.fit_l2 = decay_fit(&rep.t, &rep.l2_sq, window)?;
    rep.fit_grad = decay_fit(&rep.t, &rep.grad_sq, window)?;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_dimensional_slopes() {
        let cfg = RunConfig::parse("dim = 2\nN = 64\nL = 201.06192982974676\nheat_width = 0.25\nheat_window = 1:50").unwrap();
        let r = heat_decay(&cfg).unwrap();
        assert!((r.fit_l2.exponent + 1.0).abs() < 0.05, "{}", r.fit_l2.exponent);
        assert!((r.fit_grad.exponent + 2.0).abs() < 0.05, "{}", r.fit_grad.exponent);
    }
}
