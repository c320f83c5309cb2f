use num_complex::Complex64;
use serde::Serialize;

use crate::besov::lorentz_norm;
use crate::error::{Result, VnsError};
use crate::fluid::convection;
use crate::spectral::{derive, grad_linf, Derivative, SpectralField};

/// Default exponent, the midpoint of `(0, 1/2)`.
pub const DEFAULT_ETA: f64 = 0.25;

/// Dyadic separations `1, 1/2, …, 2^{−LOGLIP_OCTAVES}` probed by [`loglip_norm`].
pub const LOGLIP_OCTAVES: i32 = 10;

/// Modulus `ω̃_η(r) = r(1 − log r)^{1−η}` on `(0, 1]`.
pub fn omega(r: f64, eta: f64) -> f64 {
    r * (1.0 - r.ln()).powf(1.0 - eta)
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 0.5 {
        Ok(())
    } else {
        Err(VnsError::Usage(format!("eta must lie in (0, 1/2), got {eta}")))
    }
}

/// Sampled `sup |f(x + r e) − f(x)| / ω̃_η(r)` for an arbitrary map, over the
/// given base points, unit directions and separations `r ∈ (0, 1]`.
pub fn loglip_of_map<F>(f: F, points: &[[f64; 3]], dirs: &[[f64; 3]], radii: &[f64], eta: f64) -> Result<f64>
where
    F: Fn(&[f64; 3]) -> [f64; 3],
{
    check_eta(eta)?;
    let mut best = 0.0f64;
    for x in points {
        let fx = f(x);
        for e in dirs {
            for &r in radii {
                if !(r > 0.0 && r <= 1.0) {
                    return Err(VnsError::Usage(format!("separation {r} outside (0, 1]")));
                }
                let y = [x[0] + r * e[0], x[1] + r * e[1], x[2] + r * e[2]];
                let fy = f(&y);
                let diff = ((fy[0] - fx[0]).powi(2) + (fy[1] - fx[1]).powi(2) + (fy[2] - fx[2]).powi(2)).sqrt();
                best = best.max(diff / omega(r, eta));
            }
        }
    }
    Ok(best)
}

/// Log-Lipschitz seminorm `‖u‖_{C_{ω̃_η}}` sampled on the lattice.
///
/// Each coordinate shift by `r = 2^{−m}` is applied exactly through its Fourier
/// phase, so pairs at separations below the lattice spacing are reachable.
/// The result is a lower bound of the true supremum.
pub fn loglip_norm(u: &SpectralField, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let g = u.grid();
    let d = g.dim();
    let base = u.to_physical();
    let mut best = 0.0f64;
    for a in 0..d {
        for m in 0..=LOGLIP_OCTAVES {
            let r = 2f64.powi(-m);
            let mut shifted = u.clone();
            let gg = g.clone();
            for c in shifted.components_mut() {
                for (p, z) in c.iter_mut().enumerate() {
                    if gg.is_nyquist(p) && gg.wave_vector_index(p)[a] == -((gg.n() / 2) as i64) {
                        *z = Complex64::new(0.0, 0.0);
                        continue;
                    }
                    let ph = gg.wave_vector(p)[a] * r;
                    *z *= Complex64::new(ph.cos(), ph.sin());
                }
            }
            let sp = shifted.to_physical();
            let w = omega(r, eta);
            for p in 0..g.len() {
                let diff: f64 = (0..u.n_comps()).map(|c| (sp[c][p] - base[c][p]).powi(2)).sum();
                best = best.max(diff.sqrt() / w);
            }
        }
    }
    Ok(best)
}

/// The three `L^{d,1}` terms controlling `∫‖∇u‖_∞`, with the measured gradient.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct LipschitzChain {
    /// Lorentz index `p = d`.
    pub p: f64,
    pub u_t: f64,
    pub convection: f64,
    pub brinkman: f64,
    pub grad_linf: f64,
    /// `‖∇²u‖_{L^{d,1}}`, the right side of the embedding `‖∇u‖_∞ ≲ ‖∇²u‖_{L^{d,1}}`.
    pub hessian: f64,
}

impl LipschitzChain {
    /// `‖∇u‖_∞ / ‖∇²u‖_{L^{d,1}}`, the empirical embedding constant.
    pub fn embedding_ratio(&self) -> Option<f64> {
        (self.hessian > 0.0).then(|| self.grad_linf / self.hessian)
    }
}

pub fn lipschitz_chain_report(u: &SpectralField, u_t: &SpectralField, brinkman: &SpectralField) -> Result<LipschitzChain> {
    let p = u.grid().dim() as f64;
    Ok(LipschitzChain {
        p,
        u_t: lorentz_norm(u_t, p, 1.0)?,
        convection: lorentz_norm(&convection(u)?, p, 1.0)?,
        brinkman: lorentz_norm(brinkman, p, 1.0)?,
        grad_linf: grad_linf(u),
        hessian: lorentz_norm(&derive(u, Derivative::Hessian)?, p, 1.0)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn omega_dominates_identity() {
        for r in [1e-6, 0.01, 0.3, 1.0] {
            assert!(omega(r, 0.25) >= r);
        }
        assert_eq!(omega(1.0, 0.25), 1.0);
    }

    #[test]
    fn linear_map_attains_at_unit_separation() {
        let a = 2.5;
        let radii: Vec<f64> = (0..40).map(|i| 1.0 - 0.024 * i as f64).collect();
        let v = loglip_of_map(|x| [a * x[0], 0.0, 0.0], &[[0.3, 0.0, 0.0]], &[[1.0, 0.0, 0.0]], &radii, 0.25).unwrap();
        assert!((v - a).abs() < 1e-12);
        assert!(loglip_of_map(|x| *x, &[[0.0; 3]], &[[1.0, 0.0, 0.0]], &[0.5], 0.6).is_err());
    }

    #[test]
    fn single_mode_below_gradient_bound() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let u = SpectralField::from_fn(&g, 2, |x, c| if c == 0 { 0.7 * (3.0 * x[1]).sin() } else { 0.0 });
        let v = loglip_norm(&u, 0.25).unwrap();
        assert!(v > 0.0 && v <= grad_linf(&u) * (1.0 + 1e-12));
        let c = SpectralField::zeros_vector(&g);
        assert_eq!(loglip_norm(&c, 0.25).unwrap(), 0.0);
    }

    #[test]
    fn chain_of_zero_field() {
        let g = Grid::new(3, 8, 2.0 * PI).unwrap();
        let z = SpectralField::zeros_vector(&g);
        let r = lipschitz_chain_report(&z, &z, &z).unwrap();
        assert_eq!((r.u_t, r.convection, r.brinkman, r.grad_linf, r.hessian), (0.0, 0.0, 0.0, 0.0, 0.0));
    }
}
