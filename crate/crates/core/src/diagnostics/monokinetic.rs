use serde::Serialize;

use super::fit::decay_fit;
use crate::besov::field_besov_norm;
use crate::error::{Result, VnsError};
use crate::kinetic::{CicSampler, DragOperator, ParticleEnsemble};
use crate::spectral::{derive, Derivative, SpectralField};

/// Distance of the particle measure from the monokinetic profile `ρ ⊗ δ_{v=u}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MonokineticMetrics {
    /// `Σwᵢ|Vᵢ − u(Xᵢ)|`: the cost of the coupling `Xᵢ ↦ (Xᵢ, u(Xᵢ))`,
    /// an upper bound on `W₁`.
    pub w1_bound: f64,
    /// `√(M₀ Σwᵢ|Vᵢ − u(Xᵢ)|²)`.
    pub cs_bound: f64,
    /// `‖j − ρu‖_{L¹}` with the product taken particle-wise, so that it
    /// vanishes for monokinetic data.
    pub j_minus_rho_u_l1: f64,
    pub kinetic_relative: f64,
}

pub fn monokinetic_metrics(ens: &ParticleEnsemble, u: &SpectralField) -> Result<MonokineticMetrics> {
    let g = u.grid();
    let d = g.dim();
    if ens.dim() != d {
        return Err(VnsError::Usage("ensemble and field dimensions differ".into()));
    }
    let Some(op) = DragOperator::new(ens, g) else {
        return Ok(MonokineticMetrics::default());
    };
    let s = CicSampler::new(u);
    let mut w1 = 0.0;
    let mut kin = 0.0;
    for ((x, v), w) in ens.positions().iter().zip(ens.velocities()).zip(ens.weights()) {
        let ui = crate::kinetic::VelocitySampler::sample(&s, x);
        let r2: f64 = (0..d).map(|a| (v[a] - ui[a]).powi(2)).sum();
        w1 += w * r2.sqrt();
        kin += w * r2;
    }
    let nodes = op.brinkman_nodes(&s);
    let l1 = (0..g.len())
        .map(|p| nodes.iter().map(|c| c[p] * c[p]).sum::<f64>().sqrt())
        .sum::<f64>()
        * g.cell_volume();
    Ok(MonokineticMetrics {
        w1_bound: w1,
        cs_bound: (ens.total_mass() * kin).sqrt(),
        j_minus_rho_u_l1: l1,
        kinetic_relative: kin,
    })
}

/// Density and accumulated momentum at one time.
#[derive(Clone, Debug)]
pub struct DensitySample {
    pub t: f64,
    pub rho: SpectralField,
    /// `∫₀ᵗ j`.
    pub j_integral: SpectralField,
    /// `‖j(t)‖_{L¹}` (or any norm whose tail controls the flux).
    pub j_norm: f64,
}

#[derive(Clone, Debug)]
pub struct AsymptoticDensity {
    /// `ρ₀ − div ∫₀^{t_end} j`.
    pub rho_infty: SpectralField,
    pub mass: f64,
    /// `(t, ‖ρ(t) − ρ_∞‖_{Ḃ^{−1}_{2,∞}})`, a proxy for the `Ẇ^{−1,1}` distance.
    pub residuals: Vec<(f64, f64)>,
    /// Estimated `∫_{t_end}^∞‖j‖` from a power-law fit of the flux tail.
    pub tail: Option<f64>,
    /// True when the tail estimate is below the tolerance.
    pub conclusive: bool,
}

/// Limit density predicted by the continuity equation.
pub fn asymptotic_density(rho0: &SpectralField, history: &[DensitySample], tol: f64) -> Result<AsymptoticDensity> {
    let last = history
        .last()
        .ok_or_else(|| VnsError::Usage("empty density history".into()))?;
    let div = derive(&last.j_integral, Derivative::Div)?;
    let rho_infty = rho0.sub(&div);
    let mass = rho_infty.mean()[0] * rho_infty.grid().volume();
    let residuals = history
        .iter()
        .map(|s| {
            let mut diff = s.rho.sub(&rho_infty);
            diff.remove_mean();
            let r = if diff.norm_l2() == 0.0 { 0.0 } else { field_besov_norm(&diff, -1.0, f64::INFINITY)? };
            Ok((s.t, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let t_end = last.t;
    let ts: Vec<f64> = history.iter().map(|s| s.t).collect();
    let js: Vec<f64> = history.iter().map(|s| s.j_norm).collect();
    let tail = decay_fit(&ts, &js, (0.5 * t_end, t_end)).ok().and_then(|f| {
        (f.exponent < -1.0).then(|| f.prefactor() * t_end.powf(f.exponent + 1.0) / (-f.exponent - 1.0))
    });
    let conclusive = tail.is_some_and(|x| x <= tol) || js.iter().all(|&j| j == 0.0);
    Ok(AsymptoticDensity {
        rho_infty,
        mass,
        residuals,
        tail,
        conclusive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetic::{deposit, VelocitySampler};
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn monokinetic_data_vanish() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let u = SpectralField::from_fn(&g, 2, |x, c| if c == 0 { x[1].sin() } else { 0.5 * x[0].cos() });
        let s = CicSampler::new(&u);
        let xs: Vec<[f64; 3]> = (0..50).map(|i| [0.13 * i as f64, 0.29 * i as f64, 0.0]).collect();
        let vs: Vec<[f64; 3]> = xs.iter().map(|x| s.sample(x)).collect();
        let ens = ParticleEnsemble::from_particles(2, g.length(), xs, vs, vec![0.02; 50]).unwrap();
        let m = monokinetic_metrics(&ens, &u).unwrap();
        assert!(m.w1_bound < 1e-15 && m.cs_bound < 1e-15 && m.j_minus_rho_u_l1 < 1e-14);
    }

    #[test]
    fn two_particles_by_hand() {
        let g = Grid::new(2, 8, 8.0).unwrap();
        let u = SpectralField::zeros_vector(&g);
        let ens = ParticleEnsemble::from_particles(
            2,
            8.0,
            vec![[1.0, 1.0, 0.0], [3.0, 5.0, 0.0]],
            vec![[3.0, 4.0, 0.0], [0.0, -1.0, 0.0]],
            vec![0.25, 0.75],
        )
        .unwrap();
        let m = monokinetic_metrics(&ens, &u).unwrap();
        assert!((m.w1_bound - (0.25 * 5.0 + 0.75)).abs() < 1e-15);
        assert!((m.cs_bound - (1.0f64 * (0.25 * 25.0 + 0.75)).sqrt()).abs() < 1e-15);
        assert!(m.w1_bound <= m.cs_bound);
    }

    #[test]
    fn symmetric_data_keep_density() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let ens = ParticleEnsemble::from_particles(
            2,
            g.length(),
            vec![[1.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
            vec![[0.5, 0.0, 0.0], [-0.5, 0.0, 0.0]],
            vec![0.5, 0.5],
        )
        .unwrap();
        let m = deposit(&ens, &SpectralField::zeros_vector(&g)).unwrap();
        let zero = SpectralField::zeros_vector(&g);
        let hist = vec![DensitySample { t: 1.0, rho: m.rho.clone(), j_integral: zero, j_norm: 0.0 }];
        let a = asymptotic_density(&m.rho, &hist, 1e-3).unwrap();
        assert!((a.mass - 1.0).abs() < 1e-14);
        assert_eq!(a.residuals[0].1, 0.0);
        assert!(a.conclusive);
    }
}
