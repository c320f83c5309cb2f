use super::ensemble::ParticleEnsemble;
use super::sampler::{CicSampler, Stencil};
use crate::error::{Result, VnsError};
use crate::spectral::{to_spectral, Grid, SpectralField};

/// Hydrodynamic moments of the particle measure on the lattice.
#[derive(Clone, Debug)]
pub struct MomentFields {
    pub rho: SpectralField,
    pub j: SpectralField,
    pub m2: SpectralField,
    /// Deposit of `wᵢ(Vᵢ − u(Xᵢ))`, before projection.
    pub brinkman: SpectralField,
    rho_nodes: Vec<f64>,
    j_nodes: Vec<Vec<f64>>,
    m2_nodes: Vec<f64>,
}

impl MomentFields {
    /// Density at the deposition nodes.
    pub fn rho_nodes(&self) -> &[f64] {
        &self.rho_nodes
    }

    pub fn m2_nodes(&self) -> &[f64] {
        &self.m2_nodes
    }

    /// Kernel-smoothed `‖ρ‖_∞`: the max over deposition nodes.
    pub fn rho_max(&self) -> f64 {
        self.rho_nodes.iter().copied().fold(0.0, f64::max)
    }

    pub fn j_max(&self) -> f64 {
        (0..self.rho_nodes.len())
            .map(|p| self.j_nodes.iter().map(|c| c[p] * c[p]).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn m2_max(&self) -> f64 {
        self.m2_nodes.iter().copied().fold(0.0, f64::max)
    }

    /// `∫ρ` by the lattice rule.
    pub fn mass(&self, grid: &Grid) -> f64 {
        self.rho_nodes.iter().sum::<f64>() * grid.cell_volume()
    }
}

/// Frozen particle data for evaluating the drag source against any stage
/// velocity during a fluid step.
#[derive(Clone, Debug)]
pub struct DragOperator {
    grid: Grid,
    stencils: Vec<Stencil>,
    w: Vec<f64>,
    v: Vec<[f64; 3]>,
}

impl DragOperator {
    /// `None` for an empty ensemble: the fluid then runs unforced.
    pub fn new(ens: &ParticleEnsemble, grid: &Grid) -> Option<Self> {
        if ens.is_empty() {
            return None;
        }
        Some(DragOperator {
            grid: grid.clone(),
            stencils: ens.positions().iter().map(|x| Stencil::new(grid, x)).collect(),
            w: ens.weights().to_vec(),
            v: ens.velocities().to_vec(),
        })
    }

    fn relative(&self, u: &CicSampler, i: usize) -> [f64; 3] {
        let ui = u.sample_with(&self.stencils[i]);
        let mut r = [0.0; 3];
        for a in 0..self.grid.dim() {
            r[a] = self.v[i][a] - ui[a];
        }
        r
    }

    /// Lattice samples of `Σ wᵢ(Vᵢ − u(Xᵢ)) δ_{Xᵢ}` spread by the CIC kernel.
    pub fn brinkman_nodes(&self, u: &CicSampler) -> Vec<Vec<f64>> {
        let d = self.grid.dim();
        let inv = 1.0 / self.grid.cell_volume();
        let mut out = vec![vec![0.0; self.grid.len()]; d];
        for i in 0..self.w.len() {
            let r = self.relative(u, i);
            let st = &self.stencils[i];
            for c in 0..st.len {
                let s = self.w[i] * st.wt[c] * inv;
                for a in 0..d {
                    out[a][st.idx[c]] += s * r[a];
                }
            }
        }
        out
    }

    pub fn brinkman(&self, u: &SpectralField) -> Result<SpectralField> {
        let s = CicSampler::new(u);
        to_spectral(&self.grid, &self.brinkman_nodes(&s))
    }

    /// `Σ wᵢ|Vᵢ − u(Xᵢ)|²`.
    pub fn relative_energy(&self, u: &SpectralField) -> f64 {
        let s = CicSampler::new(u);
        (0..self.w.len())
            .map(|i| {
                let r = self.relative(&s, i);
                self.w[i] * r.iter().map(|c| c * c).sum::<f64>()
            })
            .sum()
    }
}

/// Deposits `ρ`, `j`, `m₂` and the drag source with the interpolation kernel.
pub fn deposit(ens: &ParticleEnsemble, u: &SpectralField) -> Result<MomentFields> {
    let grid = u.grid();
    let d = grid.dim();
    if ens.dim() != d {
        return Err(VnsError::Usage(format!(
            "ensemble is {}-dimensional, grid is {d}-dimensional",
            ens.dim()
        )));
    }
    let len = grid.len();
    let inv = 1.0 / grid.cell_volume();
    let mut rho = vec![0.0; len];
    let mut j = vec![vec![0.0; len]; d];
    let mut m2 = vec![0.0; len];
    for ((x, v), w) in ens.positions().iter().zip(ens.velocities()).zip(ens.weights()) {
        let st = Stencil::new(grid, x);
        let v2: f64 = (0..d).map(|a| v[a] * v[a]).sum();
        for c in 0..st.len {
            let s = w * st.wt[c] * inv;
            let p = st.idx[c];
            rho[p] += s;
            m2[p] += s * v2;
            for a in 0..d {
                j[a][p] += s * v[a];
            }
        }
    }
    let brinkman = match DragOperator::new(ens, grid) {
        Some(op) => op.brinkman(u)?,
        None => SpectralField::zeros(grid, d),
    };
    Ok(MomentFields {
        rho: to_spectral(grid, std::slice::from_ref(&rho))?,
        j: to_spectral(grid, &j)?,
        m2: to_spectral(grid, std::slice::from_ref(&m2))?,
        brinkman,
        rho_nodes: rho,
        j_nodes: j,
        m2_nodes: m2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetic::ensemble::{sample_initial, Sampling};
    use crate::kinetic::profile::{Profile, Spatial, Velocity};
    use crate::kinetic::sampler::VelocitySampler;
    use std::f64::consts::PI;

    fn taylor_green(g: &Grid) -> SpectralField {
        SpectralField::from_fn(g, 2, |x, c| {
            if c == 0 {
                x[0].sin() * x[1].cos()
            } else {
                -x[0].cos() * x[1].sin()
            }
        })
    }

    #[test]
    fn node_particle_mass() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let x = g.position(35);
        let ens = ParticleEnsemble::from_particles(2, g.length(), vec![x], vec![[1.0, 0.0, 0.0]], vec![0.7]).unwrap();
        let m = deposit(&ens, &SpectralField::zeros_vector(&g)).unwrap();
        assert!((m.mass(&g) - 0.7).abs() < 1e-15);
        assert!((m.rho.mean()[0] * g.volume() - 0.7).abs() < 1e-14);
    }

    #[test]
    fn monokinetic_has_no_drag_and_work_identity_holds() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let u = taylor_green(&g);
        let s = CicSampler::new(&u);
        let xs: Vec<[f64; 3]> = (0..500).map(|i| [0.37 * i as f64 % g.length(), 0.11 * i as f64 % g.length(), 0.0]).collect();
        let vs: Vec<[f64; 3]> = xs.iter().map(|x| s.sample(x)).collect();
        let ws = vec![1e-3; xs.len()];
        let ens = ParticleEnsemble::from_particles(2, g.length(), xs.clone(), vs, ws.clone()).unwrap();
        let m = deposit(&ens, &u).unwrap();
        assert!(m.brinkman.norm_l2() < 1e-14);

        let vs: Vec<[f64; 3]> = (0..xs.len()).map(|i| [(i as f64).sin(), (i as f64 * 0.3).cos(), 0.0]).collect();
        let ens = ParticleEnsemble::from_particles(2, g.length(), xs.clone(), vs.clone(), ws.clone()).unwrap();
        let m = deposit(&ens, &u).unwrap();
        let op = DragOperator::new(&ens, &g).unwrap();
        let rel = op.relative_energy(&u);
        let mut cross = 0.0;
        for i in 0..xs.len() {
            let ui = s.sample(&xs[i]);
            cross += ws[i] * (vs[i][0] * (ui[0] - vs[i][0]) + vs[i][1] * (ui[1] - vs[i][1]));
        }
        let lhs = u.inner(&m.brinkman) + cross;
        assert!((lhs + rel).abs() < 1e-13 * rel.max(1.0), "{lhs} {rel}");
        // discrete Cauchy–Schwarz in v
        assert!(m.brinkman.norm_l2_sq() <= m.rho_max() * rel * (1.0 + 1e-12));
    }

    #[test]
    fn lattice_mean_velocity() {
        let g = Grid::new(2, 32, 20.0).unwrap();
        let p = Profile::new(
            "maxwellian_gaussian",
            2,
            20.0,
            1.0,
            Spatial::Gaussian { center: [10.0, 10.0, 0.0], width: 1.5 },
            Velocity::Maxwellian { temp: 0.5, drift: [0.4, -0.2, 0.0] },
        )
        .unwrap();
        let ens = sample_initial(&p, 4096, &Sampling::Lattice { per_axis_x: None, per_axis_v: None }).unwrap();
        let m = deposit(&ens, &SpectralField::zeros_vector(&g)).unwrap();
        let rho = m.rho.mean()[0];
        let j = m.j.mean();
        assert!((j[0] / rho - 0.4).abs() < 4e-3);
        assert!((j[1] / rho + 0.2).abs() < 2e-3);
        assert!(m.m2_nodes().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn empty_ensemble_is_zero() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let ens = ParticleEnsemble::empty(2, 1.0);
        let m = deposit(&ens, &SpectralField::zeros_vector(&g)).unwrap();
        assert_eq!(m.rho_max(), 0.0);
        assert_eq!(m.brinkman.norm_l2(), 0.0);
        assert!(DragOperator::new(&ens, &g).is_none());
    }
}
