use num_complex::Complex64;

use crate::spectral::{Grid, SpectralField};

/// Evaluates a velocity field at arbitrary points of the periodic box.
pub trait VelocitySampler {
    fn sample(&self, x: &[f64; 3]) -> [f64; 3];
}

/// Cloud-in-cell stencil: the `2^d` lattice nodes around a point and their
/// linear B-spline weights. The same stencil deposits and interpolates.
#[derive(Clone, Copy, Debug)]
pub struct Stencil {
    pub idx: [usize; 8],
    pub wt: [f64; 8],
    pub len: usize,
}

impl Stencil {
    pub fn new(grid: &Grid, x: &[f64; 3]) -> Self {
        let d = grid.dim();
        let n = grid.n();
        let h = grid.spacing();
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..d {
            let s = x[a].rem_euclid(grid.length()) / h;
            let f = s.floor();
            base[a] = (f as usize) % n;
            frac[a] = s - f;
        }
        let mut st = Stencil {
            idx: [0; 8],
            wt: [0.0; 8],
            len: 1 << d,
        };
        for corner in 0..st.len {
            let mut flat = 0;
            let mut w = 1.0;
            for a in 0..d {
                let bit = (corner >> (d - 1 - a)) & 1;
                let i = (base[a] + bit) % n;
                flat = flat * n + i;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            st.idx[corner] = flat;
            st.wt[corner] = w;
        }
        st
    }

    pub fn interpolate(&self, values: &[f64]) -> f64 {
        (0..self.len).map(|c| self.wt[c] * values[self.idx[c]]).sum()
    }
}

/// Linear B-spline interpolation of the lattice samples of a field.
#[derive(Clone, Debug)]
pub struct CicSampler {
    grid: Grid,
    phys: Vec<Vec<f64>>,
}

impl CicSampler {
    pub fn new(u: &SpectralField) -> Self {
        CicSampler {
            grid: u.grid().clone(),
            phys: u.to_physical(),
        }
    }

    pub fn from_physical(grid: &Grid, phys: Vec<Vec<f64>>) -> Self {
        CicSampler {
            grid: grid.clone(),
            phys,
        }
    }

    pub fn physical(&self) -> &[Vec<f64>] {
        &self.phys
    }

    pub fn sample_with(&self, st: &Stencil) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (c, comp) in self.phys.iter().enumerate() {
            out[c] = st.interpolate(comp);
        }
        out
    }
}

impl VelocitySampler for CicSampler {
    fn sample(&self, x: &[f64; 3]) -> [f64; 3] {
        self.sample_with(&Stencil::new(&self.grid, x))
    }
}

/// Exact trigonometric evaluation over the nonzero modes of a field.
/// Smooth everywhere, so it suits convergence and Jacobian probes.
pub struct SpectralSampler {
    dim: usize,
    modes: Vec<([f64; 3], Vec<Complex64>)>,
}

impl SpectralSampler {
    pub fn new(u: &SpectralField) -> Self {
        let g = u.grid();
        let scale = u
            .components()
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let mut modes = Vec::new();
        for p in 0..g.len() {
            let coeffs: Vec<Complex64> = u.components().iter().map(|c| c[p]).collect();
            if coeffs.iter().any(|z| z.norm() > 1e-15 * scale) {
                modes.push((g.wave_vector(p), coeffs));
            }
        }
        SpectralSampler { dim: g.dim(), modes }
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }
}

impl VelocitySampler for SpectralSampler {
    fn sample(&self, x: &[f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (k, c) in &self.modes {
            let phase: f64 = (0..self.dim).map(|a| k[a] * x[a]).sum();
            let e = Complex64::new(phase.cos(), phase.sin());
            for (o, z) in out.iter_mut().zip(c) {
                *o += (z * e).re;
            }
        }
        out
    }
}

/// Spatially constant field, handy for closed-form checks.
pub struct ConstantSampler(pub [f64; 3]);

impl VelocitySampler for ConstantSampler {
    fn sample(&self, _x: &[f64; 3]) -> [f64; 3] {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn stencil_is_partition_of_unity() {
        let g = Grid::new(3, 8, 2.0).unwrap();
        let st = Stencil::new(&g, &[1.99, 0.13, -0.4]);
        assert_eq!(st.len, 8);
        assert!((st.wt.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let node = Stencil::new(&g, &[0.25, 0.5, 0.75]);
        let hit: Vec<f64> = node.wt.iter().copied().filter(|&w| w > 0.0).collect();
        assert_eq!(hit, vec![1.0]);
    }

    #[test]
    fn samplers_agree_on_nodes_and_for_linear_data() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let u = SpectralField::from_fn(&g, 2, |x, c| if c == 0 { x[1].sin() } else { (2.0 * x[0]).cos() });
        let cic = CicSampler::new(&u);
        let sp = SpectralSampler::new(&u);
        assert_eq!(sp.n_modes(), 4);
        let x = g.position(37);
        let a = cic.sample(&x);
        let b = sp.sample(&x);
        assert!((a[0] - b[0]).abs() < 1e-13 && (a[1] - b[1]).abs() < 1e-13);
        let y = [0.3, 1.7, 0.0];
        let e = sp.sample(&y);
        assert!((e[0] - 1.7f64.sin()).abs() < 1e-13);
        assert!((e[1] - 0.6f64.cos()).abs() < 1e-13);
    }
}
