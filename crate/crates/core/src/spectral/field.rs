use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Result, VnsError};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Scalar or vector field stored as Fourier coefficients on a [`Grid`].
///
/// Coefficients follow the normalisation of [`Grid`]: the zero mode is the
/// spatial mean and `‖z‖² = |box| Σ|ẑ(k)|²`.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    comps: Vec<Vec<Complex64>>,
    solenoidal: bool,
}

impl SpectralField {
    pub fn zeros(grid: &Grid, n_comps: usize) -> Self {
        SpectralField {
            grid: grid.clone(),
            comps: vec![vec![ZERO; grid.len()]; n_comps],
            solenoidal: false,
        }
    }

    pub fn zeros_scalar(grid: &Grid) -> Self {
        Self::zeros(grid, 1)
    }

    /// Zero vector field, trivially solenoidal.
    pub fn zeros_vector(grid: &Grid) -> Self {
        let mut z = Self::zeros(grid, grid.dim());
        z.solenoidal = true;
        z
    }

    /// Builds a field from raw coefficient arrays.
    pub fn from_coefficients(grid: &Grid, comps: Vec<Vec<Complex64>>) -> Result<Self> {
        if comps.is_empty() || comps.iter().any(|c| c.len() != grid.len()) {
            return Err(VnsError::Config(format!(
                "coefficient arrays must have {} entries each",
                grid.len()
            )));
        }
        Ok(SpectralField {
            grid: grid.clone(),
            comps,
            solenoidal: false,
        })
    }

    /// Forward transform of real samples, one array per component.
    pub fn from_physical(grid: &Grid, samples: &[Vec<f64>]) -> Result<Self> {
        if samples.is_empty() {
            return Err(VnsError::Config("no components supplied".into()));
        }
        let mut comps = Vec::with_capacity(samples.len());
        for (c, s) in samples.iter().enumerate() {
            if s.len() != grid.len() {
                return Err(VnsError::Config(format!(
                    "component {c} has {} samples, grid needs {}",
                    s.len(),
                    grid.len()
                )));
            }
            let mut buf: Vec<Complex64> = s.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            grid.forward(&mut buf);
            comps.push(buf);
        }
        Ok(SpectralField {
            grid: grid.clone(),
            comps,
            solenoidal: false,
        })
    }

    /// Samples a closure at every lattice point.
    pub fn from_fn<F>(grid: &Grid, n_comps: usize, f: F) -> Self
    where
        F: Fn(&[f64], usize) -> f64,
    {
        let d = grid.dim();
        let samples: Vec<Vec<f64>> = (0..n_comps)
            .map(|c| {
                (0..grid.len())
                    .map(|p| f(&grid.position(p)[..d], c))
                    .collect()
            })
            .collect();
        Self::from_physical(grid, &samples).expect("shape matches by construction")
    }

    /// Inverse transform; real part of each component.
    pub fn to_physical(&self) -> Vec<Vec<f64>> {
        (0..self.n_comps()).map(|c| self.component_physical(c)).collect()
    }

    pub fn component_physical(&self, c: usize) -> Vec<f64> {
        let mut buf = self.comps[c].clone();
        self.grid.inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_comps(&self) -> usize {
        self.comps.len()
    }

    pub fn is_scalar(&self) -> bool {
        self.comps.len() == 1
    }

    pub fn is_vector(&self) -> bool {
        self.comps.len() == self.grid.dim()
    }

    pub fn is_solenoidal(&self) -> bool {
        self.solenoidal
    }

    pub(crate) fn set_solenoidal(&mut self, flag: bool) {
        self.solenoidal = flag;
    }

    pub fn comp(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    /// Mutable coefficient access. Clears the solenoidal flag.
    pub fn comp_mut(&mut self, c: usize) -> &mut [Complex64] {
        self.solenoidal = false;
        &mut self.comps[c]
    }

    pub(crate) fn components_mut(&mut self) -> &mut [Vec<Complex64>] {
        self.solenoidal = false;
        &mut self.comps
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.comps
    }

    /// Largest divergence defect `|k·û|/|û|` over all modes (vector fields only).
    pub fn divergence_defect(&self) -> f64 {
        if !self.is_vector() {
            return f64::NAN;
        }
        let d = self.grid.dim();
        let mut worst: f64 = 0.0;
        for p in 0..self.grid.len() {
            let k = self.grid.wave_vector(p);
            let mut dot = ZERO;
            let mut mag = 0.0;
            for a in 0..d {
                dot += self.comps[a][p] * k[a];
                mag += self.comps[a][p].norm_sqr();
            }
            if mag > 0.0 {
                let kk = self.grid.k_sq(p).sqrt().max(1e-300);
                worst = worst.max(dot.norm() / (kk * mag.sqrt()));
            }
        }
        worst
    }

    /// Largest violation of `ẑ(−k) = conj ẑ(k)` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for c in &self.comps {
            for p in 0..self.grid.len() {
                scale = scale.max(c[p].norm());
                if self.grid.is_nyquist(p) {
                    continue;
                }
                let q = self.grid.conjugate_index(p);
                worst = worst.max((c[p] - c[q].conj()).norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// L² inner product `∫ a·b dx` for real fields.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        assert_eq!(self.n_comps(), other.n_comps(), "component count mismatch");
        let mut s = 0.0;
        for (a, b) in self.comps.iter().zip(&other.comps) {
            for (x, y) in a.iter().zip(b) {
                s += x.re * y.re + x.im * y.im;
            }
        }
        s * self.grid.volume()
    }

    /// Parseval L² norm.
    pub fn norm_l2(&self) -> f64 {
        self.norm_l2_sq().sqrt()
    }

    pub fn norm_l2_sq(&self) -> f64 {
        let s: f64 = self
            .comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm_sqr())
            .sum();
        s * self.grid.volume()
    }

    /// Spatial mean of each component.
    pub fn mean(&self) -> Vec<f64> {
        self.comps.iter().map(|c| c[0].re).collect()
    }

    pub fn remove_mean(&mut self) {
        for c in &mut self.comps {
            c[0] = ZERO;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.comps {
            for z in c.iter_mut() {
                *z *= a;
            }
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut z = self.clone();
        z.scale(a);
        z
    }

    /// `self += a * other`. The solenoidal flag survives only if both carry it.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        assert_eq!(self.n_comps(), other.n_comps(), "component count mismatch");
        for (x, y) in self.comps.iter_mut().zip(&other.comps) {
            for (u, v) in x.iter_mut().zip(y) {
                *u += v * a;
            }
        }
        self.solenoidal &= other.solenoidal;
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        let mut z = self.clone();
        z.axpy(-1.0, other);
        z
    }

    pub fn add(&self, other: &SpectralField) -> Self {
        let mut z = self.clone();
        z.axpy(1.0, other);
        z
    }

    /// Applies a real Fourier multiplier `m(p)` to every component in place.
    pub fn apply_multiplier<F: Fn(usize) -> f64>(&mut self, m: F) {
        for p in 0..self.grid.len() {
            let f = m(p);
            for c in &mut self.comps {
                c[p] *= f;
            }
        }
    }

    /// Component `c` as its own scalar field.
    pub fn component(&self, c: usize) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            comps: vec![self.comps[c].clone()],
            solenoidal: false,
        }
    }

    /// Stacks scalar fields into one multi-component field.
    pub fn stack(parts: &[SpectralField]) -> Result<Self> {
        let grid = parts
            .first()
            .ok_or_else(|| VnsError::Usage("nothing to stack".into()))?
            .grid
            .clone();
        let mut comps = Vec::new();
        for p in parts {
            if p.grid != grid {
                return Err(VnsError::Config("grid mismatch while stacking".into()));
            }
            comps.extend(p.comps.iter().cloned());
        }
        Ok(SpectralField {
            grid,
            comps,
            solenoidal: false,
        })
    }

    /// Same grid and identical coefficient bit patterns.
    pub fn bitwise_eq(&self, other: &SpectralField) -> bool {
        self.grid == other.grid
            && self.comps.len() == other.comps.len()
            && self.comps.iter().zip(&other.comps).all(|(a, b)| {
                a.iter()
                    .zip(b)
                    .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits())
            })
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}

/// Forward transform of real samples.
pub fn to_spectral(grid: &Grid, samples: &[Vec<f64>]) -> Result<SpectralField> {
    SpectralField::from_physical(grid, samples)
}
