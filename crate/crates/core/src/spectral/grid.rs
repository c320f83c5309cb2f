use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Result, VnsError};

/// Periodic lattice of side `length` with `n` points per axis in `dim` dimensions.
///
/// Cloning is cheap: the wavenumber tables and FFT plans are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dim: usize,
    n: usize,
    length: f64,
    /// Signed integer wave index per axis position.
    wave_index: Vec<i64>,
    /// |n|^2 (integer lattice) per flat point.
    index_sq: Vec<u64>,
    /// Signed wave index triple per flat point.
    point_wave: Vec<[i32; 3]>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim())
            .field("n", &self.n())
            .field("length", &self.length())
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.n() == other.n() && self.length() == other.length()
    }
}

impl Grid {
    /// Builds a grid. `n` must be even and at least 8; `dim` is 2 or 3.
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(VnsError::Config(format!("dimension must be 2 or 3, got {dim}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(VnsError::Config(format!(
                "points per axis must be even and >= 8, got {n}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(VnsError::Config(format!("box side must be positive, got {length}")));
        }
        let wave_index: Vec<i64> = (0..n)
            .map(|m| if m < n / 2 { m as i64 } else { m as i64 - n as i64 })
            .collect();
        let total = n.pow(dim as u32);
        let mut index_sq = Vec::with_capacity(total);
        let mut point_wave = Vec::with_capacity(total);
        let mut idx = [0usize; 3];
        for p in 0..total {
            unflatten(p, n, dim, &mut idx);
            let mut w = [0i32; 3];
            let mut s = 0u64;
            for a in 0..dim {
                let k = wave_index[idx[a]];
                w[a] = k as i32;
                s += (k * k) as u64;
            }
            index_sq.push(s);
            point_wave.push(w);
        }
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Grid {
            inner: Arc::new(GridInner {
                dim,
                n,
                length,
                wave_index,
                index_sq,
                point_wave,
                fwd,
                inv,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    /// Number of lattice points, `n^dim`.
    pub fn len(&self) -> usize {
        self.inner.index_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim() as i32)
    }

    pub fn volume(&self) -> f64 {
        self.inner.length.powi(self.dim() as i32)
    }

    /// Lattice spacing in wavenumber space, `2π/L`.
    pub fn k_unit(&self) -> f64 {
        2.0 * PI / self.inner.length
    }

    /// Largest resolved wavenumber per axis, `πN/L`.
    pub fn k_nyquist(&self) -> f64 {
        PI * self.inner.n as f64 / self.inner.length
    }

    /// Largest integer wave index kept by the 2/3 rule.
    pub fn dealias_index(&self) -> i64 {
        ((self.inner.n - 1) / 3) as i64
    }

    /// Radius of the largest ball inside the dealiased cube.
    pub fn dealias_radius(&self) -> f64 {
        self.dealias_index() as f64 * self.k_unit()
    }

    /// Largest |k| present on the lattice.
    pub fn max_k(&self) -> f64 {
        self.k_nyquist() * (self.dim() as f64).sqrt()
    }

    pub fn wave_index(&self, axis_pos: usize) -> i64 {
        self.inner.wave_index[axis_pos]
    }

    /// Axis positions of flat point `p`.
    pub fn multi_index(&self, p: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        unflatten(p, self.inner.n, self.inner.dim, &mut idx);
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &m| acc * self.inner.n + m)
    }

    /// Integer wave vector of flat point `p`.
    pub fn wave_vector_index(&self, p: usize) -> [i64; 3] {
        let w = self.inner.point_wave[p];
        [w[0] as i64, w[1] as i64, w[2] as i64]
    }

    /// Physical wave vector of flat point `p`.
    pub fn wave_vector(&self, p: usize) -> [f64; 3] {
        let w = self.wave_vector_index(p);
        let ku = self.k_unit();
        [w[0] as f64 * ku, w[1] as f64 * ku, w[2] as f64 * ku]
    }

    /// Integer |n|^2 at flat point `p`.
    pub fn index_sq(&self, p: usize) -> u64 {
        self.inner.index_sq[p]
    }

    /// Physical |k|^2 at flat point `p`.
    pub fn k_sq(&self, p: usize) -> f64 {
        self.inner.index_sq[p] as f64 * self.k_unit().powi(2)
    }

    /// Flat index of the mode `-k`.
    pub fn conjugate_index(&self, p: usize) -> usize {
        let n = self.inner.n;
        let idx = self.multi_index(p);
        let mut c = [0usize; 3];
        for a in 0..self.dim() {
            c[a] = (n - idx[a]) % n;
        }
        self.flat_index(&c[..self.dim()])
    }

    /// True when any axis sits on the Nyquist index.
    pub fn is_nyquist(&self, p: usize) -> bool {
        let half = -((self.inner.n / 2) as i32);
        self.inner.point_wave[p][..self.dim()].iter().any(|&w| w == half)
    }

    /// True when the mode survives the 2/3 dealiasing rule.
    pub fn in_dealiased_band(&self, p: usize) -> bool {
        let cut = self.dealias_index();
        self.wave_vector_index(p)[..self.dim()]
            .iter()
            .all(|w| w.abs() <= cut)
    }

    /// Physical coordinates of lattice point `p`.
    pub fn position(&self, p: usize) -> [f64; 3] {
        let idx = self.multi_index(p);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for a in 0..self.dim() {
            x[a] = idx[a] as f64 * h;
        }
        x
    }

    /// In-place forward transform normalised so the zero mode holds the mean.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inner.fwd);
        let scale = 1.0 / self.len() as f64;
        for c in data.iter_mut() {
            *c *= scale;
        }
    }

    /// In-place inverse transform (no scaling).
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inner.inv);
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.inner.n;
        let dim = self.inner.dim;
        debug_assert_eq!(data.len(), self.len());
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // last axis is contiguous
        plan.process_with_scratch(data, &mut scratch);
        let mut buf = Vec::new();
        for axis in (0..dim - 1).rev() {
            let stride = n.pow((dim - 1 - axis) as u32);
            let block = n * stride;
            buf.resize(block, Complex64::new(0.0, 0.0));
            for base in (0..data.len()).step_by(block) {
                let chunk = &mut data[base..base + block];
                for m in 0..n {
                    for o in 0..stride {
                        buf[o * n + m] = chunk[m * stride + o];
                    }
                }
                plan.process_with_scratch(&mut buf, &mut scratch);
                for m in 0..n {
                    for o in 0..stride {
                        chunk[m * stride + o] = buf[o * n + m];
                    }
                }
            }
        }
    }
}

fn unflatten(mut p: usize, n: usize, dim: usize, out: &mut [usize; 3]) {
    for a in (0..dim).rev() {
        out[a] = p % n;
        p /= n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(Grid::new(1, 16, 1.0).is_err());
        assert!(Grid::new(2, 6, 1.0).is_err());
        assert!(Grid::new(2, 15, 1.0).is_err());
        assert!(Grid::new(3, 16, 0.0).is_err());
        assert!(Grid::new(3, 48, 1.0).is_ok());
    }

    #[test]
    fn lattice_is_symmetric_with_single_zero_mode() {
        let g = Grid::new(3, 8, 2.0 * PI).unwrap();
        let zeros = (0..g.len()).filter(|&p| g.index_sq(p) == 0).count();
        assert_eq!(zeros, 1);
        for p in 0..g.len() {
            let q = g.conjugate_index(p);
            let a = g.wave_vector_index(p);
            let b = g.wave_vector_index(q);
            if !g.is_nyquist(p) {
                for ax in 0..3 {
                    assert_eq!(a[ax], -b[ax]);
                }
            }
        }
    }

    #[test]
    fn index_round_trip() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        for p in 0..g.len() {
            let idx = g.multi_index(p);
            assert_eq!(g.flat_index(&idx[..2]), p);
        }
    }
}
