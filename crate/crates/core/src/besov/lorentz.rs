use crate::error::{Result, VnsError};
use crate::spectral::{magnitude, SpectralField};

/// Discrete decreasing rearrangement: sample magnitudes sorted downwards,
/// each owning one lattice cell of measure `cell`.
#[derive(Clone, Debug)]
pub struct ReArrangement {
    pub values: Vec<f64>,
    pub cell: f64,
}

impl ReArrangement {
    pub fn from_samples(mut values: Vec<f64>, cell: f64) -> Self {
        for v in values.iter_mut() {
            *v = v.abs();
        }
        values.sort_by(|a, b| b.total_cmp(a));
        ReArrangement { values, cell }
    }

    /// Rearrangement of the pointwise magnitude of a field.
    pub fn from_field(z: &SpectralField) -> Self {
        Self::from_samples(magnitude(z), z.grid().cell_volume())
    }

    pub fn measure(&self) -> f64 {
        self.values.len() as f64 * self.cell
    }

    /// `‖t^{1/p} f*(t)‖_{L^r(dt/t)}`, integrated exactly on the step function.
    pub fn lorentz(&self, p: f64, r: f64) -> Result<f64> {
        if !(p > 1.0) || p.is_infinite() {
            return Err(VnsError::Usage(format!("Lorentz exponent p must lie in (1, inf), got {p}")));
        }
        if !(r >= 1.0) {
            return Err(VnsError::Usage(format!("Lorentz exponent r must be >= 1, got {r}")));
        }
        if r.is_infinite() {
            return Ok(self
                .values
                .iter()
                .enumerate()
                .map(|(i, a)| a * ((i + 1) as f64 * self.cell).powf(1.0 / p))
                .fold(0.0, f64::max));
        }
        let q = r / p;
        let mut acc = 0.0;
        let mut prev = 0.0;
        for (i, a) in self.values.iter().enumerate() {
            let cur = ((i + 1) as f64 * self.cell).powf(q);
            if *a > 0.0 {
                acc += a.powf(r) * (cur - prev);
            }
            prev = cur;
        }
        Ok((acc / q).powf(1.0 / r))
    }
}

/// Lorentz norm `L^{p,r}` of the pointwise magnitude of `z`.
pub fn lorentz_norm(z: &SpectralField, p: f64, r: f64) -> Result<f64> {
    ReArrangement::from_field(z).lorentz(p, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{lp_norm, Grid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn indicator_closed_form() {
        let mut v = vec![0.0; 100];
        for x in v.iter_mut().take(37) {
            *x = 1.0;
        }
        let re = ReArrangement::from_samples(v, 0.01);
        for p in [1.5, 2.0, 3.0] {
            let got = re.lorentz(p, 1.0).unwrap();
            let m: f64 = 0.37;
            assert!((got - p * m.powf(1.0 / p)).abs() < 1e-12);
            let sup = re.lorentz(p, f64::INFINITY).unwrap();
            assert!((sup - m.powf(1.0 / p)).abs() < 1e-12);
        }
        assert!(re.lorentz(1.0, 1.0).is_err());
    }

    #[test]
    fn diagonal_matches_lebesgue() {
        let g = Grid::new(2, 32, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let z = SpectralField::from_physical(&g, &[s]).unwrap();
        for p in [2.0, 3.0] {
            let a = lorentz_norm(&z, p, p).unwrap();
            let b = lp_norm(&z, p).unwrap();
            assert!((a - b).abs() < 1e-8 * b);
            assert!(lorentz_norm(&z, p, 1.0).unwrap() >= lorentz_norm(&z, p, f64::INFINITY).unwrap());
        }
        let zero = SpectralField::zeros_scalar(&g);
        assert_eq!(lorentz_norm(&zero, 3.0, 1.0).unwrap(), 0.0);
        assert_eq!(ReArrangement::from_field(&zero).measure(), g.volume());
    }
}
