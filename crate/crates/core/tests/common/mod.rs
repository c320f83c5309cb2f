#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use vns_core::spectral::{leray_project, Grid, SpectralField};

/// White noise shaped by a Gaussian bump `exp(−(|n| − kc)²/2w²)` in the
/// integer wavenumber `|n|`, restricted to `0 < |n| ≤ band`.
pub fn bump_field(grid: &Grid, comps: usize, rng: &mut ChaCha8Rng, kc: f64, width: f64, band: f64) -> SpectralField {
    let noise: Vec<Vec<f64>> = (0..comps)
        .map(|_| (0..grid.len()).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let mut z = SpectralField::from_physical(grid, &noise).unwrap();
    let g = grid.clone();
    z.apply_multiplier(|p| {
        let n2 = g.index_sq(p) as f64;
        if n2 == 0.0 || n2 > band * band || g.is_nyquist(p) {
            0.0
        } else {
            (-(n2.sqrt() - kc).powi(2) / (2.0 * width * width)).exp()
        }
    });
    z
}

/// A random member of the band-limited family used by the norm checks:
/// log-uniform centre in `[1, band]`, width between a third of a mode and
/// half the centre.
pub fn random_band_limited(grid: &Grid, comps: usize, rng: &mut ChaCha8Rng, band: f64) -> SpectralField {
    let kc = band.powf(rng.random::<f64>());
    let width = 0.3 + rng.random::<f64>() * 0.5 * kc;
    let z = bump_field(grid, comps, rng, kc, width, band);
    if comps > 1 {
        leray_project(&z).unwrap()
    } else {
        z
    }
}

/// Relative change `|b/a − 1|`.
pub fn rel_change(a: f64, b: f64) -> f64 {
    (b / a - 1.0).abs()
}
