use std::collections::BTreeMap;

use crate::error::{Result, VnsError};
use crate::spectral::{Grid, SpectralField};

/// Per-shell L² norms `‖Δ_j z‖` with sharp cutoffs `2^{j−1} < |k| ≤ 2^j`.
///
/// Shell `j_min + i` sits at `shells[i]`. The range covers every nonzero
/// lattice wavenumber of the grid, so empty shells are stored as zero.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicSpectrum {
    pub j_min: i32,
    pub shells: Vec<f64>,
}

/// Dyadic index of a positive wavenumber: the `j` with `2^{j−1} < k ≤ 2^j`.
pub fn shell_index(k: f64) -> i32 {
    debug_assert!(k > 0.0);
    let mut j = k.log2().ceil() as i32;
    while 2f64.powi(j) < k {
        j += 1;
    }
    while 2f64.powi(j - 1) >= k {
        j -= 1;
    }
    j
}

/// Shell range `(j_min, j_max)` covering every nonzero lattice mode.
pub fn shell_range(grid: &Grid) -> (i32, i32) {
    (shell_index(grid.k_unit()), shell_index(grid.max_k()))
}

/// Energy `vol·Σ|ẑ|²` aggregated by integer `|n|²`; used to evaluate
/// radial multipliers without touching every lattice point.
#[derive(Clone, Debug)]
pub struct RadialEnergy {
    /// `(|k|², energy)` for every occupied nonzero shell of the lattice.
    pub bins: Vec<(f64, f64)>,
    pub k_unit: f64,
}

impl RadialEnergy {
    pub fn from_field(z: &SpectralField) -> Self {
        let g = z.grid();
        let mut map: BTreeMap<u64, f64> = BTreeMap::new();
        for p in 1..g.len() {
            let e: f64 = z.components().iter().map(|c| c[p].norm_sqr()).sum();
            *map.entry(g.index_sq(p)).or_insert(0.0) += e;
        }
        let ku2 = g.k_unit().powi(2);
        let vol = g.volume();
        RadialEnergy {
            bins: map
                .into_iter()
                .map(|(n2, e)| (n2 as f64 * ku2, e * vol))
                .collect(),
            k_unit: g.k_unit(),
        }
    }

    /// `‖e^{tΔ}z‖²` for the mean-free part.
    pub fn heat_energy(&self, t: f64) -> f64 {
        self.bins.iter().map(|&(k2, e)| e * (-2.0 * k2 * t).exp()).sum()
    }

    /// Dyadic spectrum of `e^{tΔ}z`.
    pub fn spectrum_at(&self, t: f64, range: (i32, i32)) -> DyadicSpectrum {
        let mut sq = vec![0.0; (range.1 - range.0 + 1) as usize];
        for &(k2, e) in &self.bins {
            let j = shell_index(k2.sqrt());
            sq[(j - range.0) as usize] += e * (-2.0 * k2 * t).exp();
        }
        DyadicSpectrum {
            j_min: range.0,
            shells: sq.into_iter().map(f64::sqrt).collect(),
        }
    }
}

pub(crate) fn check_mean_free(z: &SpectralField) -> Result<()> {
    let scale = z
        .components()
        .iter()
        .flat_map(|c| c.iter())
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    let mean = z.components().iter().map(|c| c[0].norm()).fold(0.0, f64::max);
    if mean > 1e-13 * scale.max(f64::MIN_POSITIVE) {
        return Err(VnsError::Precondition(format!(
            "homogeneous Besov routines need a mean-free field (mean {mean:.3e})"
        )));
    }
    Ok(())
}

/// Littlewood–Paley decomposition into sharp dyadic shells.
pub fn dyadic_decompose(z: &SpectralField) -> Result<DyadicSpectrum> {
    check_mean_free(z)?;
    Ok(RadialEnergy::from_field(z).spectrum_at(0.0, shell_range(z.grid())))
}

/// The shell piece `Δ_j z`.
pub fn shell_project(z: &SpectralField, j: i32) -> SpectralField {
    let g = z.grid().clone();
    let mut out = z.clone();
    out.apply_multiplier(|p| {
        if p != 0 && shell_index(g.k_sq(p).sqrt()) == j {
            1.0
        } else {
            0.0
        }
    });
    out
}

impl DyadicSpectrum {
    pub fn j_max(&self) -> i32 {
        self.j_min + self.shells.len() as i32 - 1
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.shells
            .iter()
            .enumerate()
            .map(move |(i, &a)| (self.j_min + i as i32, a))
    }

    /// `(Σ_j ‖Δ_j z‖²)^{1/2}`.
    pub fn l2_total(&self) -> f64 {
        self.shells.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

/// Summation exponent of a Besov norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Summation {
    One,
    Two,
    Inf,
}

impl Summation {
    pub fn from_exponent(r: f64) -> Result<Self> {
        if r == 1.0 {
            Ok(Summation::One)
        } else if r == 2.0 {
            Ok(Summation::Two)
        } else if r.is_infinite() && r > 0.0 {
            Ok(Summation::Inf)
        } else {
            Err(VnsError::Usage(format!(
                "summation exponent must be 1, 2 or infinity, got {r}"
            )))
        }
    }

    pub fn exponent(self) -> f64 {
        match self {
            Summation::One => 1.0,
            Summation::Two => 2.0,
            Summation::Inf => f64::INFINITY,
        }
    }
}

/// ℓʳ norm of a non-negative sequence.
pub(crate) fn ell_r(values: impl Iterator<Item = f64>, r: f64) -> f64 {
    if r.is_infinite() {
        values.fold(0.0, f64::max)
    } else if r == 1.0 {
        values.sum()
    } else {
        values.map(|v| v.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// `‖z‖_{Ḃ^s_{2,r}} = ‖2^{js}‖Δ_j z‖‖_{ℓ^r}`.
pub fn besov_norm(spec: &DyadicSpectrum, s: f64, r: f64) -> Result<f64> {
    let r = Summation::from_exponent(r)?.exponent();
    Ok(ell_r(spec.iter().map(|(j, a)| 2f64.powf(j as f64 * s) * a), r))
}
