use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::config::{AmplitudeNorm, RunConfig, VelocityFamily};
use crate::besov::field_besov_norm;
use crate::error::{Result, VnsError};
use crate::kinetic::{deposit, sample_initial, ParticleEnsemble};
use crate::spectral::{friedrichs_project, hdot_norm, leray_project, lp_norm, Grid, SpectralField};

/// Seed offset separating the twin perturbation stream from the base stream.
const PERTURBATION_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn build_grid(cfg: &RunConfig) -> Result<Grid> {
    Grid::new(cfg.dim, cfg.n, cfg.length).map_err(|e| VnsError::Config(e.to_string()))
}

fn min_image(dx: f64, l: f64) -> f64 {
    dx - l * (dx / l).round()
}

/// White noise restricted to `1 ≤ |n| ≤ band`, projected, mean free.
fn band_limited_noise(grid: &Grid, band: usize, seed: u64) -> Result<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Vec<f64>> = (0..grid.dim())
        .map(|_| (0..grid.len()).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let mut z = SpectralField::from_physical(grid, &samples)?;
    let b2 = (band * band) as u64;
    let g = grid.clone();
    z.apply_multiplier(|p| {
        let s = g.index_sq(p);
        if s >= 1 && s <= b2 { 1.0 } else { 0.0 }
    });
    let mut z = leray_project(&z)?;
    z.remove_mean();
    Ok(z)
}

fn velocity_shape(cfg: &RunConfig, grid: &Grid) -> Result<SpectralField> {
    let d = cfg.dim;
    let l = cfg.length;
    match cfg.velocity {
        VelocityFamily::Zero => Ok(SpectralField::zeros_vector(grid)),
        VelocityFamily::Blob => {
            let c = cfg.velocity_center.unwrap_or(cfg.center());
            let e = cfg.velocity_direction;
            let norm = (0..d).map(|a| e[a] * e[a]).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(VnsError::Config("velocity_direction must be nonzero".into()));
            }
            let w2 = cfg.velocity_width * cfg.velocity_width;
            let raw = SpectralField::from_fn(grid, d, |x, a| {
                let r2: f64 = (0..d).map(|b| min_image(x[b] - c[b], l).powi(2)).sum();
                (-r2 / (2.0 * w2)).exp() * e[a] / norm
            });
            let mut u = leray_project(&raw)?;
            u.remove_mean();
            Ok(u)
        }
        VelocityFamily::TaylorGreen => {
            let k = 2.0 * std::f64::consts::PI * cfg.velocity_mode as f64 / l;
            Ok(SpectralField::from_fn(grid, d, |x, a| {
                let sx = (k * x[0]).sin();
                let cx = (k * x[0]).cos();
                let sy = (k * x[1]).sin();
                let cy = (k * x[1]).cos();
                let cz = if d == 3 { (k * x[2]).cos() } else { 1.0 };
                match a {
                    0 => sx * cy * cz,
                    1 => -cx * sy * cz,
                    _ => 0.0,
                }
            }))
        }
        VelocityFamily::Random => band_limited_noise(grid, cfg.velocity_band, cfg.seed),
    }
}

fn measure(u: &SpectralField, norm: AmplitudeNorm) -> Result<f64> {
    Ok(match norm {
        AmplitudeNorm::Peak => 1.0,
        AmplitudeNorm::L1 => lp_norm(u, 1.0)?,
        AmplitudeNorm::L2 => u.norm_l2(),
        AmplitudeNorm::HHalf => hdot_norm(u, 0.5),
        AmplitudeNorm::H1 => (u.norm_l2_sq() + hdot_norm(u, 1.0).powi(2)).sqrt(),
    })
}

/// `J_n u₀` scaled so that the configured norm equals `velocity_amplitude`.
pub fn initial_velocity(cfg: &RunConfig, grid: &Grid) -> Result<SpectralField> {
    let mut u = friedrichs_project(&velocity_shape(cfg, grid)?, cfg.cutoff())?;
    if cfg.velocity == VelocityFamily::Zero {
        return Ok(u);
    }
    let m = measure(&u, cfg.velocity_norm)?;
    if !(m > 0.0) || u.norm_l2() == 0.0 {
        return Err(VnsError::Config("initial velocity vanishes after truncation".into()));
    }
    u.scale(cfg.velocity_amplitude / m);
    Ok(u)
}

/// Unit-L² band-limited solenoidal field drawn from a stream derived from the seed.
pub fn perturbation(cfg: &RunConfig, grid: &Grid) -> Result<SpectralField> {
    let mut p = friedrichs_project(
        &band_limited_noise(grid, cfg.velocity_band, cfg.seed ^ PERTURBATION_STREAM)?,
        cfg.cutoff(),
    )?;
    let n = p.norm_l2();
    if n == 0.0 {
        return Err(VnsError::Config("perturbation band is empty".into()));
    }
    p.scale(1.0 / n);
    Ok(p)
}

pub fn initial_particles(cfg: &RunConfig) -> Result<ParticleEnsemble> {
    match cfg.profile()? {
        None => Ok(ParticleEnsemble::empty(cfg.dim, cfg.length)),
        Some(p) => sample_initial(&p, cfg.particles, &cfg.particle_sampling),
    }
}

/// Size of the initial data.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct InitialReport {
    pub e0: f64,
    pub e1: f64,
    pub u_besov_m3_2: f64,
    pub u_besov_neg_half_d: f64,
    pub u_h_half: f64,
    pub u_l2: f64,
    /// `N_q(f₀)` of the analytic profile, `0` without particles.
    pub n_q: f64,
    pub mass: f64,
    pub particles: usize,
    /// `‖f₀‖_{L¹_v L^∞_x}`.
    pub f0_norm: f64,
    /// `𝔣₀`.
    pub frak_f0: f64,
    pub r0: f64,
    /// Kernel-smoothed `‖ρ₀‖_∞`.
    pub rho0_max: f64,
    /// `‖u₀‖²_{H¹} + ∫∫|v|²f₀`.
    pub smallness: f64,
    pub smallness_threshold: f64,
    pub small: bool,
}

pub fn initial_report(cfg: &RunConfig, u: &SpectralField, ens: &ParticleEnsemble) -> Result<InitialReport> {
    let zero = u.norm_l2() == 0.0;
    let besov = |s: f64| if zero { Ok(0.0) } else { field_besov_norm(u, s, f64::INFINITY) };
    let grad2 = hdot_norm(u, 1.0).powi(2);
    let kin = crate::diagnostics::monokinetic_metrics(ens, u)?.kinetic_relative;
    let moments = deposit(ens, u)?;
    let profile = ens.profile();
    let second = ens.kinetic_moment();
    let smallness = u.norm_l2_sq() + grad2 + second;
    Ok(InitialReport {
        e0: 0.5 * u.norm_l2_sq() + 0.5 * second,
        e1: grad2 + kin,
        u_besov_m3_2: besov(-1.5)?,
        u_besov_neg_half_d: besov(-(cfg.dim as f64) / 2.0)?,
        u_h_half: hdot_norm(u, 0.5),
        u_l2: u.norm_l2(),
        n_q: profile.map_or(0.0, |p| p.n_q(cfg.moment_q)),
        mass: ens.total_mass(),
        particles: ens.len(),
        f0_norm: profile.map_or(0.0, |p| p.l1v_linfx()),
        frak_f0: profile.map_or(0.0, |p| p.frak_f0()),
        r0: profile.map_or(1.0, |p| p.r0()),
        rho0_max: moments.rho_max(),
        smallness,
        smallness_threshold: cfg.smallness_threshold,
        small: smallness <= cfg.smallness_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::parse(text).unwrap()
    }

    #[test]
    fn families_are_solenoidal_and_scaled() {
        for fam in ["blob", "taylor_green", "random"] {
            for (norm, measure_it) in [
                ("l2", (|u: &SpectralField| u.norm_l2()) as fn(&SpectralField) -> f64),
                ("h_half", |u| hdot_norm(u, 0.5)),
                ("h1", |u| (u.norm_l2_sq() + hdot_norm(u, 1.0).powi(2)).sqrt()),
            ] {
                let c = cfg(&format!(
                    "N = 16\nvelocity = {fam}\nvelocity_norm = {norm}\nvelocity_amplitude = 0.3\nseed = 4"
                ));
                let g = build_grid(&c).unwrap();
                let u = initial_velocity(&c, &g).unwrap();
                assert!(u.divergence_defect() < 1e-12, "{fam}");
                assert!(u.mean().iter().all(|m| m.abs() < 1e-14));
                assert!((measure_it(&u) - 0.3).abs() < 1e-12, "{fam} {norm}");
            }
        }
    }

    #[test]
    fn taylor_green_energy_and_homogeneity() {
        let c = cfg("N = 16\nvelocity = taylor_green\nvelocity_amplitude = 2");
        let g = build_grid(&c).unwrap();
        let u = initial_velocity(&c, &g).unwrap();
        let ens = initial_particles(&c).unwrap();
        let r = initial_report(&c, &u, &ens).unwrap();
        // ½‖u‖² = ½·4·(2π)²/2 for amplitude 2
        let exact = 0.5 * 4.0 * (2.0 * std::f64::consts::PI).powi(2) / 2.0;
        assert!((r.e0 - exact).abs() < 1e-10 * exact);
        let c2 = cfg("N = 16\nvelocity = taylor_green\nvelocity_amplitude = 6");
        let r2 = initial_report(&c2, &initial_velocity(&c2, &g).unwrap(), &ens).unwrap();
        for (a, b) in [(r.u_h_half, r2.u_h_half), (r.u_besov_m3_2, r2.u_besov_m3_2), (r.u_l2, r2.u_l2)] {
            assert!((b / a - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbation_is_unit_and_independent() {
        let c = cfg("N = 16\nvelocity = random\nseed = 9");
        let g = build_grid(&c).unwrap();
        let p = perturbation(&c, &g).unwrap();
        assert!((p.norm_l2() - 1.0).abs() < 1e-12);
        assert!(p.sub(&initial_velocity(&c, &g).unwrap()).norm_l2() > 0.1);
    }
}
