use serde::Serialize;

use super::config::RunConfig;
use super::init::{build_grid, initial_particles, initial_velocity};
use super::state::RunState;
use crate::error::{Result, VnsError};
use crate::fluid::advection;
use crate::kinetic::{CicSampler, DragOperator, ParticleEnsemble};
use crate::spectral::{friedrichs_project, hdot_norm, heat_propagate, leray_project, truncate_ball, SpectralField};

/// Fraction of the strict contraction bound actually used.
const CONTRACTION_MARGIN: f64 = 0.99;

/// Gaps below this multiple of the trajectory norm are round-off and stop the
/// ratio measurement.
const ROUNDOFF_FLOOR: f64 = 1e-13;

/// Fixed-point agreement tolerates this multiple of the integrator error.
pub const AGREEMENT_FACTOR: f64 = 10.0;

/// Step-size conditions of the local existence argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PicardConditions {
    /// The unnamed constant `C`.
    pub c: f64,
    /// Cutoff wavenumber `n`.
    pub n: f64,
    /// Ball radius `M = (2(1 + ‖u₀‖² + ∫∫|v|²f₀))^{1/2}`.
    pub m: f64,
    pub delta: f64,
    /// `‖f₀‖_{L¹_v L^∞_x}`.
    pub f0_norm: f64,
    /// `C_{f₀}`, taken as `𝔣₀`.
    pub c_f0: f64,
    /// `(δ/(C n^{3/2} M))²`.
    pub t_lipschitz: f64,
    /// `log 2 / ‖f₀‖`.
    pub t_log2: f64,
    /// `1/(‖f₀‖M²)`.
    pub t_energy: f64,
    /// `1/(2C(C_{f₀} + n³M))` times the margin.
    pub t_contraction: f64,
    pub t: f64,
}

pub fn picard_conditions(cfg: &RunConfig) -> Result<PicardConditions> {
    let grid = build_grid(cfg)?;
    let u0 = initial_velocity(cfg, &grid)?;
    let ens = initial_particles(cfg)?;
    let c = cfg.picard_constant;
    let n = cfg.cutoff();
    let m = (2.0 * (1.0 + u0.norm_l2_sq() + ens.kinetic_moment())).sqrt();
    let (f0_norm, c_f0) = ens.profile().map_or((0.0, 0.0), |p| (p.l1v_linfx(), p.frak_f0()));
    let inv = |x: f64| if x > 0.0 { 1.0 / x } else { f64::INFINITY };
    let t_lipschitz = (cfg.lipschitz_delta / (c * n.powf(1.5) * m)).powi(2);
    let t_log2 = std::f64::consts::LN_2 * inv(f0_norm);
    let t_energy = inv(f0_norm * m * m);
    let t_contraction = CONTRACTION_MARGIN / (2.0 * c * (c_f0 + n.powi(3) * m));
    let t = t_lipschitz.min(t_log2).min(t_energy).min(t_contraction);
    Ok(PicardConditions {
        c,
        n,
        m,
        delta: cfg.lipschitz_delta,
        f0_norm,
        c_f0,
        t_lipschitz,
        t_log2,
        t_energy,
        t_contraction,
        t,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PicardStatus {
    Converged,
    /// No convergence within the iteration budget: the map did not contract.
    ContractionFailure,
}

#[derive(Clone, Debug, Serialize)]
pub struct PicardReport {
    pub conditions: PicardConditions,
    pub horizon: f64,
    pub steps: usize,
    pub dt: f64,
    /// `‖wₘ₊₁ − wₘ‖_{E_T}` per iteration.
    pub gaps: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Largest ratio of successive gaps above round-off.
    pub contraction: f64,
    pub status: PicardStatus,
    /// `‖u_fp(T) − u_dt(T)‖` against the coupled solver.
    pub coupled_gap: f64,
    /// `‖u_dt(T) − u_{dt/2}(T)‖`.
    pub integrator_error: f64,
    pub agrees: bool,
    #[serde(skip)]
    pub fixed_point: Vec<SpectralField>,
}

/// `J_n P(s − w·∇u)` with the zero mode removed.
fn linear_part(u: &SpectralField, w: &SpectralField, s: &SpectralField, cutoff: f64, nonlinear: bool) -> Result<SpectralField> {
    let mut src = s.clone();
    if nonlinear {
        src.axpy(-1.0, &advection(w, u)?);
    }
    truncate_ball(&mut src, cutoff);
    for c in 0..src.n_comps() {
        src.comp_mut(c)[0] = num_complex::Complex64::new(0.0, 0.0);
    }
    leray_project(&src)
}

/// `Φ(w)`: transports the particles in `w`, then solves the linear parabolic
/// problem with convection by `w` and drag `∫(v − w)f dv`.
fn phi(
    u0: &SpectralField,
    ens0: &ParticleEnsemble,
    w: &[SpectralField],
    dt: f64,
    cutoff: f64,
    nonlinear: bool,
) -> Result<Vec<SpectralField>> {
    let grid = u0.grid().clone();
    let samplers: Vec<CicSampler> = w.iter().map(CicSampler::new).collect();
    let mut ens = ens0.clone();
    let mut u = u0.clone();
    let mut out = Vec::with_capacity(w.len());
    out.push(u.clone());
    let zero = SpectralField::zeros_vector(&grid);
    for k in 0..w.len() - 1 {
        ens.advance(&samplers[k], 0.5 * dt);
        let (s0, s1) = match DragOperator::new(&ens, &grid) {
            Some(op) => (op.brinkman(&w[k])?, op.brinkman(&w[k + 1])?),
            None => (zero.clone(), zero.clone()),
        };
        let a = linear_part(&u, &w[k], &s0, cutoff, nonlinear)?;
        let mut pred = u.clone();
        pred.axpy(dt, &a);
        let pred = heat_propagate(&pred, dt)?;
        let b = linear_part(&pred, &w[k + 1], &s1, cutoff, nonlinear)?;
        let mut next = u.clone();
        next.axpy(0.5 * dt, &a);
        let mut next = heat_propagate(&next, dt)?;
        next.axpy(0.5 * dt, &b);
        truncate_ball(&mut next, cutoff);
        if !next.is_finite() {
            return Err(VnsError::Numerical { t: (k + 1) as f64 * dt, reason: "non-finite Picard iterate".into() });
        }
        u = next;
        out.push(u.clone());
        ens.advance(&samplers[k + 1], 0.5 * dt);
    }
    Ok(out)
}

/// `(sup‖δ‖² + ∫‖∇δ‖²)^{1/2}` with the trapezoid rule in time.
fn energy_norm(a: &[SpectralField], b: &[SpectralField], dt: f64) -> f64 {
    let diffs: Vec<SpectralField> = a.iter().zip(b).map(|(x, y)| x.sub(y)).collect();
    let sup = diffs.iter().map(SpectralField::norm_l2_sq).fold(0.0, f64::max);
    let grads: Vec<f64> = diffs.iter().map(|z| hdot_norm(z, 1.0).powi(2)).collect();
    let int: f64 = grads.windows(2).map(|g| 0.5 * dt * (g[0] + g[1])).sum();
    (sup + int).sqrt()
}

fn coupled_final(cfg: &RunConfig, steps: usize, dt: f64) -> Result<SpectralField> {
    let mut s = RunState::initialize(cfg)?;
    for _ in 0..steps {
        s.coupled_step(dt)?;
    }
    Ok(s.fluid.u)
}

/// Picard iteration on `[0, T]` from `w₀ ≡ J_n u₀`. `horizon = None` takes `T`
/// from the step conditions. Non-contraction is a status, not an error.
pub fn picard_local_solve(cfg: &RunConfig, horizon: Option<f64>) -> Result<PicardReport> {
    let conditions = picard_conditions(cfg)?;
    let t = horizon.unwrap_or(conditions.t);
    if !(t > 0.0 && t.is_finite()) {
        return Err(VnsError::Config(format!("Picard horizon must be positive, got {t}")));
    }
    let steps = (t / cfg.dt).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let grid = build_grid(cfg)?;
    let cutoff = cfg.cutoff();
    let u0 = friedrichs_project(&initial_velocity(cfg, &grid)?, cutoff)?;
    let ens = initial_particles(cfg)?;
    let mut w = vec![u0.clone(); steps + 1];
    let mut gaps = Vec::new();
    let mut status = PicardStatus::ContractionFailure;
    for _ in 0..cfg.picard_max_iter {
        let next = phi(&u0, &ens, &w, dt, cutoff, cfg.nonlinear)?;
        let gap = energy_norm(&next, &w, dt);
        let scale = energy_norm(&next, &vec![SpectralField::zeros_vector(&grid); steps + 1], dt);
        w = next;
        gaps.push(gap);
        if !gap.is_finite() || gap > 1e100 {
            break;
        }
        if gap <= cfg.picard_tol * scale.max(f64::MIN_POSITIVE) || gap == 0.0 {
            status = PicardStatus::Converged;
            break;
        }
    }
    let scale = energy_norm(&w, &vec![SpectralField::zeros_vector(&grid); steps + 1], dt);
    let ratios: Vec<f64> = gaps
        .windows(2)
        .filter(|g| g[0] > ROUNDOFF_FLOOR * scale && g[1] > ROUNDOFF_FLOOR * scale)
        .map(|g| g[1] / g[0])
        .collect();
    let contraction = ratios.iter().copied().fold(0.0, f64::max);
    let coarse = coupled_final(cfg, steps, dt)?;
    let fine = coupled_final(cfg, 2 * steps, 0.5 * dt)?;
    let last = w.last().expect("at least one time level");
    let coupled_gap = last.sub(&coarse).norm_l2();
    let integrator_error = coarse.sub(&fine).norm_l2();
    let floor = ROUNDOFF_FLOOR * last.norm_l2().max(1e-300);
    Ok(PicardReport {
        conditions,
        horizon: t,
        steps,
        dt,
        gaps,
        ratios,
        contraction,
        status,
        coupled_gap,
        integrator_error,
        agrees: coupled_gap <= AGREEMENT_FACTOR * integrator_error + floor,
        fixed_point: w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fluid_only_small_horizon_contracts() {
        let cfg = RunConfig::parse(
            "N = 16\ncutoff = 4\nvelocity = random\nvelocity_amplitude = 0.2\nvelocity_norm = l2\nseed = 2\n\
             picard_constant = 0.01\ndt = 0.01",
        )
        .unwrap();
        let r = picard_local_solve(&cfg, None).unwrap();
        assert_eq!(r.status, PicardStatus::Converged);
        assert!(r.contraction < 0.5, "{}", r.contraction);
        assert!(r.agrees, "{} vs {}", r.coupled_gap, r.integrator_error);
    }

    #[test]
    fn conditions_follow_the_formulas() {
        let cfg = RunConfig::parse("N = 16\ncutoff = 4\nvelocity = zero").unwrap();
        let c = picard_conditions(&cfg).unwrap();
        assert!((c.m - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.t_log2, f64::INFINITY);
        assert!((c.t_lipschitz - (0.1 / (8.0 * c.m)).powi(2)).abs() < 1e-15);
        assert!((c.t_contraction - 0.99 / (2.0 * 64.0 * c.m)).abs() < 1e-15);
        assert_eq!(c.t, c.t_lipschitz.min(c.t_contraction));
    }
}
