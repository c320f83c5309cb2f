use serde::Serialize;

use super::config::RunConfig;
use super::init::{build_grid, initial_particles, initial_velocity, perturbation};
use super::run::step_count;
use super::state::RunState;
use crate::error::Result;

/// Stability series `Y(t) = ‖δu‖² + Σwᵢ|δZᵢ|²` of two runs that differ by
/// `ε` times a fixed unit perturbation of `u₀`.
#[derive(Clone, Debug, Serialize)]
pub struct TwinReport {
    pub eps: f64,
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub du2: Vec<f64>,
    pub dz2: Vec<f64>,
    /// `max_t Y(t)/ε²`, `0` for `ε = 0`.
    pub k_max: f64,
}

impl TwinReport {
    /// `Y` at the record closest to `t`.
    pub fn y_at(&self, t: f64) -> Option<f64> {
        let i = self
            .t
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))?
            .0;
        Some(self.y[i])
    }
}

pub fn twin_run(cfg: &RunConfig, eps: f64) -> Result<TwinReport> {
    let grid = build_grid(cfg)?;
    let u0 = initial_velocity(cfg, &grid)?;
    let ens = initial_particles(cfg)?;
    let mut u1 = u0.clone();
    // ε = 0 leaves the data untouched so that both runs coincide bitwise
    if eps != 0.0 {
        u1.axpy(eps, &perturbation(cfg, &grid)?);
    }
    let mut a = RunState::from_parts(cfg, u0, ens.clone())?;
    let mut b = RunState::from_parts(cfg, u1, ens)?;
    let n = step_count(cfg.t_end, cfg.dt)?;
    let mut rep = TwinReport { eps, t: Vec::new(), y: Vec::new(), du2: Vec::new(), dz2: Vec::new(), k_max: 0.0 };
    let mut sample = |a: &RunState, b: &RunState| -> Result<()> {
        let du2 = a.u().sub(b.u()).norm_l2_sq();
        let gaps = a.ens.phase_gap_sq(&b.ens)?;
        let dz2: f64 = gaps.iter().zip(a.ens.weights()).map(|(g, w)| g * w).sum();
        rep.t.push(a.t());
        rep.du2.push(du2);
        rep.dz2.push(dz2);
        rep.y.push(du2 + dz2);
        Ok(())
    };
    sample(&a, &b)?;
    for k in 1..=n {
        a.coupled_step(cfg.dt)?;
        b.coupled_step(cfg.dt)?;
        if k % cfg.record_every == 0 || k == n {
            sample(&a, &b)?;
        }
    }
    if eps != 0.0 {
        rep.k_max = rep.y.iter().fold(0.0, |m, y| m.max(y / (eps * eps)));
    }
    Ok(rep)
}
