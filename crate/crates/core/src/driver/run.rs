use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::config::{RunConfig, SnapshotFormat};
use super::init::InitialReport;
use super::state::RunState;
use crate::diagnostics::{
    asymptotic_density, decay_fit, lipschitz_chain_report, lyapunov_check, write_records_csv, DecayFit,
    DensitySample, EnergyRecord, LipschitzChain, LyapunovSample, LyapunovVerdict,
};
use crate::error::{Result, VnsError};
use crate::kinetic::snapshot::{write_particles_binary, write_particles_ndjson};
use crate::kinetic::{moment_bound_monitor, MomentReport, ParticleEnsemble, Verdict};
use crate::fluid::FluidState;
use crate::spectral::snapshot::{write_field_binary, write_field_ndjson};

/// `ρ_max` may grow to this multiple of its initial bound before the run aborts.
pub const DENSITY_GUARD: f64 = 10.0;
/// Relative growth of `E₀` tolerated before the run aborts.
pub const ENERGY_GUARD: f64 = 1e-2;
/// Relative per-record increase of `E₀` still counted as nonincreasing.
pub const MONOTONE_TOLERANCE: f64 = 1e-9;
/// Tail tolerance for the asymptotic density.
pub const DENSITY_TAIL_TOLERANCE: f64 = 1e-3;

/// Number of steps for a horizon; the horizon must be a whole number of steps.
pub fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    let n = (t_end / dt).round();
    if (n * dt - t_end).abs() > 1e-9 * dt.max(t_end) {
        return Err(VnsError::Config(format!("t_end = {t_end} is not a multiple of dt = {dt}")));
    }
    Ok(n as usize)
}

#[derive(Clone, Debug, Serialize)]
pub struct Abort {
    pub t: f64,
    pub reason: String,
}

/// In-memory outcome of a run.
pub struct Simulation {
    pub state: RunState,
    pub records: Vec<EnergyRecord>,
    pub monitors: Vec<MomentReport>,
    pub chains: Vec<(f64, LipschitzChain)>,
    pub density: Vec<DensitySample>,
    pub max_cfl: f64,
    pub cfl_warnings: usize,
    pub abort: Option<Abort>,
    /// State at the last record that passed every guard.
    pub last_good: (FluidState, ParticleEnsemble),
}

struct Recorder<'a> {
    sim: &'a mut Vec<EnergyRecord>,
    monitors: &'a mut Vec<MomentReport>,
    chains: &'a mut Vec<(f64, LipschitzChain)>,
    density: &'a mut Vec<DensitySample>,
}

fn take_record(state: &RunState, out: &mut Recorder<'_>) -> Result<Option<String>> {
    let moments = state.moments()?;
    let rec = state.record(&moments)?;
    if !rec.is_finite() {
        return Ok(Some("non-finite record".into()));
    }
    let cfg = &state.cfg;
    if cfg.monitor_moments {
        out.monitors.push(moment_bound_monitor(
            &moments,
            &state.ens,
            &state.budgets,
            state.t(),
            cfg.lipschitz_delta,
            cfg.moment_q,
        )?);
    }
    let brinkman = match crate::kinetic::DragOperator::new(&state.ens, &state.grid) {
        Some(op) => op.brinkman(state.u())?,
        None => crate::spectral::SpectralField::zeros_vector(&state.grid),
    };
    out.chains.push((state.t(), lipschitz_chain_report(state.u(), &state.u_t()?, &brinkman)?));
    if let Some(j_int) = state.j_integral()? {
        out.density.push(DensitySample { t: state.t(), rho: moments.rho.clone(), j_integral: j_int, j_norm: state.j_l1() });
    }
    let init = &state.initial;
    let rho_bound = DENSITY_GUARD * (2.0 * init.f0_norm).max(init.rho0_max);
    let reason = if rec.rho_linf > rho_bound && !state.ens.is_empty() {
        Some(format!("density {} exceeds guard {rho_bound}", rec.rho_linf))
    } else if rec.e0 > init.e0 * (1.0 + ENERGY_GUARD) {
        Some(format!("energy {} exceeds guard {}", rec.e0, init.e0 * (1.0 + ENERGY_GUARD)))
    } else {
        None
    };
    out.sim.push(rec);
    Ok(reason)
}

/// Runs the configured scenario in memory. Guard trips are reported in
/// [`Simulation::abort`] rather than as errors so the caller can still dump
/// the artifacts.
pub fn simulate(cfg: &RunConfig) -> Result<Simulation> {
    let state = RunState::initialize(cfg)?;
    simulate_from(state)
}

pub fn simulate_from(mut state: RunState) -> Result<Simulation> {
    let cfg = state.cfg.clone();
    let n = step_count(cfg.t_end, cfg.dt)?;
    let mut records = Vec::new();
    let mut monitors = Vec::new();
    let mut chains = Vec::new();
    let mut density = Vec::new();
    let mut rec = Recorder { sim: &mut records, monitors: &mut monitors, chains: &mut chains, density: &mut density };
    let mut abort = take_record(&state, &mut rec)?.map(|reason| Abort { t: state.t(), reason });
    let mut last_good = (state.fluid.clone(), state.ens.clone());
    let mut max_cfl = 0.0f64;
    let mut cfl_warnings = 0;
    let e0_limit = state.initial.e0 * (1.0 + ENERGY_GUARD);
    let mut k = 0;
    while abort.is_none() && k < n {
        match state.coupled_step(cfg.dt) {
            Ok(info) => {
                max_cfl = max_cfl.max(info.cfl);
                cfl_warnings += usize::from(info.cfl_warning);
            }
            Err(VnsError::Numerical { t, reason }) => {
                abort = Some(Abort { t, reason });
                break;
            }
            Err(e) => return Err(e),
        }
        k += 1;
        if state.e0() > e0_limit {
            abort = Some(Abort { t: state.t(), reason: format!("energy {} exceeds guard {e0_limit}", state.e0()) });
            break;
        }
        if k % cfg.record_every == 0 || k == n {
            match take_record(&state, &mut rec)? {
                Some(reason) => abort = Some(Abort { t: state.t(), reason }),
                None => last_good = (state.fluid.clone(), state.ens.clone()),
            }
        }
    }
    Ok(Simulation { state, records, monitors, chains, density, max_cfl, cfl_warnings, abort, last_good })
}

/// A fit or the reason it could not be made.
#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum FitOutcome {
    Fit(DecayFit),
    Error { error: String },
}

impl FitOutcome {
    pub fn fit(&self) -> Option<&DecayFit> {
        match self {
            FitOutcome::Fit(f) => Some(f),
            FitOutcome::Error { .. } => None,
        }
    }
}

fn fit_column(records: &[EnergyRecord], f: impl Fn(&EnergyRecord) -> f64, window: (f64, f64)) -> FitOutcome {
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let y: Vec<f64> = records.iter().map(f).collect();
    match decay_fit(&t, &y, window) {
        Ok(fit) => FitOutcome::Fit(fit),
        Err(e) => FitOutcome::Error { error: e.to_string() },
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MonitorSummary {
    pub verdict: Verdict,
    /// Smallest bound/value ratio over the checked records.
    pub worst_margin: Option<f64>,
    pub checked: usize,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum LyapunovOutcome {
    Verdict(LyapunovVerdict),
    Error { error: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdicts {
    /// `max |E₀ + ∫D₀ − E₀,₀| / E₀,₀` over records.
    pub energy_balance: f64,
    pub e0_monotone: bool,
    pub e0_max_relative_increase: f64,
    pub mass_drift: f64,
    pub w1_le_cs: bool,
    pub monitors: BTreeMap<String, MonitorSummary>,
    pub lyapunov_e0: LyapunovOutcome,
    pub lyapunov_e1: LyapunovOutcome,
    pub max_cfl: f64,
    pub cfl_warnings: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensitySummary {
    pub mass: f64,
    pub residuals: Vec<(f64, f64)>,
    pub tail: Option<f64>,
    pub conclusive: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub config: BTreeMap<String, String>,
    pub initial: InitialReport,
    pub steps: usize,
    pub t_final: f64,
    pub records: usize,
    pub aborted: Option<Abort>,
    pub fits: BTreeMap<String, FitOutcome>,
    pub verdicts: Verdicts,
    pub asymptotic_density: Option<DensitySummary>,
    pub lipschitz_chain: Vec<(f64, LipschitzChain)>,
}

/// Interpolation exponents `(θ for E₀, θ for E₁)` of the Nash–Lyapunov chains.
pub fn lyapunov_thetas(dim: usize) -> (f64, f64) {
    if dim == 3 { (0.6, 5.0 / 7.0) } else { (0.5, 2.0 / 3.0) }
}

fn lyapunov(samples: &[LyapunovSample], theta: f64) -> LyapunovOutcome {
    match lyapunov_check(samples, theta) {
        Ok(v) => LyapunovOutcome::Verdict(v),
        Err(e) => LyapunovOutcome::Error { error: e.to_string() },
    }
}

impl Simulation {
    pub fn summary(&self) -> Result<Summary> {
        let cfg = &self.state.cfg;
        let recs = &self.records;
        let init = &self.state.initial;
        let mut fits = BTreeMap::new();
        if let Some(w) = cfg.fit_window {
            fits.insert("E0".to_string(), fit_column(recs, |r| r.e0, w));
            fits.insert("E1".to_string(), fit_column(recs, |r| r.e1, w));
            fits.insert("w1_bound".to_string(), fit_column(recs, |r| r.w1_bound, w));
        }
        let scale = if init.e0 > 0.0 { init.e0 } else { 1.0 };
        let energy_balance = recs.iter().map(|r| (r.e0 + r.int_d0 - init.e0).abs() / scale).fold(0.0, f64::max);
        let increase = recs
            .windows(2)
            .map(|w| (w[1].e0 - w[0].e0) / scale)
            .fold(0.0, f64::max);
        let mass_drift = recs.iter().map(|r| (r.mass - init.mass).abs()).fold(0.0, f64::max);
        let mut monitors = BTreeMap::new();
        if let Some(first) = self.monitors.first() {
            for (i, (name, _)) in first.checks().iter().enumerate() {
                let checks: Vec<_> = self.monitors.iter().map(|m| *m.checks()[i].1).collect();
                let active: Vec<_> = checks.iter().filter(|c| c.verdict != Verdict::NotApplicable).collect();
                let verdict = if active.iter().any(|c| c.verdict == Verdict::Fail) {
                    Verdict::Fail
                } else if active.is_empty() {
                    Verdict::NotApplicable
                } else {
                    Verdict::Pass
                };
                let worst = active.iter().map(|c| c.margin()).fold(None, |a: Option<f64>, m| Some(a.map_or(m, |a| a.min(m))));
                monitors.insert(name.to_string(), MonitorSummary { verdict, worst_margin: worst, checked: active.len() });
            }
        }
        let (th0, th1) = lyapunov_thetas(cfg.dim);
        let chain0: Vec<LyapunovSample> =
            recs.iter().map(|r| LyapunovSample { t: r.t, l: r.e0, h: r.d0, n: r.u_besov_neg_half_d }).collect();
        let chain1: Vec<LyapunovSample> =
            recs.iter().map(|r| LyapunovSample { t: r.t, l: r.e1, h: r.d1_core, n: r.u_besov_neg_half_d }).collect();
        let asymptotic = match &self.state.rho0 {
            Some(rho0) if !self.density.is_empty() => {
                let a = asymptotic_density(rho0, &self.density, DENSITY_TAIL_TOLERANCE)?;
                Some(DensitySummary { mass: a.mass, residuals: a.residuals, tail: a.tail, conclusive: a.conclusive })
            }
            _ => None,
        };
        Ok(Summary {
            config: cfg.echo.clone(),
            initial: init.clone(),
            steps: self.state.steps,
            t_final: self.state.t(),
            records: recs.len(),
            aborted: self.abort.clone(),
            fits,
            verdicts: Verdicts {
                energy_balance,
                e0_monotone: increase <= MONOTONE_TOLERANCE,
                e0_max_relative_increase: increase,
                mass_drift,
                w1_le_cs: recs.iter().all(|r| r.w1_bound <= r.cs_bound),
                monitors,
                lyapunov_e0: lyapunov(&chain0, th0),
                lyapunov_e1: lyapunov(&chain1, th1),
                max_cfl: self.max_cfl,
                cfl_warnings: self.cfl_warnings,
            },
            asymptotic_density: asymptotic,
            lipschitz_chain: self.chains.clone(),
        })
    }
}

/// Writes the velocity and particle snapshots under `stem` in the configured formats.
pub fn write_snapshots(dir: &Path, stem: &str, fmt: SnapshotFormat, fluid: &FluidState, ens: &ParticleEnsemble) -> Result<()> {
    let ndjson = matches!(fmt, SnapshotFormat::Ndjson | SnapshotFormat::Both);
    let binary = matches!(fmt, SnapshotFormat::Binary | SnapshotFormat::Both);
    if ndjson {
        let mut w = BufWriter::new(File::create(dir.join(format!("{stem}_u.ndjson")))?);
        write_field_ndjson(&mut w, fluid.t, &fluid.u)?;
        w.flush()?;
        let mut w = BufWriter::new(File::create(dir.join(format!("{stem}_particles.ndjson")))?);
        write_particles_ndjson(&mut w, ens)?;
        w.flush()?;
    }
    if binary {
        let mut w = BufWriter::new(File::create(dir.join(format!("{stem}_u.vnsf")))?);
        write_field_binary(&mut w, fluid.t, &fluid.u)?;
        w.flush()?;
        let mut w = BufWriter::new(File::create(dir.join(format!("{stem}_particles.vnsp")))?);
        write_particles_binary(&mut w, fluid.t, ens)?;
        w.flush()?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Runs and writes `energy.csv`, `summary.json` and the final snapshots into
/// `dir`. A guard trip also dumps the last good state and returns the
/// numerical error after everything is written.
pub fn run(cfg: &RunConfig, dir: &Path) -> Result<Summary> {
    std::fs::create_dir_all(dir)?;
    let sim = simulate(cfg)?;
    write_records_csv(BufWriter::new(File::create(dir.join("energy.csv"))?), &sim.records)?;
    let summary = sim.summary()?;
    write_json(&dir.join("summary.json"), &summary)?;
    write_snapshots(dir, "final", cfg.snapshot_format, &sim.state.fluid, &sim.state.ens)?;
    if let Some(a) = &sim.abort {
        let fmt = if cfg.snapshot_format == SnapshotFormat::None { SnapshotFormat::Both } else { cfg.snapshot_format };
        write_snapshots(dir, "last_good", fmt, &sim.last_good.0, &sim.last_good.1)?;
        return Err(VnsError::Numerical { t: a.t, reason: a.reason.clone() });
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizon_must_be_whole_steps() {
        assert_eq!(step_count(1.0, 0.01).unwrap(), 100);
        assert!(step_count(1.0, 0.3).is_err());
    }

    #[test]
    fn run_writes_artifacts_and_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let text = "N = 16\nL = 12\nvelocity = blob\nvelocity_width = 1.5\nvelocity_amplitude = 0.2\n\
                    particle_profile = maxwellian_gaussian\nparticles = 1000\nparticle_x_width = 1.5\n\
                    particle_v_temp = 0.1\nt_end = 0.4\ndt = 0.02\nrecord_every = 1\nfit_window = 0.1:0.4\n";
        let cfg = RunConfig::parse(text).unwrap();
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        let s = run(&cfg, &a).unwrap();
        run(&cfg, &b).unwrap();
        for f in ["energy.csv", "summary.json", "final_u.ndjson", "final_u.vnsf", "final_particles.vnsp", "final_particles.ndjson"] {
            assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
        }
        assert_eq!(s.records, 21);
        assert!(s.verdicts.w1_le_cs && s.verdicts.e0_monotone);
        assert_eq!(s.verdicts.mass_drift, 0.0);
        assert!(s.verdicts.energy_balance < 1e-3);
        assert!(s.fits["E0"].fit().is_some());
        assert!(s.asymptotic_density.is_some());
    }

    #[test]
    fn energy_guard_aborts_with_snapshot() {
        let dir = tempfile::tempdir().unwrap();
        // a huge time step on the explicit convection makes the energy grow
        let cfg = RunConfig::parse(
            "N = 16\nvelocity = random\nvelocity_amplitude = 40\nvelocity_band = 6\ndt = 0.5\nt_end = 20\nrecord_every = 1",
        )
        .unwrap();
        let err = run(&cfg, dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(dir.path().join("last_good_u.vnsf").exists());
    }
}
