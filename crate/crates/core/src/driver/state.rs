use super::config::RunConfig;
use super::init::{build_grid, initial_particles, initial_report, initial_velocity, InitialReport};
use crate::diagnostics::{energy_functionals, EnergyRecord, RecordContext};
use crate::error::{Result, VnsError};
use crate::fluid::{pressure_solve, rhs_with, FluidParams, FluidState, Forcing, StepInfo};
use crate::kinetic::{deposit, Budgets, CicSampler, DragOperator, MomentFields, ParticleEnsemble, Stencil, VelocitySampler};
use crate::spectral::{grad_linf, hdot_norm, Grid, SpectralField};

/// Pointwise quantities of the current state reused by the trapezoid rules.
#[derive(Clone, Copy, Debug, Default)]
struct Snapshot {
    grad_linf: f64,
    u_linf: f64,
    d0: f64,
}

/// The coupled solution and its running integrals.
#[derive(Clone)]
pub struct RunState {
    pub cfg: RunConfig,
    pub grid: Grid,
    pub params: FluidParams,
    pub fluid: FluidState,
    pub ens: ParticleEnsemble,
    pub budgets: Budgets,
    /// `∫₀ᵗ D₀`.
    pub int_d0: f64,
    pub steps: usize,
    pub initial: InitialReport,
    /// Deposited initial density, `None` without particles.
    pub rho0: Option<SpectralField>,
    /// `∫₀ᵗ j` on the lattice nodes, empty without particles.
    j_integral: Vec<Vec<f64>>,
    j_now: Vec<Vec<f64>>,
    sampler: CicSampler,
    now: Snapshot,
    /// Compensation term of the summed time so that `k` steps of `dt` land on `k·dt`.
    t_carry: f64,
}

fn momentum_nodes(ens: &ParticleEnsemble, grid: &Grid) -> Vec<Vec<f64>> {
    let d = grid.dim();
    let inv = 1.0 / grid.cell_volume();
    let mut out = vec![vec![0.0; grid.len()]; d];
    for ((x, v), w) in ens.positions().iter().zip(ens.velocities()).zip(ens.weights()) {
        let st = Stencil::new(grid, x);
        for c in 0..st.len {
            for a in 0..d {
                out[a][st.idx[c]] += w * st.wt[c] * inv * v[a];
            }
        }
    }
    out
}

fn relative_energy(ens: &ParticleEnsemble, s: &CicSampler) -> f64 {
    let d = ens.dim();
    ens.positions()
        .iter()
        .zip(ens.velocities())
        .zip(ens.weights())
        .map(|((x, v), w)| {
            let u = s.sample(x);
            w * (0..d).map(|a| (v[a] - u[a]).powi(2)).sum::<f64>()
        })
        .sum()
}

impl RunState {
    /// Builds the configured initial data.
    pub fn initialize(cfg: &RunConfig) -> Result<Self> {
        let grid = build_grid(cfg)?;
        let u0 = initial_velocity(cfg, &grid)?;
        Self::from_parts(cfg, u0, initial_particles(cfg)?)
    }

    /// Starts from explicit data; `u0` is projected by `J_n`.
    pub fn from_parts(cfg: &RunConfig, u0: SpectralField, ens: ParticleEnsemble) -> Result<Self> {
        let grid = build_grid(cfg)?;
        if u0.grid() != &grid || ens.dim() != cfg.dim {
            return Err(VnsError::Config("initial data do not match the configured grid".into()));
        }
        let params = FluidParams { cutoff: cfg.cutoff(), scheme: cfg.scheme, nonlinear: cfg.nonlinear };
        let fluid = FluidState::new(&u0, &params)?;
        let initial = initial_report(cfg, &fluid.u, &ens)?;
        let sampler = CicSampler::new(&fluid.u);
        let rho0 = if ens.is_empty() { None } else { Some(deposit(&ens, &fluid.u)?.rho) };
        let j_now = if ens.is_empty() { Vec::new() } else { momentum_nodes(&ens, &grid) };
        let mut s = RunState {
            cfg: cfg.clone(),
            j_integral: vec![vec![0.0; grid.len()]; if ens.is_empty() { 0 } else { cfg.dim }],
            grid,
            params,
            fluid,
            ens,
            budgets: Budgets::default(),
            int_d0: 0.0,
            steps: 0,
            initial,
            rho0,
            j_now,
            sampler,
            now: Snapshot::default(),
            t_carry: 0.0,
        };
        s.now = s.snapshot();
        Ok(s)
    }

    fn snapshot(&self) -> Snapshot {
        let u_linf = (0..self.grid.len())
            .map(|p| self.sampler.physical().iter().map(|c| c[p] * c[p]).sum::<f64>())
            .fold(0.0, f64::max)
            .sqrt();
        Snapshot {
            grad_linf: grad_linf(&self.fluid.u),
            u_linf,
            d0: hdot_norm(&self.fluid.u, 1.0).powi(2) + relative_energy(&self.ens, &self.sampler),
        }
    }

    pub fn t(&self) -> f64 {
        self.fluid.t
    }

    pub fn u(&self) -> &SpectralField {
        &self.fluid.u
    }

    /// `½‖u‖² + ½Σwᵢ|Vᵢ|²`.
    pub fn e0(&self) -> f64 {
        0.5 * self.fluid.u.norm_l2_sq() + 0.5 * self.ens.kinetic_moment()
    }

    /// Current dissipation `D₀`.
    pub fn d0(&self) -> f64 {
        self.now.d0
    }

    /// One Strang step: half kinetic advance in the frozen `uⁿ`, fluid step
    /// with the drag of the moved particles, half kinetic advance in `uⁿ⁺¹`.
    pub fn coupled_step(&mut self, dt: f64) -> Result<StepInfo> {
        if !(dt > 0.0) {
            return Err(VnsError::Usage(format!("dt must be positive, got {dt}")));
        }
        self.ens.advance(&self.sampler, 0.5 * dt);
        let t_prev = self.fluid.t;
        let info = match DragOperator::new(&self.ens, &self.grid) {
            Some(op) => self.fluid.step(&Forcing::Drag(&op), dt, &self.params)?,
            None => self.fluid.step(&Forcing::None, dt, &self.params)?,
        };
        let y = dt - self.t_carry;
        self.fluid.t = t_prev + y;
        self.t_carry = (self.fluid.t - t_prev) - y;
        self.sampler = CicSampler::new(&self.fluid.u);
        self.ens.advance(&self.sampler, 0.5 * dt);
        let t = self.fluid.t;
        let finite = self
            .ens
            .velocities()
            .iter()
            .zip(self.ens.positions())
            .all(|(v, x)| v.iter().chain(x.iter()).all(|c| c.is_finite()));
        if !finite {
            return Err(VnsError::Numerical { t, reason: "non-finite particle state".into() });
        }
        let prev = self.now;
        self.now = self.snapshot();
        let h = 0.5 * dt;
        self.budgets.lipschitz += h * (prev.grad_linf + self.now.grad_linf);
        self.budgets.u_linf += h * (prev.u_linf + self.now.u_linf);
        let decay = (-dt).exp();
        self.budgets.u_linf_damped = decay * self.budgets.u_linf_damped + h * (decay * prev.u_linf + self.now.u_linf);
        self.int_d0 += h * (prev.d0 + self.now.d0);
        if !self.j_integral.is_empty() {
            let j_next = momentum_nodes(&self.ens, &self.grid);
            for ((acc, a), b) in self.j_integral.iter_mut().zip(&self.j_now).zip(&j_next) {
                for ((s, x), y) in acc.iter_mut().zip(a).zip(b) {
                    *s += h * (x + y);
                }
            }
            self.j_now = j_next;
        }
        if !(self.now.d0.is_finite() && self.budgets.lipschitz.is_finite()) {
            return Err(VnsError::Numerical { t, reason: "non-finite diagnostics".into() });
        }
        self.steps += 1;
        Ok(info)
    }

    /// `∫₀ᵗ j` as a field, or `None` without particles.
    pub fn j_integral(&self) -> Result<Option<SpectralField>> {
        if self.j_integral.is_empty() {
            return Ok(None);
        }
        SpectralField::from_physical(&self.grid, &self.j_integral).map(Some)
    }

    /// `‖j‖_{L¹}` by the lattice rule.
    pub fn j_l1(&self) -> f64 {
        (0..self.grid.len())
            .map(|p| self.j_now.iter().map(|c| c[p] * c[p]).sum::<f64>().sqrt())
            .sum::<f64>()
            * self.grid.cell_volume()
    }

    pub fn moments(&self) -> Result<MomentFields> {
        deposit(&self.ens, &self.fluid.u)
    }

    /// Time derivative of the velocity under the current drag.
    pub fn u_t(&self) -> Result<SpectralField> {
        match DragOperator::new(&self.ens, &self.grid) {
            Some(op) => rhs_with(&self.fluid.u, &Forcing::Drag(&op), &self.params),
            None => rhs_with(&self.fluid.u, &Forcing::None, &self.params),
        }
    }

    /// All monitored functionals at the current time.
    pub fn record(&self, moments: &MomentFields) -> Result<EnergyRecord> {
        let op = DragOperator::new(&self.ens, &self.grid);
        let force = op.as_ref().map_or(Forcing::None, Forcing::Drag);
        let u_t = rhs_with(&self.fluid.u, &force, &self.params)?;
        let pressure = pressure_solve(&self.fluid.u, &force, &self.params)?;
        let ctx = RecordContext {
            int_d0: self.int_d0,
            lipschitz: self.budgets.lipschitz,
            r0: self.initial.r0,
            c_frak: self.cfg.c_frak,
            eta: self.cfg.loglip_eta,
        };
        energy_functionals(&self.fluid, Some(&u_t), &pressure, moments, &self.ens, &ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_kinetic_half_is_pure_fluid() {
        let cfg = RunConfig::parse("N = 16\nvelocity = random\nvelocity_amplitude = 0.5\nseed = 3").unwrap();
        let mut s = RunState::initialize(&cfg).unwrap();
        let mut f = s.fluid.clone();
        for _ in 0..20 {
            s.coupled_step(cfg.dt).unwrap();
            f.step(&Forcing::None, cfg.dt, &s.params).unwrap();
        }
        assert!(s.fluid.u.bitwise_eq(&f.u));
        // the coupled clock is compensated, the bare solver's is a plain sum
        assert_eq!(s.t(), 20.0 * cfg.dt);
        assert!((f.t - s.t()).abs() < 1e-15);
    }

    #[test]
    fn symmetric_particles_keep_the_fluid_at_rest() {
        let cfg = RunConfig::parse(
            "N = 16\nvelocity = zero\nparticle_profile = maxwellian_uniform\nparticles = 4096\n\
             particle_lattice_x = 32\nparticle_lattice_v = 2\nparticle_v_temp = 0.5",
        )
        .unwrap();
        let mut s = RunState::initialize(&cfg).unwrap();
        let k0 = s.ens.kinetic_moment();
        for _ in 0..100 {
            s.coupled_step(0.02).unwrap();
        }
        assert!(s.fluid.u.norm_l2() < 1e-12, "{}", s.fluid.u.norm_l2());
        // Vᵢ(t) = e^{−t}Vᵢ(0) while u = 0
        let k = s.ens.kinetic_moment();
        assert!((k / k0 - (-4.0f64).exp()).abs() < 1e-10 * (k / k0));
    }

    #[test]
    fn budgets_are_monotone_and_mass_is_fixed() {
        let cfg = RunConfig::parse(
            "N = 16\nL = 12\nvelocity = blob\nvelocity_width = 1.5\nvelocity_amplitude = 0.3\n\
             particle_profile = two_beam\nparticles = 2000\nparticle_x_width = 1.5",
        )
        .unwrap();
        let mut s = RunState::initialize(&cfg).unwrap();
        let m0 = s.ens.total_mass();
        let mut last = (0.0, 0.0);
        for _ in 0..30 {
            s.coupled_step(0.02).unwrap();
            assert!(s.budgets.lipschitz >= last.0 && s.int_d0 >= last.1);
            last = (s.budgets.lipschitz, s.int_d0);
            assert_eq!(s.ens.total_mass(), m0);
        }
        let rel = (s.e0() + s.int_d0 - s.initial.e0).abs() / s.initial.e0;
        assert!(rel < 1e-3, "{rel}");
    }
}
