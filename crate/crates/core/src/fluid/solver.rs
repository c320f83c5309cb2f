use crate::error::{Result, VnsError};
use crate::kinetic::{DragOperator, MomentFields};
use crate::spectral::{
    dealias, derive, friedrichs_project, leray_project, linf, to_spectral, truncate_ball, Derivative,
    Grid, SpectralField,
};

/// CFL number above which a step is flagged.
pub const CFL_LIMIT: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Integrating factor `e^{−|k|²dt}` with Heun on the remaining terms.
    IfRk2,
    /// Crank–Nicolson on `Δ`, Heun predictor–corrector on the remaining terms.
    ImexCn,
}

impl std::str::FromStr for Scheme {
    type Err = VnsError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "if-rk2" | "ifrk2" | "IF-RK2" => Ok(Scheme::IfRk2),
            "imex-cn" | "imexcn" | "IMEX-CN" => Ok(Scheme::ImexCn),
            other => Err(VnsError::Config(format!("unknown scheme {other}"))),
        }
    }
}

/// Fixed parameters of the truncated momentum equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluidParams {
    /// Friedrichs cutoff `n` (a wavenumber).
    pub cutoff: f64,
    pub scheme: Scheme,
    /// When false the convection term is dropped (Stokes–Brinkman).
    pub nonlinear: bool,
}

impl FluidParams {
    /// Defaults: cutoff at the dealiasing radius, IF-RK2, convection on.
    pub fn new(grid: &Grid) -> Self {
        FluidParams {
            cutoff: grid.dealias_radius(),
            scheme: Scheme::IfRk2,
            nonlinear: true,
        }
    }
}

/// Source term for the momentum equation.
#[derive(Clone, Copy, Debug)]
pub enum Forcing<'a> {
    None,
    /// Fixed field, e.g. a deposited drag source.
    Fixed(&'a SpectralField),
    /// Drag against frozen particles, re-evaluated at each stage velocity.
    Drag(&'a DragOperator),
}

impl Forcing<'_> {
    fn eval(&self, u: &SpectralField) -> Result<Option<SpectralField>> {
        match self {
            Forcing::None => Ok(None),
            Forcing::Fixed(b) => Ok(Some((*b).clone())),
            Forcing::Drag(op) => op.brinkman(u).map(Some),
        }
    }
}

/// Velocity field and time.
///
/// `u_t` and the pressure are recomputed from the state on demand, so they
/// are never stale across a step.
#[derive(Clone, Debug)]
pub struct FluidState {
    pub u: SpectralField,
    pub t: f64,
}

/// What a step observed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    pub cfl: f64,
    pub cfl_warning: bool,
}

/// Dealiased convection `u·∇u`, unprojected.
pub fn convection(u: &SpectralField) -> Result<SpectralField> {
    advection(u, u)
}

/// Dealiased transport term `w·∇u`, unprojected.
pub fn advection(w: &SpectralField, u: &SpectralField) -> Result<SpectralField> {
    let g = u.grid();
    let d = g.dim();
    if w.grid() != g || !w.is_vector() || !u.is_vector() {
        return Err(VnsError::Usage("advection needs two vector fields on one grid".into()));
    }
    let grad = derive(u, Derivative::Grad)?.to_physical();
    let phys = w.to_physical();
    let mut out = vec![vec![0.0; g.len()]; d];
    for (c, oc) in out.iter_mut().enumerate() {
        for b in 0..d {
            let gc = &grad[c * d + b];
            let wb = &phys[b];
            for p in 0..g.len() {
                oc[p] += wb[p] * gc[p];
            }
        }
    }
    let mut z = to_spectral(g, &out)?;
    dealias(&mut z);
    Ok(z)
}

/// `G = −u·∇u + b`, truncated to the Friedrichs ball but not projected,
/// with zero mean.
fn momentum_source(u: &SpectralField, b: Option<&SpectralField>, params: &FluidParams) -> Result<SpectralField> {
    let g = u.grid();
    let mut src = if params.nonlinear {
        convection(u)?.scaled(-1.0)
    } else {
        SpectralField::zeros(g, g.dim())
    };
    if let Some(b) = b {
        if b.grid() != g || b.n_comps() != g.dim() {
            return Err(VnsError::Config("forcing does not match the velocity grid".into()));
        }
        src.axpy(1.0, b);
    }
    truncate_ball(&mut src, params.cutoff);
    // the velocity stays mean-free: the net drag on the mean flow is dropped
    for c in src.components_mut() {
        c[0] = num_complex::Complex64::new(0.0, 0.0);
    }
    Ok(src)
}

/// `J_n P(−u·∇u + b)`, everything but the Laplacian.
fn nonlinear_part(u: &SpectralField, force: &Forcing<'_>, params: &FluidParams) -> Result<SpectralField> {
    let b = force.eval(u)?;
    leray_project(&momentum_source(u, b.as_ref(), params)?)
}

fn laplacian(u: &SpectralField) -> SpectralField {
    let g = u.grid().clone();
    let mut out = u.clone();
    out.apply_multiplier(|p| -g.k_sq(p));
    out
}

/// `u_t = Δu − J_n P(u·∇u) + J_n P(b)` for a fixed source `b`.
pub fn rhs_with(u: &SpectralField, force: &Forcing<'_>, params: &FluidParams) -> Result<SpectralField> {
    let mut out = nonlinear_part(u, force, params)?;
    out.axpy(1.0, &laplacian(u));
    out.set_solenoidal(true);
    Ok(out)
}

/// `u_t` with the drag source taken from deposited moments.
pub fn rhs(state: &FluidState, moments: &MomentFields, params: &FluidParams) -> Result<SpectralField> {
    if moments.brinkman.grid() != state.u.grid() {
        return Err(VnsError::Config("moments live on a different grid".into()));
    }
    rhs_with(&state.u, &Forcing::Fixed(&moments.brinkman), params)
}

/// Pressure `P` with `∇P = (I − P)(−u·∇u + b)`, mean zero.
pub fn pressure_solve(u: &SpectralField, force: &Forcing<'_>, params: &FluidParams) -> Result<SpectralField> {
    let b = force.eval(u)?;
    let src = momentum_source(u, b.as_ref(), params)?;
    Ok(pressure_from_source(&src))
}

/// `P̂ = −i(k·Ĝ)/|k|²`.
fn pressure_from_source(src: &SpectralField) -> SpectralField {
    let g = src.grid().clone();
    let d = g.dim();
    let mut p = SpectralField::zeros_scalar(&g);
    let out = p.comp_mut(0);
    for (q, o) in out.iter_mut().enumerate() {
        let ksq = g.k_sq(q);
        if ksq == 0.0 || g.is_nyquist(q) {
            continue;
        }
        let k = g.wave_vector(q);
        let mut dot = num_complex::Complex64::new(0.0, 0.0);
        for a in 0..d {
            dot += src.comp(a)[q] * k[a];
        }
        *o = num_complex::Complex64::new(dot.im, -dot.re) / ksq;
    }
    p
}

/// Relative L² defect of `−Δu + ∇P + u_t + u·∇u − b = 0` inside the
/// truncated space.
pub fn stokes_residual(u: &SpectralField, force: &Forcing<'_>, params: &FluidParams) -> Result<f64> {
    let b = force.eval(u)?;
    let src = momentum_source(u, b.as_ref(), params)?;
    let p = pressure_from_source(&src);
    let mut ut = leray_project(&src)?;
    ut.axpy(1.0, &laplacian(u));
    let grad_p = derive(&p, Derivative::Grad)?;
    let mut res = laplacian(u).scaled(-1.0);
    res.axpy(1.0, &grad_p);
    res.axpy(1.0, &ut);
    res.axpy(-1.0, &src);
    let scale = src.norm_l2() + laplacian(u).norm_l2() + ut.norm_l2();
    Ok(if scale == 0.0 { 0.0 } else { res.norm_l2() / scale })
}

/// Heat multiplier `e^{−|k|²τ}` applied in place.
fn heat(z: &mut SpectralField, tau: f64) {
    let g = z.grid().clone();
    let flag = z.is_solenoidal();
    z.apply_multiplier(|p| (-g.k_sq(p) * tau).exp());
    z.set_solenoidal(flag);
}

/// `(1 − τ|k|²/2)/(1 + τ|k|²/2)` and `1/(1 + τ|k|²/2)` multipliers.
fn crank_nicolson(u: &SpectralField, n: &SpectralField, dt: f64) -> SpectralField {
    let g = u.grid().clone();
    let mut a = u.clone();
    a.apply_multiplier(|p| {
        let h = 0.5 * dt * g.k_sq(p);
        (1.0 - h) / (1.0 + h)
    });
    let mut b = n.scaled(dt);
    b.apply_multiplier(|p| 1.0 / (1.0 + 0.5 * dt * g.k_sq(p)));
    a.axpy(1.0, &b);
    a
}

impl FluidState {
    /// Starts from `J_n u₀`.
    pub fn new(u0: &SpectralField, params: &FluidParams) -> Result<Self> {
        Ok(FluidState {
            u: friedrichs_project(u0, params.cutoff)?,
            t: 0.0,
        })
    }

    pub fn cfl(&self, dt: f64) -> f64 {
        linf(&self.u) * dt / self.u.grid().spacing()
    }

    /// One step of the truncated momentum equation.
    pub fn step(&mut self, force: &Forcing<'_>, dt: f64, params: &FluidParams) -> Result<StepInfo> {
        if !(dt > 0.0) {
            return Err(VnsError::Usage(format!("dt must be positive, got {dt}")));
        }
        let cfl = if params.nonlinear { self.cfl(dt) } else { 0.0 };
        let u = &self.u;
        let a = nonlinear_part(u, force, params)?;
        let mut next = match params.scheme {
            Scheme::IfRk2 => {
                let mut pred = u.clone();
                pred.axpy(dt, &a);
                heat(&mut pred, dt);
                let b = nonlinear_part(&pred, force, params)?;
                let mut out = u.clone();
                out.axpy(0.5 * dt, &a);
                heat(&mut out, dt);
                out.axpy(0.5 * dt, &b);
                out
            }
            Scheme::ImexCn => {
                let pred = crank_nicolson(u, &a, dt);
                let mut avg = nonlinear_part(&pred, force, params)?;
                avg.axpy(1.0, &a);
                avg.scale(0.5);
                crank_nicolson(u, &avg, dt)
            }
        };
        truncate_ball(&mut next, params.cutoff);
        next.set_solenoidal(true);
        if !next.is_finite() {
            return Err(VnsError::Numerical {
                t: self.t + dt,
                reason: "non-finite velocity".into(),
            });
        }
        self.u = next;
        self.t += dt;
        Ok(StepInfo {
            cfl,
            cfl_warning: cfl > CFL_LIMIT,
        })
    }
}
