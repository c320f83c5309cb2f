use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::profile::{gauss_hermite, Profile, Spatial, Velocity};
use super::sampler::VelocitySampler;
use crate::error::{Result, VnsError};

/// Smallest particle count accepted by [`sample_initial`].
pub const MIN_PARTICLES: usize = 1000;

/// How the phase-space measure `f₀ dx dv` is discretised.
#[derive(Clone, Debug, PartialEq)]
pub enum Sampling {
    /// Tensor quadrature: midpoint lattice in `x`, Gauss–Hermite (Maxwellian
    /// families) or midpoint lattice (bump) in `v`. By default Gauss–Hermite
    /// gets at most four nodes per axis (exact for the moments used) and the
    /// rest of the budget goes to `x`, so deposits stay smooth.
    Lattice { per_axis_x: Option<usize>, per_axis_v: Option<usize> },
    /// Seeded independent draws with equal weights `M₀/n`.
    Random { seed: u64 },
}

/// Weighted particles `(Xᵢ, Vᵢ, wᵢ)` standing in for `f`.
#[derive(Clone, Debug)]
pub struct ParticleEnsemble {
    dim: usize,
    length: f64,
    pub(crate) x: Vec<[f64; 3]>,
    pub(crate) v: Vec<[f64; 3]>,
    w: Vec<f64>,
    x0: Vec<[f64; 3]>,
    v0: Vec<[f64; 3]>,
    profile: Option<Profile>,
    mass: f64,
}

impl ParticleEnsemble {
    /// The `f ≡ 0` ensemble.
    pub fn empty(dim: usize, length: f64) -> Self {
        ParticleEnsemble {
            dim,
            length,
            x: Vec::new(),
            v: Vec::new(),
            w: Vec::new(),
            x0: Vec::new(),
            v0: Vec::new(),
            profile: None,
            mass: 0.0,
        }
    }

    /// Builds an ensemble from explicit particles. Positions are wrapped.
    pub fn from_particles(
        dim: usize,
        length: f64,
        x: Vec<[f64; 3]>,
        v: Vec<[f64; 3]>,
        w: Vec<f64>,
    ) -> Result<Self> {
        if x.len() != v.len() || x.len() != w.len() {
            return Err(VnsError::Config("particle arrays differ in length".into()));
        }
        if w.iter().any(|&wi| !(wi > 0.0)) {
            return Err(VnsError::Config("particle weights must be positive".into()));
        }
        let mut ens = ParticleEnsemble {
            dim,
            length,
            x,
            v,
            w,
            x0: Vec::new(),
            v0: Vec::new(),
            profile: None,
            mass: 0.0,
        };
        for xi in ens.x.iter_mut() {
            wrap(xi, length, dim);
        }
        ens.x0 = ens.x.clone();
        ens.v0 = ens.v.clone();
        ens.mass = ens.w.iter().sum();
        Ok(ens)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.x
    }

    pub fn velocities(&self) -> &[[f64; 3]] {
        &self.v
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn initial_positions(&self) -> &[[f64; 3]] {
        &self.x0
    }

    pub fn initial_velocities(&self) -> &[[f64; 3]] {
        &self.v0
    }

    pub fn profile(&self) -> Option<&Profile> {
        self.profile.as_ref()
    }

    /// `M₀`, fixed at construction.
    pub fn initial_mass(&self) -> f64 {
        self.mass
    }

    /// `Σ wᵢ` now; weights never change, so this equals `M₀` bitwise.
    pub fn total_mass(&self) -> f64 {
        self.w.iter().sum()
    }

    /// `Σ wᵢ|Vᵢ|²`.
    pub fn kinetic_moment(&self) -> f64 {
        self.v
            .iter()
            .zip(&self.w)
            .map(|(v, w)| w * (0..self.dim).map(|a| v[a] * v[a]).sum::<f64>())
            .sum()
    }

    /// Exponential drag step with `u` frozen and evaluated at the half-step
    /// predictor `X*`:
    ///
    /// `V⁺ = e^{−dt}V + (1−e^{−dt})u(X*)`,
    /// `X⁺ = X + (1−e^{−dt})V + (dt−1+e^{−dt})u(X*)`.
    ///
    /// Exact when `u` is constant in space.
    pub fn advance(&mut self, u: &dyn VelocitySampler, dt: f64) {
        for (x, v) in self.x.iter_mut().zip(self.v.iter_mut()) {
            characteristic_step(x, v, u, dt, self.dim);
            wrap(x, self.length, self.dim);
        }
    }

    /// Per-particle phase-space gap to another ensemble with the same identities
    /// (minimal-image in `x`).
    pub fn phase_gap_sq(&self, other: &ParticleEnsemble) -> Result<Vec<f64>> {
        if self.len() != other.len() || self.w != other.w || self.x0 != other.x0 {
            return Err(VnsError::Usage("ensembles carry different particle identities".into()));
        }
        let d = self.dim;
        let l = self.length;
        Ok((0..self.len())
            .map(|i| {
                let mut s = 0.0;
                for a in 0..d {
                    let dx = min_image(self.x[i][a] - other.x[i][a], l);
                    let dv = self.v[i][a] - other.v[i][a];
                    s += dx * dx + dv * dv;
                }
                s
            })
            .collect())
    }
}

/// One exponential-midpoint characteristic step for a single particle (no wrap).
pub fn characteristic_step(x: &mut [f64; 3], v: &mut [f64; 3], u: &dyn VelocitySampler, dt: f64, d: usize) {
    let eh = (-0.5 * dt).exp();
    let ah = 1.0 - eh;
    let bh = 0.5 * dt - ah;
    let e = (-dt).exp();
    let a = 1.0 - e;
    let b = dt - a;
    let u0 = u.sample(x);
    let mut xs = *x;
    for k in 0..d {
        xs[k] = x[k] + ah * v[k] + bh * u0[k];
    }
    let us = u.sample(&xs);
    for k in 0..d {
        x[k] += a * v[k] + b * us[k];
        v[k] = e * v[k] + a * us[k];
    }
}

pub(crate) fn wrap(x: &mut [f64; 3], l: f64, d: usize) {
    for xi in x.iter_mut().take(d) {
        *xi = xi.rem_euclid(l);
        if *xi >= l {
            *xi = 0.0;
        }
    }
}

pub(crate) fn min_image(dx: f64, l: f64) -> f64 {
    let mut r = dx.rem_euclid(l);
    if r > l / 2.0 {
        r -= l;
    }
    r
}

fn midpoints(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    let h = (hi - lo) / m as f64;
    (0..m).map(|i| lo + (i as f64 + 0.5) * h).collect()
}

/// Tensor product of per-axis node lists in `d` dimensions.
fn tensor(axes: &[Vec<f64>], d: usize) -> Vec<[f64; 3]> {
    let mut out = vec![[0.0; 3]];
    for ax in axes.iter().take(d).enumerate() {
        let (a, nodes) = ax;
        let mut next = Vec::with_capacity(out.len() * nodes.len());
        for p in &out {
            for &c in nodes {
                let mut q = *p;
                q[a] = c;
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn spatial_nodes(p: &Profile, m: usize) -> Vec<([f64; 3], f64)> {
    let d = p.dim;
    let l = p.box_length;
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|a| match &p.spatial {
            Spatial::Uniform => midpoints(0.0, l, m),
            Spatial::Gaussian { center, width } => {
                if 10.0 * width < l {
                    midpoints(center[a] - 5.0 * width, center[a] + 5.0 * width, m)
                } else {
                    midpoints(center[a] - l / 2.0, center[a] + l / 2.0, m)
                }
            }
            Spatial::Bump { center, radius } => midpoints(center[a] - radius, center[a] + radius, m),
        })
        .collect();
    normalised(
        tensor(&axes, d)
            .into_iter()
            .map(|x| (x, p.spatial_density(&x)))
            .collect(),
    )
}

fn velocity_nodes(p: &Profile, m: usize) -> Vec<([f64; 3], f64)> {
    let d = p.dim;
    let hermite = |temp: f64, centre: [f64; 3], share: f64| {
        let (z, w) = gauss_hermite(m);
        let s = (2.0 * temp).sqrt();
        let axes: Vec<Vec<f64>> = (0..d)
            .map(|a| z.iter().map(|zi| centre[a] + s * zi).collect())
            .collect();
        let weights: Vec<f64> = w.iter().map(|wi| wi / std::f64::consts::PI.sqrt()).collect();
        let wt_axes: Vec<Vec<f64>> = vec![weights; d];
        let nodes = tensor(&axes, d);
        let wts = tensor(&wt_axes, d);
        nodes
            .into_iter()
            .zip(wts)
            .map(|(v, w)| (v, share * (0..d).map(|a| w[a]).product::<f64>()))
            .collect::<Vec<_>>()
    };
    match &p.velocity {
        Velocity::Maxwellian { temp, drift } => hermite(*temp, *drift, 1.0),
        Velocity::TwoBeam { temp, beam } => {
            let mut out = hermite(*temp, *beam, 0.5);
            out.extend(hermite(*temp, [-beam[0], -beam[1], -beam[2]], 0.5));
            out
        }
        Velocity::Bump { radius, drift } => {
            let axes: Vec<Vec<f64>> = (0..d)
                .map(|a| midpoints(drift[a] - radius, drift[a] + radius, m))
                .collect();
            normalised(
                tensor(&axes, d)
                    .into_iter()
                    .map(|v| (v, p.velocity_density(&v)))
                    .collect(),
            )
        }
    }
}

/// Drops empty nodes and rescales the weights to sum to one.
fn normalised(nodes: Vec<([f64; 3], f64)>) -> Vec<([f64; 3], f64)> {
    let kept: Vec<_> = nodes.into_iter().filter(|(_, w)| *w > 0.0).collect();
    let s: f64 = kept.iter().map(|(_, w)| w).sum();
    kept.into_iter().map(|(x, w)| (x, w / s)).collect()
}

fn draw_spatial(p: &Profile, rng: &mut ChaCha8Rng) -> [f64; 3] {
    let d = p.dim;
    let mut x = [0.0; 3];
    match &p.spatial {
        Spatial::Uniform => {
            for xi in x.iter_mut().take(d) {
                *xi = rng.random_range(0.0..p.box_length);
            }
        }
        Spatial::Gaussian { center, width } => {
            let n = Normal::new(0.0, *width).expect("positive width");
            for a in 0..d {
                x[a] = center[a] + n.sample(rng);
            }
        }
        Spatial::Bump { center, radius } => {
            let y = draw_bump(d, rng);
            for a in 0..d {
                x[a] = center[a] + radius * y[a];
            }
        }
    }
    x
}

fn draw_velocity(p: &Profile, rng: &mut ChaCha8Rng) -> [f64; 3] {
    let d = p.dim;
    let mut v = [0.0; 3];
    let gauss = |temp: f64, c: &[f64; 3], v: &mut [f64; 3], rng: &mut ChaCha8Rng| {
        let n = Normal::new(0.0, temp.sqrt()).expect("positive temperature");
        for a in 0..d {
            v[a] = c[a] + n.sample(rng);
        }
    };
    match &p.velocity {
        Velocity::Maxwellian { temp, drift } => gauss(*temp, drift, &mut v, rng),
        Velocity::TwoBeam { temp, beam } => {
            let c = if rng.random_bool(0.5) { *beam } else { [-beam[0], -beam[1], -beam[2]] };
            gauss(*temp, &c, &mut v, rng);
        }
        Velocity::Bump { radius, drift } => {
            let y = draw_bump(d, rng);
            for a in 0..d {
                v[a] = drift[a] + radius * y[a];
            }
        }
    }
    v
}

/// Rejection sample of `(1 − |y|²)²` on the unit ball.
fn draw_bump(d: usize, rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let mut y = [0.0; 3];
        for yi in y.iter_mut().take(d) {
            *yi = rng.random_range(-1.0..1.0);
        }
        let s: f64 = y.iter().map(|c| c * c).sum();
        if s < 1.0 && rng.random::<f64>() < (1.0 - s).powi(2) {
            return y;
        }
    }
}

/// Discretises `f₀` into roughly `n` weighted particles.
pub fn sample_initial(profile: &Profile, n: usize, sampling: &Sampling) -> Result<ParticleEnsemble> {
    if n < MIN_PARTICLES {
        return Err(VnsError::Config(format!(
            "need at least {MIN_PARTICLES} particles, got {n}"
        )));
    }
    let d = profile.dim;
    let (x, v, w) = match sampling {
        Sampling::Lattice { per_axis_x, per_axis_v } => {
            let m = ((n as f64).powf(1.0 / (2.0 * d as f64))).round().max(2.0) as usize;
            let mv = per_axis_v.unwrap_or(match profile.velocity {
                Velocity::Bump { .. } => m,
                _ => m.min(4),
            });
            let vs = velocity_nodes(profile, mv);
            let mx = per_axis_x.unwrap_or_else(|| {
                ((n as f64 / vs.len() as f64).powf(1.0 / d as f64)).floor().max(1.0) as usize
            });
            let xs = spatial_nodes(profile, mx);
            let mut x = Vec::with_capacity(xs.len() * vs.len());
            let mut v = Vec::with_capacity(xs.len() * vs.len());
            let mut w = Vec::with_capacity(xs.len() * vs.len());
            for (xi, gx) in &xs {
                for (vi, hv) in &vs {
                    x.push(*xi);
                    v.push(*vi);
                    w.push(profile.mass * gx * hv);
                }
            }
            (x, v, w)
        }
        Sampling::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut x = Vec::with_capacity(n);
            let mut v = Vec::with_capacity(n);
            for _ in 0..n {
                x.push(draw_spatial(profile, &mut rng));
                v.push(draw_velocity(profile, &mut rng));
            }
            (x, v, vec![profile.mass / n as f64; n])
        }
    };
    let mut ens = ParticleEnsemble::from_particles(d, profile.box_length, x, v, w)?;
    ens.profile = Some(profile.clone());
    Ok(ens)
}
