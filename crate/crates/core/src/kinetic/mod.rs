//! Weighted particles for the kinetic density: initial profiles, the
//! exponential drag integrator, moment deposition and a priori bound monitors.

mod deposit;
mod ensemble;
mod jacobian;
mod monitor;
mod profile;
mod sampler;
pub mod snapshot;

pub use deposit::{deposit, DragOperator, MomentFields};
pub use ensemble::{characteristic_step, sample_initial, ParticleEnsemble, Sampling, MIN_PARTICLES};
pub use jacobian::{determinant, flow_jacobian_probe, HistoryStep, PhasePoint};
pub use monitor::{
    moment_bound_monitor, Budgets, Check, MomentReport, Verdict, DEFAULT_LIPSCHITZ_DELTA, DEFAULT_Q,
    MONITOR_SLACK,
};
pub use profile::{c_q, gauss_hermite, Profile, Spatial, Velocity};
pub use sampler::{CicSampler, ConstantSampler, SpectralSampler, Stencil, VelocitySampler};
