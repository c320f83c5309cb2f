//! Coupled time loop, the Picard local solver, twin runs and the heat oracle.

mod config;
mod heat;
mod init;
mod picard;
mod run;
mod state;
mod twin;

pub use config::{AmplitudeNorm, RunConfig, SnapshotFormat, VelocityFamily};
pub use heat::{heat_decay, HeatDecayReport};
pub use init::{build_grid, initial_particles, initial_report, initial_velocity, perturbation, InitialReport};
pub use picard::{picard_conditions, picard_local_solve, PicardConditions, PicardReport, PicardStatus};
pub use run::{
    lyapunov_thetas, run, simulate, simulate_from, step_count, write_json, write_snapshots, Abort, FitOutcome,
    LyapunovOutcome, MonitorSummary, Simulation, Summary, Verdicts, DENSITY_GUARD, ENERGY_GUARD, MONOTONE_TOLERANCE,
};
pub use state::RunState;
pub use twin::{twin_run, TwinReport};
