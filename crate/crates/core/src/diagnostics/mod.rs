//! Monitored functionals, decay fits, the Nash–Lyapunov envelope, monokinetic
//! asymptotics, the log-Lipschitz norm and the record format.

mod fit;
mod loglip;
mod lyapunov;
mod monokinetic;
mod record;

pub use fit::{decay_fit, parse_window, DecayFit, MIN_FIT_SAMPLES};
pub use loglip::{lipschitz_chain_report, loglip_norm, loglip_of_map, omega, LipschitzChain, DEFAULT_ETA, LOGLIP_OCTAVES};
pub use lyapunov::{lyapunov_check, lyapunov_envelope, lyapunov_rate, LyapunovSample, LyapunovVerdict, ENVELOPE_SLACK};
pub use monokinetic::{asymptotic_density, monokinetic_metrics, AsymptoticDensity, DensitySample, MonokineticMetrics};
pub use record::{
    energy_functionals, format_value, read_series_csv, write_records_csv, EnergyRecord, RecordContext, Series,
    EXTRA_COLUMNS, REQUIRED_COLUMNS,
};
