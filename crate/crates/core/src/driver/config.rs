//! Flat `key = value` run configuration.
//!
//! Blank lines and text after `#` are ignored. Vectors are comma separated.
//! Unknown keys are rejected so that typos cannot silently fall back to
//! defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Result, VnsError};
use crate::fluid::Scheme;
use crate::kinetic::{Profile, Sampling, Spatial, Velocity, DEFAULT_LIPSCHITZ_DELTA, DEFAULT_Q};

/// Initial velocity family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VelocityFamily {
    Zero,
    /// Leray projection of a Gaussian pointing along `velocity_direction`,
    /// mean removed: `û` is bounded near `k = 0`, so it sits in `Ḃ^{−d/2}_{2,∞}`.
    Blob,
    TaylorGreen,
    /// Seeded white noise restricted to `1 ≤ |n| ≤ velocity_band`, projected.
    Random,
}

/// Which norm `velocity_amplitude` prescribes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmplitudeNorm {
    /// Raw shape amplitude.
    Peak,
    L1,
    L2,
    HHalf,
    H1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SnapshotFormat {
    Ndjson,
    Binary,
    Both,
    None,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    /// Friedrichs cutoff wavenumber; `None` is the dealiasing radius.
    pub cutoff: Option<f64>,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub nonlinear: bool,
    /// Steps between records.
    pub record_every: usize,
    pub seed: u64,

    pub velocity: VelocityFamily,
    pub velocity_amplitude: f64,
    pub velocity_norm: AmplitudeNorm,
    pub velocity_width: f64,
    pub velocity_center: Option<[f64; 3]>,
    pub velocity_direction: [f64; 3],
    pub velocity_mode: usize,
    pub velocity_band: usize,

    pub particle_profile: String,
    pub particles: usize,
    pub particle_mass: f64,
    pub particle_sampling: Sampling,
    pub particle_x_center: Option<[f64; 3]>,
    pub particle_x_width: f64,
    pub particle_x_radius: f64,
    pub particle_v_temp: f64,
    pub particle_v_drift: [f64; 3],
    pub particle_beam: [f64; 3],
    pub particle_v_radius: f64,

    pub lipschitz_delta: f64,
    pub moment_q: f64,
    /// `C𝔣₀` in the weighted functionals.
    pub c_frak: f64,
    pub loglip_eta: f64,
    pub monitor_moments: bool,
    /// Data counts as small when `‖u₀‖²_{H¹} + ∫∫|v|²f₀` is below this.
    pub smallness_threshold: f64,

    pub fit_window: Option<(f64, f64)>,
    pub heat_width: f64,
    pub heat_window: (f64, f64),

    pub picard_constant: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,

    pub output_dir: PathBuf,
    pub snapshot_format: SnapshotFormat,

    /// Raw key/value pairs as read, for the summary echo.
    pub echo: BTreeMap<String, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 2,
            n: 64,
            length: 2.0 * std::f64::consts::PI,
            cutoff: None,
            dt: 0.01,
            t_end: 1.0,
            scheme: Scheme::IfRk2,
            nonlinear: true,
            record_every: 10,
            seed: 0,
            velocity: VelocityFamily::TaylorGreen,
            velocity_amplitude: 1.0,
            velocity_norm: AmplitudeNorm::Peak,
            velocity_width: 1.0,
            velocity_center: None,
            velocity_direction: [1.0, 0.0, 0.0],
            velocity_mode: 1,
            velocity_band: 4,
            particle_profile: "none".into(),
            particles: 0,
            particle_mass: 1.0,
            particle_sampling: Sampling::Lattice { per_axis_x: None, per_axis_v: None },
            particle_x_center: None,
            particle_x_width: 1.0,
            particle_x_radius: 1.0,
            particle_v_temp: 1.0,
            particle_v_drift: [0.0; 3],
            particle_beam: [1.0, 0.0, 0.0],
            particle_v_radius: 1.0,
            lipschitz_delta: DEFAULT_LIPSCHITZ_DELTA,
            moment_q: DEFAULT_Q,
            c_frak: 1.0,
            loglip_eta: crate::diagnostics::DEFAULT_ETA,
            monitor_moments: true,
            smallness_threshold: 1.0,
            fit_window: None,
            heat_width: 0.25,
            heat_window: (1.0, 50.0),
            picard_constant: 1.0,
            picard_tol: 1e-10,
            picard_max_iter: 50,
            output_dir: PathBuf::from("vns-out"),
            snapshot_format: SnapshotFormat::Both,
            echo: BTreeMap::new(),
        }
    }
}

fn bad(key: &str, value: &str) -> VnsError {
    VnsError::Config(format!("invalid value for {key}: {value}"))
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| bad(key, v))
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(bad(key, v)),
    }
}

fn vector(key: &str, v: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.is_empty() || parts.len() > 3 {
        return Err(bad(key, v));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = num(key, p)?;
    }
    Ok(out)
}

fn optional_count(key: &str, v: &str) -> Result<Option<usize>> {
    if v == "auto" { Ok(None) } else { num(key, v).map(Some) }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| VnsError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut lattice = (None, None);
        let mut sampling = "lattice".to_string();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| VnsError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (key.trim(), value.trim());
            if cfg.echo.insert(k.to_string(), v.to_string()).is_some() {
                return Err(VnsError::Config(format!("duplicate key {k}")));
            }
            match k {
                "dim" | "d" => cfg.dim = num(k, v)?,
                "n" | "N" | "grid" => cfg.n = num(k, v)?,
                "length" | "L" | "box" => cfg.length = num(k, v)?,
                "cutoff" => cfg.cutoff = if v == "auto" { None } else { Some(num(k, v)?) },
                "dt" => cfg.dt = num(k, v)?,
                "t_end" => cfg.t_end = num(k, v)?,
                "scheme" => cfg.scheme = v.parse()?,
                "nonlinear" => cfg.nonlinear = boolean(k, v)?,
                "record_every" => cfg.record_every = num(k, v)?,
                "seed" => cfg.seed = num(k, v)?,
                "velocity" => {
                    cfg.velocity = match v {
                        "zero" | "none" => VelocityFamily::Zero,
                        "blob" => VelocityFamily::Blob,
                        "taylor_green" => VelocityFamily::TaylorGreen,
                        "random" => VelocityFamily::Random,
                        _ => return Err(bad(k, v)),
                    }
                }
                "velocity_amplitude" => cfg.velocity_amplitude = num(k, v)?,
                "velocity_norm" => {
                    cfg.velocity_norm = match v {
                        "peak" => AmplitudeNorm::Peak,
                        "l1" => AmplitudeNorm::L1,
                        "l2" => AmplitudeNorm::L2,
                        "h_half" => AmplitudeNorm::HHalf,
                        "h1" => AmplitudeNorm::H1,
                        _ => return Err(bad(k, v)),
                    }
                }
                "velocity_width" => cfg.velocity_width = num(k, v)?,
                "velocity_center" => cfg.velocity_center = Some(vector(k, v)?),
                "velocity_direction" => cfg.velocity_direction = vector(k, v)?,
                "velocity_mode" => cfg.velocity_mode = num(k, v)?,
                "velocity_band" => cfg.velocity_band = num(k, v)?,
                "particle_profile" => cfg.particle_profile = v.to_string(),
                "particles" => cfg.particles = num(k, v)?,
                "particle_mass" => cfg.particle_mass = num(k, v)?,
                "particle_sampling" => sampling = v.to_string(),
                "particle_lattice_x" => lattice.0 = optional_count(k, v)?,
                "particle_lattice_v" => lattice.1 = optional_count(k, v)?,
                "particle_x_center" => cfg.particle_x_center = Some(vector(k, v)?),
                "particle_x_width" => cfg.particle_x_width = num(k, v)?,
                "particle_x_radius" => cfg.particle_x_radius = num(k, v)?,
                "particle_v_temp" => cfg.particle_v_temp = num(k, v)?,
                "particle_v_drift" => cfg.particle_v_drift = vector(k, v)?,
                "particle_beam" => cfg.particle_beam = vector(k, v)?,
                "particle_v_radius" => cfg.particle_v_radius = num(k, v)?,
                "lipschitz_delta" => cfg.lipschitz_delta = num(k, v)?,
                "moment_q" => cfg.moment_q = num(k, v)?,
                "c_frak" => cfg.c_frak = num(k, v)?,
                "loglip_eta" => cfg.loglip_eta = num(k, v)?,
                "monitor_moments" => cfg.monitor_moments = boolean(k, v)?,
                "smallness_threshold" => cfg.smallness_threshold = num(k, v)?,
                "fit_window" => {
                    cfg.fit_window = Some(crate::diagnostics::parse_window(v).map_err(|_| bad(k, v))?)
                }
                "heat_width" => cfg.heat_width = num(k, v)?,
                "heat_window" => cfg.heat_window = crate::diagnostics::parse_window(v).map_err(|_| bad(k, v))?,
                "picard_constant" => cfg.picard_constant = num(k, v)?,
                "picard_tol" => cfg.picard_tol = num(k, v)?,
                "picard_max_iter" => cfg.picard_max_iter = num(k, v)?,
                "output_dir" => cfg.output_dir = PathBuf::from(v),
                "snapshot_format" => {
                    cfg.snapshot_format = match v {
                        "ndjson" => SnapshotFormat::Ndjson,
                        "binary" => SnapshotFormat::Binary,
                        "both" => SnapshotFormat::Both,
                        "none" => SnapshotFormat::None,
                        _ => return Err(bad(k, v)),
                    }
                }
                _ => return Err(VnsError::Config(format!("unknown key {k}"))),
            }
        }
        cfg.particle_sampling = match sampling.as_str() {
            "lattice" => Sampling::Lattice { per_axis_x: lattice.0, per_axis_v: lattice.1 },
            "random" => Sampling::Random { seed: cfg.seed },
            other => return Err(bad("particle_sampling", other)),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
            .unwrap_or_else(|| ((self.n - 1) / 3) as f64 * 2.0 * std::f64::consts::PI / self.length)
    }

    pub fn center(&self) -> [f64; 3] {
        [self.length / 2.0; 3]
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(VnsError::Config(m));
        if !(2..=3).contains(&self.dim) {
            return err(format!("dim must be 2 or 3, got {}", self.dim));
        }
        if self.n < 8 || self.n % 2 != 0 {
            return err(format!("N must be even and at least 8, got {}", self.n));
        }
        for (name, v) in [
            ("length", self.length),
            ("dt", self.dt),
            ("velocity_width", self.velocity_width),
            ("particle_mass", self.particle_mass),
            ("particle_x_width", self.particle_x_width),
            ("particle_x_radius", self.particle_x_radius),
            ("particle_v_temp", self.particle_v_temp),
            ("particle_v_radius", self.particle_v_radius),
            ("lipschitz_delta", self.lipschitz_delta),
            ("heat_width", self.heat_width),
            ("picard_constant", self.picard_constant),
            ("picard_tol", self.picard_tol),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return err(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.t_end >= 0.0) {
            return err(format!("t_end must be >= 0, got {}", self.t_end));
        }
        if !(self.velocity_amplitude >= 0.0) {
            return err("velocity_amplitude must be >= 0".into());
        }
        if self.record_every == 0 {
            return err("record_every must be positive".into());
        }
        if let Some(c) = self.cutoff {
            let max = std::f64::consts::PI * self.n as f64 / self.length;
            if !(c > 0.0) || c > max {
                return err(format!("cutoff must lie in (0, πN/L = {max}], got {c}"));
            }
        }
        if self.moment_q <= self.dim as f64 {
            return err(format!("moment_q must exceed d, got {}", self.moment_q));
        }
        if !(self.loglip_eta > 0.0 && self.loglip_eta < 0.5) {
            return err(format!("loglip_eta must lie in (0, 1/2), got {}", self.loglip_eta));
        }
        if self.velocity_mode == 0 || self.velocity_band == 0 {
            return err("velocity_mode and velocity_band must be positive".into());
        }
        if !["none", "maxwellian_gaussian", "maxwellian_uniform", "bump", "two_beam"].contains(&self.particle_profile.as_str()) {
            return err(format!("unknown particle_profile {}", self.particle_profile));
        }
        Ok(())
    }

    /// The analytic initial distribution, or `None` for `f₀ ≡ 0`.
    pub fn profile(&self) -> Result<Option<Profile>> {
        let center = self.particle_x_center.unwrap_or(self.center());
        let gauss = Spatial::Gaussian { center, width: self.particle_x_width };
        let (spatial, velocity) = match self.particle_profile.as_str() {
            "none" => return Ok(None),
            "maxwellian_gaussian" => (
                gauss,
                Velocity::Maxwellian { temp: self.particle_v_temp, drift: self.particle_v_drift },
            ),
            "maxwellian_uniform" => (
                Spatial::Uniform,
                Velocity::Maxwellian { temp: self.particle_v_temp, drift: self.particle_v_drift },
            ),
            "two_beam" => (gauss, Velocity::TwoBeam { temp: self.particle_v_temp, beam: self.particle_beam }),
            "bump" => (
                Spatial::Bump { center, radius: self.particle_x_radius },
                Velocity::Bump { radius: self.particle_v_radius, drift: self.particle_v_drift },
            ),
            other => return Err(VnsError::Config(format!("unknown particle_profile {other}"))),
        };
        Profile::new(&self.particle_profile, self.dim, self.length, self.particle_mass, spatial, velocity).map(Some)
    }
}
