use std::io::{Read, Write};

use serde::Serialize;

use super::loglip::{loglip_norm, DEFAULT_ETA};
use super::monokinetic::monokinetic_metrics;
use crate::besov::field_besov_norm;
use crate::error::{Result, VnsError};
use crate::fluid::FluidState;
use crate::kinetic::{MomentFields, ParticleEnsemble};
use crate::spectral::{grad_linf, hdot_norm, linf, SpectralField};

/// Monitored functionals at one time.
///
/// The first eighteen fields form the required CSV columns; the rest are
/// extra columns appended after them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
    /// `∫₀ᵗ D₀`.
    pub int_d0: f64,
    /// Lipschitz budget `∫₀ᵗ‖∇u‖_∞`.
    pub lipschitz: f64,
    pub u_besov_m3_2: f64,
    pub u_besov_m1_2: f64,
    pub u_h1_2: f64,
    pub rho_linf: f64,
    pub j_linf: f64,
    pub m2_linf: f64,
    pub w1_bound: f64,
    pub j_minus_rho_u_l1: f64,
    pub u_loglip: f64,
    // extra columns
    /// `2(2 + C𝔣₀)(tE₁ + 2E₀) + 25R₀E₁ + tE₂`.
    pub script_e: f64,
    /// `2(1 + C𝔣₀)D₀ + 2tD₁ + R₀D₁ + tD₂`.
    pub script_d: f64,
    /// `‖u‖_{Ḃ^{−d/2}_{2,∞}}`, the low-frequency functional in any dimension.
    pub u_besov_neg_half_d: f64,
    /// `√(M₀ Σwᵢ|Vᵢ − u(Xᵢ)|²)`.
    pub cs_bound: f64,
    /// `Σwᵢ|Vᵢ − u(Xᵢ)|²`.
    pub kinetic_relative: f64,
    /// `‖∇²u‖² + Σwᵢ|Vᵢ − u(Xᵢ)|²`, the dissipation paired with `E₁`.
    pub d1_core: f64,
    pub mass: f64,
    pub u_linf: f64,
    pub u_grad_linf: f64,
}

pub const REQUIRED_COLUMNS: [&str; 18] = [
    "t",
    "E0",
    "E1",
    "E2",
    "D0",
    "D1",
    "D2",
    "int_D0",
    "B",
    "u_besov_m3_2",
    "u_besov_m1_2",
    "u_h1_2",
    "rho_linf",
    "j_linf",
    "m2_linf",
    "w1_bound",
    "j_minus_rho_u_l1",
    "u_loglip",
];

pub const EXTRA_COLUMNS: [&str; 9] = [
    "script_E",
    "script_D",
    "u_besov_neg_half_d",
    "cs_bound",
    "kinetic_relative",
    "D1_core",
    "mass",
    "u_linf",
    "u_grad_linf",
];

impl EnergyRecord {
    pub fn columns() -> impl Iterator<Item = &'static str> {
        REQUIRED_COLUMNS.iter().chain(EXTRA_COLUMNS.iter()).copied()
    }

    pub fn values(&self) -> [f64; 27] {
        [
            self.t,
            self.e0,
            self.e1,
            self.e2,
            self.d0,
            self.d1,
            self.d2,
            self.int_d0,
            self.lipschitz,
            self.u_besov_m3_2,
            self.u_besov_m1_2,
            self.u_h1_2,
            self.rho_linf,
            self.j_linf,
            self.m2_linf,
            self.w1_bound,
            self.j_minus_rho_u_l1,
            self.u_loglip,
            self.script_e,
            self.script_d,
            self.u_besov_neg_half_d,
            self.cs_bound,
            self.kinetic_relative,
            self.d1_core,
            self.mass,
            self.u_linf,
            self.u_grad_linf,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// Quantities a record needs beyond the instantaneous state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecordContext {
    pub int_d0: f64,
    pub lipschitz: f64,
    /// `R₀ = max(1, 2‖f₀‖_{L¹_v L^∞_x})`.
    pub r0: f64,
    /// `C𝔣₀`, a user constant since `C` is unquantified.
    pub c_frak: f64,
    pub eta: f64,
}

impl Default for RecordContext {
    fn default() -> Self {
        RecordContext {
            int_d0: 0.0,
            lipschitz: 0.0,
            r0: 1.0,
            c_frak: 0.0,
            eta: DEFAULT_ETA,
        }
    }
}

/// Evaluates every monitored functional. Kinetic integrals are particle sums.
pub fn energy_functionals(
    state: &FluidState,
    u_t: Option<&SpectralField>,
    pressure: &SpectralField,
    moments: &MomentFields,
    ens: &ParticleEnsemble,
    ctx: &RecordContext,
) -> Result<EnergyRecord> {
    let u_t = u_t.ok_or_else(|| VnsError::Internal("u_t was not evaluated for this record".into()))?;
    let u = &state.u;
    let g = u.grid();
    let d = g.dim() as f64;
    let t = state.t;
    let mono = monokinetic_metrics(ens, u)?;
    let kin = mono.kinetic_relative;
    let grad2 = hdot_norm(u, 1.0).powi(2);
    let hess2 = hdot_norm(u, 2.0).powi(2);
    let ut2 = u_t.norm_l2_sq();
    let e0 = 0.5 * u.norm_l2_sq() + 0.5 * ens.kinetic_moment();
    let e1 = grad2 + kin;
    let e2 = ut2 + kin;
    let d0 = e1;
    let d1 = 0.5 * ut2 + 0.5 * kin + (hess2 + hdot_norm(pressure, 1.0).powi(2)) / (24.0 * ctx.r0);
    let ut_phys = u_t.to_physical();
    let rho_ut2: f64 = moments
        .rho_nodes()
        .iter()
        .enumerate()
        .map(|(p, r)| r * ut_phys.iter().map(|c| c[p] * c[p]).sum::<f64>())
        .sum::<f64>()
        * g.cell_volume();
    let d2 = hdot_norm(u_t, 1.0).powi(2) + rho_ut2;
    let zero = u.norm_l2() == 0.0;
    let besov = |s: f64| if zero { Ok(0.0) } else { field_besov_norm(u, s, f64::INFINITY) };
    let cf = ctx.c_frak;
    Ok(EnergyRecord {
        t,
        e0,
        e1,
        e2,
        d0,
        d1,
        d2,
        int_d0: ctx.int_d0,
        lipschitz: ctx.lipschitz,
        u_besov_m3_2: besov(-1.5)?,
        u_besov_m1_2: besov(-0.5)?,
        u_h1_2: hdot_norm(u, 0.5),
        rho_linf: moments.rho_max(),
        j_linf: moments.j_max(),
        m2_linf: moments.m2_max(),
        w1_bound: mono.w1_bound,
        j_minus_rho_u_l1: mono.j_minus_rho_u_l1,
        u_loglip: loglip_norm(u, ctx.eta)?,
        script_e: 2.0 * (2.0 + cf) * (t * e1 + 2.0 * e0) + 25.0 * ctx.r0 * e1 + t * e2,
        script_d: 2.0 * (1.0 + cf) * d0 + 2.0 * t * d1 + ctx.r0 * d1 + t * d2,
        u_besov_neg_half_d: besov(-d / 2.0)?,
        cs_bound: mono.cs_bound,
        kinetic_relative: kin,
        d1_core: hess2 + kin,
        mass: ens.total_mass(),
        u_linf: linf(u),
        u_grad_linf: grad_linf(u),
    })
}

/// `{:.16e}`: seventeen significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_records_csv<W: Write>(w: W, records: &[EnergyRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(EnergyRecord::columns())?;
    for r in records {
        out.write_record(r.values().iter().map(|v| format_value(*v)))?;
    }
    out.flush()?;
    Ok(())
}

/// A numeric CSV table: header plus rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| VnsError::Data(format!("no column named {name}")))?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn read_series_csv<R: Read>(r: R) -> Result<Series> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| VnsError::Data(format!("not a number: {s}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Series { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluid::{pressure_solve, rhs_with, FluidParams, Forcing};
    use crate::kinetic::{deposit, sample_initial, Profile, Sampling, Spatial, Velocity};
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn fluid_only_functionals() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let params = FluidParams::new(&g);
        let u = SpectralField::from_fn(&g, 2, |x, c| if c == 0 { x[0].sin() * x[1].cos() } else { -x[0].cos() * x[1].sin() });
        let state = FluidState::new(&u, &params).unwrap();
        let ens = ParticleEnsemble::empty(2, g.length());
        let m = deposit(&ens, &state.u).unwrap();
        let ut = rhs_with(&state.u, &Forcing::None, &params).unwrap();
        let p = pressure_solve(&state.u, &Forcing::None, &params).unwrap();
        let r = energy_functionals(&state, Some(&ut), &p, &m, &ens, &RecordContext::default()).unwrap();
        let l2 = state.u.norm_l2_sq();
        assert!((r.e0 - 0.5 * l2).abs() < 1e-12 * l2);
        assert!((r.e1 - 2.0 * l2).abs() < 1e-12 * l2);
        assert!((r.e2 - 4.0 * l2).abs() < 1e-12 * l2);
        assert_eq!(r.e1, r.d0);
        assert!(energy_functionals(&state, None, &p, &m, &ens, &RecordContext::default()).is_err());
    }

    #[test]
    fn maxwellian_at_rest() {
        let g = Grid::new(2, 16, 20.0).unwrap();
        let prof = Profile::new(
            "maxwellian_gaussian",
            2,
            20.0,
            1.0,
            Spatial::Gaussian { center: [10.0, 10.0, 0.0], width: 2.0 },
            Velocity::Maxwellian { temp: 0.7, drift: [0.0; 3] },
        )
        .unwrap();
        let ens = sample_initial(&prof, 4096, &Sampling::Lattice { per_axis_x: None, per_axis_v: None }).unwrap();
        let u = SpectralField::zeros_vector(&g);
        let state = FluidState { u: u.clone(), t: 0.0 };
        let m = deposit(&ens, &u).unwrap();
        let r = energy_functionals(&state, Some(&u), &SpectralField::zeros_scalar(&g), &m, &ens, &RecordContext::default()).unwrap();
        assert!((r.e0 - 0.5 * prof.kinetic_energy_moment()).abs() < 1e-10);
        assert!(r.w1_bound <= r.cs_bound);
    }

    #[test]
    fn csv_round_trip_keeps_every_bit() {
        let mut r = EnergyRecord { t: 0.1, e0: 1.0 / 3.0, e1: 2e-300, ..Default::default() };
        r.u_loglip = std::f64::consts::E;
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &[r]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,E0,E1,E2,D0,D1,D2,int_D0,B,"));
        let s = read_series_csv(buf.as_slice()).unwrap();
        assert_eq!(s.rows[0].as_slice(), r.values().as_slice());
        assert_eq!(s.column("u_loglip").unwrap(), vec![std::f64::consts::E]);
    }
}
