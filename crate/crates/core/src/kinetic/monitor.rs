use serde::Serialize;

use super::deposit::MomentFields;
use super::ensemble::ParticleEnsemble;
use crate::error::Result;

/// Slack on node-measured maxima, which are kernel-smoothed.
pub const MONITOR_SLACK: f64 = 1.05;

/// Default smallness threshold on `∫‖∇u‖_∞`.
pub const DEFAULT_LIPSCHITZ_DELTA: f64 = 0.1;

/// Default velocity weight exponent for the `N_q` bounds.
pub const DEFAULT_Q: f64 = 6.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Check {
    pub value: f64,
    pub bound: f64,
    pub verdict: Verdict,
}

impl Check {
    fn against(value: f64, bound: f64) -> Self {
        let verdict = if value <= bound * MONITOR_SLACK { Verdict::Pass } else { Verdict::Fail };
        Check { value, bound, verdict }
    }

    fn skipped(value: f64) -> Self {
        Check { value, bound: f64::NAN, verdict: Verdict::NotApplicable }
    }

    /// Bound divided by value; `∞` when the value is zero.
    pub fn margin(&self) -> f64 {
        if self.value == 0.0 { f64::INFINITY } else { self.bound / self.value }
    }
}

/// Time integrals accumulated along a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Budgets {
    /// `∫₀ᵗ‖∇u‖_∞`.
    pub lipschitz: f64,
    /// `∫₀ᵗ‖u‖_∞`.
    pub u_linf: f64,
    /// `∫₀ᵗ e^{s−t}‖u(s)‖_∞ ds`.
    pub u_linf_damped: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub t: f64,
    pub delta: f64,
    pub q: f64,
    /// `‖ρ‖_∞ ≤ 2‖f₀‖_{L¹_v L^∞_x}`, only while the Lipschitz budget is below δ.
    pub density_factor_two: Check,
    /// `m₂ ≤ 4e^{−2t}‖|v|²f₀‖ + 4(∫e^{s−t}‖u‖_∞)²‖f₀‖`, same guard.
    pub energy_density: Check,
    pub rho_nq: Check,
    pub j_nq: Check,
    pub m2_nq: Check,
}

impl MomentReport {
    pub fn checks(&self) -> [(&'static str, &Check); 5] {
        [
            ("density_factor_two", &self.density_factor_two),
            ("energy_density", &self.energy_density),
            ("rho_nq", &self.rho_nq),
            ("j_nq", &self.j_nq),
            ("m2_nq", &self.m2_nq),
        ]
    }

    pub fn all_pass(&self) -> bool {
        self.checks().iter().all(|(_, c)| c.verdict != Verdict::Fail)
    }
}

/// Compares measured moments with the a priori bounds. Reports, never aborts.
pub fn moment_bound_monitor(
    moments: &MomentFields,
    ens: &ParticleEnsemble,
    budgets: &Budgets,
    t: f64,
    delta: f64,
    q: f64,
) -> Result<MomentReport> {
    let rho = moments.rho_max();
    let j = moments.j_max();
    let m2 = moments.m2_max();
    let Some(p) = ens.profile() else {
        return Ok(MomentReport {
            t,
            delta,
            q,
            density_factor_two: Check::skipped(rho),
            energy_density: Check::skipped(m2),
            rho_nq: Check::skipped(rho),
            j_nq: Check::skipped(j),
            m2_nq: Check::skipped(m2),
        });
    };
    let small = budgets.lipschitz <= delta;
    let f0 = p.l1v_linfx();
    let density_factor_two = if small { Check::against(rho, 2.0 * f0) } else { Check::skipped(rho) };
    let energy_density = if small {
        let bound = 4.0 * (-2.0 * t).exp() * p.v2_l1v_linfx() + 4.0 * budgets.u_linf_damped.powi(2) * f0;
        Check::against(m2, bound)
    } else {
        Check::skipped(m2)
    };
    Ok(MomentReport {
        t,
        delta,
        q,
        density_factor_two,
        energy_density,
        rho_nq: Check::against(rho, p.moment_bound(q, t, budgets.u_linf)?),
        j_nq: Check::against(j, p.moment_bound(q + 1.0, t, budgets.u_linf)?),
        m2_nq: Check::against(m2, p.moment_bound(q + 2.0, t, budgets.u_linf)?),
    })
}
