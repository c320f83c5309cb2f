use serde::Serialize;

use crate::error::{Result, VnsError};

/// Relative slack when comparing sampled data with the envelope.
pub const ENVELOPE_SLACK: f64 = 1e-3;

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(VnsError::Usage(format!("theta must lie in (0, 1), got {theta}")))
    }
}

/// `c₀ = C^{−1/θ} 𝓝^{1−1/θ}`.
pub fn lyapunov_rate(n0: f64, theta: f64, c: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(c.powf(-1.0 / theta) * n0.powf(1.0 - 1.0 / theta))
}

/// `𝓛₀(1 + ((1−θ)/θ) c₀ 𝓛₀^{(1−θ)/θ} t)^{−θ/(1−θ)}`, the solution of
/// `𝓛' = −c₀𝓛^{1/θ}` from `𝓛₀`.
pub fn lyapunov_envelope(l0: f64, n0: f64, theta: f64, c: f64, t: f64) -> Result<f64> {
    let c0 = lyapunov_rate(n0, theta, c)?;
    if !(l0 >= 0.0 && n0 > 0.0 && c > 0.0) {
        return Err(VnsError::Usage("envelope needs L₀ ≥ 0 and positive N, C".into()));
    }
    let a = (1.0 - theta) / theta;
    Ok(l0 * (1.0 + a * c0 * l0.powf(a) * t).powf(-1.0 / a))
}

/// One sampled triple `(t, 𝓛, 𝓗, 𝓝)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LyapunovSample {
    pub t: f64,
    pub l: f64,
    pub h: f64,
    pub n: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovVerdict {
    pub theta: f64,
    /// `𝓛/(𝓗^θ 𝓝^{1−θ})` per sample.
    pub ratios: Vec<f64>,
    pub c_emp: f64,
    pub n_max: f64,
    /// Every sample lies under the envelope built from `(𝓛₀, 𝓝_max, θ, C_emp)`.
    pub envelope_holds: bool,
    pub worst_excess: f64,
    /// Some `𝓝(t)` exceeded `1.1 𝓝(0)`.
    pub n_growth_flag: bool,
}

/// Nash–Lyapunov check on a sampled trajectory.
pub fn lyapunov_check(samples: &[LyapunovSample], theta: f64) -> Result<LyapunovVerdict> {
    check_theta(theta)?;
    let first = samples
        .first()
        .ok_or_else(|| VnsError::Usage("no Lyapunov samples".into()))?;
    for s in samples {
        if !(s.l >= 0.0 && s.h >= 0.0 && s.n >= 0.0) {
            return Err(VnsError::Data(format!("negative or non-finite functional at t = {}", s.t)));
        }
    }
    let ratios: Vec<f64> = samples
        .iter()
        .map(|s| {
            if s.l == 0.0 {
                0.0
            } else {
                s.l / (s.h.powf(theta) * s.n.powf(1.0 - theta))
            }
        })
        .collect();
    let c_emp = ratios.iter().copied().fold(0.0, f64::max);
    let n_max = samples.iter().map(|s| s.n).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    if c_emp > 0.0 && c_emp.is_finite() && n_max > 0.0 {
        for s in samples {
            let env = lyapunov_envelope(first.l, n_max, theta, c_emp, s.t - first.t)?;
            worst = worst.max(s.l / env - 1.0);
        }
    }
    Ok(LyapunovVerdict {
        theta,
        c_emp,
        n_max,
        envelope_holds: worst <= ENVELOPE_SLACK && c_emp.is_finite(),
        worst_excess: worst,
        n_growth_flag: samples.iter().any(|s| s.n > 1.1 * first.n),
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_shape() {
        for theta in [0.5, 0.6, 5.0 / 7.0] {
            assert_eq!(lyapunov_envelope(2.0, 1.0, theta, 1.0, 0.0).unwrap(), 2.0);
            let a = lyapunov_envelope(2.0, 1.0, theta, 1.0, 1e8).unwrap();
            let b = lyapunov_envelope(2.0, 1.0, theta, 1.0, 2e8).unwrap();
            let slope = (b / a).log2();
            assert!((slope + theta / (1.0 - theta)).abs() < 1e-6);
        }
        assert!(lyapunov_envelope(1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn saturated_triple_passes_with_unit_constant() {
        let theta = 0.6;
        let n = 1.5;
        let c0 = lyapunov_rate(n, theta, 1.0).unwrap();
        // 𝓗 = −𝓛' and 𝓛 = 𝓗^θ 𝓝^{1−θ} exactly on the envelope
        let samples: Vec<LyapunovSample> = (0..50)
            .map(|i| {
                let t = 0.2 * i as f64;
                let l = lyapunov_envelope(3.0, n, theta, 1.0, t).unwrap();
                LyapunovSample { t, l, h: c0 * l.powf(1.0 / theta), n }
            })
            .collect();
        let v = lyapunov_check(&samples, theta).unwrap();
        assert!((v.c_emp - 1.0).abs() < 1e-12);
        assert!(v.envelope_holds && !v.n_growth_flag);
    }

    #[test]
    fn sign_violation_is_data_error() {
        let s = [LyapunovSample { t: 0.0, l: -1.0, h: 1.0, n: 1.0 }];
        assert!(matches!(lyapunov_check(&s, 0.5), Err(VnsError::Data(_))));
    }
}
