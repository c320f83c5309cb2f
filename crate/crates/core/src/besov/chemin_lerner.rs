use super::dyadic::{ell_r, besov_norm, DyadicSpectrum, Summation};
use crate::error::{Result, VnsError};

/// Trapezoid weights for `m` uniform samples with spacing `dt`.
fn trapezoid_weights(m: usize, dt: f64) -> Vec<f64> {
    let mut w = vec![dt; m];
    if m == 1 {
        w[0] = 0.0;
    } else {
        w[0] = 0.5 * dt;
        w[m - 1] = 0.5 * dt;
    }
    w
}

/// `L^ρ` norm in time of uniformly sampled non-negative values (trapezoid rule).
pub fn time_norm(values: &[f64], dt: f64, rho: f64) -> f64 {
    if rho.is_infinite() {
        return values.iter().copied().fold(0.0, f64::max);
    }
    let w = trapezoid_weights(values.len(), dt);
    let s: f64 = values.iter().zip(&w).map(|(v, w)| w * v.powf(rho)).sum();
    s.powf(1.0 / rho)
}

fn validate(series: &[DyadicSpectrum], dt: f64, rho: f64) -> Result<()> {
    if series.is_empty() {
        return Err(VnsError::Usage("empty time series".into()));
    }
    if !(dt > 0.0) {
        return Err(VnsError::Usage(format!("time step must be positive, got {dt}")));
    }
    if !(rho >= 1.0) {
        return Err(VnsError::Usage(format!("time exponent must be >= 1, got {rho}")));
    }
    let j0 = series[0].j_min;
    let len = series[0].shells.len();
    if series.iter().any(|s| s.j_min != j0 || s.shells.len() != len) {
        return Err(VnsError::Usage("series mixes different shell ranges".into()));
    }
    Ok(())
}

/// Chemin–Lerner norm `‖2^{js}‖Δ_j a‖_{L^ρ_T(L²)}‖_{ℓ^r}` (time norm inside the sum).
pub fn chemin_lerner_norm(series: &[DyadicSpectrum], dt: f64, rho: f64, s: f64, r: f64) -> Result<f64> {
    validate(series, dt, rho)?;
    let r = Summation::from_exponent(r)?.exponent();
    let first = &series[0];
    let per_shell = first.iter().enumerate().map(|(i, (j, _))| {
        let column: Vec<f64> = series.iter().map(|sp| sp.shells[i]).collect();
        2f64.powf(j as f64 * s) * time_norm(&column, dt, rho)
    });
    Ok(ell_r(per_shell, r))
}

/// Ordinary Bochner norm `‖‖a(t)‖_{Ḃ^s_{2,r}}‖_{L^ρ_T}` (time norm outside).
pub fn bochner_norm(series: &[DyadicSpectrum], dt: f64, rho: f64, s: f64, r: f64) -> Result<f64> {
    validate(series, dt, rho)?;
    let values = series
        .iter()
        .map(|sp| besov_norm(sp, s, r))
        .collect::<Result<Vec<f64>>>()?;
    Ok(time_norm(&values, dt, rho))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(j_min: i32, shells: Vec<f64>) -> DyadicSpectrum {
        DyadicSpectrum { j_min, shells }
    }

    #[test]
    fn constant_series_sup_matches_static() {
        let a = spec(-1, vec![0.3, 1.0, 0.2]);
        let series = vec![a.clone(); 5];
        let cl = chemin_lerner_norm(&series, 0.1, f64::INFINITY, 0.5, 1.0).unwrap();
        let st = besov_norm(&a, 0.5, 1.0).unwrap();
        assert!((cl - st).abs() < 1e-14);
    }

    #[test]
    fn single_step_single_shell() {
        let series = vec![spec(2, vec![3.0]); 2];
        let dt = 0.25;
        for rho in [1.0, 2.0, 4.0] {
            let v = chemin_lerner_norm(&series, dt, rho, 1.5, 2.0).unwrap();
            let expect = 2f64.powf(3.0) * 3.0 * dt.powf(1.0 / rho);
            assert!((v - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn minkowski_ordering() {
        let series: Vec<DyadicSpectrum> = (0..7)
            .map(|m| spec(0, (0..4).map(|j| ((m * 3 + j * 5) % 7) as f64 + 0.1).collect()))
            .collect();
        let dt = 0.3;
        for (rho, r) in [(1.0, f64::INFINITY), (2.0, f64::INFINITY), (f64::INFINITY, 1.0)] {
            let cl = chemin_lerner_norm(&series, dt, rho, 0.7, r).unwrap();
            let bo = bochner_norm(&series, dt, rho, 0.7, r).unwrap();
            if r >= rho {
                assert!(cl <= bo * (1.0 + 1e-14));
            } else {
                assert!(cl >= bo * (1.0 - 1e-14));
            }
        }
        assert!(chemin_lerner_norm(&[], dt, 1.0, 0.0, 1.0).is_err());
    }
}
