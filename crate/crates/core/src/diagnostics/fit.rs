use serde::Serialize;

use crate::error::{Result, VnsError};

/// Minimum number of samples inside a fit window.
pub const MIN_FIT_SAMPLES: usize = 10;

/// Power law `y ≈ A tᵖ` fitted in log–log coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub exponent: f64,
    /// Standard error of the slope from the regression residuals.
    pub stderr: f64,
    pub log_prefactor: f64,
    pub samples: usize,
    pub window: (f64, f64),
}

impl DecayFit {
    pub fn prefactor(&self) -> f64 {
        self.log_prefactor.exp()
    }
}

/// Least-squares slope of `log y` against `log t` over `a ≤ t ≤ b`.
pub fn decay_fit(t: &[f64], y: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    if t.len() != y.len() {
        return Err(VnsError::Fit("time and value series differ in length".into()));
    }
    let (a, b) = window;
    if !(a > 0.0 && b > a) {
        return Err(VnsError::Fit(format!("bad window {a}:{b}")));
    }
    let mut pts = Vec::new();
    for (&ti, &yi) in t.iter().zip(y) {
        if ti < a || ti > b {
            continue;
        }
        if !(yi > 0.0) || !yi.is_finite() {
            return Err(VnsError::Fit(format!("nonpositive value {yi} at t = {ti}")));
        }
        pts.push((ti.ln(), yi.ln()));
    }
    let n = pts.len();
    if n < MIN_FIT_SAMPLES {
        return Err(VnsError::Fit(format!(
            "{n} samples in window {a}:{b}, need at least {MIN_FIT_SAMPLES}"
        )));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
    Ok(DecayFit {
        exponent: slope,
        stderr: (ssr / (nf - 2.0) / sxx).sqrt(),
        log_prefactor: icpt,
        samples: n,
        window,
    })
}

/// Parses `a:b`.
pub fn parse_window(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| VnsError::Usage(format!("window must look like a:b, got {s}")))?;
    let p = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|_| VnsError::Usage(format!("bad window bound {x}")))
    };
    Ok((p(a)?, p(b)?))
}
