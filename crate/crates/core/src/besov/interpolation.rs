use super::dyadic::{besov_norm, dyadic_decompose};
use crate::error::{Result, VnsError};
use crate::spectral::{hdot_norm, SpectralField};

/// Exponent in `‖∇u‖ ≲ ‖∇²u‖^θ ‖u‖_{Ḃ^{−σ}_{2,∞}}^{1−θ}`.
pub fn theta_gradient(sigma: f64) -> f64 {
    (sigma + 1.0) / (sigma + 2.0)
}

/// Exponent in `‖u‖ ≲ ‖∇u‖^θ ‖u‖_{Ḃ^{−σ}_{2,∞}}^{1−θ}`.
pub fn theta_l2(sigma: f64) -> f64 {
    sigma / (sigma + 1.0)
}

/// Algebraic decay rate `θ/(1−θ)` produced by a Nash–Lyapunov argument.
pub fn decay_exponent(theta: f64) -> f64 {
    theta / (1.0 - theta)
}

/// Interpolation ratios of one field; bounded ratios across a family
/// mean the inequalities hold with a uniform constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterpolationReport {
    pub sigma: f64,
    /// `‖∇u‖ / (‖∇²u‖^θ ‖u‖_{Ḃ^{−σ}}^{1−θ})`, θ = (σ+1)/(σ+2).
    pub gradient_ratio: f64,
    /// `‖u‖ / (‖∇u‖^θ ‖u‖_{Ḃ^{−σ}}^{1−θ})`, θ = σ/(σ+1).
    pub l2_ratio: f64,
    pub besov_neg: f64,
}

pub fn interpolation_check(z: &SpectralField, sigma: f64) -> Result<InterpolationReport> {
    if !(sigma > 0.0) {
        return Err(VnsError::Usage(format!("sigma must be positive, got {sigma}")));
    }
    let spec = dyadic_decompose(z)?;
    let b = besov_norm(&spec, -sigma, f64::INFINITY)?;
    let l2 = z.norm_l2();
    let h1 = hdot_norm(z, 1.0);
    let h2 = hdot_norm(z, 2.0);
    if b == 0.0 || l2 == 0.0 {
        return Err(VnsError::UndefinedRatio("interpolation ratio of the zero field".into()));
    }
    let tg = theta_gradient(sigma);
    let tl = theta_l2(sigma);
    Ok(InterpolationReport {
        sigma,
        gradient_ratio: h1 / (h2.powf(tg) * b.powf(1.0 - tg)),
        l2_ratio: l2 / (h1.powf(tl) * b.powf(1.0 - tl)),
        besov_neg: b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn exponents() {
        assert!((theta_gradient(1.5) - 5.0 / 7.0).abs() < 1e-15);
        assert!((decay_exponent(theta_gradient(1.5)) - 2.5).abs() < 1e-12);
        assert!((theta_l2(1.5) - 0.6).abs() < 1e-15);
        assert!((decay_exponent(0.6) - 1.5).abs() < 1e-12);
        assert!((decay_exponent(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_mode_closed_form() {
        // one mode at |k| = 4 sits in shell j = 2
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let z = SpectralField::from_fn(&g, 1, |x, _| (4.0 * x[1]).cos());
        let a = z.norm_l2();
        let sigma = 1.5;
        let r = interpolation_check(&z, sigma).unwrap();
        let b = 2f64.powf(-2.0 * sigma) * a;
        let tg = theta_gradient(sigma);
        let expect = 4.0 * a / ((16.0 * a).powf(tg) * b.powf(1.0 - tg));
        assert!((r.gradient_ratio - expect).abs() < 1e-12 * expect);
        let tl = theta_l2(sigma);
        let expect = a / ((4.0 * a).powf(tl) * b.powf(1.0 - tl));
        assert!((r.l2_ratio - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn zero_field_is_undefined() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let z = SpectralField::zeros_scalar(&g);
        assert!(matches!(interpolation_check(&z, 1.0), Err(VnsError::UndefinedRatio(_))));
    }
}
