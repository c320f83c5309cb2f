use num_complex::Complex64;

use super::field::SpectralField;
use crate::error::{Result, VnsError};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Differential operator applied by [`derive`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivative {
    /// `c` components in, `c·d` out; entry `c·d + a` is `∂_a z_c`.
    Grad,
    /// Vector in, scalar out.
    Div,
    Laplacian,
    /// `c` components in, `c·d·d` out; entry `(c·d + a)·d + b` is `∂_a∂_b z_c`.
    Hessian,
}

/// Leray projector `û ↦ (I − kkᵀ/|k|²)û`.
///
/// The zero mode passes through. Nyquist modes are dropped since their
/// projection cannot be made Hermitian-consistent.
pub fn leray_project(z: &SpectralField) -> Result<SpectralField> {
    if !z.is_vector() {
        return Err(VnsError::Usage(format!(
            "Leray projection needs a {}-component field, got {}",
            z.grid().dim(),
            z.n_comps()
        )));
    }
    let g = z.grid().clone();
    let d = g.dim();
    let mut out = z.clone();
    let comps = out.components_mut();
    for p in 0..g.len() {
        if g.is_nyquist(p) {
            for c in comps.iter_mut() {
                c[p] = ZERO;
            }
            continue;
        }
        let ksq = g.index_sq(p);
        if ksq == 0 {
            continue;
        }
        let k = g.wave_vector_index(p);
        let mut dot = ZERO;
        for a in 0..d {
            dot += comps[a][p] * k[a] as f64;
        }
        let s = dot / ksq as f64;
        for a in 0..d {
            comps[a][p] -= s * k[a] as f64;
        }
    }
    out.set_solenoidal(true);
    Ok(out)
}

/// Friedrichs projector `J_n = P 1_{|k| ≤ n}`.
pub fn friedrichs_project(z: &SpectralField, n: f64) -> Result<SpectralField> {
    if !(n > 0.0) {
        return Err(VnsError::Usage(format!("cutoff must be positive, got {n}")));
    }
    let mut out = leray_project(z)?;
    truncate_ball(&mut out, n);
    out.set_solenoidal(true);
    Ok(out)
}

/// Zeros every mode with `|k| > n`, keeping the solenoidal flag.
pub fn truncate_ball(z: &mut SpectralField, n: f64) {
    let g = z.grid().clone();
    let cut = n * n;
    let flag = z.is_solenoidal();
    z.apply_multiplier(|p| if g.k_sq(p) > cut * (1.0 + 1e-12) { 0.0 } else { 1.0 });
    z.set_solenoidal(flag);
}

/// 2/3-rule mask: keeps modes with every `|n_a| ≤ (N−1)/3`.
pub fn dealias(z: &mut SpectralField) {
    let g = z.grid().clone();
    let flag = z.is_solenoidal();
    z.apply_multiplier(|p| if g.in_dealiased_band(p) { 1.0 } else { 0.0 });
    z.set_solenoidal(flag);
}

/// Exact spectral differentiation. Odd-order derivatives drop the Nyquist
/// mode along the differentiated axis so that real fields stay real.
pub fn derive(z: &SpectralField, op: Derivative) -> Result<SpectralField> {
    let g = z.grid().clone();
    let d = g.dim();
    let half = -((g.n() / 2) as i64);
    let ku = g.k_unit();
    let ik = |p: usize, a: usize| -> Complex64 {
        let w = g.wave_vector_index(p)[a];
        if w == half {
            ZERO
        } else {
            Complex64::new(0.0, w as f64 * ku)
        }
    };
    let kk = |p: usize, a: usize, b: usize| -> f64 {
        let w = g.wave_vector_index(p);
        -(w[a] as f64) * (w[b] as f64) * ku * ku
    };
    match op {
        Derivative::Grad => {
            let mut comps = Vec::with_capacity(z.n_comps() * d);
            for c in 0..z.n_comps() {
                for a in 0..d {
                    let src = z.comp(c);
                    comps.push((0..g.len()).map(|p| src[p] * ik(p, a)).collect());
                }
            }
            SpectralField::from_coefficients(&g, comps)
        }
        Derivative::Div => {
            if !z.is_vector() {
                return Err(VnsError::Usage("divergence needs a vector field".into()));
            }
            let mut out = vec![ZERO; g.len()];
            for a in 0..d {
                let src = z.comp(a);
                for p in 0..g.len() {
                    out[p] += src[p] * ik(p, a);
                }
            }
            SpectralField::from_coefficients(&g, vec![out])
        }
        Derivative::Laplacian => {
            let mut out = z.clone();
            out.apply_multiplier(|p| -g.k_sq(p));
            out.set_solenoidal(z.is_solenoidal());
            Ok(out)
        }
        Derivative::Hessian => {
            let mut comps = Vec::with_capacity(z.n_comps() * d * d);
            for c in 0..z.n_comps() {
                let src = z.comp(c);
                for a in 0..d {
                    for b in 0..d {
                        comps.push((0..g.len()).map(|p| src[p] * kk(p, a, b)).collect());
                    }
                }
            }
            SpectralField::from_coefficients(&g, comps)
        }
    }
}

/// Exact heat semigroup `e^{tΔ}`.
pub fn heat_propagate(z: &SpectralField, t: f64) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(VnsError::Usage(format!("heat time must be >= 0, got {t}")));
    }
    let g = z.grid().clone();
    let mut out = z.clone();
    out.apply_multiplier(|p| (-g.k_sq(p) * t).exp());
    out.set_solenoidal(z.is_solenoidal());
    Ok(out)
}

/// Basic norms of a field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    /// Parseval L² norm.
    pub l2: f64,
    /// Lᵖ norm by physical quadrature.
    pub lp: f64,
    /// Max of the pointwise magnitude over lattice samples (a lower bound of the sup).
    pub linf: f64,
    /// Max over samples of the Frobenius norm of the gradient.
    pub grad_linf: f64,
}

/// Pointwise Euclidean magnitude of a (possibly multi-component) field.
pub fn magnitude(z: &SpectralField) -> Vec<f64> {
    let phys = z.to_physical();
    let n = z.grid().len();
    (0..n)
        .map(|p| phys.iter().map(|c| c[p] * c[p]).sum::<f64>().sqrt())
        .collect()
}

pub fn linf(z: &SpectralField) -> f64 {
    magnitude(z).into_iter().fold(0.0, f64::max)
}

pub fn grad_linf(z: &SpectralField) -> f64 {
    linf(&derive(z, Derivative::Grad).expect("gradient is total"))
}

/// Lᵖ norm of the pointwise magnitude by lattice quadrature.
pub fn lp_norm(z: &SpectralField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(VnsError::Usage(format!("Lp exponent must be >= 1, got {p}")));
    }
    let mag = magnitude(z);
    if p.is_infinite() {
        return Ok(mag.into_iter().fold(0.0, f64::max));
    }
    let s: f64 = mag.iter().map(|m| m.powf(p)).sum();
    Ok((s * z.grid().cell_volume()).powf(1.0 / p))
}

pub fn norms(z: &SpectralField, p: f64) -> Result<Norms> {
    let lp = lp_norm(z, p)?;
    Ok(Norms {
        l2: z.norm_l2(),
        lp,
        linf: linf(z),
        grad_linf: grad_linf(z),
    })
}

/// Homogeneous Sobolev norm `‖|k|^s ẑ‖` over nonzero modes.
pub fn hdot_norm(z: &SpectralField, s: f64) -> f64 {
    let g = z.grid();
    let mut acc = 0.0;
    for p in 1..g.len() {
        let w = g.k_sq(p).powf(s);
        for c in z.components() {
            acc += w * c[p].norm_sqr();
        }
    }
    (acc * g.volume()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_band(g: &Grid, comps: usize, band: i64, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<Vec<f64>> = (0..comps)
            .map(|_| (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let mut z = SpectralField::from_physical(g, &samples).unwrap();
        let gg = g.clone();
        z.apply_multiplier(|p| {
            let w = gg.wave_vector_index(p);
            if w.iter().all(|x| x.abs() <= band) && p != 0 {
                1.0
            } else {
                0.0
            }
        });
        z
    }

    #[test]
    fn leray_kills_gradients_and_fixes_solenoidal() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let phi = random_band(&g, 1, 8, 3);
        let grad = derive(&phi, Derivative::Grad).unwrap();
        let p = leray_project(&grad).unwrap();
        assert!(p.norm_l2() < 1e-12 * grad.norm_l2());

        let v = random_band(&g, 2, 8, 4);
        let pv = leray_project(&v).unwrap();
        let ppv = leray_project(&pv).unwrap();
        assert!(ppv.sub(&pv).norm_l2() < 1e-12 * pv.norm_l2());
        assert!(pv.norm_l2() <= v.norm_l2());
        assert!(pv.divergence_defect() < 1e-12);
        let div = derive(&pv, Derivative::Div).unwrap();
        assert!(div.norm_l2() < 1e-12 * pv.norm_l2());
    }

    #[test]
    fn leray_rejects_scalar() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let z = SpectralField::zeros_scalar(&g);
        assert!(matches!(leray_project(&z), Err(VnsError::Usage(_))));
    }

    #[test]
    fn friedrichs_cuts_ball() {
        let g = Grid::new(3, 16, 2.0 * PI).unwrap();
        let v = random_band(&g, 3, 7, 5);
        let big = friedrichs_project(&v, 1e3).unwrap();
        let p = leray_project(&v).unwrap();
        assert!(big.sub(&p).norm_l2() == 0.0);
        let j = friedrichs_project(&v, 3.0).unwrap();
        for q in 0..g.len() {
            if g.k_sq(q) > 9.0 + 1e-9 {
                assert!(j.comp(0)[q].norm() == 0.0);
            }
        }
        assert!(friedrichs_project(&v, 0.0).is_err());
    }

    #[test]
    fn derivatives_of_single_mode() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let z = SpectralField::from_fn(&g, 1, |x, _| (2.0 * x[0] + x[1]).cos());
        let grad = derive(&z, Derivative::Grad).unwrap().to_physical();
        let lap = derive(&z, Derivative::Laplacian).unwrap().component_physical(0);
        for p in 0..g.len() {
            let x = g.position(p);
            let s = (2.0 * x[0] + x[1]).sin();
            assert!((grad[0][p] + 2.0 * s).abs() < 1e-12);
            assert!((grad[1][p] + s).abs() < 1e-12);
            assert!((lap[p] + 5.0 * (2.0 * x[0] + x[1]).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn div_grad_is_laplacian() {
        let g = Grid::new(3, 16, 3.0).unwrap();
        let phi = random_band(&g, 1, 5, 9);
        let a = derive(&derive(&phi, Derivative::Grad).unwrap(), Derivative::Div).unwrap();
        let b = derive(&phi, Derivative::Laplacian).unwrap();
        assert!(a.sub(&b).norm_l2() < 1e-12 * b.norm_l2());
        let h = derive(&phi, Derivative::Hessian).unwrap();
        let mut trace = h.component(0);
        trace.axpy(1.0, &h.component(4));
        trace.axpy(1.0, &h.component(8));
        assert!(trace.sub(&b).norm_l2() < 1e-12 * b.norm_l2());
    }

    #[test]
    fn heat_semigroup_and_commutation() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let v = random_band(&g, 2, 10, 11);
        let a = heat_propagate(&heat_propagate(&v, 0.01).unwrap(), 0.02).unwrap();
        let b = heat_propagate(&v, 0.03).unwrap();
        assert!(a.sub(&b).norm_l2() < 1e-12 * b.norm_l2());
        assert!(b.norm_l2() <= v.norm_l2());
        let c = leray_project(&heat_propagate(&v, 0.05).unwrap()).unwrap();
        let e = heat_propagate(&leray_project(&v).unwrap(), 0.05).unwrap();
        assert!(c.sub(&e).norm_l2() < 1e-12 * c.norm_l2());
        assert!(heat_propagate(&v, -1.0).is_err());
        assert!(heat_propagate(&v, 0.0).unwrap().sub(&v).norm_l2() == 0.0);
    }

    #[test]
    fn sine_norms() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let z = SpectralField::from_fn(&g, 1, |x, _| (x[0]).sin());
        let n = norms(&z, 4.0).unwrap();
        assert!((n.l2 - (g.volume() / 2.0).sqrt()).abs() < 1e-12);
        assert!((n.linf - 1.0).abs() < 1e-12);
        assert!((n.grad_linf - 1.0).abs() < 1e-12);
        assert!(norms(&z, 0.5).is_err());
        let l2q = lp_norm(&z, 2.0).unwrap();
        assert!((l2q - n.l2).abs() / n.l2 < 1e-10);
    }
}
