use super::ensemble::characteristic_step;
use super::sampler::VelocitySampler;
use crate::error::{Result, VnsError};

/// A phase-space seed `(x, v)` for a Jacobian probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: [f64; 3],
    pub v: [f64; 3],
}

/// One step of a velocity history: the frozen field and its duration.
pub type HistoryStep<'a> = (&'a dyn VelocitySampler, f64);

// sixth-order centred first derivative; the centre node has weight zero
const OFFSETS: [f64; 6] = [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0];
const WEIGHTS: [f64; 6] = [-1.0, 9.0, -45.0, 45.0, -9.0, 1.0];

fn flow(seed: &PhasePoint, history: &[HistoryStep<'_>], d: usize) -> [f64; 6] {
    let mut x = seed.x;
    let mut v = seed.v;
    for (u, dt) in history {
        characteristic_step(&mut x, &mut v, *u, *dt, d);
    }
    let mut out = [0.0; 6];
    out[..d].copy_from_slice(&x[..d]);
    out[d..2 * d].copy_from_slice(&v[..d]);
    out
}

/// Determinant of the finite-difference Jacobian of the discrete flow map
/// `(x, v) ↦ Z(t; x, v)` over `history`, one value per probe.
///
/// Positions are followed unwrapped, so a periodic field is sampled
/// consistently; a stencil wider than half the box is rejected.
pub fn flow_jacobian_probe(
    probes: &[PhasePoint],
    history: &[HistoryStep<'_>],
    dim: usize,
    box_length: f64,
    h: f64,
) -> Result<Vec<f64>> {
    if !(2..=3).contains(&dim) {
        return Err(VnsError::Usage(format!("dimension must be 2 or 3, got {dim}")));
    }
    if !(h > 0.0) || 3.0 * h >= box_length / 2.0 {
        return Err(VnsError::Internal(format!(
            "probe stencil of step {h} does not fit in the box"
        )));
    }
    let n = 2 * dim;
    probes
        .iter()
        .map(|seed| {
            let mut jac = vec![vec![0.0; n]; n];
            for col in 0..n {
                for (off, wt) in OFFSETS.iter().zip(WEIGHTS) {
                    let mut p = *seed;
                    if col < dim {
                        p.x[col] += off * h;
                    } else {
                        p.v[col - dim] += off * h;
                    }
                    let z = flow(&p, history, dim);
                    for row in 0..n {
                        jac[row][col] += wt * z[row] / (60.0 * h);
                    }
                }
            }
            Ok(determinant(jac))
        })
        .collect()
}

/// LU with partial pivoting.
pub fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap_or(k);
        if a[piv][k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            a.swap(piv, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for c in k..n {
                a[i][c] -= f * a[k][c];
            }
        }
    }
    det
}
