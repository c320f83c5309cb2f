//! Particle snapshot formats.
//!
//! NDJSON: one object per particle, `{"i":…,"x":[…],"v":[…],"w":…}` with
//! `d` entries in `x` and `v`.
//!
//! Binary: a 64-byte little-endian header followed by one record
//! `x₁..x_d, v₁..v_d, w` of `f64` per particle.
//!
//! | offset | type  | content              |
//! |--------|-------|----------------------|
//! | 0      | [u8;4]| magic `VNSP`         |
//! | 4      | u32   | version (1)          |
//! | 8      | u32   | dimension d          |
//! | 12     | u32   | zero                 |
//! | 16     | u64   | particle count       |
//! | 24     | f64   | box side L           |
//! | 32     | f64   | time t               |
//! | 40     | n/a   | zero padding to 64   |

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use super::ensemble::ParticleEnsemble;
use crate::error::{Result, VnsError};

pub const PARTICLE_MAGIC: &[u8; 4] = b"VNSP";
pub const PARTICLE_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticleRecord {
    pub i: usize,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub w: f64,
}

pub fn write_particles_ndjson<W: Write>(w: &mut W, ens: &ParticleEnsemble) -> Result<()> {
    let d = ens.dim();
    for (i, ((x, v), wt)) in ens.positions().iter().zip(ens.velocities()).zip(ens.weights()).enumerate() {
        let rec = ParticleRecord { i, x: x[..d].to_vec(), v: v[..d].to_vec(), w: *wt };
        serde_json::to_writer(&mut *w, &rec)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_particles_ndjson<R: BufRead>(r: R, dim: usize, box_length: f64) -> Result<ParticleEnsemble> {
    let (mut xs, mut vs, mut ws) = (Vec::new(), Vec::new(), Vec::new());
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ParticleRecord = serde_json::from_str(&line)?;
        if rec.x.len() != dim || rec.v.len() != dim {
            return Err(VnsError::Data(format!("particle {} is not {dim}-dimensional", rec.i)));
        }
        if rec.i != ws.len() {
            return Err(VnsError::Data(format!("particle index {} out of sequence", rec.i)));
        }
        let mut x = [0.0; 3];
        let mut v = [0.0; 3];
        x[..dim].copy_from_slice(&rec.x);
        v[..dim].copy_from_slice(&rec.v);
        xs.push(x);
        vs.push(v);
        ws.push(rec.w);
    }
    ParticleEnsemble::from_particles(dim, box_length, xs, vs, ws).map_err(|e| VnsError::Data(e.to_string()))
}

pub fn write_particles_binary<W: Write>(w: &mut W, t: f64, ens: &ParticleEnsemble) -> Result<()> {
    let d = ens.dim();
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(PARTICLE_MAGIC);
    header[4..8].copy_from_slice(&PARTICLE_VERSION.to_le_bytes());
    header[8..12].copy_from_slice(&(d as u32).to_le_bytes());
    header[16..24].copy_from_slice(&(ens.len() as u64).to_le_bytes());
    header[24..32].copy_from_slice(&ens.length().to_le_bytes());
    header[32..40].copy_from_slice(&t.to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(8 * (2 * d + 1) * ens.len());
    for ((x, v), wt) in ens.positions().iter().zip(ens.velocities()).zip(ens.weights()) {
        for c in x[..d].iter().chain(&v[..d]).chain(std::iter::once(wt)) {
            buf.extend_from_slice(&c.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleHeader {
    pub version: u32,
    pub dim: usize,
    pub count: usize,
    pub length: f64,
    pub t: f64,
}

pub fn parse_particle_header(b: &[u8; HEADER_LEN]) -> Result<ParticleHeader> {
    if &b[0..4] != PARTICLE_MAGIC {
        return Err(VnsError::Data("bad particle magic".into()));
    }
    let version = u32::from_le_bytes(b[4..8].try_into().unwrap());
    if version != PARTICLE_VERSION {
        return Err(VnsError::Data(format!("unsupported particle version {version}")));
    }
    let dim = u32::from_le_bytes(b[8..12].try_into().unwrap()) as usize;
    if !(2..=3).contains(&dim) {
        return Err(VnsError::Data(format!("bad dimension {dim}")));
    }
    Ok(ParticleHeader {
        version,
        dim,
        count: u64::from_le_bytes(b[16..24].try_into().unwrap()) as usize,
        length: f64::from_le_bytes(b[24..32].try_into().unwrap()),
        t: f64::from_le_bytes(b[32..40].try_into().unwrap()),
    })
}

pub fn read_particles_binary<R: Read>(r: &mut R) -> Result<(ParticleHeader, ParticleEnsemble)> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    let h = parse_particle_header(&header)?;
    let d = h.dim;
    let rec = 2 * d + 1;
    let mut raw = vec![0u8; 8 * rec * h.count];
    r.read_exact(&mut raw)?;
    let vals: Vec<f64> = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let (mut xs, mut vs, mut ws) = (Vec::new(), Vec::new(), Vec::new());
    for p in vals.chunks_exact(rec) {
        let mut x = [0.0; 3];
        let mut v = [0.0; 3];
        x[..d].copy_from_slice(&p[..d]);
        v[..d].copy_from_slice(&p[d..2 * d]);
        xs.push(x);
        vs.push(v);
        ws.push(p[2 * d]);
    }
    let ens = ParticleEnsemble::from_particles(d, h.length, xs, vs, ws)
        .map_err(|e| VnsError::Data(e.to_string()))?;
    Ok((h, ens))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn sample() -> ParticleEnsemble {
        ParticleEnsemble::from_particles(
            3,
            4.0,
            vec![[0.1, 0.2, 3.9], [1.0 / 3.0, 2.0, 1e-17]],
            vec![[1.0, -2.0, 0.5], [0.0, 1e300, -7.25]],
            vec![0.25, 0.1],
        )
        .unwrap()
    }

    #[test]
    fn ndjson_round_trip() {
        let e = sample();
        let mut buf = Vec::new();
        write_particles_ndjson(&mut buf, &e).unwrap();
        let back = read_particles_ndjson(Cursor::new(buf), 3, 4.0).unwrap();
        assert_eq!(back.positions(), e.positions());
        assert_eq!(back.velocities(), e.velocities());
        assert_eq!(back.weights(), e.weights());
    }

    #[test]
    fn binary_round_trip() {
        let e = sample();
        let mut buf = Vec::new();
        write_particles_binary(&mut buf, 2.5, &e).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 2 * 7 * 8);
        assert_eq!(&buf[..4], b"VNSP");
        let (h, back) = read_particles_binary(&mut Cursor::new(buf)).unwrap();
        assert_eq!((h.dim, h.count, h.t), (3, 2, 2.5));
        assert_eq!(back.positions(), e.positions());
        assert_eq!(back.weights(), e.weights());
    }
}
