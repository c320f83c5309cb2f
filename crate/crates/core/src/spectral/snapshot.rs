//! Field snapshot formats.
//!
//! NDJSON: one object per stored coefficient,
//! `{"t":…,"component":c,"k":[k1,k2,k3],"re":…,"im":…}`, with `k` the signed
//! integer wave index (third entry 0 in two dimensions). Exactly-zero
//! coefficients are skipped.
//!
//! Binary: a 64-byte little-endian header followed by `re, im` pairs as `f64`,
//! component-major in flat lattice order.
//!
//! | offset | type  | content                   |
//! |--------|-------|---------------------------|
//! | 0      | [u8;4]| magic `VNSF`              |
//! | 4      | u32   | version (1)               |
//! | 8      | u32   | dimension d               |
//! | 12     | u32   | points per axis N         |
//! | 16     | f64   | box side L                |
//! | 24     | u32   | component count           |
//! | 28     | u32   | solenoidal flag (0 or 1)  |
//! | 32     | f64   | time t                    |
//! | 40     | n/a   | zero padding up to 64     |

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::SpectralField;
use super::grid::Grid;
use crate::error::{Result, VnsError};

pub const FIELD_MAGIC: &[u8; 4] = b"VNSF";
pub const FIELD_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub t: f64,
    pub component: usize,
    pub k: [i64; 3],
    pub re: f64,
    pub im: f64,
}

pub fn write_field_ndjson<W: Write>(w: &mut W, t: f64, z: &SpectralField) -> Result<()> {
    let g = z.grid();
    for c in 0..z.n_comps() {
        for (p, v) in z.comp(c).iter().enumerate() {
            // signed zeros are kept so that reading back is bitwise exact
            if v.re.to_bits() == 0 && v.im.to_bits() == 0 {
                continue;
            }
            let rec = ModeRecord {
                t,
                component: c,
                k: g.wave_vector_index(p),
                re: v.re,
                im: v.im,
            };
            serde_json::to_writer(&mut *w, &rec)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Reads an NDJSON snapshot back onto `grid`. Returns the record time.
pub fn read_field_ndjson<R: BufRead>(r: R, grid: &Grid, n_comps: usize) -> Result<(f64, SpectralField)> {
    let mut z = SpectralField::zeros(grid, n_comps);
    let n = grid.n() as i64;
    let mut t = 0.0;
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ModeRecord = serde_json::from_str(&line)?;
        if rec.component >= n_comps {
            return Err(VnsError::Data(format!("component {} out of range", rec.component)));
        }
        let mut idx = [0usize; 3];
        for a in 0..grid.dim() {
            let k = rec.k[a];
            if k < -n / 2 || k >= n / 2 {
                return Err(VnsError::Data(format!("wave index {k} outside lattice")));
            }
            idx[a] = k.rem_euclid(n) as usize;
        }
        let p = grid.flat_index(&idx[..grid.dim()]);
        z.comp_mut(rec.component)[p] = Complex64::new(rec.re, rec.im);
        t = rec.t;
    }
    Ok((t, z))
}

pub fn write_field_binary<W: Write>(w: &mut W, t: f64, z: &SpectralField) -> Result<()> {
    let g = z.grid();
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(FIELD_MAGIC);
    header[4..8].copy_from_slice(&FIELD_VERSION.to_le_bytes());
    header[8..12].copy_from_slice(&(g.dim() as u32).to_le_bytes());
    header[12..16].copy_from_slice(&(g.n() as u32).to_le_bytes());
    header[16..24].copy_from_slice(&g.length().to_le_bytes());
    header[24..28].copy_from_slice(&(z.n_comps() as u32).to_le_bytes());
    header[28..32].copy_from_slice(&(z.is_solenoidal() as u32).to_le_bytes());
    header[32..40].copy_from_slice(&t.to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(16 * g.len());
    for c in z.components() {
        buf.clear();
        for v in c {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

/// Parsed binary header.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldHeader {
    pub version: u32,
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub n_comps: usize,
    pub solenoidal: bool,
    pub t: f64,
}

fn u32_at(b: &[u8], o: usize) -> u32 {
    u32::from_le_bytes(b[o..o + 4].try_into().unwrap())
}

fn f64_at(b: &[u8], o: usize) -> f64 {
    f64::from_le_bytes(b[o..o + 8].try_into().unwrap())
}

pub fn parse_field_header(b: &[u8; HEADER_LEN]) -> Result<FieldHeader> {
    if &b[0..4] != FIELD_MAGIC {
        return Err(VnsError::Data("bad field magic".into()));
    }
    let version = u32_at(b, 4);
    if version != FIELD_VERSION {
        return Err(VnsError::Data(format!("unsupported field version {version}")));
    }
    Ok(FieldHeader {
        version,
        dim: u32_at(b, 8) as usize,
        n: u32_at(b, 12) as usize,
        length: f64_at(b, 16),
        n_comps: u32_at(b, 24) as usize,
        solenoidal: u32_at(b, 28) != 0,
        t: f64_at(b, 32),
    })
}

pub fn read_field_binary<R: Read>(r: &mut R) -> Result<(FieldHeader, SpectralField)> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    let h = parse_field_header(&header)?;
    let grid = Grid::new(h.dim, h.n, h.length)?;
    let mut raw = vec![0u8; 16 * grid.len()];
    let mut comps = Vec::with_capacity(h.n_comps);
    for _ in 0..h.n_comps {
        r.read_exact(&mut raw)?;
        comps.push(
            raw.chunks_exact(16)
                .map(|c| Complex64::new(f64_at(c, 0), f64_at(c, 8)))
                .collect(),
        );
    }
    let mut z = SpectralField::from_coefficients(&grid, comps)?;
    z.set_solenoidal(h.solenoidal);
    Ok((h, z))
}
