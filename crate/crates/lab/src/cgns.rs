//! CGNS1 snapshot files.
//!
//! Layout (little endian): the magic `CGNS1`, `u32` dimension, one `u32`
//! resolution per axis, `u32` component count, then every coefficient as a
//! pair of `f32` (re, im), component-major and row-major in storage order.
//!
//! The header has no room for a lattice stride, so strided axes are written
//! unrolled: an axis with `n` points and stride `s` is stored with `n·s`
//! points and zeros off the sublattice. Loading folds the vertical axis of a 3D
//! snapshot back onto the coarsest power-of-two grid that holds the data.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use nslab_core::{Complex64, SpectralField, TorusGrid};

use crate::error::LabError;

pub const MAGIC: &[u8; 5] = b"CGNS1";

/// Decoded file contents before a grid is chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSnapshot {
    pub shape: Vec<usize>,
    pub ncomp: usize,
    pub coeffs: Vec<Complex64>,
}

fn signed(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn unsigned(m: i64, n: usize) -> Option<usize> {
    let ni = n as i64;
    if m > ni / 2 || m <= -ni / 2 {
        return None;
    }
    Some(if m >= 0 { m as usize } else { (m + ni) as usize })
}

fn flat_of(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (i, n)| acc * n + i)
}

fn unflat_of(mut f: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for a in (0..shape.len()).rev() {
        idx[a] = f % shape[a];
        f /= shape[a];
    }
    idx
}

/// Unrolls every strided axis of `u`.
pub fn to_raw(u: &SpectralField) -> RawSnapshot {
    let g = *u.grid();
    let d = g.dim();
    let shape: Vec<usize> = (0..d).map(|a| g.resolution(a) * g.stride(a)).collect();
    let nf: usize = shape.iter().product();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); nf * u.ncomp()];
    let n = g.total();
    let mut dest = vec![0usize; n];
    g.for_each_index(|f, idx| {
        let full: Vec<usize> = (0..d)
            .map(|a| {
                let m = g.signed_index(a, idx[a]) * g.stride(a) as i64;
                unsigned(m, shape[a]).expect("sublattice fits")
            })
            .collect();
        dest[f] = flat_of(&full, &shape);
    });
    for c in 0..u.ncomp() {
        for (f, &t) in dest.iter().enumerate() {
            coeffs[c * nf + t] = u.component(c)[f];
        }
    }
    RawSnapshot {
        shape,
        ncomp: u.ncomp(),
        coeffs,
    }
}

/// Builds the field, folding the vertical axis of a 3D snapshot onto the
/// largest stride `s` such that every nonzero mode lies on `sZ` and `n/s` is a
/// power of two no smaller than the minimum resolution. Horizontal axes and
/// 2D snapshots are taken as stored.
pub fn from_raw(raw: &RawSnapshot) -> Result<SpectralField, LabError> {
    let d = raw.shape.len();
    let nf: usize = raw.shape.iter().product();
    let occupied: Vec<usize> = (0..nf)
        .filter(|&f| (0..raw.ncomp).any(|c| raw.coeffs[c * nf + f].norm() > 0.0))
        .collect();
    let mut strides = vec![1usize; d];
    let fold = if d == 3 && !occupied.is_empty() { 2..3 } else { 0..0 };
    for a in 0..d {
        let n = raw.shape[a];
        if !fold.contains(&a) {
            if !n.is_power_of_two() || n < TorusGrid::MIN_RESOLUTION {
                return Err(LabError::Format(format!("axis {a} has unsupported length {n}")));
            }
            continue;
        }
        let ms: Vec<i64> = occupied
            .iter()
            .map(|&f| signed(unflat_of(f, &raw.shape)[a], n))
            .collect();
        let best = (1..=n).rev().find(|&s| {
            n % s == 0
                && (n / s).is_power_of_two()
                && n / s >= TorusGrid::MIN_RESOLUTION
                && ms.iter().all(|m| m % s as i64 == 0 && unsigned(m / s as i64, n / s).is_some())
        });
        strides[a] = best.ok_or_else(|| {
            LabError::Format(format!("axis {a} of length {n} has no admissible power-of-two grid"))
        })?;
    }
    let coarse: Vec<usize> = (0..d).map(|a| raw.shape[a] / strides[a]).collect();
    let mut grid = TorusGrid::new(&coarse)?;
    for (a, &s) in strides.iter().enumerate() {
        grid = grid.with_stride(a, s)?;
    }
    let n = grid.total();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n * raw.ncomp];
    for &f in &occupied {
        let idx = unflat_of(f, &raw.shape);
        let small: Vec<usize> = (0..d)
            .map(|a| {
                let m = signed(idx[a], raw.shape[a]) / strides[a] as i64;
                unsigned(m, coarse[a]).unwrap()
            })
            .collect();
        let t = flat_of(&small, &coarse);
        for c in 0..raw.ncomp {
            coeffs[c * n + t] = raw.coeffs[c * nf + f];
        }
    }
    Ok(SpectralField::from_coeffs(grid, raw.ncomp, coeffs)?)
}

pub fn encode(u: &SpectralField) -> Vec<u8> {
    let raw = to_raw(u);
    let mut out = Vec::with_capacity(5 + 4 * (raw.shape.len() + 2) + 8 * raw.coeffs.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(raw.shape.len() as u32).to_le_bytes());
    for n in &raw.shape {
        out.extend_from_slice(&(*n as u32).to_le_bytes());
    }
    out.extend_from_slice(&(raw.ncomp as u32).to_le_bytes());
    for z in &raw.coeffs {
        out.extend_from_slice(&(z.re as f32).to_le_bytes());
        out.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
    out
}

fn u32_at(bytes: &[u8], pos: &mut usize) -> Result<u32, LabError> {
    let b = bytes
        .get(*pos..*pos + 4)
        .ok_or_else(|| LabError::Format("truncated CGNS1 header".into()))?;
    *pos += 4;
    Ok(u32::from_le_bytes(b.try_into().unwrap()))
}

pub fn decode_raw(bytes: &[u8]) -> Result<RawSnapshot, LabError> {
    if bytes.len() < 5 || &bytes[..5] != MAGIC {
        return Err(LabError::Format("missing CGNS1 magic".into()));
    }
    let mut pos = 5;
    let dim = u32_at(bytes, &mut pos)? as usize;
    if !(2..=3).contains(&dim) {
        return Err(LabError::Format(format!("unsupported dimension {dim}")));
    }
    let shape = (0..dim)
        .map(|_| u32_at(bytes, &mut pos).map(|v| v as usize))
        .collect::<Result<Vec<_>, _>>()?;
    let ncomp = u32_at(bytes, &mut pos)? as usize;
    let count = shape.iter().try_fold(ncomp, |acc, n| acc.checked_mul(*n));
    let body = &bytes[pos..];
    if count.and_then(|c| c.checked_mul(8)) != Some(body.len()) {
        return Err(LabError::Format(format!(
            "coefficient block of {} bytes does not match header",
            body.len()
        )));
    }
    let coeffs = body
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes(c[..4].try_into().unwrap());
            let im = f32::from_le_bytes(c[4..].try_into().unwrap());
            Complex64::new(re as f64, im as f64)
        })
        .collect();
    Ok(RawSnapshot {
        shape,
        ncomp,
        coeffs,
    })
}

pub fn decode(bytes: &[u8]) -> Result<SpectralField, LabError> {
    from_raw(&decode_raw(bytes)?)
}

pub fn write(path: &Path, u: &SpectralField) -> Result<(), LabError> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode(u))?;
    Ok(())
}

/// Loads a snapshot, folding an unrolled vertical axis back to its stride.
pub fn read(path: &Path) -> Result<SpectralField, LabError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

/// CSV spectrum: one row per stored coefficient, `(|k|, component, re, im)`.
pub fn write_spectrum_csv<W: io::Write>(out: W, u: &SpectralField) -> Result<(), LabError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["|k|", "component", "re", "im"])?;
    let g = *u.grid();
    let n = g.total();
    let mut radii = vec![0.0; n];
    g.for_each_mode(|f, k| radii[f] = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt());
    for c in 0..u.ncomp() {
        for (f, z) in u.component(c).iter().enumerate() {
            if z.norm() > 0.0 {
                w.write_record([
                    format!("{:.17e}", radii[f]),
                    c.to_string(),
                    format!("{:.17e}", z.re),
                    format!("{:.17e}", z.im),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
