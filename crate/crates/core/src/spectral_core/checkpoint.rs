//! Binary snapshots of spectral fields.
//!
//! Layout, all little-endian: the magic `KLL1`, `u32 N_x`, `u32 N_v`,
//! `u8 kind` (0 for a phase-space field, 1 for an x-only field), then one
//! `(re: f64, im: f64)` pair per stored coefficient in row-major order over
//! `(n1, n2, n3, m1, m2, m3)` with every index running over `-(N-1)..=(N-1)`.
//! Masked x-modes are written as zeros. An x-only field is written with
//! `N_v = 1`, so its payload is row-major over `(n1, n2, n3)` alone.

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Band, SpectralError, SpectralField, XField};

pub const MAGIC: &[u8; 4] = b"KLL1";

/// A decoded checkpoint.
#[derive(Clone, Debug, PartialEq)]
pub enum Checkpoint {
    Spectral(SpectralField),
    X(XField),
}

fn write_payload<W: Write>(w: &mut W, n_x: usize, n_v: usize, kind: u8, c: &[Complex64]) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(n_x as u32)?;
    w.write_u32::<LittleEndian>(n_v as u32)?;
    w.write_u8(kind)?;
    for z in c {
        w.write_f64::<LittleEndian>(z.re)?;
        w.write_f64::<LittleEndian>(z.im)?;
    }
    Ok(())
}

pub fn write_field<W: Write>(w: &mut W, f: &SpectralField) -> std::io::Result<()> {
    let b = f.band();
    write_payload(w, b.x_radius(), b.v_halfwidth(), 0, f.coeffs())
}

pub fn write_xfield<W: Write>(w: &mut W, f: &XField) -> std::io::Result<()> {
    write_payload(w, f.x_radius(), 1, 1, f.coeffs())
}

pub fn read_checkpoint<R: Read>(r: &mut R) -> Result<Checkpoint, SpectralError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SpectralError::Checkpoint(format!("bad magic {magic:?}")));
    }
    let n_x = r.read_u32::<LittleEndian>()? as usize;
    let n_v = r.read_u32::<LittleEndian>()? as usize;
    let kind = r.read_u8()?;
    let band = Band::new(n_x, n_v)?;
    let count = match kind {
        0 => band.len(),
        1 => band.x_block(),
        k => return Err(SpectralError::Checkpoint(format!("unknown kind {k}"))),
    };
    let mut coeffs = Vec::with_capacity(count);
    for _ in 0..count {
        let re = r.read_f64::<LittleEndian>()?;
        let im = r.read_f64::<LittleEndian>()?;
        coeffs.push(Complex64::new(re, im));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(SpectralError::Checkpoint("trailing bytes".into()));
    }
    Ok(match kind {
        0 => Checkpoint::Spectral(SpectralField::from_coeffs(band, coeffs)?),
        _ => Checkpoint::X(XField::from_coeffs(n_x, coeffs)?),
    })
}

pub fn save_field(path: &Path, f: &SpectralField) -> Result<(), SpectralError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(&mut w, f)?;
    w.flush()?;
    Ok(())
}

pub fn save_xfield(path: &Path, f: &XField) -> Result<(), SpectralError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_xfield(&mut w, f)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Checkpoint, SpectralError> {
    read_checkpoint(&mut BufReader::new(File::open(path)?))
}
