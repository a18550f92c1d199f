//! Binary snapshots of spectral fields.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! "STRP1"  nx: u64  ny: u64  lx: f64  t: f64  nfields: u64
//! then nfields blocks of nx·ny (re, im) f64 pairs, wavenumber-row major
//! ```
//!
//! The format is deliberately dumb: fixed header, raw coefficients, no
//! compression, so a snapshot can be inspected with `xxd` and read back
//! bit-exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;

use crate::grid::{Grid, SpectralField, PARITY_TOL};
use crate::{Error, Result};

const MAGIC: &[u8; 5] = b"STRP1";

/// Writes `t` and the given fields (which must share one grid) to `path`.
pub fn write_checkpoint(path: &Path, t: f64, fields: &[&SpectralField]) -> Result<()> {
    let Some(first) = fields.first() else {
        return Err(Error::Invalid("checkpoint needs at least one field".into()));
    };
    let g = first.grid;
    if fields.iter().any(|f| f.grid != g) {
        return Err(Error::Invalid("checkpoint fields must share a grid".into()));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(g.nx as u64).to_le_bytes())?;
    w.write_all(&(g.ny as u64).to_le_bytes())?;
    w.write_all(&g.lx.to_le_bytes())?;
    w.write_all(&t.to_le_bytes())?;
    w.write_all(&(fields.len() as u64).to_le_bytes())?;
    for f in fields {
        for row in 0..g.nx {
            for col in 0..g.ny {
                let c = f.coeffs[[row, col]];
                w.write_all(&c.re.to_le_bytes())?;
                w.write_all(&c.im.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(f64::from_le_bytes(b))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::BadCheckpoint("file truncated".into())
    } else {
        Error::Io(e)
    }
}

/// Reads a checkpoint back: the stored time and the fields in write order.
pub fn read_checkpoint(path: &Path) -> Result<(f64, Vec<SpectralField>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MAGIC {
        return Err(Error::BadCheckpoint(format!(
            "bad magic {:?}, expected {:?}",
            magic, MAGIC
        )));
    }
    let nx = read_u64(&mut r)? as usize;
    let ny = read_u64(&mut r)? as usize;
    let lx = read_f64(&mut r)?;
    if !lx.is_finite() {
        return Err(Error::BadCheckpoint(format!("non-finite period {lx}")));
    }
    let grid = Grid::new(nx, ny, lx)
        .map_err(|e| Error::BadCheckpoint(format!("invalid grid in header: {e}")))?;
    let t = read_f64(&mut r)?;
    let nfields = read_u64(&mut r)? as usize;
    if !t.is_finite() || nfields == 0 || nfields > 16 {
        return Err(Error::BadCheckpoint(format!(
            "implausible header: t = {t}, nfields = {nfields}"
        )));
    }
    let mut fields = Vec::with_capacity(nfields);
    for _ in 0..nfields {
        let mut f = SpectralField::zeros(grid);
        for row in 0..nx {
            for col in 0..ny {
                let re = read_f64(&mut r)?;
                let im = read_f64(&mut r)?;
                f.coeffs[[row, col]] = Complex64::new(re, im);
            }
        }
        if !f.is_finite() {
            return Err(Error::BadCheckpoint("non-finite coefficients".into()));
        }
        let scale = f.max_coeff_norm().max(1.0);
        f.real_parity = f.parity_defect() <= PARITY_TOL * scale;
        fields.push(f);
    }
    let mut tail = [0u8; 1];
    if r.read(&mut tail).map_err(Error::Io)? != 0 {
        return Err(Error::BadCheckpoint("trailing bytes after fields".into()));
    }
    Ok((t, fields))
}
