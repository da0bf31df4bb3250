//! File formats for frames and matrices.
//!
//! * Frame CSV: header `real,imag`, one sample per row.
//! * Frame binary: little-endian `f64` pairs `re, im` per sample, no header.
//! * Matrix CSV: `# key: value` comment lines, header `row,col,re,im`, one
//!   entry per row in row-major order.
//! * Matrix binary: the 8 magic bytes `MIXNUMW1`, little-endian `u64` rows,
//!   `u64` cols, then row-major little-endian `f64` pairs `re, im`.
//!
//! Floats are written in shortest round-trip form, so reloading a CSV
//! reproduces the values bit for bit.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MATRIX_MAGIC: &[u8; 8] = b"MIXNUMW1";

#[derive(Debug, Serialize, Deserialize)]
struct SampleRow {
    real: f64,
    imag: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct EntryRow {
    row: usize,
    col: usize,
    re: f64,
    im: f64,
}

pub fn write_samples_csv<W: Write>(samples: &[Complex64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in samples {
        w.serialize(SampleRow {
            real: s.re,
            imag: s.im,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples_csv<R: Read>(input: R) -> Result<Vec<Complex64>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<SampleRow>()
        .map(|row| Ok(row.map(|s| Complex64::new(s.real, s.imag))?))
        .collect()
}

pub fn write_samples_bin<W: Write>(samples: &[Complex64], mut out: W) -> Result<()> {
    let mut buf = Vec::with_capacity(samples.len() * 16);
    for s in samples {
        buf.extend_from_slice(&s.re.to_le_bytes());
        buf.extend_from_slice(&s.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_samples_bin<R: Read>(mut input: R) -> Result<Vec<Complex64>> {
    let mut buf = Vec::new();
    input.read_to_end(&mut buf)?;
    if buf.len() % 16 != 0 {
        return Err(Error::InvalidArgument(format!(
            "binary sample stream of {} bytes is not a whole number of complex samples",
            buf.len()
        )));
    }
    Ok(buf.chunks_exact(16).map(decode_pair).collect())
}

fn decode_pair(chunk: &[u8]) -> Complex64 {
    let re = f64::from_le_bytes(chunk[..8].try_into().expect("8 bytes"));
    let im = f64::from_le_bytes(chunk[8..16].try_into().expect("8 bytes"));
    Complex64::new(re, im)
}

/// Writes `# key: value` header lines followed by the entry table.
pub fn write_matrix_csv<W: Write>(m: &DMatrix<Complex64>, header: &[(String, String)], mut out: W) -> Result<()> {
    for (k, v) in header {
        writeln!(out, "# {k}: {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    for row in 0..m.nrows() {
        for col in 0..m.ncols() {
            let z = m[(row, col)];
            w.serialize(EntryRow {
                row,
                col,
                re: z.re,
                im: z.im,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(input: R) -> Result<DMatrix<Complex64>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let entries = r
        .deserialize::<EntryRow>()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let rows = entries.iter().map(|e| e.row + 1).max().unwrap_or(0);
    let cols = entries.iter().map(|e| e.col + 1).max().unwrap_or(0);
    if entries.len() != rows * cols {
        return Err(Error::InvalidArgument(format!(
            "matrix CSV has {} entries for a {rows}x{cols} matrix",
            entries.len()
        )));
    }
    let mut m = DMatrix::zeros(rows, cols);
    for e in entries {
        m[(e.row, e.col)] = Complex64::new(e.re, e.im);
    }
    Ok(m)
}

pub fn write_matrix_bin<W: Write>(m: &DMatrix<Complex64>, mut out: W) -> Result<()> {
    let mut buf = Vec::with_capacity(24 + m.len() * 16);
    buf.extend_from_slice(MATRIX_MAGIC);
    buf.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    buf.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for row in 0..m.nrows() {
        for col in 0..m.ncols() {
            let z = m[(row, col)];
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_matrix_bin<R: Read>(mut input: R) -> Result<DMatrix<Complex64>> {
    let mut buf = Vec::new();
    input.read_to_end(&mut buf)?;
    if buf.len() < 24 || &buf[..8] != MATRIX_MAGIC {
        return Err(Error::InvalidArgument("not a matrix binary file".into()));
    }
    let rows = u64::from_le_bytes(buf[8..16].try_into().expect("8 bytes")) as usize;
    let cols = u64::from_le_bytes(buf[16..24].try_into().expect("8 bytes")) as usize;
    let body = &buf[24..];
    if body.len() != rows * cols * 16 {
        return Err(Error::InvalidArgument(format!(
            "matrix binary body has {} bytes, expected {}",
            body.len(),
            rows * cols * 16
        )));
    }
    let data: Vec<Complex64> = body.chunks_exact(16).map(decode_pair).collect();
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}
