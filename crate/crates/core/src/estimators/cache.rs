//! Binary matrix container.
//!
//! Layout (little-endian): magic `CFCM`, u32 version, u32 count, then per
//! matrix u32 rows, u32 cols and rows*cols complex values stored row-major
//! as (re, im) f64 pairs.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::binio::{ByteReader, ByteWriter};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"CFCM";
const VERSION: u32 = 1;

pub fn save_matrices(path: &Path, mats: &[DMatrix<Complex64>]) -> Result<()> {
    let mut w = ByteWriter::default();
    w.bytes(MAGIC);
    w.u32(VERSION);
    w.u32(mats.len() as u32);
    for m in mats {
        w.u32(m.nrows() as u32);
        w.u32(m.ncols() as u32);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                w.f64(m[(i, j)].re);
                w.f64(m[(i, j)].im);
            }
        }
    }
    w.write_to(path)
}

pub fn load_matrices(path: &Path) -> Result<Vec<DMatrix<Complex64>>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = ByteReader::new(&bytes, "matrix");
    if r.take(4)? != MAGIC {
        return Err(Error::format("matrix", "bad magic"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Version {
            what: "matrix",
            found: version,
            expected: VERSION,
        });
    }
    let count = r.u32()? as usize;
    let mut out = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let rows = r.u32()? as usize;
        let cols = r.u32()? as usize;
        let mut m = DMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = Complex64::new(r.f64()?, r.f64()?);
            }
        }
        out.push(m);
    }
    r.finish()?;
    Ok(out)
}
