//! Flat binary dumps of dense complex matrices, for stashing expensive
//! oracle intermediates or inspecting them from other tools.
//!
//! Layout: one ASCII header line `PHASESENSE DENSE COMPLEX128 LE <rows>
//! <cols>\n`, then `rows * cols` little-endian `(re, im)` f64 pairs in
//! row-major order.

use std::io::{Read as _, Write as _};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const MAGIC: &str = "PHASESENSE DENSE COMPLEX128 LE";

pub fn write_matrix(path: &Path, m: &Array2<C64>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(f, "{MAGIC} {} {}\n", m.nrows(), m.ncols())?;
    for v in m.iter() {
        f.write_all(&v.re.to_le_bytes())?;
        f.write_all(&v.im.to_le_bytes())?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<Array2<C64>> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut header = Vec::new();
    loop {
        let mut byte = [0u8; 1];
        f.read_exact(&mut byte)?;
        if byte[0] == b'\n' {
            break;
        }
        header.push(byte[0]);
        if header.len() > 128 {
            return Err(Error::Config("matrix dump header too long".into()));
        }
    }
    let header = String::from_utf8(header)
        .map_err(|_| Error::Config("matrix dump header is not ASCII".into()))?;
    let rest = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::Config(format!("bad matrix dump magic: {header:?}")))?;
    let dims: Vec<usize> = rest
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Config(format!("bad matrix dump dimensions: {e}")))?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Config(format!(
            "expected 2 dimensions in matrix dump header, got {}",
            dims.len()
        )));
    };
    let mut buf = vec![0u8; rows * cols * 16];
    f.read_exact(&mut buf)?;
    let data: Vec<C64> = buf
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Array2::from_shape_vec((rows, cols), data)
        .map_err(|e| Error::Config(format!("matrix dump shape error: {e}")))
}
