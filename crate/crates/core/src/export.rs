//! Raw matrix dumps: `rows: u64 LE`, `cols: u64 LE`, then row-major
//! `(re, im)` pairs of `f64 LE`.

use std::io::{self, Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

pub fn write_matrix(m: &CMatrix, mut out: impl Write) -> io::Result<()> {
    out.write_all(&(m.nrows() as u64).to_le_bytes())?;
    out.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_matrix(mut input: impl Read) -> Result<CMatrix> {
    let mut word = [0u8; 8];
    let mut next = |input: &mut dyn Read| -> io::Result<[u8; 8]> {
        input.read_exact(&mut word)?;
        Ok(word)
    };
    let rows = u64::from_le_bytes(next(&mut input)?) as usize;
    let cols = u64::from_le_bytes(next(&mut input)?) as usize;
    if rows.checked_mul(cols).is_none_or(|n| n > 1 << 28) {
        return Err(Error::Dimension(format!(
            "implausible matrix header {rows}x{cols}"
        )));
    }
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let re = f64::from_le_bytes(next(&mut input)?);
            let im = f64::from_le_bytes(next(&mut input)?);
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

pub fn to_bytes(m: &CMatrix) -> Vec<u8> {
    let mut buf = Vec::with_capacity(16 + 16 * m.len());
    write_matrix(m, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_round_trip() {
        let m = CMatrix::from_fn(2, 3, |i, j| Complex64::new(i as f64, j as f64 + 0.5));
        let bytes = to_bytes(&m);
        assert_eq!(bytes.len(), 16 + 6 * 16);
        assert_eq!(&bytes[..8], &2u64.to_le_bytes());
        // entry (0, 1) follows (0, 0): row-major
        assert_eq!(&bytes[32..40], &0.0f64.to_le_bytes());
        assert_eq!(&bytes[40..48], &1.5f64.to_le_bytes());
        assert_eq!(read_matrix(bytes.as_slice()).unwrap(), m);
        assert!(read_matrix(&bytes[..20]).is_err());
    }
}
