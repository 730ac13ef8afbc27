//! Flat little-endian binary layout for grid fields:
//! u64 N, u64 degree, 4 × f64 side lengths, then C(4,k) grids of N⁴ f64 each
//! (component-major, axis 0 slowest within a grid).

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::exterior::binomial;
use crate::fibered::grid::{BaseField, Torus4};

pub fn write_field<W: Write>(w: &mut W, field: &BaseField) -> Result<()> {
    let t = field.torus();
    w.write_all(&(t.n() as u64).to_le_bytes())?;
    w.write_all(&(field.degree() as u64).to_le_bytes())?;
    for l in t.sides() {
        w.write_all(&l.to_le_bytes())?;
    }
    for g in field.grids() {
        for x in g {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

pub fn read_field<R: Read>(r: &mut R) -> Result<BaseField> {
    let n = read_u64(r)? as usize;
    let degree = read_u64(r)? as usize;
    if degree > 4 || n > 1 << 10 {
        return Err(Error::Format(format!("implausible header: N = {n}, degree = {degree}")));
    }
    let mut sides = [0.0; 4];
    for s in sides.iter_mut() {
        *s = read_f64(r)?;
    }
    let torus = Torus4::new(sides, n)?;
    let mut grids = Vec::with_capacity(binomial(4, degree));
    for _ in 0..binomial(4, degree) {
        let mut bytes = vec![0u8; torus.len() * 8];
        r.read_exact(&mut bytes)?;
        grids.push(
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect(),
        );
    }
    BaseField::from_grids(&torus, degree, grids)
}
