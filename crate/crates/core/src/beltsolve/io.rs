//! The `QCGRID1` binary grid format: a 16-byte header (magic, version,
//! reserved), the grid size, the box, then row-major complex samples, all
//! little endian.

use std::io::{Read, Write};

use super::SquareBox;
use crate::{c64, Error, Result, C64};

pub const QCGRID_MAGIC: &[u8; 8] = b"QCGRID1\0";
pub const QCGRID_VERSION: u32 = 1;

pub fn write_qcgrid<W: Write>(mut w: W, n: usize, bbox: &SquareBox, f: &[C64]) -> Result<()> {
    if f.len() != n * n {
        return Err(Error::invalid("sample count does not match the grid size"));
    }
    let io = |e: std::io::Error| Error::Io(e.to_string());
    let mut buf = Vec::with_capacity(48 + 16 * f.len());
    buf.extend_from_slice(QCGRID_MAGIC);
    buf.extend_from_slice(&QCGRID_VERSION.to_le_bytes());
    buf.extend_from_slice(&[0u8; 4]);
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    for v in [bbox.x0, bbox.y0, bbox.side] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for z in f {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf).map_err(io)?;
    w.flush().map_err(io)
}

pub fn read_qcgrid<R: Read>(mut r: R) -> Result<(usize, SquareBox, Vec<C64>)> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    let mut head = [0u8; 48];
    r.read_exact(&mut head).map_err(io)?;
    if &head[..8] != QCGRID_MAGIC {
        return Err(Error::Io("not a QCGRID1 file".into()));
    }
    let version = u32::from_le_bytes(head[8..12].try_into().unwrap());
    if version != QCGRID_VERSION {
        return Err(Error::Io(format!("unsupported QCGRID version {version}")));
    }
    let f64_at = |o: usize| f64::from_le_bytes(head[o..o + 8].try_into().unwrap());
    let n = u64::from_le_bytes(head[16..24].try_into().unwrap()) as usize;
    let bbox = SquareBox { x0: f64_at(24), y0: f64_at(32), side: f64_at(40) };
    if n == 0 || n > 1 << 15 {
        return Err(Error::Io(format!("implausible grid size {n}")));
    }
    let mut body = vec![0u8; 16 * n * n];
    r.read_exact(&mut body).map_err(io)?;
    let f = body
        .chunks_exact(16)
        .map(|c| c64(f64::from_le_bytes(c[..8].try_into().unwrap()), f64::from_le_bytes(c[8..].try_into().unwrap())))
        .collect();
    Ok((n, bbox, f))
}
