//! Versioned little-endian container for states and block operators.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic  b"MFBK"
//! u32    version (1)
//! u8     kind (1 = state, 2 = operator), then 3 zero bytes
//! u32    d
//! u32    n_max
//! f64    eps
//! state:    f64 tail_mass, u64 len, len × (f64 re, f64 im)
//! operator: i32 shift, u32 block count,
//!           per block: u32 source n, u32 rows, u32 cols, rows·cols × (re, im) column-major
//! ```

use std::io::{Read, Write};
use std::sync::Arc;

use super::operator::BlockOperator;
use super::space::FockSpace;
use super::state::FockState;
use crate::{CMatrix, Error, Result, C64};

const MAGIC: &[u8; 4] = b"MFBK";
const VERSION: u32 = 1;
const KIND_STATE: u8 = 1;
const KIND_OPERATOR: u8 = 2;

struct Header {
    kind: u8,
    d: usize,
    n_max: usize,
    eps: f64,
}

fn write_header<W: Write>(w: &mut W, kind: u8, space: &FockSpace, eps: f64) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[kind, 0, 0, 0])?;
    w.write_all(&(space.d() as u32).to_le_bytes())?;
    w.write_all(&(space.n_max() as u32).to_le_bytes())?;
    w.write_all(&eps.to_le_bytes())?;
    Ok(())
}

fn read_array<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("truncated input: {e}")))?;
    Ok(buf)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    Ok(u32::from_le_bytes(read_array(r)?))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array(r)?))
}

fn read_complex<R: Read>(r: &mut R) -> Result<C64> {
    let re = read_f64(r)?;
    let im = read_f64(r)?;
    Ok(C64::new(re, im))
}

fn write_complex<W: Write>(w: &mut W, z: C64) -> Result<()> {
    w.write_all(&z.re.to_le_bytes())?;
    w.write_all(&z.im.to_le_bytes())?;
    Ok(())
}

fn read_header<R: Read>(r: &mut R) -> Result<Header> {
    let magic: [u8; 4] = read_array(r)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let kind: [u8; 4] = read_array(r)?;
    let d = read_u32(r)? as usize;
    let n_max = read_u32(r)? as usize;
    let eps = read_f64(r)?;
    Ok(Header {
        kind: kind[0],
        d,
        n_max,
        eps,
    })
}

pub fn write_state<W: Write>(w: &mut W, u: &FockState) -> Result<()> {
    write_header(w, KIND_STATE, u.space(), u.eps())?;
    w.write_all(&u.tail_mass().to_le_bytes())?;
    w.write_all(&(u.data().len() as u64).to_le_bytes())?;
    for &z in u.data() {
        write_complex(w, z)?;
    }
    Ok(())
}

pub fn read_state<R: Read>(r: &mut R) -> Result<FockState> {
    let h = read_header(r)?;
    if h.kind != KIND_STATE {
        return Err(Error::Format(format!("expected a state, found kind {}", h.kind)));
    }
    let tail = read_f64(r)?;
    let len = u64::from_le_bytes(read_array(r)?) as usize;
    let space = FockSpace::new(h.d, h.n_max)?;
    if len != space.dim() {
        return Err(Error::Format(format!("length {len} does not match dimension {}", space.dim())));
    }
    let data = (0..len).map(|_| read_complex(r)).collect::<Result<Vec<_>>>()?;
    FockState::from_vec(&space, h.eps, data, tail)
}

pub fn write_operator<W: Write>(w: &mut W, op: &BlockOperator) -> Result<()> {
    write_header(w, KIND_OPERATOR, op.space(), op.eps())?;
    w.write_all(&(op.shift() as i32).to_le_bytes())?;
    let sources: Vec<usize> = op.sources().collect();
    w.write_all(&(sources.len() as u32).to_le_bytes())?;
    for n in sources {
        let b = op.block(n).unwrap();
        w.write_all(&(n as u32).to_le_bytes())?;
        w.write_all(&(b.nrows() as u32).to_le_bytes())?;
        w.write_all(&(b.ncols() as u32).to_le_bytes())?;
        for &z in b.iter() {
            write_complex(w, z)?;
        }
    }
    Ok(())
}

/// Reads an operator; `space` may be supplied to share an existing basis.
pub fn read_operator<R: Read>(r: &mut R, space: Option<&Arc<FockSpace>>) -> Result<BlockOperator> {
    let h = read_header(r)?;
    if h.kind != KIND_OPERATOR {
        return Err(Error::Format(format!("expected an operator, found kind {}", h.kind)));
    }
    let space = match space {
        Some(s) if s.d() == h.d && s.n_max() == h.n_max => s.clone(),
        Some(_) => return Err(Error::Format("operator does not match the supplied space".into())),
        None => FockSpace::new(h.d, h.n_max)?,
    };
    let shift = i32::from_le_bytes(read_array(r)?) as isize;
    let count = read_u32(r)? as usize;
    let mut op = BlockOperator::zeros(&space, h.eps, shift);
    for _ in 0..count {
        let n = read_u32(r)? as usize;
        let rows = read_u32(r)? as usize;
        let cols = read_u32(r)? as usize;
        if n > space.n_max() {
            return Err(Error::Format(format!("block source {n} above n_max")));
        }
        let vals = (0..rows * cols).map(|_| read_complex(r)).collect::<Result<Vec<_>>>()?;
        op.set_block(n, CMatrix::from_vec(rows, cols, vals))
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    Ok(op)
}
