//! Binary parameter checkpoints.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic     8 bytes  "NLCKPT\0\0"
//! version   u32
//! module    u32 length + UTF-8
//! H, T, C, L  u64 each
//! count     u64
//! count x { name: u32 length + UTF-8, ndim: u32, dims: u64 x ndim, values: f64 x prod(dims) }
//! ```

use std::io::{Read, Write};
use std::path::Path;

use super::{ParamSet, Tensor};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"NLCKPT\0\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckpointHeader {
    pub version: u32,
    pub module: String,
    pub hidden: u64,
    pub steps: u64,
    pub cond_dim: u64,
    pub basis_rows: u64,
}

pub fn write_checkpoint<W: Write>(mut w: W, header: &CheckpointHeader, params: &ParamSet) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&header.version.to_le_bytes())?;
    write_str(&mut w, &header.module)?;
    for v in [header.hidden, header.steps, header.cond_dim, header.basis_rows] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&(params.len() as u64).to_le_bytes())?;
    for (name, t) in params.iter() {
        write_str(&mut w, name)?;
        w.write_all(&(t.shape().len() as u32).to_le_bytes())?;
        for &d in t.shape() {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for v in t.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<(CheckpointHeader, ParamSet)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::input("not a checkpoint file"));
    }
    let version = read_u32(&mut r)?;
    if version != FORMAT_VERSION {
        return Err(Error::input(format!("unsupported checkpoint version {version}")));
    }
    let module = read_str(&mut r)?;
    let header = CheckpointHeader {
        version,
        module,
        hidden: read_u64(&mut r)?,
        steps: read_u64(&mut r)?,
        cond_dim: read_u64(&mut r)?,
        basis_rows: read_u64(&mut r)?,
    };
    let count = read_u64(&mut r)?;
    let mut params = ParamSet::new();
    for _ in 0..count {
        let name = read_str(&mut r)?;
        let ndim = read_u32(&mut r)? as usize;
        let shape = (0..ndim)
            .map(|_| read_u64(&mut r).map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        let n: usize = shape.iter().product();
        let mut buf = vec![0u8; n * 8];
        r.read_exact(&mut buf)?;
        let data = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        params.insert(name, Tensor::new(shape, data)?)?;
    }
    Ok((header, params))
}

pub fn save(path: &Path, header: &CheckpointHeader, params: &ParamSet) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_checkpoint(f, header, params)
}

pub fn load(path: &Path) -> Result<(CheckpointHeader, ParamSet)> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    read_checkpoint(f)
}

fn write_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_str<R: Read>(r: &mut R) -> Result<String> {
    let n = read_u32(r)? as usize;
    let mut b = vec![0u8; n];
    r.read_exact(&mut b)?;
    String::from_utf8(b).map_err(|e| Error::input(format!("checkpoint name: {e}")))
}
