//! Binary model file, all integers little-endian:
//!
//! ```text
//! magic      8 bytes  "ACKBIRNN"
//! version    u32      1
//! width      u8       byte width of the training scalar (4 or 8)
//! config     u32 length + UTF-8 JSON of BirnnConfig
//! count      u32      number of tensors
//! tensor     u16 name length + UTF-8 name, u8 rank, rank x u64 dims,
//!            prod(dims) x f64 values in row-major order
//! checksum   32 bytes SHA-256 of every preceding byte
//! ```

use super::params::BirnnParams;
use super::BirnnConfig;
use crate::error::{Error, Result};
use crate::scalar::Real;
use sha2::{Digest, Sha256};
use std::path::Path;

pub const MAGIC: &[u8; 8] = b"ACKBIRNN";
pub const VERSION: u32 = 1;

pub fn to_bytes<T: Real>(params: &BirnnParams<T>, config: &BirnnConfig) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(T::WIDTH);
    let json = serde_json::to_vec(config).expect("config serializes");
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    let tensors = params.tensors();
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for t in &tensors {
        out.extend_from_slice(&(t.name.len() as u16).to_le_bytes());
        out.extend_from_slice(t.name.as_bytes());
        out.push(t.shape.len() as u8);
        for &d in &t.shape {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for v in t.data {
            out.extend_from_slice(&v.as_f64().to_le_bytes());
        }
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Corrupt(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Parses a model file, verifying checksum, config and every tensor shape.
pub fn from_bytes<T: Real>(bytes: &[u8]) -> Result<(BirnnParams<T>, BirnnConfig)> {
    if bytes.len() < MAGIC.len() + 32 || &bytes[..8] != MAGIC {
        return Err(Error::Corrupt("not a BiRNN model file".into()));
    }
    let (body, sum) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != sum {
        return Err(Error::Corrupt("checksum mismatch".into()));
    }
    let mut c = Cursor { buf: body, pos: 8 };
    let version = c.u32()?;
    if version != VERSION {
        return Err(Error::Corrupt(format!("unsupported version {version}")));
    }
    let width = c.u8()?;
    if width != 4 && width != 8 {
        return Err(Error::Corrupt(format!("bad scalar width {width}")));
    }
    let len = c.u32()? as usize;
    let config: BirnnConfig =
        serde_json::from_slice(c.take(len)?).map_err(|e| Error::Corrupt(format!("config: {e}")))?;
    config.validate().map_err(|e| Error::Corrupt(e.to_string()))?;
    let mut params = BirnnParams::<T>::zeros(&config);
    let expected: Vec<(String, Vec<usize>)> = params.tensors().into_iter().map(|t| (t.name, t.shape)).collect();
    let count = c.u32()? as usize;
    if count != expected.len() {
        return Err(Error::Corrupt(format!(
            "expected {} tensors, found {count}",
            expected.len()
        )));
    }
    for ((name, shape), dst) in expected.iter().zip(params.tensors_mut()) {
        let n = c.u16()? as usize;
        let got = std::str::from_utf8(c.take(n)?).map_err(|_| Error::Corrupt("tensor name is not UTF-8".into()))?;
        if got != name {
            return Err(Error::Corrupt(format!("expected tensor {name}, found {got}")));
        }
        let rank = c.u8()? as usize;
        let dims = (0..rank)
            .map(|_| c.u64().map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        if &dims != shape {
            return Err(Error::Corrupt(format!(
                "tensor {name} has shape {dims:?}, expected {shape:?}"
            )));
        }
        for v in dst.iter_mut() {
            let x = f64::from_le_bytes(c.take(8)?.try_into().unwrap());
            if !x.is_finite() {
                return Err(Error::Corrupt(format!("non-finite value in {name}")));
            }
            *v = T::of(x);
        }
    }
    if c.pos != body.len() {
        return Err(Error::Corrupt("trailing bytes".into()));
    }
    Ok((params, config))
}

pub fn save<T: Real>(path: &Path, params: &BirnnParams<T>, config: &BirnnConfig) -> Result<()> {
    std::fs::write(path, to_bytes(params, config)).map_err(|e| Error::io(path, e))
}

pub fn load<T: Real>(path: &Path) -> Result<(BirnnParams<T>, BirnnConfig)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes)
}
