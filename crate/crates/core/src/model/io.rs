//! Versioned binary parameter files.
//!
//! Layout (all integers little-endian `u32`):
//!
//! ```text
//! magic            8 bytes  "ANGHEAD\0"
//! version          u32      currently 1
//! codec label      u32 length + UTF-8 (e.g. "cgd", "da-naive")
//! extractor        u32 length + UTF-8 (e.g. "hog:size=64,cells=4,bins=36")
//! tensor count     u32      4 (w1, b1, w2, b2)
//! shape table      per tensor: u32 rows, u32 cols
//! data             every tensor in order, row-major little-endian f32
//! ```

use super::features::FeatureExtractor;
use super::mlp::HeadParams;
use crate::error::{Error, Result};
use std::path::Path;

pub const PARAMS_MAGIC: &[u8; 8] = b"ANGHEAD\0";
pub const PARAMS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ParamsFile {
    pub codec_label: String,
    pub extractor: FeatureExtractor,
    pub params: HeadParams,
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

pub fn encode_params(file: &ParamsFile) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(PARAMS_MAGIC);
    put_u32(&mut out, PARAMS_VERSION);
    put_str(&mut out, &file.codec_label);
    put_str(&mut out, &file.extractor.to_string());
    let p = &file.params;
    put_u32(&mut out, 4);
    for (rows, cols) in p.shapes() {
        put_u32(&mut out, rows as u32);
        put_u32(&mut out, cols as u32);
    }
    for t in p.tensors() {
        for v in t {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| malformed("unexpected end of file"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| malformed("non-UTF-8 string"))
    }
}

fn malformed(detail: impl Into<String>) -> Error {
    Error::Format {
        what: "parameter file",
        detail: detail.into(),
    }
}

pub fn decode_params(bytes: &[u8]) -> Result<ParamsFile> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(8)? != PARAMS_MAGIC {
        return Err(malformed("bad magic"));
    }
    let version = c.u32()?;
    if version != PARAMS_VERSION {
        return Err(malformed(format!(
            "unsupported version {version} (expected {PARAMS_VERSION})"
        )));
    }
    let codec_label = c.string()?;
    let extractor: FeatureExtractor = c.string()?.parse()?;
    if c.u32()? != 4 {
        return Err(malformed("expected 4 tensors"));
    }
    let mut shapes = [(0usize, 0usize); 4];
    for s in &mut shapes {
        *s = (c.u32()? as usize, c.u32()? as usize);
    }
    let [(hidden, input_dim), (b1r, b1c), (output_dim, h2), (b2r, b2c)] = shapes;
    if (b1r, b1c) != (hidden, 1) || h2 != hidden || (b2r, b2c) != (output_dim, 1) {
        return Err(malformed(format!("inconsistent shape table {shapes:?}")));
    }
    if input_dim != extractor.out_dim() {
        return Err(Error::shape("parameter file input width", extractor.out_dim(), input_dim));
    }
    let mut params = HeadParams::zeros(input_dim, hidden, output_dim);
    for t in params.tensors_mut() {
        for v in t.iter_mut() {
            let b = c.take(4)?;
            *v = f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64;
        }
    }
    if c.pos != bytes.len() {
        return Err(malformed("trailing bytes"));
    }
    Ok(ParamsFile {
        codec_label,
        extractor,
        params,
    })
}

pub fn write_params(file: &ParamsFile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_params(file)).map_err(|e| Error::io(path, e))
}

pub fn read_params(path: impl AsRef<Path>) -> Result<ParamsFile> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_params(&bytes)
}
