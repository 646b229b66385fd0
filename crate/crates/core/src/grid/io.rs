//! JSON container for grid sets and fields.
//!
//! ```text
//! { "version": 1, "kind": "grid_set" | "scalar_field",
//!   "d": 2, "shape": [n0, n1], "h": 0.0039, "origin": [0.0, 0.0],
//!   "encoding": "rle-bits" | "rle-f64", "payload": "<base64>" }
//! ```
//!
//! `rle-bits`: run lengths of alternating false/true cells, starting with a
//! (possibly empty) false run, each as an unsigned LEB128 varint.
//! `rle-f64`: repeated `(value: f64 little-endian, run length: varint)`.
//! Cells are in flat-index order (axis 0 fastest).

use std::io::Write;
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{GridGeometry, GridSet, ScalarField};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Container {
    version: u32,
    kind: String,
    d: usize,
    shape: Vec<usize>,
    h: f64,
    origin: Vec<f64>,
    encoding: String,
    payload: String,
}

/// Either kind of grid file.
#[derive(Clone, Debug, PartialEq)]
pub enum GridFile {
    Set(GridSet),
    Field(ScalarField),
}

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn get_varint(bytes: &[u8], pos: &mut usize) -> Result<u64> {
    let mut v = 0u64;
    for shift in (0..64).step_by(7) {
        let b = *bytes.get(*pos).ok_or_else(|| Error::Format("truncated varint".into()))?;
        *pos += 1;
        v |= u64::from(b & 0x7f) << shift;
        if b & 0x80 == 0 {
            return Ok(v);
        }
    }
    Err(Error::Format("varint too long".into()))
}

fn header(geometry: &GridGeometry, kind: &str, encoding: &str, payload: Vec<u8>) -> Container {
    Container {
        version: FORMAT_VERSION,
        kind: kind.into(),
        d: geometry.dim(),
        shape: geometry.shape().to_vec(),
        h: geometry.h(),
        origin: geometry.origin().to_vec(),
        encoding: encoding.into(),
        payload: STANDARD.encode(payload),
    }
}

fn encode_set(set: &GridSet) -> Vec<u8> {
    let mut out = Vec::new();
    let mut current = false;
    let mut run = 0u64;
    for &b in set.mask() {
        if b == current {
            run += 1;
        } else {
            put_varint(&mut out, run);
            current = b;
            run = 1;
        }
    }
    put_varint(&mut out, run);
    out
}

fn encode_field(field: &ScalarField) -> Vec<u8> {
    let mut out = Vec::new();
    let values = field.values();
    let mut i = 0;
    while i < values.len() {
        let bits = values[i].to_bits();
        let mut j = i + 1;
        while j < values.len() && values[j].to_bits() == bits {
            j += 1;
        }
        out.extend_from_slice(&bits.to_le_bytes());
        put_varint(&mut out, (j - i) as u64);
        i = j;
    }
    out
}

pub fn set_to_json(set: &GridSet) -> Result<String> {
    Ok(serde_json::to_string(&header(set.geometry(), "grid_set", "rle-bits", encode_set(set)))?)
}

pub fn field_to_json(field: &ScalarField) -> Result<String> {
    Ok(serde_json::to_string(&header(
        field.geometry(),
        "scalar_field",
        "rle-f64",
        encode_field(field),
    ))?)
}

pub fn from_json(text: &str) -> Result<GridFile> {
    let c: Container = serde_json::from_str(text)?;
    if c.version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {}", c.version)));
    }
    if c.shape.len() != c.d {
        return Err(Error::Format("shape length differs from d".into()));
    }
    let geometry = GridGeometry::new(&c.shape, c.h, &c.origin)?;
    let bytes = STANDARD
        .decode(c.payload.as_bytes())
        .map_err(|e| Error::Format(format!("payload: {e}")))?;
    let n = geometry.len();
    let mut pos = 0;
    match (c.kind.as_str(), c.encoding.as_str()) {
        ("grid_set", "rle-bits") => {
            let mut mask = Vec::with_capacity(n);
            let mut value = false;
            while pos < bytes.len() {
                let run = get_varint(&bytes, &mut pos)? as usize;
                if mask.len() + run > n {
                    return Err(Error::Format("runs exceed cell count".into()));
                }
                mask.extend(std::iter::repeat_n(value, run));
                value = !value;
            }
            if mask.len() != n {
                return Err(Error::Format("runs do not cover the grid".into()));
            }
            Ok(GridFile::Set(GridSet::from_mask(&geometry, mask)?))
        }
        ("scalar_field", "rle-f64") => {
            let mut values = Vec::with_capacity(n);
            while pos < bytes.len() {
                let raw = bytes
                    .get(pos..pos + 8)
                    .ok_or_else(|| Error::Format("truncated value".into()))?;
                pos += 8;
                let v = f64::from_bits(u64::from_le_bytes(raw.try_into().expect("8 bytes")));
                let run = get_varint(&bytes, &mut pos)? as usize;
                if values.len() + run > n {
                    return Err(Error::Format("runs exceed cell count".into()));
                }
                values.extend(std::iter::repeat_n(v, run));
            }
            if values.len() != n {
                return Err(Error::Format("runs do not cover the grid".into()));
            }
            Ok(GridFile::Field(ScalarField::new(&geometry, values)?))
        }
        (k, e) => Err(Error::Format(format!("unknown kind/encoding {k}/{e}"))),
    }
}

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_set(path: &Path, set: &GridSet) -> Result<()> {
    write_atomic(path, set_to_json(set)?.as_bytes())
}

pub fn write_field(path: &Path, field: &ScalarField) -> Result<()> {
    write_atomic(path, field_to_json(field)?.as_bytes())
}

pub fn read(path: &Path) -> Result<GridFile> {
    from_json(&std::fs::read_to_string(path)?)
}
