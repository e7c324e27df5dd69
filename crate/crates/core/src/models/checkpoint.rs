//! `VPCKPT1` checkpoint files.
//!
//! Layout (little-endian): magic `VPCKPT1`, version `u16`, spec record
//! (kind `u8`, visual_dim/audio_dim/embed_dim/hidden `u32`, head_bias `u8`),
//! param count `u32`, then per param: name length `u16`, UTF-8 name,
//! rows `u32`, cols `u32`, `rows*cols` raw `f64`.

use std::fs;
use std::path::Path;

use super::model::ModelState;
use super::spec::{ModelKind, ModelSpec};
use crate::binio::{put_f64s, ByteReader};
use crate::error::{Error, Result};
use crate::numcore::ParamSet;

pub const CHECKPOINT_MAGIC: &[u8; 7] = b"VPCKPT1";
pub const CHECKPOINT_VERSION: u16 = 1;

pub fn checkpoint_to_bytes(model: &ModelState) -> Vec<u8> {
    let spec = model.spec();
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.push(spec.kind.code());
    for d in [spec.visual_dim, spec.audio_dim, spec.embed_dim, spec.hidden] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.push(spec.head_bias as u8);
    let params = model.params();
    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for p in params {
        out.extend_from_slice(&(p.name.len() as u16).to_le_bytes());
        out.extend_from_slice(p.name.as_bytes());
        out.extend_from_slice(&(p.value.rows() as u32).to_le_bytes());
        out.extend_from_slice(&(p.value.cols() as u32).to_le_bytes());
        put_f64s(&mut out, p.value.as_slice());
    }
    out
}

pub fn checkpoint_from_bytes(bytes: &[u8]) -> Result<ModelState> {
    let corrupt = |e: Error| match e {
        Error::Truncated { offset, needed, .. } => Error::CorruptCheckpoint(format!(
            "truncated at byte offset {offset} ({needed} bytes missing)"
        )),
        other => other,
    };
    let mut r = ByteReader::new(bytes, "checkpoint");
    let magic = r.take(CHECKPOINT_MAGIC.len()).map_err(corrupt)?;
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::Format {
            what: "checkpoint",
            detail: format!("bad magic {:?}", String::from_utf8_lossy(magic)),
        });
    }
    let version = r.u16().map_err(corrupt)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format {
            what: "checkpoint",
            detail: format!("unsupported version {version}"),
        });
    }
    let code = r.u8().map_err(corrupt)?;
    let kind = ModelKind::from_code(code)
        .ok_or_else(|| Error::CorruptCheckpoint(format!("unknown model kind code {code}")))?;
    let mut dims = [0usize; 4];
    for d in &mut dims {
        *d = r.u32().map_err(corrupt)? as usize;
    }
    let head_bias = match r.u8().map_err(corrupt)? {
        0 => false,
        1 => true,
        b => return Err(Error::CorruptCheckpoint(format!("bad head_bias flag {b}"))),
    };
    let spec = ModelSpec {
        kind,
        visual_dim: dims[0],
        audio_dim: dims[1],
        embed_dim: dims[2],
        hidden: dims[3],
        head_bias,
    };
    spec.validate()
        .map_err(|e| Error::CorruptCheckpoint(format!("invalid spec record: {e}")))?;
    let mut model = ModelState::build(spec, 0)?;
    let count = r.u32().map_err(corrupt)? as usize;
    let mut params = model.params_mut();
    if count != params.len() {
        return Err(Error::CorruptCheckpoint(format!(
            "{count} params stored, {} expected for {kind}",
            params.len()
        )));
    }
    for p in params.iter_mut() {
        let name_len = r.u16().map_err(corrupt)? as usize;
        let name = std::str::from_utf8(r.take(name_len).map_err(corrupt)?)
            .map_err(|_| Error::CorruptCheckpoint("param name is not UTF-8".into()))?;
        if name != p.name {
            return Err(Error::CorruptCheckpoint(format!(
                "expected param `{}`, found `{name}`",
                p.name
            )));
        }
        let rows = r.u32().map_err(corrupt)? as usize;
        let cols = r.u32().map_err(corrupt)? as usize;
        if (rows, cols) != p.value.shape() {
            return Err(Error::CorruptCheckpoint(format!(
                "param `{name}` has shape {rows}x{cols}, expected {}x{}",
                p.value.rows(),
                p.value.cols()
            )));
        }
        let values = r.f64s(rows * cols).map_err(corrupt)?;
        p.value.as_mut_slice().copy_from_slice(&values);
    }
    if r.remaining() != 0 {
        return Err(Error::CorruptCheckpoint(format!(
            "{} trailing bytes after offset {}",
            r.remaining(),
            r.position()
        )));
    }
    drop(params);
    Ok(model)
}

pub fn save_checkpoint(model: &ModelState, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, checkpoint_to_bytes(model)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelState> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    checkpoint_from_bytes(&bytes)
}
