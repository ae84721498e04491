//! Versioned parameter container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic      8 bytes  "NOVRECPM"
//! version    u32      FORMAT_VERSION
//! header_len u64
//! header     header_len bytes of JSON: config, vocabulary sizes, and
//!            the name and shape of each tensor in storage order
//! values     every tensor's entries as f64, in header order
//! ```
//!
//! Values are stored as raw IEEE-754 bits, so `f64` parameters round-trip
//! exactly (and `f32` ones too, since the widening is lossless).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::params::{ModelParams, PARAM_NAMES};
use super::ModelConfig;
use crate::numcore::Tensor;
use crate::{Error, Real, Result};

pub const MAGIC: &[u8; 8] = b"NOVRECPM";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    token_table_size: usize,
    tag_count: usize,
    tensors: Vec<TensorHeader>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TensorHeader {
    name: String,
    shape: Vec<usize>,
}

pub fn save_params<T: Real>(params: &ModelParams<T>, mut w: impl Write) -> Result<()> {
    let header = Header {
        config: params.config.clone(),
        token_table_size: params.token_rows(),
        tag_count: params.tag_count(),
        tensors: PARAM_NAMES
            .iter()
            .zip(params.tensors())
            .map(|(name, t)| TensorHeader {
                name: name.to_string(),
                shape: t.shape().to_vec(),
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header)?;
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    for t in params.tensors() {
        for &v in t.values() {
            w.write_all(&v.to_f64_lossy().to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => {
            Error::Format(format!("truncated while reading {what}"))
        }
        _ => Error::Io(e),
    })
}

pub fn load_params<T: Real>(mut r: impl Read) -> Result<ModelParams<T>> {
    let mut magic = [0u8; 8];
    read_exact(&mut r, &mut magic, "magic")?;
    if &magic != MAGIC {
        return Err(Error::Format("not a parameter file (bad magic)".into()));
    }
    let mut word = [0u8; 4];
    read_exact(&mut r, &mut word, "version")?;
    let version = u32::from_le_bytes(word);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {version} (expected {FORMAT_VERSION})"
        )));
    }
    let mut len = [0u8; 8];
    read_exact(&mut r, &mut len, "header length")?;
    let len = usize::try_from(u64::from_le_bytes(len))
        .ok()
        .filter(|&l| l <= 1 << 24)
        .ok_or_else(|| Error::Format("implausible header length".into()))?;
    let mut json = vec![0u8; len];
    read_exact(&mut r, &mut json, "header")?;
    let header: Header =
        serde_json::from_slice(&json).map_err(|e| Error::Format(format!("bad header: {e}")))?;

    let names: Vec<&str> = header.tensors.iter().map(|t| t.name.as_str()).collect();
    if names != PARAM_NAMES {
        return Err(Error::Format(format!("unexpected tensor list {names:?}")));
    }
    let mut tensors = Vec::with_capacity(header.tensors.len());
    for th in &header.tensors {
        let n: usize = th.shape.iter().product();
        let mut bytes = vec![0u8; n * 8];
        read_exact(&mut r, &mut bytes, &th.name)?;
        let values = bytes
            .chunks_exact(8)
            .map(|c| T::from_f64_lossy(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
            .collect();
        tensors.push(Tensor::new(th.shape.clone(), values)?);
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after parameters".into()));
    }
    let params = ModelParams::from_tensors(header.config, tensors)?;
    if params.token_rows() != header.token_table_size || params.tag_count() != header.tag_count {
        return Err(Error::Format(
            "vocabulary sizes disagree with tensor shapes".into(),
        ));
    }
    Ok(params)
}
