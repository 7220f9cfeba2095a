//! Model file container.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "SLB1"
//! 4       4     format version, u32 little-endian
//! 8       1     model kind (0 = rf, 1 = mlp)
//! 9       8     payload length, u64 little-endian
//! 17      n     payload (bincode, fixed-width little-endian integers)
//! 17+n    32    SHA-256 of bytes [0, 17+n)
//! ```

use std::fs;
use std::path::Path;

use bincode::Options;
use sha2::{Digest, Sha256};

use super::{ModelKind, TrainedModel};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SLB1";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 17;
const CHECKSUM_LEN: usize = 32;

fn codec() -> impl Options {
    bincode::DefaultOptions::new()
        .with_fixint_encoding()
        .with_little_endian()
}

fn kind_byte(kind: ModelKind) -> u8 {
    match kind {
        ModelKind::Rf => 0,
        ModelKind::Mlp => 1,
    }
}

pub fn encode_model(model: &TrainedModel) -> Result<Vec<u8>> {
    let payload = codec()
        .serialize(model)
        .map_err(|e| Error::ModelDecode(e.to_string()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + CHECKSUM_LEN);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(kind_byte(model.kind()));
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload);
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    Ok(out)
}

pub fn decode_model(bytes: &[u8]) -> Result<TrainedModel> {
    if bytes.len() < 4 {
        return Err(Error::Checksum);
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < 8 {
        return Err(Error::Checksum);
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    if bytes.len() < HEADER_LEN + CHECKSUM_LEN {
        return Err(Error::Checksum);
    }
    let payload_len = u64::from_le_bytes(bytes[9..17].try_into().expect("8 bytes"));
    if payload_len != (bytes.len() - HEADER_LEN - CHECKSUM_LEN) as u64 {
        return Err(Error::Checksum);
    }
    let body_end = bytes.len() - CHECKSUM_LEN;
    if Sha256::digest(&bytes[..body_end]).as_slice() != &bytes[body_end..] {
        return Err(Error::Checksum);
    }
    let model: TrainedModel = codec()
        .with_limit(payload_len)
        .deserialize(&bytes[HEADER_LEN..body_end])
        .map_err(|e| Error::ModelDecode(e.to_string()))?;
    if kind_byte(model.kind()) != bytes[8] {
        return Err(Error::ModelDecode(
            "header kind does not match payload".into(),
        ));
    }
    Ok(model)
}

pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    let bytes = encode_model(model)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}

/// Pretty JSON rendering of the full model, for inspection.
pub fn model_to_json(model: &TrainedModel) -> String {
    serde_json::to_string_pretty(model).expect("model serializes to JSON")
}
