//! `RMMDL1` model files: the six magic bytes, `u32` feature length, `u32`
//! payload length, then the model as JSON (kind, hyperparameters,
//! parameters, normalizer hash, config text). All integers little-endian.

use std::fs;
use std::path::Path;

use super::TrainedModel;
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 6] = b"RMMDL1";

impl TrainedModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let payload = serde_json::to_vec(self).expect("model serializes");
        let mut out = Vec::with_capacity(14 + payload.len());
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&payload);
        out
    }

    /// Refuses a model whose feature length differs from `expected_dim`.
    pub fn from_bytes(bytes: &[u8], expected_dim: Option<usize>, path: &Path) -> Result<Self> {
        if bytes.len() < 14 || &bytes[..6] != MODEL_MAGIC {
            return Err(Error::format(path, "not an RMMDL1 model"));
        }
        let dim = u32::from_le_bytes(bytes[6..10].try_into().expect("4 bytes")) as usize;
        let len = u32::from_le_bytes(bytes[10..14].try_into().expect("4 bytes")) as usize;
        if bytes.len() != 14 + len {
            return Err(Error::format(path, format!("payload holds {} bytes, header says {len}", bytes.len() - 14)));
        }
        if let Some(expected) = expected_dim {
            if expected != dim {
                return Err(Error::DimensionMismatch { expected, actual: dim });
            }
        }
        let model: TrainedModel = serde_json::from_slice(&bytes[14..]).map_err(|e| Error::format(path, e.to_string()))?;
        if model.dim != dim {
            return Err(Error::format(path, "header and payload disagree on the feature length"));
        }
        Ok(model)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path, expected_dim: Option<usize>) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        TrainedModel::from_bytes(&bytes, expected_dim, path)
    }
}
