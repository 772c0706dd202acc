//! Self-describing checkpoint container.
//!
//! Layout: 8-byte magic `MUSAECKP`, `u32` LE format version, `u64` LE
//! manifest length, the JSON manifest, then every tensor as little-endian
//! `f32` in manifest order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::Model;
use super::params::ParamTree;
use super::ModelConfig;
use crate::error::CheckpointError;
use crate::scalar::Scalar;

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"MUSAECKP";

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
    offset: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    meta: serde_json::Value,
    tensors: Vec<TensorEntry>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Checkpoint {
    /// Free-form metadata; `meta["model"]` holds the [`ModelConfig`].
    pub meta: serde_json::Map<String, serde_json::Value>,
    pub tensors: Vec<NamedTensor>,
}

impl Checkpoint {
    pub fn push_tree<S: Scalar, T: ParamTree<S>>(&mut self, prefix: &str, tree: &T) {
        for (name, t) in tree.tensors() {
            self.tensors.push(NamedTensor {
                name: format!("{prefix}/{name}"),
                shape: t.shape().to_vec(),
                data: t.iter().map(|x| x.f64() as f32).collect(),
            });
        }
    }

    /// Fills `tree` from tensors saved under `prefix`, checking names and shapes.
    pub fn load_tree<S: Scalar, T: ParamTree<S>>(&self, prefix: &str, tree: &mut T) -> Result<(), CheckpointError> {
        for (name, mut t) in tree.tensors_mut() {
            let full = format!("{prefix}/{name}");
            let saved = self
                .tensor(&full)
                .ok_or_else(|| CheckpointError::Tensor { name: full.clone(), reason: "missing".into() })?;
            if saved.shape != t.shape() {
                return Err(CheckpointError::Tensor {
                    name: full,
                    reason: format!("shape {:?}, expected {:?}", saved.shape, t.shape()),
                });
            }
            for (d, &s) in t.iter_mut().zip(&saved.data) {
                *d = S::of(s as f64);
            }
        }
        Ok(())
    }

    pub fn tensor(&self, name: &str) -> Option<&NamedTensor> {
        self.tensors.iter().find(|t| t.name == name)
    }

    pub fn has_prefix(&self, prefix: &str) -> bool {
        let p = format!("{prefix}/");
        self.tensors.iter().any(|t| t.name.starts_with(&p))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut entries = Vec::with_capacity(self.tensors.len());
        let mut offset = 0;
        for t in &self.tensors {
            entries.push(TensorEntry { name: t.name.clone(), shape: t.shape.clone(), offset });
            offset += t.data.len();
        }
        let manifest = Manifest {
            format_version: CHECKPOINT_VERSION,
            meta: serde_json::Value::Object(self.meta.clone()),
            tensors: entries,
        };
        let json = serde_json::to_vec(&manifest).expect("manifest serializes");
        let mut out = Vec::with_capacity(20 + json.len() + offset * 4);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for t in &self.tensors {
            for v in &t.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        if bytes.len() < 20 || &bytes[..8] != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version(version));
        }
        let len = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
        let json =
            bytes.get(20..20 + len).ok_or_else(|| CheckpointError::Truncated(format!("manifest of {len} bytes")))?;
        let manifest: Manifest = serde_json::from_slice(json)?;
        let data = &bytes[20 + len..];
        let meta = match manifest.meta {
            serde_json::Value::Object(m) => m,
            _ => Default::default(),
        };
        let mut tensors = Vec::with_capacity(manifest.tensors.len());
        for e in manifest.tensors {
            let n: usize = e.shape.iter().product();
            let raw = data
                .get(e.offset * 4..(e.offset + n) * 4)
                .ok_or_else(|| CheckpointError::Truncated(format!("tensor {}", e.name)))?;
            let values = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
            tensors.push(NamedTensor { name: e.name, shape: e.shape, data: values });
        }
        Ok(Self { meta, tensors })
    }

    /// Writes via a temporary file and rename.
    pub fn write(&self, path: &Path) -> Result<(), CheckpointError> {
        let tmp = path.with_extension("tmp");
        let io = |source| CheckpointError::Io { path: path.to_path_buf(), source };
        fs::write(&tmp, self.to_bytes()).map_err(io)?;
        fs::rename(&tmp, path).map_err(io)
    }

    pub fn read(path: &Path) -> Result<Self, CheckpointError> {
        let bytes = fs::read(path).map_err(|source| CheckpointError::Io { path: path.to_path_buf(), source })?;
        Self::from_bytes(&bytes)
    }

    pub fn model_config(&self) -> Result<ModelConfig, CheckpointError> {
        let v = self.meta.get("model").cloned().unwrap_or(serde_json::Value::Null);
        Ok(serde_json::from_value(v)?)
    }

    pub fn from_model<S: Scalar>(model: &Model<S>) -> Self {
        let mut ck = Checkpoint::default();
        ck.meta.insert("model".into(), serde_json::to_value(&model.config).expect("config serializes"));
        ck.push_tree("model", model);
        ck
    }

    pub fn load_model<S: Scalar>(&self) -> Result<Model<S>, CheckpointError> {
        let mut model = Model::<S>::init(self.model_config()?, 0)?;
        self.load_tree("model", &mut model)?;
        Ok(model)
    }
}
