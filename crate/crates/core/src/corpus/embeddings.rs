//! Binary query embeddings.
//!
//! Layout, all little-endian: magic `SHFTEMB1` (8 bytes), `u32` version = 1,
//! `u32` dim, `u64` count, then `count * dim` `f32` values row-major. Row ids
//! live in a companion text file, one id per line.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use super::{numbered_lines, read_to_string, CorpusError};

pub const EMBEDDING_MAGIC: &[u8; 8] = b"SHFTEMB1";
pub const EMBEDDING_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 4 + 8;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    dim: usize,
    ids: Vec<String>,
    data: Vec<f32>,
    index: HashMap<String, usize>,
}

impl EmbeddingSet {
    pub fn new(dim: usize, ids: Vec<String>, data: Vec<f32>) -> Result<Self, CorpusError> {
        if dim == 0 {
            return Err(CorpusError::ZeroDimension);
        }
        let expected = (ids.len() * dim) as u64;
        if data.len() as u64 != expected {
            return Err(CorpusError::SizeMismatch {
                expected: expected * 4,
                actual: data.len() as u64 * 4,
            });
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateId(id.clone()));
            }
        }
        Ok(Self {
            dim,
            ids,
            data,
            index,
        })
    }

    pub fn from_bytes(bytes: &[u8], ids_text: &str) -> Result<Self, CorpusError> {
        if bytes.len() < HEADER_LEN || &bytes[..8] != EMBEDDING_MAGIC {
            return Err(CorpusError::BadMagic);
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != EMBEDDING_VERSION {
            return Err(CorpusError::UnsupportedVersion(version));
        }
        let dim = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as u64;
        let count = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
        if dim == 0 {
            return Err(CorpusError::ZeroDimension);
        }
        let payload = &bytes[HEADER_LEN..];
        let expected = count.checked_mul(dim).and_then(|n| n.checked_mul(4));
        if expected != Some(payload.len() as u64) {
            return Err(CorpusError::SizeMismatch {
                expected: expected.unwrap_or(u64::MAX),
                actual: payload.len() as u64,
            });
        }
        let ids: Vec<String> = numbered_lines(ids_text)
            .map(|(_, l)| l.to_owned())
            .collect();
        if ids.len() as u64 != count {
            return Err(CorpusError::IdCountMismatch {
                expected: count,
                actual: ids.len() as u64,
            });
        }
        let data = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(dim as usize, ids, data)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.data.len() * 4);
        out.extend_from_slice(EMBEDDING_MAGIC);
        out.extend_from_slice(&EMBEDDING_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.ids.len() as u64).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn ids_text(&self) -> String {
        let mut s = String::new();
        for id in &self.ids {
            s.push_str(id);
            s.push('\n');
        }
        s
    }

    /// The `.ids` file conventionally paired with an embedding file.
    pub fn ids_path_for(bin_path: &Path) -> PathBuf {
        bin_path.with_extension("ids")
    }

    pub fn load(
        bin_path: impl AsRef<Path>,
        ids_path: impl AsRef<Path>,
    ) -> Result<Self, CorpusError> {
        let bin_path = bin_path.as_ref();
        let bytes = std::fs::read(bin_path).map_err(|e| CorpusError::io(bin_path, e))?;
        Self::from_bytes(&bytes, &read_to_string(ids_path.as_ref())?)
    }

    pub fn write(
        &self,
        bin_path: impl AsRef<Path>,
        ids_path: impl AsRef<Path>,
    ) -> Result<(), CorpusError> {
        let (bin_path, ids_path) = (bin_path.as_ref(), ids_path.as_ref());
        std::fs::write(bin_path, self.to_bytes()).map_err(|e| CorpusError::io(bin_path, e))?;
        std::fs::write(ids_path, self.ids_text()).map_err(|e| CorpusError::io(ids_path, e))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Row-major `len * dim` values.
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_by_id(&self, id: &str) -> Option<&[f32]> {
        self.position(id).map(|i| self.row(i))
    }
}

pub fn load_embeddings(
    bin_path: impl AsRef<Path>,
    ids_path: impl AsRef<Path>,
) -> Result<EmbeddingSet, CorpusError> {
    EmbeddingSet::load(bin_path, ids_path)
}
