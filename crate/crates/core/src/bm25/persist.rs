//! On-disk index format, little-endian:
//!
//! ```text
//! magic "SHFTIDX1" | u32 version
//! u64 doc_count, then per doc: u32 id_len, id bytes, u32 length
//! u64 term_count, then per term (sorted): u32 term_len, term bytes,
//!     u32 posting_count, posting_count x (u32 doc, u32 tf)
//! ```

use std::collections::HashMap;
use std::path::Path;

use super::{Bm25Error, InvertedIndex, Posting};

pub const INDEX_MAGIC: &[u8; 8] = b"SHFTIDX1";
pub const INDEX_VERSION: u32 = 1;

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], Bm25Error> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Bm25Error::CorruptIndex("truncated".into()))?;
        let out = &self.bytes[self.at..end];
        self.at = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, Bm25Error> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, Bm25Error> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String, Bm25Error> {
        let len = self.u32()? as usize;
        String::from_utf8(self.take(len)?.to_vec())
            .map_err(|_| Bm25Error::CorruptIndex("invalid utf-8".into()))
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

impl InvertedIndex {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(INDEX_MAGIC);
        out.extend_from_slice(&INDEX_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.doc_ids.len() as u64).to_le_bytes());
        for (id, len) in self.doc_ids.iter().zip(&self.doc_lengths) {
            put_str(&mut out, id);
            out.extend_from_slice(&len.to_le_bytes());
        }
        let mut terms: Vec<&String> = self.postings.keys().collect();
        terms.sort_unstable();
        out.extend_from_slice(&(terms.len() as u64).to_le_bytes());
        for term in terms {
            put_str(&mut out, term);
            let list = &self.postings[term];
            out.extend_from_slice(&(list.len() as u32).to_le_bytes());
            for p in list {
                out.extend_from_slice(&p.doc.to_le_bytes());
                out.extend_from_slice(&p.tf.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, Bm25Error> {
        let mut r = Reader { bytes, at: 0 };
        if r.take(8)? != INDEX_MAGIC {
            return Err(Bm25Error::CorruptIndex("bad magic".into()));
        }
        let version = r.u32()?;
        if version != INDEX_VERSION {
            return Err(Bm25Error::CorruptIndex(format!(
                "unsupported version {version}"
            )));
        }
        let doc_count = r.u64()? as usize;
        let mut doc_ids = Vec::with_capacity(doc_count.min(1 << 24));
        let mut doc_lengths = Vec::with_capacity(doc_count.min(1 << 24));
        for _ in 0..doc_count {
            doc_ids.push(r.string()?);
            doc_lengths.push(r.u32()?);
        }
        let term_count = r.u64()? as usize;
        let mut postings = HashMap::with_capacity(term_count.min(1 << 24));
        for _ in 0..term_count {
            let term = r.string()?;
            let n = r.u32()? as usize;
            let mut list = Vec::with_capacity(n.min(1 << 24));
            for _ in 0..n {
                let doc = r.u32()?;
                let tf = r.u32()?;
                if doc as usize >= doc_count || list.last().is_some_and(|p: &Posting| p.doc >= doc)
                {
                    return Err(Bm25Error::CorruptIndex(format!("bad posting for {term:?}")));
                }
                list.push(Posting { doc, tf });
            }
            postings.insert(term, list);
        }
        if r.at != bytes.len() {
            return Err(Bm25Error::CorruptIndex("trailing bytes".into()));
        }
        Ok(Self::from_parts(postings, doc_lengths, doc_ids))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), Bm25Error> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|source| Bm25Error::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, Bm25Error> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|source| Bm25Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}
