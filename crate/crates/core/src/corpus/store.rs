use std::collections::HashMap;
use std::path::Path;

use super::{numbered_lines, read_to_string, CorpusError};

/// Ordered `id -> text` store, as read from a two-column TSV file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TextStore {
    entries: Vec<(String, String)>,
    index: HashMap<String, usize>,
}

/// Queries, in file order.
pub type QuerySet = TextStore;
/// Passages, in file order.
pub type Collection = TextStore;

impl TextStore {
    /// Builds a store, rejecting empty or repeated ids.
    pub fn from_entries<I>(entries: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut store = Self::default();
        for (id, text) in entries {
            store.push(id, text)?;
        }
        Ok(store)
    }

    fn push(&mut self, id: String, text: String) -> Result<(), CorpusError> {
        if id.is_empty() {
            return Err(CorpusError::malformed(self.entries.len() + 1, "empty id"));
        }
        if self.index.contains_key(&id) {
            return Err(CorpusError::DuplicateId(id));
        }
        self.index.insert(id.clone(), self.entries.len());
        self.entries.push((id, text));
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let mut store = Self::default();
        for (line_no, line) in numbered_lines(text) {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 2 {
                return Err(CorpusError::malformed(
                    line_no,
                    format!("expected 2 tab-separated fields, found {}", fields.len()),
                ));
            }
            if fields[0].is_empty() {
                return Err(CorpusError::malformed(line_no, "empty id"));
            }
            store.push(fields[0].to_owned(), fields[1].to_owned())?;
        }
        Ok(store)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&str> {
        self.index.get(id).map(|&i| self.entries[i].1.as_str())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Position of `id` in file order.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&str, &str)> {
        self.entries.iter().map(|(i, t)| (i.as_str(), t.as_str()))
    }

    pub fn ids(&self) -> impl ExactSizeIterator<Item = &str> {
        self.entries.iter().map(|(i, _)| i.as_str())
    }

    /// Serializes back to the TSV format.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (id, text) in &self.entries {
            out.push_str(id);
            out.push('\t');
            out.push_str(text);
            out.push('\n');
        }
        out
    }
}

pub fn load_queries(path: impl AsRef<Path>) -> Result<QuerySet, CorpusError> {
    TextStore::parse(&read_to_string(path.as_ref())?)
}

pub fn load_collection(path: impl AsRef<Path>) -> Result<Collection, CorpusError> {
    TextStore::parse(&read_to_string(path.as_ref())?)
}
