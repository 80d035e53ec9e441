use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ShiftError;
use crate::corpus::QuerySet;
use crate::seed;

/// A named group of queries and its train/test split. Before splitting, all
/// members sit in `train` and `test` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub name: String,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

impl Cluster {
    pub fn unsplit(name: impl Into<String>, members: Vec<String>) -> Self {
        Self {
            name: name.into(),
            train: members,
            test: Vec::new(),
        }
    }

    pub fn members(&self) -> impl Iterator<Item = &str> {
        self.train.iter().chain(&self.test).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Serialized as `{"shift", "seed", "params", "clusters"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftManifest {
    pub shift: String,
    pub seed: u64,
    pub params: BTreeMap<String, Value>,
    pub clusters: Vec<Cluster>,
}

impl ShiftManifest {
    pub fn new(shift: impl Into<String>, seed: u64) -> Self {
        Self {
            shift: shift.into(),
            seed,
            params: BTreeMap::new(),
            clusters: Vec::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_owned(), value.into());
        self
    }

    pub fn cluster(&self, name: &str) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.name == name)
    }

    pub fn cluster_names(&self) -> Vec<&str> {
        self.clusters.iter().map(|c| c.name.as_str()).collect()
    }

    /// Appends a message to the `warnings` param.
    pub fn warn(&mut self, message: impl Into<String>) {
        let entry = self
            .params
            .entry("warnings".to_owned())
            .or_insert_with(|| Value::Array(Vec::new()));
        if let Value::Array(items) = entry {
            items.push(Value::String(message.into()));
        }
    }

    /// Checks names, disjointness of every id list, and, when given, that
    /// every id exists in the query set.
    pub fn validate(&self, queries: Option<&QuerySet>) -> Result<(), ShiftError> {
        let mut names = HashSet::new();
        let mut seen = HashSet::new();
        for c in &self.clusters {
            if c.name.is_empty() || !names.insert(c.name.as_str()) {
                return Err(ShiftError::BadClusterName(c.name.clone()));
            }
            for id in c.members() {
                if !seen.insert(id) {
                    return Err(ShiftError::OverlappingClusters(id.to_owned()));
                }
                if let Some(q) = queries {
                    if !q.contains(id) {
                        return Err(ShiftError::UnknownQuery(id.to_owned()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Pretty JSON with a trailing newline; key order is fixed.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ShiftError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ShiftError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ShiftError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ShiftError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| ShiftError::Io {
            path: path.to_owned(),
            source,
        })
    }

    /// Writes `<name>.train.ids` and `<name>.test.ids` (one id per line) into
    /// `dir`, returning the written paths.
    pub fn write_id_files(
        &self,
        dir: impl AsRef<Path>,
    ) -> Result<Vec<std::path::PathBuf>, ShiftError> {
        let dir = dir.as_ref();
        let mut written = Vec::new();
        for c in &self.clusters {
            for (split, ids) in [("train", &c.train), ("test", &c.test)] {
                let path = dir.join(format!("{}.{split}.ids", c.name));
                let mut body = String::new();
                for id in ids {
                    body.push_str(id);
                    body.push('\n');
                }
                std::fs::write(&path, body).map_err(|source| ShiftError::Io {
                    path: path.clone(),
                    source,
                })?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

/// Splits every cluster into train and test.
///
/// `test_sizes` holds one size per cluster, or a single size used for all.
/// Each cluster's ids are sorted, shuffled with Fisher–Yates from a generator
/// seeded by `derive_seed(seed, cluster name)`, and the first `test_size`
/// become the test set. Both lists are emitted sorted.
pub fn make_train_test(
    manifest: &ShiftManifest,
    test_sizes: &[usize],
    seed: u64,
) -> Result<ShiftManifest, ShiftError> {
    let n = manifest.clusters.len();
    if !(test_sizes.len() == 1 || test_sizes.len() == n) {
        return Err(ShiftError::InvalidParameter(format!(
            "{} test sizes given for {n} clusters",
            test_sizes.len()
        )));
    }
    let mut out = manifest.clone();
    out.seed = seed;
    out.params
        .insert("test_sizes".into(), serde_json::json!(test_sizes));
    for (i, cluster) in out.clusters.iter_mut().enumerate() {
        let test_size = test_sizes[if test_sizes.len() == 1 { 0 } else { i }];
        let mut ids: Vec<String> = cluster.members().map(str::to_owned).collect();
        if test_size > ids.len() {
            return Err(ShiftError::TestSizeTooLarge {
                cluster: cluster.name.clone(),
                size: ids.len(),
                test_size,
            });
        }
        ids.sort_unstable();
        let mut rng = seed::rng(seed::derive_seed(seed, &cluster.name));
        for j in (1..ids.len()).rev() {
            let r = rng.random_range(0..=j);
            ids.swap(j, r);
        }
        let mut train = ids.split_off(test_size);
        let mut test = ids;
        train.sort_unstable();
        test.sort_unstable();
        cluster.train = train;
        cluster.test = test;
    }
    Ok(out)
}
