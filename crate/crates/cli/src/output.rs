use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliResult;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// The parts of a run that determine its outputs: the subcommand and its
/// arguments, minus the output directory and the thread count.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub value: Value,
    pub sha256: String,
}

impl ResolvedConfig {
    pub fn new<A: Serialize>(command: &str, args: &A) -> Self {
        let mut value = serde_json::to_value(args).expect("arguments serialize");
        if let Value::Object(map) = &mut value {
            map.remove("out");
        }
        let value = json!({ "command": command, "args": value });
        let sha256 = sha256_hex(value.to_string().as_bytes());
        ResolvedConfig { value, sha256 }
    }
}

/// Writes files under one directory and finishes with `provenance.json`,
/// which lists the config, its hash, input hashes and output hashes.
pub struct OutputDir {
    root: PathBuf,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutputDir {
            root: root.to_owned(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        })
    }

    /// Records an input file's hash under the path it was given as.
    pub fn record_input(&mut self, path: &Path) -> CliResult<()> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs
            .insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }

    /// `name` is relative to the output directory and may contain `/`.
    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> CliResult<()> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        let bytes = contents.as_ref();
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.insert(name.to_owned(), sha256_hex(bytes));
        Ok(())
    }

    pub fn finish(self, config: &ResolvedConfig) -> CliResult<()> {
        let provenance = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "config": config.value,
            "config_sha256": config.sha256,
            "inputs": self.inputs,
            "outputs": self.outputs,
        });
        let mut text = serde_json::to_string_pretty(&provenance)?;
        text.push('\n');
        let path = self.root.join("provenance.json");
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
