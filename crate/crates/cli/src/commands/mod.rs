pub mod evaluate;
pub mod retrieval;
pub mod shifts;

use std::fs;
use std::path::Path;

use qshift::corpus::{load_embeddings, EmbeddingSet};
use qshift::shift::ShiftManifest;

use crate::error::{invalid, CliResult, OrInvalid};

pub fn require_file(path: &Path, flag: &str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(invalid(format!("{flag} {}: no such file", path.display())))
    }
}

/// One id per line; blank lines are ignored.
pub fn read_ids(path: &Path) -> CliResult<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect())
}

/// Loads an embedding file; the id list defaults to the same path with an
/// `.ids` extension.
pub fn open_embeddings(bin: &Path, ids: Option<&Path>) -> CliResult<EmbeddingSet> {
    let ids_path = ids
        .map(Path::to_path_buf)
        .unwrap_or_else(|| EmbeddingSet::ids_path_for(bin));
    require_file(bin, "--embeddings")?;
    require_file(&ids_path, "--ids")?;
    load_embeddings(bin, &ids_path).or_invalid()
}

pub fn open_manifest(path: &Path) -> CliResult<ShiftManifest> {
    require_file(path, "--manifest")?;
    let manifest = ShiftManifest::load(path).or_invalid()?;
    manifest.validate(None).or_invalid()?;
    Ok(manifest)
}
