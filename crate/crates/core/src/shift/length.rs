use super::{Cluster, ShiftError, ShiftManifest};
use crate::corpus::{tokenize, QuerySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthBoundary {
    /// Lower median of the word lengths.
    Auto,
    Fixed(usize),
}

/// Lower median: the element at index `(n - 1) / 2` after sorting.
pub fn lower_median(values: &[usize]) -> Option<usize> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    Some(sorted[(sorted.len() - 1) / 2])
}

/// `short` holds queries with at most `boundary` tokens, `long` the rest.
pub fn length_split(
    queries: &QuerySet,
    boundary: LengthBoundary,
) -> Result<ShiftManifest, ShiftError> {
    if queries.is_empty() {
        return Err(ShiftError::EmptyInput);
    }
    let lengths: Vec<usize> = queries.iter().map(|(_, t)| tokenize(t).len()).collect();
    let (boundary, mode) = match boundary {
        LengthBoundary::Auto => (lower_median(&lengths).expect("non-empty"), "median"),
        LengthBoundary::Fixed(b) => (b, "fixed"),
    };
    let (mut short, mut long) = (Vec::new(), Vec::new());
    for ((id, _), len) in queries.iter().zip(&lengths) {
        if *len <= boundary {
            short.push(id.to_owned());
        } else {
            long.push(id.to_owned());
        }
    }
    let mut manifest = ShiftManifest::new("length", 0)
        .with_param("boundary", boundary)
        .with_param("boundary_mode", mode);
    manifest.clusters = vec![
        Cluster::unsplit("short", short),
        Cluster::unsplit("long", long),
    ];
    Ok(manifest)
}
