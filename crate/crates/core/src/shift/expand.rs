//! Growing the selected seed clusters by absorbing nearby k-means clusters.
//!
//! The smallest group (ties: earliest seed) absorbs the unclaimed cluster
//! whose centroid is closest to the group's *seed* centroid. This repeats
//! until every group reaches the target size or no cluster is left.

use super::{Cluster, KMeansModel, ShiftError, ShiftManifest};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub seed: usize,
    /// k-means clusters in absorption order, starting with the seed.
    pub clusters: Vec<usize>,
    /// Point indices, ascending.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    pub groups: Vec<Group>,
    /// True when the pool ran dry before every group reached the target.
    pub pool_exhausted: bool,
}

pub fn expand_groups<T: Scalar>(
    model: &KMeansModel<T>,
    seeds: &[usize],
    target_size: usize,
) -> Result<Expansion, ShiftError> {
    if target_size == 0 {
        return Err(ShiftError::InvalidParameter(
            "target size must be at least 1".into(),
        ));
    }
    let mut claimed = vec![false; model.k];
    for &s in seeds {
        if s >= model.k {
            return Err(ShiftError::SeedOutOfRange {
                seed: s,
                k: model.k,
            });
        }
        if claimed[s] {
            return Err(ShiftError::DuplicateSeed(s));
        }
        claimed[s] = true;
    }
    let members = model.members();

    // Candidates per group, nearest first (ties: lower cluster index).
    let candidates: Vec<Vec<usize>> = seeds
        .iter()
        .map(|&s| {
            let mut order: Vec<(T, usize)> = (0..model.k)
                .filter(|c| !claimed[*c])
                .map(|c| {
                    (
                        super::kmeans::squared_distance(model.centroid(s), model.centroid(c)),
                        c,
                    )
                })
                .collect();
            order.sort_by(|a, b| {
                a.0.partial_cmp(&b.0)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.1.cmp(&b.1))
            });
            order.into_iter().map(|(_, c)| c).collect()
        })
        .collect();
    let mut cursors = vec![0usize; seeds.len()];
    let mut groups: Vec<Group> = seeds
        .iter()
        .map(|&s| Group {
            seed: s,
            clusters: vec![s],
            members: members[s].clone(),
        })
        .collect();
    let mut pool_left = claimed.iter().filter(|c| !**c).count();
    let mut pool_exhausted = false;

    loop {
        let smallest = groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.members.len() < target_size)
            .min_by_key(|(i, g)| (g.members.len(), *i))
            .map(|(i, _)| i);
        let Some(g) = smallest else { break };
        if pool_left == 0 {
            pool_exhausted = true;
            break;
        }
        let list = &candidates[g];
        while claimed[list[cursors[g]]] {
            cursors[g] += 1;
        }
        let c = list[cursors[g]];
        claimed[c] = true;
        pool_left -= 1;
        groups[g].clusters.push(c);
        groups[g].members.extend_from_slice(&members[c]);
    }
    for g in &mut groups {
        g.members.sort_unstable();
    }
    Ok(Expansion {
        groups,
        pool_exhausted,
    })
}

/// Expands the seeds and names the groups `C0..C{m-1}` in seed order, with
/// point indices mapped to `ids`. Clusters come out unsplit.
pub fn expand_clusters<T: Scalar>(
    model: &KMeansModel<T>,
    ids: &[String],
    seeds: &[usize],
    target_size: usize,
) -> Result<ShiftManifest, ShiftError> {
    if ids.len() != model.assignment.len() {
        return Err(ShiftError::InvalidParameter(format!(
            "{} ids for {} clustered points",
            ids.len(),
            model.assignment.len()
        )));
    }
    let expansion = expand_groups(model, seeds, target_size)?;
    let mut manifest = ShiftManifest::new("topic", model.seed)
        .with_param("target_size", target_size)
        .with_param("seed_clusters", seeds.to_vec())
        .with_param(
            "absorbed_clusters",
            expansion
                .groups
                .iter()
                .map(|g| g.clusters.clone())
                .collect::<Vec<_>>(),
        );
    if expansion.pool_exhausted {
        log::warn!("cluster pool exhausted before every group reached {target_size} queries");
        manifest.warn(format!(
            "pool exhausted before every group reached {target_size} queries"
        ));
    }
    manifest.clusters = expansion
        .groups
        .iter()
        .enumerate()
        .map(|(i, g)| {
            Cluster::unsplit(
                format!("C{i}"),
                g.members.iter().map(|&p| ids[p].clone()).collect(),
            )
        })
        .collect();
    Ok(manifest)
}
