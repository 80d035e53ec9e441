//! Choosing `m` of `k` centroids that are maximally spread out, measured as
//! the sum of their pairwise ℓ2 distances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ShiftError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    /// Enumerate every `m`-subset.
    Exact,
    /// Farthest pair, then repeatedly the point adding the most distance.
    Greedy,
}

impl std::str::FromStr for SelectionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Self::Exact),
            "greedy" => Ok(Self::Greedy),
            other => Err(format!("unknown selection mode {other:?}")),
        }
    }
}

/// Row-major `k * k` matrix of ℓ2 distances between centroids.
pub fn pairwise_distances<T: Scalar>(centroids: &[T], dim: usize) -> Vec<T> {
    let k = centroids.len() / dim;
    let mut out = vec![T::zero(); k * k];
    for i in 0..k {
        for j in (i + 1)..k {
            let d = super::kmeans::squared_distance(
                &centroids[i * dim..(i + 1) * dim],
                &centroids[j * dim..(j + 1) * dim],
            )
            .sqrt();
            out[i * k + j] = d;
            out[j * k + i] = d;
        }
    }
    out
}

/// Indices (ascending) of the `m` centroids maximizing the sum of pairwise
/// distances. Exact mode breaks ties toward the lexicographically smallest
/// index tuple.
pub fn select_spread_subset<T: Scalar>(
    centroids: &[T],
    dim: usize,
    m: usize,
    mode: SelectionMode,
) -> Result<Vec<usize>, ShiftError> {
    if dim == 0 || !centroids.len().is_multiple_of(dim) {
        return Err(ShiftError::InvalidParameter("centroid matrix shape".into()));
    }
    let k = centroids.len() / dim;
    if m > k {
        return Err(ShiftError::MTooLarge { m, k });
    }
    if m == k {
        return Ok((0..k).collect());
    }
    if m <= 1 {
        return Ok((0..m).collect());
    }
    let dist = pairwise_distances(centroids, dim);
    Ok(match mode {
        SelectionMode::Exact => exact(&dist, k, m),
        SelectionMode::Greedy => greedy(&dist, k, m),
    })
}

struct Search<'a, T> {
    dist: &'a [T],
    k: usize,
    m: usize,
    chosen: Vec<usize>,
    best: Vec<usize>,
    best_score: T,
}

impl<T: Scalar> Search<'_, T> {
    fn descend(&mut self, start: usize, partial: T) {
        let depth = self.chosen.len();
        if depth == self.m {
            if partial > self.best_score || self.best.is_empty() {
                self.best_score = partial;
                self.best.clone_from(&self.chosen);
            }
            return;
        }
        let last = self.k - (self.m - depth);
        for j in start..=last {
            let row = &self.dist[j * self.k..(j + 1) * self.k];
            let added = self.chosen.iter().fold(T::zero(), |acc, &c| acc + row[c]);
            self.chosen.push(j);
            self.descend(j + 1, partial + added);
            self.chosen.pop();
        }
    }
}

fn exact<T: Scalar>(dist: &[T], k: usize, m: usize) -> Vec<usize> {
    // One independent search per leading index; merged in index order so the
    // lexicographic tie rule holds regardless of scheduling.
    let per_first: Vec<(T, Vec<usize>)> = (0..=(k - m))
        .into_par_iter()
        .map(|first| {
            let mut s = Search {
                dist,
                k,
                m,
                chosen: vec![first],
                best: Vec::new(),
                best_score: T::zero(),
            };
            s.descend(first + 1, T::zero());
            (s.best_score, s.best)
        })
        .collect();
    let mut best: Option<(T, Vec<usize>)> = None;
    for (score, subset) in per_first {
        match &best {
            Some((b, _)) if score <= *b => {}
            _ => best = Some((score, subset)),
        }
    }
    best.expect("k >= m >= 2").1
}

fn greedy<T: Scalar>(dist: &[T], k: usize, m: usize) -> Vec<usize> {
    let (mut a, mut b, mut far) = (0, 1, dist[1]);
    for i in 0..k {
        for j in (i + 1)..k {
            if dist[i * k + j] > far {
                (a, b, far) = (i, j, dist[i * k + j]);
            }
        }
    }
    let mut chosen = vec![a, b];
    while chosen.len() < m {
        let mut pick: Option<(usize, T)> = None;
        for j in (0..k).filter(|j| !chosen.contains(j)) {
            let gain = chosen
                .iter()
                .fold(T::zero(), |acc, &c| acc + dist[j * k + c]);
            if pick.is_none_or(|(_, g)| gain > g) {
                pick = Some((j, gain));
            }
        }
        chosen.push(pick.expect("m < k").0);
    }
    chosen.sort_unstable();
    chosen
}
