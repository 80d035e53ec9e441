//! Lloyd's k-means with k-means++ seeding.
//!
//! The assignment step runs in parallel over points. Centroid sums and the
//! inertia are reduced sequentially in point order, so the result does not
//! depend on the number of worker threads.

use rand::Rng;
use rayon::prelude::*;

use super::ShiftError;
use crate::corpus::EmbeddingSet;
use crate::scalar::{CompensatedSum, Scalar};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once `(previous - current) / previous` inertia falls below this.
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            k: 100,
            seed: 0,
            max_iter: 100,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansModel<T> {
    pub k: usize,
    pub dim: usize,
    /// Row-major `k * dim`.
    pub centroids: Vec<T>,
    /// Centroid index per point.
    pub assignment: Vec<usize>,
    /// Sum of squared distances of every point to its centroid.
    pub inertia: T,
    pub seed: u64,
    /// Inertia after seeding, then after each Lloyd iteration.
    pub inertia_trace: Vec<T>,
}

impl<T: Scalar> KMeansModel<T> {
    pub fn centroid(&self, c: usize) -> &[T] {
        &self.centroids[c * self.dim..(c + 1) * self.dim]
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    /// Point indices per centroid, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    pub fn iterations(&self) -> usize {
        self.inertia_trace.len().saturating_sub(1)
    }
}

/// Converts embeddings to the working precision, optionally ℓ2-normalizing rows.
pub fn embedding_matrix<T: Scalar>(emb: &EmbeddingSet, normalize: bool) -> Vec<T> {
    let mut out = Vec::with_capacity(emb.data().len());
    for i in 0..emb.len() {
        let row = emb.row(i);
        let norm = if normalize {
            let sq: f64 = row.iter().map(|&v| f64::from(v) * f64::from(v)).sum();
            sq.sqrt()
        } else {
            1.0
        };
        let scale = if norm > 0.0 { 1.0 / norm } else { 1.0 };
        out.extend(row.iter().map(|&v| T::lit(f64::from(v) * scale)));
    }
    out
}

#[inline]
pub(crate) fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| {
        let d = x - y;
        acc + d * d
    })
}

pub fn kmeans<T: Scalar>(
    data: &[T],
    dim: usize,
    config: &KMeansConfig,
) -> Result<KMeansModel<T>, ShiftError> {
    if dim == 0 || data.is_empty() {
        return Err(ShiftError::EmptyInput);
    }
    if !data.len().is_multiple_of(dim) {
        return Err(ShiftError::InvalidParameter(format!(
            "data length {} is not a multiple of dim {dim}",
            data.len()
        )));
    }
    let n = data.len() / dim;
    if config.k == 0 {
        return Err(ShiftError::InvalidParameter("k must be positive".into()));
    }
    if config.k > n {
        return Err(ShiftError::KTooLarge { k: config.k, n });
    }
    if config.max_iter == 0 {
        return Err(ShiftError::InvalidParameter(
            "max_iter must be at least 1".into(),
        ));
    }
    if config.tol.is_nan() || config.tol < 0.0 {
        return Err(ShiftError::InvalidParameter(
            "tol must be non-negative".into(),
        ));
    }

    let mut rng = seed::rng(config.seed);
    let mut centroids = plus_plus_init(data, dim, config.k, &mut rng);
    let (mut assignment, dists) = assign(data, dim, &centroids, None);
    let mut inertia = total(&dists);
    let mut trace = vec![inertia];
    let tol = T::lit(config.tol);

    for _ in 0..config.max_iter {
        update_centroids(data, dim, &assignment, &mut centroids);
        let (next, dists) = assign(data, dim, &centroids, Some(&assignment));
        let next_inertia = total(&dists);
        trace.push(next_inertia);
        let changed = next != assignment;
        assignment = next;
        let previous = inertia;
        inertia = next_inertia;
        if !changed || previous <= T::zero() || (previous - inertia) / previous < tol {
            break;
        }
    }

    Ok(KMeansModel {
        k: config.k,
        dim,
        centroids,
        assignment,
        inertia,
        seed: config.seed,
        inertia_trace: trace,
    })
}

fn total<T: Scalar>(values: &[T]) -> T {
    values
        .iter()
        .copied()
        .collect::<CompensatedSum<T>>()
        .value()
}

fn plus_plus_init<T: Scalar, R: Rng>(data: &[T], dim: usize, k: usize, rng: &mut R) -> Vec<T> {
    let n = data.len() / dim;
    let mut chosen = Vec::with_capacity(k);
    let first = rng.random_range(0..n);
    chosen.push(first);
    let mut nearest: Vec<f64> = data
        .par_chunks_exact(dim)
        .map(|p| squared_distance(p, &data[first * dim..(first + 1) * dim]).to_f64_lossy())
        .collect();

    while chosen.len() < k {
        let weight: f64 = nearest
            .iter()
            .copied()
            .collect::<CompensatedSum<f64>>()
            .value();
        let next = if weight > 0.0 {
            let target = rng.random::<f64>() * weight;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in nearest.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total weight")
        } else {
            // Every point coincides with a chosen center.
            (0..n).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        let c = &data[next * dim..(next + 1) * dim];
        nearest
            .par_iter_mut()
            .zip(data.par_chunks_exact(dim))
            .for_each(|(best, p)| {
                let d = squared_distance(p, c).to_f64_lossy();
                if d < *best {
                    *best = d;
                }
            });
    }

    let mut centroids = Vec::with_capacity(k * dim);
    for &i in &chosen {
        centroids.extend_from_slice(&data[i * dim..(i + 1) * dim]);
    }
    centroids
}

/// Nearest centroid per point; a point keeps its previous centroid unless
/// another one is strictly closer, and otherwise ties go to the lowest index.
fn assign<T: Scalar>(
    data: &[T],
    dim: usize,
    centroids: &[T],
    previous: Option<&[usize]>,
) -> (Vec<usize>, Vec<T>) {
    data.par_chunks_exact(dim)
        .enumerate()
        .map(|(i, p)| {
            let mut best = previous.map_or(0, |prev| prev[i]);
            let mut best_d = squared_distance(p, &centroids[best * dim..(best + 1) * dim]);
            for (c, centroid) in centroids.chunks_exact(dim).enumerate() {
                let d = squared_distance(p, centroid);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            (best, best_d)
        })
        .unzip()
}

fn update_centroids<T: Scalar>(data: &[T], dim: usize, assignment: &[usize], centroids: &mut [T]) {
    let k = centroids.len() / dim;
    let mut sums = vec![CompensatedSum::<T>::new(); k * dim];
    let mut counts = vec![0usize; k];
    for (p, &c) in data.chunks_exact(dim).zip(assignment) {
        counts[c] += 1;
        for (acc, &v) in sums[c * dim..(c + 1) * dim].iter_mut().zip(p) {
            acc.add(v);
        }
    }
    for c in 0..k {
        // Empty clusters keep their previous centroid.
        if counts[c] == 0 {
            continue;
        }
        let count = T::from_usize_lossy(counts[c]);
        for (dst, acc) in centroids[c * dim..(c + 1) * dim]
            .iter_mut()
            .zip(&sums[c * dim..(c + 1) * dim])
        {
            *dst = acc.value() / count;
        }
    }
}
