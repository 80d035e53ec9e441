use qshift::shift::{select_spread_subset, SelectionMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn objective(c: &[f64], dim: usize, subset: &[usize]) -> f64 {
    let mut s = 0.0;
    for (i, &a) in subset.iter().enumerate() {
        for &b in &subset[i + 1..] {
            s += dist(&c[a * dim..(a + 1) * dim], &c[b * dim..(b + 1) * dim]);
        }
    }
    s
}

/// Every m-subset in lexicographic order; keeps the first maximum.
fn exhaustive(c: &[f64], dim: usize, m: usize) -> Vec<usize> {
    let k = c.len() / dim;
    let mut idx: Vec<usize> = (0..m).collect();
    let mut best = idx.clone();
    let mut best_v = objective(c, dim, &idx);
    loop {
        let mut i = m;
        while i > 0 && idx[i - 1] == k - m + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return best;
        }
        idx[i - 1] += 1;
        for j in i..m {
            idx[j] = idx[j - 1] + 1;
        }
        let v = objective(c, dim, &idx);
        if v > best_v {
            best_v = v;
            best = idx.clone();
        }
    }
}

#[test]
fn exact_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let k = rng.random_range(2..=12);
        let m = rng.random_range(1..=4.min(k));
        let dim = rng.random_range(1..=6);
        let c: Vec<f64> = (0..k * dim)
            .map(|_| rng.random_range(-10.0..10.0))
            .collect();
        let got = select_spread_subset(&c, dim, m, SelectionMode::Exact).unwrap();
        assert_eq!(got, exhaustive(&c, dim, m), "k={k} m={m} dim={dim}");
    }
}

#[test]
fn greedy_returns_a_valid_subset_no_better_than_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let k = rng.random_range(3..=12);
        let m = rng.random_range(2..=4.min(k));
        let c: Vec<f64> = (0..k * 3).map(|_| rng.random_range(-5.0..5.0)).collect();
        let g = select_spread_subset(&c, 3, m, SelectionMode::Greedy).unwrap();
        let e = select_spread_subset(&c, 3, m, SelectionMode::Exact).unwrap();
        assert_eq!(g.len(), m);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(objective(&c, 3, &g) <= objective(&c, 3, &e) + 1e-9);
    }
}

#[test]
fn f32_centroids_are_supported() {
    let c: Vec<f32> = vec![0.0, 1.0, 2.0, 9.0];
    assert_eq!(
        select_spread_subset(&c, 1, 2, SelectionMode::Exact).unwrap(),
        [0, 3]
    );
}
