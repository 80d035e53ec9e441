//! Synthetic corpora and helpers shared by the CLI test targets.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qshift::corpus::{tokenize, EmbeddingSet};
use qshift::shift::{leave_one_out_plan, ShiftManifest};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const WH_PREFIXES: [&str; 6] = ["what", "how", "who", "definition", "when", "cheap"];

/// Queries drawn from planted modes. Mode `m` has its own embedding centre
/// and private vocabulary, and uses shared words with probability
/// `shared[m]`.
pub struct Synthetic {
    pub ids: Vec<String>,
    pub texts: Vec<String>,
    pub labels: Vec<usize>,
    pub dim: usize,
    pub embeddings: Vec<f32>,
}

pub fn synthetic(n: usize, shared: &[f64], dim: usize, seed: u64) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = shared.len();
    let centers: Vec<Vec<f64>> = (0..modes)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| 10.0 * x / norm).collect()
        })
        .collect();
    let mut s = Synthetic {
        ids: Vec::with_capacity(n),
        texts: Vec::with_capacity(n),
        labels: Vec::with_capacity(n),
        dim,
        embeddings: Vec::with_capacity(n * dim),
    };
    for i in 0..n {
        let mode = i % modes;
        let mut words = Vec::new();
        if rng.random_bool(0.5) {
            words.push(WH_PREFIXES[rng.random_range(0..WH_PREFIXES.len())].to_string());
        }
        for _ in 0..rng.random_range(2..=7) {
            let j = rng.random_range(0..30);
            words.push(if rng.random_bool(shared[mode]) {
                format!("s{j}")
            } else {
                format!("m{mode}w{j}")
            });
        }
        s.ids.push(format!("q{i:05}"));
        s.texts.push(words.join(" "));
        s.labels.push(mode);
        for &c in &centers[mode] {
            s.embeddings.push((c + rng.random_range(-0.5..0.5)) as f32);
        }
    }
    s
}

pub struct Files {
    pub queries: PathBuf,
    pub embeddings: PathBuf,
    pub collection: PathBuf,
    pub qrels: PathBuf,
}

/// Writes queries, embeddings, a collection (one relevant passage per query
/// plus fillers) and qrels under `dir`.
pub fn write_corpus(s: &Synthetic, dir: &Path) -> Files {
    let files = Files {
        queries: dir.join("queries.tsv"),
        embeddings: dir.join("queries.emb"),
        collection: dir.join("collection.tsv"),
        qrels: dir.join("qrels.txt"),
    };
    let mut queries = String::new();
    let mut collection = String::new();
    let mut qrels = String::new();
    for (id, text) in s.ids.iter().zip(&s.texts) {
        writeln!(queries, "{id}\t{text}").unwrap();
        writeln!(collection, "D{id}\t{text} passage body").unwrap();
        writeln!(qrels, "{id} 0 D{id} 1").unwrap();
    }
    for j in 0..50 {
        writeln!(collection, "N{j:03}\tfiller s{} m0w{} text", j % 30, j % 7).unwrap();
    }
    fs::write(&files.queries, queries).unwrap();
    fs::write(&files.collection, collection).unwrap();
    fs::write(&files.qrels, qrels).unwrap();
    let emb = EmbeddingSet::new(s.dim, s.ids.clone(), s.embeddings.clone()).unwrap();
    emb.write(
        &files.embeddings,
        EmbeddingSet::ids_path_for(&files.embeddings),
    )
    .unwrap();
    files
}

/// One TREC run per experiment. With `degrade`, a query's positive sits at
/// rank `1 + round(9 * oov)`, where `oov` is the fraction of its tokens
/// absent from that experiment's training queries; otherwise at rank 1.
pub fn constructed_runs(
    manifest: &ShiftManifest,
    texts: &BTreeMap<String, String>,
    degrade: bool,
    dir: &Path,
) -> Vec<(String, PathBuf)> {
    let plan = leave_one_out_plan(manifest).unwrap();
    let eval_ids: Vec<&String> = plan.eval_sets.iter().flat_map(|e| &e.query_ids).collect();
    let mut out = Vec::new();
    for e in &plan.experiments {
        let vocab: HashSet<String> = e
            .train_ids
            .iter()
            .flat_map(|q| tokenize(&texts[q]).into_vec())
            .collect();
        let mut run = String::new();
        for q in &eval_ids {
            let toks = tokenize(&texts[*q]).into_vec();
            let oov =
                toks.iter().filter(|t| !vocab.contains(*t)).count() as f64 / toks.len() as f64;
            let rank = if degrade {
                1 + (9.0 * oov).round() as usize
            } else {
                1
            };
            let mut filler = 0;
            for r in 1..=10 {
                let doc = if r == rank {
                    format!("D{q}")
                } else {
                    filler += 1;
                    format!("N{filler:03}")
                };
                writeln!(run, "{q} Q0 {doc} {r} {} synthetic", 11 - r).unwrap();
            }
        }
        let path = dir.join(format!("{}.trec", e.name));
        fs::write(&path, run).unwrap();
        out.push((e.name.clone(), path));
    }
    out
}

pub fn qshift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qshift"))
        .args(args)
        .output()
        .expect("qshift runs")
}

/// Runs the tool and panics with its stderr unless it succeeds.
pub fn qshift_ok(args: &[&str]) -> Output {
    let out = qshift(args);
    assert!(
        out.status.success(),
        "qshift {args:?} failed ({:?}):\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Every file under `dir`, keyed by relative path.
pub fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

pub fn text_map(s: &Synthetic) -> BTreeMap<String, String> {
    s.ids.iter().cloned().zip(s.texts.iter().cloned()).collect()
}

/// Fraction of clustered queries carrying their cluster's majority label.
pub fn purity(manifest: &ShiftManifest, labels: &BTreeMap<String, usize>) -> f64 {
    let mut agree = 0;
    let mut total = 0;
    for c in &manifest.clusters {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for q in c.members() {
            *counts.entry(labels[q]).or_insert(0) += 1;
        }
        agree += counts.values().max().copied().unwrap_or(0);
        total += c.len();
    }
    agree as f64 / total as f64
}

/// Spearman correlation without tie handling.
pub fn spearman_no_ties(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        for (pos, &i) in idx.iter().enumerate() {
            r[i] = pos as f64;
        }
        r
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

/// Parses a simple CSV with a header into rows of field maps.
pub fn read_csv(path: &Path) -> Vec<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines
        .map(|l| {
            header
                .iter()
                .map(|h| h.to_string())
                .zip(l.split(',').map(str::to_owned))
                .collect()
        })
        .collect()
}
