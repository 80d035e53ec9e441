use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use qshift::corpus::{load_queries, QuerySet};
use qshift::seed::derive_seed;
use qshift::shift::{
    embedding_matrix, expand_clusters, kmeans, length_split, make_train_test, select_spread_subset,
    wh_split, KMeansConfig, LengthBoundary, SelectionMode, ShiftManifest, WhClass, WhRules,
};
use qshift::KMeansModel64;
use serde::Serialize;

use super::{open_embeddings, open_manifest, require_file};
use crate::error::{invalid, CliResult, OrInvalid};
use crate::output::{OutputDir, ResolvedConfig};

#[derive(Debug, Args, Serialize)]
pub struct TopicShiftArgs {
    /// Query TSV (`query_id<TAB>text`).
    #[arg(long)]
    pub queries: PathBuf,
    /// Query embeddings in the SHFTEMB1 binary format.
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Id list for the embeddings [default: embeddings path with `.ids` extension].
    #[arg(long)]
    pub ids: Option<PathBuf>,
    /// Number of k-means clusters.
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    /// Number of shift clusters to build.
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    /// Queries per shift cluster before the train/test split.
    #[arg(long, default_value_t = 25_000)]
    pub target_size: usize,
    /// Test queries per cluster; one value for all or a comma-separated list.
    #[arg(long, value_delimiter = ',', default_value = "6200")]
    pub test_size: Vec<usize>,
    /// Seed-cluster selection: exact or greedy.
    #[arg(long, default_value = "exact")]
    pub selection: SelectionMode,
    /// L2-normalize embeddings before clustering.
    #[arg(long)]
    pub normalize: bool,
    /// Maximum Lloyd iterations.
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Stop when inertia improves by less than this fraction.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Base seed; k-means and the split derive their own seeds from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct WhShiftArgs {
    /// Query TSV (`query_id<TAB>text`).
    #[arg(long)]
    pub queries: PathBuf,
    /// Keywords of the `wha` cluster, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "what,definition")]
    pub wha_keywords: Vec<String>,
    /// Keywords of the `how` cluster, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "how")]
    pub how_keywords: Vec<String>,
    /// Keywords of the `who` cluster, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "who,when,where,which")]
    pub who_keywords: Vec<String>,
    /// Test queries per cluster; one value for all or a comma-separated list.
    #[arg(long, value_delimiter = ',', default_value = "6500")]
    pub test_size: Vec<usize>,
    /// Base seed for the train/test split.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct LengthShiftArgs {
    /// Query TSV (`query_id<TAB>text`).
    #[arg(long)]
    pub queries: PathBuf,
    /// Longest query length (in tokens) counted as short, or `auto` for the
    /// lower median.
    #[arg(long, default_value = "auto")]
    pub boundary: String,
    /// Test queries per cluster; one value for all or a comma-separated list.
    #[arg(long, value_delimiter = ',', default_value = "3500")]
    pub test_size: Vec<usize>,
    /// Base seed for the train/test split.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ExportClusterTsvArgs {
    /// Shift manifest JSON.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Query embeddings in the SHFTEMB1 binary format.
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Id list for the embeddings [default: embeddings path with `.ids` extension].
    #[arg(long)]
    pub ids: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn open_queries(path: &PathBuf) -> CliResult<QuerySet> {
    require_file(path, "--queries")?;
    load_queries(path).or_invalid()
}

fn split_seed(seed: u64) -> u64 {
    derive_seed(seed, "split")
}

/// Splits, stamps and writes a manifest with its id files.
fn finish_manifest(
    manifest: ShiftManifest,
    queries: &QuerySet,
    test_size: &[usize],
    seed: u64,
    config: &ResolvedConfig,
    out: &mut OutputDir,
) -> CliResult<ShiftManifest> {
    let mut manifest = make_train_test(&manifest, test_size, split_seed(seed))?;
    manifest.seed = seed;
    manifest = manifest
        .with_param("split_seed", split_seed(seed))
        .with_param("config_sha256", config.sha256.clone());
    manifest.validate(Some(queries))?;
    out.write("manifest.json", manifest.to_json())?;
    for c in &manifest.clusters {
        out.write(
            &format!("clusters/{}.train.ids", c.name),
            id_lines(&c.train),
        )?;
        out.write(&format!("clusters/{}.test.ids", c.name), id_lines(&c.test))?;
    }
    for c in &manifest.clusters {
        log::info!("{}: {} train, {} test", c.name, c.train.len(), c.test.len());
    }
    Ok(manifest)
}

fn id_lines(ids: &[String]) -> String {
    ids.iter().map(|id| format!("{id}\n")).collect()
}

pub fn topic_shift(args: &TopicShiftArgs, config: &ResolvedConfig) -> CliResult<()> {
    if args.m < 2 {
        return Err(invalid("--m must be at least 2"));
    }
    if args.k < args.m {
        return Err(invalid(format!(
            "--k {} is smaller than --m {}",
            args.k, args.m
        )));
    }
    let queries = open_queries(&args.queries)?;
    let emb = open_embeddings(&args.embeddings, args.ids.as_deref())?;
    if let Some(id) = emb.ids().iter().find(|id| !queries.contains(id)) {
        return Err(invalid(format!(
            "embedded query {id:?} is not in --queries"
        )));
    }

    let mut out = OutputDir::create(&args.out)?;
    out.record_input(&args.queries)?;
    out.record_input(&args.embeddings)?;

    let data = embedding_matrix::<f64>(&emb, args.normalize);
    let kmeans_seed = derive_seed(args.seed, "kmeans");
    let model: KMeansModel64 = kmeans(
        &data,
        emb.dim(),
        &KMeansConfig {
            k: args.k,
            seed: kmeans_seed,
            max_iter: args.max_iter,
            tol: args.tol,
        },
    )?;
    log::info!(
        "k-means: {} iterations, inertia {}",
        model.iterations(),
        model.inertia
    );
    let seeds = select_spread_subset(&model.centroids, model.dim, args.m, args.selection)?;
    let manifest = expand_clusters(&model, emb.ids(), &seeds, args.target_size)?
        .with_param("k", args.k)
        .with_param("m", args.m)
        .with_param("selection", serde_json::to_value(args.selection)?)
        .with_param("normalize", args.normalize)
        .with_param("kmeans_seed", kmeans_seed)
        .with_param("kmeans_iterations", model.iterations())
        .with_param("inertia", model.inertia);

    let mut assignments = String::from("query_id\tmicro_cluster\n");
    for (id, c) in emb.ids().iter().zip(&model.assignment) {
        writeln!(assignments, "{id}\t{c}").expect("writing to a String");
    }
    out.write("kmeans.tsv", assignments)?;
    finish_manifest(
        manifest,
        &queries,
        &args.test_size,
        args.seed,
        config,
        &mut out,
    )?;
    out.finish(config)
}

pub fn wh_shift(args: &WhShiftArgs, config: &ResolvedConfig) -> CliResult<()> {
    let rules = WhRules::new(
        args.wha_keywords.clone(),
        args.how_keywords.clone(),
        args.who_keywords.clone(),
    )
    .or_invalid()?;
    let queries = open_queries(&args.queries)?;
    let mut out = OutputDir::create(&args.out)?;
    out.record_input(&args.queries)?;
    let manifest = wh_split(&queries, &rules);
    for class in WhClass::ALL {
        if manifest.cluster(class.name()).is_none_or(|c| c.is_empty()) {
            log::warn!("no queries matched the {} keywords", class.name());
        }
    }
    finish_manifest(
        manifest,
        &queries,
        &args.test_size,
        args.seed,
        config,
        &mut out,
    )?;
    out.finish(config)
}

pub fn length_shift(args: &LengthShiftArgs, config: &ResolvedConfig) -> CliResult<()> {
    let boundary = match args.boundary.as_str() {
        "auto" => LengthBoundary::Auto,
        s => LengthBoundary::Fixed(s.parse().map_err(|_| {
            invalid(format!(
                "--boundary {s:?}: expected `auto` or a token count"
            ))
        })?),
    };
    let queries = open_queries(&args.queries)?;
    let mut out = OutputDir::create(&args.out)?;
    out.record_input(&args.queries)?;
    let manifest = length_split(&queries, boundary)?;
    finish_manifest(
        manifest,
        &queries,
        &args.test_size,
        args.seed,
        config,
        &mut out,
    )?;
    out.finish(config)
}

/// One row per embedded query: id, cluster, split and the vector, for
/// external projection tools.
pub fn export_cluster_tsv(args: &ExportClusterTsvArgs, config: &ResolvedConfig) -> CliResult<()> {
    let manifest = open_manifest(&args.manifest)?;
    let emb = open_embeddings(&args.embeddings, args.ids.as_deref())?;
    let mut out = OutputDir::create(&args.out)?;
    out.record_input(&args.manifest)?;
    out.record_input(&args.embeddings)?;

    let mut label = std::collections::HashMap::new();
    for c in &manifest.clusters {
        for id in &c.train {
            label.insert(id.as_str(), (c.name.as_str(), "train"));
        }
        for id in &c.test {
            label.insert(id.as_str(), (c.name.as_str(), "test"));
        }
    }
    let mut text = String::from("query_id\tcluster\tsplit");
    for d in 0..emb.dim() {
        write!(text, "\tv{d}").expect("writing to a String");
    }
    text.push('\n');
    for (i, id) in emb.ids().iter().enumerate() {
        let (cluster, split) = label.get(id.as_str()).copied().unwrap_or(("-", "-"));
        write!(text, "{id}\t{cluster}\t{split}").expect("writing to a String");
        for v in emb.row(i) {
            write!(text, "\t{v}").expect("writing to a String");
        }
        text.push('\n');
    }
    out.write("clusters.tsv", text)?;
    out.finish(config)
}
