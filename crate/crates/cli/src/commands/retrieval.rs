use std::path::{Path, PathBuf};

use clap::Args;
use qshift::bm25::{build_index, mine_negatives, search, Bm25Params, InvertedIndex, MiningConfig};
use qshift::corpus::{load_collection, load_qrels, load_queries, QuerySet, RunSet};
use qshift::seed::derive_seed;
use qshift::shift::leave_one_out_plan;
use rayon::prelude::*;
use serde::Serialize;

use super::{open_manifest, read_ids, require_file};
use crate::error::{invalid, CliResult, OrInvalid};
use crate::output::{OutputDir, ResolvedConfig};

#[derive(Debug, Args, Serialize)]
pub struct IndexArgs {
    /// Passage TSV (`doc_id<TAB>text`); required unless --index is given.
    #[arg(long, required_unless_present = "index")]
    pub collection: Option<PathBuf>,
    /// Prebuilt index file written by --save-index.
    #[arg(long, conflicts_with = "collection")]
    pub index: Option<PathBuf>,
    /// Also write the index built from --collection as `bm25.idx`.
    #[arg(long, conflicts_with = "index")]
    pub save_index: bool,
    /// BM25 term-frequency saturation.
    #[arg(long, default_value_t = 0.9)]
    pub k1: f64,
    /// BM25 length normalization.
    #[arg(long, default_value_t = 0.4)]
    pub b: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct QuerySelection {
    /// File of query ids to use, one per line [default: every query].
    #[arg(long, conflicts_with = "manifest")]
    pub query_ids: Option<PathBuf>,
    /// Shift manifest; with --experiment selects that experiment's training
    /// queries, otherwise every cluster's test queries.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Experiment name such as `not_C0`.
    #[arg(long, requires = "manifest")]
    pub experiment: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct MineArgs {
    /// Query TSV (`query_id<TAB>text`).
    #[arg(long)]
    pub queries: PathBuf,
    /// TREC qrels.
    #[arg(long)]
    pub qrels: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub index: IndexArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub select: QuerySelection,
    /// BM25 ranking depth negatives are drawn from.
    #[arg(long, default_value_t = 1000)]
    pub pool: usize,
    /// Negatives drawn per query.
    #[arg(long, default_value_t = 100)]
    pub n_neg: usize,
    /// Minimum relevance grade of a positive.
    #[arg(long, default_value_t = 1)]
    pub rel_threshold: u32,
    /// Base seed; the sampler derives its own seed from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct Bm25RunArgs {
    /// Query TSV (`query_id<TAB>text`).
    #[arg(long)]
    pub queries: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub index: IndexArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub select: QuerySelection,
    /// Documents retrieved per query.
    #[arg(long, default_value_t = 1000)]
    pub depth: usize,
    /// Run tag written in the last column.
    #[arg(long, default_value = "bm25")]
    pub run_tag: String,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

impl IndexArgs {
    fn params(&self) -> CliResult<Bm25Params> {
        let p = Bm25Params {
            k1: self.k1,
            b: self.b,
        };
        p.validate().or_invalid()?;
        Ok(p)
    }

    fn open(&self, out: &mut OutputDir) -> CliResult<InvertedIndex> {
        match (&self.index, &self.collection) {
            (Some(path), _) => {
                require_file(path, "--index")?;
                out.record_input(path)?;
                InvertedIndex::load(path).or_invalid()
            }
            (None, Some(path)) => {
                require_file(path, "--collection")?;
                out.record_input(path)?;
                let collection = load_collection(path).or_invalid()?;
                let index = build_index(&collection)?;
                if self.save_index {
                    out.write("bm25.idx", index.to_bytes())?;
                }
                Ok(index)
            }
            (None, None) => Err(invalid("one of --collection or --index is required")),
        }
    }

    fn check_paths(&self) -> CliResult<()> {
        if let Some(p) = &self.index {
            require_file(p, "--index")?;
        }
        if let Some(p) = &self.collection {
            require_file(p, "--collection")?;
        }
        Ok(())
    }
}

impl QuerySelection {
    /// Selected ids, or `None` for every query.
    fn resolve(&self, queries: &QuerySet, out: &mut OutputDir) -> CliResult<Option<Vec<String>>> {
        let ids = if let Some(path) = &self.query_ids {
            out.record_input(path)?;
            read_ids(path)?
        } else if let Some(path) = &self.manifest {
            let manifest = open_manifest(path)?;
            out.record_input(path)?;
            match &self.experiment {
                Some(name) => {
                    let plan = leave_one_out_plan(&manifest).or_invalid()?;
                    plan.experiment(name)
                        .ok_or_else(|| {
                            invalid(format!("--experiment {name:?} is not in the manifest"))
                        })?
                        .train_ids
                        .clone()
                }
                None => manifest
                    .clusters
                    .iter()
                    .flat_map(|c| c.test.iter().cloned())
                    .collect(),
            }
        } else {
            return Ok(None);
        };
        if let Some(id) = ids.iter().find(|id| !queries.contains(id)) {
            return Err(invalid(format!("query {id:?} is not in --queries")));
        }
        Ok(Some(ids))
    }

    fn check_paths(&self) -> CliResult<()> {
        if let Some(p) = &self.query_ids {
            require_file(p, "--query-ids")?;
        }
        if let Some(p) = &self.manifest {
            require_file(p, "--manifest")?;
        }
        Ok(())
    }
}

fn open_queries(path: &Path) -> CliResult<QuerySet> {
    require_file(path, "--queries")?;
    load_queries(path).or_invalid()
}

pub fn mine(args: &MineArgs, config: &ResolvedConfig) -> CliResult<()> {
    let params = args.index.params()?;
    if args.pool == 0 {
        return Err(invalid("--pool must be at least 1"));
    }
    args.index.check_paths()?;
    args.select.check_paths()?;
    require_file(&args.qrels, "--qrels")?;
    let queries = open_queries(&args.queries)?;
    let qrels = load_qrels(&args.qrels).or_invalid()?;

    let mut out = OutputDir::create(&args.out)?;
    out.record_input(&args.queries)?;
    out.record_input(&args.qrels)?;
    let ids = args.select.resolve(&queries, &mut out)?;
    let index = args.index.open(&mut out)?;
    let mining = MiningConfig {
        n_neg: args.n_neg,
        pool: args.pool,
        seed: derive_seed(args.seed, "mine"),
        rel_threshold: args.rel_threshold,
        bm25: params,
    };
    let report = mine_negatives(&index, &queries, ids.as_deref(), &qrels, &mining)?;
    if !report.skipped.is_empty() {
        log::warn!(
            "{} queries had no negative candidates",
            report.skipped.len()
        );
    }
    out.write("triplets.tsv", report.triplets.to_tsv())?;
    let skipped: String = report.skipped.iter().map(|q| format!("{q}\n")).collect();
    out.write("skipped.ids", skipped)?;
    out.finish(config)
}

pub fn bm25_run(args: &Bm25RunArgs, config: &ResolvedConfig) -> CliResult<()> {
    let params = args.index.params()?;
    if args.run_tag.is_empty() || args.run_tag.contains(char::is_whitespace) {
        return Err(invalid("--run-tag must be a non-empty word"));
    }
    args.index.check_paths()?;
    args.select.check_paths()?;
    let queries = open_queries(&args.queries)?;

    let mut out = OutputDir::create(&args.out)?;
    out.record_input(&args.queries)?;
    let ids = args.select.resolve(&queries, &mut out)?;
    let index = args.index.open(&mut out)?;
    let selected: Vec<(&str, &str)> = match &ids {
        Some(ids) => ids
            .iter()
            .map(|id| (id.as_str(), queries.get(id).expect("checked above")))
            .collect(),
        None => queries.iter().collect(),
    };
    let rankings: Vec<Vec<(String, f64)>> = selected
        .par_iter()
        .map(|(_, text)| search(&index, &params, text, args.depth))
        .collect();
    let mut run = RunSet::new(args.run_tag.clone());
    for ((id, _), hits) in selected.iter().zip(rankings) {
        if !hits.is_empty() {
            run.insert_ranking(id, hits)?;
        }
    }
    out.write("run.trec", run.to_trec_string())?;
    out.finish(config)
}
