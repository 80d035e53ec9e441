use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use qshift::corpus::{load_qrels, load_queries, load_run};
use qshift::harness::{
    build_matrix, load_summary_json, summarize, summary_csv, summary_json, EvalMatrix,
    SummaryReport,
};
use qshift::indicators::{
    bin_by_similarity, bins_csv, jaccard_loss_csv, jaccard_loss_table, r_scores_tsv, Binning,
    JaccardMode, SimilarityIndex,
};
use qshift::metrics::Metric;
use qshift::shift::{experiment_name, leave_one_out_plan};
use serde::Serialize;

use super::{open_embeddings, open_manifest, require_file};
use crate::error::{invalid, CliResult, OrInvalid};
use crate::output::{OutputDir, ResolvedConfig};

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// Shift manifest JSON.
    #[arg(long)]
    pub manifest: PathBuf,
    /// TREC qrels.
    #[arg(long)]
    pub qrels: PathBuf,
    /// `<experiment>=<path>` TREC run of the model trained for that
    /// experiment (e.g. `not_C0=runs/c0.trec`); repeat for every experiment.
    #[arg(long = "run", required = true)]
    pub runs: Vec<String>,
    /// Metric: mrr@K, asl@BOUND or recall@K.
    #[arg(long, default_value = "mrr@10")]
    pub metric: Metric,
    /// Minimum relevance grade of a positive.
    #[arg(long, default_value_t = 1)]
    pub rel_threshold: u32,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct IndicatorsArgs {
    /// Shift manifest JSON.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Query TSV (`query_id<TAB>text`).
    #[arg(long)]
    pub queries: PathBuf,
    /// `summary.json` written by `eval`.
    #[arg(long)]
    pub summary: PathBuf,
    /// `matrix.tsv` written by `eval`; needed for similarity bins.
    #[arg(long, requires = "embeddings")]
    pub matrix: Option<PathBuf>,
    /// Query embeddings for the model-based similarity; enables
    /// `r_scores.tsv` and `bins.csv`.
    #[arg(long, requires = "matrix")]
    pub embeddings: Option<PathBuf>,
    /// Id list for the embeddings [default: embeddings path with `.ids` extension].
    #[arg(long)]
    pub ids: Option<PathBuf>,
    /// Number of equal-population similarity bins.
    #[arg(long, default_value_t = 5)]
    pub bins: usize,
    /// Explicit increasing bin edges, comma-separated; overrides --bins.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub edges: Vec<f64>,
    /// Jaccard inputs: pooled (whole cluster vs complement) or strict
    /// (cluster test vs complement train).
    #[arg(long, default_value = "pooled")]
    pub jaccard_mode: JaccardMode,
    /// Restrict similarity scores and bins to one eval set.
    #[arg(long)]
    pub eval_set: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn eval(args: &EvalArgs, config: &ResolvedConfig) -> CliResult<()> {
    let manifest = open_manifest(&args.manifest)?;
    let plan = leave_one_out_plan(&manifest).or_invalid()?;
    require_file(&args.qrels, "--qrels")?;

    let mut run_paths: BTreeMap<String, PathBuf> = BTreeMap::new();
    for spec in &args.runs {
        let (name, path) = spec
            .split_once('=')
            .ok_or_else(|| invalid(format!("--run {spec:?}: expected <experiment>=<path>")))?;
        if plan.experiment(name).is_none() {
            return Err(invalid(format!(
                "--run {name:?} is not an experiment of the manifest"
            )));
        }
        let path = PathBuf::from(path);
        require_file(&path, "--run")?;
        if run_paths.insert(name.to_owned(), path).is_some() {
            return Err(invalid(format!("--run {name:?} given twice")));
        }
    }
    if let Some(e) = plan
        .experiments
        .iter()
        .find(|e| !run_paths.contains_key(&e.name))
    {
        return Err(invalid(format!("no --run for experiment {:?}", e.name)));
    }

    let qrels = load_qrels(&args.qrels).or_invalid()?;
    let mut runs = BTreeMap::new();
    for (name, path) in &run_paths {
        runs.insert(name.clone(), load_run(path).or_invalid()?);
    }

    let mut out = OutputDir::create(&args.out)?;
    out.record_input(&args.manifest)?;
    out.record_input(&args.qrels)?;
    for path in run_paths.values() {
        out.record_input(path)?;
    }
    let matrix = build_matrix(&plan, &runs, &qrels, args.metric, args.rel_threshold)?;
    if !matrix.missing().is_empty() {
        log::warn!(
            "{} (run, query) pairs missing; scored as worst case",
            matrix.missing().len()
        );
    }
    let summaries = summarize(&matrix)?;
    out.write("matrix.tsv", matrix.to_long_tsv())?;
    out.write("missing.tsv", matrix.missing_tsv())?;
    out.write("summary.csv", summary_csv(&summaries))?;
    let report = SummaryReport {
        metric: args.metric,
        config_sha256: Some(config.sha256.clone()),
        summaries,
    };
    out.write("summary.json", summary_json(&report))?;
    out.finish(config)
}

pub fn indicators(args: &IndicatorsArgs, config: &ResolvedConfig) -> CliResult<()> {
    let binning = if args.edges.is_empty() {
        Binning::Quantiles(args.bins)
    } else {
        Binning::Edges(args.edges.clone())
    };
    if matches!(binning, Binning::Quantiles(0)) {
        return Err(invalid("--bins must be at least 1"));
    }
    let manifest = open_manifest(&args.manifest)?;
    let plan = leave_one_out_plan(&manifest).or_invalid()?;
    require_file(&args.queries, "--queries")?;
    require_file(&args.summary, "--summary")?;
    if let Some(p) = &args.matrix {
        require_file(p, "--matrix")?;
    }
    if let Some(name) = &args.eval_set {
        if manifest.cluster(name).is_none() {
            return Err(invalid(format!(
                "--eval-set {name:?} is not a manifest cluster"
            )));
        }
    }
    let queries = load_queries(&args.queries).or_invalid()?;
    let summary_text = fs::read_to_string(&args.summary).or_invalid()?;
    let report: SummaryReport = load_summary_json(&summary_text).or_invalid()?;

    let mut out = OutputDir::create(&args.out)?;
    out.record_input(&args.manifest)?;
    out.record_input(&args.queries)?;
    out.record_input(&args.summary)?;

    let rows = jaccard_loss_table(&manifest, &queries, &report.summaries, args.jaccard_mode)
        .or_invalid()?;
    out.write("jaccard_loss.csv", jaccard_loss_csv(&rows))?;

    if let (Some(matrix_path), Some(emb_path)) = (&args.matrix, &args.embeddings) {
        let emb = open_embeddings(emb_path, args.ids.as_deref())?;
        let text = fs::read_to_string(matrix_path).or_invalid()?;
        let matrix = EvalMatrix::from_long_tsv(&plan, report.metric, &text).or_invalid()?;
        out.record_input(matrix_path)?;
        out.record_input(emb_path)?;

        let mut scores = Vec::new();
        for cluster in &manifest.clusters {
            if args.eval_set.as_ref().is_some_and(|n| *n != cluster.name) {
                continue;
            }
            let experiment = plan
                .experiment(&experiment_name(&cluster.name))
                .expect("plan has one experiment per cluster");
            let index = SimilarityIndex::new(&emb, &experiment.train_ids)?;
            scores.extend(index.score_all(&emb, &cluster.test)?);
        }
        out.write("r_scores.tsv", r_scores_tsv(&scores))?;
        let bins = bin_by_similarity(&scores, &matrix, &binning)?;
        if !bins.empty_bins.is_empty() {
            log::warn!("empty similarity bins: {:?}", bins.empty_bins);
        }
        out.write("bins.csv", bins_csv(&bins))?;
    }
    out.finish(config)
}
