mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

use commands::evaluate::{EvalArgs, IndicatorsArgs};
use commands::retrieval::{Bm25RunArgs, MineArgs};
use commands::shifts::{ExportClusterTsvArgs, LengthShiftArgs, TopicShiftArgs, WhShiftArgs};
use error::{CliError, CliResult};
use output::ResolvedConfig;

/// Build query-distribution shifts, mine BM25 triplets, evaluate zero-shot
/// runs and compute train/test similarity indicators.
///
/// Exit status: 0 on success, 1 for invalid input, 2 for failures after
/// validation.
#[derive(Debug, Parser)]
#[command(name = "qshift", version, args_override_self = true)]
struct Cli {
    /// JSON object of flag values (keys are long flag names); flags given on
    /// the command line take precedence.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Worker threads; 0 uses every core. Outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster query embeddings and grow the most spread-out clusters into
    /// topic shift clusters.
    TopicShift(TopicShiftArgs),
    /// Split queries by question keyword into wha / how / who.
    WhShift(WhShiftArgs),
    /// Split queries into short and long by token count.
    LengthShift(LengthShiftArgs),
    /// Mine (query, positive, negative) triplets from BM25 rankings.
    MineNegatives(MineArgs),
    /// Write a BM25 TREC run.
    Bm25Run(Bm25RunArgs),
    /// Score runs over the leave-one-out plan and summarize in-domain
    /// versus zero-shot performance.
    Eval(EvalArgs),
    /// Relate zero-shot loss to weighted Jaccard and embedding similarity.
    Indicators(IndicatorsArgs),
    /// Dump embeddings with cluster labels for external projection tools.
    ExportClusterTsv(ExportClusterTsvArgs),
}

impl Command {
    fn run(&self) -> CliResult<()> {
        let (name, result) = match self {
            Command::TopicShift(a) => (
                "topic-shift",
                commands::shifts::topic_shift(a, &cfg("topic-shift", a)),
            ),
            Command::WhShift(a) => (
                "wh-shift",
                commands::shifts::wh_shift(a, &cfg("wh-shift", a)),
            ),
            Command::LengthShift(a) => (
                "length-shift",
                commands::shifts::length_shift(a, &cfg("length-shift", a)),
            ),
            Command::MineNegatives(a) => (
                "mine-negatives",
                commands::retrieval::mine(a, &cfg("mine-negatives", a)),
            ),
            Command::Bm25Run(a) => (
                "bm25-run",
                commands::retrieval::bm25_run(a, &cfg("bm25-run", a)),
            ),
            Command::Eval(a) => ("eval", commands::evaluate::eval(a, &cfg("eval", a))),
            Command::Indicators(a) => (
                "indicators",
                commands::evaluate::indicators(a, &cfg("indicators", a)),
            ),
            Command::ExportClusterTsv(a) => (
                "export-cluster-tsv",
                commands::shifts::export_cluster_tsv(a, &cfg("export-cluster-tsv", a)),
            ),
        };
        if result.is_ok() {
            log::info!("{name} done");
        }
        result
    }
}

fn cfg<A: serde::Serialize>(command: &str, args: &A) -> ResolvedConfig {
    ResolvedConfig::new(command, args)
}

fn run() -> CliResult<()> {
    let subcommands: Vec<String> = Cli::command()
        .get_subcommands()
        .map(|c| c.get_name().to_owned())
        .collect();
    let argv = config::expand_config(std::env::args_os().collect(), &subcommands)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            e.print().ok();
            return Ok(());
        }
        Err(e) => {
            e.print().ok();
            return Err(CliError::Validation(anyhow::anyhow!("invalid arguments")));
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(anyhow::Error::from)?;
    pool.install(|| cli.command.run())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
