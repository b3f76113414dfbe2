//! Command-line front end. Each subcommand maps onto one config struct in
//! [`commands`] so the same workflow can be driven from code.

pub mod commands;
pub mod report;

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use crate::engine::Bm25Params;
use crate::queryset::{SamplingStrategy, WeightingMode};
use crate::retrievability::CutoffGrid;
use crate::synth::SynthSpec;
use crate::usefulness::DEFAULT_USEFULNESS_CUTOFF;

pub use commands::{
    build_index_cmd, retrievability_cmd, synth_cmd, usefulness_cmd, BuildIndexConfig, QuerySource,
    RetrievabilityConfig, SynthConfig, UsefulnessConfig,
};

#[derive(Debug, Parser)]
#[command(
    name = "retaudit",
    version,
    about = "Retrievability and usefulness bias audits"
)]
pub struct Cli {
    /// Worker threads; 0 uses every available processor.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Log progress and timings to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build one index snapshot per type partition of a corpus.
    BuildIndex(BuildIndexArgs),
    /// Compute retrievability tables, statistics, Gini and Lorenz curves.
    Retrievability(RetrievabilityArgs),
    /// Compute usefulness from export events.
    Usefulness(UsefulnessArgs),
    /// Generate a synthetic corpus, query log and interaction log.
    Synth(SynthArgs),
    /// Summarize the outputs of earlier runs in a plain-text report.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct Bm25Args {
    #[arg(long, default_value_t = 1.2)]
    pub k1: f64,
    #[arg(long, default_value_t = 0.75)]
    pub b: f64,
}

impl Bm25Args {
    fn params(&self) -> anyhow::Result<Bm25Params> {
        Ok(Bm25Params::new(self.k1, self.b)?)
    }
}

#[derive(Debug, Args)]
pub struct BuildIndexArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub bm25: Bm25Args,
}

#[derive(Debug, Args)]
pub struct RetrievabilityArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Snapshot directory; defaults to `<out>/index`.
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Query log file.
    #[arg(long, conflicts_with = "sample")]
    pub queries: Option<PathBuf>,
    /// Sample this many queries from the indexed vocabulary instead of a log.
    #[arg(long, required_unless_present = "queries")]
    pub sample: Option<usize>,
    #[arg(long, default_value = "unigram")]
    pub strategy: SamplingStrategy,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = "10,20,30,40,50,100")]
    pub cutoffs: CutoffGrid,
    #[arg(long, default_value = "uniform")]
    pub weighting: WeightingMode,
    #[arg(long, default_value_t = 100)]
    pub lorenz_resolution: usize,
    #[command(flatten)]
    pub bm25: Bm25Args,
}

#[derive(Debug, Args)]
pub struct UsefulnessArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[arg(long)]
    pub interactions: PathBuf,
    /// Query log supplying weights; defaults to the queries of the interaction log.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_USEFULNESS_CUTOFF)]
    pub cutoff: usize,
    #[arg(long, default_value = "uniform")]
    pub weighting: WeightingMode,
    #[arg(long, default_value_t = 100)]
    pub lorenz_resolution: usize,
    #[command(flatten)]
    pub bm25: Bm25Args,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// key=value spec file; flags below override it.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Documents per type, e.g. `publication:2000,dataset:500`.
    #[arg(long)]
    pub docs: Option<String>,
    #[arg(long)]
    pub vocabulary: Option<usize>,
    #[arg(long)]
    pub min_length: Option<usize>,
    #[arg(long)]
    pub max_length: Option<usize>,
    /// Zipf exponent of term draws; 0 is uniform.
    #[arg(long)]
    pub skew: Option<f64>,
    #[arg(long)]
    pub query_count: Option<usize>,
    #[arg(long)]
    pub export_rate: Option<f64>,
    #[arg(long)]
    pub events_per_query: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SynthArgs {
    fn spec(&self) -> anyhow::Result<SynthSpec> {
        let mut spec = match &self.spec {
            Some(path) => std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?
                .parse()?,
            None => SynthSpec::default(),
        };
        if let Some(docs) = &self.docs {
            let parsed: SynthSpec = format!("types={docs}").parse()?;
            spec.doc_counts = parsed.doc_counts;
        }
        macro_rules! apply {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { spec.$field = v; })*
            };
        }
        apply!(vocabulary => vocabulary_size, min_length => min_length, max_length => max_length,
               skew => skew, query_count => query_count, export_rate => export_rate,
               events_per_query => events_per_query, seed => seed);
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .context("building the worker pool")?;
    pool.install(|| dispatch(cli.command))
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::BuildIndex(a) => {
            build_index_cmd(&BuildIndexConfig {
                corpus: a.corpus,
                out: a.out,
                params: a.bm25.params()?,
            })?;
        }
        Command::Retrievability(a) => {
            let source = match (a.queries, a.sample) {
                (Some(path), _) => QuerySource::Log(path),
                (None, Some(n)) => QuerySource::Sample {
                    n,
                    strategy: a.strategy,
                    seed: a.seed,
                },
                (None, None) => anyhow::bail!("either --queries or --sample is required"),
            };
            retrievability_cmd(&RetrievabilityConfig {
                index_dir: a.index.unwrap_or_else(|| a.out.join("index")),
                out: a.out,
                source,
                grid: a.cutoffs,
                params: a.bm25.params()?,
                weighting: a.weighting,
                lorenz_resolution: a.lorenz_resolution,
            })?;
        }
        Command::Usefulness(a) => {
            usefulness_cmd(&UsefulnessConfig {
                index_dir: a.index.unwrap_or_else(|| a.out.join("index")),
                out: a.out,
                interactions: a.interactions,
                queries: a.queries,
                cutoff: a.cutoff,
                params: a.bm25.params()?,
                weighting: a.weighting,
                lorenz_resolution: a.lorenz_resolution,
            })?;
        }
        Command::Synth(a) => {
            synth_cmd(&SynthConfig {
                spec: a.spec()?,
                out: a.out,
            })?;
        }
        Command::Report(a) => {
            let text = report::report_cmd(&a.out)?;
            print!("{text}");
        }
    }
    Ok(())
}
