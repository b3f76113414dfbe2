use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};

use crate::corpus::{load_corpus, CorpusFormat};
use crate::engine::{
    build_index, load_snapshot, save_snapshot, Bm25Params, Index, ANALYZER_VERSION,
};
use crate::inequality::{distribution_stats, gini, lorenz, LorenzCurve};
use crate::manifest::{file_sha256, Manifest};
use crate::queryset::{
    load_query_log, sample_from_vocabulary, QuerySet, SamplingStrategy, Vocabulary, WeightingMode,
};
use crate::retrievability::{compute_retrievability, percent_retrieved, CutoffGrid};
use crate::synth::{generate_corpus, generate_interactions, generate_query_log, SynthSpec};
use crate::usefulness::{compute_usefulness, load_interactions, write_interactions, EventCounts};
use crate::Error;

pub const INDEX_DIR: &str = "index";
pub const RETRIEVABILITY_DIR: &str = "retrievability";
pub const USEFULNESS_DIR: &str = "usefulness";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const STATS_FILE: &str = "stats.csv";
pub const GINI_SWEEP_FILE: &str = "gini_sweep.csv";
pub const GINI_FILE: &str = "gini.csv";
pub const SNAPSHOT_EXT: &str = "idx";

pub const SYNTH_CORPUS: &str = "corpus.jsonl";
pub const SYNTH_QUERIES: &str = "queries.txt";
pub const SYNTH_INTERACTIONS: &str = "interactions.tsv";
pub const SYNTH_MANIFEST: &str = "synth.manifest";

/// Written wherever a Gini coefficient does not exist (all-zero scores).
pub const UNDEFINED: &str = "undefined";

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct BuildIndexConfig {
    pub corpus: PathBuf,
    pub out: PathBuf,
    pub params: Bm25Params,
}

#[derive(Debug, Clone)]
pub enum QuerySource {
    Log(PathBuf),
    Sample {
        n: usize,
        strategy: SamplingStrategy,
        seed: u64,
    },
}

#[derive(Debug, Clone)]
pub struct RetrievabilityConfig {
    pub out: PathBuf,
    pub index_dir: PathBuf,
    pub source: QuerySource,
    pub grid: CutoffGrid,
    pub params: Bm25Params,
    pub weighting: WeightingMode,
    pub lorenz_resolution: usize,
}

#[derive(Debug, Clone)]
pub struct UsefulnessConfig {
    pub out: PathBuf,
    pub index_dir: PathBuf,
    pub interactions: PathBuf,
    pub queries: Option<PathBuf>,
    pub cutoff: usize,
    pub params: Bm25Params,
    pub weighting: WeightingMode,
    pub lorenz_resolution: usize,
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub spec: SynthSpec,
    pub out: PathBuf,
}

/// File-name stem for a type label: ASCII alphanumerics, `-` and `_` kept,
/// everything else replaced by `_`.
pub fn partition_stem(type_label: &str) -> String {
    type_label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn require_exists(path: &Path, what: &str) -> Result<()> {
    if !path.exists() {
        bail!("{what} {} does not exist", path.display());
    }
    Ok(())
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush()
        .with_context(|| format!("writing {}", path.display()))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn gini_or_undefined(values: &[f64]) -> Result<String> {
    match gini(values) {
        Ok(g) => Ok(g.to_string()),
        Err(Error::AllZero) => Ok(UNDEFINED.to_owned()),
        Err(e) => Err(e.into()),
    }
}

fn write_lorenz(path: &Path, curve: &LorenzCurve) -> Result<()> {
    write_file(path, |w| {
        writeln!(w, "pop_fraction,value_fraction")?;
        for p in &curve.points {
            writeln!(w, "{},{}", p.population_fraction, p.value_fraction)?;
        }
        Ok(())
    })
}

/// What a build-index run produced.
#[derive(Debug, Clone)]
pub struct BuildIndexOutput {
    /// type label → snapshot path.
    pub snapshots: BTreeMap<String, PathBuf>,
}

pub fn build_index_cmd(config: &BuildIndexConfig) -> Result<BuildIndexOutput> {
    require_exists(&config.corpus, "corpus file")?;
    let started = Instant::now();
    let (corpus, load_report) = load_corpus(&config.corpus, CorpusFormat::JsonLines)
        .with_context(|| format!("loading corpus {}", config.corpus.display()))?;
    let partitions = corpus.partition_by_type();

    let mut stems: HashMap<String, &str> = HashMap::new();
    for label in partitions.keys() {
        if let Some(other) = stems.insert(partition_stem(label), label) {
            bail!("type labels `{other}` and `{label}` map to the same snapshot file name");
        }
    }

    let dir = config.out.join(INDEX_DIR);
    create_dir(&dir)?;
    let mut manifest = Manifest::new();
    manifest
        .push("command", "build-index")
        .push("tool_version", TOOL_VERSION)
        .push("analyzer", ANALYZER_VERSION)
        .push("k1", config.params.k1)
        .push("b", config.params.b)
        .push("corpus_file", file_name(&config.corpus))
        .push("corpus_sha256", file_sha256(&config.corpus)?)
        .push("records", corpus.len())
        .push("malformed_lines", load_report.malformed.len())
        .push("duplicate_ids", load_report.duplicate_ids.len())
        .push("empty_text_records", load_report.empty_text.len())
        .push("partitions", partitions.len());

    let mut snapshots = BTreeMap::new();
    for (label, part) in &partitions {
        let index = build_index(part, config.params)
            .with_context(|| format!("indexing partition `{label}`"))?;
        let stem = partition_stem(label);
        let path = dir.join(format!("{stem}.{SNAPSHOT_EXT}"));
        save_snapshot(&index, &path)?;
        manifest
            .push(format!("partition.{stem}.type"), label)
            .push(format!("partition.{stem}.documents"), index.doc_count())
            .push(format!("partition.{stem}.terms"), index.term_count())
            .push(
                format!("partition.{stem}.snapshot_sha256"),
                file_sha256(&path)?,
            );
        snapshots.insert(label.clone(), path);
    }
    manifest.save(&dir.join(MANIFEST_FILE))?;
    log::info!(
        "indexed {} records in {} partitions in {:.2?}",
        corpus.len(),
        partitions.len(),
        started.elapsed()
    );
    Ok(BuildIndexOutput { snapshots })
}

/// Loads every snapshot of a directory, ordered by type label.
pub fn load_indexes(dir: &Path, params: Bm25Params) -> Result<Vec<(PathBuf, Index)>> {
    if !dir.is_dir() {
        bail!(
            "index directory {} does not exist; run build-index first",
            dir.display()
        );
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == SNAPSHOT_EXT))
        .collect();
    if paths.is_empty() {
        bail!(
            "no index snapshots in {}; run build-index first",
            dir.display()
        );
    }
    paths.sort();
    let mut indexes = paths
        .into_iter()
        .map(|p| {
            let index = load_snapshot(&p, params)?;
            Ok((p, index))
        })
        .collect::<Result<Vec<_>>>()?;
    indexes.sort_by(|a, b| a.1.type_label().cmp(b.1.type_label()));
    Ok(indexes)
}

/// Per-(type, cutoff) row of the retrievability report.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub type_label: String,
    pub cutoff: usize,
    pub n: usize,
    pub zero_count: usize,
    pub mean: f64,
    pub geometric_mean_positive: f64,
    pub geometric_mean_shifted: f64,
    pub variance: f64,
    pub std: f64,
    pub gini: Option<f64>,
    pub retrieved: usize,
    pub retrieved_fraction: f64,
}

pub const STATS_HEADER: [&str; 12] = [
    "type",
    "cutoff",
    "n",
    "zero_count",
    "mean",
    "geometric_mean_positive",
    "geometric_mean_shifted",
    "variance",
    "std",
    "gini",
    "retrieved",
    "retrieved_fraction",
];

#[derive(Debug, Clone)]
pub struct RetrievabilityOutput {
    pub rows: Vec<StatsRow>,
    pub query_count: usize,
}

pub fn retrievability_cmd(config: &RetrievabilityConfig) -> Result<RetrievabilityOutput> {
    let indexes = load_indexes(&config.index_dir, config.params)?;
    let started = Instant::now();

    let mut manifest = Manifest::new();
    manifest
        .push("command", "retrievability")
        .push("tool_version", TOOL_VERSION)
        .push("analyzer", ANALYZER_VERSION)
        .push("k1", config.params.k1)
        .push("b", config.params.b)
        .push("cutoffs", &config.grid)
        .push("weighting", config.weighting)
        .push("lorenz_resolution", config.lorenz_resolution);

    let queries = match &config.source {
        QuerySource::Log(path) => {
            require_exists(path, "query log")?;
            manifest
                .push("query_source", "log")
                .push("queries_file", file_name(path))
                .push("queries_sha256", file_sha256(path)?);
            load_query_log(path, config.weighting)
                .with_context(|| format!("loading queries {}", path.display()))?
        }
        QuerySource::Sample { n, strategy, seed } => {
            manifest
                .push("query_source", "sample")
                .push("sample_size", n)
                .push("sample_strategy", strategy)
                .push("seed", seed);
            let vocab = Vocabulary::from_indexes(indexes.iter().map(|(_, i)| i));
            sample_from_vocabulary(&vocab, *n, *strategy, *seed)?
        }
    };
    let lengths = queries.length_stats();
    manifest
        .push("query_count", queries.len())
        .push("query_occurrences", queries.total_multiplicity())
        .push("query_mean_chars", lengths.mean_chars)
        .push("query_mean_terms", lengths.mean_terms);

    let dir = config.out.join(RETRIEVABILITY_DIR);
    let lorenz_dir = dir.join("lorenz");
    create_dir(&lorenz_dir)?;

    let mut rows = Vec::new();
    let mut sweep: Vec<(String, Vec<String>)> = Vec::new();
    for (path, index) in &indexes {
        let label = index.type_label();
        let stem = partition_stem(label);
        let t = Instant::now();
        let table = compute_retrievability(index, &queries, &config.grid)?;
        log::info!("retrievability for `{label}` in {:.2?}", t.elapsed());

        write_file(
            &dir.join(format!("{stem}.csv")),
            |w| Ok(table.write_csv(w)?),
        )?;
        let mut meta = Manifest::new();
        meta.push("type", label)
            .push("documents", table.doc_count())
            .push("query_count", table.query_count)
            .push("weighting", table.weighting)
            .push("cutoffs", &table.grid)
            .push("k1", index.params().k1)
            .push("b", index.params().b)
            .push("analyzer", ANALYZER_VERSION)
            .push("zero_hit_queries", table.zero_hit_queries);
        meta.save(&dir.join(format!("{stem}.meta")))?;

        manifest
            .push(format!("partition.{stem}.type"), label)
            .push(format!("partition.{stem}.documents"), index.doc_count())
            .push(
                format!("partition.{stem}.snapshot_sha256"),
                file_sha256(path)?,
            )
            .push(
                format!("partition.{stem}.zero_hit_queries"),
                table.zero_hit_queries,
            );

        let mut ginis = Vec::new();
        for (j, &cutoff) in config.grid.cutoffs().iter().enumerate() {
            let column = table.column_at(j);
            let stats = distribution_stats(&column)?;
            let g = gini_or_undefined(&column)?;
            let (retrieved, fraction) = percent_retrieved(&table, cutoff)?;
            if g != UNDEFINED {
                let curve = lorenz(&column, config.lorenz_resolution)?;
                write_lorenz(&lorenz_dir.join(format!("{stem}@{cutoff}.csv")), &curve)?;
            }
            manifest
                .push(format!("partition.{stem}.gini@{cutoff}"), &g)
                .push(format!("partition.{stem}.retrieved@{cutoff}"), retrieved)
                .push(
                    format!("partition.{stem}.retrieved_fraction@{cutoff}"),
                    fraction,
                );
            rows.push(StatsRow {
                type_label: label.to_owned(),
                cutoff,
                n: stats.n,
                zero_count: stats.zero_count,
                mean: stats.mean,
                geometric_mean_positive: stats.geometric_mean_positive,
                geometric_mean_shifted: stats.geometric_mean_shifted,
                variance: stats.variance,
                std: stats.std,
                gini: g.parse().ok(),
                retrieved,
                retrieved_fraction: fraction,
            });
            ginis.push(g);
        }
        sweep.push((label.to_owned(), ginis));
    }

    write_file(&dir.join(STATS_FILE), |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(STATS_HEADER)?;
        for r in &rows {
            out.write_record([
                r.type_label.clone(),
                r.cutoff.to_string(),
                r.n.to_string(),
                r.zero_count.to_string(),
                r.mean.to_string(),
                r.geometric_mean_positive.to_string(),
                r.geometric_mean_shifted.to_string(),
                r.variance.to_string(),
                r.std.to_string(),
                r.gini
                    .map_or_else(|| UNDEFINED.to_owned(), |g| g.to_string()),
                r.retrieved.to_string(),
                r.retrieved_fraction.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    })?;

    write_file(&dir.join(GINI_SWEEP_FILE), |w| {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["cutoff".to_owned()];
        header.extend(sweep.iter().map(|(l, _)| l.clone()));
        out.write_record(&header)?;
        for (j, cutoff) in config.grid.cutoffs().iter().enumerate() {
            let mut record = vec![cutoff.to_string()];
            record.extend(sweep.iter().map(|(_, g)| g[j].clone()));
            out.write_record(&record)?;
        }
        out.flush()?;
        Ok(())
    })?;

    manifest.save(&dir.join(MANIFEST_FILE))?;
    log::info!(
        "retrievability over {} queries and {} partitions in {:.2?}",
        queries.len(),
        indexes.len(),
        started.elapsed()
    );
    Ok(RetrievabilityOutput {
        rows,
        query_count: queries.len(),
    })
}

#[derive(Debug, Clone)]
pub struct UsefulnessPartition {
    pub type_label: String,
    pub gini: Option<f64>,
    pub counts: EventCounts,
}

#[derive(Debug, Clone)]
pub struct UsefulnessOutput {
    pub partitions: Vec<UsefulnessPartition>,
    /// Events whose document is in no partition.
    pub unrouted_events: usize,
}

pub fn usefulness_cmd(config: &UsefulnessConfig) -> Result<UsefulnessOutput> {
    require_exists(&config.interactions, "interaction log")?;
    let indexes = load_indexes(&config.index_dir, config.params)?;
    let started = Instant::now();
    let log = load_interactions(&config.interactions)
        .with_context(|| format!("loading interactions {}", config.interactions.display()))?;

    let mut manifest = Manifest::new();
    manifest
        .push("command", "usefulness")
        .push("tool_version", TOOL_VERSION)
        .push("analyzer", ANALYZER_VERSION)
        .push("k1", config.params.k1)
        .push("b", config.params.b)
        .push("cutoff", config.cutoff)
        .push("weighting", config.weighting)
        .push("difficulty", "constant:1")
        .push("lorenz_resolution", config.lorenz_resolution)
        .push("interactions_file", file_name(&config.interactions))
        .push("interactions_sha256", file_sha256(&config.interactions)?)
        .push("events", log.events.len())
        .push("malformed_lines", log.malformed.len())
        .push("exports", log.export_count());

    let queries = match &config.queries {
        Some(path) => {
            require_exists(path, "query log")?;
            manifest
                .push("query_source", "log")
                .push("queries_file", file_name(path))
                .push("queries_sha256", file_sha256(path)?);
            load_query_log(path, config.weighting)?
        }
        None => {
            manifest.push("query_source", "interactions");
            QuerySet::from_texts(log.events.iter().map(|e| &e.query_text), config.weighting)?
        }
    };
    manifest.push("query_count", queries.len());

    // Route every event to the partition holding its document.
    let mut owner: HashMap<&str, usize> = HashMap::new();
    for (i, (_, index)) in indexes.iter().enumerate() {
        for id in index.doc_ids() {
            owner.insert(id.as_str(), i);
        }
    }
    let mut routed = vec![Vec::new(); indexes.len()];
    let mut unrouted_events = 0;
    for e in &log.events {
        match owner.get(e.doc_id.as_str()) {
            Some(&i) => routed[i].push(e.clone()),
            None => unrouted_events += 1,
        }
    }
    manifest.push("unknown_document_events", unrouted_events);

    let dir = config.out.join(USEFULNESS_DIR);
    let lorenz_dir = dir.join("lorenz");
    create_dir(&lorenz_dir)?;

    let mut partitions = Vec::new();
    for ((path, index), events) in indexes.iter().zip(&routed) {
        let label = index.type_label();
        let stem = partition_stem(label);
        let table = compute_usefulness(index, events, &queries, config.cutoff)?;
        write_file(
            &dir.join(format!("{stem}.csv")),
            |w| Ok(table.write_csv(w)?),
        )?;

        let g = gini_or_undefined(&table.scores)?;
        if g != UNDEFINED {
            let curve = lorenz(&table.scores, config.lorenz_resolution)?;
            write_lorenz(&lorenz_dir.join(format!("{stem}.csv")), &curve)?;
        }
        let c = table.counts;
        manifest
            .push(format!("partition.{stem}.type"), label)
            .push(format!("partition.{stem}.documents"), index.doc_count())
            .push(
                format!("partition.{stem}.snapshot_sha256"),
                file_sha256(path)?,
            )
            .push(format!("partition.{stem}.gini"), &g)
            .push(format!("partition.{stem}.views"), c.views)
            .push(format!("partition.{stem}.exports"), c.exports)
            .push(format!("partition.{stem}.consumed"), c.consumed)
            .push(format!("partition.{stem}.ignored"), c.ignored)
            .push(format!("partition.{stem}.unknown_query"), c.unknown_query)
            .push(
                format!("partition.{stem}.useful_documents"),
                table.scores.iter().filter(|&&u| u > 0.0).count(),
            );
        partitions.push(UsefulnessPartition {
            type_label: label.to_owned(),
            gini: g.parse().ok(),
            counts: c,
        });
    }

    write_file(&dir.join(GINI_FILE), |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["type", "gini"])?;
        for p in &partitions {
            let g = p
                .gini
                .map_or_else(|| UNDEFINED.to_owned(), |g| g.to_string());
            out.write_record([p.type_label.as_str(), g.as_str()])?;
        }
        out.flush()?;
        Ok(())
    })?;
    manifest.save(&dir.join(MANIFEST_FILE))?;
    log::info!("usefulness in {:.2?}", started.elapsed());
    Ok(UsefulnessOutput {
        partitions,
        unrouted_events,
    })
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub corpus: PathBuf,
    pub queries: PathBuf,
    pub interactions: PathBuf,
}

pub fn synth_cmd(config: &SynthConfig) -> Result<SynthOutput> {
    let spec = &config.spec;
    spec.validate()?;
    create_dir(&config.out)?;

    let corpus = generate_corpus(spec)?;
    let corpus_path = config.out.join(SYNTH_CORPUS);
    corpus.save(&corpus_path)?;

    let log_lines = generate_query_log(spec, spec.query_count)?;
    let queries_path = config.out.join(SYNTH_QUERIES);
    write_file(&queries_path, |w| {
        for q in &log_lines {
            writeln!(w, "{q}")?;
        }
        Ok(())
    })?;

    let queries = QuerySet::from_texts(&log_lines, WeightingMode::Uniform)?;
    let events = generate_interactions(
        &corpus,
        &queries,
        spec.export_rate,
        spec.events_per_query,
        spec.seed,
    )?;
    let interactions_path = config.out.join(SYNTH_INTERACTIONS);
    write_file(&interactions_path, |w| Ok(write_interactions(&events, w)?))?;

    let mut manifest = Manifest::new();
    manifest
        .push("command", "synth")
        .push("tool_version", TOOL_VERSION);
    for line in spec.to_string().lines() {
        if let Some((k, v)) = line.split_once('=') {
            manifest.push(k, v);
        }
    }
    manifest
        .push("records", corpus.len())
        .push("distinct_queries", queries.len())
        .push("events", events.len());
    manifest.save(&config.out.join(SYNTH_MANIFEST))?;

    Ok(SynthOutput {
        corpus: corpus_path,
        queries: queries_path,
        interactions: interactions_path,
    })
}
