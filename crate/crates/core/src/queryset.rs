//! The query population: loaded from a query log or sampled from the
//! collection itself, with per-query weights and a difficulty hook.
//!
//! Query log format: UTF-8, one query per line. An optional second
//! tab-separated column holds a precomputed occurrence count; if any line has
//! a count, every line must.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{tokenize, Index};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightingMode {
    /// Every query weighs 1.
    #[default]
    Uniform,
    /// A query weighs as many times as it occurs in the log.
    Multiplicity,
}

impl WeightingMode {
    pub fn weight_for(self, multiplicity: u64) -> f64 {
        match self {
            WeightingMode::Uniform => 1.0,
            WeightingMode::Multiplicity => multiplicity as f64,
        }
    }
}

impl FromStr for WeightingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(WeightingMode::Uniform),
            "multiplicity" => Ok(WeightingMode::Multiplicity),
            other => Err(Error::InvalidArgument(format!(
                "unknown weighting mode `{other}` (expected uniform|multiplicity)"
            ))),
        }
    }
}

impl fmt::Display for WeightingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightingMode::Uniform => "uniform",
            WeightingMode::Multiplicity => "multiplicity",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    /// Normalized text (trimmed, lowercased).
    pub text: String,
    pub multiplicity: u64,
    pub weight: f64,
    pub difficulty: f64,
}

impl Query {
    /// `w'_q = w_q · h(q)`.
    pub fn effective_weight(&self) -> f64 {
        self.weight * self.difficulty
    }

    pub fn terms(&self) -> Vec<String> {
        tokenize(&self.text)
    }
}

/// Estimates how hard a query is; larger means harder.
pub trait DifficultyEstimator: Sync {
    fn difficulty(&self, query: &Query) -> f64;
}

/// Treats every query as equally difficult.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantDifficulty;

impl DifficultyEstimator for ConstantDifficulty {
    fn difficulty(&self, _query: &Query) -> f64 {
        1.0
    }
}

/// The difficulty used throughout this release: constant 1.
pub fn query_difficulty(query: &Query) -> f64 {
    ConstantDifficulty.difficulty(query)
}

pub fn normalize_query(text: &str) -> String {
    text.trim().to_lowercase()
}

/// Mean query length over the distinct queries of a set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryLengthStats {
    pub mean_chars: f64,
    pub mean_terms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuerySet {
    queries: Vec<Query>,
    weighting: WeightingMode,
    by_text: HashMap<String, usize>,
}

impl QuerySet {
    /// Builds a set from `(text, occurrences)` pairs, merging texts that are
    /// equal after normalization. Blank texts are dropped.
    pub fn from_counts<I, S>(items: I, weighting: WeightingMode) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        let mut queries: Vec<Query> = Vec::new();
        let mut by_text: HashMap<String, usize> = HashMap::new();
        for (text, count) in items {
            if count == 0 {
                return Err(Error::InvalidArgument(
                    "query occurrence count must be positive".into(),
                ));
            }
            let text = normalize_query(text.as_ref());
            if text.is_empty() {
                continue;
            }
            match by_text.get(&text) {
                Some(&i) => queries[i].multiplicity += count,
                None => {
                    by_text.insert(text.clone(), queries.len());
                    queries.push(Query {
                        text,
                        multiplicity: count,
                        weight: 0.0,
                        difficulty: 1.0,
                    });
                }
            }
        }
        if queries.is_empty() {
            return Err(Error::EmptyQuerySet);
        }
        for q in &mut queries {
            q.weight = weighting.weight_for(q.multiplicity);
            q.difficulty = query_difficulty(q);
        }
        Ok(QuerySet {
            queries,
            weighting,
            by_text,
        })
    }

    /// One occurrence per item.
    pub fn from_texts<I, S>(texts: I, weighting: WeightingMode) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self::from_counts(texts.into_iter().map(|t| (t, 1)), weighting)
    }

    /// Builds a set from fully specified queries, e.g. with a custom difficulty.
    pub fn from_queries(queries: Vec<Query>, weighting: WeightingMode) -> Result<Self> {
        if queries.is_empty() {
            return Err(Error::EmptyQuerySet);
        }
        let mut by_text = HashMap::with_capacity(queries.len());
        for (i, q) in queries.iter().enumerate() {
            if q.multiplicity == 0
                || q.weight.is_nan()
                || q.weight < 0.0
                || q.difficulty.is_nan()
                || q.difficulty <= 0.0
            {
                return Err(Error::InvalidArgument(format!(
                    "query `{}` violates multiplicity >= 1, weight >= 0, difficulty > 0",
                    q.text
                )));
            }
            if by_text.insert(q.text.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate query `{}`",
                    q.text
                )));
            }
        }
        Ok(QuerySet {
            queries,
            weighting,
            by_text,
        })
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn weighting(&self) -> WeightingMode {
        self.weighting
    }

    /// Looks a query up by its text, normalizing first.
    pub fn get(&self, text: &str) -> Option<&Query> {
        self.by_text
            .get(&normalize_query(text))
            .map(|&i| &self.queries[i])
    }

    /// Raw number of query occurrences the set was built from.
    pub fn total_multiplicity(&self) -> u64 {
        self.queries.iter().map(|q| q.multiplicity).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.queries.iter().map(|q| q.weight).sum()
    }

    pub fn length_stats(&self) -> QueryLengthStats {
        let n = self.queries.len() as f64;
        let chars: usize = self.queries.iter().map(|q| q.text.chars().count()).sum();
        let terms: usize = self.queries.iter().map(|q| q.terms().len()).sum();
        QueryLengthStats {
            mean_chars: chars as f64 / n,
            mean_terms: terms as f64 / n,
        }
    }

    /// Writes the set in the counted query-log format.
    pub fn write_log<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for q in &self.queries {
            writeln!(w, "{}\t{}", q.text, q.multiplicity)?;
        }
        w.flush()
    }
}

pub fn load_query_log(path: &Path, weighting: WeightingMode) -> Result<QuerySet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_query_log(BufReader::new(file), path, weighting)
}

pub fn parse_query_log<R: BufRead>(
    reader: R,
    origin: &Path,
    weighting: WeightingMode,
) -> Result<QuerySet> {
    let mut items: Vec<(String, u64)> = Vec::new();
    let mut counted: Option<bool> = None;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        let format_err = |message: String| Error::Format {
            path: origin.to_path_buf(),
            line: line_no,
            message,
        };
        let (text, count) = match line.split_once('\t') {
            Some((text, count)) => {
                let count = count
                    .trim()
                    .parse::<u64>()
                    .ok()
                    .filter(|&c| c > 0)
                    .ok_or_else(|| format_err(format!("bad count `{}`", count.trim())))?;
                (text, Some(count))
            }
            None => (line.as_str(), None),
        };
        if text.trim().is_empty() {
            continue;
        }
        match counted {
            None => counted = Some(count.is_some()),
            Some(c) if c != count.is_some() => {
                return Err(format_err(
                    "either every line carries a count column or none does".into(),
                ))
            }
            _ => {}
        }
        items.push((text.to_owned(), count.unwrap_or(1)));
    }
    QuerySet::from_counts(items, weighting).map_err(|e| match e {
        Error::EmptyQuerySet => Error::NoQueries {
            path: origin.to_path_buf(),
        },
        other => other,
    })
}

/// Collection term frequencies, in ascending term order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<(String, u64)>,
}

impl Vocabulary {
    pub fn from_index(index: &Index) -> Self {
        Self::from_indexes(std::iter::once(index))
    }

    /// Merges the vocabularies of several partitions.
    pub fn from_indexes<'a>(indexes: impl IntoIterator<Item = &'a Index>) -> Self {
        let mut merged: BTreeMap<String, u64> = BTreeMap::new();
        for index in indexes {
            for (term, postings) in index.sorted_terms() {
                let cf: u64 = postings.iter().map(|p| u64::from(p.tf)).sum();
                *merged.entry(term.to_owned()).or_insert(0) += cf;
            }
        }
        Vocabulary {
            terms: merged.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.terms
            .binary_search_by(|(t, _)| t.as_str().cmp(term))
            .is_ok()
    }

    pub fn terms(&self) -> &[(String, u64)] {
        &self.terms
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingStrategy {
    #[default]
    Unigram,
    Bigram,
}

impl FromStr for SamplingStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unigram" => Ok(SamplingStrategy::Unigram),
            "bigram" => Ok(SamplingStrategy::Bigram),
            other => Err(Error::InvalidArgument(format!(
                "unknown sampling strategy `{other}` (expected unigram|bigram)"
            ))),
        }
    }
}

impl fmt::Display for SamplingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplingStrategy::Unigram => "unigram",
            SamplingStrategy::Bigram => "bigram",
        })
    }
}

/// Query-based sampling over one index.
pub fn sample_queries(
    index: &Index,
    n: usize,
    strategy: SamplingStrategy,
    seed: u64,
) -> Result<QuerySet> {
    sample_from_vocabulary(&Vocabulary::from_index(index), n, strategy, seed)
}

/// Draws `n` distinct queries with terms chosen proportionally to their
/// collection frequency. Unigram draws are without replacement; bigrams join
/// two distinct terms with a space. Weights and difficulties are 1.
pub fn sample_from_vocabulary(
    vocab: &Vocabulary,
    n: usize,
    strategy: SamplingStrategy,
    seed: u64,
) -> Result<QuerySet> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sample size must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = vocab.len();
    let texts: Vec<String> = match strategy {
        SamplingStrategy::Unigram => {
            if n > v {
                return Err(Error::VocabularyTooSmall {
                    requested: n,
                    available: v,
                });
            }
            vocab
                .terms
                .choose_multiple_weighted(&mut rng, n, |(_, cf)| *cf as f64)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?
                .map(|(t, _)| t.clone())
                .collect()
        }
        SamplingStrategy::Bigram => {
            let available = v.saturating_mul(v.saturating_sub(1));
            if n > available {
                return Err(Error::VocabularyTooSmall {
                    requested: n,
                    available,
                });
            }
            let dist = WeightedIndex::new(vocab.terms.iter().map(|(_, cf)| *cf as f64))
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let mut seen = HashSet::with_capacity(n);
            let mut out = Vec::with_capacity(n);
            let max_attempts = 1000 + 100 * n;
            let mut attempts = 0;
            while out.len() < n {
                attempts += 1;
                if attempts > max_attempts {
                    return Err(Error::InvalidArgument(format!(
                        "could not draw {n} distinct bigrams after {max_attempts} attempts"
                    )));
                }
                let a = dist.sample(&mut rng);
                let b = dist.sample(&mut rng);
                if a == b {
                    continue;
                }
                let text = format!("{} {}", vocab.terms[a].0, vocab.terms[b].0);
                if seen.insert(text.clone()) {
                    out.push(text);
                }
            }
            out
        }
    };
    QuerySet::from_texts(texts, WeightingMode::Uniform)
}
