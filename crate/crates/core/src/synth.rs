//! Seeded synthetic collections, query logs and interaction logs with a
//! single popularity knob: the Zipf exponent of term draws.
//!
//! A spec file is line-oriented `key=value`:
//!
//! ```text
//! types=publication:2000,dataset:2000
//! vocabulary_size=5000
//! min_length=20
//! max_length=40
//! skew=1.2
//! queries=2000
//! export_rate=0.3
//! events_per_query=3
//! seed=42
//! ```

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::corpus::{Corpus, Record};
use crate::engine::tokenize;
use crate::error::{Error, Result};
use crate::queryset::{QuerySet, WeightingMode};
use crate::usefulness::{InteractionEvent, InteractionKind};

const CORPUS_STREAM: u64 = 1;
const QUERY_STREAM: u64 = 2;
const INTERACTION_STREAM: u64 = 3;

/// Number of leading tokens that go into the `title` field.
const TITLE_TOKENS: usize = 6;

/// 2020-01-01T00:00:00Z; synthetic events are one second apart from here.
const EVENT_EPOCH: i64 = 1_577_836_800;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    /// Records to generate per type label, in generation order.
    pub doc_counts: Vec<(String, usize)>,
    pub vocabulary_size: usize,
    pub min_length: usize,
    pub max_length: usize,
    /// Zipf exponent for term draws; 0 is uniform.
    pub skew: f64,
    pub query_count: usize,
    pub export_rate: f64,
    pub events_per_query: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            doc_counts: vec![("publication".into(), 1000), ("dataset".into(), 500)],
            vocabulary_size: 5000,
            min_length: 20,
            max_length: 40,
            skew: 1.0,
            query_count: 1000,
            export_rate: 0.3,
            events_per_query: 3,
            seed: 42,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidArgument(m));
        if self.doc_counts.is_empty() {
            return invalid("at least one type is required".into());
        }
        for (label, count) in &self.doc_counts {
            if label.trim().is_empty() || label.contains([',', ':']) {
                return invalid(format!("bad type label `{label}`"));
            }
            if *count == 0 {
                return invalid(format!("type `{label}` needs at least one document"));
            }
        }
        if self.vocabulary_size < 2 {
            return invalid("vocabulary_size must be >= 2".into());
        }
        if self.min_length == 0 || self.min_length > self.max_length {
            return invalid(format!(
                "document length range {}..={} is invalid",
                self.min_length, self.max_length
            ));
        }
        if !(self.skew.is_finite() && self.skew >= 0.0) {
            return invalid(format!("skew must be >= 0, got {}", self.skew));
        }
        if !(0.0..=1.0).contains(&self.export_rate) {
            return invalid(format!(
                "export_rate must be in [0, 1], got {}",
                self.export_rate
            ));
        }
        if self.query_count == 0 {
            return invalid("queries must be >= 1".into());
        }
        Ok(())
    }

    /// Vocabulary term of popularity rank `rank` (1-based).
    pub fn term(rank: usize) -> String {
        format!("w{rank}")
    }

    fn zipf(&self) -> Result<Zipf<f64>> {
        Zipf::new(self.vocabulary_size as f64, self.skew)
            .map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

impl FromStr for SynthSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut spec = SynthSpec::default();
        for (i, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: String| Error::InvalidArgument(format!("spec line {}: {m}", i + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad("expected key=value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| bad(format!("bad number `{v}`")))
            };
            let real = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| bad(format!("bad number `{v}`")))
            };
            match key {
                "types" => {
                    spec.doc_counts = value
                        .split(',')
                        .map(|item| {
                            let (label, count) = item.split_once(':').ok_or_else(|| {
                                bad(format!("expected label:count, got `{item}`"))
                            })?;
                            Ok((label.trim().to_owned(), num(count.trim())?))
                        })
                        .collect::<Result<_>>()?;
                }
                "vocabulary_size" => spec.vocabulary_size = num(value)?,
                "min_length" => spec.min_length = num(value)?,
                "max_length" => spec.max_length = num(value)?,
                "skew" => spec.skew = real(value)?,
                "queries" => spec.query_count = num(value)?,
                "export_rate" => spec.export_rate = real(value)?,
                "events_per_query" => spec.events_per_query = num(value)?,
                "seed" => {
                    spec.seed = value
                        .parse()
                        .map_err(|_| bad(format!("bad seed `{value}`")))?
                }
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for SynthSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let types: Vec<String> = self
            .doc_counts
            .iter()
            .map(|(l, c)| format!("{l}:{c}"))
            .collect();
        writeln!(f, "types={}", types.join(","))?;
        writeln!(f, "vocabulary_size={}", self.vocabulary_size)?;
        writeln!(f, "min_length={}", self.min_length)?;
        writeln!(f, "max_length={}", self.max_length)?;
        writeln!(f, "skew={}", self.skew)?;
        writeln!(f, "queries={}", self.query_count)?;
        writeln!(f, "export_rate={}", self.export_rate)?;
        writeln!(f, "events_per_query={}", self.events_per_query)?;
        writeln!(f, "seed={}", self.seed)
    }
}

pub fn generate_corpus(spec: &SynthSpec) -> Result<Corpus> {
    spec.validate()?;
    let zipf = spec.zipf()?;
    let mut rng = spec.rng(CORPUS_STREAM);
    let mut records = Vec::new();
    for (label, count) in &spec.doc_counts {
        for i in 0..*count {
            let len = rng.random_range(spec.min_length..=spec.max_length);
            let tokens: Vec<String> = (0..len)
                .map(|_| SynthSpec::term(zipf.sample(&mut rng) as usize))
                .collect();
            let split = len.min(TITLE_TOKENS);
            let mut fields = vec![("title".to_owned(), tokens[..split].join(" "))];
            if len > split {
                fields.push(("description".to_owned(), tokens[split..].join(" ")));
            }
            records.push(Record::new(
                format!("{label}-{i:06}"),
                label.clone(),
                fields,
            ));
        }
    }
    Corpus::from_records(records)
}

/// `n` raw query-log lines: single terms drawn from the same Zipf law.
pub fn generate_query_log(spec: &SynthSpec, n: usize) -> Result<Vec<String>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("query count must be >= 1".into()));
    }
    let zipf = spec.zipf()?;
    let mut rng = spec.rng(QUERY_STREAM);
    Ok((0..n)
        .map(|_| SynthSpec::term(zipf.sample(&mut rng) as usize))
        .collect())
}

/// The query log of [`generate_query_log`] as a uniformly weighted set.
pub fn generate_queries(spec: &SynthSpec, n: usize) -> Result<QuerySet> {
    QuerySet::from_texts(generate_query_log(spec, n)?, WeightingMode::Uniform)
}

/// For every query, `events_per_query` events on documents chosen uniformly
/// among those containing a query term; each is an export with probability
/// `export_rate`, otherwise a view.
pub fn generate_interactions(
    corpus: &Corpus,
    queries: &QuerySet,
    export_rate: f64,
    events_per_query: usize,
    seed: u64,
) -> Result<Vec<InteractionEvent>> {
    if !(0.0..=1.0).contains(&export_rate) {
        return Err(Error::InvalidArgument(format!(
            "export_rate must be in [0, 1], got {export_rate}"
        )));
    }
    let mut containing: HashMap<String, Vec<usize>> = HashMap::new();
    for (pos, r) in corpus.records().iter().enumerate() {
        let mut terms = tokenize(&r.text());
        terms.sort_unstable();
        terms.dedup();
        for t in terms {
            containing.entry(t).or_default().push(pos);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(INTERACTION_STREAM);
    let mut events = Vec::new();
    for q in queries.queries() {
        let mut candidates: Vec<usize> = q
            .terms()
            .iter()
            .filter_map(|t| containing.get(t))
            .flatten()
            .copied()
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        if candidates.is_empty() {
            continue;
        }
        for _ in 0..events_per_query {
            let doc = &corpus.records()[candidates[rng.random_range(0..candidates.len())]];
            let kind = if rng.random_bool(export_rate) {
                InteractionKind::Export
            } else {
                InteractionKind::View
            };
            let at = chrono::DateTime::from_timestamp(EVENT_EPOCH + events.len() as i64, 0)
                .expect("in range");
            events.push(InteractionEvent {
                query_text: q.text.clone(),
                doc_id: doc.id.clone(),
                kind,
                timestamp: Some(at.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
            });
        }
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(skew: f64) -> SynthSpec {
        SynthSpec {
            doc_counts: vec![("pub".into(), 10)],
            vocabulary_size: 50,
            min_length: 5,
            max_length: 12,
            skew,
            query_count: 20,
            export_rate: 0.5,
            events_per_query: 2,
            seed: 9,
        }
    }

    #[test]
    fn counts_and_unique_ids() {
        let c = generate_corpus(&small(1.0)).unwrap();
        assert_eq!(c.len(), 10);
        let mut ids: Vec<&str> = c.records().iter().map(|r| r.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 10);
        for r in c.records() {
            let n = tokenize(&r.text()).len();
            assert!((5..=12).contains(&n));
        }
    }

    #[test]
    fn seeded() {
        let spec = small(1.2);
        assert_eq!(
            generate_corpus(&spec).unwrap(),
            generate_corpus(&spec).unwrap()
        );
        assert_eq!(
            generate_queries(&spec, 30).unwrap(),
            generate_queries(&spec, 30).unwrap()
        );
        let other = SynthSpec {
            seed: 10,
            ..spec.clone()
        };
        assert_ne!(
            generate_corpus(&spec).unwrap(),
            generate_corpus(&other).unwrap()
        );
    }

    #[test]
    fn queries_stay_in_vocabulary() {
        let spec = small(1.0);
        let log = generate_query_log(&spec, 5).unwrap();
        assert_eq!(log.len(), 5);
        let qs = generate_queries(&spec, 5).unwrap();
        assert_eq!(qs.total_multiplicity(), 5);
        for q in qs.queries() {
            let rank: usize = q.text[1..].parse().unwrap();
            assert!((1..=spec.vocabulary_size).contains(&rank));
        }
        assert!(generate_queries(&spec, 0).is_err());
    }

    #[test]
    fn heavy_skew_concentrates_on_head() {
        let spec = SynthSpec {
            skew: 2.0,
            ..small(2.0)
        };
        let qs = generate_queries(&spec, 1000).unwrap();
        let head = qs.get(&SynthSpec::term(1)).unwrap().multiplicity;
        // P(rank 1) = 1 / H(50, 2) ≈ 0.62
        assert!(head > 500, "head multiplicity {head}");
        assert!(qs.queries().iter().all(|q| q.multiplicity <= head));
    }

    #[test]
    fn export_rate_boundaries() {
        let spec = small(1.0);
        let c = generate_corpus(&spec).unwrap();
        let qs = generate_queries(&spec, 20).unwrap();
        let none = generate_interactions(&c, &qs, 0.0, 3, 1).unwrap();
        assert!(!none.is_empty());
        assert!(none.iter().all(|e| e.kind == InteractionKind::View));
        let all = generate_interactions(&c, &qs, 1.0, 3, 1).unwrap();
        assert!(all.iter().all(|e| e.kind == InteractionKind::Export));
        assert!(generate_interactions(&c, &qs, 1.5, 3, 1).is_err());
    }

    #[test]
    fn events_target_containing_docs() {
        let spec = small(0.5);
        let c = generate_corpus(&spec).unwrap();
        let qs = generate_queries(&spec, 20).unwrap();
        let events = generate_interactions(&c, &qs, 0.5, 4, 3).unwrap();
        for e in &events {
            let doc = c.records().iter().find(|r| r.id == e.doc_id).unwrap();
            assert!(tokenize(&doc.text()).contains(&e.query_text));
        }
        assert_eq!(events, generate_interactions(&c, &qs, 0.5, 4, 3).unwrap());
    }

    #[test]
    fn spec_text_round_trip() {
        let spec = small(1.2);
        let back: SynthSpec = spec.to_string().parse().unwrap();
        assert_eq!(back, spec);
        assert!("types=pub:0".parse::<SynthSpec>().is_err());
        assert!("colour=blue".parse::<SynthSpec>().is_err());
        assert!("skew=-1".parse::<SynthSpec>().is_err());
    }
}
