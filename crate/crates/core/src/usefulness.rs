//! Usefulness `u(d) = Σ_q w_q·h(q) · rel(d,q) / k(d,q)` from interaction logs,
//! with export events as binary implicit relevance.
//!
//! Interaction log format: UTF-8, tab-separated
//! `query<TAB>doc_id<TAB>kind[<TAB>timestamp]` where `kind` is `view` or
//! `export` and the optional timestamp is RFC 3339.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::LineIssue;
use crate::engine::{retrieve_terms, Index, RankedList};
use crate::error::{Error, Result};
use crate::queryset::{normalize_query, QuerySet};

/// Default rank cutoff: the first result page.
pub const DEFAULT_USEFULNESS_CUTOFF: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InteractionKind {
    View,
    Export,
}

impl FromStr for InteractionKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "view" => Ok(InteractionKind::View),
            "export" => Ok(InteractionKind::Export),
            other => Err(format!("unknown interaction kind `{other}`")),
        }
    }
}

impl fmt::Display for InteractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InteractionKind::View => "view",
            InteractionKind::Export => "export",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionEvent {
    pub query_text: String,
    pub doc_id: String,
    pub kind: InteractionKind,
    /// RFC 3339 instant, kept verbatim.
    pub timestamp: Option<String>,
}

impl InteractionEvent {
    pub fn new(
        query_text: impl Into<String>,
        doc_id: impl Into<String>,
        kind: InteractionKind,
    ) -> Self {
        InteractionEvent {
            query_text: query_text.into(),
            doc_id: doc_id.into(),
            kind,
            timestamp: None,
        }
    }

    fn parse_line(line: &str) -> std::result::Result<Self, String> {
        let cols: Vec<&str> = line.split('\t').collect();
        if !(3..=4).contains(&cols.len()) {
            return Err(format!(
                "expected 3 or 4 tab-separated columns, got {}",
                cols.len()
            ));
        }
        let query_text = cols[0].trim();
        let doc_id = cols[1].trim();
        if query_text.is_empty() || doc_id.is_empty() {
            return Err("empty query or document id".into());
        }
        let kind = cols[2].trim().parse()?;
        let timestamp = match cols.get(3).map(|t| t.trim()) {
            None | Some("") => None,
            Some(ts) => {
                chrono::DateTime::parse_from_rfc3339(ts)
                    .map_err(|e| format!("bad timestamp `{ts}`: {e}"))?;
                Some(ts.to_owned())
            }
        };
        Ok(InteractionEvent {
            query_text: query_text.to_owned(),
            doc_id: doc_id.to_owned(),
            kind,
            timestamp,
        })
    }

    pub fn to_line(&self) -> String {
        match &self.timestamp {
            Some(ts) => format!("{}\t{}\t{}\t{ts}", self.query_text, self.doc_id, self.kind),
            None => format!("{}\t{}\t{}", self.query_text, self.doc_id, self.kind),
        }
    }
}

/// Parsed events, in file order, plus the lines that were skipped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InteractionLog {
    pub events: Vec<InteractionEvent>,
    pub malformed: Vec<LineIssue>,
}

impl InteractionLog {
    pub fn export_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.kind == InteractionKind::Export)
            .count()
    }
}

pub fn load_interactions(path: &Path) -> Result<InteractionLog> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_interactions(BufReader::new(file), path)
}

pub fn parse_interactions<R: BufRead>(reader: R, origin: &Path) -> Result<InteractionLog> {
    let mut log = InteractionLog::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match InteractionEvent::parse_line(&line) {
            Ok(event) => log.events.push(event),
            Err(message) => {
                log::warn!("{}:{}: {message}", origin.display(), i + 1);
                log.malformed.push(LineIssue {
                    line: i + 1,
                    message,
                });
            }
        }
    }
    if log.events.is_empty() {
        return Err(Error::NoEvents {
            path: origin.to_path_buf(),
        });
    }
    Ok(log)
}

pub fn write_interactions<W: Write>(events: &[InteractionEvent], mut w: W) -> std::io::Result<()> {
    for e in events {
        writeln!(w, "{}", e.to_line())?;
    }
    w.flush()
}

/// What happened to each event during a usefulness computation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventCounts {
    pub views: usize,
    pub exports: usize,
    /// Exports whose document was within the cutoff and contributed.
    pub consumed: usize,
    /// Exports whose document fell outside the cutoff.
    pub ignored: usize,
    /// Exports naming a document this index does not hold.
    pub unknown_document: usize,
    /// Exports whose query is not part of the query set.
    pub unknown_query: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UsefulnessTable {
    pub type_label: String,
    pub cutoff: usize,
    pub doc_ids: Vec<String>,
    pub scores: Vec<f64>,
    pub counts: EventCounts,
}

impl UsefulnessTable {
    pub fn score(&self, doc_id: &str) -> Option<f64> {
        let pos = self.doc_ids.iter().position(|d| d == doc_id)?;
        Some(self.scores[pos])
    }

    /// CSV with header `doc_id,type,u`, one row per document in index order.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["doc_id", "type", "u"])?;
        for (id, u) in self.doc_ids.iter().zip(&self.scores) {
            out.write_record([id.as_str(), self.type_label.as_str(), &u.to_string()])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Replays each export's query through the engine; an export of `d` found at
/// rank `ρ <= cutoff` adds `w_q · h(q) / ρ` to `u(d)`.
///
/// Each document's contributions are summed in ascending order of value, so
/// the table is independent of event order and thread count.
pub fn compute_usefulness(
    index: &Index,
    events: &[InteractionEvent],
    queries: &QuerySet,
    cutoff: usize,
) -> Result<UsefulnessTable> {
    if cutoff == 0 {
        return Err(Error::InvalidArgument(
            "usefulness cutoff must be >= 1".into(),
        ));
    }
    let positions: HashMap<&str, u32> = index
        .doc_ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i as u32))
        .collect();

    let mut counts = EventCounts::default();
    let mut pending: Vec<(u32, String)> = Vec::new();
    for e in events {
        if e.kind == InteractionKind::View {
            counts.views += 1;
            continue;
        }
        counts.exports += 1;
        let Some(&pos) = positions.get(e.doc_id.as_str()) else {
            counts.unknown_document += 1;
            continue;
        };
        let text = normalize_query(&e.query_text);
        if queries.get(&text).is_none() {
            counts.unknown_query += 1;
            continue;
        }
        pending.push((pos, text));
    }

    // One retrieval per distinct query.
    let distinct: Vec<&str> = pending
        .iter()
        .map(|(_, t)| t.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let pages: HashMap<&str, RankedList> = distinct
        .par_iter()
        .map(|&text| {
            let q = queries.get(text).expect("filtered above");
            (text, retrieve_terms(index, &q.terms(), cutoff))
        })
        .collect();

    let mut contributions: Vec<Vec<f64>> = vec![Vec::new(); index.doc_count()];
    for (pos, text) in &pending {
        match pages[text.as_str()].rank_of(*pos) {
            Some(rank) => {
                let q = queries.get(text).expect("filtered above");
                contributions[*pos as usize].push(q.effective_weight() / f64::from(rank));
                counts.consumed += 1;
            }
            None => counts.ignored += 1,
        }
    }

    let scores = contributions
        .into_iter()
        .map(|mut c| {
            c.sort_by(f64::total_cmp);
            c.into_iter().fold(0.0, |acc, v| acc + v)
        })
        .collect();

    Ok(UsefulnessTable {
        type_label: index.type_label().to_owned(),
        cutoff,
        doc_ids: index.doc_ids().to_vec(),
        scores,
        counts,
    })
}
