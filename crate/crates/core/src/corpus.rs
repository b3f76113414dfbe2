//! Typed document collections.
//!
//! A corpus file is UTF-8 JSON Lines: one flat object per line with the
//! string keys `id` and `type`, plus one or more string-valued text fields.
//! Any key other than `id` and `type` is a text field; field order is the
//! order of keys in the line.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const ID_KEY: &str = "id";
pub const TYPE_KEY: &str = "type";

/// One indexed item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub id: String,
    pub type_label: String,
    /// Named text fields, in file order.
    pub fields: Vec<(String, String)>,
}

impl Record {
    pub fn new(
        id: impl Into<String>,
        type_label: impl Into<String>,
        fields: Vec<(String, String)>,
    ) -> Self {
        Record {
            id: id.into(),
            type_label: type_label.into(),
            fields,
        }
    }

    /// All text fields joined by a single space, in field order.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for (i, (_, value)) in self.fields.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(value);
        }
        out
    }

    pub fn has_text(&self) -> bool {
        self.fields.iter().any(|(_, v)| !v.trim().is_empty())
    }

    pub fn to_json_line(&self) -> String {
        let mut map = Map::new();
        map.insert(ID_KEY.to_owned(), Value::String(self.id.clone()));
        map.insert(TYPE_KEY.to_owned(), Value::String(self.type_label.clone()));
        for (k, v) in &self.fields {
            map.insert(k.clone(), Value::String(v.clone()));
        }
        Value::Object(map).to_string()
    }

    fn from_json_line(line: &str) -> std::result::Result<Record, String> {
        let value: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let Value::Object(map) = value else {
            return Err("expected a JSON object".into());
        };
        let mut id = None;
        let mut type_label = None;
        let mut fields = Vec::with_capacity(map.len().saturating_sub(2));
        for (key, value) in map {
            let Value::String(s) = value else {
                return Err(format!("key `{key}` must hold a string"));
            };
            match key.as_str() {
                ID_KEY => id = Some(s),
                TYPE_KEY => type_label = Some(s),
                _ => fields.push((key, s)),
            }
        }
        let id = id
            .filter(|s| !s.is_empty())
            .ok_or("missing or empty `id`")?;
        let type_label = type_label
            .filter(|s| !s.is_empty())
            .ok_or("missing or empty `type`")?;
        if fields.is_empty() {
            return Err("record has no text fields".into());
        }
        Ok(Record {
            id,
            type_label,
            fields,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorpusFormat {
    #[default]
    JsonLines,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" | "json-lines" => Ok(CorpusFormat::JsonLines),
            other => Err(Error::InvalidArgument(format!(
                "unknown corpus format `{other}`"
            ))),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusFormat::JsonLines => f.write_str("jsonl"),
        }
    }
}

/// An immutable collection of records with a per-type position index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    records: Vec<Record>,
    type_index: BTreeMap<String, Vec<usize>>,
}

impl Corpus {
    /// Builds a corpus, rejecting records that break the id/type/text invariants.
    pub fn from_records(records: Vec<Record>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if r.id.is_empty() {
                return Err(Error::InvalidArgument("record with empty id".into()));
            }
            if r.type_label.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "record `{}` has an empty type label",
                    r.id
                )));
            }
            if !r.has_text() {
                return Err(Error::InvalidArgument(format!(
                    "record `{}` has no text",
                    r.id
                )));
            }
            if let Some((k, _)) = r.fields.iter().find(|(k, _)| k == ID_KEY || k == TYPE_KEY) {
                return Err(Error::InvalidArgument(format!(
                    "record `{}` uses the reserved key `{k}` as a text field",
                    r.id
                )));
            }
            if !seen.insert(r.id.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate record id `{}`",
                    r.id
                )));
            }
        }
        Ok(Self::new_unchecked(records))
    }

    fn new_unchecked(records: Vec<Record>) -> Self {
        let mut type_index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (pos, r) in records.iter().enumerate() {
            type_index
                .entry(r.type_label.clone())
                .or_default()
                .push(pos);
        }
        Corpus {
            records,
            type_index,
        }
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Type labels in ascending order.
    pub fn type_labels(&self) -> impl Iterator<Item = &str> {
        self.type_index.keys().map(String::as_str)
    }

    pub fn positions_of_type(&self, type_label: &str) -> &[usize] {
        self.type_index
            .get(type_label)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Splits the corpus into one sub-corpus per type label, each keeping
    /// the original record order.
    pub fn partition_by_type(&self) -> BTreeMap<String, Corpus> {
        self.type_index
            .iter()
            .map(|(label, positions)| {
                let records = positions.iter().map(|&p| self.records[p].clone()).collect();
                (label.clone(), Corpus::new_unchecked(records))
            })
            .collect()
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.records {
            writeln!(w, "{}", r.to_json_line())?;
        }
        w.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_jsonl(BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }
}

/// A problem found on one input line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineIssue {
    pub line: usize,
    pub message: String,
}

/// Warnings collected while loading a corpus file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub malformed: Vec<LineIssue>,
    /// (line, id) of every dropped duplicate.
    pub duplicate_ids: Vec<(usize, String)>,
    /// Lines whose record had only empty text fields.
    pub empty_text: Vec<usize>,
}

impl LoadReport {
    pub fn warning_count(&self) -> usize {
        self.malformed.len() + self.duplicate_ids.len() + self.empty_text.len()
    }
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<(Corpus, LoadReport)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        CorpusFormat::JsonLines => parse_corpus(BufReader::new(file), path),
    }
}

/// Parses JSON Lines records. `origin` is only used in error messages.
///
/// Malformed lines, duplicate ids (first occurrence wins) and empty-text
/// records are skipped and reported; a corpus with no valid record is an error.
pub fn parse_corpus<R: BufRead>(reader: R, origin: &Path) -> Result<(Corpus, LoadReport)> {
    let mut report = LoadReport::default();
    let mut records = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let record = match Record::from_json_line(trimmed) {
            Ok(r) => r,
            Err(message) => {
                log::warn!("{}:{line_no}: {message}", origin.display());
                report.malformed.push(LineIssue {
                    line: line_no,
                    message,
                });
                continue;
            }
        };
        if !record.has_text() {
            report.empty_text.push(line_no);
            continue;
        }
        if seen.contains(&record.id) {
            report.duplicate_ids.push((line_no, record.id));
            continue;
        }
        seen.insert(record.id.clone());
        records.push(record);
    }

    if records.is_empty() {
        return Err(Error::NoValidRecords {
            path: origin.to_path_buf(),
        });
    }
    if report.warning_count() > 0 {
        log::warn!(
            "{}: {} malformed, {} duplicate ids, {} empty-text records skipped",
            origin.display(),
            report.malformed.len(),
            report.duplicate_ids.len(),
            report.empty_text.len()
        );
    }
    Ok((Corpus::new_unchecked(records), report))
}
