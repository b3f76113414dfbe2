//! Line-oriented index snapshots.
//!
//! ```text
//! retaudit-index<TAB>1
//! analyzer<TAB>lowercase-alnum/1
//! k1<TAB>1.2
//! b<TAB>0.75
//! type<TAB>"publication"
//! docs<TAB>3
//! terms<TAB>5
//! d<TAB><length><TAB>"<doc id>"        (one per document, in index order)
//! t<TAB><term><TAB><doc>:<tf>,...      (one per term, ascending term order)
//! ```
//!
//! Strings that may contain arbitrary characters are JSON-encoded. Terms come
//! out of the analyzer and never contain whitespace. Writing the same index
//! twice yields byte-identical files.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::analyzer::ANALYZER_VERSION;
use super::index::{Bm25Params, Index, Posting};

pub const SNAPSHOT_MAGIC: &str = "retaudit-index";
pub const SNAPSHOT_VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(index: &Index, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SNAPSHOT_MAGIC}\t{SNAPSHOT_VERSION}")?;
    writeln!(w, "analyzer\t{ANALYZER_VERSION}")?;
    writeln!(w, "k1\t{}", index.params.k1)?;
    writeln!(w, "b\t{}", index.params.b)?;
    writeln!(w, "type\t{}", json_string(&index.type_label))?;
    writeln!(w, "docs\t{}", index.doc_count())?;
    writeln!(w, "terms\t{}", index.term_count())?;
    for (id, len) in index.doc_ids.iter().zip(&index.doc_lengths) {
        writeln!(w, "d\t{len}\t{}", json_string(id))?;
    }
    for (term, postings) in index.sorted_terms() {
        write!(w, "t\t{term}\t")?;
        for (i, p) in postings.iter().enumerate() {
            if i > 0 {
                w.write_all(b",")?;
            }
            write!(w, "{}:{}", p.doc, p.tf)?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn save_snapshot(index: &Index, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_snapshot(index, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn load_snapshot(path: &Path, expected: Bm25Params) -> Result<Index> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_snapshot(BufReader::new(file), path, expected)
}

/// Reads a snapshot, failing if it was built with another analyzer or with
/// BM25 parameters different from `expected`.
pub fn read_snapshot<R: BufRead>(reader: R, origin: &Path, expected: Bm25Params) -> Result<Index> {
    let bad = |message: String| Error::Snapshot {
        path: origin.to_path_buf(),
        message,
    };
    let mismatch = |field: &'static str, expected: String, found: String| Error::SnapshotMismatch {
        path: origin.to_path_buf(),
        field,
        expected,
        found,
    };

    let mut lines = reader.lines().enumerate();
    let mut header = |key: &str| -> Result<String> {
        let (i, line) = lines
            .next()
            .ok_or_else(|| bad(format!("truncated header, missing `{key}`")))?;
        let line = line.map_err(|e| Error::io(origin, e))?;
        match line.split_once('\t') {
            Some((k, v)) if k == key => Ok(v.to_owned()),
            _ => Err(bad(format!("line {}: expected `{key}` header", i + 1))),
        }
    };

    let version = header(SNAPSHOT_MAGIC)?;
    if version != SNAPSHOT_VERSION.to_string() {
        return Err(mismatch("version", SNAPSHOT_VERSION.to_string(), version));
    }
    let analyzer = header("analyzer")?;
    if analyzer != ANALYZER_VERSION {
        return Err(mismatch("analyzer", ANALYZER_VERSION.into(), analyzer));
    }
    let k1 = header("k1")?;
    if k1.parse::<f64>().ok() != Some(expected.k1) {
        return Err(mismatch("k1", expected.k1.to_string(), k1));
    }
    let b = header("b")?;
    if b.parse::<f64>().ok() != Some(expected.b) {
        return Err(mismatch("b", expected.b.to_string(), b));
    }
    let type_label = parse_json_string(&header("type")?).map_err(bad)?;
    let doc_count: usize = header("docs")?
        .parse()
        .map_err(|_| bad("bad `docs` count".into()))?;
    let term_count: usize = header("terms")?
        .parse()
        .map_err(|_| bad("bad `terms` count".into()))?;

    let mut doc_ids = Vec::with_capacity(doc_count);
    let mut doc_lengths = Vec::with_capacity(doc_count);
    let mut postings: HashMap<String, Vec<Posting>> = HashMap::with_capacity(term_count);

    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        let at = |m: &str| bad(format!("line {line_no}: {m}"));
        let mut parts = line.splitn(3, '\t');
        match (parts.next(), parts.next(), parts.next()) {
            (Some("d"), Some(len), Some(id)) => {
                if !postings.is_empty() {
                    return Err(at("document line after term lines"));
                }
                doc_lengths.push(len.parse::<u32>().map_err(|_| at("bad document length"))?);
                doc_ids.push(parse_json_string(id).map_err(|m| at(&m))?);
            }
            (Some("t"), Some(term), Some(list)) => {
                let mut entries = Vec::new();
                for item in list.split(',') {
                    let (doc, tf) = item.split_once(':').ok_or_else(|| at("bad posting"))?;
                    entries.push(Posting {
                        doc: doc.parse().map_err(|_| at("bad posting doc"))?,
                        tf: tf.parse().map_err(|_| at("bad posting tf"))?,
                    });
                }
                if postings.insert(term.to_owned(), entries).is_some() {
                    return Err(at("duplicate term"));
                }
            }
            _ => return Err(at("unrecognized line")),
        }
    }

    if doc_ids.len() != doc_count {
        return Err(bad(format!(
            "header declares {doc_count} documents, found {}",
            doc_ids.len()
        )));
    }
    if postings.len() != term_count {
        return Err(bad(format!(
            "header declares {term_count} terms, found {}",
            postings.len()
        )));
    }
    Index::from_parts(type_label, expected, doc_ids, doc_lengths, postings).map_err(bad)
}

fn json_string(s: &str) -> String {
    serde_json::Value::String(s.to_owned()).to_string()
}

fn parse_json_string(s: &str) -> std::result::Result<String, String> {
    match serde_json::from_str::<serde_json::Value>(s) {
        Ok(serde_json::Value::String(v)) => Ok(v),
        _ => Err(format!("expected a JSON string, got `{s}`")),
    }
}
