use std::collections::HashMap;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

use super::analyzer::tokenize;

/// Label given to an index built over records of more than one type.
pub const MIXED_TYPE_LABEL: &str = "mixed";

/// BM25 free parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn new(k1: f64, b: f64) -> Result<Self> {
        if !(k1.is_finite() && k1 >= 0.0) {
            return Err(Error::InvalidArgument(format!("k1 must be >= 0, got {k1}")));
        }
        if !(0.0..=1.0).contains(&b) {
            return Err(Error::InvalidArgument(format!(
                "b must be in [0, 1], got {b}"
            )));
        }
        Ok(Bm25Params { k1, b })
    }
}

/// `ln(1 + (N - df + 0.5) / (df + 0.5))`; never negative.
pub fn idf(doc_count: usize, doc_freq: usize) -> f64 {
    let n = doc_count as f64;
    let df = doc_freq as f64;
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

/// Immutable inverted index over one type partition.
#[derive(Debug, Clone)]
pub struct Index {
    pub(crate) type_label: String,
    pub(crate) params: Bm25Params,
    pub(crate) doc_ids: Vec<String>,
    pub(crate) doc_lengths: Vec<u32>,
    /// Postings sorted by ascending doc position.
    pub(crate) postings: HashMap<String, Vec<Posting>>,
    pub(crate) avg_doc_length: f64,
    /// `k1 * (1 - b + b * |D| / avgdl)` per document.
    pub(crate) length_norms: Vec<f64>,
    /// Position of each document in ascending-id order, used for tie-breaks.
    pub(crate) id_order: Vec<u32>,
}

impl PartialEq for Index {
    fn eq(&self, other: &Self) -> bool {
        self.type_label == other.type_label
            && self.params == other.params
            && self.doc_ids == other.doc_ids
            && self.doc_lengths == other.doc_lengths
            && self.postings == other.postings
    }
}

impl Index {
    /// Assembles an index from raw parts and checks every structural invariant.
    pub(crate) fn from_parts(
        type_label: String,
        params: Bm25Params,
        doc_ids: Vec<String>,
        doc_lengths: Vec<u32>,
        postings: HashMap<String, Vec<Posting>>,
    ) -> std::result::Result<Self, String> {
        let n = doc_ids.len();
        if n == 0 {
            return Err("index has no documents".into());
        }
        if doc_lengths.len() != n {
            return Err(format!(
                "{} document lengths for {n} documents",
                doc_lengths.len()
            ));
        }
        let mut tf_sums = vec![0u64; n];
        for (term, list) in &postings {
            if list.is_empty() {
                return Err(format!("term `{term}` has an empty postings list"));
            }
            let mut prev: Option<u32> = None;
            for p in list {
                if p.doc as usize >= n {
                    return Err(format!("term `{term}` references document {}", p.doc));
                }
                if p.tf == 0 {
                    return Err(format!("term `{term}` has a zero term frequency"));
                }
                if prev.is_some_and(|d| d >= p.doc) {
                    return Err(format!("postings of `{term}` are not strictly increasing"));
                }
                prev = Some(p.doc);
                tf_sums[p.doc as usize] += u64::from(p.tf);
            }
        }
        if let Some(i) = (0..n).find(|&i| tf_sums[i] != u64::from(doc_lengths[i])) {
            return Err(format!(
                "document {i} has length {} but postings sum to {}",
                doc_lengths[i], tf_sums[i]
            ));
        }
        let total: u64 = doc_lengths.iter().map(|&l| u64::from(l)).sum();
        if total == 0 {
            return Err("every document has zero tokens".into());
        }
        let avg_doc_length = total as f64 / n as f64;
        let length_norms = doc_lengths
            .iter()
            .map(|&len| params.k1 * (1.0 - params.b + params.b * f64::from(len) / avg_doc_length))
            .collect();

        let mut by_id: Vec<u32> = (0..n as u32).collect();
        by_id.sort_by(|&a, &b| doc_ids[a as usize].cmp(&doc_ids[b as usize]));
        let mut id_order = vec![0u32; n];
        for (rank, &pos) in by_id.iter().enumerate() {
            id_order[pos as usize] = rank as u32;
        }

        Ok(Index {
            type_label,
            params,
            doc_ids,
            doc_lengths,
            postings,
            avg_doc_length,
            length_norms,
            id_order,
        })
    }

    pub fn type_label(&self) -> &str {
        &self.type_label
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_id(&self, position: u32) -> &str {
        &self.doc_ids[position as usize]
    }

    pub fn position_of(&self, doc_id: &str) -> Option<u32> {
        // Linear; callers that need many lookups should build their own map.
        self.doc_ids
            .iter()
            .position(|d| d == doc_id)
            .map(|p| p as u32)
    }

    pub fn doc_lengths(&self) -> &[u32] {
        &self.doc_lengths
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn term_count(&self) -> usize {
        self.postings.len()
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    /// Total occurrences of `term` across the partition.
    pub fn collection_freq(&self, term: &str) -> u64 {
        self.postings(term).iter().map(|p| u64::from(p.tf)).sum()
    }

    pub fn term_freq(&self, term: &str, doc: u32) -> u32 {
        let list = self.postings(term);
        match list.binary_search_by_key(&doc, |p| p.doc) {
            Ok(i) => list[i].tf,
            Err(_) => 0,
        }
    }

    /// Every indexed term with its postings, in ascending term order.
    pub fn sorted_terms(&self) -> Vec<(&str, &[Posting])> {
        let mut terms: Vec<(&str, &[Posting])> = self
            .postings
            .iter()
            .map(|(t, p)| (t.as_str(), p.as_slice()))
            .collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(b.0));
        terms
    }

    pub(crate) fn term_weight(&self, idf: f64, tf: u32, doc: u32) -> f64 {
        let tf = f64::from(tf);
        idf * (tf * (self.params.k1 + 1.0)) / (tf + self.length_norms[doc as usize])
    }
}

/// Builds an index over every record of `corpus`, in corpus order.
pub fn build_index(corpus: &Corpus, params: Bm25Params) -> Result<Index> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut labels = corpus.type_labels();
    let type_label = match (labels.next(), labels.next()) {
        (Some(only), None) => only.to_owned(),
        _ => MIXED_TYPE_LABEL.to_owned(),
    };

    let mut doc_ids = Vec::with_capacity(corpus.len());
    let mut doc_lengths = Vec::with_capacity(corpus.len());
    let mut postings: HashMap<String, Vec<Posting>> = HashMap::new();
    let mut tf: HashMap<String, u32> = HashMap::new();

    for (pos, record) in corpus.records().iter().enumerate() {
        let tokens = tokenize(&record.text());
        doc_ids.push(record.id.clone());
        doc_lengths.push(tokens.len() as u32);
        tf.clear();
        for t in tokens {
            *tf.entry(t).or_insert(0) += 1;
        }
        for (term, count) in tf.drain() {
            postings.entry(term).or_default().push(Posting {
                doc: pos as u32,
                tf: count,
            });
        }
    }
    if doc_lengths.iter().all(|&l| l == 0) {
        return Err(Error::NoTokens);
    }

    Index::from_parts(type_label, params, doc_ids, doc_lengths, postings)
        .map_err(Error::InvalidArgument)
}

/// BM25 score of one document; 0 when no query term occurs in it.
/// Repeated query terms contribute once per occurrence.
pub fn score(index: &Index, query_terms: &[String], doc: u32) -> f64 {
    let mut total = 0.0;
    for term in query_terms {
        let tf = index.term_freq(term, doc);
        if tf == 0 {
            continue;
        }
        let idf = idf(index.doc_count(), index.doc_freq(term));
        total += index.term_weight(idf, tf, doc);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Record;

    fn corpus(texts: &[&str]) -> Corpus {
        let records = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Record::new(format!("d{i}"), "pub", vec![("text".into(), (*t).into())]))
            .collect();
        Corpus::from_records(records).unwrap()
    }

    #[test]
    fn single_doc_counts() {
        let idx = build_index(&corpus(&["a a b"]), Bm25Params::default()).unwrap();
        assert_eq!(idx.doc_lengths(), &[3]);
        assert_eq!(idx.term_freq("a", 0), 2);
        assert_eq!(idx.term_freq("b", 0), 1);
        assert_eq!(idx.type_label(), "pub");
    }

    #[test]
    fn three_docs_five_terms() {
        let idx = build_index(
            &corpus(&["alpha beta", "beta gamma delta", "epsilon alpha alpha"]),
            Bm25Params::default(),
        )
        .unwrap();
        assert_eq!(idx.term_count(), 5);
        let total: u32 = idx.doc_lengths().iter().sum();
        assert_eq!(total, 8);
        assert!((idx.avg_doc_length() - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rebuild_is_identical() {
        let c = corpus(&["x y z", "y z", "z"]);
        let a = build_index(&c, Bm25Params::default()).unwrap();
        let b = build_index(&c, Bm25Params::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sorted_terms(), b.sorted_terms());
    }

    #[test]
    fn all_empty_token_records_rejected() {
        let err = build_index(&corpus(&["!!!", "--"]), Bm25Params::default()).unwrap_err();
        assert!(matches!(err, Error::NoTokens));
    }

    #[test]
    fn single_doc_apple_score() {
        let idx = build_index(&corpus(&["apple"]), Bm25Params::default()).unwrap();
        // idf = ln(1 + 0.5/1.5) = ln(4/3); tf part = 2.2 / 2.2 = 1
        let s = score(&idx, &["apple".into()], 0);
        assert!((s - (4.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!((s - 0.2877).abs() < 1e-4);
    }

    #[test]
    fn absent_term_scores_zero() {
        let idx = build_index(&corpus(&["apple", "pear"]), Bm25Params::default()).unwrap();
        assert_eq!(score(&idx, &["pear".into()], 0), 0.0);
        assert_eq!(score(&idx, &["kiwi".into()], 1), 0.0);
    }

    #[test]
    fn duplicate_query_terms_add_up() {
        let idx = build_index(&corpus(&["apple pie", "pear"]), Bm25Params::default()).unwrap();
        let once = score(&idx, &["apple".into()], 0);
        let twice = score(&idx, &["apple".into(), "apple".into()], 0);
        assert!((twice - 2.0 * once).abs() < 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(Bm25Params::new(1.2, 0.75).is_ok());
        assert!(Bm25Params::new(-1.0, 0.75).is_err());
        assert!(Bm25Params::new(1.2, 1.5).is_err());
    }
}
