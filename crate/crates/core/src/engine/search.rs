use std::cmp::Ordering;
use std::collections::HashMap;

use super::analyzer::tokenize;
use super::index::{idf, Index};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedEntry {
    /// Document position in the index.
    pub position: u32,
    pub score: f64,
    /// 1-based.
    pub rank: u32,
}

/// Result page ordered by score descending, ties by ascending doc id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RankedList {
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Rank of the document at `position`, if it was retrieved.
    pub fn rank_of(&self, position: u32) -> Option<u32> {
        self.entries
            .iter()
            .find(|e| e.position == position)
            .map(|e| e.rank)
    }

    pub fn doc_ids<'a>(&self, index: &'a Index) -> Vec<&'a str> {
        self.entries
            .iter()
            .map(|e| index.doc_id(e.position))
            .collect()
    }
}

/// Tokenizes `query_text` and returns the top `k` documents with a positive score.
pub fn retrieve_top_k(index: &Index, query_text: &str, k: usize) -> RankedList {
    retrieve_terms(index, &tokenize(query_text), k)
}

/// Top-`k` retrieval over already-analyzed query terms. `k` is capped at the
/// document count.
pub fn retrieve_terms(index: &Index, terms: &[String], k: usize) -> RankedList {
    let k = k.min(index.doc_count());
    if k == 0 || terms.is_empty() {
        return RankedList::default();
    }

    let n = index.doc_count();
    let mut acc: HashMap<u32, f64> = HashMap::new();
    for term in terms {
        let postings = index.postings(term);
        if postings.is_empty() {
            continue;
        }
        let term_idf = idf(n, postings.len());
        for p in postings {
            *acc.entry(p.doc).or_insert(0.0) += index.term_weight(term_idf, p.tf, p.doc);
        }
    }

    let mut hits: Vec<(u32, f64)> = acc.into_iter().filter(|&(_, s)| s > 0.0).collect();
    let order = |a: &(u32, f64), b: &(u32, f64)| -> Ordering {
        b.1.total_cmp(&a.1)
            .then_with(|| index.id_order[a.0 as usize].cmp(&index.id_order[b.0 as usize]))
    };
    if hits.len() > k {
        hits.select_nth_unstable_by(k - 1, order);
        hits.truncate(k);
    }
    hits.sort_unstable_by(order);

    RankedList {
        entries: hits
            .into_iter()
            .enumerate()
            .map(|(i, (position, score))| RankedEntry {
                position,
                score,
                rank: i as u32 + 1,
            })
            .collect(),
    }
}
