//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the scoring code under test.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use retaudit::corpus::{Corpus, Record};

pub const K1: f64 = 1.2;
pub const B: f64 = 0.75;

/// Builds a single-type corpus; ids are `d000`, `d001`, ...
pub fn corpus_of(type_label: &str, texts: &[String]) -> Corpus {
    let records = texts
        .iter()
        .enumerate()
        .map(|(i, t)| {
            Record::new(
                format!("d{i:03}"),
                type_label,
                vec![("body".into(), t.clone())],
            )
        })
        .collect();
    Corpus::from_records(records).unwrap()
}

/// Random documents over terms `t0..t{vocab}`, each 1..=max_len tokens.
pub fn random_texts(
    rng: &mut ChaCha8Rng,
    docs: usize,
    vocab: usize,
    max_len: usize,
) -> Vec<String> {
    (0..docs)
        .map(|_| {
            let len = rng.random_range(1..=max_len);
            (0..len)
                .map(|_| format!("t{}", rng.random_range(0..vocab)))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Exhaustive BM25 over raw whitespace-tokenized documents.
pub struct BruteForce {
    ids: Vec<String>,
    docs: Vec<Vec<String>>,
    df: HashMap<String, usize>,
    avgdl: f64,
}

impl BruteForce {
    /// `docs` are `(id, text)`; text is lowercased and split on whitespace.
    pub fn new(docs: &[(String, String)]) -> Self {
        let tokenized: Vec<Vec<String>> = docs
            .iter()
            .map(|(_, t)| t.split_whitespace().map(|w| w.to_lowercase()).collect())
            .collect();
        let mut df = HashMap::new();
        for d in &tokenized {
            let mut seen: Vec<&String> = d.iter().collect();
            seen.sort();
            seen.dedup();
            for t in seen {
                *df.entry(t.clone()).or_insert(0) += 1;
            }
        }
        let total: usize = tokenized.iter().map(Vec::len).sum();
        BruteForce {
            ids: docs.iter().map(|(id, _)| id.clone()).collect(),
            avgdl: total as f64 / tokenized.len() as f64,
            docs: tokenized,
            df,
        }
    }

    pub fn from_corpus(corpus: &Corpus) -> Self {
        let docs: Vec<(String, String)> = corpus
            .records()
            .iter()
            .map(|r| (r.id.clone(), r.text()))
            .collect();
        Self::new(&docs)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Sum over query-term occurrences of idf · tf(k1+1) / (tf + k1(1 − b + b|D|/avgdl)).
    pub fn score(&self, query: &[String], doc: usize) -> f64 {
        let n = self.docs.len() as f64;
        let d = &self.docs[doc];
        let mut s = 0.0;
        for term in query {
            let tf = d.iter().filter(|w| *w == term).count() as f64;
            if tf == 0.0 {
                continue;
            }
            let df = self.df[term] as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            let norm = K1 * (1.0 - B + B * d.len() as f64 / self.avgdl);
            s += idf * (tf * (K1 + 1.0)) / (tf + norm);
        }
        s
    }

    /// All documents with positive score, best first, ties by ascending id.
    pub fn rank(&self, query: &[String]) -> Vec<(usize, f64)> {
        let mut hits: Vec<(usize, f64)> = (0..self.docs.len())
            .map(|d| (d, self.score(query, d)))
            .filter(|&(_, s)| s > 0.0)
            .collect();
        hits.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap()
                .then_with(|| self.ids[a.0].cmp(&self.ids[b.0]))
        });
        hits
    }

    pub fn top_k(&self, query: &[String], k: usize) -> Vec<(usize, f64)> {
        let mut r = self.rank(query);
        r.truncate(k);
        r
    }
}

/// Retrievability computed the slow way: one retrieval per query per cutoff.
/// `hits(query, c)` must return the top-`c` document positions.
pub fn per_cutoff_retrievability(
    doc_count: usize,
    queries: &[(Vec<String>, f64)],
    cutoffs: &[usize],
    mut hits: impl FnMut(&[String], usize) -> Vec<usize>,
) -> Vec<Vec<f64>> {
    let mut r = vec![vec![0.0; cutoffs.len()]; doc_count];
    for (j, &c) in cutoffs.iter().enumerate() {
        for (terms, w) in queries {
            for d in hits(terms, c) {
                r[d][j] += w;
            }
        }
    }
    r
}

/// Gini by mean absolute difference, Σ_i Σ_j |x_i − x_j| / (2 N² μ). Needs no
/// sorting, so it checks the ordered-sum form independently.
pub fn gini_pairwise(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let sum: f64 = values.iter().sum();
    let mut diff = 0.0;
    for a in values {
        for b in values {
            diff += (a - b).abs();
        }
    }
    diff / (2.0 * n * sum)
}
