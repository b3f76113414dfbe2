//! Retrievability `r(d) = Σ_q w_q · [k(d,q) ≤ c]` accumulated for every
//! cutoff of a grid in one retrieval pass per query.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::engine::{retrieve_terms, Index};
use crate::error::{Error, Result};
use crate::queryset::{QuerySet, WeightingMode};

pub const DEFAULT_CUTOFFS: [usize; 6] = [10, 20, 30, 40, 50, 100];
pub const DEFAULT_CUTOFF_CAP: usize = 1000;

/// Queries retrieved in parallel before their hits are folded in, in order.
const BLOCK: usize = 4096;

/// Strictly increasing positive rank cutoffs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutoffGrid(Vec<usize>);

impl CutoffGrid {
    pub fn new(cutoffs: Vec<usize>) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::InvalidGrid("no cutoffs".into()));
        }
        if cutoffs[0] == 0 {
            return Err(Error::InvalidGrid("cutoffs must be positive".into()));
        }
        if cutoffs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!(
                "cutoffs must be strictly increasing: {cutoffs:?}"
            )));
        }
        Ok(CutoffGrid(cutoffs))
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> usize {
        *self.0.last().expect("grid is never empty")
    }

    pub fn position(&self, cutoff: usize) -> Option<usize> {
        self.0.binary_search(&cutoff).ok()
    }

    /// Index of the smallest cutoff `>= rank`.
    fn first_covering(&self, rank: usize) -> Option<usize> {
        let j = self.0.partition_point(|&c| c < rank);
        (j < self.0.len()).then_some(j)
    }
}

impl Default for CutoffGrid {
    fn default() -> Self {
        CutoffGrid(DEFAULT_CUTOFFS.to_vec())
    }
}

impl FromStr for CutoffGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let cutoffs = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidGrid(format!("bad cutoff `{}`", p.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        CutoffGrid::new(cutoffs)
    }
}

impl fmt::Display for CutoffGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetrievabilityOptions {
    /// Largest cutoff a grid may contain.
    pub max_cutoff_cap: usize,
}

impl Default for RetrievabilityOptions {
    fn default() -> Self {
        RetrievabilityOptions {
            max_cutoff_cap: DEFAULT_CUTOFF_CAP,
        }
    }
}

/// Per-document retrievability for every cutoff of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievabilityTable {
    pub type_label: String,
    pub grid: CutoffGrid,
    pub doc_ids: Vec<String>,
    /// `scores[doc][j]` is r(d) at `grid.cutoffs()[j]`.
    pub scores: Vec<Vec<f64>>,
    pub query_count: usize,
    pub weighting: WeightingMode,
    /// Queries that retrieved nothing from this partition.
    pub zero_hit_queries: usize,
}

impl RetrievabilityTable {
    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    /// r(d) for every document at the `j`-th cutoff of the grid.
    pub fn column_at(&self, j: usize) -> Vec<f64> {
        self.scores.iter().map(|row| row[j]).collect()
    }

    pub fn column(&self, cutoff: usize) -> Result<Vec<f64>> {
        let j = self
            .grid
            .position(cutoff)
            .ok_or(Error::CutoffNotInGrid(cutoff))?;
        Ok(self.column_at(j))
    }

    pub fn score(&self, doc_id: &str, cutoff: usize) -> Option<f64> {
        let j = self.grid.position(cutoff)?;
        let pos = self.doc_ids.iter().position(|d| d == doc_id)?;
        Some(self.scores[pos][j])
    }

    /// CSV with header `doc_id,type,r@<c1>,…`, one row per document in index order.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["doc_id".to_owned(), "type".to_owned()];
        header.extend(self.grid.cutoffs().iter().map(|c| format!("r@{c}")));
        out.write_record(&header)?;
        for (id, row) in self.doc_ids.iter().zip(&self.scores) {
            let mut record = vec![id.clone(), self.type_label.clone()];
            record.extend(row.iter().map(|v| v.to_string()));
            out.write_record(&record)?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

pub fn compute_retrievability(
    index: &Index,
    queries: &QuerySet,
    grid: &CutoffGrid,
) -> Result<RetrievabilityTable> {
    compute_retrievability_with(index, queries, grid, &RetrievabilityOptions::default())
}

/// Retrieves every query once at `k = grid.max()` and credits each hit at
/// rank ρ with `w_q` for every cutoff `c >= ρ`.
///
/// Retrieval runs on the current rayon pool; hits are folded in query order,
/// so the table does not depend on the number of threads.
pub fn compute_retrievability_with(
    index: &Index,
    queries: &QuerySet,
    grid: &CutoffGrid,
    options: &RetrievabilityOptions,
) -> Result<RetrievabilityTable> {
    if queries.is_empty() {
        return Err(Error::EmptyQuerySet);
    }
    if grid.max() > options.max_cutoff_cap {
        return Err(Error::InvalidGrid(format!(
            "largest cutoff {} exceeds the cap of {}",
            grid.max(),
            options.max_cutoff_cap
        )));
    }

    let g = grid.len();
    let mut scores = vec![vec![0.0f64; g]; index.doc_count()];
    let mut zero_hit_queries = 0;
    let k = grid.max();

    for block in queries.queries().chunks(BLOCK) {
        let lists: Vec<Vec<u32>> = block
            .par_iter()
            .map(|q| {
                retrieve_terms(index, &q.terms(), k)
                    .entries
                    .iter()
                    .map(|e| e.position)
                    .collect()
            })
            .collect();
        for (query, hits) in block.iter().zip(&lists) {
            if hits.is_empty() {
                zero_hit_queries += 1;
                continue;
            }
            for (i, &doc) in hits.iter().enumerate() {
                let Some(first) = grid.first_covering(i + 1) else {
                    break;
                };
                for slot in &mut scores[doc as usize][first..] {
                    *slot += query.weight;
                }
            }
        }
    }

    Ok(RetrievabilityTable {
        type_label: index.type_label().to_owned(),
        grid: grid.clone(),
        doc_ids: index.doc_ids().to_vec(),
        scores,
        query_count: queries.len(),
        weighting: queries.weighting(),
        zero_hit_queries,
    })
}

/// Number and fraction of documents with r(d) > 0 at `cutoff`.
pub fn percent_retrieved(table: &RetrievabilityTable, cutoff: usize) -> Result<(usize, f64)> {
    let column = table.column(cutoff)?;
    let count = column.iter().filter(|&&v| v > 0.0).count();
    Ok((count, count as f64 / table.doc_count() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, Record};
    use crate::engine::{build_index, Bm25Params};

    fn index_of(texts: &[String]) -> Index {
        let records = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Record::new(format!("d{i:03}"), "pub", vec![("t".into(), t.clone())]))
            .collect();
        build_index(
            &Corpus::from_records(records).unwrap(),
            Bm25Params::default(),
        )
        .unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(CutoffGrid::new(vec![]).is_err());
        assert!(CutoffGrid::new(vec![0, 10]).is_err());
        assert!(CutoffGrid::new(vec![10, 10]).is_err());
        assert!(CutoffGrid::new(vec![20, 10]).is_err());
        let g: CutoffGrid = "10, 20,30".parse().unwrap();
        assert_eq!(g.cutoffs(), &[10, 20, 30]);
        assert_eq!(g.to_string(), "10,20,30");
        assert_eq!(CutoffGrid::default().cutoffs(), &DEFAULT_CUTOFFS);
        assert_eq!(g.first_covering(1), Some(0));
        assert_eq!(g.first_covering(10), Some(0));
        assert_eq!(g.first_covering(11), Some(1));
        assert_eq!(g.first_covering(31), None);
    }

    #[test]
    fn single_hit() {
        let idx = index_of(&["apple".into()]);
        let qs = QuerySet::from_texts(["apple"], WeightingMode::Uniform).unwrap();
        let t = compute_retrievability(&idx, &qs, &CutoffGrid::new(vec![10]).unwrap()).unwrap();
        assert_eq!(t.scores, vec![vec![1.0]]);
        assert_eq!(percent_retrieved(&t, 10).unwrap(), (1, 1.0));
    }

    #[test]
    fn rank_fifteen_counts_only_at_twenty() {
        // Fourteen short documents outrank the long target for "apple".
        let mut texts: Vec<String> = (0..14).map(|_| "apple".to_string()).collect();
        texts.push("apple pear plum fig kiwi lime".into());
        let idx = index_of(&texts);
        let qs = QuerySet::from_texts(["apple"], WeightingMode::Uniform).unwrap();
        let t = compute_retrievability(&idx, &qs, &CutoffGrid::new(vec![10, 20]).unwrap()).unwrap();
        assert_eq!(t.scores[14], vec![0.0, 1.0]);
        assert_eq!(t.score("d014", 20), Some(1.0));
    }

    #[test]
    fn empty_queryset_and_cap() {
        let idx = index_of(&["apple".into()]);
        let qs = QuerySet::from_texts(["apple"], WeightingMode::Uniform).unwrap();
        let grid = CutoffGrid::new(vec![10, 2000]).unwrap();
        assert!(compute_retrievability(&idx, &qs, &grid).is_err());
        let opts = RetrievabilityOptions {
            max_cutoff_cap: 5000,
        };
        assert!(compute_retrievability_with(&idx, &qs, &grid, &opts).is_ok());
    }

    #[test]
    fn zero_hit_queries_are_counted() {
        let idx = index_of(&["apple".into(), "pear".into()]);
        let qs = QuerySet::from_texts(["apple", "kiwi", "!!"], WeightingMode::Uniform).unwrap();
        let t = compute_retrievability(&idx, &qs, &CutoffGrid::default()).unwrap();
        assert_eq!(t.zero_hit_queries, 2);
        assert_eq!(t.query_count, 3);
        assert_eq!(percent_retrieved(&t, 10).unwrap(), (1, 0.5));
        assert!(matches!(
            percent_retrieved(&t, 15),
            Err(Error::CutoffNotInGrid(15))
        ));
    }

    #[test]
    fn all_zero_table() {
        let idx = index_of(&["apple".into(), "pear".into()]);
        let qs = QuerySet::from_texts(["kiwi"], WeightingMode::Uniform).unwrap();
        let t = compute_retrievability(&idx, &qs, &CutoffGrid::default()).unwrap();
        assert_eq!(percent_retrieved(&t, 100).unwrap(), (0, 0.0));
    }

    #[test]
    fn multiplicity_weights_accumulate() {
        let idx = index_of(&["apple".into(), "apple pear".into()]);
        let qs =
            QuerySet::from_texts(["apple", "apple", "pear"], WeightingMode::Multiplicity).unwrap();
        let t = compute_retrievability(&idx, &qs, &CutoffGrid::new(vec![1, 10]).unwrap()).unwrap();
        assert_eq!(t.scores[0], vec![2.0, 2.0]);
        assert_eq!(t.scores[1], vec![1.0, 3.0]);
    }

    #[test]
    fn csv_layout() {
        let idx = index_of(&["apple".into(), "pear".into()]);
        let qs = QuerySet::from_texts(["apple"], WeightingMode::Uniform).unwrap();
        let t = compute_retrievability(&idx, &qs, &CutoffGrid::new(vec![10, 20]).unwrap()).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "doc_id,type,r@10,r@20\nd000,pub,1,1\nd001,pub,0,0\n"
        );
    }
}
