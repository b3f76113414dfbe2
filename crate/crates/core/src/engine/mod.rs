//! The retrieval system under audit: analyzer, immutable inverted index,
//! BM25 scoring and deterministic top-k retrieval.
//!
//! BM25 is evaluated as
//! `Σ_t idf(t) · tf·(k1+1) / (tf + k1·(1 − b + b·|D|/avgdl))` with
//! `idf(t) = ln(1 + (N − df + 0.5)/(df + 0.5))`, so scores are never negative.

mod analyzer;
mod index;
mod search;
mod snapshot;

pub use analyzer::{tokenize, ANALYZER_VERSION};
pub use index::{build_index, idf, score, Bm25Params, Index, Posting, MIXED_TYPE_LABEL};
pub use search::{retrieve_terms, retrieve_top_k, RankedEntry, RankedList};
pub use snapshot::{
    load_snapshot, read_snapshot, save_snapshot, write_snapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION,
};
