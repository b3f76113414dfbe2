//! Retrievability and usefulness auditing for typed document collections.
//!
//! The pipeline: load a [`corpus::Corpus`], split it by type, build one BM25
//! [`engine::Index`] per type, replay a [`queryset::QuerySet`] against each
//! index to get per-document retrievability over a sweep of rank cutoffs,
//! optionally score usefulness from export events, and summarize every score
//! table with [`inequality`] statistics, Gini coefficients and Lorenz curves.

pub mod cli;
pub mod corpus;
pub mod engine;
mod error;
pub mod inequality;
pub mod manifest;
pub mod queryset;
pub mod retrievability;
pub mod synth;
pub mod usefulness;

pub use error::{Error, Result};
