//! Core library for automated insight mining over tabular data.
//!
//! The pipeline goes: load a table ([`table::Dataset`]), generate analysis
//! questions as Insight Cards ([`qugen`]), compute group-by views for each
//! card, score them against the four insight patterns ([`patterns`]), search
//! filter subspaces for deeper matches ([`search`]), and render the surviving
//! insights as narratives and SVG charts ([`insight`], [`chart`]).
//!
//! The crate is `no_std` (with `alloc`); everything here is pure computation.
//! File, network, and CLI concerns live in the companion `insight-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod chart;
pub mod insight;
pub mod patterns;
pub mod qugen;
pub mod rng;
pub mod search;
pub mod stats;
pub mod table;

pub use insight::{basic_insight, deeper_insights, render_chart, render_text, Insight};
pub use patterns::{applicable_patterns, Pattern, PatternScore, ScoreContext, Thresholds};
pub use qugen::{
    onlystats_cards, run_qugen, CardOrigin, EmbeddingProvider, InsightCard, LlmProvider,
    QugenParams,
};
pub use search::{beam_search, ScoredSubspace, SearchParams};
pub use table::{Cell, Column, ColumnKind, Dataset, Measure, Perspective, Subspace, View};
