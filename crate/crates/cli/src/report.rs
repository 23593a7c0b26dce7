//! The run report and its canonical JSON serialization.
//!
//! Serialization is deterministic: object keys are emitted sorted and all
//! numbers come from the same computation on every run, so identical runs
//! produce byte-identical files. Wall-clock timings are only written when
//! `record_timings` is set, since they would break that property.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use insight_core::qugen::StageCounts;
use insight_core::table::Cell;
use insight_core::{Insight, InsightCard};

use crate::config::RunConfig;

/// One emitted insight plus its position in the card list and the file its
/// chart was written to.
#[derive(Debug, Clone)]
pub struct ReportInsight {
    pub card_index: usize,
    pub chart_file: String,
    pub insight: Insight,
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: RunConfig,
    pub cards: Vec<InsightCard>,
    pub stage_counts: StageCounts,
    pub insights: Vec<ReportInsight>,
    pub avg_normalized_score: f64,
    /// Wall-clock stage timings; always populated in memory, written to the
    /// report file only when `config.record_timings` is set.
    pub timings_ms: BTreeMap<String, u64>,
    /// Human-readable notes (skipped cards, provider hiccups); printed to
    /// the console, not part of the report file.
    pub diagnostics: Vec<String>,
}

fn cell_json(cell: &Cell) -> Value {
    match cell {
        Cell::Null => Value::Null,
        Cell::Number(v) => json!(v),
        Cell::Text(s) => json!(s),
    }
}

impl RunReport {
    pub fn to_json(&self) -> Value {
        let cards: Vec<Value> = self
            .cards
            .iter()
            .map(|card| {
                json!({
                    "question": card.question,
                    "reason": card.reason,
                    "breakdown": card.breakdown,
                    "measure": card.measure.to_string(),
                    "origin": card.origin.label(),
                })
            })
            .collect();

        let insights: Vec<Value> = self
            .insights
            .iter()
            .map(|entry| {
                let insight = &entry.insight;
                let subspace: Vec<Value> = insight
                    .subspace
                    .filters()
                    .iter()
                    .map(|(col, value)| json!([col, cell_json(value)]))
                    .collect();
                let view: Vec<Value> = insight
                    .view
                    .groups
                    .iter()
                    .map(|(key, value)| json!([cell_json(key), value]))
                    .collect();
                json!({
                    "card_index": entry.card_index,
                    "breakdown": insight.card.breakdown,
                    "measure": insight.card.measure.to_string(),
                    "subspace": subspace,
                    "pattern": insight.pattern.label(),
                    "raw_score": insight.raw_score,
                    "normalized_score": insight.normalized_score,
                    "narrative": insight.narrative,
                    "chart_file": entry.chart_file,
                    "view": view,
                })
            })
            .collect();

        let timings: BTreeMap<String, u64> = if self.config.record_timings {
            self.timings_ms.clone()
        } else {
            BTreeMap::new()
        };

        json!({
            "config": serde_json::to_value(&self.config).expect("config serializes"),
            "cards": cards,
            "stage_counts": {
                "parsed": self.stage_counts.parsed,
                "after_relevance": self.stage_counts.after_relevance,
                "after_dedup": self.stage_counts.after_dedup,
                "after_triviality": self.stage_counts.after_triviality,
            },
            "insights": insights,
            "avg_normalized_score": self.avg_normalized_score,
            "timings_ms": timings,
        })
    }

    /// Canonical report text: pretty JSON with sorted keys and a trailing
    /// newline.
    pub fn to_json_string(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        text.push('\n');
        text
    }
}
