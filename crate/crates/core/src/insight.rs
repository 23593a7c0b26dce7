//! End-to-end insight extraction for one card: the basic insight over the
//! whole dataset, deeper insights found by subspace search, and the
//! rendering of each insight into a narrative and a chart.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::chart::{bar_chart, dual_pie, scatter_with_trend, ChartDoc, ChartKind, Series};
use crate::patterns::{
    applicable_patterns, score_distribution_difference, score_single_view, Pattern, PatternScore,
    ScoreContext, ScoreDetail, Thresholds, OUTSTANDING_VALUE_CAP,
};
use crate::qugen::InsightCard;
use crate::rng::derive_seed;
use crate::search::{beam_search, SearchError, SearchParams};
use crate::stats::TrendDirection;
use crate::table::{compute_view, format_number, Dataset, Perspective, Subspace, TableError, View};

/// A scored, rendered insight: a pattern observed in the view of a card's
/// perspective under some (possibly empty) subspace.
#[derive(Debug, Clone)]
pub struct Insight {
    pub card: InsightCard,
    pub subspace: Subspace,
    pub pattern: Pattern,
    pub raw_score: f64,
    pub normalized_score: f64,
    pub view: View,
    /// For distribution difference: the parent view the candidate was
    /// compared against.
    pub comparison_view: Option<View>,
    pub detail: ScoreDetail,
    pub narrative: String,
    pub chart: ChartDoc,
}

impl Insight {
    pub fn breakdown(&self) -> &str {
        &self.card.breakdown
    }

    pub fn measure(&self) -> &crate::table::Measure {
        &self.card.measure
    }

    fn assemble(
        card: &InsightCard,
        subspace: Subspace,
        score: PatternScore,
        view: View,
        comparison_view: Option<View>,
    ) -> Insight {
        let mut insight = Insight {
            card: card.clone(),
            subspace,
            pattern: score.pattern,
            raw_score: score.raw,
            normalized_score: score.normalized,
            view,
            comparison_view,
            detail: score.detail,
            narrative: String::new(),
            chart: ChartDoc {
                kind: ChartKind::Bar,
                title: String::new(),
                series: Vec::new(),
                rendered: String::new(),
            },
        };
        insight.narrative = render_text(&insight);
        insight.chart = render_chart(&insight);
        insight
    }
}

/// Scores the whole-dataset view of a card and returns one insight per
/// passing pattern (the subspace is empty). View computation errors
/// propagate; a pattern whose preconditions fail is simply not emitted.
pub fn basic_insight(
    dataset: &Dataset,
    card: &InsightCard,
    thresholds: &Thresholds,
) -> Result<Vec<Insight>, TableError> {
    let view = compute_view(dataset, &Subspace::empty(), &card.breakdown, &card.measure)?;
    let patterns = applicable_patterns(
        view.breakdown_kind,
        &card.measure,
        ScoreContext::BasicInsight,
    );
    let mut insights = Vec::new();
    for pattern in patterns {
        let Ok(score) = score_single_view(pattern, &view, thresholds) else {
            continue;
        };
        if score.passes {
            insights.push(Insight::assemble(
                card,
                Subspace::empty(),
                score,
                view.clone(),
                None,
            ));
        }
    }
    Ok(insights)
}

/// Runs the subspace search for every applicable pattern and returns one
/// insight per (subspace, pattern) whose score passes the threshold. The
/// empty subspace is excluded (it is covered by [`basic_insight`]); each
/// pattern searches with its own derived seed so patterns are independent.
pub fn deeper_insights(
    dataset: &Dataset,
    card: &InsightCard,
    params: &SearchParams,
    llm_candidates: &BTreeSet<String>,
    thresholds: &Thresholds,
) -> Result<Vec<Insight>, SearchError> {
    let breakdown_kind = dataset
        .column(&card.breakdown)
        .ok_or_else(|| TableError::UnknownColumn(card.breakdown.clone()))?
        .kind;
    let perspective = Perspective::new(&card.breakdown, card.measure.clone());
    let patterns = applicable_patterns(
        breakdown_kind,
        &card.measure,
        ScoreContext::SubspaceSearch,
    );

    let mut insights = Vec::new();
    for pattern in patterns {
        let pattern_params = SearchParams {
            seed: derive_seed(params.seed, pattern.label(), 0),
            ..params.clone()
        };
        let beam = beam_search(
            dataset,
            &Subspace::empty(),
            &perspective,
            pattern,
            llm_candidates,
            &pattern_params,
            thresholds,
        )?;
        for scored in beam {
            if scored.subspace.is_empty() || scored.score <= thresholds.for_pattern(pattern) {
                continue;
            }
            // Re-score to recover the full detail payload; for distribution
            // difference the parent is the subspace minus its last filter.
            let (score, comparison) = match pattern {
                Pattern::DistributionDifference => {
                    let parent = scored.subspace.parent().unwrap_or_default();
                    let Ok(parent_view) =
                        compute_view(dataset, &parent, &card.breakdown, &card.measure)
                    else {
                        continue;
                    };
                    let Ok(score) =
                        score_distribution_difference(&parent_view, &scored.view, thresholds)
                    else {
                        continue;
                    };
                    (score, Some(parent_view))
                }
                single => {
                    let Ok(score) = score_single_view(single, &scored.view, thresholds) else {
                        continue;
                    };
                    (score, None)
                }
            };
            insights.push(Insight::assemble(
                card,
                scored.subspace,
                score,
                scored.view,
                comparison,
            ));
        }
    }
    Ok(insights)
}

/// Sorts insights by descending normalized score (pattern order and
/// canonical subspace break ties) and keeps at most `cap`.
pub fn rank_and_cap(mut insights: Vec<Insight>, cap: usize) -> Vec<Insight> {
    insights.sort_by(|a, b| {
        b.normalized_score
            .total_cmp(&a.normalized_score)
            .then_with(|| a.pattern.cmp(&b.pattern))
            .then_with(|| a.subspace.canonical_key().cmp(&b.subspace.canonical_key()))
    });
    insights.truncate(cap);
    insights
}

fn scope_phrase(subspace: &Subspace) -> String {
    format!("{subspace}")
}

fn percent(share: f64) -> String {
    format_number(libm::round(share * 1000.0) / 10.0)
}

/// Renders the narrative for an insight from its pattern-specific template.
pub fn render_text(insight: &Insight) -> String {
    let scope = scope_phrase(&insight.subspace);
    let measure = insight.card.measure.to_string();
    let breakdown = &insight.card.breakdown;
    match &insight.detail {
        ScoreDetail::Trend { direction } => {
            let trend = match direction {
                TrendDirection::Increasing => "an increasing",
                TrendDirection::Decreasing => "a decreasing",
                TrendDirection::NoTrend => "a flat",
            };
            format!(
                "For {scope}, {measure} shows {trend} trend across {breakdown} \
                 (confidence {:.4}).",
                insight.raw_score
            )
        }
        ScoreDetail::OutstandingValue {
            top,
            negative,
            ratio,
        } => {
            let magnitude = if *ratio >= OUTSTANDING_VALUE_CAP {
                String::from("it is the only group with a nonzero value")
            } else {
                format!(
                    "{}x the next largest group",
                    format_number(libm::round(*ratio * 100.0) / 100.0)
                )
            };
            let polarity = if *negative {
                " (a negative outlier)"
            } else {
                ""
            };
            format!(
                "For {scope}, {top} stands out in {measure} across {breakdown}: \
                 {magnitude}{polarity}."
            )
        }
        ScoreDetail::Attribution { top, share } => format!(
            "For {scope}, {top} accounts for {}% of the total {measure} across {breakdown}.",
            percent(*share)
        ),
        ScoreDetail::DistributionDifference => {
            let baseline = insight
                .subspace
                .parent()
                .map(|p| scope_phrase(&p))
                .unwrap_or_else(|| String::from("the whole dataset"));
            format!(
                "For {scope}, the distribution of {measure} across {breakdown} shifts \
                 notably compared with {baseline} (divergence {:.4}).",
                insight.raw_score
            )
        }
    }
}

/// Renders the chart for an insight: trend becomes a scatter plot with a
/// fitted line, outstanding value and attribution become bar charts
/// (attribution labeled with percentage contributions), and distribution
/// difference becomes a pair of pies comparing the parent and filtered
/// distributions.
pub fn render_chart(insight: &Insight) -> ChartDoc {
    let measure = insight.card.measure.to_string();
    let breakdown = &insight.card.breakdown;
    let mut title = format!("{measure} by {breakdown}");
    if !insight.subspace.is_empty() {
        title.push_str(&format!(" ({})", insight.subspace));
    }

    let labels: Vec<String> = insight
        .view
        .groups
        .iter()
        .map(|(key, _)| key.display())
        .collect();
    let values: Vec<f64> = insight.view.groups.iter().map(|(_, v)| *v).collect();
    let main_series = Series {
        label: measure.clone(),
        points: labels.iter().cloned().zip(values.iter().copied()).collect(),
    };

    match insight.pattern {
        Pattern::Trend => {
            // Numeric group keys plot on their own axis; other orderable
            // keys (dates) fall back to their rank.
            let xs: Vec<f64> = if insight
                .view
                .groups
                .iter()
                .all(|(key, _)| key.as_number().is_some())
            {
                insight
                    .view
                    .groups
                    .iter()
                    .map(|(key, _)| key.as_number().expect("checked numeric"))
                    .collect()
            } else {
                (0..insight.view.groups.len()).map(|i| i as f64).collect()
            };
            let rendered = scatter_with_trend(&title, &labels, &xs, &values);
            ChartDoc {
                kind: ChartKind::ScatterWithTrendLine,
                title,
                series: alloc::vec![main_series],
                rendered,
            }
        }
        Pattern::OutstandingValue => {
            let rendered = bar_chart(&title, &labels, &values, false);
            ChartDoc {
                kind: ChartKind::Bar,
                title,
                series: alloc::vec![main_series],
                rendered,
            }
        }
        Pattern::Attribution => {
            let rendered = bar_chart(&title, &labels, &values, true);
            ChartDoc {
                kind: ChartKind::Bar,
                title,
                series: alloc::vec![main_series],
                rendered,
            }
        }
        Pattern::DistributionDifference => {
            let parent_view = insight.comparison_view.as_ref().unwrap_or(&insight.view);
            let before: Vec<(String, f64)> = parent_view
                .groups
                .iter()
                .map(|(key, value)| (key.display(), *value))
                .collect();
            let after: Vec<(String, f64)> = main_series.points.clone();
            let before_label = insight
                .subspace
                .parent()
                .map(|p| format!("{p}"))
                .unwrap_or_else(|| String::from("the whole dataset"));
            let after_label = format!("{}", insight.subspace);
            let rendered = dual_pie(&title, &before_label, &before, &after_label, &after);
            ChartDoc {
                kind: ChartKind::PieComparison,
                title,
                series: alloc::vec![
                    Series {
                        label: before_label,
                        points: before,
                    },
                    Series {
                        label: after_label,
                        points: after,
                    },
                ],
                rendered,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qugen::CardOrigin;
    use crate::table::{InferenceOptions, Measure};

    fn dataset_from(header: &[&str], rows: &[&[&str]]) -> Dataset {
        let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
        let rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect();
        Dataset::from_rows("test", None, &header, &rows, &InferenceOptions::default()).unwrap()
    }

    fn card(breakdown: &str, measure: Measure) -> InsightCard {
        InsightCard {
            question: format!("How does {measure} vary across {breakdown}?"),
            reason: "test".to_string(),
            breakdown: breakdown.to_string(),
            measure,
            origin: CardOrigin::OnlyStats,
        }
    }

    fn trend_dataset() -> Dataset {
        let rows: Vec<Vec<String>> = (1..=10)
            .map(|year| {
                alloc::vec![
                    format!("{}", 2000 + year),
                    format!("{}", year as f64 * 10.0 + 0.5)
                ]
            })
            .collect();
        let header = alloc::vec!["year".to_string(), "sales".to_string()];
        Dataset::from_rows("trend", None, &header, &rows, &InferenceOptions::default()).unwrap()
    }

    #[test]
    fn basic_insight_detects_trend() {
        let d = trend_dataset();
        let card = card("year", Measure::mean("sales"));
        let insights = basic_insight(&d, &card, &Thresholds::default()).unwrap();
        assert_eq!(insights.len(), 1);
        let insight = &insights[0];
        assert_eq!(insight.pattern, Pattern::Trend);
        assert!(insight.subspace.is_empty());
        assert!(insight.raw_score > 0.95);
        assert!(insight.narrative.contains("increasing trend"));
        assert!(insight.narrative.contains("year"));
        assert_eq!(insight.chart.kind, ChartKind::ScatterWithTrendLine);
    }

    #[test]
    fn basic_insight_uniform_view_is_empty() {
        let d = dataset_from(
            &["cat", "val"],
            &[&["a", "5"], &["b", "5"], &["c", "5"], &["d", "5"]],
        );
        let card = card("cat", Measure::sum("val"));
        let insights = basic_insight(&d, &card, &Thresholds::default()).unwrap();
        assert!(insights.is_empty());
    }

    #[test]
    fn basic_insight_emits_attribution_and_outstanding_value() {
        let d = dataset_from(
            &["cat", "val"],
            &[&["A", "6"], &["B", "2"], &["C", "2"]],
        );
        let card = card("cat", Measure::sum("val"));
        let insights = basic_insight(&d, &card, &Thresholds::default()).unwrap();
        assert_eq!(insights.len(), 2);
        let ov = insights
            .iter()
            .find(|i| i.pattern == Pattern::OutstandingValue)
            .unwrap();
        assert_eq!(ov.raw_score, 3.0);
        let attribution = insights
            .iter()
            .find(|i| i.pattern == Pattern::Attribution)
            .unwrap();
        assert_eq!(attribution.raw_score, 0.6);
        assert!(attribution.narrative.contains("60"));
        assert!(attribution.narrative.contains('A'));
        assert_eq!(attribution.chart.kind, ChartKind::Bar);
    }

    #[test]
    fn basic_insight_propagates_view_errors() {
        let d = dataset_from(&["cat", "val"], &[&["a", "1"]]);
        let bad = card("nope", Measure::sum("val"));
        assert!(matches!(
            basic_insight(&d, &bad, &Thresholds::default()),
            Err(TableError::UnknownColumn(_))
        ));
    }

    fn planted_subspace_dataset() -> Dataset {
        // dept means are flat overall, but within region=west the ops
        // department spikes: an outstanding value only under that filter.
        let mut rows: Vec<Vec<String>> = Vec::new();
        let depts = ["ops", "eng", "mkt"];
        let regions = ["west", "east", "south"];
        for region in regions {
            for dept in depts {
                for k in 0..3 {
                    let sales = if region == "west" && dept == "ops" {
                        200.0 + k as f64
                    } else {
                        10.0 + k as f64
                    };
                    rows.push(alloc::vec![
                        region.to_string(),
                        dept.to_string(),
                        format_number(sales)
                    ]);
                }
            }
        }
        let header = alloc::vec![
            "region".to_string(),
            "dept".to_string(),
            "sales".to_string()
        ];
        Dataset::from_rows("planted", None, &header, &rows, &InferenceOptions::default()).unwrap()
    }

    #[test]
    fn deeper_insights_find_planted_subspace() {
        let d = planted_subspace_dataset();
        let card = card("dept", Measure::mean("sales"));
        let params = SearchParams {
            beam_width: 50,
            exp_factor: 500,
            max_depth: 1,
            w_llm: 0.5,
            seed: 11,
        };
        let insights = deeper_insights(
            &d,
            &card,
            &params,
            &BTreeSet::new(),
            &Thresholds::default(),
        )
        .unwrap();
        let ov: Vec<&Insight> = insights
            .iter()
            .filter(|i| i.pattern == Pattern::OutstandingValue)
            .collect();
        assert_eq!(ov.len(), 1);
        assert_eq!(ov[0].subspace.canonical_key(), "region=west");
        assert!(ov[0].raw_score > 1.4);
        assert!(!insights.iter().any(|i| i.subspace.is_empty()));
    }

    #[test]
    fn deeper_insights_empty_when_nothing_passes() {
        // Perfectly flat means in every subspace: no pattern can pass.
        let d = dataset_from(
            &["region", "dept", "sales"],
            &[
                &["west", "ops", "10"],
                &["west", "eng", "10"],
                &["west", "mkt", "10"],
                &["east", "ops", "10"],
                &["east", "eng", "10"],
                &["east", "mkt", "10"],
            ],
        );
        let card = card("dept", Measure::mean("sales"));
        let insights = deeper_insights(
            &d,
            &card,
            &SearchParams::default(),
            &BTreeSet::new(),
            &Thresholds::default(),
        )
        .unwrap();
        assert!(insights.is_empty());
    }

    #[test]
    fn deeper_insights_dd_only_for_count() {
        let d = planted_subspace_dataset();
        // MEAN measure: DD must not run at all.
        let mean_card = card("dept", Measure::mean("sales"));
        let insights = deeper_insights(
            &d,
            &mean_card,
            &SearchParams::default(),
            &BTreeSet::new(),
            &Thresholds::default(),
        )
        .unwrap();
        assert!(insights
            .iter()
            .all(|i| i.pattern != Pattern::DistributionDifference));
    }

    #[test]
    fn dd_insight_carries_comparison_view_and_pies() {
        // Counts by dept shift completely under region=west.
        let d = dataset_from(
            &["region", "dept"],
            &[
                &["west", "ops"],
                &["west", "ops"],
                &["west", "ops"],
                &["east", "eng"],
                &["east", "eng"],
                &["east", "mkt"],
            ],
        );
        let card = card("dept", Measure::count());
        let params = SearchParams {
            beam_width: 50,
            exp_factor: 100,
            max_depth: 1,
            w_llm: 0.5,
            seed: 2,
        };
        let insights = deeper_insights(
            &d,
            &card,
            &params,
            &BTreeSet::new(),
            &Thresholds::default(),
        )
        .unwrap();
        let dd: Vec<&Insight> = insights
            .iter()
            .filter(|i| i.pattern == Pattern::DistributionDifference)
            .collect();
        assert!(!dd.is_empty());
        for insight in dd {
            assert!(insight.comparison_view.is_some());
            assert_eq!(insight.chart.kind, ChartKind::PieComparison);
            assert_eq!(insight.chart.series.len(), 2);
            assert_eq!(insight.chart.rendered.matches("<g class=\"pie\">").count(), 2);
            // Re-check the stored score from the stored views.
            let recheck = score_distribution_difference(
                insight.comparison_view.as_ref().unwrap(),
                &insight.view,
                &Thresholds::default(),
            )
            .unwrap();
            assert!((recheck.raw - insight.raw_score).abs() < 1e-12);
        }
    }

    #[test]
    fn insights_are_recheckable_from_stored_view() {
        let d = planted_subspace_dataset();
        let card = card("dept", Measure::mean("sales"));
        let params = SearchParams {
            beam_width: 50,
            exp_factor: 500,
            max_depth: 1,
            w_llm: 0.5,
            seed: 11,
        };
        let mut insights =
            basic_insight(&d, &card, &Thresholds::default()).unwrap();
        insights.extend(
            deeper_insights(&d, &card, &params, &BTreeSet::new(), &Thresholds::default())
                .unwrap(),
        );
        for insight in &insights {
            // The stored view equals a fresh computation.
            let fresh = compute_view(&d, &insight.subspace, &card.breakdown, &card.measure)
                .unwrap();
            assert_eq!(fresh, insight.view);
            assert!(insight.raw_score > Thresholds::default().for_pattern(insight.pattern));
            if insight.pattern != Pattern::DistributionDifference {
                let recheck =
                    score_single_view(insight.pattern, &fresh, &Thresholds::default()).unwrap();
                assert_eq!(recheck.raw, insight.raw_score);
            }
        }
        // No duplicate (breakdown, measure, subspace, pattern) tuples.
        let mut keys: Vec<String> = insights
            .iter()
            .map(|i| {
                format!(
                    "{}|{}|{}|{}",
                    i.card.breakdown,
                    i.card.measure,
                    i.subspace.canonical_key(),
                    i.pattern
                )
            })
            .collect();
        let before = keys.len();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), before);
    }

    #[test]
    fn rank_and_cap_orders_by_normalized_score() {
        let d = planted_subspace_dataset();
        let card = card("dept", Measure::mean("sales"));
        let params = SearchParams {
            beam_width: 50,
            exp_factor: 500,
            max_depth: 1,
            w_llm: 0.5,
            seed: 11,
        };
        let insights = deeper_insights(
            &d,
            &card,
            &params,
            &BTreeSet::new(),
            &Thresholds::default(),
        )
        .unwrap();
        let capped = rank_and_cap(insights, 1);
        assert_eq!(capped.len(), 1);
        let all = deeper_insights(
            &d,
            &card,
            &params,
            &BTreeSet::new(),
            &Thresholds::default(),
        )
        .unwrap();
        let ranked = rank_and_cap(all, usize::MAX);
        for pair in ranked.windows(2) {
            assert!(pair[0].normalized_score >= pair[1].normalized_score);
        }
    }

    #[test]
    fn render_text_templates() {
        let d = trend_dataset();
        let trend_card = card("year", Measure::mean("sales"));
        let insight = &basic_insight(&d, &trend_card, &Thresholds::default()).unwrap()[0];
        assert!(insight.narrative.contains("For the whole dataset"));
        assert!(insight.narrative.contains("MEAN(sales)"));

        // Filter rendering in a narrative.
        let d2 = planted_subspace_dataset();
        let ov_card = card("dept", Measure::mean("sales"));
        let params = SearchParams {
            beam_width: 50,
            exp_factor: 500,
            max_depth: 1,
            w_llm: 0.5,
            seed: 11,
        };
        let deeper = deeper_insights(
            &d2,
            &ov_card,
            &params,
            &BTreeSet::new(),
            &Thresholds::default(),
        )
        .unwrap();
        let ov = deeper
            .iter()
            .find(|i| i.pattern == Pattern::OutstandingValue)
            .unwrap();
        assert!(ov.narrative.contains("region = west"), "{}", ov.narrative);
        assert!(ov.narrative.contains("ops"), "{}", ov.narrative);
    }

    #[test]
    fn rendering_is_pure() {
        let d = trend_dataset();
        let trend_card = card("year", Measure::mean("sales"));
        let insight = &basic_insight(&d, &trend_card, &Thresholds::default()).unwrap()[0];
        assert_eq!(render_text(insight), insight.narrative);
        assert_eq!(render_chart(insight), insight.chart);
    }
}
