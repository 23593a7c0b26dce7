//! Pipeline orchestration: load the dataset, generate cards, mine insights
//! per card, render narratives and charts, and write the output directory
//! atomically (everything lands in a temp directory that is renamed into
//! place on success, so failures leave no partial output).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::Instant;

use insight_core::insight::rank_and_cap;
use insight_core::qugen::{
    extract_json_objects, onlystats_cards, run_qugen, EmbeddingProvider, HashEmbedder,
    LlmProvider, QugenError, StageCounts,
};
use insight_core::rng::derive_seed;
use insight_core::table::Dataset;
use insight_core::{basic_insight, deeper_insights, InsightCard};

use crate::config::{EmbedderKind, Mode, RunConfig};
use crate::dataset_io::load_dataset;
use crate::providers::{HttpChatProvider, HttpEmbeddingProvider, StubLlmProvider};
use crate::report::{ReportInsight, RunReport};
use crate::PipelineError;

fn api_key() -> Option<String> {
    std::env::var("LLM_API_KEY").ok().filter(|k| !k.is_empty())
}

fn build_llm(config: &RunConfig) -> Result<Option<Box<dyn LlmProvider>>, PipelineError> {
    if let Some(stub_dir) = &config.llm.stub_dir {
        let stub = StubLlmProvider::from_dir(stub_dir)
            .map_err(|e| PipelineError::Config(format!("{e}")))?;
        return Ok(Some(Box::new(stub)));
    }
    if let Some(endpoint) = &config.llm.endpoint {
        let model = config.llm.model.clone().ok_or_else(|| {
            PipelineError::Config("llm.model is required with an HTTP endpoint".into())
        })?;
        return Ok(Some(Box::new(HttpChatProvider::new(
            endpoint,
            &model,
            api_key(),
        ))));
    }
    Ok(None)
}

fn build_embedder(config: &RunConfig) -> Result<Box<dyn EmbeddingProvider>, PipelineError> {
    match config.embedder {
        EmbedderKind::Fallback => Ok(Box::new(HashEmbedder::default())),
        EmbedderKind::Remote => {
            let endpoint = config.llm.embedding_endpoint.clone().ok_or_else(|| {
                PipelineError::Config(
                    "llm.embedding_endpoint is required with --embedder remote".into(),
                )
            })?;
            let model = config
                .llm
                .embedding_model
                .clone()
                .unwrap_or_else(|| "default".into());
            Ok(Box::new(HttpEmbeddingProvider {
                endpoint,
                model,
                api_key: api_key(),
            }))
        }
    }
}

/// Asks the LLM which columns could carry meaningful filters for a card's
/// perspective; failures degrade to no suggestions. The result is
/// intersected with the schema.
fn filter_column_candidates(
    llm: &dyn LlmProvider,
    dataset: &Dataset,
    card: &InsightCard,
    diagnostics: &mut Vec<String>,
) -> BTreeSet<String> {
    let mut prompt = String::new();
    prompt.push_str(
        "Given the table below and an analysis question, list the columns that would \
         make semantically meaningful filters when searching for deeper insights. \
         Answer with one JSON object: {\"columns\": [\"<column>\", ...]}.\n\n",
    );
    prompt.push_str(&insight_core::qugen::schema_text(dataset));
    prompt.push_str(&format!(
        "\nQuestion: {}\nBreakdown: {}\nMeasure: {}\n",
        card.question, card.breakdown, card.measure
    ));

    let response = match llm.complete(&prompt, 0.2, 1) {
        Ok(mut texts) if !texts.is_empty() => texts.remove(0),
        Ok(_) => return BTreeSet::new(),
        Err(e) => {
            diagnostics.push(format!(
                "filter-column suggestions unavailable for '{}': {e}",
                card.question
            ));
            return BTreeSet::new();
        }
    };
    for block in extract_json_objects(&response) {
        let Ok(value) = serde_json::from_str::<serde_json::Value>(&block) else {
            continue;
        };
        if let Some(columns) = value.get("columns").and_then(|v| v.as_array()) {
            return columns
                .iter()
                .filter_map(|c| c.as_str())
                .filter(|name| dataset.has_column(name))
                .map(str::to_owned)
                .collect();
        }
    }
    BTreeSet::new()
}

/// Runs the full pipeline and writes `report.json` plus one SVG per insight
/// into the configured output directory.
pub fn run_pipeline(config: &RunConfig) -> Result<RunReport, PipelineError> {
    let total_start = Instant::now();
    let mut timings: BTreeMap<String, u64> = BTreeMap::new();
    let mut diagnostics: Vec<String> = Vec::new();

    // Fail fast, before anything is written.
    let dataset_path = config
        .dataset
        .clone()
        .ok_or_else(|| PipelineError::Config("no dataset given (--dataset)".into()))?;
    if !dataset_path.exists() {
        return Err(PipelineError::Config(format!(
            "dataset not found: {}",
            dataset_path.display()
        )));
    }
    if config.out.exists() {
        return Err(PipelineError::Config(format!(
            "output directory already exists: {}",
            config.out.display()
        )));
    }

    let stage_start = Instant::now();
    let dataset = load_dataset(
        &dataset_path,
        config.meta.as_deref(),
        &config.inference.to_options(),
    )?;
    timings.insert("load".into(), stage_start.elapsed().as_millis() as u64);

    let llm = build_llm(config)?;
    let embedder = build_embedder(config)?;
    let thresholds = config.thresholds.to_thresholds();

    let stage_start = Instant::now();
    let (cards, stage_counts) = match config.mode {
        Mode::Onlystats => {
            let cards = onlystats_cards(&dataset, config.top_k, config.seed).map_err(
                |e| match e {
                    QugenError::NoEligiblePairs => PipelineError::CardGeneration(
                        "no eligible (breakdown, measure) pairs in this dataset".into(),
                    ),
                    QugenError::Provider(p) => PipelineError::Provider(p.message),
                },
            )?;
            let n = cards.len();
            (
                cards,
                StageCounts {
                    parsed: n,
                    after_relevance: n,
                    after_dedup: n,
                    after_triviality: n,
                },
            )
        }
        Mode::Quis => {
            let llm = llm.as_deref().ok_or_else(|| {
                PipelineError::Config(
                    "quis mode needs an LLM: set --llm-endpoint or --llm-stub".into(),
                )
            })?;
            let run = run_qugen(
                &dataset,
                llm,
                embedder.as_ref(),
                &config.qugen.to_params(),
                derive_seed(config.seed, "qugen", 0),
            );
            diagnostics.extend(run.diagnostics);
            (run.cards, run.counts)
        }
    };
    timings.insert("cards".into(), stage_start.elapsed().as_millis() as u64);

    let stage_start = Instant::now();
    let mut report_insights: Vec<ReportInsight> = Vec::new();
    for (card_index, card) in cards.iter().enumerate() {
        let llm_candidates = match (&llm, config.mode) {
            (Some(llm), Mode::Quis) => {
                filter_column_candidates(llm.as_ref(), &dataset, card, &mut diagnostics)
            }
            _ => BTreeSet::new(),
        };

        let mut insights = match basic_insight(&dataset, card, &thresholds) {
            Ok(insights) => insights,
            Err(e) => {
                diagnostics.push(format!("card {card_index} skipped: {e}"));
                continue;
            }
        };
        let search_params = config
            .search
            .to_params(derive_seed(config.seed, "search", card_index as u64));
        match deeper_insights(&dataset, card, &search_params, &llm_candidates, &thresholds) {
            Ok(deeper) => insights.extend(deeper),
            Err(e) => diagnostics.push(format!(
                "subspace search failed for card {card_index}: {e}"
            )),
        }

        // Cap by normalized score, then emit grouped by pattern within the
        // card, best first.
        let mut ranked = rank_and_cap(insights, config.insight_cap);
        ranked.sort_by(|a, b| {
            a.pattern
                .cmp(&b.pattern)
                .then_with(|| b.normalized_score.total_cmp(&a.normalized_score))
                .then_with(|| a.subspace.canonical_key().cmp(&b.subspace.canonical_key()))
        });
        let mut per_pattern: BTreeMap<&'static str, usize> = BTreeMap::new();
        for insight in ranked {
            let n = per_pattern.entry(insight.pattern.label()).or_insert(0);
            let chart_file = format!("{card_index}_{}_{n}.svg", insight.pattern.label());
            *n += 1;
            report_insights.push(ReportInsight {
                card_index,
                chart_file,
                insight,
            });
        }
    }
    timings.insert("insights".into(), stage_start.elapsed().as_millis() as u64);

    let avg_normalized_score = if report_insights.is_empty() {
        0.0
    } else {
        report_insights
            .iter()
            .map(|entry| entry.insight.normalized_score)
            .sum::<f64>()
            / report_insights.len() as f64
    };

    let mut report = RunReport {
        config: config.clone(),
        cards,
        stage_counts,
        insights: report_insights,
        avg_normalized_score,
        timings_ms: timings,
        diagnostics,
    };

    let stage_start = Instant::now();
    write_outputs(&report, &config.out)?;
    report
        .timings_ms
        .insert("write".into(), stage_start.elapsed().as_millis() as u64);
    report
        .timings_ms
        .insert("total".into(), total_start.elapsed().as_millis() as u64);

    Ok(report)
}

/// Writes the report and charts into a temp directory next to the target,
/// then renames it into place.
fn write_outputs(report: &RunReport, out: &Path) -> Result<(), PipelineError> {
    let file_name = out
        .file_name()
        .ok_or_else(|| PipelineError::Config(format!("bad output path: {}", out.display())))?;
    let temp = out.with_file_name(format!("{}.partial", file_name.to_string_lossy()));
    if temp.exists() {
        std::fs::remove_dir_all(&temp)
            .map_err(|e| PipelineError::Io(format!("cannot clear {}: {e}", temp.display())))?;
    }
    std::fs::create_dir_all(&temp)
        .map_err(|e| PipelineError::Io(format!("cannot create {}: {e}", temp.display())))?;

    let write_all = || -> Result<(), PipelineError> {
        std::fs::write(temp.join("report.json"), report.to_json_string())
            .map_err(|e| PipelineError::Io(format!("cannot write report: {e}")))?;
        for entry in &report.insights {
            std::fs::write(temp.join(&entry.chart_file), &entry.insight.chart.rendered)
                .map_err(|e| {
                    PipelineError::Io(format!("cannot write {}: {e}", entry.chart_file))
                })?;
        }
        std::fs::rename(&temp, out).map_err(|e| {
            PipelineError::Io(format!("cannot move output into place: {e}"))
        })?;
        Ok(())
    };

    let result = write_all();
    if result.is_err() {
        let _ = std::fs::remove_dir_all(&temp);
    }
    result
}
