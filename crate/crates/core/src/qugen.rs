//! Insight Card generation.
//!
//! Cards come from one of two sources: an iterative LLM pipeline that
//! prompts with the dataset schema, a statistics summary, and in-context
//! examples sampled from earlier iterations, then filters the parsed cards
//! for relevance, duplicates, and triviality; or the purely statistical
//! baseline that ranks (breakdown, measure) pairs by Kruskal-Wallis
//! association strength.
//!
//! Model access is abstracted behind [`LlmProvider`] and
//! [`EmbeddingProvider`]; a deterministic hashed-token embedder is provided
//! for offline runs, while HTTP-backed providers live in the companion
//! crate.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use crate::rng::{fnv1a, sample_indices, SeededRng};
use crate::stats::kruskal_wallis;
use crate::table::{
    apply_subspace, compute_view, format_number, Cell, ColumnKind, Dataset, Measure, Subspace,
};

/// Where a card came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CardOrigin {
    /// Produced by the LLM pipeline in the given iteration (0-based).
    LlmIteration(usize),
    /// Produced by the statistical baseline.
    OnlyStats,
}

impl CardOrigin {
    pub fn label(self) -> String {
        match self {
            CardOrigin::LlmIteration(i) => format!("llm_iteration:{i}"),
            CardOrigin::OnlyStats => "onlystats".to_owned(),
        }
    }
}

/// A generated analysis question with the perspective it targets.
#[derive(Debug, Clone, PartialEq)]
pub struct InsightCard {
    pub question: String,
    pub reason: String,
    pub breakdown: String,
    pub measure: Measure,
    pub origin: CardOrigin,
}

/// Parameters for the iterative card-generation pipeline. Defaults:
/// 10 iterations of 3 samples at temperature 1.1 with 6 in-context
/// examples.
#[derive(Debug, Clone)]
pub struct QugenParams {
    pub iterations: usize,
    pub samples_per_iteration: usize,
    pub temperature: f64,
    pub in_context_examples: usize,
    pub relevance_threshold: f64,
    pub dedup_threshold: f64,
    /// Build the statistics summary through the LLM instead of the
    /// deterministic template.
    pub llm_stats: bool,
}

impl Default for QugenParams {
    fn default() -> Self {
        QugenParams {
            iterations: 10,
            samples_per_iteration: 3,
            temperature: 1.1,
            in_context_examples: 6,
            relevance_threshold: 0.2,
            dedup_threshold: 0.85,
            llm_stats: false,
        }
    }
}

/// A provider failure; carried as text so transports stay out of this crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProviderError {
    pub message: String,
}

impl ProviderError {
    pub fn new(message: impl Into<String>) -> ProviderError {
        ProviderError {
            message: message.into(),
        }
    }
}

impl fmt::Display for ProviderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "provider error: {}", self.message)
    }
}

impl core::error::Error for ProviderError {}

/// Text-completion provider: returns `samples` independent completions.
pub trait LlmProvider {
    fn complete(
        &self,
        prompt: &str,
        temperature: f64,
        samples: usize,
    ) -> Result<Vec<String>, ProviderError>;
}

/// Text-embedding provider; vectors must have a fixed dimension per
/// provider so cosine similarity is defined.
pub trait EmbeddingProvider {
    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError>;
}

/// Deterministic offline embedder: tokens are hashed into a fixed number of
/// buckets, weighted by log term frequency, and L2-normalized. Semantically
/// blind, but identical texts embed identically and token overlap yields
/// positive similarity, which is what the filters need for offline runs.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    pub dimensions: usize,
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder { dimensions: 256 }
    }
}

impl EmbeddingProvider for HashEmbedder {
    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        let mut vector = alloc::vec![0.0f64; self.dimensions];
        for token in tokenize(text) {
            let bucket = (fnv1a(&token) % self.dimensions as u64) as usize;
            vector[bucket] += 1.0;
        }
        for v in vector.iter_mut() {
            if *v > 0.0 {
                *v = libm::log(1.0 + *v);
            }
        }
        let norm = libm::sqrt(vector.iter().map(|v| v * v).sum::<f64>());
        if norm > 0.0 {
            for v in vector.iter_mut() {
                *v /= norm;
            }
        }
        Ok(vector)
    }
}

fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            for low in ch.to_lowercase() {
                current.push(low);
            }
        } else if !current.is_empty() {
            tokens.push(core::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Cosine similarity; zero vectors compare as 0.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..n {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / libm::sqrt(na * nb)
}

/// Errors from card generation.
#[derive(Debug, Clone, PartialEq)]
pub enum QugenError {
    Provider(ProviderError),
    /// The statistical baseline found no usable (breakdown, measure) pair.
    NoEligiblePairs,
}

impl fmt::Display for QugenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QugenError::Provider(e) => write!(f, "{e}"),
            QugenError::NoEligiblePairs => write!(f, "no eligible (breakdown, measure) pairs"),
        }
    }
}

impl core::error::Error for QugenError {}

impl From<ProviderError> for QugenError {
    fn from(e: ProviderError) -> Self {
        QugenError::Provider(e)
    }
}

/// One line per column: name, kind, and description when present.
pub fn schema_text(dataset: &Dataset) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "table: {}", dataset.name);
    if let Some(description) = &dataset.description {
        let _ = writeln!(text, "description: {description}");
    }
    let _ = writeln!(text, "columns:");
    for column in dataset.columns() {
        match &column.description {
            Some(d) => {
                let _ = writeln!(text, "- {} ({}): {d}", column.name, column.kind.label());
            }
            None => {
                let _ = writeln!(text, "- {} ({})", column.name, column.kind.label());
            }
        }
    }
    text
}

fn card_json(card: &InsightCard) -> String {
    let value = serde_json::json!({
        "question": card.question,
        "reason": card.reason,
        "breakdown": card.breakdown,
        "measure": card.measure.to_string(),
    });
    value.to_string()
}

/// Builds the card-generation prompt: task objective, output format, the
/// table schema, the statistics summary, and the in-context example cards,
/// in that order.
pub fn build_qugen_prompt(
    dataset: &Dataset,
    stats_summary: &str,
    examples: &[InsightCard],
) -> String {
    let mut prompt = String::new();
    prompt.push_str(
        "You are a data analyst planning exploratory analysis of a tabular dataset. \
         Propose analysis questions that could reveal interesting patterns, and express \
         each one as an Insight Card.\n\n",
    );
    prompt.push_str(
        "Output format: emit each Insight Card as a JSON object on its own lines with \
         exactly these fields:\n\
         {\"question\": \"<natural language question>\", \"reason\": \"<why this is worth \
         analyzing>\", \"breakdown\": \"<column to group by>\", \"measure\": \"<AGG(column)\
         , where AGG is one of SUM, MEAN, MIN, MAX, or COUNT for row counts>\"}\n\
         Think about the reason first, then the question, then pick the breakdown column \
         and the measure that answer it. Use only columns from the schema below, and do \
         not repeat the example cards.\n\n",
    );
    prompt.push_str("Schema:\n");
    prompt.push_str(&schema_text(dataset));
    prompt.push_str("\nKey statistics:\n");
    prompt.push_str(stats_summary);
    prompt.push_str("\nExample Insight Cards:\n");
    for card in examples {
        prompt.push_str(&card_json(card));
        prompt.push('\n');
    }
    prompt.push_str("\nGenerate new Insight Cards now.\n");
    prompt
}

/// Natural-language statistics summary of the dataset.
///
/// Without a provider this is a deterministic template: row count, then
/// min/mean/max for numeric-valued columns and distinct count plus the most
/// frequent value for the rest. With a provider, the model proposes simple
/// aggregate queries (as JSON perspectives) which are computed here and
/// verbalized; if nothing usable comes back, the template is used.
pub fn nl_stats_summary(
    dataset: &Dataset,
    llm: Option<&dyn LlmProvider>,
) -> Result<String, ProviderError> {
    match llm {
        None => Ok(template_stats_summary(dataset)),
        Some(provider) => {
            let lines = llm_stats_summary(dataset, provider)?;
            if lines.is_empty() {
                Ok(template_stats_summary(dataset))
            } else {
                Ok(lines)
            }
        }
    }
}

fn template_stats_summary(dataset: &Dataset) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "The dataset has {} rows.", dataset.row_count());
    if dataset.row_count() == 0 {
        return text;
    }
    for column in dataset.columns() {
        let non_null: Vec<&Cell> = column.values.iter().filter(|c| !c.is_null()).collect();
        if non_null.is_empty() {
            let _ = writeln!(text, "- {}: all values missing", column.name);
            continue;
        }
        let numbers: Vec<f64> = non_null.iter().filter_map(|c| c.as_number()).collect();
        if numbers.len() == non_null.len() {
            let min = numbers.iter().copied().fold(f64::INFINITY, f64::min);
            let max = numbers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mean = numbers.iter().sum::<f64>() / numbers.len() as f64;
            let _ = writeln!(
                text,
                "- {} ({}): min {}, mean {}, max {}",
                column.name,
                column.kind.label(),
                format_number(min),
                format_number(mean),
                format_number(max)
            );
        } else {
            let mut counts: alloc::collections::BTreeMap<&Cell, usize> =
                alloc::collections::BTreeMap::new();
            for cell in &non_null {
                *counts.entry(cell).or_insert(0) += 1;
            }
            let (top, _) = counts
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
                .expect("nonempty counts");
            let _ = writeln!(
                text,
                "- {} ({}): {} distinct values; most frequent: {}",
                column.name,
                column.kind.label(),
                counts.len(),
                top.display()
            );
        }
    }
    text
}

fn llm_stats_summary(dataset: &Dataset, llm: &dyn LlmProvider) -> Result<String, ProviderError> {
    let mut prompt = String::new();
    prompt.push_str(
        "Propose up to 8 simple statistical questions about the table below, each as a \
         JSON object {\"breakdown\": \"<column>\", \"measure\": \"<AGG(column) or COUNT>\"} \
         describing a group-by aggregate that answers it.\n\n",
    );
    prompt.push_str(&schema_text(dataset));
    let responses = llm.complete(&prompt, 0.2, 1)?;
    let mut lines = String::new();
    for response in &responses {
        for block in extract_json_objects(response) {
            let Ok(value) = serde_json::from_str::<serde_json::Value>(&block) else {
                continue;
            };
            let Some(breakdown) = value.get("breakdown").and_then(|v| v.as_str()) else {
                continue;
            };
            let Some(measure) = value
                .get("measure")
                .and_then(|v| v.as_str())
                .and_then(Measure::parse)
            else {
                continue;
            };
            let Ok(view) = compute_view(dataset, &Subspace::empty(), breakdown, &measure) else {
                continue;
            };
            if view.groups.is_empty() {
                continue;
            }
            let shown = view.groups.iter().take(5);
            let rendered: Vec<String> = shown
                .map(|(key, value)| format!("{} = {}", key.display(), format_number(*value)))
                .collect();
            let _ = writeln!(
                lines,
                "- {} by {}: {}",
                measure,
                breakdown,
                rendered.join(", ")
            );
        }
    }
    Ok(lines)
}

/// Extracts top-level balanced `{...}` blocks, respecting JSON strings.
/// Used to pull structured objects out of free-form model responses.
pub fn extract_json_objects(text: &str) -> Vec<String> {
    let bytes = text.as_bytes();
    let mut blocks = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate() {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' if depth > 0 => in_string = true,
            b'{' => {
                if depth == 0 {
                    start = i;
                }
                depth += 1;
            }
            b'}' if depth > 0 => {
                depth -= 1;
                if depth == 0 {
                    blocks.push(text[start..=i].to_owned());
                }
            }
            _ => {}
        }
    }
    blocks
}

/// Result of parsing an LLM response into cards.
#[derive(Debug, Clone, Default)]
pub struct ParsedCards {
    pub cards: Vec<InsightCard>,
    pub diagnostics: Vec<String>,
}

/// Extracts every well-formed card block from a model response. Malformed
/// blocks are skipped with a diagnostic; this never fails.
pub fn parse_insight_cards(response: &str, origin: CardOrigin) -> ParsedCards {
    let mut out = ParsedCards::default();
    for block in extract_json_objects(response) {
        match parse_card_block(&block, origin) {
            Ok(card) => out.cards.push(card),
            Err(reason) => out
                .diagnostics
                .push(format!("skipped malformed card block: {reason}")),
        }
    }
    out
}

fn parse_card_block(block: &str, origin: CardOrigin) -> Result<InsightCard, String> {
    let value: serde_json::Value =
        serde_json::from_str(block).map_err(|e| format!("invalid JSON ({e})"))?;
    let object = value.as_object().ok_or("not a JSON object")?;
    let field = |name: &str| -> Result<&str, String> {
        object
            .get(name)
            .and_then(|v| v.as_str())
            .map(str::trim)
            .ok_or(format!("missing string field '{name}'"))
    };
    let question = field("question")?;
    let reason = field("reason")?;
    let breakdown = field("breakdown")?;
    let measure_text = field("measure")?;
    if question.is_empty() || reason.is_empty() || breakdown.is_empty() {
        return Err("empty question, reason, or breakdown".to_owned());
    }
    let measure = Measure::parse(measure_text)
        .ok_or_else(|| format!("unparseable measure '{measure_text}'"))?;
    Ok(InsightCard {
        question: question.to_owned(),
        reason: reason.to_owned(),
        breakdown: breakdown.to_owned(),
        measure,
        origin,
    })
}

/// Keeps cards whose breakdown and measure columns exist in the schema and
/// whose question embeds close enough to the schema text. The schema
/// existence check applies regardless of similarity.
pub fn filter_relevance(
    cards: Vec<InsightCard>,
    dataset: &Dataset,
    embedder: &dyn EmbeddingProvider,
    threshold: f64,
) -> Result<Vec<InsightCard>, ProviderError> {
    let schema_vector = embedder.embed(&schema_text(dataset))?;
    let mut kept = Vec::with_capacity(cards.len());
    for card in cards {
        if !dataset.has_column(&card.breakdown) {
            continue;
        }
        if let Some(column) = &card.measure.column {
            if !dataset.has_column(column) {
                continue;
            }
        }
        let question_vector = embedder.embed(&card.question)?;
        if cosine_similarity(&question_vector, &schema_vector) >= threshold {
            kept.push(card);
        }
    }
    Ok(kept)
}

/// Greedy near-duplicate removal in input order: a card is dropped when its
/// question is at least `threshold`-similar to any retained question.
pub fn dedup_cards(
    cards: Vec<InsightCard>,
    embedder: &dyn EmbeddingProvider,
    threshold: f64,
) -> Result<Vec<InsightCard>, ProviderError> {
    let mut kept: Vec<InsightCard> = Vec::with_capacity(cards.len());
    let mut kept_vectors: Vec<Vec<f64>> = Vec::with_capacity(cards.len());
    for card in cards {
        let vector = embedder.embed(&card.question)?;
        let duplicate = kept_vectors
            .iter()
            .any(|existing| cosine_similarity(existing, &vector) >= threshold);
        if !duplicate {
            kept.push(card);
            kept_vectors.push(vector);
        }
    }
    Ok(kept)
}

/// Drops cards whose whole-dataset view has at most one group (nothing to
/// compare) or cannot be computed at all.
pub fn triviality_filter(
    cards: Vec<InsightCard>,
    dataset: &Dataset,
) -> (Vec<InsightCard>, Vec<String>) {
    let mut kept = Vec::with_capacity(cards.len());
    let mut diagnostics = Vec::new();
    for card in cards {
        match compute_view(dataset, &Subspace::empty(), &card.breakdown, &card.measure) {
            Ok(view) if view.group_count() > 1 => kept.push(card),
            Ok(_) => diagnostics.push(format!(
                "dropped trivial card (single-group view): {}",
                card.question
            )),
            Err(e) => diagnostics.push(format!("dropped card ({e}): {}", card.question)),
        }
    }
    (kept, diagnostics)
}

/// Cumulative card counts after each filtering stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageCounts {
    pub parsed: usize,
    pub after_relevance: usize,
    pub after_dedup: usize,
    pub after_triviality: usize,
}

/// Outcome of the iterative pipeline.
#[derive(Debug, Clone, Default)]
pub struct QugenRun {
    pub cards: Vec<InsightCard>,
    pub counts: StageCounts,
    pub diagnostics: Vec<String>,
}

/// Runs the iterative card-generation pipeline.
///
/// Each round samples in-context examples from the accumulated pool,
/// prompts for `samples_per_iteration` completions, parses the cards, and
/// pushes them through relevance, dedup (against the pool and the batch),
/// and triviality filters. A provider failure skips that round and the run
/// continues; the pool collected so far is always returned.
pub fn run_qugen(
    dataset: &Dataset,
    llm: &dyn LlmProvider,
    embedder: &dyn EmbeddingProvider,
    params: &QugenParams,
    seed: u64,
) -> QugenRun {
    let mut run = QugenRun::default();
    let mut rng = SeededRng::new(seed);

    let stats_summary = if params.llm_stats {
        match nl_stats_summary(dataset, Some(llm)) {
            Ok(summary) => summary,
            Err(e) => {
                run.diagnostics
                    .push(format!("stats summary fell back to template: {e}"));
                template_stats_summary(dataset)
            }
        }
    } else {
        template_stats_summary(dataset)
    };

    for iteration in 0..params.iterations {
        let example_indices =
            sample_indices(&mut rng, run.cards.len(), params.in_context_examples);
        let examples: Vec<InsightCard> = example_indices
            .iter()
            .map(|&i| run.cards[i].clone())
            .collect();
        let prompt = build_qugen_prompt(dataset, &stats_summary, &examples);

        let responses =
            match llm.complete(&prompt, params.temperature, params.samples_per_iteration) {
                Ok(responses) => responses,
                Err(e) => {
                    run.diagnostics
                        .push(format!("iteration {iteration} skipped: {e}"));
                    continue;
                }
            };

        let mut batch = Vec::new();
        for response in &responses {
            let parsed = parse_insight_cards(response, CardOrigin::LlmIteration(iteration));
            batch.extend(parsed.cards);
            run.diagnostics.extend(parsed.diagnostics);
        }
        run.counts.parsed += batch.len();

        let relevant = match filter_relevance(
            batch,
            dataset,
            embedder,
            params.relevance_threshold,
        ) {
            Ok(cards) => cards,
            Err(e) => {
                run.diagnostics
                    .push(format!("iteration {iteration} skipped at relevance: {e}"));
                continue;
            }
        };
        run.counts.after_relevance += relevant.len();

        // Dedup against the pool and within the batch in one pass; the pool
        // is already pairwise-distinct so its prefix survives unchanged.
        let pool_len = run.cards.len();
        let mut merged = run.cards.clone();
        merged.extend(relevant);
        let deduped = match dedup_cards(merged, embedder, params.dedup_threshold) {
            Ok(cards) => cards,
            Err(e) => {
                run.diagnostics
                    .push(format!("iteration {iteration} skipped at dedup: {e}"));
                continue;
            }
        };
        let fresh: Vec<InsightCard> = deduped.into_iter().skip(pool_len).collect();
        run.counts.after_dedup += fresh.len();

        let (kept, diagnostics) = triviality_filter(fresh, dataset);
        run.diagnostics.extend(diagnostics);
        run.counts.after_triviality += kept.len();
        run.cards.extend(kept);
    }

    run
}

/// An eligible (breakdown, measure) pair with its association strength.
#[derive(Debug, Clone)]
pub struct RankedPair {
    pub breakdown: String,
    pub measure: Measure,
    pub h_statistic: f64,
    pub p_value: f64,
}

/// Ranks every eligible (breakdown, measure) pair by Kruskal-Wallis
/// association strength: ascending p-value, descending H on ties.
///
/// Breakdowns are categorical/ordinal columns with 2 to 50 distinct
/// non-null values. Each numeric column yields a MEAN measure tested by
/// partitioning its values over the breakdown groups; a COUNT pair per
/// breakdown is appended with a sentinel p of 1 (no association evidence),
/// ranking after every tested pair.
pub fn onlystats_ranking(dataset: &Dataset) -> Vec<RankedPair> {
    let mut pairs: Vec<RankedPair> = Vec::new();
    let all_rows: Vec<usize> =
        apply_subspace(dataset, &Subspace::empty()).unwrap_or_default();

    for breakdown in dataset.columns() {
        if !matches!(
            breakdown.kind,
            ColumnKind::Categorical | ColumnKind::Ordinal
        ) {
            continue;
        }
        let mut partitions: alloc::collections::BTreeMap<&Cell, Vec<usize>> =
            alloc::collections::BTreeMap::new();
        for &row in &all_rows {
            let key = &breakdown.values[row];
            if !key.is_null() {
                partitions.entry(key).or_default().push(row);
            }
        }
        if !(2..=50).contains(&partitions.len()) {
            continue;
        }

        for column in dataset.columns() {
            if column.kind != ColumnKind::Numeric || column.name == breakdown.name {
                continue;
            }
            let groups: Vec<Vec<f64>> = partitions
                .values()
                .map(|rows| {
                    rows.iter()
                        .filter_map(|&r| column.values[r].as_number())
                        .collect::<Vec<f64>>()
                })
                .filter(|g| !g.is_empty())
                .collect();
            let total: usize = groups.iter().map(Vec::len).sum();
            if groups.len() < 2 || total < 3 {
                continue;
            }
            if let Ok(result) = kruskal_wallis(&groups) {
                pairs.push(RankedPair {
                    breakdown: breakdown.name.clone(),
                    measure: Measure::mean(&column.name),
                    h_statistic: result.h_statistic,
                    p_value: result.p_value,
                });
            }
        }

        pairs.push(RankedPair {
            breakdown: breakdown.name.clone(),
            measure: Measure::count(),
            h_statistic: 0.0,
            p_value: 1.0,
        });
    }

    pairs.sort_by(|a, b| {
        a.p_value
            .total_cmp(&b.p_value)
            .then_with(|| b.h_statistic.total_cmp(&a.h_statistic))
            .then_with(|| a.breakdown.cmp(&b.breakdown))
            .then_with(|| a.measure.cmp(&b.measure))
    });
    pairs
}

/// The statistical baseline: the top `k` ranked pairs as templated cards.
///
/// The `seed` parameter is accepted for interface stability but unused: the
/// ranking evaluates every eligible breakdown exhaustively, which is
/// deterministic and dominates sampling a single breakdown.
pub fn onlystats_cards(
    dataset: &Dataset,
    k: usize,
    _seed: u64,
) -> Result<Vec<InsightCard>, QugenError> {
    let ranking = onlystats_ranking(dataset);
    if ranking.is_empty() {
        return Err(QugenError::NoEligiblePairs);
    }
    Ok(ranking
        .into_iter()
        .take(k)
        .map(|pair| {
            let (question, reason) = match &pair.measure.column {
                Some(column) => (
                    format!("How does {column} vary across {}?", pair.breakdown),
                    format!(
                        "{} groups show a strong association with {column} \
                         (Kruskal-Wallis H = {:.4}, p = {:.6}).",
                        pair.breakdown, pair.h_statistic, pair.p_value
                    ),
                ),
                None => (
                    format!(
                        "How are the records distributed across {}?",
                        pair.breakdown
                    ),
                    format!(
                        "Row counts per {} group describe how the data is distributed.",
                        pair.breakdown
                    ),
                ),
            };
            InsightCard {
                question,
                reason,
                breakdown: pair.breakdown,
                measure: pair.measure,
                origin: CardOrigin::OnlyStats,
            }
        })
        .collect())
}
