//! Beam search over filter subspaces.
//!
//! Each search step expands a subspace by one `column = value` filter. The
//! filter column is sampled with extra probability mass on an LLM-suggested
//! candidate set; the value is sampled from a log-frequency distribution
//! over the values actually present after the parent's filters, so a new
//! filter never selects an empty subset. Candidates are scored by the
//! pattern's scoring function on the resulting view and the beam keeps the
//! top `beam_width` by score.
//!
//! Everything is driven by a seeded generator and deterministic tie-breaks;
//! identical inputs (dataset, parameters, seed, candidate set) produce
//! identical output on any platform.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::patterns::{
    applicable_patterns, score_distribution_difference, score_single_view, Pattern, ScoreContext,
    Thresholds,
};
use crate::rng::{sample_weighted, SeededRng};
use crate::table::{
    apply_subspace, compute_view, Cell, ColumnKind, Dataset, Perspective, Subspace, TableError,
    View,
};

/// Search parameters. Defaults: beam width 100, expansion factor 100,
/// depth 1, half the sampling mass on suggested columns.
#[derive(Debug, Clone)]
pub struct SearchParams {
    pub beam_width: usize,
    pub exp_factor: usize,
    pub max_depth: usize,
    pub w_llm: f64,
    pub seed: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            beam_width: 100,
            exp_factor: 100,
            max_depth: 1,
            w_llm: 0.5,
            seed: 0,
        }
    }
}

/// A subspace with its pattern score and the view it was scored on.
#[derive(Debug, Clone)]
pub struct ScoredSubspace {
    pub subspace: Subspace,
    pub score: f64,
    pub view: View,
}

/// Errors from subspace search.
#[derive(Debug, Clone, PartialEq)]
pub enum SearchError {
    /// No columns to weight.
    EmptyAvailable,
    /// Every cell of the sampled column is null.
    AllNull,
    /// The subspace cannot be expanded: no eligible filter column remains.
    NoAvailableColumns,
    /// Pattern not applicable to the perspective in a search context.
    InapplicablePattern(Pattern),
    Table(TableError),
}

impl fmt::Display for SearchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchError::EmptyAvailable => write!(f, "no columns available for weighting"),
            SearchError::AllNull => write!(f, "column has no non-null values"),
            SearchError::NoAvailableColumns => write!(f, "no filter columns available"),
            SearchError::InapplicablePattern(p) => {
                write!(f, "pattern {p} is not applicable to this perspective")
            }
            SearchError::Table(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SearchError {}

impl From<TableError> for SearchError {
    fn from(e: TableError) -> Self {
        SearchError::Table(e)
    }
}

/// Sampling distribution over `available` columns: mass `w_llm` split
/// evenly over the columns also in `llm_candidates`, the rest split over
/// the others. If either side is empty, all mass goes to the other side.
pub fn column_weights(
    available: &[String],
    llm_candidates: &BTreeSet<String>,
    w_llm: f64,
) -> Result<Vec<f64>, SearchError> {
    if available.is_empty() {
        return Err(SearchError::EmptyAvailable);
    }
    let w_llm = crate::stats::clamp01(w_llm);
    let in_candidates: Vec<bool> = available
        .iter()
        .map(|name| llm_candidates.contains(name))
        .collect();
    let candidate_count = in_candidates.iter().filter(|&&c| c).count();
    let rest_count = available.len() - candidate_count;

    if candidate_count == 0 || rest_count == 0 {
        let uniform = 1.0 / available.len() as f64;
        return Ok(alloc::vec![uniform; available.len()]);
    }
    let candidate_weight = w_llm / candidate_count as f64;
    let rest_weight = (1.0 - w_llm) / rest_count as f64;
    Ok(in_candidates
        .iter()
        .map(|&c| if c { candidate_weight } else { rest_weight })
        .collect())
}

/// Log-frequency sampling distribution over the distinct non-null values of
/// a column: P(y) = ln(1 + N(y)) / sum ln(1 + N(y)).
pub fn value_weights(cells: &[&Cell]) -> Result<Vec<(Cell, f64)>, SearchError> {
    let mut frequencies: BTreeMap<&Cell, usize> = BTreeMap::new();
    for cell in cells {
        if !cell.is_null() {
            *frequencies.entry(cell).or_insert(0) += 1;
        }
    }
    if frequencies.is_empty() {
        return Err(SearchError::AllNull);
    }
    let logs: Vec<(Cell, f64)> = frequencies
        .into_iter()
        .map(|(cell, n)| ((*cell).clone(), libm::log(1.0 + n as f64)))
        .collect();
    let total: f64 = logs.iter().map(|(_, w)| w).sum();
    Ok(logs
        .into_iter()
        .map(|(cell, w)| (cell, w / total))
        .collect())
}

/// Everything needed to expand one subspace repeatedly: the eligible filter
/// columns (with sampling weights) and each column's value distribution
/// restricted to the rows the parent subspace selects.
struct ExpandContext {
    columns: Vec<String>,
    column_probs: Vec<f64>,
    values_per_column: Vec<Vec<(Cell, f64)>>,
}

impl ExpandContext {
    /// Returns `None` when no eligible filter column remains.
    fn build(
        dataset: &Dataset,
        parent: &Subspace,
        perspective: &Perspective,
        llm_candidates: &BTreeSet<String>,
        w_llm: f64,
    ) -> Result<Option<ExpandContext>, SearchError> {
        let rows = apply_subspace(dataset, parent)?;
        let mut columns = Vec::new();
        let mut values_per_column = Vec::new();
        for column in dataset.columns() {
            let eligible = matches!(column.kind, ColumnKind::Categorical | ColumnKind::Ordinal)
                && column.name != perspective.breakdown
                && perspective.measure.column.as_deref() != Some(column.name.as_str())
                && !parent.uses_column(&column.name);
            if !eligible {
                continue;
            }
            let cells: Vec<&Cell> = rows.iter().map(|&r| &column.values[r]).collect();
            match value_weights(&cells) {
                Ok(weights) => {
                    columns.push(column.name.clone());
                    values_per_column.push(weights);
                }
                Err(SearchError::AllNull) => continue,
                Err(e) => return Err(e),
            }
        }
        if columns.is_empty() {
            return Ok(None);
        }
        let column_probs = column_weights(&columns, llm_candidates, w_llm)?;
        Ok(Some(ExpandContext {
            columns,
            column_probs,
            values_per_column,
        }))
    }

    fn sample(&self, parent: &Subspace, rng: &mut SeededRng) -> Subspace {
        let col_idx = sample_weighted(rng, &self.column_probs);
        let values = &self.values_per_column[col_idx];
        let probs: Vec<f64> = values.iter().map(|(_, p)| *p).collect();
        let val_idx = sample_weighted(rng, &probs);
        parent.with(&self.columns[col_idx], values[val_idx].0.clone())
    }

    /// Total number of distinct (column, value) filters this context can
    /// produce.
    fn candidate_count(&self) -> usize {
        self.values_per_column.iter().map(Vec::len).sum()
    }

    /// All distinct children in deterministic order.
    fn enumerate<'a>(
        &'a self,
        parent: &'a Subspace,
    ) -> impl Iterator<Item = Subspace> + 'a {
        self.columns.iter().zip(&self.values_per_column).flat_map(
            move |(column, values)| {
                values
                    .iter()
                    .map(move |(value, _)| parent.with(column, value.clone()))
            },
        )
    }
}

/// Expands `parent` with one sampled filter, advancing `rng`.
///
/// The filter column is drawn via [`column_weights`] over the eligible
/// columns (categorical/ordinal, not the breakdown or measure column, not
/// already filtered, non-null within the parent's rows); the value is drawn
/// via [`value_weights`] over the parent-filtered column.
pub fn expand(
    parent: &Subspace,
    dataset: &Dataset,
    perspective: &Perspective,
    llm_candidates: &BTreeSet<String>,
    params: &SearchParams,
    rng: &mut SeededRng,
) -> Result<Subspace, SearchError> {
    let context = ExpandContext::build(dataset, parent, perspective, llm_candidates, params.w_llm)?
        .ok_or(SearchError::NoAvailableColumns)?;
    Ok(context.sample(parent, rng))
}

struct BeamEntry {
    subspace: Subspace,
    score: f64,
    view: View,
}

/// Scores a candidate view under the search pattern; any scoring failure
/// (too few groups, negative values, and so on) yields negative infinity so
/// the candidate simply falls out of the beam.
fn candidate_score(
    pattern: Pattern,
    view: &View,
    parent_view: &View,
    thresholds: &Thresholds,
) -> f64 {
    let result = match pattern {
        Pattern::DistributionDifference => {
            score_distribution_difference(parent_view, view, thresholds)
        }
        other => score_single_view(other, view, thresholds),
    };
    match result {
        Ok(score) if score.raw.is_finite() => score.raw,
        _ => f64::NEG_INFINITY,
    }
}

/// Beam search for high-scoring subspaces under one pattern.
///
/// The beam starts with `initial` and runs `max_depth` rounds; each round
/// expands every beam member `exp_factor` times, scores the children, drops
/// failures, collapses duplicate subspaces (keeping the best score), and
/// truncates to the top `beam_width` by (score, canonical key). When
/// `exp_factor` covers every distinct child of a member, expansion
/// enumerates them instead of sampling, so a large enough `exp_factor` is
/// exhaustive. For the distribution-difference pattern each child is scored
/// against its parent's view.
///
/// Returns the final beam, best first. The initial subspace is always
/// retained (it may carry a score of negative infinity if unscorable).
pub fn beam_search(
    dataset: &Dataset,
    initial: &Subspace,
    perspective: &Perspective,
    pattern: Pattern,
    llm_candidates: &BTreeSet<String>,
    params: &SearchParams,
    thresholds: &Thresholds,
) -> Result<Vec<ScoredSubspace>, SearchError> {
    let breakdown_kind = dataset
        .column(&perspective.breakdown)
        .ok_or_else(|| TableError::UnknownColumn(perspective.breakdown.clone()))?
        .kind;
    if !applicable_patterns(breakdown_kind, &perspective.measure, ScoreContext::SubspaceSearch)
        .contains(&pattern)
    {
        return Err(SearchError::InapplicablePattern(pattern));
    }

    let initial_view = compute_view(
        dataset,
        initial,
        &perspective.breakdown,
        &perspective.measure,
    )?;
    let initial_score = candidate_score(pattern, &initial_view, &initial_view, thresholds);
    let initial_key = initial.canonical_key();

    let mut rng = SeededRng::new(params.seed);
    let mut beam = alloc::vec![BeamEntry {
        subspace: initial.clone(),
        score: initial_score,
        view: initial_view,
    }];

    for _depth in 0..params.max_depth {
        // Carry the current beam forward; children compete with parents.
        let mut round: BTreeMap<String, BeamEntry> = BTreeMap::new();
        for entry in &beam {
            round.insert(
                entry.subspace.canonical_key(),
                BeamEntry {
                    subspace: entry.subspace.clone(),
                    score: entry.score,
                    view: entry.view.clone(),
                },
            );
        }

        for member in &beam {
            let context = match ExpandContext::build(
                dataset,
                &member.subspace,
                perspective,
                llm_candidates,
                params.w_llm,
            )? {
                Some(context) => context,
                None => continue,
            };

            let mut children: Vec<Subspace> = Vec::new();
            if params.exp_factor >= context.candidate_count() {
                children.extend(context.enumerate(&member.subspace));
            } else {
                for _ in 0..params.exp_factor {
                    children.push(context.sample(&member.subspace, &mut rng));
                }
            }

            for child in children {
                let key = child.canonical_key();
                if let Some(existing) = round.get(&key) {
                    // Re-score only if this path could improve the entry:
                    // identical subspaces share a view, so for single-view
                    // patterns the score is identical too. Distribution
                    // difference depends on the parent, so compare.
                    if pattern != Pattern::DistributionDifference {
                        continue;
                    }
                    let view = match compute_view(
                        dataset,
                        &child,
                        &perspective.breakdown,
                        &perspective.measure,
                    ) {
                        Ok(view) => view,
                        Err(_) => continue,
                    };
                    let score = candidate_score(pattern, &view, &member.view, thresholds);
                    if score > existing.score {
                        round.insert(key, BeamEntry { subspace: child, score, view });
                    }
                    continue;
                }
                let view = match compute_view(
                    dataset,
                    &child,
                    &perspective.breakdown,
                    &perspective.measure,
                ) {
                    Ok(view) => view,
                    Err(_) => continue,
                };
                let score = candidate_score(pattern, &view, &member.view, thresholds);
                if score == f64::NEG_INFINITY {
                    continue;
                }
                round.insert(key, BeamEntry { subspace: child, score, view });
            }
        }

        let mut entries: Vec<BeamEntry> = round.into_values().collect();
        entries.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.subspace.canonical_key().cmp(&b.subspace.canonical_key()))
        });
        // The initial subspace survives truncation even when unscorable.
        let mut kept: Vec<BeamEntry> = Vec::with_capacity(params.beam_width.max(1));
        let mut initial_kept = false;
        for entry in entries {
            let is_initial = entry.subspace.canonical_key() == initial_key;
            if kept.len() < params.beam_width.max(1) {
                initial_kept |= is_initial;
                kept.push(entry);
            } else if is_initial && !initial_kept {
                initial_kept = true;
                *kept.last_mut().expect("beam nonempty") = entry;
            }
        }
        beam = kept;
    }

    Ok(beam
        .into_iter()
        .map(|entry| ScoredSubspace {
            subspace: entry.subspace,
            score: entry.score,
            view: entry.view,
        })
        .collect())
}
