//! The four insight patterns, their applicability rules, scoring functions,
//! thresholds, and score normalization.
//!
//! A pattern is "observed" in a view when its raw score strictly exceeds the
//! pattern's threshold. Raw scores are also mapped into [0, 1] so scores can
//! be averaged across patterns.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::stats::{self, StatError, TrendDirection};
use crate::table::{Agg, Cell, ColumnKind, Measure, View};

/// The closed set of insight patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pattern {
    Trend,
    OutstandingValue,
    Attribution,
    DistributionDifference,
}

impl Pattern {
    pub const ALL: [Pattern; 4] = [
        Pattern::Trend,
        Pattern::OutstandingValue,
        Pattern::Attribution,
        Pattern::DistributionDifference,
    ];

    /// Stable snake_case name used in reports and chart file names.
    pub fn label(self) -> &'static str {
        match self {
            Pattern::Trend => "trend",
            Pattern::OutstandingValue => "outstanding_value",
            Pattern::Attribution => "attribution",
            Pattern::DistributionDifference => "distribution_difference",
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Pass thresholds per pattern; a score must strictly exceed its threshold.
#[derive(Debug, Clone)]
pub struct Thresholds {
    pub trend: f64,
    pub outstanding_value: f64,
    pub attribution: f64,
    pub distribution_difference: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            trend: 0.95,
            outstanding_value: 1.4,
            attribution: 0.5,
            distribution_difference: 0.2,
        }
    }
}

impl Thresholds {
    pub fn for_pattern(&self, pattern: Pattern) -> f64 {
        match pattern {
            Pattern::Trend => self.trend,
            Pattern::OutstandingValue => self.outstanding_value,
            Pattern::Attribution => self.attribution,
            Pattern::DistributionDifference => self.distribution_difference,
        }
    }
}

/// Where a score is being evaluated; distribution difference only applies
/// during subspace search, where there is an initial view to compare to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreContext {
    BasicInsight,
    SubspaceSearch,
}

/// Pattern-specific payload attached to a score.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoreDetail {
    Trend {
        direction: TrendDirection,
    },
    OutstandingValue {
        top: Cell,
        /// The standout value is negative (largest by magnitude).
        negative: bool,
        ratio: f64,
    },
    Attribution {
        top: Cell,
        /// Fraction of the total carried by the top group.
        share: f64,
    },
    DistributionDifference,
}

/// A scored pattern evaluation over a view.
#[derive(Debug, Clone)]
pub struct PatternScore {
    pub pattern: Pattern,
    pub raw: f64,
    pub normalized: f64,
    pub passes: bool,
    pub detail: ScoreDetail,
}

/// Errors from pattern scoring.
#[derive(Debug, Clone, PartialEq)]
pub enum PatternError {
    /// View has fewer groups than the pattern needs.
    TooFewGroups { needed: usize, got: usize },
    /// Trend requested on an unordered breakdown.
    NotOrderable,
    /// Every group value is zero.
    AllZero,
    /// Attribution over a view containing negative values.
    NegativeValues,
    /// Attribution over values summing to zero.
    ZeroSum,
    /// Distribution difference on a non-COUNT measure.
    NotCount,
    /// Distribution difference on a view with zero total.
    ZeroTotal,
    /// Raw score outside the pattern's normalization domain.
    Domain,
    Stat(StatError),
}

impl fmt::Display for PatternError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternError::TooFewGroups { needed, got } => {
                write!(f, "too few groups: need {needed}, got {got}")
            }
            PatternError::NotOrderable => write!(f, "breakdown is not orderable"),
            PatternError::AllZero => write!(f, "all group values are zero"),
            PatternError::NegativeValues => write!(f, "negative group values"),
            PatternError::ZeroSum => write!(f, "group values sum to zero"),
            PatternError::NotCount => write!(f, "measure is not COUNT"),
            PatternError::ZeroTotal => write!(f, "view total is zero"),
            PatternError::Domain => write!(f, "raw score outside normalization domain"),
            PatternError::Stat(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for PatternError {}

impl From<StatError> for PatternError {
    fn from(e: StatError) -> Self {
        PatternError::Stat(e)
    }
}

/// Cap for the outstanding-value ratio when the second value is zero,
/// keeping the ranking totally ordered.
pub const OUTSTANDING_VALUE_CAP: f64 = 1e9;

/// Order-independent sum: permuting the groups of a view must not move a
/// score across a threshold, so totals are summed in a canonical order.
fn stable_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sorted: Vec<f64> = values.collect();
    sorted.sort_unstable_by(|a, b| a.total_cmp(b));
    sorted.into_iter().sum()
}

/// Minimum group counts for meaningful scores.
pub const TREND_MIN_GROUPS: usize = 5;
pub const RATIO_MIN_GROUPS: usize = 2;

/// Which patterns can apply to a perspective.
///
/// Trend needs an orderable breakdown; distribution difference needs a COUNT
/// measure and a subspace-search context (there is no initial view to
/// compare against on the full dataset). Outstanding value and attribution
/// are always candidates; attribution's nonnegativity is checked at scoring
/// time.
pub fn applicable_patterns(
    breakdown_kind: ColumnKind,
    measure: &Measure,
    context: ScoreContext,
) -> Vec<Pattern> {
    Pattern::ALL
        .iter()
        .copied()
        .filter(|pattern| match pattern {
            Pattern::Trend => breakdown_kind.is_orderable(),
            Pattern::OutstandingValue | Pattern::Attribution => true,
            Pattern::DistributionDifference => {
                measure.agg == Agg::Count && context == ScoreContext::SubspaceSearch
            }
        })
        .collect()
}

/// Trend score: 1 minus the Mann-Kendall p-value of the group values in
/// breakdown order. Needs at least five groups on an orderable breakdown.
pub fn score_trend(view: &View, thresholds: &Thresholds) -> Result<PatternScore, PatternError> {
    if !view.breakdown_kind.is_orderable() {
        return Err(PatternError::NotOrderable);
    }
    if view.group_count() < TREND_MIN_GROUPS {
        return Err(PatternError::TooFewGroups {
            needed: TREND_MIN_GROUPS,
            got: view.group_count(),
        });
    }
    // Order by breakdown key, not by the incoming group order, so the score
    // is a function of the view's content alone.
    let mut ordered: Vec<(&Cell, f64)> = view.groups.iter().map(|(k, v)| (k, *v)).collect();
    ordered.sort_by(|a, b| a.0.cmp(b.0));
    let values: Vec<f64> = ordered.into_iter().map(|(_, v)| v).collect();
    let result = stats::mann_kendall(&values)?;
    let raw = stats::clamp01(1.0 - result.p_value);
    Ok(PatternScore {
        pattern: Pattern::Trend,
        raw,
        normalized: raw,
        passes: raw > thresholds.trend,
        detail: ScoreDetail::Trend {
            direction: result.direction,
        },
    })
}

/// Outstanding-value score: ratio of the largest to the second-largest
/// absolute group value.
pub fn score_outstanding_value(
    view: &View,
    thresholds: &Thresholds,
) -> Result<PatternScore, PatternError> {
    if view.group_count() < RATIO_MIN_GROUPS {
        return Err(PatternError::TooFewGroups {
            needed: RATIO_MIN_GROUPS,
            got: view.group_count(),
        });
    }
    if view.groups.iter().all(|(_, v)| *v == 0.0) {
        return Err(PatternError::AllZero);
    }

    // Two largest absolute values, keeping the first-seen group on ties.
    let mut top: Option<(&Cell, f64, f64)> = None; // (key, signed, |value|)
    let mut second_abs = 0.0f64;
    for (key, value) in &view.groups {
        let mag = libm::fabs(*value);
        match top {
            Some((_, _, best)) if mag <= best => {
                if mag > second_abs {
                    second_abs = mag;
                }
            }
            Some((_, _, best)) => {
                second_abs = best;
                top = Some((key, *value, mag));
            }
            None => top = Some((key, *value, mag)),
        }
    }
    let (top_key, signed, largest) = top.expect("nonempty view");

    let raw = if second_abs == 0.0 {
        OUTSTANDING_VALUE_CAP
    } else {
        largest / second_abs
    };
    let normalized = stats::clamp01(1.0 - second_abs / largest);
    Ok(PatternScore {
        pattern: Pattern::OutstandingValue,
        raw,
        normalized,
        passes: raw > thresholds.outstanding_value,
        detail: ScoreDetail::OutstandingValue {
            top: top_key.clone(),
            negative: signed < 0.0,
            ratio: raw,
        },
    })
}

/// Attribution score: share of the total carried by the largest value.
/// Defined only for nonnegative values with a positive sum.
pub fn score_attribution(
    view: &View,
    thresholds: &Thresholds,
) -> Result<PatternScore, PatternError> {
    if view.group_count() < RATIO_MIN_GROUPS {
        return Err(PatternError::TooFewGroups {
            needed: RATIO_MIN_GROUPS,
            got: view.group_count(),
        });
    }
    if view.groups.iter().any(|(_, v)| *v < 0.0) {
        return Err(PatternError::NegativeValues);
    }
    let total = stable_sum(view.groups.iter().map(|(_, v)| *v));
    if total <= 0.0 {
        return Err(PatternError::ZeroSum);
    }
    let (top_key, top_value) = view
        .groups
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
        .expect("nonempty view");
    let raw = top_value / total;
    Ok(PatternScore {
        pattern: Pattern::Attribution,
        raw,
        normalized: stats::clamp01(raw),
        passes: raw > thresholds.attribution,
        detail: ScoreDetail::Attribution {
            top: top_key.clone(),
            share: raw,
        },
    })
}

/// Distribution-difference score: Jensen-Shannon divergence between two
/// COUNT views normalized to probability vectors over the union of their
/// group keys (missing keys count as zero).
pub fn score_distribution_difference(
    initial: &View,
    final_view: &View,
    thresholds: &Thresholds,
) -> Result<PatternScore, PatternError> {
    if initial.measure.agg != Agg::Count || final_view.measure.agg != Agg::Count {
        return Err(PatternError::NotCount);
    }
    let initial_total = stable_sum(initial.groups.iter().map(|(_, v)| *v));
    let final_total = stable_sum(final_view.groups.iter().map(|(_, v)| *v));
    if initial_total <= 0.0 || final_total <= 0.0 {
        return Err(PatternError::ZeroTotal);
    }

    let keys: BTreeSet<&Cell> = initial
        .groups
        .iter()
        .chain(final_view.groups.iter())
        .map(|(k, _)| k)
        .collect();
    let lookup = |view: &View, key: &Cell| -> f64 {
        view.groups
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .unwrap_or(0.0)
    };
    let p: Vec<f64> = keys
        .iter()
        .map(|k| lookup(initial, k) / initial_total)
        .collect();
    let q: Vec<f64> = keys
        .iter()
        .map(|k| lookup(final_view, k) / final_total)
        .collect();

    let raw = stats::jensen_shannon_divergence(&p, &q)?;
    Ok(PatternScore {
        pattern: Pattern::DistributionDifference,
        raw,
        normalized: raw,
        passes: raw > thresholds.distribution_difference,
        detail: ScoreDetail::DistributionDifference,
    })
}

/// Maps a raw score into [0, 1]: identity for the patterns already bounded,
/// `1 - 1/raw` for the outstanding-value ratio.
pub fn normalize_score(pattern: Pattern, raw: f64) -> Result<f64, PatternError> {
    if !raw.is_finite() {
        return Err(PatternError::Domain);
    }
    match pattern {
        Pattern::Trend | Pattern::Attribution | Pattern::DistributionDifference => {
            if !(0.0..=1.0).contains(&raw) {
                return Err(PatternError::Domain);
            }
            Ok(raw)
        }
        Pattern::OutstandingValue => {
            if raw < 1.0 {
                return Err(PatternError::Domain);
            }
            Ok(1.0 - 1.0 / raw)
        }
    }
}

/// Scores `view` under one of the single-view patterns. Distribution
/// difference compares two views; use [`score_distribution_difference`].
pub fn score_single_view(
    pattern: Pattern,
    view: &View,
    thresholds: &Thresholds,
) -> Result<PatternScore, PatternError> {
    match pattern {
        Pattern::Trend => score_trend(view, thresholds),
        Pattern::OutstandingValue => score_outstanding_value(view, thresholds),
        Pattern::Attribution => score_attribution(view, thresholds),
        Pattern::DistributionDifference => Err(PatternError::NotCount),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::format_number;
    use alloc::string::String;
    use alloc::vec;

    fn view_of(values: &[(&str, f64)], kind: ColumnKind, measure: Measure) -> View {
        View {
            breakdown: String::from("b"),
            breakdown_kind: kind,
            measure,
            groups: values.iter().map(|(k, v)| (Cell::parse(k), *v)).collect(),
        }
    }

    fn thresholds() -> Thresholds {
        Thresholds::default()
    }

    #[test]
    fn applicability_rules() {
        let mean = Measure::mean("x");
        let count = Measure::count();
        let sum = Measure::sum("x");

        assert_eq!(
            applicable_patterns(ColumnKind::Temporal, &mean, ScoreContext::BasicInsight),
            vec![Pattern::Trend, Pattern::OutstandingValue, Pattern::Attribution]
        );
        assert_eq!(
            applicable_patterns(ColumnKind::Categorical, &count, ScoreContext::SubspaceSearch),
            vec![
                Pattern::OutstandingValue,
                Pattern::Attribution,
                Pattern::DistributionDifference
            ]
        );
        assert_eq!(
            applicable_patterns(ColumnKind::Categorical, &sum, ScoreContext::BasicInsight),
            vec![Pattern::OutstandingValue, Pattern::Attribution]
        );
        // COUNT outside subspace search still excludes DD.
        assert_eq!(
            applicable_patterns(ColumnKind::Categorical, &count, ScoreContext::BasicInsight),
            vec![Pattern::OutstandingValue, Pattern::Attribution]
        );
    }

    #[test]
    fn trend_scoring() {
        let increasing: Vec<(String, f64)> = (1..=10)
            .map(|i| (format_number(f64::from(i)), f64::from(i)))
            .collect();
        let pairs: Vec<(&str, f64)> = increasing
            .iter()
            .map(|(k, v)| (k.as_str(), *v))
            .collect();
        let view = view_of(&pairs, ColumnKind::Ordinal, Measure::mean("x"));
        let score = score_trend(&view, &thresholds()).unwrap();
        assert!((score.raw - 0.999917).abs() < 1e-5, "raw = {}", score.raw);
        assert!(score.passes);
        assert_eq!(
            score.detail,
            ScoreDetail::Trend {
                direction: TrendDirection::Increasing
            }
        );

        let constant = view_of(
            &[("1", 3.0), ("2", 3.0), ("3", 3.0), ("4", 3.0), ("5", 3.0)],
            ColumnKind::Ordinal,
            Measure::mean("x"),
        );
        let score = score_trend(&constant, &thresholds()).unwrap();
        assert_eq!(score.raw, 0.0);
        assert!(!score.passes);

        let four = view_of(
            &[("1", 1.0), ("2", 2.0), ("3", 3.0), ("4", 4.0)],
            ColumnKind::Ordinal,
            Measure::mean("x"),
        );
        assert_eq!(
            score_trend(&four, &thresholds()).unwrap_err(),
            PatternError::TooFewGroups { needed: 5, got: 4 }
        );

        let unordered = view_of(
            &[("a", 1.0), ("b", 2.0), ("c", 3.0), ("d", 4.0), ("e", 5.0)],
            ColumnKind::Categorical,
            Measure::mean("x"),
        );
        assert_eq!(
            score_trend(&unordered, &thresholds()).unwrap_err(),
            PatternError::NotOrderable
        );
    }

    #[test]
    fn outstanding_value_scoring() {
        let v = view_of(
            &[("A", 10.0), ("B", 5.0), ("C", 2.0)],
            ColumnKind::Categorical,
            Measure::sum("x"),
        );
        let s = score_outstanding_value(&v, &thresholds()).unwrap();
        assert_eq!(s.raw, 2.0);
        assert!(s.passes);
        assert!((s.normalized - 0.5).abs() < 1e-12);
        assert_eq!(
            s.detail,
            ScoreDetail::OutstandingValue {
                top: Cell::parse("A"),
                negative: false,
                ratio: 2.0
            }
        );

        let tie = view_of(
            &[("A", 3.0), ("B", 3.0), ("C", 3.0)],
            ColumnKind::Categorical,
            Measure::sum("x"),
        );
        let s = score_outstanding_value(&tie, &thresholds()).unwrap();
        assert_eq!(s.raw, 1.0);
        assert!(!s.passes);

        let negative = view_of(
            &[("A", -10.0), ("B", 4.0), ("C", 3.0)],
            ColumnKind::Categorical,
            Measure::sum("x"),
        );
        let s = score_outstanding_value(&negative, &thresholds()).unwrap();
        assert_eq!(s.raw, 2.5);
        assert!(matches!(
            s.detail,
            ScoreDetail::OutstandingValue { negative: true, .. }
        ));

        let zeroes = view_of(
            &[("A", 0.0), ("B", 0.0)],
            ColumnKind::Categorical,
            Measure::sum("x"),
        );
        assert_eq!(
            score_outstanding_value(&zeroes, &thresholds()).unwrap_err(),
            PatternError::AllZero
        );

        let lone_nonzero = view_of(
            &[("A", 7.0), ("B", 0.0)],
            ColumnKind::Categorical,
            Measure::sum("x"),
        );
        let s = score_outstanding_value(&lone_nonzero, &thresholds()).unwrap();
        assert_eq!(s.raw, OUTSTANDING_VALUE_CAP);
        assert_eq!(s.normalized, 1.0);
    }

    #[test]
    fn attribution_scoring() {
        let v = view_of(
            &[("A", 6.0), ("B", 2.0), ("C", 2.0)],
            ColumnKind::Categorical,
            Measure::sum("x"),
        );
        let s = score_attribution(&v, &thresholds()).unwrap();
        assert_eq!(s.raw, 0.6);
        assert!(s.passes);

        let uniform = view_of(
            &[("A", 1.0), ("B", 1.0), ("C", 1.0), ("D", 1.0)],
            ColumnKind::Categorical,
            Measure::sum("x"),
        );
        let s = score_attribution(&uniform, &thresholds()).unwrap();
        assert_eq!(s.raw, 0.25);
        assert!(!s.passes);

        // Exactly the threshold fails: the comparison is strict.
        let half = view_of(
            &[("A", 5.0), ("B", 5.0)],
            ColumnKind::Categorical,
            Measure::sum("x"),
        );
        let s = score_attribution(&half, &thresholds()).unwrap();
        assert_eq!(s.raw, 0.5);
        assert!(!s.passes);

        let negatives = view_of(
            &[("A", 5.0), ("B", -1.0)],
            ColumnKind::Categorical,
            Measure::sum("x"),
        );
        assert_eq!(
            score_attribution(&negatives, &thresholds()).unwrap_err(),
            PatternError::NegativeValues
        );
        let zeroes = view_of(
            &[("A", 0.0), ("B", 0.0)],
            ColumnKind::Categorical,
            Measure::sum("x"),
        );
        assert_eq!(
            score_attribution(&zeroes, &thresholds()).unwrap_err(),
            PatternError::ZeroSum
        );
    }

    #[test]
    fn distribution_difference_scoring() {
        let initial = view_of(
            &[("A", 3.0), ("B", 1.0)],
            ColumnKind::Categorical,
            Measure::count(),
        );
        let shifted = view_of(
            &[("A", 1.0), ("B", 3.0)],
            ColumnKind::Categorical,
            Measure::count(),
        );
        let s = score_distribution_difference(&initial, &shifted, &thresholds()).unwrap();
        assert!((s.raw - 0.18872).abs() < 1e-4);
        assert!(!s.passes); // below 0.2

        let same = score_distribution_difference(&initial, &initial, &thresholds()).unwrap();
        assert_eq!(same.raw, 0.0);

        let left = view_of(&[("A", 4.0)], ColumnKind::Categorical, Measure::count());
        let right = view_of(&[("B", 4.0)], ColumnKind::Categorical, Measure::count());
        let s = score_distribution_difference(&left, &right, &thresholds()).unwrap();
        assert!((s.raw - 1.0).abs() < 1e-12);
        assert!(s.passes);

        let not_count = view_of(&[("A", 1.0)], ColumnKind::Categorical, Measure::sum("x"));
        assert_eq!(
            score_distribution_difference(&not_count, &left, &thresholds()).unwrap_err(),
            PatternError::NotCount
        );
        let empty = view_of(&[], ColumnKind::Categorical, Measure::count());
        assert_eq!(
            score_distribution_difference(&left, &empty, &thresholds()).unwrap_err(),
            PatternError::ZeroTotal
        );
    }

    #[test]
    fn dd_is_symmetric() {
        let a = view_of(
            &[("A", 5.0), ("B", 2.0), ("C", 1.0)],
            ColumnKind::Categorical,
            Measure::count(),
        );
        let b = view_of(
            &[("B", 4.0), ("C", 4.0)],
            ColumnKind::Categorical,
            Measure::count(),
        );
        let ab = score_distribution_difference(&a, &b, &thresholds()).unwrap();
        let ba = score_distribution_difference(&b, &a, &thresholds()).unwrap();
        assert!((ab.raw - ba.raw).abs() < 1e-15);
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_score(Pattern::Trend, 0.97).unwrap(), 0.97);
        assert_eq!(normalize_score(Pattern::OutstandingValue, 1.0).unwrap(), 0.0);
        assert_eq!(normalize_score(Pattern::OutstandingValue, 2.0).unwrap(), 0.5);
        assert_eq!(
            normalize_score(Pattern::Trend, 1.5).unwrap_err(),
            PatternError::Domain
        );
        assert_eq!(
            normalize_score(Pattern::OutstandingValue, 0.5).unwrap_err(),
            PatternError::Domain
        );
        assert_eq!(
            normalize_score(Pattern::OutstandingValue, f64::INFINITY).unwrap_err(),
            PatternError::Domain
        );
    }

    #[test]
    fn scaling_invariance_of_ratio_scores() {
        let base = [("A", 8.0), ("B", 3.0), ("C", 1.0)];
        let scaled: Vec<(&str, f64)> = base.iter().map(|(k, v)| (*k, v * 37.5)).collect();
        let v1 = view_of(&base, ColumnKind::Categorical, Measure::sum("x"));
        let v2 = view_of(&scaled, ColumnKind::Categorical, Measure::sum("x"));
        let t = thresholds();
        assert_eq!(
            score_outstanding_value(&v1, &t).unwrap().raw,
            score_outstanding_value(&v2, &t).unwrap().raw
        );
        assert!(
            (score_attribution(&v1, &t).unwrap().raw - score_attribution(&v2, &t).unwrap().raw)
                .abs()
                < 1e-15
        );
    }
}
