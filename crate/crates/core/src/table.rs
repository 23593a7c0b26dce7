//! Columnar table model: datasets, typed columns, measures, filter
//! subspaces, and group-by view computation.
//!
//! A [`Dataset`] is immutable once built, so every operation here is a pure
//! read and the whole structure can be shared freely across threads.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::cmp::Ordering;
use core::fmt;

/// One value of a column: missing, a finite number, or text.
#[derive(Debug, Clone)]
pub enum Cell {
    Null,
    Number(f64),
    Text(String),
}

impl Cell {
    /// Parses a raw field: empty trims to null, finite numbers parse as
    /// numbers, everything else stays text.
    pub fn parse(raw: &str) -> Cell {
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            return Cell::Null;
        }
        match trimmed.parse::<f64>() {
            Ok(v) if v.is_finite() => Cell::Number(v),
            _ => Cell::Text(trimmed.to_owned()),
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Cell::Null)
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Cell::Number(v) => Some(*v),
            _ => None,
        }
    }

    /// Canonical text form used in subspace keys and narratives.
    pub fn display(&self) -> String {
        match self {
            Cell::Null => "null".to_owned(),
            Cell::Number(v) => format_number(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Cell::Null => 0,
            Cell::Number(_) => 1,
            Cell::Text(_) => 2,
        }
    }
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    /// Total order: null < numbers (by value) < text (lexicographic).
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cell::Number(a), Cell::Number(b)) => a.total_cmp(b),
            (Cell::Text(a), Cell::Text(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display())
    }
}

/// Formats a float without a trailing `.0` for integral values.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

/// Inferred role of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Ordinal,
    Temporal,
}

impl ColumnKind {
    /// Kinds whose values carry a meaningful order for trend analysis.
    pub fn is_orderable(self) -> bool {
        matches!(
            self,
            ColumnKind::Ordinal | ColumnKind::Numeric | ColumnKind::Temporal
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
            ColumnKind::Ordinal => "ordinal",
            ColumnKind::Temporal => "temporal",
        }
    }
}

/// A named, typed column of cells.
#[derive(Debug, Clone)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub values: Vec<Cell>,
    pub description: Option<String>,
}

/// Knobs for column-kind inference.
#[derive(Debug, Clone)]
pub struct InferenceOptions {
    /// Integer-valued columns with at most this many distinct values are
    /// treated as ordinal.
    pub ordinal_max_distinct: usize,
    /// Lowercase name tokens that mark a column as temporal.
    pub temporal_hints: Vec<String>,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        InferenceOptions {
            ordinal_max_distinct: 10,
            temporal_hints: vec!["year".to_owned(), "date".to_owned(), "month".to_owned()],
        }
    }
}

/// Infers a column's kind from its cells and name.
///
/// Priority: temporal (name token matches a hint, or every non-null value is
/// an ISO date), then ordinal (all integers, few distinct), then numeric
/// (all numbers), else categorical. A column with no non-null values is
/// categorical.
pub fn infer_column_kind(values: &[Cell], name: &str, options: &InferenceOptions) -> ColumnKind {
    let non_null: Vec<&Cell> = values.iter().filter(|c| !c.is_null()).collect();
    if non_null.is_empty() {
        return ColumnKind::Categorical;
    }

    let name_tokens = tokenize_name(name);
    if options
        .temporal_hints
        .iter()
        .any(|hint| name_tokens.iter().any(|t| t == hint))
    {
        return ColumnKind::Temporal;
    }
    if non_null.iter().all(|c| match c {
        Cell::Text(s) => is_iso_date(s),
        _ => false,
    }) {
        return ColumnKind::Temporal;
    }

    if non_null.iter().all(|c| matches!(c, Cell::Number(_))) {
        let all_integers = non_null
            .iter()
            .all(|c| matches!(c, Cell::Number(v) if libm::floor(*v) == *v));
        if all_integers {
            let distinct: BTreeSet<u64> = non_null
                .iter()
                .filter_map(|c| c.as_number())
                .map(f64::to_bits)
                .collect();
            if distinct.len() <= options.ordinal_max_distinct {
                return ColumnKind::Ordinal;
            }
        }
        return ColumnKind::Numeric;
    }

    ColumnKind::Categorical
}

/// Splits a column name into lowercase tokens at case changes and
/// non-alphanumeric separators ("OrderDate" -> ["order", "date"]).
fn tokenize_name(name: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut prev_lower = false;
    for ch in name.chars() {
        if ch.is_alphanumeric() {
            if ch.is_uppercase() && prev_lower && !current.is_empty() {
                tokens.push(current.clone());
                current.clear();
            }
            for low in ch.to_lowercase() {
                current.push(low);
            }
            prev_lower = ch.is_lowercase();
        } else {
            if !current.is_empty() {
                tokens.push(current.clone());
                current.clear();
            }
            prev_lower = false;
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Accepts YYYY-MM-DD and YYYY-MM with in-range month/day fields.
fn is_iso_date(s: &str) -> bool {
    let parts: Vec<&str> = s.split('-').collect();
    if parts.len() != 2 && parts.len() != 3 {
        return false;
    }
    if parts[0].len() != 4 || parts[0].parse::<u32>().is_err() {
        return false;
    }
    let month_ok = parts[1].len() == 2
        && matches!(parts[1].parse::<u32>(), Ok(m) if (1..=12).contains(&m));
    if !month_ok {
        return false;
    }
    if parts.len() == 3 {
        return parts[2].len() == 2
            && matches!(parts[2].parse::<u32>(), Ok(d) if (1..=31).contains(&d));
    }
    true
}

/// Errors from table construction and view computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableError {
    UnknownColumn(String),
    /// Aggregation other than COUNT over a non-numeric column.
    IncompatibleMeasure(String),
    /// Breakdown and measure refer to the same column.
    MeasureIsBreakdown(String),
    DuplicateColumn(String),
    EmptyHeader,
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for TableError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableError::UnknownColumn(name) => write!(f, "unknown column: {name}"),
            TableError::IncompatibleMeasure(name) => {
                write!(f, "column {name} is not numeric and cannot be aggregated")
            }
            TableError::MeasureIsBreakdown(name) => {
                write!(f, "breakdown and measure both use column {name}")
            }
            TableError::DuplicateColumn(name) => write!(f, "duplicate column: {name}"),
            TableError::EmptyHeader => write!(f, "header row has no columns"),
            TableError::RaggedRow {
                row,
                expected,
                found,
            } => write!(f, "row {row} has {found} fields, expected {expected}"),
        }
    }
}

impl core::error::Error for TableError {}

/// An immutable columnar dataset.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub description: Option<String>,
    columns: Vec<Column>,
    row_count: usize,
}

impl Dataset {
    /// Builds a dataset from a header and string rows, inferring column
    /// kinds. Rows must all match the header width.
    pub fn from_rows(
        name: &str,
        description: Option<&str>,
        header: &[String],
        rows: &[Vec<String>],
        options: &InferenceOptions,
    ) -> Result<Dataset, TableError> {
        if header.is_empty() || header.iter().all(|h| h.trim().is_empty()) {
            return Err(TableError::EmptyHeader);
        }
        let mut seen = BTreeSet::new();
        for h in header {
            if !seen.insert(h.as_str()) {
                return Err(TableError::DuplicateColumn(h.clone()));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != header.len() {
                return Err(TableError::RaggedRow {
                    row: i + 1,
                    expected: header.len(),
                    found: row.len(),
                });
            }
        }

        let columns = header
            .iter()
            .enumerate()
            .map(|(col_idx, col_name)| {
                let values: Vec<Cell> = rows.iter().map(|r| Cell::parse(&r[col_idx])).collect();
                let kind = infer_column_kind(&values, col_name, options);
                Column {
                    name: col_name.clone(),
                    kind,
                    values,
                    description: None,
                }
            })
            .collect();

        Ok(Dataset {
            name: name.to_owned(),
            description: description.map(str::to_owned),
            columns,
            row_count: rows.len(),
        })
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.column(name).is_some()
    }

    /// Attaches a per-column description, ignoring unknown names.
    pub fn set_column_description(&mut self, column: &str, description: &str) {
        if let Some(col) = self.columns.iter_mut().find(|c| c.name == column) {
            col.description = Some(description.to_owned());
        }
    }
}

/// The aggregation functions a measure may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Agg {
    Count,
    Sum,
    Mean,
    Min,
    Max,
}

impl Agg {
    pub fn label(self) -> &'static str {
        match self {
            Agg::Count => "COUNT",
            Agg::Sum => "SUM",
            Agg::Mean => "MEAN",
            Agg::Min => "MIN",
            Agg::Max => "MAX",
        }
    }
}

/// A measure `agg(column)`; COUNT may omit the column to count rows.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Measure {
    pub agg: Agg,
    pub column: Option<String>,
}

impl Measure {
    pub fn count() -> Measure {
        Measure {
            agg: Agg::Count,
            column: None,
        }
    }

    pub fn new(agg: Agg, column: &str) -> Measure {
        Measure {
            agg,
            column: Some(column.to_owned()),
        }
    }

    pub fn mean(column: &str) -> Measure {
        Measure::new(Agg::Mean, column)
    }

    pub fn sum(column: &str) -> Measure {
        Measure::new(Agg::Sum, column)
    }

    /// Parses "AGG(column)" (case-insensitive) or a bare "COUNT" /
    /// "COUNT()" / "COUNT(*)".
    pub fn parse(text: &str) -> Option<Measure> {
        let trimmed = text.trim();
        let upper = trimmed.to_uppercase();
        if upper == "COUNT" || upper == "COUNT()" || upper == "COUNT(*)" {
            return Some(Measure::count());
        }
        let open = trimmed.find('(')?;
        let close = trimmed.rfind(')')?;
        if close <= open {
            return None;
        }
        let agg = match trimmed[..open].trim().to_uppercase().as_str() {
            "COUNT" => Agg::Count,
            "SUM" => Agg::Sum,
            "MEAN" | "AVG" | "AVERAGE" => Agg::Mean,
            "MIN" => Agg::Min,
            "MAX" => Agg::Max,
            _ => return None,
        };
        let column = trimmed[open + 1..close].trim();
        if column.is_empty() || column == "*" {
            return (agg == Agg::Count).then(Measure::count);
        }
        Some(Measure {
            agg,
            column: Some(column.to_owned()),
        })
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.column {
            Some(col) => write!(f, "{}({col})", self.agg.label()),
            None => write!(f, "{}", self.agg.label()),
        }
    }
}

/// A breakdown column paired with a measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Perspective {
    pub breakdown: String,
    pub measure: Measure,
}

impl Perspective {
    pub fn new(breakdown: &str, measure: Measure) -> Perspective {
        Perspective {
            breakdown: breakdown.to_owned(),
            measure,
        }
    }
}

/// An ordered conjunction of column = value equality filters.
///
/// Filter order records how the subspace was built (each search step appends
/// one filter); equality and ordering use the canonical form, which sorts
/// filters by column name.
#[derive(Debug, Clone, Default)]
pub struct Subspace {
    filters: Vec<(String, Cell)>,
}

impl Subspace {
    pub fn empty() -> Subspace {
        Subspace::default()
    }

    pub fn from_filters(filters: Vec<(String, Cell)>) -> Subspace {
        Subspace { filters }
    }

    /// Returns a new subspace with one more filter appended.
    pub fn with(&self, column: &str, value: Cell) -> Subspace {
        let mut filters = self.filters.clone();
        filters.push((column.to_owned(), value));
        Subspace { filters }
    }

    pub fn filters(&self) -> &[(String, Cell)] {
        &self.filters
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn uses_column(&self, name: &str) -> bool {
        self.filters.iter().any(|(col, _)| col == name)
    }

    /// The subspace this one was expanded from: all filters but the last.
    pub fn parent(&self) -> Option<Subspace> {
        if self.filters.is_empty() {
            return None;
        }
        Some(Subspace {
            filters: self.filters[..self.filters.len() - 1].to_vec(),
        })
    }

    /// Deterministic key: filters sorted by column name, separators escaped.
    pub fn canonical_key(&self) -> String {
        let mut sorted: Vec<&(String, Cell)> = self.filters.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        let mut key = String::new();
        for (i, (col, value)) in sorted.iter().enumerate() {
            if i > 0 {
                key.push(';');
            }
            escape_into(&mut key, col);
            key.push('=');
            escape_into(&mut key, &value.display());
        }
        key
    }
}

fn escape_into(out: &mut String, text: &str) {
    for ch in text.chars() {
        if matches!(ch, ';' | '=' | '\\') {
            out.push('\\');
        }
        out.push(ch);
    }
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_key() == other.canonical_key()
    }
}

impl Eq for Subspace {}

impl PartialOrd for Subspace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Subspace {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical_key().cmp(&other.canonical_key())
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.filters.is_empty() {
            return write!(f, "the whole dataset");
        }
        for (i, (col, value)) in self.filters.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{col} = {value}")?;
        }
        Ok(())
    }
}

/// A group-by result: one aggregated value per breakdown group.
///
/// Orderable breakdowns (ordinal, numeric, temporal) are sorted ascending by
/// key; categorical breakdowns are sorted by descending value, then key.
#[derive(Debug, Clone, PartialEq)]
pub struct View {
    pub breakdown: String,
    pub breakdown_kind: ColumnKind,
    pub measure: Measure,
    pub groups: Vec<(Cell, f64)>,
}

impl View {
    pub fn values(&self) -> Vec<f64> {
        self.groups.iter().map(|(_, v)| *v).collect()
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn total(&self) -> f64 {
        self.groups.iter().map(|(_, v)| v).sum()
    }
}

/// Returns the indices of rows matching every filter, ascending. An empty
/// subspace selects all rows; adding filters can only shrink the result.
pub fn apply_subspace(dataset: &Dataset, subspace: &Subspace) -> Result<Vec<usize>, TableError> {
    let mut filter_cols = Vec::with_capacity(subspace.filters().len());
    for (col_name, value) in subspace.filters() {
        let col = dataset
            .column(col_name)
            .ok_or_else(|| TableError::UnknownColumn(col_name.clone()))?;
        filter_cols.push((col, value));
    }
    let rows = (0..dataset.row_count())
        .filter(|&i| filter_cols.iter().all(|(col, value)| col.values[i] == **value))
        .collect();
    Ok(rows)
}

enum Accumulator {
    Count(u64),
    Sum { sum: f64, n: u64 },
    Extreme(Option<f64>),
}

/// Computes the group-by view of `measure` over `breakdown` on the rows
/// selected by `subspace`.
///
/// Rows with a null breakdown cell are dropped. Null measure cells are
/// excluded from SUM/MEAN/MIN/MAX (a group with only nulls is dropped) and
/// from COUNT(column); COUNT with no column counts rows.
pub fn compute_view(
    dataset: &Dataset,
    subspace: &Subspace,
    breakdown: &str,
    measure: &Measure,
) -> Result<View, TableError> {
    let breakdown_col = dataset
        .column(breakdown)
        .ok_or_else(|| TableError::UnknownColumn(breakdown.to_owned()))?;
    let measure_col = match &measure.column {
        Some(name) => {
            if name == breakdown {
                return Err(TableError::MeasureIsBreakdown(name.clone()));
            }
            let col = dataset
                .column(name)
                .ok_or_else(|| TableError::UnknownColumn(name.clone()))?;
            // Ordinal columns hold numbers, so they aggregate fine.
            let numeric_valued =
                matches!(col.kind, ColumnKind::Numeric | ColumnKind::Ordinal);
            if measure.agg != Agg::Count && !numeric_valued {
                return Err(TableError::IncompatibleMeasure(name.clone()));
            }
            Some(col)
        }
        None => {
            if measure.agg != Agg::Count {
                return Err(TableError::IncompatibleMeasure(
                    "<missing measure column>".to_owned(),
                ));
            }
            None
        }
    };

    let rows = apply_subspace(dataset, subspace)?;
    let mut groups: BTreeMap<Cell, Accumulator> = BTreeMap::new();
    for row in rows {
        let key = &breakdown_col.values[row];
        if key.is_null() {
            continue;
        }
        let acc = groups.entry(key.clone()).or_insert_with(|| match measure.agg {
            Agg::Count => Accumulator::Count(0),
            Agg::Sum | Agg::Mean => Accumulator::Sum { sum: 0.0, n: 0 },
            Agg::Min | Agg::Max => Accumulator::Extreme(None),
        });
        match (&mut *acc, measure_col) {
            (Accumulator::Count(n), None) => *n += 1,
            (Accumulator::Count(n), Some(col)) => {
                if !col.values[row].is_null() {
                    *n += 1;
                }
            }
            (Accumulator::Sum { sum, n }, Some(col)) => {
                if let Some(v) = col.values[row].as_number() {
                    *sum += v;
                    *n += 1;
                }
            }
            (Accumulator::Extreme(current), Some(col)) => {
                if let Some(v) = col.values[row].as_number() {
                    *current = Some(match (*current, measure.agg) {
                        (None, _) => v,
                        (Some(m), Agg::Min) => if v < m { v } else { m },
                        (Some(m), _) => if v > m { v } else { m },
                    });
                }
            }
            _ => unreachable!("accumulator matches aggregation"),
        }
    }

    let mut finished: Vec<(Cell, f64)> = groups
        .into_iter()
        .filter_map(|(key, acc)| {
            let value = match acc {
                Accumulator::Count(n) => Some(n as f64),
                Accumulator::Sum { sum, n } => {
                    if n == 0 {
                        None
                    } else if measure.agg == Agg::Mean {
                        Some(sum / n as f64)
                    } else {
                        Some(sum)
                    }
                }
                Accumulator::Extreme(v) => v,
            };
            value.map(|v| (key, v))
        })
        .collect();

    if !breakdown_col.kind.is_orderable() {
        finished.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    }

    Ok(View {
        breakdown: breakdown.to_owned(),
        breakdown_kind: breakdown_col.kind,
        measure: measure.clone(),
        groups: finished,
    })
}
