//! CSV ingestion and the optional JSON metadata sidecar.
//!
//! The CSV dialect is fixed: comma separator, double-quote quoting, UTF-8,
//! first row is the header. Ragged rows are format errors.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use insight_core::table::{Dataset, InferenceOptions};

use crate::PipelineError;

/// Optional dataset metadata: `{ "name": ..., "description": ...,
/// "columns": { "<col>": "<description>" } }`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetaSidecar {
    pub name: Option<String>,
    pub description: Option<String>,
    pub columns: BTreeMap<String, String>,
}

/// Loads a CSV file into a dataset, inferring column kinds.
pub fn load_csv(
    path: &Path,
    name: &str,
    description: Option<&str>,
    options: &InferenceOptions,
) -> Result<Dataset, PipelineError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                PipelineError::Io(format!("cannot open {}: {e}", path.display()))
            }
            _ => PipelineError::Format(format!("{e}")),
        })?;

    let header: Vec<String> = reader
        .headers()
        .map_err(|e| PipelineError::Format(format!("bad header in {}: {e}", path.display())))?
        .iter()
        .map(str::to_owned)
        .collect();

    let mut rows: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| PipelineError::Format(format!("{}: {e}", path.display())))?;
        rows.push(record.iter().map(str::to_owned).collect());
    }

    Dataset::from_rows(name, description, &header, &rows, options)
        .map_err(|e| PipelineError::Format(format!("{}: {e}", path.display())))
}

/// Reads a metadata sidecar file.
pub fn load_sidecar(path: &Path) -> Result<MetaSidecar, PipelineError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PipelineError::Io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| PipelineError::Format(format!("invalid sidecar {}: {e}", path.display())))
}

/// Loads the dataset plus optional sidecar metadata; the sidecar's name and
/// description win over the defaults (file stem, none).
pub fn load_dataset(
    csv_path: &Path,
    meta_path: Option<&Path>,
    options: &InferenceOptions,
) -> Result<Dataset, PipelineError> {
    let sidecar = match meta_path {
        Some(path) => load_sidecar(path)?,
        None => MetaSidecar::default(),
    };
    let default_name = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_owned());
    let name = sidecar.name.as_deref().unwrap_or(&default_name);
    let mut dataset = load_csv(csv_path, name, sidecar.description.as_deref(), options)?;
    for (column, description) in &sidecar.columns {
        dataset.set_column_description(column, description);
    }
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use insight_core::table::ColumnKind;
    use std::io::Write;

    fn write_file(dir: &tempfile::TempDir, name: &str, content: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut file = std::fs::File::create(&path).unwrap();
        file.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_simple_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "t.csv", "a,b\n1,x\n2,y\n");
        let d = load_csv(&path, "t", None, &InferenceOptions::default()).unwrap();
        assert_eq!(d.row_count(), 2);
        assert_eq!(d.column("a").unwrap().kind, ColumnKind::Ordinal);
        assert_eq!(d.column("b").unwrap().kind, ColumnKind::Categorical);
    }

    #[test]
    fn header_only_is_empty_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "t.csv", "a,b\n");
        let d = load_csv(&path, "t", None, &InferenceOptions::default()).unwrap();
        assert_eq!(d.row_count(), 0);
        assert_eq!(d.columns().len(), 2);
    }

    #[test]
    fn ragged_row_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "t.csv", "a\n1\n1,2\n");
        assert!(matches!(
            load_csv(&path, "t", None, &InferenceOptions::default()),
            Err(PipelineError::Format(_))
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        let missing = Path::new("/nonexistent/definitely/missing.csv");
        assert!(matches!(
            load_csv(missing, "t", None, &InferenceOptions::default()),
            Err(PipelineError::Io(_))
        ));
    }

    #[test]
    fn quoted_fields_parse() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "t.csv", "a,b\n\"x, y\",2\n");
        let d = load_csv(&path, "t", None, &InferenceOptions::default()).unwrap();
        assert_eq!(d.column("a").unwrap().values[0].display(), "x, y");
    }

    #[test]
    fn sidecar_metadata_applies() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write_file(&dir, "sales.csv", "region,amount\nwest,1\neast,2\n");
        let meta = write_file(
            &dir,
            "sales.json",
            r#"{"name": "Sales", "description": "store sales", "columns": {"region": "sales region", "ghost": "ignored"}}"#,
        );
        let d = load_dataset(&csv, Some(&meta), &InferenceOptions::default()).unwrap();
        assert_eq!(d.name, "Sales");
        assert_eq!(d.description.as_deref(), Some("store sales"));
        assert_eq!(
            d.column("region").unwrap().description.as_deref(),
            Some("sales region")
        );
        // Without a sidecar the file stem names the dataset.
        let d2 = load_dataset(&csv, None, &InferenceOptions::default()).unwrap();
        assert_eq!(d2.name, "sales");
    }
}
