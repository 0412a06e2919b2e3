//! CSV ingestion, the JSON analysis document, and fixed-width text tables.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::engine::BoxplotSummary;
use crate::error::{Error, Result};
use crate::simulation::SimulationReport;
use crate::stats::Sample;

pub const ANALYSIS_SCHEMA_VERSION: &str = "abox.analysis/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnSelector {
    Name(String),
    Index(usize),
}

impl ColumnSelector {
    /// All-digit text selects by 0-based index, anything else by header name.
    pub fn parse(text: &str) -> Self {
        match text.parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(text.to_string()),
        }
    }
}

impl std::fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColumnSelector::Name(name) => f.write_str(name),
            ColumnSelector::Index(i) => write!(f, "{i}"),
        }
    }
}

pub fn read_csv_column(path: &Path, column: &ColumnSelector, header: bool) -> Result<Sample> {
    let text = std::fs::read_to_string(path)?;
    let label = path.file_stem().map(|s| format!("{}:{column}", s.to_string_lossy()));
    let mut sample = parse_csv_column(&text, column, header)?;
    if let Some(label) = label {
        sample = Sample::new(sample.values().to_vec(), Some(label))?;
    }
    Ok(sample)
}

/// Parses one numeric column from CSV text.
///
/// Rows in errors are 1-based line numbers of the input, header included.
pub fn parse_csv_column(text: &str, column: &ColumnSelector, header: bool) -> Result<Sample> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(header).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());

    let index = match column {
        ColumnSelector::Index(i) => *i,
        ColumnSelector::Name(name) => {
            if !header {
                return Err(Error::ColumnNotFound(format!("{name} (input has no header row)")));
            }
            let headers = reader.headers().map_err(csv_error)?;
            headers.iter().position(|h| h == name).ok_or_else(|| Error::ColumnNotFound(name.clone()))?
        }
    };

    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            // Blank line.
            continue;
        }
        let cell = record
            .get(index)
            .ok_or_else(|| Error::ColumnNotFound(format!("index {index} (row {row} has {} fields)", record.len())))?;
        match cell.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) => return Err(Error::Parse { row, content: cell.to_string() }),
        }
    }
    Sample::new(values, Some(column.to_string()))
}

fn csv_error(e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse { row, content: format!("{kind:?}") },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDescriptor {
    pub source: String,
    pub column: String,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timestamps {
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
}

pub fn unix_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisDocument {
    pub schema_version: String,
    pub input: InputDescriptor,
    pub results: Vec<BoxplotSummary>,
    pub timestamps: Timestamps,
}

impl AnalysisDocument {
    pub fn new(input: InputDescriptor, results: Vec<BoxplotSummary>, timestamps: Timestamps) -> Result<Self> {
        let doc = Self { schema_version: ANALYSIS_SCHEMA_VERSION.to_string(), input, results, timestamps };
        doc.validate()?;
        Ok(doc)
    }

    fn validate(&self) -> Result<()> {
        if self.schema_version.is_empty() {
            return Err(Error::domain("schema_version is empty"));
        }
        if self.results.is_empty() {
            return Err(Error::domain("analysis document has no results"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        doc.validate()?;
        Ok(doc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Json,
    #[default]
    Table,
}

#[derive(Debug, Clone, Copy)]
pub enum Document<'a> {
    Analysis(&'a AnalysisDocument),
    Simulation(&'a SimulationReport),
}

pub fn emit(document: Document<'_>, format: Format) -> Result<String> {
    match (document, format) {
        (Document::Analysis(d), Format::Json) => d.to_json(),
        (Document::Simulation(r), Format::Json) => r.to_json(),
        (Document::Analysis(d), Format::Table) => Ok(analysis_table(&d.results)),
        (Document::Simulation(r), Format::Table) => Ok(simulation_table(r)),
    }
}

fn fmt_threshold(t: Option<f64>) -> String {
    t.map_or_else(|| "-".to_string(), |t| format!("{t:.2e}"))
}

fn fmt_bound(b: Option<f64>, missing: &str) -> String {
    b.map_or_else(|| missing.to_string(), |b| format!("{b:.2}"))
}

fn fmt_opt(x: Option<f64>, digits: usize) -> String {
    x.map_or_else(|| "-".to_string(), |x| format!("{x:.digits$}"))
}

pub fn analysis_table(results: &[BoxplotSummary]) -> String {
    let rows = results
        .iter()
        .map(|s| {
            let mut flagged = s.outlier_values.clone();
            flagged.sort_by(|a, b| b.total_cmp(a));
            let flagged: Vec<String> = flagged.iter().map(|v| v.to_string()).collect();
            vec![
                s.label.clone(),
                fmt_threshold(s.threshold),
                format!("{{{}}}", flagged.join(", ")),
                format!("[{}, {}]", fmt_bound(s.fences.lower, "-inf"), fmt_bound(s.fences.upper, "inf")),
            ]
        })
        .collect::<Vec<_>>();
    table(&["Method", "t_adj", "Outliers", "Fences"], &rows)
}

pub fn simulation_table(report: &SimulationReport) -> String {
    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.method.clone(),
                r.n.to_string(),
                fmt_opt(r.mean_coefficient, 3),
                format!("{:.3}", r.mean_flagged),
                fmt_opt(r.mean_flagged_bulk, 3),
                r.replicates.to_string(),
            ]
        })
        .collect::<Vec<_>>();
    table(&["Method", "n", "Coefficient", "Flagged", "Bulk flagged", "Replicates"], &rows)
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let padded: Vec<String> = cells.zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
        padded.join(" | ").trim_end().to_string()
    };
    let mut out = line(&mut header.iter().copied());
    out.push('\n');
    out.push_str(&widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("-+-"));
    out.push('\n');
    for row in rows {
        out.push_str(&line(&mut row.iter().map(String::as_str)));
        out.push('\n');
    }
    out
}
