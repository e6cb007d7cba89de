//! File formats: response and matrix CSVs, attribute tables with a TOML
//! schema, edge lists, and JSON/CSV result documents.
//!
//! Row numbers in errors are 1-based file lines, so the header is line 1.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BinaryDataset, SimilarityKind, SimilarityMatrix};
use crate::similarity::{self, AttributeColumn, QuantitativeOptions};

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: display(path), source }
}

fn parse_err(path: &Path, row: u64, column: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Parse {
        file: display(path),
        row: row as usize,
        column: column.into(),
        reason: reason.into(),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line());
    parse_err(path, row, "-", e.to_string())
}

/// Header and records of a CSV file, with the file line of every record.
struct Table {
    header: Vec<String>,
    rows: Vec<(u64, Vec<String>)>,
}

fn read_table(path: &Path) -> Result<Table> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let header: Vec<String> = reader.headers().map_err(|e| csv_err(path, e))?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(parse_err(path, 1, "-", "missing header row"));
    }
    if let Some(dup) = first_duplicate(&header) {
        return Err(parse_err(path, 1, dup.clone(), "duplicate column name"));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(Table { header, rows })
}

fn first_duplicate(names: &[String]) -> Option<&String> {
    let mut seen = HashMap::new();
    names.iter().find(|n| seen.insert(n.as_str(), ()).is_some())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn csv_string(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(header).map_err(fmt)?;
    for r in rows {
        w.write_record(&r).map_err(fmt)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

/// Shortest decimal that round-trips.
fn num(v: f64) -> String {
    format!("{v}")
}

/// `n × p` table of 0/1 responses with a header of response labels.
pub fn read_responses(path: &Path) -> Result<BinaryDataset> {
    let t = read_table(path)?;
    let p = t.header.len();
    let mut y = Vec::with_capacity(t.rows.len() * p);
    for (line, rec) in &t.rows {
        if rec.len() != p {
            return Err(parse_err(path, *line, "-", format!("expected {p} fields, found {}", rec.len())));
        }
        for (c, field) in rec.iter().enumerate() {
            match field.as_str() {
                "0" => y.push(0),
                "1" => y.push(1),
                other => return Err(parse_err(path, *line, t.header[c].clone(), format!("expected 0 or 1, found {other:?}"))),
            }
        }
    }
    if t.rows.is_empty() {
        return Err(parse_err(path, 2, "-", "no observations"));
    }
    BinaryDataset::with_labels(t.rows.len(), p, y, t.header)
}

pub fn write_responses(path: &Path, data: &BinaryDataset) -> Result<()> {
    let rows = (0..data.n()).map(|i| data.row(i).iter().map(|v| v.to_string()).collect());
    write_text(path, &csv_string(data.labels(), rows)?)
}

/// `p × p` matrix whose header lists the response labels in row order. The
/// label of the matrix is the file stem unless given.
pub fn read_matrix(path: &Path, label: Option<&str>, expected_labels: Option<&[String]>) -> Result<SimilarityMatrix> {
    let t = read_table(path)?;
    let p = t.header.len();
    if let Some(expected) = expected_labels {
        if expected.len() != p {
            return Err(parse_err(path, 1, "-", format!("matrix has {p} columns, data has {} responses", expected.len())));
        }
        if let Some(c) = (0..p).find(|&c| t.header[c] != expected[c]) {
            return Err(parse_err(path, 1, t.header[c].clone(), format!("column label does not match response {:?}", expected[c])));
        }
    }
    if t.rows.len() != p {
        let line = t.rows.last().map_or(1, |r| r.0);
        return Err(parse_err(path, line, "-", format!("expected {p} rows, found {}", t.rows.len())));
    }
    let mut m = DMatrix::zeros(p, p);
    for (r, (line, rec)) in t.rows.iter().enumerate() {
        if rec.len() != p {
            return Err(parse_err(path, *line, "-", format!("expected {p} fields, found {}", rec.len())));
        }
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_err(path, *line, t.header[c].clone(), format!("expected a finite number, found {field:?}")))?;
            m[(r, c)] = v;
        }
    }
    let label = label.map(str::to_string).unwrap_or_else(|| file_stem(path));
    SimilarityMatrix::new(label, SimilarityKind::Raw, m).map_err(|e| parse_err(path, 2, "-", e.to_string()))
}

pub fn write_matrix(path: &Path, m: &SimilarityMatrix, labels: &[String]) -> Result<()> {
    let p = m.dim();
    let rows = (0..p).map(|r| (0..p).map(|c| num(m.get(r, c))).collect());
    write_text(path, &csv_string(labels, rows)?)
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "matrix".to_string(), |s| s.to_string_lossy().into_owned())
}

/// Two-column edge list of response identifiers; the matrix is the
/// symmetrized adjacency.
pub fn read_edge_list(path: &Path, labels: &[String], label: Option<&str>) -> Result<SimilarityMatrix> {
    let t = read_table(path)?;
    if t.header.len() != 2 {
        return Err(parse_err(path, 1, "-", format!("expected 2 columns, found {}", t.header.len())));
    }
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut edges = Vec::with_capacity(t.rows.len());
    for (line, rec) in &t.rows {
        if rec.len() != 2 {
            return Err(parse_err(path, *line, "-", format!("expected 2 fields, found {}", rec.len())));
        }
        let mut ends = [0usize; 2];
        for c in 0..2 {
            ends[c] = *index
                .get(rec[c].as_str())
                .ok_or_else(|| parse_err(path, *line, t.header[c].clone(), format!("unknown response {:?}", rec[c])))?;
        }
        if ends[0] == ends[1] {
            return Err(parse_err(path, *line, t.header[1].clone(), format!("self-loop on {:?}", rec[0])));
        }
        edges.push((ends[0], ends[1]));
    }
    let col = AttributeColumn::adjacency(label.map(str::to_string).unwrap_or_else(|| file_stem(path)), labels.len(), edges);
    similarity::from_adjacency(&col)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnKind {
    Quantitative,
    Qualitative,
    /// One indicator matrix per level.
    QualitativeLevels,
    Ignore,
}

/// Sidecar schema of an attribute table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeSchema {
    /// Column holding response identifiers; defaults to the first column.
    #[serde(default)]
    pub id_column: Option<String>,
    #[serde(default = "default_bandwidth")]
    pub bandwidth: f64,
    #[serde(default)]
    pub standardize: bool,
    pub columns: BTreeMap<String, ColumnKind>,
}

fn default_bandwidth() -> f64 {
    1.0
}

pub fn read_schema(path: &Path) -> Result<AttributeSchema> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    toml::from_str(&text).map_err(|e| {
        let line = e.span().map_or(0, |s| text[..s.start.min(text.len())].lines().count().max(1));
        parse_err(path, line as u64, "-", e.message().to_string())
    })
}

/// Builds similarity matrices from an attribute table, in column order.
/// Table rows are matched to `labels` by identifier.
pub fn read_attributes(table: &Path, schema: &AttributeSchema, labels: &[String]) -> Result<Vec<SimilarityMatrix>> {
    let t = read_table(table)?;
    let id_col = match &schema.id_column {
        Some(name) => t
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(table, 1, name.clone(), "identifier column not found"))?,
        None => 0,
    };
    for name in schema.columns.keys() {
        if !t.header.contains(name) {
            return Err(parse_err(table, 1, name.clone(), "column named in the schema is missing"));
        }
    }
    let p = labels.len();
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    // position[j] = table row (0-based) describing response j
    let mut position: Vec<Option<usize>> = vec![None; p];
    for (r, (line, rec)) in t.rows.iter().enumerate() {
        if rec.len() != t.header.len() {
            return Err(parse_err(table, *line, "-", format!("expected {} fields, found {}", t.header.len(), rec.len())));
        }
        let id = &rec[id_col];
        let j = *index
            .get(id.as_str())
            .ok_or_else(|| parse_err(table, *line, t.header[id_col].clone(), format!("identifier {id:?} is not a response label")))?;
        if position[j].is_some() {
            return Err(parse_err(table, *line, t.header[id_col].clone(), format!("identifier {id:?} appears twice")));
        }
        position[j] = Some(r);
    }
    if let Some(j) = position.iter().position(Option::is_none) {
        return Err(parse_err(table, 1, t.header[id_col].clone(), format!("no row for response {:?}", labels[j])));
    }
    let position: Vec<usize> = position.into_iter().map(Option::unwrap).collect();
    let options = QuantitativeOptions {
        bandwidth: schema.bandwidth,
        standardize: schema.standardize,
    };

    let mut out = Vec::new();
    for (c, name) in t.header.iter().enumerate() {
        if c == id_col {
            continue;
        }
        let kind = *schema.columns.get(name).ok_or_else(|| parse_err(table, 1, name.clone(), "column has no kind in the schema"))?;
        let cell = |j: usize| -> (&str, u64) {
            let (line, rec) = &t.rows[position[j]];
            (rec[c].as_str(), *line)
        };
        match kind {
            ColumnKind::Ignore => {}
            ColumnKind::Quantitative => {
                let mut z = Vec::with_capacity(p);
                for j in 0..p {
                    let (field, line) = cell(j);
                    let v: f64 = field
                        .parse()
                        .ok()
                        .filter(|v: &f64| v.is_finite())
                        .ok_or_else(|| parse_err(table, line, name.clone(), format!("expected a finite number, found {field:?}")))?;
                    z.push(v);
                }
                out.push(similarity::from_quantitative_with(&AttributeColumn::quantitative(name.clone(), z), options)?);
            }
            ColumnKind::Qualitative | ColumnKind::QualitativeLevels => {
                let mut levels = Vec::with_capacity(p);
                for j in 0..p {
                    let (field, line) = cell(j);
                    if field.is_empty() {
                        return Err(parse_err(table, line, name.clone(), "missing category"));
                    }
                    levels.push(field.to_string());
                }
                let col = AttributeColumn::qualitative(name.clone(), levels);
                if kind == ColumnKind::Qualitative {
                    out.push(similarity::from_qualitative(&col)?);
                } else {
                    let mut distinct = similarity::distinct_levels(&col)?;
                    distinct.sort();
                    for level in distinct {
                        out.push(similarity::from_qualitative_level(&col, &level)?);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Category of every response from one column of an attribute table.
pub fn read_categories(table: &Path, id_column: Option<&str>, column: &str, labels: &[String]) -> Result<Vec<String>> {
    let t = read_table(table)?;
    let id_col = match id_column {
        Some(name) => t.header.iter().position(|h| h == name).ok_or_else(|| parse_err(table, 1, name, "identifier column not found"))?,
        None => 0,
    };
    let c = t.header.iter().position(|h| h == column).ok_or_else(|| parse_err(table, 1, column, "column not found"))?;
    let mut by_id = HashMap::new();
    for (line, rec) in &t.rows {
        if rec.len() != t.header.len() {
            return Err(parse_err(table, *line, "-", format!("expected {} fields, found {}", t.header.len(), rec.len())));
        }
        by_id.insert(rec[id_col].as_str(), rec[c].clone());
    }
    labels
        .iter()
        .map(|l| by_id.get(l.as_str()).cloned().ok_or_else(|| parse_err(table, 1, t.header[id_col].clone(), format!("no row for response {l:?}"))))
        .collect()
}

/// Identifiers of an attribute table in file order.
pub fn read_ids(table: &Path, id_column: Option<&str>) -> Result<Vec<String>> {
    let t = read_table(table)?;
    let id_col = match id_column {
        Some(name) => t.header.iter().position(|h| h == name).ok_or_else(|| parse_err(table, 1, name, "identifier column not found"))?,
        None => 0,
    };
    let mut ids = Vec::with_capacity(t.rows.len());
    for (line, rec) in &t.rows {
        let id = rec.get(id_col).ok_or_else(|| parse_err(table, *line, t.header[id_col].clone(), "missing identifier"))?;
        if ids.contains(id) {
            return Err(parse_err(table, *line, t.header[id_col].clone(), format!("identifier {id:?} appears twice")));
        }
        ids.push(id.clone());
    }
    Ok(ids)
}

/// Generating parameters and similarity matrices of a simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthDocument {
    pub schema_version: u32,
    pub seed: u64,
    pub n: usize,
    pub response_labels: Vec<String>,
    pub params: crate::model::ParameterSet,
    pub support: Vec<usize>,
    pub sampler: Option<crate::sampler::SamplerConfig>,
    pub similarity: Vec<SimilarityMatrix>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e.line() as u64, format!("char {}", e.column()), e.to_string()))
}

pub fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    toml::from_str(&text).map_err(|e| {
        let line = e.span().map_or(0, |s| text[..s.start.min(text.len())].lines().count().max(1));
        parse_err(path, line as u64, "-", e.message().to_string())
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Coefficient table: one row per similarity matrix.
pub fn write_coefficients(path: &Path, result: &crate::selection::FitResult) -> Result<()> {
    let header: Vec<String> = ["coefficient", "estimate", "active", "refit", "se", "lower", "upper"].iter().map(|s| s.to_string()).collect();
    let rows = result.coefficient_rows().into_iter().map(|r| {
        vec![
            r.coefficient,
            num(r.estimate),
            r.active.to_string(),
            opt(r.refit),
            opt(r.se),
            opt(r.lower),
            opt(r.upper),
        ]
    });
    write_text(path, &csv_string(&header, rows)?)
}

/// Per-estimator summary, preceded by `# key: value` metadata lines.
pub fn write_benchmark_summary(path: &Path, report: &crate::bench::BenchmarkReport) -> Result<()> {
    let m = &report.metadata;
    let s = &report.scenario;
    let mut text = format!(
        "# schema_version: {}\n# package_version: {}\n# scenario: {}\n# n: {}\n# p: {}\n# K: {}\n# K0: {}\n# replicates: {}\n# seed: {}\n# decisions_fingerprint: {}\n",
        m.schema_version, m.package_version, s.name, s.n, s.p, s.k, s.k0, s.replicates, m.seed, m.decisions_fingerprint
    );
    let header: Vec<String> = [
        "estimator",
        "successes",
        "failures",
        "not_converged",
        "mse_alpha_x1000",
        "mse_theta",
        "sse_alpha",
        "sse_theta",
        "tpr",
        "fpr",
        "theta_error_mean",
        "theta_error_median",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows = report.summary.iter().map(|e| {
        vec![
            e.estimator.name().to_string(),
            e.successes.to_string(),
            e.failures.to_string(),
            e.not_converged.to_string(),
            opt(e.mse_alpha_x1000),
            opt(e.mse_theta),
            opt(e.sse_alpha),
            opt(e.sse_theta),
            opt(e.tpr),
            opt(e.fpr),
            opt(e.theta_error_mean),
            opt(e.theta_error_median),
        ]
    });
    text.push_str(&csv_string(&header, rows)?);
    write_text(path, &text)
}

pub fn write_string(path: &Path, text: &str) -> Result<()> {
    write_text(path, text)
}
