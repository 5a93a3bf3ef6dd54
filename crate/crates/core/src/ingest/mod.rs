//! The Montesinho weather dataset: parsing, preprocessing and correlation.
//!
//! A [`Dataset`] is a small columnar-ish table: an ordered schema, rows of
//! [`Cell`]s and an append-only provenance log of the transforms that
//! produced it. Raw files parse into the 13-column layout below; transforms
//! in [`transform`] rewrite columns and append to the provenance.

mod stats;
mod transform;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::Scalar;

pub use stats::{
    correlation_matrix, mean, pearson, population_std, quantile_linear, CorrelationMatrix,
};
pub use transform::{
    calendar_ordinals, denormalize, filter_outliers, log_transform_area, one_hot_encode, resample,
    zscore_normalize, NormParams, OutlierMethod, ResampleStrategy,
};

pub const MONTHS: [&str; 12] = [
    "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec",
];
pub const DAYS: [&str; 7] = ["mon", "tue", "wed", "thu", "fri", "sat", "sun"];

/// Canonical column names of the raw dataset, in file order.
pub const COLUMNS: [&str; 13] = [
    "X", "Y", "month", "day", "FFMC", "DMC", "DC", "ISI", "temp", "RH", "wind", "rain", "area",
];

/// Closed vocabulary of a categorical column, if it has one.
pub fn vocabulary(column: &str) -> Option<&'static [&'static str]> {
    match column {
        "month" => Some(&MONTHS),
        "day" => Some(&DAYS),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("input is empty; expected a header line")]
    EmptyInput,
    #[error("missing column '{0}' in header")]
    MissingColumn(String),
    #[error("unexpected column '{0}' in header")]
    UnexpectedColumn(String),
    #[error("row {row}: expected {expected} cells, found {found}")]
    RowWidth {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {column}: cannot parse '{text}'")]
    BadCell {
        row: usize,
        column: String,
        text: String,
    },
    #[error("row {row}, column {column}: value {value} out of range")]
    RangeViolation {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column {column}: negative input to logarithm")]
    NegativeInput { row: usize, column: String },
    #[error("column '{0}' has zero variance")]
    ZeroVariance(String),
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("column '{0}' is not numeric")]
    NotNumeric(String),
    #[error("column '{0}' is not categorical with a known vocabulary")]
    NotCategorical(String),
    #[error("row {row}, column {column}: unknown token '{token}'")]
    UnknownToken {
        row: usize,
        column: String,
        token: String,
    },
    #[error("need at least {needed} rows, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("label column '{0}' has a single class; nothing to balance")]
    SingleClass(String),
}

pub type Result<T, E = IngestError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Integer,
    Decimal,
    Categorical,
}

impl ColumnKind {
    pub fn is_numeric(self) -> bool {
        !matches!(self, ColumnKind::Categorical)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        Column {
            name: name.into(),
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell<T> {
    Num(T),
    Cat(String),
}

impl<T: Scalar> Cell<T> {
    pub fn as_num(&self) -> Option<T> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Cat(_) => None,
        }
    }

    pub fn as_cat(&self) -> Option<&str> {
        match self {
            Cell::Cat(s) => Some(s),
            Cell::Num(_) => None,
        }
    }
}

/// One entry in a dataset's provenance log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transform {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

impl Transform {
    pub fn new(name: impl Into<String>) -> Self {
        Transform {
            name: name.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }
}

/// One row of the raw dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherRecord<T> {
    pub x: u8,
    pub y: u8,
    /// Index into [`MONTHS`].
    pub month: u8,
    /// Index into [`DAYS`].
    pub day: u8,
    pub ffmc: T,
    pub dmc: T,
    pub dc: T,
    pub isi: T,
    pub temp: T,
    pub rh: T,
    pub wind: T,
    pub rain: T,
    pub area: T,
}

impl<T: Scalar> WeatherRecord<T> {
    pub fn month_token(&self) -> &'static str {
        MONTHS[self.month as usize]
    }

    pub fn day_token(&self) -> &'static str {
        DAYS[self.day as usize]
    }

    /// Calendar month, 1-12.
    pub fn month_number(&self) -> u8 {
        self.month + 1
    }

    fn to_cells(&self) -> Vec<Cell<T>> {
        vec![
            Cell::Num(T::from_u8(self.x).unwrap()),
            Cell::Num(T::from_u8(self.y).unwrap()),
            Cell::Cat(self.month_token().to_string()),
            Cell::Cat(self.day_token().to_string()),
            Cell::Num(self.ffmc),
            Cell::Num(self.dmc),
            Cell::Num(self.dc),
            Cell::Num(self.isi),
            Cell::Num(self.temp),
            Cell::Num(self.rh),
            Cell::Num(self.wind),
            Cell::Num(self.rain),
            Cell::Num(self.area),
        ]
    }

    /// Serializes the record as one CSV line in canonical column order.
    pub fn to_csv_line(&self) -> String {
        let cells = self.to_cells();
        cells.iter().map(format_cell).collect::<Vec<_>>().join(",")
    }
}

fn format_cell<T: Scalar>(cell: &Cell<T>) -> String {
    match cell {
        Cell::Num(v) => format!("{v}"),
        Cell::Cat(s) => s.clone(),
    }
}

fn raw_schema() -> Vec<Column> {
    COLUMNS
        .iter()
        .map(|&name| {
            let kind = match name {
                "X" | "Y" => ColumnKind::Integer,
                "month" | "day" => ColumnKind::Categorical,
                _ => ColumnKind::Decimal,
            };
            Column::new(name, kind)
        })
        .collect()
}

/// Parses data lines once the header has been mapped onto canonical columns.
#[derive(Debug, Clone)]
pub struct RecordParser {
    /// For each canonical column, its position in the file.
    positions: [usize; 13],
}

impl Default for RecordParser {
    /// Canonical column order, as used by headerless record streams.
    fn default() -> Self {
        let mut positions = [0; 13];
        for (i, p) in positions.iter_mut().enumerate() {
            *p = i;
        }
        RecordParser { positions }
    }
}

impl RecordParser {
    pub fn from_header(header: &str) -> Result<Self> {
        let names: Vec<String> = header
            .trim_end_matches('\r')
            .split(',')
            .map(|s| s.trim().to_ascii_lowercase())
            .collect();
        for name in &names {
            if !COLUMNS.iter().any(|c| c.eq_ignore_ascii_case(name)) {
                return Err(IngestError::UnexpectedColumn(name.clone()));
            }
        }
        let mut positions = [0; 13];
        for (slot, col) in positions.iter_mut().zip(COLUMNS) {
            let matches: Vec<usize> = names
                .iter()
                .enumerate()
                .filter(|(_, n)| col.eq_ignore_ascii_case(n))
                .map(|(i, _)| i)
                .collect();
            match matches.as_slice() {
                [i] => *slot = *i,
                [] => return Err(IngestError::MissingColumn(col.to_string())),
                _ => return Err(IngestError::UnexpectedColumn(col.to_string())),
            }
        }
        Ok(RecordParser { positions })
    }

    /// True when `line` looks like a header rather than a data row.
    pub fn is_header(line: &str) -> bool {
        line.split(',')
            .next()
            .map(|c| c.trim().eq_ignore_ascii_case("x"))
            .unwrap_or(false)
    }

    pub fn parse_line<T: Scalar>(&self, row: usize, line: &str) -> Result<WeatherRecord<T>> {
        let cells: Vec<&str> = line
            .trim_end_matches('\r')
            .split(',')
            .map(str::trim)
            .collect();
        if cells.len() != COLUMNS.len() {
            return Err(IngestError::RowWidth {
                row,
                expected: COLUMNS.len(),
                found: cells.len(),
            });
        }
        let cell = |i: usize| cells[self.positions[i]];
        for (i, col) in COLUMNS.iter().enumerate() {
            if cell(i).contains('"') {
                return Err(bad_cell(row, col, cell(i)));
            }
        }

        let grid = |i: usize, lo: i64, hi: i64| -> Result<u8> {
            let text = cell(i);
            let v: i64 = text.parse().map_err(|_| bad_cell(row, COLUMNS[i], text))?;
            if v < lo || v > hi {
                return Err(range(row, COLUMNS[i], text));
            }
            Ok(v as u8)
        };
        let token = |i: usize, vocab: &[&str]| -> Result<u8> {
            let text = cell(i);
            vocab
                .iter()
                .position(|t| t.eq_ignore_ascii_case(text))
                .map(|p| p as u8)
                .ok_or_else(|| range(row, COLUMNS[i], text))
        };
        let num = |i: usize, lo: f64, hi: f64| -> Result<T> {
            let text = cell(i);
            let v: T = text.parse().map_err(|_| bad_cell(row, COLUMNS[i], text))?;
            if !v.is_finite() {
                return Err(bad_cell(row, COLUMNS[i], text));
            }
            let f = v.as_f64();
            if f < lo || f > hi {
                return Err(range(row, COLUMNS[i], text));
            }
            Ok(v)
        };
        let inf = f64::INFINITY;

        Ok(WeatherRecord {
            x: grid(0, 1, 9)?,
            y: grid(1, 2, 9)?,
            month: token(2, &MONTHS)?,
            day: token(3, &DAYS)?,
            ffmc: num(4, 0.0, 101.0)?,
            dmc: num(5, 0.0, inf)?,
            dc: num(6, 0.0, inf)?,
            isi: num(7, 0.0, inf)?,
            temp: num(8, -inf, inf)?,
            rh: num(9, 0.0, 100.0)?,
            wind: num(10, 0.0, inf)?,
            rain: num(11, 0.0, inf)?,
            area: num(12, 0.0, inf)?,
        })
    }
}

fn bad_cell(row: usize, column: &str, text: &str) -> IngestError {
    IngestError::BadCell {
        row,
        column: column.to_string(),
        text: text.to_string(),
    }
}

fn range(row: usize, column: &str, text: &str) -> IngestError {
    IngestError::RangeViolation {
        row,
        column: column.to_string(),
        value: text.to_string(),
    }
}

/// A table of weather rows with its schema and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    schema: Vec<Column>,
    rows: Vec<Vec<Cell<T>>>,
    provenance: Vec<Transform>,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset in the raw 13-column layout.
    pub fn from_records(records: &[WeatherRecord<T>]) -> Self {
        Dataset {
            schema: raw_schema(),
            rows: records.iter().map(WeatherRecord::to_cells).collect(),
            provenance: Vec::new(),
        }
    }

    /// Builds a dataset from explicit columns; every row must match the schema.
    pub fn new(schema: Vec<Column>, rows: Vec<Vec<Cell<T>>>) -> Result<Self> {
        for (r, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(IngestError::RowWidth {
                    row: r,
                    expected: schema.len(),
                    found: row.len(),
                });
            }
            for (cell, col) in row.iter().zip(&schema) {
                let ok = match cell {
                    Cell::Num(v) => col.kind.is_numeric() && v.is_finite(),
                    Cell::Cat(_) => !col.kind.is_numeric(),
                };
                if !ok {
                    return Err(IngestError::BadCell {
                        row: r,
                        column: col.name.clone(),
                        text: format_cell(cell),
                    });
                }
            }
        }
        Ok(Dataset {
            schema,
            rows,
            provenance: Vec::new(),
        })
    }

    pub(crate) fn from_parts(
        schema: Vec<Column>,
        rows: Vec<Vec<Cell<T>>>,
        provenance: Vec<Transform>,
    ) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == schema.len()));
        Dataset {
            schema,
            rows,
            provenance,
        }
    }

    pub fn schema(&self) -> &[Column] {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Cell<T>>] {
        &self.rows
    }

    pub fn provenance(&self) -> &[Transform] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.schema.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.schema
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| IngestError::UnknownColumn(name.to_string()))
    }

    /// Values of a numeric column in row order.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<T>> {
        let idx = self.column_index(name)?;
        if !self.schema[idx].kind.is_numeric() {
            return Err(IngestError::NotNumeric(name.to_string()));
        }
        Ok(self
            .rows
            .iter()
            .map(|r| r[idx].as_num().expect("numeric cell"))
            .collect())
    }

    /// Converts rows back into records; only valid for the raw layout.
    pub fn records(&self) -> Result<Vec<WeatherRecord<T>>> {
        let parser = RecordParser::from_header(&self.column_names().join(","))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let line = row.iter().map(format_cell).collect::<Vec<_>>().join(",");
                parser.parse_line(i, &line)
            })
            .collect()
    }

    /// Serializes as CSV with a header row, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.column_names().join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(format_cell).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Provenance log as a JSON array.
    pub fn provenance_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({ "provenance": self.provenance }))
            .expect("provenance serializes")
    }

    pub(crate) fn with_transform(mut self, t: Transform) -> Self {
        self.provenance.push(t);
        self
    }

    pub(crate) fn into_parts(self) -> (Vec<Column>, Vec<Vec<Cell<T>>>, Vec<Transform>) {
        (self.schema, self.rows, self.provenance)
    }
}

impl<T: Scalar> fmt::Display for Dataset<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv())
    }
}

/// Parses the 13-column dataset CSV (LF or CRLF line endings).
pub fn parse_dataset<T: Scalar>(csv_text: &str) -> Result<Dataset<T>> {
    let mut lines = csv_text.split('\n').map(|l| l.trim_end_matches('\r'));
    let header = loop {
        match lines.next() {
            Some(l) if l.trim().is_empty() => continue,
            Some(l) => break l,
            None => return Err(IngestError::EmptyInput),
        }
    };
    let parser = RecordParser::from_header(header)?;
    let mut records = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        records.push(parser.parse_line(records.len(), line)?);
    }
    Ok(Dataset::from_records(&records).with_transform(Transform::new("parse")))
}
