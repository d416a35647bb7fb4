//! Delimited point-data tables.
//!
//! Format:
//! - comma-delimited UTF-8, one header row, `.` as the decimal mark;
//! - header names are the canonical columns in [`CANONICAL_COLUMNS`], matched
//!   case-insensitively in any order; an optional `contributor` column
//!   overrides the sidecar contributor per row (pooled tables use it);
//! - `--` or an empty cell marks an absent measurement;
//! - an empty `freq_ghz` or `tx` cell repeats the value of the row above, which
//!   mirrors the merged cells of a typeset table.
//!
//! [`write_point_table`] emits every cell explicitly in canonical column order.

use std::collections::HashSet;

use csv::{ReaderBuilder, Trim, WriterBuilder};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError, RecordKey};
use crate::metadata::{CampaignMetadata, MetadataError};
use crate::record::{validate_record, LinkState, Parameter, PointRecord, Violation};

pub const CANONICAL_COLUMNS: [&str; 17] = [
    "freq_ghz",
    "tx",
    "rx",
    "loc",
    "tr_sep_m",
    "omni_pl_vv_db",
    "omni_pl_vh_db",
    "mean_dir_ds_ns",
    "omni_ds_ns",
    "mean_lobe_asa_deg",
    "omni_asa_deg",
    "mean_lobe_asd_deg",
    "omni_asd_deg",
    "mean_lobe_zsa_deg",
    "omni_zsa_deg",
    "mean_lobe_zsd_deg",
    "omni_zsd_deg",
];

pub const CONTRIBUTOR_COLUMN: &str = "contributor";

pub const MISSING: &str = "--";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("table has no data rows")]
    EmptyTable,
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{0}` appears more than once")]
    DuplicateColumn(String),
    #[error("missing required column `{0}`")]
    MissingRequiredColumn(&'static str),
    #[error("line {line}, column `{column}`: `{value}` is not a number")]
    NonNumericValue {
        line: u64,
        column: &'static str,
        value: String,
    },
    #[error("line {line}, column `{column}`: value required")]
    MissingValue { line: u64, column: &'static str },
    #[error("line {line}: unknown link state `{value}`")]
    InvalidLinkState { line: u64, value: String },
    #[error("line {line}: duplicate key ({frequency_ghz} GHz, {tx}, {rx})")]
    DuplicateKey {
        line: u64,
        frequency_ghz: f64,
        tx: String,
        rx: String,
    },
    #[error("line {line}: {}", violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidRecord {
        line: u64,
        violations: Vec<Violation>,
    },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error(transparent)]
    Metadata(#[from] MetadataError),
}

/// A data row with its 1-based line number in the source text.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRow {
    pub line: u64,
    pub record: PointRecord,
}

#[derive(Clone, Copy)]
enum Column {
    Freq,
    Tx,
    Rx,
    Loc,
    Value(Parameter),
    Contributor,
}

fn column_for(name: &str) -> Option<Column> {
    Some(match name {
        "freq_ghz" => Column::Freq,
        "tx" => Column::Tx,
        "rx" => Column::Rx,
        "loc" => Column::Loc,
        CONTRIBUTOR_COLUMN => Column::Contributor,
        other => Column::Value(other.parse::<Parameter>().ok()?),
    })
}

fn canonical_name(name: &str) -> &'static str {
    CANONICAL_COLUMNS
        .iter()
        .chain(std::iter::once(&CONTRIBUTOR_COLUMN))
        .find(|c| **c == name)
        .copied()
        .expect("column resolved from the canonical list")
}

/// Parses a number in the interchange format. Locale decimals (`68,2`) and
/// non-finite values are rejected.
fn parse_number(cell: &str) -> Option<f64> {
    if cell.contains(',') {
        return None;
    }
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == MISSING
}

/// Reads rows without applying record invariants or key uniqueness.
///
/// Rows without a `contributor` column are attributed to `default_contributor`.
pub fn read_point_rows(
    text: &str,
    default_contributor: &str,
) -> Result<Vec<ParsedRow>, TableError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut reader = ReaderBuilder::new()
        .has_headers(true)
        .trim(Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());

    let headers = reader.headers().map_err(|e| malformed(&e))?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(TableError::EmptyTable);
    }

    let mut layout = Vec::with_capacity(headers.len());
    let mut seen: HashSet<String> = HashSet::new();
    for name in headers.iter() {
        let lower = name.to_ascii_lowercase();
        let column =
            column_for(&lower).ok_or_else(|| TableError::UnknownColumn(name.to_string()))?;
        if !seen.insert(lower.clone()) {
            return Err(TableError::DuplicateColumn(name.to_string()));
        }
        layout.push((column, canonical_name(&lower)));
    }
    for required in CANONICAL_COLUMNS {
        if !seen.contains(required) {
            return Err(TableError::MissingRequiredColumn(required));
        }
    }

    let mut rows = Vec::new();
    let mut last_freq: Option<f64> = None;
    let mut last_tx: Option<String> = None;

    for result in reader.records() {
        let raw = result.map_err(|e| malformed(&e))?;
        let line = raw.position().map(|p| p.line()).unwrap_or(0);
        if raw.iter().all(str::is_empty) {
            continue;
        }

        let mut record = PointRecord::bare(
            default_contributor,
            f64::NAN,
            "",
            "",
            LinkState::Los,
            f64::NAN,
        );

        for ((column, name), cell) in layout.iter().zip(raw.iter()) {
            match *column {
                Column::Freq => {
                    let v = if cell.is_empty() {
                        last_freq.ok_or(TableError::MissingValue { line, column: name })?
                    } else if cell == MISSING {
                        return Err(TableError::MissingValue { line, column: name });
                    } else {
                        parse_number(cell).ok_or_else(|| TableError::NonNumericValue {
                            line,
                            column: name,
                            value: cell.to_string(),
                        })?
                    };
                    record.frequency_ghz = v;
                }
                Column::Tx => {
                    let tx = if cell.is_empty() {
                        last_tx
                            .clone()
                            .ok_or(TableError::MissingValue { line, column: name })?
                    } else if cell == MISSING {
                        return Err(TableError::MissingValue { line, column: name });
                    } else {
                        cell.to_string()
                    };
                    record.tx_id = tx;
                }
                Column::Rx => {
                    if is_missing(cell) {
                        return Err(TableError::MissingValue { line, column: name });
                    }
                    record.rx_id = cell.to_string();
                }
                Column::Loc => {
                    if is_missing(cell) {
                        return Err(TableError::MissingValue { line, column: name });
                    }
                    record.link_state = cell.parse().map_err(|_| TableError::InvalidLinkState {
                        line,
                        value: cell.to_string(),
                    })?;
                }
                Column::Contributor => {
                    if !is_missing(cell) {
                        record.contributor = cell.to_string();
                    }
                }
                Column::Value(param) => {
                    if is_missing(cell) {
                        if param == Parameter::TrSeparation {
                            return Err(TableError::MissingValue { line, column: name });
                        }
                        continue;
                    }
                    let v = parse_number(cell).ok_or_else(|| TableError::NonNumericValue {
                        line,
                        column: name,
                        value: cell.to_string(),
                    })?;
                    record.set_value(param, Some(v));
                }
            }
        }
        last_freq = Some(record.frequency_ghz);
        last_tx = Some(record.tx_id.clone());
        rows.push(ParsedRow { line, record });
    }

    if rows.is_empty() {
        return Err(TableError::EmptyTable);
    }
    Ok(rows)
}

fn malformed(err: &csv::Error) -> TableError {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    TableError::Malformed {
        line,
        message: err.to_string(),
    }
}

/// Parses a point-data table into a validated [`Dataset`].
pub fn parse_point_table(text: &str, metadata: &CampaignMetadata) -> Result<Dataset, TableError> {
    metadata.check()?;
    let rows = read_point_rows(text, &metadata.contributor)?;
    let mut seen = HashSet::with_capacity(rows.len());
    for row in &rows {
        let violations = validate_record(&row.record);
        if !violations.is_empty() {
            return Err(TableError::InvalidRecord {
                line: row.line,
                violations,
            });
        }
        if !seen.insert(RecordKey::of(&row.record)) {
            return Err(TableError::DuplicateKey {
                line: row.line,
                frequency_ghz: row.record.frequency_ghz,
                tx: row.record.tx_id.clone(),
                rx: row.record.rx_id.clone(),
            });
        }
    }
    let records = rows.into_iter().map(|r| r.record).collect();
    Dataset::new(metadata.clone(), records).map_err(|e| match e {
        DatasetError::Metadata(m) => TableError::Metadata(m),
        other => TableError::Malformed {
            line: 0,
            message: other.to_string(),
        },
    })
}

/// Renders a number with at least one decimal place, using the shortest
/// representation that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    let s = v.to_string();
    if s.contains('.') || !v.is_finite() {
        s
    } else {
        format!("{s}.0")
    }
}

fn format_optional(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_else(|| MISSING.to_string())
}

/// Serializes a dataset in canonical column order with every cell explicit.
///
/// A trailing `contributor` column is added only when some record's
/// contributor differs from the metadata contributor.
pub fn write_point_table(dataset: &Dataset) -> String {
    let owner = &dataset.metadata().contributor;
    let with_contributor = dataset.records().iter().any(|r| &r.contributor != owner);

    let mut writer = WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());

    let mut header: Vec<&str> = CANONICAL_COLUMNS.to_vec();
    if with_contributor {
        header.push(CONTRIBUTOR_COLUMN);
    }
    writer.write_record(&header).expect("in-memory write");

    for r in dataset.records() {
        let mut row = vec![
            format_number(r.frequency_ghz),
            r.tx_id.clone(),
            r.rx_id.clone(),
            r.link_state.to_string(),
            format_number(r.tr_separation_m),
        ];
        row.extend(
            Parameter::MEASUREMENTS
                .iter()
                .map(|p| format_optional(r.value(*p))),
        );
        if with_contributor {
            row.push(r.contributor.clone());
        }
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}
