//! Strict file ingestion.
//!
//! Dialect, fixed once: comma-separated, double-quote escaping, UTF-8,
//! LF or CRLF, header row mandatory and matched exactly. Malformed rows
//! become line-numbered diagnostics, never panics; only a missing or wrong
//! header is fatal.

use serde::{Deserialize, Serialize};

use crate::calendar::YearMonth;
use crate::error::{Error, Result};
use crate::pricing::ImportDeclaration;
use crate::scalar::Scalar;
use crate::surveillance::TradeFlowSeries;
use crate::taxonomy::CnCode;

pub const DECLARATIONS_HEADER: &str =
    "id,date,origin,good,quantity_t,declared_intensity,foreign_price_eur";
pub const FLOWS_HEADER: &str = "country,cn_code,month,quantity_t";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagnosticKind {
    BadDate,
    BadNumber,
    UnknownColumnCount,
    NegativeQuantity,
    BadEncoding,
    Malformed,
}

/// One rejected row, with the 1-based line it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowDiagnostic {
    pub line: u64,
    pub kind: DiagnosticKind,
    pub message: String,
}

/// Outcome of parsing a declarations stream. Every data row is accounted
/// for: `declarations.len() + diagnostics.len() == rows_seen`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedDeclarations<F> {
    pub declarations: Vec<ImportDeclaration<F>>,
    pub diagnostics: Vec<RowDiagnostic>,
    pub rows_seen: usize,
}

fn strip_bom(input: &[u8]) -> &[u8] {
    input.strip_prefix(b"\xef\xbb\xbf").unwrap_or(input)
}

fn field_str(record: &csv::ByteRecord, idx: usize) -> std::result::Result<&str, ()> {
    std::str::from_utf8(&record[idx]).map(str::trim).map_err(|_| ())
}

fn record_line(record: &csv::ByteRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

/// Parse a declarations CSV. Header:
/// `id,date,origin,good,quantity_t,declared_intensity,foreign_price_eur`.
/// Optional fields are empty strings. Total on arbitrary input: bad rows
/// come back as diagnostics, only the header is fatal.
pub fn parse_declarations<F: Scalar>(input: &[u8]) -> Result<ParsedDeclarations<F>> {
    let expected: Vec<&str> = DECLARATIONS_HEADER.split(',').collect();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(strip_bom(input));

    let missing_header = || Error::MissingHeader {
        expected: DECLARATIONS_HEADER.to_string(),
    };
    let headers = reader.byte_headers().map_err(|_| missing_header())?;
    let header_fields: Vec<&[u8]> = headers.iter().collect();
    if header_fields != expected.iter().map(|s| s.as_bytes()).collect::<Vec<_>>() {
        return Err(missing_header());
    }

    let mut declarations = Vec::new();
    let mut diagnostics = Vec::new();
    let mut rows_seen = 0usize;

    let mut record = csv::ByteRecord::new();
    loop {
        match reader.read_byte_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                rows_seen += 1;
                match parse_declaration_row::<F>(&record) {
                    Ok(decl) => declarations.push(decl),
                    Err(diag) => diagnostics.push(diag),
                }
            }
            Err(err) => {
                // reader-level fault; charge it to one row and stop, the
                // rest of the stream is unreadable
                rows_seen += 1;
                diagnostics.push(RowDiagnostic {
                    line: err
                        .position()
                        .map(|p| p.line())
                        .unwrap_or(rows_seen as u64 + 1),
                    kind: DiagnosticKind::Malformed,
                    message: "unreadable record".to_string(),
                });
                break;
            }
        }
    }

    Ok(ParsedDeclarations {
        declarations,
        diagnostics,
        rows_seen,
    })
}

fn parse_declaration_row<F: Scalar>(
    record: &csv::ByteRecord,
) -> std::result::Result<ImportDeclaration<F>, RowDiagnostic> {
    let line = record_line(record);
    let diag = |kind: DiagnosticKind, message: String| RowDiagnostic {
        line,
        kind,
        message,
    };

    if record.len() != 7 {
        return Err(diag(
            DiagnosticKind::UnknownColumnCount,
            format!("expected 7 columns, got {}", record.len()),
        ));
    }
    let mut fields = Vec::with_capacity(7);
    for idx in 0..7 {
        match field_str(record, idx) {
            Ok(s) => fields.push(s),
            Err(()) => {
                return Err(diag(
                    DiagnosticKind::BadEncoding,
                    format!("column {} is not valid UTF-8", idx + 1),
                ))
            }
        }
    }

    let date = chrono::NaiveDate::parse_from_str(fields[1], "%Y-%m-%d")
        .map_err(|_| diag(DiagnosticKind::BadDate, format!("bad date {:?}", fields[1])))?;

    let number = |raw: &str, name: &str| -> std::result::Result<F, RowDiagnostic> {
        let value: F = raw
            .parse()
            .map_err(|_| diag(DiagnosticKind::BadNumber, format!("bad {name} {raw:?}")))?;
        if !value.is_finite() {
            return Err(diag(
                DiagnosticKind::BadNumber,
                format!("{name} {raw:?} is not finite"),
            ));
        }
        if value < F::zero() {
            return Err(diag(
                DiagnosticKind::NegativeQuantity,
                format!("{name} {raw:?} is negative"),
            ));
        }
        Ok(value)
    };

    let quantity = number(fields[4], "quantity_t")?;
    let optional = |raw: &str, name: &str| -> std::result::Result<Option<F>, RowDiagnostic> {
        if raw.is_empty() {
            Ok(None)
        } else {
            number(raw, name).map(Some)
        }
    };
    let declared_intensity = optional(fields[5], "declared_intensity")?;
    let foreign_price_paid = optional(fields[6], "foreign_price_eur")?;

    Ok(ImportDeclaration {
        id: fields[0].to_string(),
        date,
        origin: fields[2].to_string(),
        good: fields[3].to_string(),
        quantity,
        declared_intensity,
        foreign_price_paid,
    })
}

/// Parse a flows CSV (`country,cn_code,month,quantity_t`) into one series
/// per (country, CN code) lane, sorted for deterministic scans. Unlike the
/// declarations stream this is operator reference data: any bad row is
/// fatal.
pub fn parse_flows<F: Scalar>(input: &[u8]) -> Result<Vec<TradeFlowSeries<F>>> {
    let expected: Vec<&str> = FLOWS_HEADER.split(',').collect();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(strip_bom(input));
    let missing_header = || Error::MissingHeader {
        expected: FLOWS_HEADER.to_string(),
    };
    let headers = reader.byte_headers().map_err(|_| missing_header())?;
    if headers.iter().collect::<Vec<_>>() != expected.iter().map(|s| s.as_bytes()).collect::<Vec<_>>()
    {
        return Err(missing_header());
    }

    let mut lanes: std::collections::BTreeMap<(String, CnCode), Vec<(YearMonth, F)>> =
        std::collections::BTreeMap::new();
    for record in reader.byte_records() {
        let record = record.map_err(|e| Error::Document(e.to_string()))?;
        let line = record_line(&record);
        if record.len() != 4 {
            return Err(Error::Document(format!(
                "line {line}: expected 4 columns, got {}",
                record.len()
            )));
        }
        let field = |idx: usize| {
            field_str(&record, idx)
                .map_err(|_| Error::Document(format!("line {line}: column {} not UTF-8", idx + 1)))
        };
        let country = field(0)?.to_string();
        let cn_code = CnCode::parse(field(1)?)?;
        let month: YearMonth = field(2)?.parse()?;
        let quantity: F = field(3)?
            .parse()
            .map_err(|_| Error::Document(format!("line {line}: bad quantity")))?;
        if !quantity.is_finite() || quantity < F::zero() {
            return Err(Error::Document(format!("line {line}: bad quantity")));
        }
        lanes.entry((country, cn_code)).or_default().push((month, quantity));
    }

    lanes
        .into_iter()
        .map(|((country, cn_code), mut points)| {
            points.sort_by_key(|(m, _)| *m);
            TradeFlowSeries::new(country, cn_code, points)
        })
        .collect()
}
