//! Assessment report assembly and rendering.
//!
//! Two renderings of the same report: an aligned text table with 2-decimal
//! EUR and 6-decimal tCO2e columns, and a JSON document that re-parses to
//! an equal report. Both are byte-deterministic for identical inputs.

use serde::{Deserialize, Serialize};

use crate::ingest::RowDiagnostic;
use crate::pricing::{AggregateRow, BatchResult, Obligation, ObligationStatus, RowError};
use crate::scalar::{format_eur, format_tco2e, Scalar};

/// Row/error accounting per status.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusSummary {
    pub exempt: u64,
    pub transitional_report_only: u64,
    pub priced: u64,
    pub not_covered: u64,
    pub errors: u64,
}

/// One rejected input: either a parse diagnostic (with a line number) or a
/// failed assessment (with the declaration id).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportError {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub line: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub declaration_id: Option<String>,
    pub message: String,
}

impl From<&RowDiagnostic> for ReportError {
    fn from(diag: &RowDiagnostic) -> Self {
        ReportError {
            line: Some(diag.line),
            declaration_id: None,
            message: format!("{:?}: {}", diag.kind, diag.message),
        }
    }
}

impl From<&RowError> for ReportError {
    fn from(err: &RowError) -> Self {
        ReportError {
            line: None,
            declaration_id: Some(err.declaration_id.clone()),
            message: err.message.clone(),
        }
    }
}

/// The full outcome of one `assess` run:
/// `rows.len() + errors.len()` equals the number of input rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport<F> {
    pub rows: Vec<Obligation<F>>,
    pub aggregates: Vec<AggregateRow<F>>,
    pub summary: StatusSummary,
    pub errors: Vec<ReportError>,
}

impl<F: Scalar> RunReport<F> {
    /// Assemble a report from a batch outcome plus the parse diagnostics of
    /// the rows that never became declarations.
    pub fn assemble(batch: BatchResult<F>, parse_diagnostics: &[RowDiagnostic]) -> Self {
        let mut summary = StatusSummary::default();
        for row in &batch.obligations {
            match row.status {
                ObligationStatus::Exempt => summary.exempt += 1,
                ObligationStatus::TransitionalReportOnly => summary.transitional_report_only += 1,
                ObligationStatus::Priced => summary.priced += 1,
                ObligationStatus::NotCovered => summary.not_covered += 1,
            }
        }
        let mut errors: Vec<ReportError> =
            parse_diagnostics.iter().map(ReportError::from).collect();
        errors.extend(batch.errors.iter().map(ReportError::from));
        summary.errors = errors.len() as u64;
        RunReport {
            rows: batch.obligations,
            aggregates: batch.aggregates,
            summary,
            errors,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            other => Err(crate::error::Error::Parse(format!(
                "unknown format {other:?} (expected text or json)"
            ))),
        }
    }
}

/// Render a report. The JSON form round-trips losslessly through
/// `serde_json`; the text form is the fixed-width operator view.
pub fn render_report<F: Scalar + Serialize>(report: &RunReport<F>, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut out =
                serde_json::to_string_pretty(report).expect("report serialization cannot fail");
            out.push('\n');
            out
        }
        ReportFormat::Text => render_text(report),
    }
}

/// Left-pads numbers, right-pads text, two spaces between columns.
fn render_table(header: &[&str], rows: &[Vec<String>], numeric: &[bool]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let emit = |out: &mut String, cells: &[String]| {
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            let pad = widths[i].saturating_sub(cell.len());
            if numeric[i] {
                for _ in 0..pad {
                    out.push(' ');
                }
                out.push_str(cell);
            } else {
                out.push_str(cell);
                if i + 1 < cells.len() {
                    for _ in 0..pad {
                        out.push(' ');
                    }
                }
            }
        }
        out.push('\n');
    };
    let header_cells: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    emit(&mut out, &header_cells);
    for row in rows {
        emit(&mut out, row);
    }
    out
}

fn render_text<F: Scalar>(report: &RunReport<F>) -> String {
    let mut out = String::new();

    out.push_str("== Obligations ==\n");
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.declaration_id.clone(),
                r.origin.clone(),
                r.sector.map(|s| s.to_string()).unwrap_or_else(|| "-".to_string()),
                r.status.to_string(),
                format!("{:.2}", r.phase_factor),
                format_tco2e(r.embedded_tco2e),
                format_tco2e(r.certificates),
                format_eur(r.unit_rate),
                format_eur(r.cost),
                r.notes.join("; "),
            ]
        })
        .collect();
    out.push_str(&render_table(
        &[
            "id",
            "origin",
            "sector",
            "status",
            "phase",
            "embedded_tco2e",
            "certificates_tco2e",
            "unit_rate_eur_t",
            "cost_eur",
            "notes",
        ],
        &rows,
        &[false, false, false, false, true, true, true, true, true, false],
    ));

    out.push_str("\n== Aggregates (origin x sector) ==\n");
    let agg_rows: Vec<Vec<String>> = report
        .aggregates
        .iter()
        .map(|a| {
            vec![
                a.origin.clone(),
                a.sector.to_string(),
                format_tco2e(a.embedded_tco2e),
                format_tco2e(a.certificates),
                format_eur(a.cost),
                a.ln_embedded.map(format_tco2e).unwrap_or_default(),
            ]
        })
        .collect();
    out.push_str(&render_table(
        &[
            "origin",
            "sector",
            "embedded_tco2e",
            "certificates_tco2e",
            "cost_eur",
            "ln_embedded",
        ],
        &agg_rows,
        &[false, false, true, true, true, true],
    ));

    out.push_str("\n== Summary ==\n");
    let s = &report.summary;
    out.push_str(&format!(
        "priced: {}  transitional: {}  exempt: {}  not_covered: {}  errors: {}\n",
        s.priced, s.transitional_report_only, s.exempt, s.not_covered, s.errors
    ));

    if !report.errors.is_empty() {
        out.push_str("\n== Errors ==\n");
        for e in &report.errors {
            match (&e.line, &e.declaration_id) {
                (Some(line), _) => out.push_str(&format!("line {line}: {}\n", e.message)),
                (None, Some(id)) => out.push_str(&format!("declaration {id}: {}\n", e.message)),
                (None, None) => out.push_str(&format!("{}\n", e.message)),
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::Sector;

    fn sample_report() -> RunReport<f64> {
        let rows = vec![Obligation {
            declaration_id: "D1".to_string(),
            origin: "RU".to_string(),
            sector: Some(Sector::IronSteel),
            status: ObligationStatus::Priced,
            certificates: 115.0,
            unit_rate: 184.0,
            cost: 9200.0,
            phase_factor: 0.5,
            embedded_tco2e: 230.0,
            notes: vec!["no-scheme default price".to_string()],
        }];
        let aggregates = vec![AggregateRow {
            origin: "RU".to_string(),
            sector: Sector::IronSteel,
            certificates: 115.0,
            cost: 9200.0,
            embedded_tco2e: 1000.0,
            ln_embedded: Some(1000.0f64.ln()),
        }];
        RunReport {
            rows,
            aggregates,
            summary: StatusSummary {
                priced: 1,
                ..Default::default()
            },
            errors: vec![ReportError {
                line: Some(3),
                declaration_id: None,
                message: "BadDate: bad date \"2030-13-45\"".to_string(),
            }],
        }
    }

    #[test]
    fn text_rendering_pins_decimal_columns() {
        let text = render_report(&sample_report(), ReportFormat::Text);
        assert!(text.contains("9200.00"), "{text}");
        assert!(text.contains("230.000000"));
        assert!(text.contains("6.907755"));
        assert!(text.contains("priced: 1"));
        assert!(text.contains("line 3:"));
    }

    // full-text golden: any drift in alignment or decimals shows up here
    #[test]
    fn text_rendering_matches_golden() {
        let mut report = sample_report();
        report.errors.clear();
        report.aggregates[0].embedded_tco2e = 230.0;
        report.aggregates[0].ln_embedded = Some(230.0f64.ln());
        let expected = "\
== Obligations ==
id  origin  sector     status  phase  embedded_tco2e  certificates_tco2e  unit_rate_eur_t  cost_eur  notes
D1  RU      IronSteel  Priced   0.50      230.000000          115.000000           184.00   9200.00  no-scheme default price

== Aggregates (origin x sector) ==
origin  sector     embedded_tco2e  certificates_tco2e  cost_eur  ln_embedded
RU      IronSteel      230.000000          115.000000   9200.00     5.438079

== Summary ==
priced: 1  transitional: 0  exempt: 0  not_covered: 0  errors: 0
";
        assert_eq!(render_report(&report, ReportFormat::Text), expected);
    }

    #[test]
    fn empty_report_is_headers_only() {
        let empty = RunReport::<f64> {
            rows: vec![],
            aggregates: vec![],
            summary: StatusSummary::default(),
            errors: vec![],
        };
        let text = render_report(&empty, ReportFormat::Text);
        assert!(text.contains("id"));
        assert!(text.contains("origin"));
        let json = render_report(&empty, ReportFormat::Json);
        assert!(json.contains("\"rows\": []"));
    }

    #[test]
    fn json_round_trips_losslessly() {
        let report = sample_report();
        let json = render_report(&report, ReportFormat::Json);
        let back: RunReport<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    // every input row lands in exactly one of rows/errors
    #[test]
    fn assemble_accounts_for_every_input_row() {
        use crate::ingest::{DiagnosticKind, RowDiagnostic};
        use crate::pricing::{BatchResult, RowError};

        let batch = BatchResult::<f64> {
            obligations: sample_report().rows,
            errors: vec![RowError {
                declaration_id: "D9".to_string(),
                message: "unknown good \"ghost\"".to_string(),
            }],
            aggregates: vec![],
        };
        let diags = vec![RowDiagnostic {
            line: 4,
            kind: DiagnosticKind::BadNumber,
            message: "bad quantity_t \"x\"".to_string(),
        }];
        let input_rows = batch.obligations.len() + batch.errors.len() + diags.len();
        let report = RunReport::assemble(batch, &diags);
        assert_eq!(report.rows.len() + report.errors.len(), input_rows);
        assert_eq!(report.summary.errors, 2);
        assert_eq!(report.summary.priced, 1);
    }

    // regression: extreme exponents round-trip bit-exactly
    #[test]
    fn json_round_trips_extreme_floats() {
        for v in [
            -4.1062329331393885e-258_f64,
            2.2250738585072014e-308,
            1.7976931348623157e308,
            5e-324,
        ] {
            let s = serde_json::to_string(&v).unwrap();
            let back: f64 = serde_json::from_str(&s).unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "{v}");
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let report = sample_report();
        assert_eq!(
            render_report(&report, ReportFormat::Text),
            render_report(&report, ReportFormat::Text)
        );
        assert_eq!(
            render_report(&report, ReportFormat::Json),
            render_report(&report, ReportFormat::Json)
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_status() -> impl Strategy<Value = ObligationStatus> {
            prop::sample::select(vec![
                ObligationStatus::Exempt,
                ObligationStatus::TransitionalReportOnly,
                ObligationStatus::Priced,
                ObligationStatus::NotCovered,
            ])
        }

        fn arb_sector() -> impl Strategy<Value = Option<Sector>> {
            prop::sample::select(vec![
                None,
                Some(Sector::Cement),
                Some(Sector::IronSteel),
                Some(Sector::Aluminium),
                Some(Sector::Other),
            ])
        }

        fn arb_obligation() -> impl Strategy<Value = Obligation<f64>> {
            (
                "[A-Za-z0-9-]{1,8}",
                "[A-Z]{2}",
                arb_sector(),
                arb_status(),
                prop::array::uniform4(any::<f64>().prop_filter("finite", |v| v.is_finite())),
                proptest::collection::vec("[a-z ]{0,12}", 0..3),
            )
                .prop_map(|(id, origin, sector, status, nums, notes)| Obligation {
                    declaration_id: id,
                    origin,
                    sector,
                    status,
                    certificates: nums[0],
                    unit_rate: nums[1],
                    cost: nums[2],
                    phase_factor: 0.5,
                    embedded_tco2e: nums[3],
                    notes,
                })
        }

        proptest! {
            // JSON round-trip is lossless for arbitrary reports.
            #[test]
            fn json_round_trip_arbitrary(
                rows in proptest::collection::vec(arb_obligation(), 0..6),
                embedded in any::<f64>().prop_filter("finite", |v| v.is_finite()),
                line in proptest::option::of(any::<u64>()),
            ) {
                let aggregates = vec![AggregateRow {
                    origin: "XX".to_string(),
                    sector: Sector::Other,
                    certificates: 1.0,
                    cost: 2.0,
                    embedded_tco2e: embedded,
                    ln_embedded: (embedded > 0.0).then(|| embedded.ln()),
                }];
                let report = RunReport {
                    rows,
                    aggregates,
                    summary: StatusSummary::default(),
                    errors: vec![ReportError {
                        line,
                        declaration_id: line.is_none().then(|| "D1".to_string()),
                        message: "diag".to_string(),
                    }],
                };
                let json = render_report(&report, ReportFormat::Json);
                let back: RunReport<f64> = serde_json::from_str(&json).unwrap();
                prop_assert_eq!(back, report);
            }
        }
    }
}
