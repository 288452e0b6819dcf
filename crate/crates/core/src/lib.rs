//! Deterministic CBAM obligation engine.
//!
//! Assesses EU CBAM certificate obligations for import declarations:
//! CN-code coverage against an annex list, embedded-emissions aggregation
//! over bill-of-materials graphs with configurable system boundaries,
//! price-differential certificate costing with the free-allowance
//! phase-out, and trade-flow surveillance for circumvention patterns.
//!
//! The numeric kernel is generic over the scalar type (see [`Scalar`]);
//! the aliases below pin everything to `f64`, which is what the CLI and
//! the loaders use.

pub mod calendar;
pub mod emissions;
pub mod error;
pub mod ingest;
pub mod pricing;
pub mod registry;
pub mod report;
pub mod scalar;
pub mod surveillance;
pub mod taxonomy;

pub use calendar::YearMonth;
pub use error::{Error, Result};
pub use scalar::{format_eur, format_tco2e, Scalar};
pub use taxonomy::{load_taxonomy, shipped_taxonomy, AnnexList, CnCode, Sector, SectorMap};

pub use emissions::Boundary;
pub use pricing::{ObligationStatus, PhaseSchedule};
pub use registry::{load_exemptions, shipped_exemptions, ExemptionList, Unit};
pub use report::{ReportFormat, StatusSummary};

// Concrete f64 instantiations of the generic core.
pub type GoodSpec = registry::GoodSpec<f64>;
pub type GoodsRegistry = registry::GoodsRegistry<f64>;
pub type CarbonPriceTable = registry::CarbonPriceTable<f64>;
pub type IntensityDefaults = registry::IntensityDefaults<f64>;
pub type EmbeddedResult = emissions::EmbeddedResult<f64>;
pub type ImportDeclaration = pricing::ImportDeclaration<f64>;
pub type Obligation = pricing::Obligation<f64>;
pub type AggregateRow = pricing::AggregateRow<f64>;
pub type BatchResult = pricing::BatchResult<f64>;
pub type AssessmentContext<'a> = pricing::AssessmentContext<'a, f64>;
pub type TradeFlowSeries = surveillance::TradeFlowSeries<f64>;
pub type SurveillanceParams = surveillance::SurveillanceParams<f64>;
pub type CircumventionAlert = surveillance::CircumventionAlert<f64>;
pub type ScanResult = surveillance::ScanResult<f64>;
pub type RunReport = report::RunReport<f64>;
pub type ParsedDeclarations = ingest::ParsedDeclarations<f64>;

/// Shipped intensity defaults at `f64`.
pub fn shipped_intensity_defaults() -> IntensityDefaults {
    registry::shipped_intensity_defaults()
}

/// Load a goods registry document at `f64`.
pub fn load_registry(json: &str) -> Result<GoodsRegistry> {
    registry::load_registry(json)
}

/// Load a price table CSV at `f64`.
pub fn load_prices(csv_text: &str) -> Result<CarbonPriceTable> {
    registry::load_prices(csv_text)
}

/// Load an intensity defaults CSV at `f64`.
pub fn load_intensity_defaults(csv_text: &str) -> Result<IntensityDefaults> {
    registry::load_intensity_defaults(csv_text)
}
