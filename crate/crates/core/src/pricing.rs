//! Certificate pricing: the rate formula, the free-allowance phase-out
//! schedule, and per-declaration assessment.
//!
//! The rate for a good from country `i` is the carbon-price differential
//! against the EU ETS times the good's emission intensity, floored at zero.
//! During the transitional period declarations are report-only; from the
//! levy start the owed certificates phase in linearly until the full year.

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::emissions::{embedded_total, Boundary, EmbeddedEvaluator};
use crate::error::{Error, Result};
use crate::registry::{CarbonPriceTable, ExemptionList, GoodsRegistry, IntensityDefaults, Unit};
use crate::scalar::Scalar;
use crate::taxonomy::{AnnexList, CnCode, Sector, SectorMap};

/// Free-allowance phase-out schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub transitional_start: i32,
    pub levy_start: i32,
    pub full_year: i32,
}

impl Default for PhaseSchedule {
    fn default() -> Self {
        PhaseSchedule {
            transitional_start: 2023,
            levy_start: 2026,
            full_year: 2035,
        }
    }
}

impl PhaseSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.transitional_start < self.levy_start && self.levy_start <= self.full_year {
            Ok(())
        } else {
            Err(Error::Document(format!(
                "invalid phase schedule: transitional {} < levy {} <= full {} must hold",
                self.transitional_start, self.levy_start, self.full_year
            )))
        }
    }
}

/// Fraction of embedded emissions owed as certificates in `year`.
///
/// Zero before the levy starts, one after the full year, linear in between:
/// `(year - levy_start + 1) / (full_year - levy_start + 1)`. Monotone
/// non-decreasing in `year`.
pub fn phase_factor<F: Scalar>(schedule: &PhaseSchedule, year: i32) -> F {
    if year < schedule.levy_start {
        F::zero()
    } else if year > schedule.full_year {
        F::one()
    } else {
        let num = F::from_i32(year - schedule.levy_start + 1).expect("small year delta");
        let den = F::from_i32(schedule.full_year - schedule.levy_start + 1)
            .expect("small year delta");
        num / den
    }
}

/// Certificate rate in EUR per unit of product:
/// `max(0, cp_eu - cp_i) * beta`. The differential clamps at zero; rebates
/// for foreign prices above the ETS are out of scope.
pub fn cbam_rate<F: Scalar>(cp_eu: F, cp_i: F, beta: F) -> F {
    (cp_eu - cp_i).max(F::zero()) * beta
}

/// One import line as declared by the importer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportDeclaration<F> {
    pub id: String,
    pub date: NaiveDate,
    /// ISO 3166-1 alpha-2 origin country.
    pub origin: String,
    /// Registry good id, or a bare CN code for uncatalogued goods.
    pub good: String,
    /// Tonnes of product.
    pub quantity: F,
    /// Importer-declared emission intensity, tCO2e per tonne.
    pub declared_intensity: Option<F>,
    /// Carbon price already paid in the origin country, EUR per tCO2e.
    pub foreign_price_paid: Option<F>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObligationStatus {
    Exempt,
    TransitionalReportOnly,
    Priced,
    NotCovered,
}

impl std::fmt::Display for ObligationStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ObligationStatus::Exempt => "Exempt",
            ObligationStatus::TransitionalReportOnly => "TransitionalReportOnly",
            ObligationStatus::Priced => "Priced",
            ObligationStatus::NotCovered => "NotCovered",
        };
        f.write_str(s)
    }
}

/// Assessed obligation for one declaration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obligation<F> {
    pub declaration_id: String,
    pub origin: String,
    pub sector: Option<Sector>,
    pub status: ObligationStatus,
    /// Certificates owed, tCO2e. Zero unless the status is `Priced`.
    pub certificates: F,
    /// EUR per tonne of product at the applied price differential.
    pub unit_rate: F,
    /// EUR owed.
    pub cost: F,
    /// Phase-in fraction for the declaration year.
    pub phase_factor: F,
    /// Embedded emissions of the shipment, tCO2e (not phase-adjusted).
    pub embedded_tco2e: F,
    pub notes: Vec<String>,
}

/// Everything an assessment needs, loaded and validated up front.
pub struct AssessmentContext<'a, F: Scalar> {
    pub registry: &'a GoodsRegistry<F>,
    pub prices: &'a CarbonPriceTable<F>,
    pub defaults: &'a IntensityDefaults<F>,
    pub exemptions: &'a ExemptionList,
    pub annex: &'a AnnexList,
    pub sectors: &'a SectorMap,
    pub boundary: &'a Boundary,
    pub schedule: &'a PhaseSchedule,
}

/// Resolution of the declared good against the registry.
enum ResolvedGood<'a, F> {
    Catalogued(&'a crate::registry::GoodSpec<F>),
    BareCode(CnCode),
}

impl<'a, F> ResolvedGood<'a, F> {
    fn cn_code(&self) -> &CnCode {
        match self {
            ResolvedGood::Catalogued(spec) => &spec.cn_code,
            ResolvedGood::BareCode(code) => code,
        }
    }
}

fn resolve_good<'a, F: Scalar>(
    registry: &'a GoodsRegistry<F>,
    good: &str,
) -> Result<ResolvedGood<'a, F>> {
    if let Some(spec) = registry.get(good) {
        return Ok(ResolvedGood::Catalogued(spec));
    }
    match CnCode::parse(good) {
        Ok(code) => Ok(ResolvedGood::BareCode(code)),
        Err(_) => Err(Error::UnknownGood(good.to_string())),
    }
}

/// Assess a single declaration. Status resolution order: exemption, annex
/// coverage, transitional period, then pricing.
pub fn assess<F: Scalar>(
    decl: &ImportDeclaration<F>,
    ctx: &AssessmentContext<'_, F>,
) -> Result<Obligation<F>> {
    let mut evaluator = EmbeddedEvaluator::new(ctx.registry, ctx.boundary)?;
    assess_with(decl, ctx, &mut evaluator)
}

fn assess_with<F: Scalar>(
    decl: &ImportDeclaration<F>,
    ctx: &AssessmentContext<'_, F>,
    evaluator: &mut EmbeddedEvaluator<'_, F>,
) -> Result<Obligation<F>> {
    if decl.quantity < F::zero() {
        return Err(Error::NegativeQuantity {
            context: format!("quantity of declaration {:?}", decl.id),
            value: decl.quantity.to_string(),
        });
    }
    for (field, value) in [
        ("declared_intensity", decl.declared_intensity),
        ("foreign_price_eur", decl.foreign_price_paid),
    ] {
        if let Some(v) = value {
            if v < F::zero() {
                return Err(Error::NegativeQuantity {
                    context: format!("{field} of declaration {:?}", decl.id),
                    value: v.to_string(),
                });
            }
        }
    }

    let year = decl.date.year();
    let factor: F = phase_factor(ctx.schedule, year);

    // (1) Exempt origins dominate every other field; the good is resolved
    // only best-effort for sector attribution and may be unknown.
    if ctx.exemptions.is_exempt(&decl.origin) {
        let sector = resolve_good(ctx.registry, &decl.good)
            .ok()
            .map(|g| ctx.sectors.sector_of(g.cn_code()));
        return Ok(Obligation {
            declaration_id: decl.id.clone(),
            origin: decl.origin.clone(),
            sector,
            status: ObligationStatus::Exempt,
            certificates: F::zero(),
            unit_rate: F::zero(),
            cost: F::zero(),
            phase_factor: factor,
            embedded_tco2e: F::zero(),
            notes: vec!["exempt origin".to_string()],
        });
    }

    let resolved = resolve_good(ctx.registry, &decl.good)?;
    let cn = resolved.cn_code().clone();
    let sector = ctx.sectors.sector_of(&cn);

    // (2) Goods outside the annex carry no obligation.
    if !ctx.annex.is_covered(&cn) {
        return Ok(Obligation {
            declaration_id: decl.id.clone(),
            origin: decl.origin.clone(),
            sector: Some(sector),
            status: ObligationStatus::NotCovered,
            certificates: F::zero(),
            unit_rate: F::zero(),
            cost: F::zero(),
            phase_factor: factor,
            embedded_tco2e: F::zero(),
            notes: Vec::new(),
        });
    }

    // Declared quantities are tonnes; an MWh-basis good cannot be priced
    // against them.
    if let ResolvedGood::Catalogued(spec) = &resolved {
        if spec.unit != Unit::Tonnes {
            return Err(Error::UnitMismatch {
                good: spec.id.clone(),
                unit: spec.unit.to_string(),
            });
        }
    }

    let mut notes = Vec::new();

    // Intensity precedence: declared beats the registry BOM, which beats
    // the sector default.
    let beta = match decl.declared_intensity {
        Some(declared) => {
            notes.push("declared intensity".to_string());
            declared
        }
        None => match &resolved {
            ResolvedGood::Catalogued(spec) if spec.has_bom() => {
                let (intensity, truncated) = evaluator.intensity_with_truncation(&spec.id)?;
                if truncated {
                    notes.push("boundary depth truncated".to_string());
                }
                intensity
            }
            _ => {
                let intensity = ctx.defaults.default_intensity(&decl.origin, sector)?;
                notes.push("sector default intensity".to_string());
                intensity
            }
        },
    };

    let embedded = embedded_total(beta, decl.quantity)?;

    // (3) Transitional years are report-only.
    if year < ctx.schedule.levy_start {
        notes.push("transitional period: report only".to_string());
        return Ok(Obligation {
            declaration_id: decl.id.clone(),
            origin: decl.origin.clone(),
            sector: Some(sector),
            status: ObligationStatus::TransitionalReportOnly,
            certificates: F::zero(),
            unit_rate: F::zero(),
            cost: F::zero(),
            phase_factor: factor,
            embedded_tco2e: embedded,
            notes,
        });
    }

    // (4) Priced.
    let cp_eu = ctx.prices.eu_price(decl.date);
    let cp_i = match decl.foreign_price_paid {
        Some(paid) => {
            notes.push("declared foreign carbon price".to_string());
            paid
        }
        None => match ctx.prices.price_on(&decl.origin, decl.date) {
            Some(p) => p,
            None => {
                notes.push("no-scheme default price".to_string());
                F::zero()
            }
        },
    };
    if cp_i > cp_eu {
        notes.push("negative price differential clamped to zero".to_string());
    }
    let differential = (cp_eu - cp_i).max(F::zero());
    let certificates = embedded * factor;
    let cost = certificates * differential;

    Ok(Obligation {
        declaration_id: decl.id.clone(),
        origin: decl.origin.clone(),
        sector: Some(sector),
        status: ObligationStatus::Priced,
        certificates,
        unit_rate: cbam_rate(cp_eu, cp_i, beta),
        cost,
        phase_factor: factor,
        embedded_tco2e: embedded,
        notes,
    })
}

/// A row that failed assessment; batch processing collects these instead of
/// aborting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowError {
    pub declaration_id: String,
    pub message: String,
}

/// Per-(origin, sector) totals. The log column mirrors the per-industry
/// log-scale emissions rendering used in reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow<F> {
    pub origin: String,
    pub sector: Sector,
    pub certificates: F,
    pub cost: F,
    pub embedded_tco2e: F,
    /// `ln(embedded_tco2e)` when the total is positive.
    pub ln_embedded: Option<F>,
}

/// Outcome of a batch assessment: per-row obligations in input order,
/// per-row failures, and deterministic aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult<F> {
    pub obligations: Vec<Obligation<F>>,
    pub errors: Vec<RowError>,
    pub aggregates: Vec<AggregateRow<F>>,
}

/// Assess a batch. Row results equal element-wise `assess` in input order;
/// per-row errors are collected, not fatal. Aggregates accumulate in fixed
/// input order and are keyed by (origin, sector), sorted on output.
pub fn assess_batch<F: Scalar>(
    decls: &[ImportDeclaration<F>],
    ctx: &AssessmentContext<'_, F>,
) -> Result<BatchResult<F>> {
    let mut evaluator = EmbeddedEvaluator::new(ctx.registry, ctx.boundary)?;
    let mut obligations = Vec::with_capacity(decls.len());
    let mut errors = Vec::new();
    let mut totals: std::collections::BTreeMap<(String, Sector), (F, F, F)> =
        std::collections::BTreeMap::new();

    for decl in decls {
        match assess_with(decl, ctx, &mut evaluator) {
            Ok(ob) => {
                if let Some(sector) = ob.sector {
                    let entry = totals
                        .entry((ob.origin.clone(), sector))
                        .or_insert((F::zero(), F::zero(), F::zero()));
                    entry.0 = entry.0 + ob.certificates;
                    entry.1 = entry.1 + ob.cost;
                    entry.2 = entry.2 + ob.embedded_tco2e;
                }
                obligations.push(ob);
            }
            Err(err) => errors.push(RowError {
                declaration_id: decl.id.clone(),
                message: err.to_string(),
            }),
        }
    }

    let aggregates = totals
        .into_iter()
        .map(|((origin, sector), (certificates, cost, embedded))| AggregateRow {
            origin,
            sector,
            certificates,
            cost,
            embedded_tco2e: embedded,
            ln_embedded: (embedded > F::zero()).then(|| embedded.ln()),
        })
        .collect();

    Ok(BatchResult {
        obligations,
        errors,
        aggregates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::{load_registry, shipped_exemptions, shipped_intensity_defaults};
    use crate::taxonomy::shipped_taxonomy;
    use proptest::prelude::*;

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn decl(id: &str, d: &str, origin: &str, good: &str, qty: f64) -> ImportDeclaration<f64> {
        ImportDeclaration {
            id: id.to_string(),
            date: date(d),
            origin: origin.to_string(),
            good: good.to_string(),
            quantity: qty,
            declared_intensity: None,
            foreign_price_paid: None,
        }
    }

    struct Fixture {
        registry: GoodsRegistry<f64>,
        prices: CarbonPriceTable<f64>,
        defaults: IntensityDefaults<f64>,
        exemptions: ExemptionList,
        annex: AnnexList,
        sectors: SectorMap,
        boundary: Boundary,
        schedule: PhaseSchedule,
    }

    impl Fixture {
        fn new() -> Self {
            let (annex, sectors) = shipped_taxonomy();
            let registry = load_registry(
                r#"{"goods": [
                    {"id": "steel", "cn_code": "7208", "direct_intensity": 2.3},
                    {"id": "pipe", "cn_code": "7305", "direct_intensity": 0.1,
                     "inputs": [{"id": "steel", "qty": 1.02}]}
                ]}"#,
            )
            .unwrap();
            let mut prices = CarbonPriceTable::new();
            prices.push("EU", date("2022-01-01"), 80.0).unwrap();
            Fixture {
                registry,
                prices,
                defaults: shipped_intensity_defaults(),
                exemptions: shipped_exemptions(),
                boundary: Boundary::new(annex.clone()),
                annex,
                sectors,
                schedule: PhaseSchedule::default(),
            }
        }

        fn ctx(&self) -> AssessmentContext<'_, f64> {
            AssessmentContext {
                registry: &self.registry,
                prices: &self.prices,
                defaults: &self.defaults,
                exemptions: &self.exemptions,
                annex: &self.annex,
                sectors: &self.sectors,
                boundary: &self.boundary,
                schedule: &self.schedule,
            }
        }
    }

    #[test]
    fn phase_factor_endpoints() {
        let s = PhaseSchedule::default();
        assert_eq!(phase_factor::<f64>(&s, 2024), 0.0);
        assert_eq!(phase_factor::<f64>(&s, 2035), 1.0);
        assert_eq!(phase_factor::<f64>(&s, 2030), 0.5);
        assert_eq!(phase_factor::<f64>(&s, 2026), 0.1);
        assert_eq!(phase_factor::<f64>(&s, 2040), 1.0);
    }

    #[test]
    fn phase_schedule_invariants() {
        assert!(PhaseSchedule::default().validate().is_ok());
        assert!(PhaseSchedule {
            transitional_start: 2026,
            levy_start: 2026,
            full_year: 2035
        }
        .validate()
        .is_err());
        assert!(PhaseSchedule {
            transitional_start: 2023,
            levy_start: 2036,
            full_year: 2035
        }
        .validate()
        .is_err());
    }

    #[test]
    fn rate_formula() {
        assert_eq!(cbam_rate(80.0, 0.0, 2.3), 184.0);
        assert_eq!(cbam_rate(80.0, 80.0, 123.0), 0.0);
        assert_eq!(cbam_rate(35.0, 80.0, 1.9), 0.0);
    }

    #[test]
    fn efta_origin_is_exempt_whatever_else() {
        let f = Fixture::new();
        let ob = assess(&decl("D1", "2027-05-01", "NO", "steel", 50.0), &f.ctx()).unwrap();
        assert_eq!(ob.status, ObligationStatus::Exempt);
        assert_eq!(ob.cost, 0.0);
        assert_eq!(ob.certificates, 0.0);
        // even an unknown good cannot break exemption dominance
        let ob = assess(&decl("D2", "2027-05-01", "NO", "mystery-good", 50.0), &f.ctx()).unwrap();
        assert_eq!(ob.status, ObligationStatus::Exempt);
        assert_eq!(ob.sector, None);
    }

    #[test]
    fn russian_steel_2030_prices_at_9200() {
        let f = Fixture::new();
        let ob = assess(&decl("D1", "2030-03-01", "RU", "steel", 100.0), &f.ctx()).unwrap();
        assert_eq!(ob.status, ObligationStatus::Priced);
        assert!((ob.certificates - 115.0).abs() < 1e-9);
        assert!((ob.cost - 9200.0).abs() < 1e-6);
        assert_eq!(ob.phase_factor, 0.5);
        assert!((ob.embedded_tco2e - 230.0).abs() < 1e-9);
        assert!(ob.notes.iter().any(|n| n == "no-scheme default price"));
        // leaf goods price from the sector default table
        assert!(ob.notes.iter().any(|n| n == "sector default intensity"));
    }

    #[test]
    fn zero_quantity_is_priced_at_zero() {
        let f = Fixture::new();
        let ob = assess(&decl("D1", "2030-03-01", "RU", "steel", 0.0), &f.ctx()).unwrap();
        assert_eq!(ob.status, ObligationStatus::Priced);
        assert_eq!(ob.certificates, 0.0);
        assert_eq!(ob.cost, 0.0);
    }

    #[test]
    fn uncovered_goods_and_transitional_years() {
        let f = Fixture::new();
        let ob = assess(&decl("D1", "2030-03-01", "RU", "48010000", 10.0), &f.ctx()).unwrap();
        assert_eq!(ob.status, ObligationStatus::NotCovered);
        assert_eq!(ob.cost, 0.0);

        let ob = assess(&decl("D2", "2024-03-01", "RU", "steel", 10.0), &f.ctx()).unwrap();
        assert_eq!(ob.status, ObligationStatus::TransitionalReportOnly);
        assert_eq!(ob.certificates, 0.0);
        assert!((ob.embedded_tco2e - 23.0).abs() < 1e-9, "still reported");
    }

    #[test]
    fn intensity_precedence_declared_then_bom_then_default() {
        let f = Fixture::new();
        // declared wins
        let mut d = decl("D1", "2030-03-01", "RU", "pipe", 10.0);
        d.declared_intensity = Some(1.0);
        let ob = assess(&d, &f.ctx()).unwrap();
        assert!((ob.embedded_tco2e - 10.0).abs() < 1e-9);
        // BOM next: pipe = 0.1 + 1.02 * 2.3 = 2.446
        let ob = assess(&decl("D2", "2030-03-01", "RU", "pipe", 10.0), &f.ctx()).unwrap();
        assert!((ob.embedded_tco2e - 24.46).abs() < 1e-9);
        // bare CN code falls back to the sector default
        let ob = assess(&decl("D3", "2030-03-01", "RU", "7305", 10.0), &f.ctx()).unwrap();
        assert!((ob.embedded_tco2e - 23.0).abs() < 1e-9);
    }

    #[test]
    fn declared_foreign_price_reduces_cost() {
        let f = Fixture::new();
        let mut d = decl("D1", "2030-03-01", "RU", "steel", 100.0);
        d.foreign_price_paid = Some(30.0);
        let ob = assess(&d, &f.ctx()).unwrap();
        assert!((ob.cost - 115.0 * 50.0).abs() < 1e-6);
        // above the ETS price the differential clamps
        d.foreign_price_paid = Some(200.0);
        let ob = assess(&d, &f.ctx()).unwrap();
        assert_eq!(ob.cost, 0.0);
        assert!(ob
            .notes
            .iter()
            .any(|n| n.contains("clamped")));
    }

    #[test]
    fn mwh_basis_goods_reject_tonnage_declarations() {
        let f = Fixture::new();
        let registry = load_registry::<f64>(
            r#"{"goods": [{"id": "power", "cn_code": "2716", "direct_intensity": 0.4, "unit": "MWh"}]}"#,
        )
        .unwrap();
        let ctx = AssessmentContext {
            registry: &registry,
            ..f.ctx()
        };
        assert!(matches!(
            assess(&decl("D1", "2030-03-01", "RU", "power", 10.0), &ctx),
            Err(Error::UnitMismatch { .. })
        ));
    }

    #[test]
    fn unknown_goods_and_negative_fields_error() {
        let f = Fixture::new();
        assert!(matches!(
            assess(&decl("D1", "2030-03-01", "RU", "nonsense", 1.0), &f.ctx()),
            Err(Error::UnknownGood(_))
        ));
        assert!(matches!(
            assess(&decl("D1", "2030-03-01", "RU", "steel", -1.0), &f.ctx()),
            Err(Error::NegativeQuantity { .. })
        ));
        // US steel uses the wildcard row, so it assesses fine
        let ob = assess(&decl("D1", "2030-03-01", "US", "steel", 1.0), &f.ctx()).unwrap();
        assert_eq!(ob.status, ObligationStatus::Priced);
        // but a sector with no wildcard row propagates MissingDefault
        assert!(matches!(
            assess(&decl("D2", "2030-03-01", "US", "2523", 1.0), &f.ctx()),
            Err(Error::MissingDefault { .. })
        ));
    }

    #[test]
    fn batch_composes_and_aggregates() {
        let f = Fixture::new();
        let decls = vec![
            decl("D1", "2027-05-01", "NO", "steel", 50.0),
            decl("D2", "2030-03-01", "RU", "steel", 100.0),
            decl("D3", "2030-03-01", "RU", "steel", 0.0),
            decl("D4", "2030-03-01", "RU", "nonsense", 1.0),
        ];
        let batch = assess_batch(&decls, &f.ctx()).unwrap();
        assert_eq!(batch.obligations.len(), 3);
        assert_eq!(batch.errors.len(), 1);
        assert_eq!(batch.errors[0].declaration_id, "D4");
        // element-wise equality with single assess
        for (i, ob) in batch.obligations.iter().enumerate() {
            let single = assess(&decls[i], &f.ctx()).unwrap();
            assert_eq!(*ob, single);
        }
        let ru = batch
            .aggregates
            .iter()
            .find(|a| a.origin == "RU" && a.sector == Sector::IronSteel)
            .unwrap();
        assert!((ru.cost - 9200.0).abs() < 1e-6);
        assert!((ru.embedded_tco2e - 230.0).abs() < 1e-9);
        assert!((ru.ln_embedded.unwrap() - 230.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn empty_batch_is_empty_report() {
        let f = Fixture::new();
        let batch = assess_batch::<f64>(&[], &f.ctx()).unwrap();
        assert!(batch.obligations.is_empty());
        assert!(batch.errors.is_empty());
        assert!(batch.aggregates.is_empty());
    }

    #[test]
    fn ln_column_matches_independent_value() {
        // ln(1000) computed independently = 6.907755278982137
        let f = Fixture::new();
        let mut d = decl("D1", "2030-03-01", "RU", "steel", 1000.0);
        d.declared_intensity = Some(1.0);
        let batch = assess_batch(&[d], &f.ctx()).unwrap();
        let agg = &batch.aggregates[0];
        assert!((agg.embedded_tco2e - 1000.0).abs() < 1e-9);
        assert!((agg.ln_embedded.unwrap() - 6.907755278982137).abs() < 1e-12);
    }

    proptest! {
        // cost is monotone: non-decreasing in beta, quantity, cp_eu and
        // year; non-increasing in cp_i.
        #[test]
        fn cost_monotonicity(
            beta in 0.0f64..10.0,
            d_beta in 0.0f64..5.0,
            qty in 0.0f64..1e4,
            d_qty in 0.0f64..1e3,
            cp_eu in 0.0f64..200.0,
            d_eu in 0.0f64..100.0,
            cp_i in 0.0f64..200.0,
            d_i in 0.0f64..100.0,
            year in 2020i32..2040,
        ) {
            let s = PhaseSchedule::default();
            let cost = |b: f64, q: f64, eu: f64, i: f64, y: i32| {
                q * b * phase_factor::<f64>(&s, y) * (eu - i).max(0.0)
            };
            let base = cost(beta, qty, cp_eu, cp_i, year);
            prop_assert!(base >= 0.0);
            prop_assert!(cost(beta + d_beta, qty, cp_eu, cp_i, year) >= base);
            prop_assert!(cost(beta, qty + d_qty, cp_eu, cp_i, year) >= base);
            prop_assert!(cost(beta, qty, cp_eu + d_eu, cp_i, year) >= base);
            prop_assert!(cost(beta, qty, cp_eu, cp_i + d_i, year) <= base);
            prop_assert!(cost(beta, qty, cp_eu, cp_i, year + 1) >= base);
        }

        // phase factor is monotone non-decreasing and clamped to [0, 1]
        #[test]
        fn phase_factor_monotone(year in 1990i32..2100) {
            let s = PhaseSchedule::default();
            let a: f64 = phase_factor(&s, year);
            let b: f64 = phase_factor(&s, year + 1);
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(a <= b);
        }

        // batch aggregates are invariant under permutation of declarations
        #[test]
        fn aggregates_permutation_invariant(seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let f = Fixture::new();
            let mut decls: Vec<ImportDeclaration<f64>> = (0..20)
                .map(|i| {
                    let mut d = decl(
                        &format!("D{i}"),
                        if i % 2 == 0 { "2030-03-01" } else { "2027-07-15" },
                        if i % 3 == 0 { "RU" } else { "CN" },
                        if i % 4 == 0 { "pipe" } else { "steel" },
                        (i as f64) * 7.5,
                    );
                    if i % 5 == 0 {
                        d.declared_intensity = Some(1.5);
                    }
                    d
                })
                .collect();
            let before = assess_batch(&decls, &f.ctx()).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            decls.shuffle(&mut rng);
            let after = assess_batch(&decls, &f.ctx()).unwrap();
            prop_assert_eq!(before.aggregates.len(), after.aggregates.len());
            for (a, b) in before.aggregates.iter().zip(after.aggregates.iter()) {
                prop_assert_eq!(&a.origin, &b.origin);
                prop_assert_eq!(a.sector, b.sector);
                prop_assert!((a.cost - b.cost).abs() < 1e-6);
                prop_assert!((a.certificates - b.certificates).abs() < 1e-6);
            }
        }
    }
}
