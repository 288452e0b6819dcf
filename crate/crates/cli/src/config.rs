//! Engine configuration: one JSON document plus flag overrides.
//!
//! Resolution order for every setting: command-line flag, then config
//! field, then the shipped default. Paths inside a config file are
//! resolved relative to the file itself.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use cbam_core::emissions::Boundary;
use cbam_core::{
    load_exemptions, load_intensity_defaults, load_prices, load_registry, load_taxonomy,
    shipped_exemptions, shipped_intensity_defaults, shipped_taxonomy, AnnexList,
    AssessmentContext, CarbonPriceTable, ExemptionList, GoodsRegistry, IntensityDefaults,
    PhaseSchedule, ReportFormat, SectorMap, SurveillanceParams,
};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleConfig {
    transitional_start: Option<i32>,
    levy_start: Option<i32>,
    full_year: Option<i32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundaryConfig {
    include_scope2: Option<bool>,
    max_depth: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SurveillanceConfig {
    window_months: Option<usize>,
    theta_dec: Option<f64>,
    theta_inc: Option<f64>,
    min_baseline: Option<f64>,
}

/// On-disk config document. Every field optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    registry: Option<PathBuf>,
    annex: Option<PathBuf>,
    prices: Option<PathBuf>,
    defaults: Option<PathBuf>,
    exemptions: Option<PathBuf>,
    #[serde(default)]
    schedule: ScheduleConfig,
    #[serde(default)]
    boundary: BoundaryConfig,
    #[serde(default)]
    surveillance: SurveillanceConfig,
    format: Option<String>,
}

/// Flag-level overrides collected from the command line.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub registry: Option<PathBuf>,
    pub annex: Option<PathBuf>,
    pub prices: Option<PathBuf>,
    pub defaults: Option<PathBuf>,
    pub exemptions: Option<PathBuf>,
    pub transitional_start: Option<i32>,
    pub levy_start: Option<i32>,
    pub full_year: Option<i32>,
    pub include_scope2: Option<bool>,
    pub max_depth: Option<u32>,
    pub window_months: Option<usize>,
    pub theta_dec: Option<f64>,
    pub theta_inc: Option<f64>,
    pub min_baseline: Option<f64>,
    pub format: Option<String>,
}

/// Fully resolved, validated engine state.
pub struct Engine {
    pub registry: GoodsRegistry,
    pub prices: CarbonPriceTable,
    pub defaults: IntensityDefaults,
    pub exemptions: ExemptionList,
    pub annex: AnnexList,
    pub sectors: SectorMap,
    pub boundary: Boundary,
    pub schedule: PhaseSchedule,
    pub surveillance: SurveillanceParams,
    pub format: ReportFormat,
}

impl Engine {
    pub fn ctx(&self) -> AssessmentContext<'_> {
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

fn read_file(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn resolve_path(base: Option<&Path>, path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match base {
        Some(dir) => dir.join(path),
        None => path.to_path_buf(),
    }
}

/// Build the engine from an optional config file and the flag overrides.
pub fn build_engine(config_path: Option<&Path>, flags: &Overrides) -> Result<Engine, String> {
    let (file, base): (ConfigFile, Option<PathBuf>) = match config_path {
        Some(path) => {
            let text = read_file(path)?;
            let parsed: ConfigFile = serde_json::from_str(&text)
                .map_err(|e| format!("bad config {}: {e}", path.display()))?;
            (parsed, path.parent().map(Path::to_path_buf))
        }
        None => (ConfigFile::default(), None),
    };
    let base = base.as_deref();

    let pick_path = |flag: &Option<PathBuf>, cfg: &Option<PathBuf>| -> Option<PathBuf> {
        flag.clone()
            .or_else(|| cfg.as_ref().map(|p| resolve_path(base, p)))
    };

    let (annex, sectors) = match pick_path(&flags.annex, &file.annex) {
        Some(path) => load_taxonomy(&read_file(&path)?).map_err(|e| e.to_string())?,
        None => shipped_taxonomy(),
    };
    let registry = match pick_path(&flags.registry, &file.registry) {
        Some(path) => load_registry(&read_file(&path)?).map_err(|e| e.to_string())?,
        None => GoodsRegistry::new(Vec::new()).map_err(|e| e.to_string())?,
    };
    let prices = match pick_path(&flags.prices, &file.prices) {
        Some(path) => load_prices(&read_file(&path)?).map_err(|e| e.to_string())?,
        None => CarbonPriceTable::new(),
    };
    let defaults = match pick_path(&flags.defaults, &file.defaults) {
        Some(path) => load_intensity_defaults(&read_file(&path)?).map_err(|e| e.to_string())?,
        None => shipped_intensity_defaults(),
    };
    let exemptions = match pick_path(&flags.exemptions, &file.exemptions) {
        Some(path) => load_exemptions(&read_file(&path)?).map_err(|e| e.to_string())?,
        None => shipped_exemptions(),
    };

    let base_schedule = PhaseSchedule::default();
    let schedule = PhaseSchedule {
        transitional_start: flags
            .transitional_start
            .or(file.schedule.transitional_start)
            .unwrap_or(base_schedule.transitional_start),
        levy_start: flags
            .levy_start
            .or(file.schedule.levy_start)
            .unwrap_or(base_schedule.levy_start),
        full_year: flags
            .full_year
            .or(file.schedule.full_year)
            .unwrap_or(base_schedule.full_year),
    };
    schedule.validate().map_err(|e| e.to_string())?;

    let mut boundary = Boundary::new(annex.clone());
    boundary.include_scope2 = flags
        .include_scope2
        .or(file.boundary.include_scope2)
        .unwrap_or(false);
    boundary.max_depth = flags.max_depth.or(file.boundary.max_depth);
    boundary.validate().map_err(|e| e.to_string())?;

    let base_params = SurveillanceParams::default();
    let surveillance = SurveillanceParams {
        window_months: flags
            .window_months
            .or(file.surveillance.window_months)
            .unwrap_or(base_params.window_months),
        theta_dec: flags
            .theta_dec
            .or(file.surveillance.theta_dec)
            .unwrap_or(base_params.theta_dec),
        theta_inc: flags
            .theta_inc
            .or(file.surveillance.theta_inc)
            .unwrap_or(base_params.theta_inc),
        min_baseline: flags
            .min_baseline
            .or(file.surveillance.min_baseline)
            .unwrap_or(base_params.min_baseline),
    };
    surveillance.validate().map_err(|e| e.to_string())?;

    let format: ReportFormat = flags
        .format
        .clone()
        .or(file.format)
        .as_deref()
        .unwrap_or("text")
        .parse()
        .map_err(|e: cbam_core::Error| e.to_string())?;

    Ok(Engine {
        registry,
        prices,
        defaults,
        exemptions,
        annex,
        sectors,
        boundary,
        schedule,
        surveillance,
        format,
    })
}
