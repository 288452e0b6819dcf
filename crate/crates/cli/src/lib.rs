//! `cbam` command surface.
//!
//! Exit codes: 0 on success, 1 on fatal input errors (missing or invalid
//! files, unknown goods), 2 on usage errors. Reports go to stdout, every
//! diagnostic goes to the error stream. All output is deterministic for
//! identical argv + files.

pub mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use cbam_core::emissions::embedded_intensity;
use cbam_core::ingest::{parse_declarations, parse_flows};
use cbam_core::pricing::{assess_batch, cbam_rate, phase_factor};
use cbam_core::surveillance::scan;
use cbam_core::{format_eur, format_tco2e, CnCode, ReportFormat, RunReport};

use config::{build_engine, Engine, Overrides};

#[derive(Parser)]
#[command(
    name = "cbam",
    version,
    about = "CBAM obligation engine: coverage, embedded emissions, certificate pricing, trade-flow surveillance"
)]
struct Cli {
    /// Engine config JSON (falls back to the CBAM_CONFIG environment variable)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Goods registry JSON
    #[arg(long, global = true, value_name = "FILE")]
    registry: Option<PathBuf>,
    /// Annex + sector map JSON
    #[arg(long, global = true, value_name = "FILE")]
    annex: Option<PathBuf>,
    /// Carbon price table CSV
    #[arg(long, global = true, value_name = "FILE")]
    prices: Option<PathBuf>,
    /// Intensity defaults CSV
    #[arg(long, global = true, value_name = "FILE")]
    defaults: Option<PathBuf>,
    /// Exempt-country list JSON
    #[arg(long, global = true, value_name = "FILE")]
    exemptions: Option<PathBuf>,
    /// Report format: text or json
    #[arg(long, global = true, value_name = "FMT")]
    format: Option<String>,
    #[arg(long, global = true, value_name = "YEAR")]
    transitional_start: Option<i32>,
    #[arg(long, global = true, value_name = "YEAR")]
    levy_start: Option<i32>,
    #[arg(long, global = true, value_name = "YEAR")]
    full_year: Option<i32>,
    /// Count non-annex electricity inputs toward embedded emissions
    #[arg(long, global = true, value_name = "BOOL")]
    include_scope2: Option<bool>,
    /// Cut BOM traversal at this depth
    #[arg(long, global = true, value_name = "N")]
    max_depth: Option<u32>,
    #[arg(long, global = true, value_name = "N")]
    window_months: Option<usize>,
    #[arg(long, global = true, value_name = "FRAC")]
    theta_dec: Option<f64>,
    #[arg(long, global = true, value_name = "FRAC")]
    theta_inc: Option<f64>,
    #[arg(long, global = true, value_name = "TONNES")]
    min_baseline: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Annex coverage and sector of a CN code
    Classify { code: String },
    /// Embedded-intensity breakdown for a registry good
    Emissions { good: String },
    /// Certificate rate for explicit prices and intensity
    Rate {
        /// EU ETS reference price, EUR per tCO2e
        #[arg(long, allow_negative_numbers = true)]
        cp_eu: f64,
        /// Carbon price already paid in the origin country
        #[arg(long, allow_negative_numbers = true)]
        cp_i: f64,
        /// Emission intensity, tCO2e per tonne
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
    },
    /// Assess a declarations CSV into an obligations report
    Assess { declarations: PathBuf },
    /// Scan a trade-flows CSV for circumvention patterns
    Monitor { flows: PathBuf },
    /// Phase-factor table for the configured schedule
    Schedule,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            registry: self.registry.clone(),
            annex: self.annex.clone(),
            prices: self.prices.clone(),
            defaults: self.defaults.clone(),
            exemptions: self.exemptions.clone(),
            transitional_start: self.transitional_start,
            levy_start: self.levy_start,
            full_year: self.full_year,
            include_scope2: self.include_scope2,
            max_depth: self.max_depth,
            window_months: self.window_months,
            theta_dec: self.theta_dec,
            theta_inc: self.theta_inc,
            min_baseline: self.min_baseline,
            format: self.format.clone(),
        }
    }
}

/// Run the CLI against explicit argv and output streams.
///
/// `env_config` is the `CBAM_CONFIG` fallback; `main` reads it from the
/// process environment, tests pass it directly.
pub fn run_cli<I, S>(
    args: I,
    env_config: Option<String>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    2
                }
            };
        }
    };

    match execute(&cli, env_config, out) {
        Ok(()) => 0,
        Err(Failure::Input(message)) => {
            let _ = writeln!(err, "error: {message}");
            1
        }
        Err(Failure::Usage(message)) => {
            let _ = writeln!(err, "error: {message}");
            2
        }
    }
}

enum Failure {
    Input(String),
    Usage(String),
}

impl From<String> for Failure {
    fn from(message: String) -> Self {
        Failure::Input(message)
    }
}

impl From<cbam_core::Error> for Failure {
    fn from(e: cbam_core::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn load(cli: &Cli, env_config: Option<String>) -> Result<Engine, Failure> {
    let env_path = env_config.map(PathBuf::from);
    let config_path = cli.config.as_deref().or(env_path.as_deref());
    Ok(build_engine(config_path, &cli.overrides())?)
}

fn read_bytes(path: &PathBuf) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn execute(cli: &Cli, env_config: Option<String>, out: &mut dyn Write) -> Result<(), Failure> {
    match &cli.command {
        Command::Rate { cp_eu, cp_i, beta } => {
            if *cp_eu < 0.0 || *cp_i < 0.0 || *beta < 0.0 {
                return Err(Failure::Usage(
                    "--cp-eu, --cp-i and --beta must be non-negative".to_string(),
                ));
            }
            let rate = cbam_rate(*cp_eu, *cp_i, *beta);
            let _ = writeln!(out, "{}", format_eur(rate));
            Ok(())
        }
        Command::Classify { code } => {
            let engine = load(cli, env_config)?;
            let code = CnCode::parse(code)?;
            let covered = if engine.annex.is_covered(&code) {
                "covered"
            } else {
                "not covered"
            };
            let sector = engine.sectors.sector_of(&code);
            let _ = writeln!(out, "{covered}, sector={sector}");
            Ok(())
        }
        Command::Emissions { good } => {
            let engine = load(cli, env_config)?;
            let result = embedded_intensity(&engine.registry, good, &engine.boundary)?;
            let spec = engine.registry.get(good).expect("resolved above");
            let _ = writeln!(out, "good: {} ({}) unit={}", spec.id, spec.cn_code, spec.unit);
            let _ = writeln!(out, "direct: {}", format_tco2e(result.direct));
            for c in &result.contributions {
                let _ = writeln!(
                    out,
                    "  depth {:>2}  {:<24} {}",
                    c.depth,
                    c.good_id,
                    format_tco2e(c.tco2e_per_unit)
                );
            }
            let _ = writeln!(
                out,
                "total: {} tCO2e/{}{}",
                format_tco2e(result.intensity),
                spec.unit,
                if result.truncated { "  (truncated)" } else { "" }
            );
            Ok(())
        }
        Command::Assess { declarations } => {
            let engine = load(cli, env_config)?;
            let input = read_bytes(declarations)?;
            let parsed = parse_declarations(&input)?;
            let batch = assess_batch(&parsed.declarations, &engine.ctx())?;
            let report = RunReport::assemble(batch, &parsed.diagnostics);
            let rendered = cbam_core::report::render_report(&report, engine.format);
            let _ = write!(out, "{rendered}");
            Ok(())
        }
        Command::Monitor { flows } => {
            let engine = load(cli, env_config)?;
            let input = read_bytes(flows)?;
            let series = parse_flows(&input)?;
            let result = scan(&series, &engine.registry, &engine.annex, &engine.surveillance)?;
            match engine.format {
                ReportFormat::Json => {
                    let mut rendered = serde_json::to_string_pretty(&result)
                        .expect("scan result serialization cannot fail");
                    rendered.push('\n');
                    let _ = write!(out, "{rendered}");
                }
                ReportFormat::Text => {
                    let _ = writeln!(out, "== Alerts ==");
                    for a in &result.alerts {
                        let _ = writeln!(
                            out,
                            "{}  annex={}  downstream={}  window={}..{}  delta_annex={:+.6}  delta_downstream={:+.6}  score={}",
                            a.country,
                            a.annex_code,
                            a.downstream_code,
                            a.window.0,
                            a.window.1,
                            a.delta_annex,
                            a.delta_downstream,
                            format_tco2e(a.score)
                        );
                    }
                    let s = &result.summary;
                    let _ = writeln!(
                        out,
                        "candidates: {}  skipped: {}  alerts: {}",
                        s.candidate_pairs, s.skipped_pairs, s.alerts
                    );
                }
            }
            Ok(())
        }
        Command::Schedule => {
            let engine = load(cli, env_config)?;
            let from = engine.schedule.transitional_start.min(2023);
            let to = (engine.schedule.full_year + 1).max(2036);
            let _ = writeln!(out, "year  phase_factor");
            for year in from..=to {
                let factor: f64 = phase_factor(&engine.schedule, year);
                let _ = writeln!(out, "{year}  {factor:.4}");
            }
            Ok(())
        }
    }
}
