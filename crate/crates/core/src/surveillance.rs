//! Circumvention surveillance over monthly trade flows.
//!
//! The pattern of interest: imports of an annex-covered good from a country
//! fall markedly while imports of a downstream good that uses it as an
//! input rise in the same window. Detection is a transparent two-threshold
//! mean-shift rule; thresholds are operator policy and live in
//! [`SurveillanceParams`], never in code.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::calendar::YearMonth;
use crate::error::{Error, Result};
use crate::registry::GoodsRegistry;
use crate::scalar::Scalar;
use crate::taxonomy::{AnnexList, CnCode};

/// Monthly export quantities for one (country, CN code) lane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeFlowSeries<F> {
    pub country: String,
    pub cn_code: CnCode,
    points: Vec<(YearMonth, F)>,
}

impl<F: Scalar> TradeFlowSeries<F> {
    /// Months must be strictly increasing; quantities non-negative.
    pub fn new(
        country: impl Into<String>,
        cn_code: CnCode,
        points: Vec<(YearMonth, F)>,
    ) -> Result<Self> {
        let country = country.into();
        for window in points.windows(2) {
            if window[0].0 >= window[1].0 {
                return Err(Error::Document(format!(
                    "series {country}/{cn_code}: months not strictly increasing at {}",
                    window[1].0
                )));
            }
        }
        for (month, qty) in &points {
            if *qty < F::zero() {
                return Err(Error::NegativeQuantity {
                    context: format!("series {country}/{cn_code} at {month}"),
                    value: qty.to_string(),
                });
            }
        }
        Ok(TradeFlowSeries {
            country,
            cn_code,
            points,
        })
    }

    pub fn points(&self) -> &[(YearMonth, F)] {
        &self.points
    }

    pub fn last_month(&self) -> Option<YearMonth> {
        self.points.last().map(|(m, _)| *m)
    }
}

/// Detection thresholds and window sizing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurveillanceParams<F> {
    pub window_months: usize,
    /// Required relative decrease of the annex good (a fraction, not %).
    pub theta_dec: F,
    /// Required relative increase of the downstream good.
    pub theta_inc: F,
    /// Minimum baseline mean; guards against near-zero trade lanes.
    pub min_baseline: F,
}

impl<F: Scalar> Default for SurveillanceParams<F> {
    fn default() -> Self {
        SurveillanceParams {
            window_months: 6,
            theta_dec: F::from_f64_lossy(0.30),
            theta_inc: F::from_f64_lossy(0.30),
            min_baseline: F::one(),
        }
    }
}

impl<F: Scalar> SurveillanceParams<F> {
    pub fn validate(&self) -> Result<()> {
        let ten = F::from_f64_lossy(10.0);
        let ok = self.window_months > 0
            && self.theta_dec > F::zero()
            && self.theta_dec <= ten
            && self.theta_inc > F::zero()
            && self.theta_inc <= ten
            && self.min_baseline > F::zero();
        if ok {
            Ok(())
        } else {
            Err(Error::Document(
                "surveillance params must be positive with thresholds in (0, 10]".to_string(),
            ))
        }
    }
}

/// A detected substitution pattern for one (country, annex good,
/// downstream good) triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircumventionAlert<F> {
    pub country: String,
    pub annex_code: CnCode,
    pub downstream_code: CnCode,
    pub window: (YearMonth, YearMonth),
    pub delta_annex: F,
    pub delta_downstream: F,
    /// `min(-delta_annex, delta_downstream)`: the weaker of the two shifts.
    pub score: F,
}

/// Relative mean shift of the last `window_months` against the preceding
/// `window_months`, evaluated at month `at`.
pub fn relative_shift<F: Scalar>(
    series: &TradeFlowSeries<F>,
    params: &SurveillanceParams<F>,
    at: YearMonth,
) -> Result<F> {
    let w = params.window_months;
    let needed = 2 * w;
    let insufficient = || Error::InsufficientHistory {
        country: series.country.clone(),
        cn_code: series.cn_code.to_string(),
        needed,
        at: at.to_string(),
    };
    let end = series
        .points
        .binary_search_by_key(&at, |(m, _)| *m)
        .map_err(|_| insufficient())?;
    if end + 1 < needed {
        return Err(insufficient());
    }
    let recent = &series.points[end + 1 - w..=end];
    let baseline = &series.points[end + 1 - needed..end + 1 - w];
    let mean = |pts: &[(YearMonth, F)]| {
        pts.iter().map(|(_, q)| *q).fold(F::zero(), |a, b| a + b) / F::from_usize_lossy(pts.len())
    };
    let baseline_mean = mean(baseline);
    if baseline_mean < params.min_baseline {
        return Err(Error::BaselineTooSmall {
            country: series.country.clone(),
            cn_code: series.cn_code.to_string(),
            mean: baseline_mean.to_string(),
            min: params.min_baseline.to_string(),
        });
    }
    Ok((mean(recent) - baseline_mean) / baseline_mean)
}

/// Evaluate one (annex lane, downstream lane) pair at month `at`.
///
/// Alerts exactly when the annex lane fell by at least `theta_dec` and the
/// downstream lane rose by at least `theta_inc`; both comparisons inclusive.
pub fn detect_pair<F: Scalar>(
    annex_series: &TradeFlowSeries<F>,
    downstream_series: &TradeFlowSeries<F>,
    params: &SurveillanceParams<F>,
    at: YearMonth,
) -> Result<Option<CircumventionAlert<F>>> {
    let delta_annex = relative_shift(annex_series, params, at)?;
    let delta_downstream = relative_shift(downstream_series, params, at)?;
    if delta_annex <= -params.theta_dec && delta_downstream >= params.theta_inc {
        let span = 2 * params.window_months as i64 - 1;
        Ok(Some(CircumventionAlert {
            country: annex_series.country.clone(),
            annex_code: annex_series.cn_code.clone(),
            downstream_code: downstream_series.cn_code.clone(),
            window: (at.plus_months(-span), at),
            delta_annex,
            delta_downstream,
            score: (-delta_annex).min(delta_downstream),
        }))
    } else {
        Ok(None)
    }
}

/// Bookkeeping for a scan run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanSummary {
    /// Pairs that passed the candidate rule.
    pub candidate_pairs: usize,
    /// Candidates skipped for missing history, small baselines or no
    /// common month.
    pub skipped_pairs: usize,
    pub alerts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult<F> {
    pub alerts: Vec<CircumventionAlert<F>>,
    pub summary: ScanSummary,
}

/// Scan every candidate lane pair per country.
///
/// A pair (a, d) is a candidate when `a` is annex-covered, `d` is not, and
/// the transitive bill of materials of the goods under `d` contains a good
/// whose CN code `a` covers. Each candidate is evaluated at the latest
/// month common to both lanes. Alerts come back sorted by descending
/// score, ties broken by (country, annex code, downstream code).
pub fn scan<F: Scalar>(
    flows: &[TradeFlowSeries<F>],
    registry: &GoodsRegistry<F>,
    annex: &AnnexList,
    params: &SurveillanceParams<F>,
) -> Result<ScanResult<F>> {
    params.validate()?;

    let mut by_country: BTreeMap<&str, Vec<&TradeFlowSeries<F>>> = BTreeMap::new();
    for series in flows {
        by_country.entry(series.country.as_str()).or_default().push(series);
    }

    let mut alerts = Vec::new();
    let mut summary = ScanSummary::default();
    let mut bom_cache: BTreeMap<&str, Vec<&CnCode>> = BTreeMap::new();

    for lanes in by_country.values() {
        for downstream in lanes {
            if annex.is_covered(&downstream.cn_code) {
                continue;
            }
            let reachable = bom_cache
                .entry(downstream.cn_code.as_str())
                .or_insert_with(|| transitive_input_codes(registry, &downstream.cn_code));
            if reachable.is_empty() {
                continue;
            }
            for annex_lane in lanes {
                if !annex.is_covered(&annex_lane.cn_code) {
                    continue;
                }
                if !reachable.iter().any(|cn| annex_lane.cn_code.covers(cn)) {
                    continue;
                }
                summary.candidate_pairs += 1;
                let Some(at) = latest_common_month(annex_lane, downstream) else {
                    summary.skipped_pairs += 1;
                    continue;
                };
                match detect_pair(annex_lane, downstream, params, at) {
                    Ok(Some(alert)) => alerts.push(alert),
                    Ok(None) => {}
                    Err(
                        Error::InsufficientHistory { .. } | Error::BaselineTooSmall { .. },
                    ) => summary.skipped_pairs += 1,
                    Err(other) => return Err(other),
                }
            }
        }
    }

    alerts.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("scores are finite")
            .then_with(|| a.country.cmp(&b.country))
            .then_with(|| a.annex_code.cmp(&b.annex_code))
            .then_with(|| a.downstream_code.cmp(&b.downstream_code))
    });
    summary.alerts = alerts.len();
    Ok(ScanResult { alerts, summary })
}

/// CN codes of every good transitively used as an input by the goods the
/// lane code covers.
fn transitive_input_codes<'r, F: Scalar>(
    registry: &'r GoodsRegistry<F>,
    lane_code: &CnCode,
) -> Vec<&'r CnCode> {
    let mut stack: Vec<&str> = Vec::new();
    for good in registry.goods() {
        if lane_code.covers(&good.cn_code) {
            for input in &good.inputs {
                stack.push(&input.id);
            }
        }
    }
    let mut seen: HashSet<&str> = HashSet::new();
    let mut codes = Vec::new();
    while let Some(id) = stack.pop() {
        if !seen.insert(id) {
            continue;
        }
        let good = registry.get(id).expect("registry is intact");
        codes.push(&good.cn_code);
        for input in &good.inputs {
            stack.push(&input.id);
        }
    }
    codes
}

fn latest_common_month<F: Scalar>(
    a: &TradeFlowSeries<F>,
    b: &TradeFlowSeries<F>,
) -> Option<YearMonth> {
    let months: HashSet<YearMonth> = a.points.iter().map(|(m, _)| *m).collect();
    b.points
        .iter()
        .rev()
        .map(|(m, _)| *m)
        .find(|m| months.contains(m))
}
