//! Goods catalogue, carbon-price tables, intensity defaults and exemption
//! lists. Everything here is validated once at load and immutable after;
//! concurrent readers need no coordination.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::taxonomy::{CnCode, Sector};

/// Basis of a good's intensity figures. Electricity is accounted per MWh;
/// everything else per tonne of product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Unit {
    #[default]
    #[serde(rename = "t")]
    Tonnes,
    #[serde(rename = "MWh")]
    MegawattHours,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unit::Tonnes => f.write_str("t"),
            Unit::MegawattHours => f.write_str("MWh"),
        }
    }
}

/// One bill-of-materials edge: `qty` units of the input per unit of product.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputSpec<F> {
    pub id: String,
    pub qty: F,
}

/// A catalogued good: scope-1 direct emission intensity plus its bill of
/// materials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoodSpec<F> {
    pub id: String,
    pub cn_code: CnCode,
    #[serde(default)]
    pub name: String,
    /// tCO2e per unit of product, scope-1 only.
    pub direct_intensity: F,
    #[serde(default)]
    pub unit: Unit,
    #[serde(default = "Vec::new")]
    pub inputs: Vec<InputSpec<F>>,
}

impl<F> GoodSpec<F> {
    /// A good "has a BOM" when it lists at least one input.
    pub fn has_bom(&self) -> bool {
        !self.inputs.is_empty()
    }
}

/// Validated goods catalogue: referentially intact, acyclic, with a cached
/// topological order (inputs before the goods that consume them).
#[derive(Debug, Clone)]
pub struct GoodsRegistry<F> {
    goods: HashMap<String, GoodSpec<F>>,
    topo: Vec<String>,
}

impl<F: Scalar> GoodsRegistry<F> {
    pub fn new(goods: Vec<GoodSpec<F>>) -> Result<Self> {
        let mut map: HashMap<String, GoodSpec<F>> = HashMap::with_capacity(goods.len());
        for good in goods {
            if good.direct_intensity < F::zero() {
                return Err(Error::NegativeQuantity {
                    context: format!("direct_intensity of good {:?}", good.id),
                    value: good.direct_intensity.to_string(),
                });
            }
            for input in &good.inputs {
                if input.qty < F::zero() {
                    return Err(Error::NegativeQuantity {
                        context: format!("input {:?} of good {:?}", input.id, good.id),
                        value: input.qty.to_string(),
                    });
                }
            }
            if map.insert(good.id.clone(), good.clone()).is_some() {
                return Err(Error::DuplicateGood(good.id));
            }
        }
        for good in map.values() {
            for input in &good.inputs {
                if !map.contains_key(&input.id) {
                    return Err(Error::DanglingInput {
                        good: good.id.clone(),
                        input: input.id.clone(),
                    });
                }
            }
        }
        let topo = topo_order(&map)?;
        Ok(GoodsRegistry { goods: map, topo })
    }

    pub fn get(&self, id: &str) -> Option<&GoodSpec<F>> {
        self.goods.get(id)
    }

    pub fn len(&self) -> usize {
        self.goods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goods.is_empty()
    }

    /// Cached topological order: every input precedes its dependents; ties
    /// broken lexicographically so the order is deterministic.
    pub fn topo_order(&self) -> &[String] {
        &self.topo
    }

    pub fn goods(&self) -> impl Iterator<Item = &GoodSpec<F>> {
        self.topo.iter().map(|id| &self.goods[id])
    }
}

/// Kahn's algorithm with a lexicographic ready set. On a cycle, walks the
/// unprocessed subgraph to report one full cycle path.
fn topo_order<F>(goods: &HashMap<String, GoodSpec<F>>) -> Result<Vec<String>> {
    let mut in_deg: HashMap<&str, usize> = HashMap::with_capacity(goods.len());
    let mut dependents: HashMap<&str, Vec<&str>> = HashMap::new();
    for good in goods.values() {
        let unique_inputs: HashSet<&str> = good.inputs.iter().map(|i| i.id.as_str()).collect();
        in_deg.insert(good.id.as_str(), unique_inputs.len());
        for input in unique_inputs {
            dependents.entry(input).or_default().push(good.id.as_str());
        }
    }

    let mut ready: BTreeSet<&str> = in_deg
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(id, _)| *id)
        .collect();
    let mut order = Vec::with_capacity(goods.len());
    while let Some(id) = ready.pop_first() {
        order.push(id.to_string());
        for dep in dependents.get(id).map(Vec::as_slice).unwrap_or(&[]) {
            let d = in_deg.get_mut(dep).expect("dependent is a known good");
            *d -= 1;
            if *d == 0 {
                ready.insert(dep);
            }
        }
    }

    if order.len() == goods.len() {
        return Ok(order);
    }
    Err(Error::CycleDetected(find_cycle(goods, &in_deg)))
}

/// DFS over the goods still carrying in-degree > 0; returns a path
/// `[n, ..., n]` that starts and ends on the same good.
fn find_cycle<F>(goods: &HashMap<String, GoodSpec<F>>, in_deg: &HashMap<&str, usize>) -> Vec<String> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: HashMap<&str, Mark> = HashMap::new();
    let mut remaining: Vec<&str> = in_deg
        .iter()
        .filter(|(_, d)| **d > 0)
        .map(|(id, _)| *id)
        .collect();
    remaining.sort_unstable();

    fn visit<'a, F>(
        id: &'a str,
        goods: &'a HashMap<String, GoodSpec<F>>,
        marks: &mut HashMap<&'a str, Mark>,
        path: &mut Vec<&'a str>,
    ) -> Option<Vec<String>> {
        marks.insert(id, Mark::Open);
        path.push(id);
        let mut inputs: Vec<&str> = goods[id].inputs.iter().map(|i| i.id.as_str()).collect();
        inputs.sort_unstable();
        inputs.dedup();
        for input in inputs {
            match marks.get(input) {
                Some(Mark::Open) => {
                    let start = path.iter().position(|p| *p == input).expect("open node on path");
                    let mut cycle: Vec<String> =
                        path[start..].iter().map(|s| s.to_string()).collect();
                    cycle.push(input.to_string());
                    return Some(cycle);
                }
                Some(Mark::Done) => {}
                None => {
                    if let Some(cycle) = visit(input, goods, marks, path) {
                        return Some(cycle);
                    }
                }
            }
        }
        path.pop();
        marks.insert(id, Mark::Done);
        None
    }

    for id in remaining {
        if !marks.contains_key(id) {
            let mut path = Vec::new();
            if let Some(cycle) = visit(id, goods, &mut marks, &mut path) {
                return cycle;
            }
        }
    }
    unreachable!("topological sort failed but no cycle found")
}

#[derive(Debug, Deserialize)]
struct RegistryDoc<F> {
    goods: Vec<GoodSpec<F>>,
}

/// Load a goods registry from its JSON document:
/// `{"goods": [{"id", "cn_code", "name", "direct_intensity", "inputs": [{"id", "qty"}]}]}`.
pub fn load_registry<F: Scalar + DeserializeOwned>(json: &str) -> Result<GoodsRegistry<F>> {
    let doc: RegistryDoc<F> =
        serde_json::from_str(json).map_err(|e| Error::Document(e.to_string()))?;
    GoodsRegistry::new(doc.goods)
}

// ---------------------------------------------------------------------------
// Carbon prices
// ---------------------------------------------------------------------------

/// Dated carbon prices per country plus the EU ETS reference series.
/// A country with no rows has no national scheme and prices at zero.
#[derive(Debug, Clone, Default)]
pub struct CarbonPriceTable<F> {
    rows: HashMap<String, Vec<(NaiveDate, F)>>,
    eu: Vec<(NaiveDate, F)>,
}

impl<F: Scalar> CarbonPriceTable<F> {
    pub fn new() -> Self {
        CarbonPriceTable {
            rows: HashMap::new(),
            eu: Vec::new(),
        }
    }

    /// Append a row; within one country `valid_from` must strictly increase.
    /// Country `"EU"` feeds the ETS reference series.
    pub fn push(&mut self, country: &str, valid_from: NaiveDate, price: F) -> Result<()> {
        if price < F::zero() {
            return Err(Error::NegativeQuantity {
                context: format!("carbon price for {country:?}"),
                value: price.to_string(),
            });
        }
        let series = if country == "EU" {
            &mut self.eu
        } else {
            self.rows.entry(country.to_string()).or_default()
        };
        if let Some((last, _)) = series.last() {
            if *last >= valid_from {
                return Err(Error::PriceOrder {
                    country: country.to_string(),
                    date: valid_from.to_string(),
                });
            }
        }
        series.push((valid_from, price));
        Ok(())
    }

    fn latest(series: &[(NaiveDate, F)], date: NaiveDate) -> Option<F> {
        series
            .iter()
            .take_while(|(from, _)| *from <= date)
            .last()
            .map(|(_, p)| *p)
    }

    /// Price in force for `country` at `date`, if the country has a row by then.
    pub fn price_on(&self, country: &str, date: NaiveDate) -> Option<F> {
        self.rows
            .get(country)
            .and_then(|series| Self::latest(series, date))
    }

    /// Price in force, with absence defined as zero (no national scheme).
    pub fn carbon_price(&self, country: &str, date: NaiveDate) -> F {
        self.price_on(country, date).unwrap_or_else(F::zero)
    }

    /// EU ETS reference price at `date`; zero when no row is in force.
    pub fn eu_price(&self, date: NaiveDate) -> F {
        Self::latest(&self.eu, date).unwrap_or_else(F::zero)
    }
}

/// Price table CSV: `country,valid_from,price_eur`, dates ISO-8601,
/// rows grouped per country in increasing date order.
pub fn load_prices<F: Scalar>(csv_text: &str) -> Result<CarbonPriceTable<F>> {
    let mut table = CarbonPriceTable::new();
    for (country, fields) in read_csv_rows(csv_text, &["country", "valid_from", "price_eur"])? {
        let date = NaiveDate::parse_from_str(&fields[0], "%Y-%m-%d")
            .map_err(|_| Error::Parse(format!("bad date {:?} for {country:?}", fields[0])))?;
        let price: F = fields[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad price {:?} for {country:?}", fields[1])))?;
        table.push(&country, date, price)?;
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// Intensity defaults
// ---------------------------------------------------------------------------

/// Fallback emission intensities keyed by (country, sector); country `"*"`
/// is the wildcard row. Cells not provided by the operator are an error at
/// query time, never a guessed value.
#[derive(Debug, Clone, Default)]
pub struct IntensityDefaults<F> {
    rows: BTreeMap<(String, Sector), F>,
}

impl<F: Scalar> IntensityDefaults<F> {
    pub fn new() -> Self {
        IntensityDefaults {
            rows: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, country: &str, sector: Sector, intensity: F) -> Result<()> {
        if intensity < F::zero() {
            return Err(Error::NegativeQuantity {
                context: format!("intensity default for {country:?}/{sector}"),
                value: intensity.to_string(),
            });
        }
        let key = (country.to_string(), sector);
        if self.rows.contains_key(&key) {
            return Err(Error::DuplicateDefault {
                country: country.to_string(),
                sector: sector.to_string(),
            });
        }
        self.rows.insert(key, intensity);
        Ok(())
    }

    /// Exact-country row if present, else the wildcard row.
    pub fn default_intensity(&self, country: &str, sector: Sector) -> Result<F> {
        self.rows
            .get(&(country.to_string(), sector))
            .or_else(|| self.rows.get(&("*".to_string(), sector)))
            .copied()
            .ok_or_else(|| Error::MissingDefault {
                country: country.to_string(),
                sector: sector.to_string(),
            })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Defaults CSV: `country,sector,intensity`.
pub fn load_intensity_defaults<F: Scalar>(csv_text: &str) -> Result<IntensityDefaults<F>> {
    let mut defaults = IntensityDefaults::new();
    for (country, fields) in read_csv_rows(csv_text, &["country", "sector", "intensity"])? {
        let sector: Sector = fields[0].parse()?;
        let intensity: F = fields[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad intensity {:?} for {country:?}", fields[1])))?;
        defaults.push(&country, sector, intensity)?;
    }
    Ok(defaults)
}

/// The shipped defaults hold only the handful of sector figures the engine
/// is documented with; every other cell is operator data.
pub fn shipped_intensity_defaults<F: Scalar>() -> IntensityDefaults<F> {
    load_intensity_defaults(include_str!("../data/intensity_defaults.csv"))
        .expect("shipped defaults are valid")
}

// ---------------------------------------------------------------------------
// Exemptions
// ---------------------------------------------------------------------------

/// Countries whose imports are exempt via ETS participation or linkage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExemptionList {
    countries: BTreeSet<String>,
}

impl ExemptionList {
    pub fn new(countries: impl IntoIterator<Item = String>) -> Result<Self> {
        let countries: BTreeSet<String> = countries.into_iter().collect();
        if countries.is_empty() {
            return Err(Error::Document("exemption list is empty".to_string()));
        }
        Ok(ExemptionList { countries })
    }

    pub fn is_exempt(&self, country: &str) -> bool {
        self.countries.contains(country)
    }

    pub fn countries(&self) -> impl Iterator<Item = &str> {
        self.countries.iter().map(String::as_str)
    }
}

/// Exemptions document: a JSON array of ISO alpha-2 codes.
pub fn load_exemptions(json: &str) -> Result<ExemptionList> {
    let countries: Vec<String> =
        serde_json::from_str(json).map_err(|e| Error::Document(e.to_string()))?;
    ExemptionList::new(countries)
}

/// EFTA countries plus the EU member states.
pub fn shipped_exemptions() -> ExemptionList {
    load_exemptions(include_str!("../data/exemptions.json")).expect("shipped exemptions are valid")
}

// ---------------------------------------------------------------------------
// Small strict-CSV helper for the table loaders
// ---------------------------------------------------------------------------

/// Reads a headered CSV whose first column is a country code; returns
/// (country, remaining fields) per row. Header must match exactly.
fn read_csv_rows(csv_text: &str, header: &[&str]) -> Result<Vec<(String, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(csv_text.as_bytes());
    let expected = header.join(",");
    let got = reader
        .headers()
        .map_err(|e| Error::Document(e.to_string()))?;
    if got.iter().collect::<Vec<_>>() != header {
        return Err(Error::MissingHeader { expected });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Document(e.to_string()))?;
        if record.len() != header.len() {
            return Err(Error::Document(format!(
                "expected {} columns, got {}",
                header.len(),
                record.len()
            )));
        }
        let mut fields: Vec<String> = record.iter().map(|f| f.trim().to_string()).collect();
        let country = fields.remove(0);
        rows.push((country, fields));
    }
    Ok(rows)
}
