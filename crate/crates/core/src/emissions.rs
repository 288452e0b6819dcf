//! Embedded emission intensity of goods: scope-1 direct intensity plus the
//! in-boundary share of every input, aggregated over the bill-of-materials
//! DAG.
//!
//! The system boundary decides which inputs count: annex-covered inputs
//! always do, electricity inputs (MWh-basis goods) only when scope 2 is
//! switched on, everything else contributes zero.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry::{GoodSpec, GoodsRegistry, Unit};
use crate::scalar::Scalar;
use crate::taxonomy::AnnexList;

/// Absolute tolerance for intensity comparisons.
pub const INTENSITY_TOLERANCE: f64 = 1e-9;

/// System boundary for embedded-emissions aggregation.
#[derive(Debug, Clone)]
pub struct Boundary {
    /// Inputs covered by this list are inside the boundary.
    pub annex: AnnexList,
    /// Whether purchased electricity (MWh-basis inputs) counts even when
    /// not annex-covered.
    pub include_scope2: bool,
    /// Traversal cut for operator experiments; `None` means unlimited.
    pub max_depth: Option<u32>,
}

impl Boundary {
    pub fn new(annex: AnnexList) -> Self {
        Boundary {
            annex,
            include_scope2: false,
            max_depth: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_depth == Some(0) {
            return Err(Error::Document(
                "boundary max_depth must be at least 1 when finite".to_string(),
            ));
        }
        Ok(())
    }

    fn in_boundary<F>(&self, good: &GoodSpec<F>) -> bool {
        self.annex.is_covered(&good.cn_code)
            || (self.include_scope2 && good.unit == Unit::MegawattHours)
    }
}

/// One flattened contribution: how much a good adds to the root product's
/// intensity at a given BOM depth (path quantities multiplied through).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution<F> {
    pub good_id: String,
    pub depth: u32,
    pub tco2e_per_unit: F,
}

/// Embedded intensity of a good together with its breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedResult<F> {
    /// tCO2e per unit of the root product (the good's own basis).
    pub intensity: F,
    /// Direct scope-1 term of the root good itself.
    pub direct: F,
    pub contributions: Vec<Contribution<F>>,
    /// True when `max_depth` cut off in-boundary inputs.
    pub truncated: bool,
}

const UNLIMITED: u32 = u32::MAX;

/// Memoizing evaluator for embedded intensities under one fixed boundary.
///
/// Goods are interned to dense indexes up front, so batch callers pay one
/// string lookup per declaration and each (good, remaining-depth) pair is
/// evaluated once: a whole batch against a registry costs O(goods + edges).
/// Results are pure values: evaluators built over the same inputs agree
/// exactly.
pub struct EmbeddedEvaluator<'r, F: Scalar> {
    boundary: &'r Boundary,
    index: HashMap<&'r str, usize>,
    goods: Vec<&'r GoodSpec<F>>,
    /// Per good: (input slot, quantity) for in-boundary inputs only.
    edges: Vec<Vec<(usize, F)>>,
    memo_unlimited: Vec<Option<(F, bool)>>,
    memo_finite: HashMap<(usize, u32), (F, bool)>,
}

impl<'r, F: Scalar> EmbeddedEvaluator<'r, F> {
    pub fn new(registry: &'r GoodsRegistry<F>, boundary: &'r Boundary) -> Result<Self> {
        boundary.validate()?;
        let goods: Vec<&GoodSpec<F>> = registry.goods().collect();
        let index: HashMap<&str, usize> = goods
            .iter()
            .enumerate()
            .map(|(i, g)| (g.id.as_str(), i))
            .collect();
        let edges = goods
            .iter()
            .map(|g| {
                g.inputs
                    .iter()
                    .filter_map(|input| {
                        let slot = index[input.id.as_str()];
                        boundary.in_boundary(goods[slot]).then_some((slot, input.qty))
                    })
                    .collect()
            })
            .collect();
        let n = goods.len();
        Ok(EmbeddedEvaluator {
            boundary,
            index,
            goods,
            edges,
            memo_unlimited: vec![None; n],
            memo_finite: HashMap::new(),
        })
    }

    /// Embedded intensity of `good` in its own unit basis.
    pub fn intensity(&mut self, good: &str) -> Result<F> {
        Ok(self.intensity_with_truncation(good)?.0)
    }

    pub fn intensity_with_truncation(&mut self, good: &str) -> Result<(F, bool)> {
        let slot = *self
            .index
            .get(good)
            .ok_or_else(|| Error::UnknownGood(good.to_string()))?;
        let budget = self.boundary.max_depth.unwrap_or(UNLIMITED);
        Ok(self.eval(slot, budget))
    }

    fn eval(&mut self, slot: usize, budget: u32) -> (F, bool) {
        if budget == UNLIMITED {
            if let Some(hit) = self.memo_unlimited[slot] {
                return hit;
            }
        } else if let Some(hit) = self.memo_finite.get(&(slot, budget)) {
            return *hit;
        }
        let mut total = self.goods[slot].direct_intensity;
        let mut truncated = false;
        for i in 0..self.edges[slot].len() {
            let (child, qty) = self.edges[slot][i];
            if budget == 0 {
                truncated = true;
                continue;
            }
            let child_budget = if budget == UNLIMITED { UNLIMITED } else { budget - 1 };
            let (ci, ct) = self.eval(child, child_budget);
            total = total + qty * ci;
            truncated |= ct;
        }
        if budget == UNLIMITED {
            self.memo_unlimited[slot] = Some((total, truncated));
        } else {
            self.memo_finite.insert((slot, budget), (total, truncated));
        }
        (total, truncated)
    }
}

/// Embedded intensity of one good with the full per-input breakdown.
///
/// Contributions are flattened per (good, depth): the entry's value is the
/// good's direct intensity times the sum of path quantities leading to it,
/// so the entries sum to exactly `intensity - direct`.
pub fn embedded_intensity<F: Scalar>(
    registry: &GoodsRegistry<F>,
    good: &str,
    boundary: &Boundary,
) -> Result<EmbeddedResult<F>> {
    boundary.validate()?;
    let root = registry
        .get(good)
        .ok_or_else(|| Error::UnknownGood(good.to_string()))?;

    let mut contributions = Vec::new();
    let mut truncated = false;
    // frontier: good id -> accumulated path multiplier at the current depth
    let mut frontier: BTreeMap<String, F> = BTreeMap::new();
    frontier.insert(root.id.clone(), F::one());
    let mut depth = 0u32;
    let budget = boundary.max_depth.unwrap_or(UNLIMITED);

    while !frontier.is_empty() {
        let mut next: BTreeMap<String, F> = BTreeMap::new();
        let mut cut = false;
        for (id, mult) in &frontier {
            let spec = registry.get(id).expect("registry is intact");
            for input in &spec.inputs {
                let child = registry.get(&input.id).expect("registry is intact");
                if !boundary.in_boundary(child) {
                    continue;
                }
                if depth >= budget {
                    cut = true;
                    continue;
                }
                let entry = next.entry(input.id.clone()).or_insert_with(F::zero);
                *entry = *entry + *mult * input.qty;
            }
        }
        if cut {
            truncated = true;
            break;
        }
        depth += 1;
        for (id, mult) in &next {
            let spec = registry.get(id).expect("registry is intact");
            contributions.push(Contribution {
                good_id: id.clone(),
                depth,
                tco2e_per_unit: *mult * spec.direct_intensity,
            });
        }
        frontier = next;
    }

    let mut intensity = root.direct_intensity;
    for c in &contributions {
        intensity = intensity + c.tco2e_per_unit;
    }
    Ok(EmbeddedResult {
        intensity,
        direct: root.direct_intensity,
        contributions,
        truncated,
    })
}

/// Total embedded emissions of a shipment: intensity times quantity.
pub fn embedded_total<F: Scalar>(intensity: F, quantity: F) -> Result<F> {
    if quantity < F::zero() {
        return Err(Error::NegativeQuantity {
            context: "embedded_total quantity".to_string(),
            value: quantity.to_string(),
        });
    }
    Ok(intensity * quantity)
}
