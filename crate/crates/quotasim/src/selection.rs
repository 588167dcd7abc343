//! Top-k selection by a chosen score, with and without quota constraints.
//!
//! Selection is fully deterministic: ranking breaks score ties by lower
//! entity id, quota slots are apportioned by largest remainder in exact
//! integer arithmetic, and the slot count is `round(k * N_total)` half up
//! with a minimum of one.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::{Attribute, BiasParams, Color, Entity, Population, Shape};

/// Which score a selector ranks by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreBasis {
    TrueQuality,
    PerceivedQuality,
}

/// A selection procedure: score basis plus an optional quota attribute.
/// `quota_attribute: None` is blind selection over the whole pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionRule {
    pub score_basis: ScoreBasis,
    pub quota_attribute: Option<Attribute>,
}

impl SelectionRule {
    pub fn blind(score_basis: ScoreBasis) -> Self {
        Self {
            score_basis,
            quota_attribute: None,
        }
    }

    pub fn quota(score_basis: ScoreBasis, attribute: Attribute) -> Self {
        Self {
            score_basis,
            quota_attribute: Some(attribute),
        }
    }
}

/// The outcome of one selection: `m` entity ids chosen for the top `k`
/// fraction under `rule`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub k: f64,
    pub m: usize,
    pub selected_ids: BTreeSet<u64>,
    pub rule: SelectionRule,
}

impl SelectionResult {
    pub fn contains(&self, id: u64) -> bool {
        self.selected_ids.contains(&id)
    }
}

/// Number of slots for the top `k` fraction of `n_total` entities:
/// `round(k * n_total)` half up, minimum 1.
pub fn slot_count(k: f64, n_total: usize) -> Result<usize> {
    if !k.is_finite() || k <= 0.0 || k >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "k must lie in (0, 1), got {k}"
        )));
    }
    if n_total == 0 {
        return Err(Error::InvalidArgument("population is empty".into()));
    }
    let m = (k * n_total as f64 + 0.5).floor() as usize;
    Ok(m.max(1))
}

/// Largest-remainder apportionment of `slots` across groups proportional to
/// `sizes`. Exact integer arithmetic; leftover slots go to the largest
/// fractional remainders, ties broken by lower group index.
pub fn largest_remainder(slots: usize, sizes: &[usize]) -> Vec<usize> {
    let total: u128 = sizes.iter().map(|&s| s as u128).sum();
    if total == 0 {
        return vec![0; sizes.len()];
    }
    let mut alloc: Vec<usize> = Vec::with_capacity(sizes.len());
    let mut remainders: Vec<(u128, usize)> = Vec::with_capacity(sizes.len());
    let mut assigned = 0usize;
    for (index, &size) in sizes.iter().enumerate() {
        let numerator = slots as u128 * size as u128;
        let floor = (numerator / total) as usize;
        alloc.push(floor);
        assigned += floor;
        remainders.push((numerator % total, index));
    }
    // Descending remainder, then ascending index.
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, index) in remainders.iter().take(slots - assigned) {
        alloc[index] += 1;
    }
    alloc
}

fn score_of(entity: &Entity, bias: BiasParams, basis: ScoreBasis) -> f64 {
    match basis {
        ScoreBasis::TrueQuality => entity.q,
        ScoreBasis::PerceivedQuality => entity.perceived_quality(bias),
    }
}

/// Top `m` ids from `(id, score)` pairs: score descending, id ascending on
/// ties. The input is consumed and sorted.
pub(crate) fn top_m_ids(mut scored: Vec<(u64, f64)>, m: usize) -> BTreeSet<u64> {
    scored.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.into_iter().take(m).map(|(id, _)| id).collect()
}

/// Quota selection core shared with the dataset pipeline: apportions `m`
/// slots over two groups by size and fills each with its top scorers.
pub(crate) fn quota_top_ids(
    groups: [Vec<(u64, f64)>; 2],
    names: [&str; 2],
    m: usize,
) -> Result<BTreeSet<u64>> {
    let sizes = [groups[0].len(), groups[1].len()];
    let alloc = largest_remainder(m, &sizes);
    for i in 0..2 {
        if alloc[i] > sizes[i] {
            return Err(Error::QuotaInfeasible {
                group: names[i].to_string(),
                allocated: alloc[i],
                available: sizes[i],
            });
        }
    }
    let mut selected = BTreeSet::new();
    for (group, quota) in groups.into_iter().zip(alloc) {
        selected.extend(top_m_ids(group, quota));
    }
    Ok(selected)
}

/// Runs `rule` on `population`: blind top-k, or per-group top-k under a
/// largest-remainder quota on the rule's attribute.
pub fn select(
    population: &Population,
    bias: BiasParams,
    k: f64,
    rule: SelectionRule,
) -> Result<SelectionResult> {
    let m = slot_count(k, population.len())?;
    let selected_ids = match rule.quota_attribute {
        None => {
            let scored = population
                .entities()
                .iter()
                .map(|e| (e.id, score_of(e, bias, rule.score_basis)))
                .collect();
            top_m_ids(scored, m)
        }
        Some(attribute) => {
            // Group order fixes the remainder tie-break: indicator-1 side first.
            let (names, side) = match attribute {
                Attribute::Color => (
                    ["green", "orange"],
                    (|e: &Entity| e.color == Color::Green) as fn(&Entity) -> bool,
                ),
                Attribute::Shape => (
                    ["star", "circle"],
                    (|e: &Entity| e.shape == Shape::Star) as fn(&Entity) -> bool,
                ),
            };
            let mut groups = [Vec::new(), Vec::new()];
            for e in population.entities() {
                let idx = if side(e) { 0 } else { 1 };
                groups[idx].push((e.id, score_of(e, bias, rule.score_basis)));
            }
            quota_top_ids(groups, names, m)?
        }
    };
    Ok(SelectionResult {
        k,
        m,
        selected_ids,
        rule,
    })
}

/// Blind selection of the top `k` fraction under `basis`.
pub fn select_top_k(
    population: &Population,
    bias: BiasParams,
    k: f64,
    basis: ScoreBasis,
) -> Result<SelectionResult> {
    select(population, bias, k, SelectionRule::blind(basis))
}

/// Quota-based debiasing: slots split across the two values of
/// `quota_attribute` proportionally to their population shares, each filled
/// with that group's highest perceived quality.
pub fn select_with_quota(
    population: &Population,
    bias: BiasParams,
    k: f64,
    quota_attribute: Attribute,
) -> Result<SelectionResult> {
    select(
        population,
        bias,
        k,
        SelectionRule::quota(ScoreBasis::PerceivedQuality, quota_attribute),
    )
}
