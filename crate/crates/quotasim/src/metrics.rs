//! Representation bias per subgroup and overall selection fairness.
//!
//! Representation bias compares a subgroup's selection rate to the realized
//! overall rate: `B_g = p_g / k_effective - 1` with
//! `k_effective = m / N_total`, so slot-count rounding never leaks into the
//! bias values and the weighted identity
//! `sum_g (N_g / N_total) * (B_g + 1) = 1` holds exactly. `B_g = 0` is
//! proportional representation, `B_g = -1` full exclusion. Empty subgroups
//! report an explicit undefined marker instead of propagating NaN.

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::population::{Population, Subgroup};
use crate::selection::{slot_count, top_m_ids, SelectionResult, SelectionRule};

/// Per-subgroup slice of a representation report.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GroupStats {
    pub group_size: usize,
    pub selected_count: usize,
    /// `selected_count / group_size`; undefined for empty groups.
    pub selection_rate: Option<f64>,
    /// `selection_rate / k_effective - 1`; undefined for empty groups.
    pub representation_bias: Option<f64>,
}

/// Representation of all four subgroups in one selection.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationReport {
    pub m: usize,
    pub n_total: usize,
    pub k_effective: f64,
    groups: [GroupStats; 4],
}

impl RepresentationReport {
    pub fn group(&self, subgroup: Subgroup) -> &GroupStats {
        &self.groups[subgroup.index()]
    }

    pub fn groups(&self) -> impl Iterator<Item = (Subgroup, &GroupStats)> {
        Subgroup::ALL.iter().map(|&g| (g, &self.groups[g.index()]))
    }

    /// Representation bias of the union of `subgroups` (e.g. one color's two
    /// subgroups). Undefined when the union is empty.
    pub fn combined_bias(&self, subgroups: &[Subgroup]) -> Option<f64> {
        let size: usize = subgroups.iter().map(|&g| self.group(g).group_size).sum();
        let selected: usize = subgroups
            .iter()
            .map(|&g| self.group(g).selected_count)
            .sum();
        if size == 0 {
            return None;
        }
        Some(selected as f64 / size as f64 / self.k_effective - 1.0)
    }

    /// Left-hand side of the weighted identity
    /// `sum_g (N_g / N_total) * (B_g + 1)`; equals 1 up to float rounding.
    pub fn weighted_rate_identity(&self) -> f64 {
        self.groups()
            .map(|(_, stats)| {
                let weight = stats.group_size as f64 / self.n_total as f64;
                let bias_plus_one = stats.representation_bias.map_or(0.0, |b| b + 1.0);
                weight * bias_plus_one
            })
            .sum()
    }
}

impl Serialize for RepresentationReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut state = serializer.serialize_struct("RepresentationReport", 7)?;
        state.serialize_field("m", &self.m)?;
        state.serialize_field("n_total", &self.n_total)?;
        state.serialize_field("k_effective", &self.k_effective)?;
        for subgroup in Subgroup::ALL {
            state.serialize_field(subgroup.key(), self.group(subgroup))?;
        }
        state.end()
    }
}

/// Builds a report from per-subgroup sizes and selected counts (in
/// [`Subgroup::ALL`] order). Shared by the synthetic and dataset pipelines.
pub(crate) fn report_from_counts(sizes: [usize; 4], selected: [usize; 4]) -> RepresentationReport {
    let n_total: usize = sizes.iter().sum();
    let m: usize = selected.iter().sum();
    let k_effective = m as f64 / n_total as f64;
    let groups = std::array::from_fn(|i| {
        let (size, chosen) = (sizes[i], selected[i]);
        let selection_rate = (size > 0).then(|| chosen as f64 / size as f64);
        let representation_bias = selection_rate.map(|p| p / k_effective - 1.0);
        GroupStats {
            group_size: size,
            selected_count: chosen,
            selection_rate,
            representation_bias,
        }
    });
    let report = RepresentationReport {
        m,
        n_total,
        k_effective,
        groups,
    };
    debug_assert!(
        (report.weighted_rate_identity() - 1.0).abs() < 1e-12,
        "weighted rate identity violated"
    );
    report
}

/// Computes selection rate and representation bias for all four subgroups.
pub fn representation_bias(
    population: &Population,
    selection: &SelectionResult,
) -> Result<RepresentationReport> {
    let sizes_usize = population.subgroup_sizes();
    let mut selected = [0usize; 4];
    for &id in &selection.selected_ids {
        let entity = population.get(id).ok_or(Error::UnknownEntity(id))?;
        selected[entity.subgroup().index()] += 1;
    }
    Ok(report_from_counts(sizes_usize, selected))
}

/// Overall selection fairness: mean true quality of `selection` minus mean
/// true quality of the unbiased top-k benchmark.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FairnessReport {
    pub f_k: f64,
    pub k: f64,
    pub rule: SelectionRule,
}

/// Computes `F_k` against the realized unbiased top-k of the same
/// population (same drawn quality values, same slot count).
///
/// The difference of means is evaluated over the symmetric difference of the
/// two selected sets, so entities common to both cancel exactly and an
/// unbiased selection scores `F_k = 0` with no rounding residue.
pub fn fairness(
    population: &Population,
    selection: &SelectionResult,
    k: f64,
) -> Result<FairnessReport> {
    let m = slot_count(k, population.len())?;
    if selection.m != m {
        return Err(Error::InvalidArgument(format!(
            "selection holds m = {} slots but k = {k} implies m = {m}",
            selection.m
        )));
    }
    for &id in &selection.selected_ids {
        if population.get(id).is_none() {
            return Err(Error::UnknownEntity(id));
        }
    }
    let benchmark = top_m_ids(
        population.entities().iter().map(|e| (e.id, e.q)).collect(),
        m,
    );
    let extra: f64 = selection
        .selected_ids
        .difference(&benchmark)
        .map(|&id| population.get(id).unwrap().q)
        .sum();
    let missing: f64 = benchmark
        .difference(&selection.selected_ids)
        .map(|&id| population.get(id).unwrap().q)
        .sum();
    Ok(FairnessReport {
        f_k: (extra - missing) / m as f64,
        k,
        rule: selection.rule,
    })
}

/// Mean true quality over the selected entities, summed in id order.
pub fn mean_true_quality(population: &Population, selection: &SelectionResult) -> Result<f64> {
    let mut sum = 0.0;
    for &id in &selection.selected_ids {
        sum += population.get(id).ok_or(Error::UnknownEntity(id))?.q;
    }
    Ok(sum / selection.m as f64)
}


#[cfg(test)]
mod prop_tests {
    use super::*;
    use crate::population::{generate_population, Attribute, BiasParams, PopulationConfig};
    use crate::selection::{select_top_k, select_with_quota, ScoreBasis};
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn weighted_rate_identity_holds(
            seed in any::<u64>(),
            n in 20u64..400,
            f_pct in 5u32..50,
            k_pct in 1u32..100,
            d_color in -3.0f64..3.0,
            d_shape in -3.0f64..3.0,
            quota in any::<bool>(),
        ) {
            let config = PopulationConfig::new(
                n,
                f_pct as f64 / 100.0,
                BiasParams::new(d_color, d_shape),
                seed,
            );
            prop_assume!(config.validate().is_ok());
            let pop = generate_population(&config).unwrap();
            let k = k_pct as f64 / 100.0;
            let selection = if quota {
                select_with_quota(&pop, config.bias, k, Attribute::Color).unwrap()
            } else {
                select_top_k(&pop, config.bias, k, ScoreBasis::PerceivedQuality).unwrap()
            };
            let report = representation_bias(&pop, &selection).unwrap();
            prop_assert!((report.weighted_rate_identity() - 1.0).abs() < 1e-12);
        }
    }
}
