//! Aggregate-bias formulas and Monte Carlo sweeps over the parameter space.
//!
//! Sweeps pair every blind selection with a color-quota selection over the
//! same drawn population, so per-repetition differences (representation
//! change per subgroup, quality change) are free of between-population
//! noise. Each repetition's seed is derived from the master seed and the
//! cell coordinates via [`crate::seeding::derive_seed`]; results are
//! bit-identical regardless of thread count or scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{fairness, mean_true_quality, representation_bias, FairnessReport,
    RepresentationReport};
use crate::population::{
    generate_population, Attribute, BiasParams, PopulationConfig, Subgroup,
};
use crate::seeding::derive_seed;
use crate::selection::{select_top_k, select_with_quota, ScoreBasis};

/// Threshold on the hidden-attribute penalty above which the aggregate color
/// advantage inverts: `-d_color / (1 - 2f)`.
///
/// Above this value the orange side looks advantaged in aggregate even
/// though `d_color < 0` favors green individually, and a color quota then
/// worsens the representation of orange stars.
pub fn paradox_boundary(d_color: f64, f: f64) -> Result<f64> {
    if !d_color.is_finite() || d_color >= 0.0 {
        return Err(Error::Domain(format!(
            "paradox boundary requires d_color < 0, got {d_color}"
        )));
    }
    if !f.is_finite() || f <= 0.0 || f >= 0.5 {
        return Err(Error::Domain(format!(
            "paradox boundary requires f in (0, 0.5), got {f}"
        )));
    }
    Ok(-d_color / (1.0 - 2.0 * f))
}

/// Average perception bias of each color group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregateColorBias {
    pub d_green: f64,
    pub d_orange: f64,
}

/// Size-weighted average bias per color:
/// `d_orange = -d_shape * f` and
/// `d_green = -d_shape - d_color + d_shape * f`.
pub fn aggregate_color_bias(bias: BiasParams, f: f64) -> Result<AggregateColorBias> {
    if !f.is_finite() || f <= 0.0 || f > 0.5 {
        return Err(Error::Domain(format!(
            "aggregate color bias requires f in (0, 0.5], got {f}"
        )));
    }
    Ok(AggregateColorBias {
        d_green: -bias.d_shape - bias.d_color + bias.d_shape * f,
        d_orange: -bias.d_shape * f,
    })
}

/// Paired outcome of one drawn population: blind perceived-quality top-k and
/// color-quota top-k, with representation and fairness reports for both.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub blind: RepresentationReport,
    pub quota_color: RepresentationReport,
    pub blind_fairness: FairnessReport,
    pub quota_fairness: FairnessReport,
}

impl ExperimentResult {
    /// Change in representation bias after the quota, per subgroup.
    pub fn delta_b(&self, subgroup: Subgroup) -> Option<f64> {
        let before = self.blind.group(subgroup).representation_bias?;
        let after = self.quota_color.group(subgroup).representation_bias?;
        Some(after - before)
    }
}

/// Generates one population from `config` and compares blind selection
/// against color-quota selection on the same quality draws.
pub fn run_single_experiment(config: &PopulationConfig, k: f64) -> Result<ExperimentResult> {
    let population = generate_population(config)?;
    let blind_sel = select_top_k(&population, config.bias, k, ScoreBasis::PerceivedQuality)?;
    let quota_sel = select_with_quota(&population, config.bias, k, Attribute::Color)?;
    Ok(ExperimentResult {
        blind: representation_bias(&population, &blind_sel)?,
        quota_color: representation_bias(&population, &quota_sel)?,
        blind_fairness: fairness(&population, &blind_sel, k)?,
        quota_fairness: fairness(&population, &quota_sel, k)?,
    })
}

/// Evenly spaced values from `min` to `max` inclusive; `steps == 1` yields
/// just `min`.
pub fn linspace(min: f64, max: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![min];
    }
    (0..steps)
        .map(|i| {
            let t = i as f64 / (steps - 1) as f64;
            min * (1.0 - t) + max * t
        })
        .collect()
}

/// A swept parameter of the synthetic model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    DColor,
    DShape,
    F,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::DColor => "d_color",
            SweepParam::DShape => "d_shape",
            SweepParam::F => "f",
        }
    }
}

/// One sweep axis: `steps` evenly spaced values of `param` from `min` to
/// `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.steps)
    }
}

/// Grid protocol for a representation sweep: up to two axes over
/// `{d_color, d_shape, f}`, fixed values for the remaining parameters, and
/// `reps` simulations per cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub axes: Vec<SweepAxis>,
    #[serde(default)]
    pub d_color: Option<f64>,
    #[serde(default)]
    pub d_shape: Option<f64>,
    #[serde(default)]
    pub f: Option<f64>,
    pub k: f64,
    pub n: u64,
    pub reps: u32,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    row: usize,
    col: usize,
    d_color: f64,
    d_shape: f64,
    f: f64,
}

impl SweepSpec {
    fn swept(&self, param: SweepParam) -> bool {
        self.axes.iter().any(|a| a.param == param)
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.len() > 2 {
            return Err(Error::InvalidConfig(format!(
                "at most 2 axes supported, got {}",
                self.axes.len()
            )));
        }
        if self.axes.len() == 2 && self.axes[0].param == self.axes[1].param {
            return Err(Error::InvalidConfig(format!(
                "both axes sweep {}",
                self.axes[0].param.name()
            )));
        }
        for axis in &self.axes {
            if axis.steps < 1 {
                return Err(Error::InvalidConfig(format!(
                    "axis {} needs steps >= 1",
                    axis.param.name()
                )));
            }
            if !axis.min.is_finite() || !axis.max.is_finite() || axis.min > axis.max {
                return Err(Error::InvalidConfig(format!(
                    "axis {} has invalid range [{}, {}]",
                    axis.param.name(),
                    axis.min,
                    axis.max
                )));
            }
        }
        let fixed = [
            (SweepParam::DColor, self.d_color),
            (SweepParam::DShape, self.d_shape),
            (SweepParam::F, self.f),
        ];
        for (param, value) in fixed {
            match (self.swept(param), value) {
                (true, Some(_)) => {
                    return Err(Error::InvalidConfig(format!(
                        "{} is both swept and fixed",
                        param.name()
                    )))
                }
                (false, None) => {
                    return Err(Error::InvalidConfig(format!(
                        "{} must be either swept or fixed",
                        param.name()
                    )))
                }
                (false, Some(v)) if !v.is_finite() => {
                    return Err(Error::InvalidConfig(format!(
                        "{} must be finite",
                        param.name()
                    )))
                }
                _ => {}
            }
        }
        if !(self.k.is_finite() && self.k > 0.0 && self.k < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "k must lie in (0, 1), got {}",
                self.k
            )));
        }
        if self.reps == 0 {
            return Err(Error::InvalidConfig("reps must be >= 1".into()));
        }
        // Correlated-attribute sweeps keep f strictly inside (0, 0.5); every
        // cell must also yield a valid population config.
        for f in self.f_values() {
            if f >= 0.5 {
                return Err(Error::InvalidConfig(format!(
                    "sweep f values must lie in (0, 0.5), got {f}"
                )));
            }
            PopulationConfig::new(self.n, f, BiasParams::ZERO, 0).validate()?;
        }
        Ok(())
    }

    fn f_values(&self) -> Vec<f64> {
        match self.axes.iter().find(|a| a.param == SweepParam::F) {
            Some(axis) => axis.values(),
            None => vec![self.f.unwrap_or(f64::NAN)],
        }
    }

    fn cells(&self) -> Vec<Cell> {
        let base = (
            self.d_color.unwrap_or(0.0),
            self.d_shape.unwrap_or(0.0),
            self.f.unwrap_or(0.0),
        );
        let axis_values = |axis: Option<&SweepAxis>| -> Vec<Option<(SweepParam, f64)>> {
            match axis {
                Some(a) => a.values().into_iter().map(|v| Some((a.param, v))).collect(),
                None => vec![None],
            }
        };
        let rows = axis_values(self.axes.first());
        let cols = axis_values(self.axes.get(1));
        let mut cells = Vec::with_capacity(rows.len() * cols.len());
        for (row, rv) in rows.iter().enumerate() {
            for (col, cv) in cols.iter().enumerate() {
                let (mut d_color, mut d_shape, mut f) = base;
                for assignment in [rv, cv].into_iter().flatten() {
                    match assignment.0 {
                        SweepParam::DColor => d_color = assignment.1,
                        SweepParam::DShape => d_shape = assignment.1,
                        SweepParam::F => f = assignment.1,
                    }
                }
                cells.push(Cell {
                    row,
                    col,
                    d_color,
                    d_shape,
                    f,
                });
            }
        }
        cells
    }
}

/// Aggregates for one sweep cell: parameter values, per-subgroup mean change
/// in representation bias after the color quota, and mean fairness before
/// and after, each with its standard error. Field order is the CSV column
/// order; JSON output uses the same names.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCellResult {
    pub d_color: f64,
    pub d_shape: f64,
    pub f: f64,
    pub k: f64,
    pub n: u64,
    pub reps: u32,
    pub failures: u32,
    pub delta_b_green_star_mean: Option<f64>,
    pub delta_b_green_star_se: Option<f64>,
    pub delta_b_green_circle_mean: Option<f64>,
    pub delta_b_green_circle_se: Option<f64>,
    pub delta_b_orange_star_mean: Option<f64>,
    pub delta_b_orange_star_se: Option<f64>,
    pub delta_b_orange_circle_mean: Option<f64>,
    pub delta_b_orange_circle_se: Option<f64>,
    pub f_k_blind_mean: Option<f64>,
    pub f_k_blind_se: Option<f64>,
    pub f_k_quota_mean: Option<f64>,
    pub f_k_quota_se: Option<f64>,
}

impl SweepCellResult {
    pub fn delta_b_mean(&self, subgroup: Subgroup) -> Option<f64> {
        match subgroup {
            Subgroup::GreenStar => self.delta_b_green_star_mean,
            Subgroup::GreenCircle => self.delta_b_green_circle_mean,
            Subgroup::OrangeStar => self.delta_b_orange_star_mean,
            Subgroup::OrangeCircle => self.delta_b_orange_circle_mean,
        }
    }

    pub fn delta_b_se(&self, subgroup: Subgroup) -> Option<f64> {
        match subgroup {
            Subgroup::GreenStar => self.delta_b_green_star_se,
            Subgroup::GreenCircle => self.delta_b_green_circle_se,
            Subgroup::OrangeStar => self.delta_b_orange_star_se,
            Subgroup::OrangeCircle => self.delta_b_orange_circle_se,
        }
    }
}

struct RepOutcome {
    delta_b: [Option<f64>; 4],
    f_k_blind: f64,
    f_k_quota: f64,
}

/// Mean and standard error of the mean; `None` for an empty sample, zero
/// standard error for a single observation.
pub(crate) fn mean_se(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (Some(mean), Some(0.0));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some((var / n).sqrt()))
}

fn run_sweep_cell(spec: &SweepSpec, cell: &Cell) -> Result<SweepCellResult> {
    let outcomes: Vec<Option<RepOutcome>> = (0..spec.reps)
        .into_par_iter()
        .map(|rep| {
            let seed = derive_seed(
                spec.master_seed,
                &[cell.row as u64, cell.col as u64, rep as u64],
            );
            let config = PopulationConfig::new(
                spec.n,
                cell.f,
                BiasParams::new(cell.d_color, cell.d_shape),
                seed,
            );
            match run_single_experiment(&config, spec.k) {
                Ok(result) => Ok(Some(RepOutcome {
                    delta_b: [
                        result.delta_b(Subgroup::GreenStar),
                        result.delta_b(Subgroup::GreenCircle),
                        result.delta_b(Subgroup::OrangeStar),
                        result.delta_b(Subgroup::OrangeCircle),
                    ],
                    f_k_blind: result.blind_fairness.f_k,
                    f_k_quota: result.quota_fairness.f_k,
                })),
                Err(Error::QuotaInfeasible { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let mut delta_b: [Vec<f64>; 4] = Default::default();
    let mut f_k_blind = Vec::new();
    let mut f_k_quota = Vec::new();
    let mut failures = 0u32;
    for outcome in &outcomes {
        match outcome {
            Some(rep) => {
                for (acc, value) in delta_b.iter_mut().zip(rep.delta_b) {
                    if let Some(v) = value {
                        acc.push(v);
                    }
                }
                f_k_blind.push(rep.f_k_blind);
                f_k_quota.push(rep.f_k_quota);
            }
            None => failures += 1,
        }
    }

    let [gs, gc, os, oc] = delta_b;
    let (delta_b_green_star_mean, delta_b_green_star_se) = mean_se(&gs);
    let (delta_b_green_circle_mean, delta_b_green_circle_se) = mean_se(&gc);
    let (delta_b_orange_star_mean, delta_b_orange_star_se) = mean_se(&os);
    let (delta_b_orange_circle_mean, delta_b_orange_circle_se) = mean_se(&oc);
    let (f_k_blind_mean, f_k_blind_se) = mean_se(&f_k_blind);
    let (f_k_quota_mean, f_k_quota_se) = mean_se(&f_k_quota);

    Ok(SweepCellResult {
        d_color: cell.d_color,
        d_shape: cell.d_shape,
        f: cell.f,
        k: spec.k,
        n: spec.n,
        reps: spec.reps,
        failures,
        delta_b_green_star_mean,
        delta_b_green_star_se,
        delta_b_green_circle_mean,
        delta_b_green_circle_se,
        delta_b_orange_star_mean,
        delta_b_orange_star_se,
        delta_b_orange_circle_mean,
        delta_b_orange_circle_se,
        f_k_blind_mean,
        f_k_blind_se,
        f_k_quota_mean,
        f_k_quota_se,
    })
}

/// Runs `reps` paired experiments per grid cell and aggregates the change in
/// representation per subgroup. Output is row-major over the grid and
/// independent of the execution schedule; infeasible quota repetitions are
/// counted per cell, not raised.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepCellResult>> {
    spec.validate()?;
    let cells = spec.cells();
    cells
        .par_iter()
        .map(|cell| run_sweep_cell(spec, cell))
        .collect()
}

/// Inclusive numeric range with a step count, for quality sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl AxisRange {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.steps)
    }
}

/// Protocol for quality curves: mean selected true quality before and after
/// color-quota debiasing over a `d_color` range, one curve per `d_shape`
/// value. `f = 0.5` is permitted here as the uncorrelated special case.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QualitySweepSpec {
    pub f: f64,
    pub k: f64,
    pub d_color: AxisRange,
    pub d_shape_values: Vec<f64>,
    pub n: u64,
    pub reps: u32,
    pub master_seed: u64,
}

impl QualitySweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k > 0.0 && self.k < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "k must lie in (0, 1), got {}",
                self.k
            )));
        }
        if self.d_color.steps < 1 || !self.d_color.min.is_finite() || !self.d_color.max.is_finite()
            || self.d_color.min > self.d_color.max
        {
            return Err(Error::InvalidConfig("invalid d_color range".into()));
        }
        if self.d_shape_values.is_empty() || self.d_shape_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "d_shape_values must be a non-empty list of finite values".into(),
            ));
        }
        if self.reps == 0 {
            return Err(Error::InvalidConfig("reps must be >= 1".into()));
        }
        PopulationConfig::new(self.n, self.f, BiasParams::ZERO, 0).validate()
    }
}

/// Aggregates for one quality-sweep point. `delta_quality` is the paired
/// per-repetition difference (quota minus blind) in mean selected true
/// quality; its confidence interval locates the region where debiasing
/// lowers quality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityCellResult {
    pub d_color: f64,
    pub d_shape: f64,
    pub f: f64,
    pub k: f64,
    pub n: u64,
    pub reps: u32,
    pub failures: u32,
    pub quality_blind_mean: Option<f64>,
    pub quality_blind_se: Option<f64>,
    pub quality_quota_mean: Option<f64>,
    pub quality_quota_se: Option<f64>,
    pub quality_unbiased_mean: Option<f64>,
    pub quality_unbiased_se: Option<f64>,
    pub f_k_blind_mean: Option<f64>,
    pub f_k_blind_se: Option<f64>,
    pub f_k_quota_mean: Option<f64>,
    pub f_k_quota_se: Option<f64>,
    pub delta_quality_mean: Option<f64>,
    pub delta_quality_se: Option<f64>,
}

struct QualityOutcome {
    q_blind: f64,
    q_quota: f64,
    q_best: f64,
    f_k_blind: f64,
    f_k_quota: f64,
}

fn run_quality_rep(
    spec: &QualitySweepSpec,
    d_color: f64,
    d_shape: f64,
    seed: u64,
) -> Result<Option<QualityOutcome>> {
    let config = PopulationConfig::new(spec.n, spec.f, BiasParams::new(d_color, d_shape), seed);
    let population = generate_population(&config)?;
    let blind = select_top_k(&population, config.bias, spec.k, ScoreBasis::PerceivedQuality)?;
    let quota = match select_with_quota(&population, config.bias, spec.k, Attribute::Color) {
        Ok(sel) => sel,
        Err(Error::QuotaInfeasible { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let best = select_top_k(&population, config.bias, spec.k, ScoreBasis::TrueQuality)?;
    Ok(Some(QualityOutcome {
        q_blind: mean_true_quality(&population, &blind)?,
        q_quota: mean_true_quality(&population, &quota)?,
        q_best: mean_true_quality(&population, &best)?,
        f_k_blind: fairness(&population, &blind, spec.k)?.f_k,
        f_k_quota: fairness(&population, &quota, spec.k)?.f_k,
    }))
}

/// Quality curves behind the debiasing-vs-quality comparison: for each
/// `(d_color, d_shape)` point, mean true quality of blind, quota, and
/// unbiased selections over `reps` paired repetitions.
pub fn quality_sweep(spec: &QualitySweepSpec) -> Result<Vec<QualityCellResult>> {
    spec.validate()?;
    let d_colors = spec.d_color.values();
    let points: Vec<(usize, usize, f64, f64)> = d_colors
        .iter()
        .enumerate()
        .flat_map(|(i, &dc)| {
            spec.d_shape_values
                .iter()
                .enumerate()
                .map(move |(j, &ds)| (i, j, dc, ds))
        })
        .collect();

    points
        .par_iter()
        .map(|&(i, j, d_color, d_shape)| {
            let outcomes: Vec<Option<QualityOutcome>> = (0..spec.reps)
                .into_par_iter()
                .map(|rep| {
                    let seed =
                        derive_seed(spec.master_seed, &[i as u64, j as u64, rep as u64]);
                    run_quality_rep(spec, d_color, d_shape, seed)
                })
                .collect::<Result<_>>()?;

            let mut q_blind = Vec::new();
            let mut q_quota = Vec::new();
            let mut q_best = Vec::new();
            let mut f_blind = Vec::new();
            let mut f_quota = Vec::new();
            let mut delta = Vec::new();
            let mut failures = 0u32;
            for outcome in &outcomes {
                match outcome {
                    Some(rep) => {
                        q_blind.push(rep.q_blind);
                        q_quota.push(rep.q_quota);
                        q_best.push(rep.q_best);
                        f_blind.push(rep.f_k_blind);
                        f_quota.push(rep.f_k_quota);
                        delta.push(rep.f_k_quota - rep.f_k_blind);
                    }
                    None => failures += 1,
                }
            }

            let (quality_blind_mean, quality_blind_se) = mean_se(&q_blind);
            let (quality_quota_mean, quality_quota_se) = mean_se(&q_quota);
            let (quality_unbiased_mean, quality_unbiased_se) = mean_se(&q_best);
            let (f_k_blind_mean, f_k_blind_se) = mean_se(&f_blind);
            let (f_k_quota_mean, f_k_quota_se) = mean_se(&f_quota);
            let (delta_quality_mean, delta_quality_se) = mean_se(&delta);

            Ok(QualityCellResult {
                d_color,
                d_shape,
                f: spec.f,
                k: spec.k,
                n: spec.n,
                reps: spec.reps,
                failures,
                quality_blind_mean,
                quality_blind_se,
                quality_quota_mean,
                quality_quota_se,
                quality_unbiased_mean,
                quality_unbiased_se,
                f_k_blind_mean,
                f_k_blind_se,
                f_k_quota_mean,
                f_k_quota_se,
                delta_quality_mean,
                delta_quality_se,
            })
        })
        .collect()
}

/// Serializes sweep cells as CSV, one row per cell, headers from the field
/// names. Undefined aggregates become empty fields.
pub fn write_sweep_csv<W: std::io::Write>(results: &[SweepCellResult], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in results {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV form of quality-sweep results, mirroring [`write_sweep_csv`].
pub fn write_quality_csv<W: std::io::Write>(
    results: &[QualityCellResult],
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in results {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
