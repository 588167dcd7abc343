//! CSV ingestion, binarization, and quota analysis of empirical data.
//!
//! A [`DatasetSpec`] declares where the data lives and how to read it: which
//! column holds perceived quality, how to binarize the visible and hidden
//! attribute columns, which side of each is the advantaged one, and whether
//! quality is log-transformed before the model fit. Rows with missing or
//! unmappable values in any used column are dropped and counted.
//!
//! Subgroup keys reuse the synthetic naming by indicator alignment: the
//! indicator-1 side maps to the disadvantaged label, so green means visible
//! disadvantaged, orange visible advantaged, star hidden disadvantaged, and
//! circle hidden advantaged.

pub mod fixtures;
mod stats;

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use stats::pearson;

use crate::error::{Error, Result};
use crate::metrics::{report_from_counts, RepresentationReport};
use crate::population::Subgroup;
use crate::seeding::derive_seed;
use crate::selection::{quota_top_ids, slot_count, top_m_ids};

/// Transform applied to quality before model fitting. Selection always ranks
/// the raw values; a monotone transform cannot change any selected set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityTransform {
    #[default]
    Identity,
    Log,
}

/// How a raw column is mapped to {advantaged, disadvantaged}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BinarizationRule {
    /// Explicit category sets; rows with any other value are dropped.
    Categories {
        advantaged: Vec<String>,
        disadvantaged: Vec<String>,
    },
    /// Numeric cutoff: strictly above `value` is advantaged.
    Threshold { value: f64 },
    /// Strictly above the column median (computed after row filtering) is
    /// advantaged. Unlike the other rules this does not commute with
    /// filtering.
    MedianSplit,
}

/// One attribute column plus its binarization rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeSpec {
    pub column: String,
    pub rule: BinarizationRule,
}

/// Declarative description of a CSV dataset (RFC 4180, header row required).
///
/// In a spec loaded from a file via [`load_spec`], a relative `source` is
/// resolved against the spec file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub source: PathBuf,
    pub quality_column: String,
    pub visible: AttributeSpec,
    pub hidden: AttributeSpec,
    #[serde(default)]
    pub transform: QualityTransform,
    #[serde(default)]
    pub k: Option<f64>,
    /// Valence note carried into reports: when true, a high score is a bad
    /// outcome for the person and overrepresentation at the top is harmful.
    #[serde(default)]
    pub higher_is_worse: bool,
}

impl DatasetSpec {
    fn validate(&self) -> Result<()> {
        for attr in [&self.visible, &self.hidden] {
            if let BinarizationRule::Categories {
                advantaged,
                disadvantaged,
            } = &attr.rule
            {
                if advantaged.is_empty() || disadvantaged.is_empty() {
                    return Err(Error::InvalidConfig(format!(
                        "column {:?}: both category sets must be non-empty",
                        attr.column
                    )));
                }
                let adv: HashSet<&String> = advantaged.iter().collect();
                if disadvantaged.iter().any(|c| adv.contains(c)) {
                    return Err(Error::InvalidConfig(format!(
                        "column {:?}: category sets overlap",
                        attr.column
                    )));
                }
            }
        }
        if let Some(k) = self.k {
            if !(k.is_finite() && k > 0.0 && k < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "k must lie in (0, 1), got {k}"
                )));
            }
        }
        Ok(())
    }
}

/// Reads a [`DatasetSpec`] from a JSON file, resolving a relative `source`
/// against the spec file's directory.
pub fn load_spec(path: &Path) -> Result<DatasetSpec> {
    let text = std::fs::read_to_string(path)?;
    let mut spec: DatasetSpec = serde_json::from_str(&text)?;
    if spec.source.is_relative() {
        if let Some(parent) = path.parent() {
            spec.source = parent.join(&spec.source);
        }
    }
    Ok(spec)
}

/// One loaded row. The disadvantaged side of each attribute carries the
/// indicator, mirroring the synthetic model's green/star convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalRow {
    pub q_hat: f64,
    pub visible_disadvantaged: bool,
    pub hidden_disadvantaged: bool,
}

impl EmpiricalRow {
    pub fn subgroup(&self) -> Subgroup {
        match (self.visible_disadvantaged, self.hidden_disadvantaged) {
            (true, true) => Subgroup::GreenStar,
            (true, false) => Subgroup::GreenCircle,
            (false, true) => Subgroup::OrangeStar,
            (false, false) => Subgroup::OrangeCircle,
        }
    }
}

/// A loaded, binarized dataset.
#[derive(Debug, Clone)]
pub struct EmpiricalPopulation {
    pub rows: Vec<EmpiricalRow>,
    pub provenance: DatasetSpec,
    pub n_dropped: usize,
}

impl EmpiricalPopulation {
    /// Subgroup cell sizes in [`Subgroup::ALL`] order.
    pub fn cell_sizes(&self) -> [usize; 4] {
        let mut sizes = [0usize; 4];
        for row in &self.rows {
            sizes[row.subgroup().index()] += 1;
        }
        sizes
    }

    /// Correlation between the two advantaged-side indicator vectors.
    pub fn attribute_correlation(&self) -> Result<(f64, f64)> {
        let visible: Vec<f64> = self
            .rows
            .iter()
            .map(|r| if r.visible_disadvantaged { 0.0 } else { 1.0 })
            .collect();
        let hidden: Vec<f64> = self
            .rows
            .iter()
            .map(|r| if r.hidden_disadvantaged { 0.0 } else { 1.0 })
            .collect();
        pearson(&visible, &hidden)
    }
}

/// A field parsed under one binarization rule; median-split labels stay
/// numeric until the whole file is read.
enum PendingLabel {
    Resolved { disadvantaged: bool },
    Numeric(f64),
}

fn parse_field(raw: &str, rule: &BinarizationRule) -> Option<PendingLabel> {
    let raw = raw.trim();
    if raw.is_empty() {
        return None;
    }
    match rule {
        BinarizationRule::Categories {
            advantaged,
            disadvantaged,
        } => {
            if advantaged.iter().any(|c| c == raw) {
                Some(PendingLabel::Resolved {
                    disadvantaged: false,
                })
            } else if disadvantaged.iter().any(|c| c == raw) {
                Some(PendingLabel::Resolved {
                    disadvantaged: true,
                })
            } else {
                None
            }
        }
        BinarizationRule::Threshold { value } => {
            let parsed: f64 = raw.parse().ok()?;
            parsed.is_finite().then_some(PendingLabel::Resolved {
                disadvantaged: parsed <= *value,
            })
        }
        BinarizationRule::MedianSplit => {
            let parsed: f64 = raw.parse().ok()?;
            parsed.is_finite().then_some(PendingLabel::Numeric(parsed))
        }
    }
}

/// Median of `values` (mean of the middle two for even counts).
fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

fn resolve_labels(pending: Vec<PendingLabel>) -> Vec<bool> {
    let numeric: Vec<f64> = pending
        .iter()
        .filter_map(|p| match p {
            PendingLabel::Numeric(v) => Some(*v),
            PendingLabel::Resolved { .. } => None,
        })
        .collect();
    let cut = if numeric.is_empty() {
        f64::NAN
    } else {
        median(&numeric)
    };
    pending
        .into_iter()
        .map(|p| match p {
            PendingLabel::Resolved { disadvantaged } => disadvantaged,
            // Strictly above the median is advantaged; ties go down.
            PendingLabel::Numeric(v) => v <= cut,
        })
        .collect()
}

/// Loads and binarizes the CSV named by `spec`. Rows with a missing,
/// unparseable, or unmapped value in any used column are dropped and counted
/// in `n_dropped`; median splits are computed over the surviving rows.
pub fn load_dataset(spec: &DatasetSpec) -> Result<EmpiricalPopulation> {
    spec.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(&spec.source)?;
    let headers = reader.headers()?.clone();
    let column_index = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                column: name.to_string(),
            })
    };
    let quality_idx = column_index(&spec.quality_column)?;
    let visible_idx = column_index(&spec.visible.column)?;
    let hidden_idx = column_index(&spec.hidden.column)?;

    let mut qualities = Vec::new();
    let mut visible_pending = Vec::new();
    let mut hidden_pending = Vec::new();
    let mut n_dropped = 0usize;
    for record in reader.records() {
        let record = record?;
        let quality: Option<f64> = record
            .get(quality_idx)
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .and_then(|s| s.parse().ok())
            .filter(|v: &f64| v.is_finite());
        let visible = record
            .get(visible_idx)
            .and_then(|raw| parse_field(raw, &spec.visible.rule));
        let hidden = record
            .get(hidden_idx)
            .and_then(|raw| parse_field(raw, &spec.hidden.rule));
        match (quality, visible, hidden) {
            (Some(q), Some(v), Some(h)) => {
                qualities.push(q);
                visible_pending.push(v);
                hidden_pending.push(h);
            }
            _ => n_dropped += 1,
        }
    }
    if qualities.is_empty() {
        return Err(Error::EmptyData);
    }
    if spec.transform == QualityTransform::Log {
        if let Some(bad) = qualities.iter().find(|q| **q <= 0.0) {
            return Err(Error::Transform(format!(
                "log transform requires strictly positive quality values, found {bad}"
            )));
        }
    }

    let visible_labels = resolve_labels(visible_pending);
    let hidden_labels = resolve_labels(hidden_pending);
    let rows = qualities
        .into_iter()
        .zip(visible_labels)
        .zip(hidden_labels)
        .map(|((q_hat, visible_disadvantaged), hidden_disadvantaged)| EmpiricalRow {
            q_hat,
            visible_disadvantaged,
            hidden_disadvantaged,
        })
        .collect();
    Ok(EmpiricalPopulation {
        rows,
        provenance: spec.clone(),
        n_dropped,
    })
}

/// Blind and visible-quota representation reports for `scores` (one score
/// per row, row order = entity id order).
fn representation_for_scores(
    emp: &EmpiricalPopulation,
    scores: &[f64],
    k: f64,
) -> Result<(RepresentationReport, RepresentationReport)> {
    let m = slot_count(k, emp.rows.len())?;
    let mut disadvantaged = Vec::new();
    let mut advantaged = Vec::new();
    for (i, row) in emp.rows.iter().enumerate() {
        let pair = (i as u64, scores[i]);
        if row.visible_disadvantaged {
            disadvantaged.push(pair);
        } else {
            advantaged.push(pair);
        }
    }
    if disadvantaged.is_empty() || advantaged.is_empty() {
        return Err(Error::DegenerateInput(
            "both visible attribute values must be present".into(),
        ));
    }

    let all: Vec<(u64, f64)> = scores
        .iter()
        .enumerate()
        .map(|(i, &s)| (i as u64, s))
        .collect();
    let blind_ids = top_m_ids(all, m);
    // Group order fixes the remainder tie-break: indicator-1 side first,
    // matching the synthetic color quota.
    let quota_ids = quota_top_ids(
        [disadvantaged, advantaged],
        ["visible_disadvantaged", "visible_advantaged"],
        m,
    )?;

    let sizes = emp.cell_sizes();
    let count = |ids: &std::collections::BTreeSet<u64>| {
        let mut selected = [0usize; 4];
        for &id in ids {
            selected[emp.rows[id as usize].subgroup().index()] += 1;
        }
        selected
    };
    Ok((
        report_from_counts(sizes, count(&blind_ids)),
        report_from_counts(sizes, count(&quota_ids)),
    ))
}

/// Treats rows as entities with given perceived quality and compares blind
/// top-k against a quota on the visible attribute with slots proportional to
/// the empirical visible-group sizes. Returns `(blind, quota_on_visible)`.
pub fn empirical_representation(
    emp: &EmpiricalPopulation,
    k: f64,
) -> Result<(RepresentationReport, RepresentationReport)> {
    let scores: Vec<f64> = emp.rows.iter().map(|r| r.q_hat).collect();
    representation_for_scores(emp, &scores, k)
}

/// Per-subgroup cell counts with fixed JSON keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GroupCounts {
    pub green_star: usize,
    pub green_circle: usize,
    pub orange_star: usize,
    pub orange_circle: usize,
}

impl GroupCounts {
    fn from_sizes(sizes: [usize; 4]) -> Self {
        GroupCounts {
            green_star: sizes[0],
            green_circle: sizes[1],
            orange_star: sizes[2],
            orange_circle: sizes[3],
        }
    }

    pub fn get(&self, subgroup: Subgroup) -> usize {
        match subgroup {
            Subgroup::GreenStar => self.green_star,
            Subgroup::GreenCircle => self.green_circle,
            Subgroup::OrangeStar => self.orange_star,
            Subgroup::OrangeCircle => self.orange_circle,
        }
    }
}

/// Normal approximation fitted to an empirical dataset: overall mean and
/// standard deviation of (transformed) quality, plus marginal mean gaps as
/// the fitted attribute biases.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelFit {
    pub mu: f64,
    pub sigma: f64,
    /// Marginal advantaged-minus-disadvantaged gap on the visible attribute;
    /// applying `-d_visible` to the indicator-1 (disadvantaged) side
    /// reproduces it.
    pub d_visible: f64,
    pub d_hidden: f64,
    pub transform: QualityTransform,
    pub cell_counts: GroupCounts,
}

fn transformed_quality(emp: &EmpiricalPopulation) -> Result<Vec<f64>> {
    match emp.provenance.transform {
        QualityTransform::Identity => Ok(emp.rows.iter().map(|r| r.q_hat).collect()),
        QualityTransform::Log => emp
            .rows
            .iter()
            .map(|r| {
                if r.q_hat > 0.0 {
                    Ok(r.q_hat.ln())
                } else {
                    Err(Error::Transform(format!(
                        "log transform requires strictly positive quality values, found {}",
                        r.q_hat
                    )))
                }
            })
            .collect(),
    }
}

/// Fits the synthetic-model approximation: `mu`/`sigma` over all rows and
/// marginal group-mean differences as `d_visible`/`d_hidden`. The transform
/// declared in the dataset spec is applied first.
pub fn fit_model_approximation(emp: &EmpiricalPopulation) -> Result<ModelFit> {
    let sizes = emp.cell_sizes();
    for subgroup in Subgroup::ALL {
        if sizes[subgroup.index()] == 0 {
            return Err(Error::EmptyCell {
                cell: subgroup.key().to_string(),
            });
        }
    }
    let values = transformed_quality(emp)?;
    let n = values.len() as f64;
    let mu = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (n - 1.0);
    let sigma = variance.sqrt();
    if sigma <= 0.0 {
        return Err(Error::DegenerateInput(
            "quality has zero variance; cannot fit sigma".into(),
        ));
    }

    let mut sums = [0.0f64; 4];
    let mut counts = [0usize; 4];
    for (row, value) in emp.rows.iter().zip(&values) {
        let idx = row.subgroup().index();
        sums[idx] += value;
        counts[idx] += 1;
    }
    let mean_over = |groups: [Subgroup; 2]| {
        let total: f64 = groups.iter().map(|g| sums[g.index()]).sum();
        let count: usize = groups.iter().map(|g| counts[g.index()]).sum();
        total / count as f64
    };
    use crate::population::{Color, Shape};
    let d_visible =
        mean_over(Subgroup::with_color(Color::Orange)) - mean_over(Subgroup::with_color(Color::Green));
    let d_hidden =
        mean_over(Subgroup::with_shape(Shape::Circle)) - mean_over(Subgroup::with_shape(Shape::Star));
    Ok(ModelFit {
        mu,
        sigma,
        d_visible,
        d_hidden,
        transform: emp.provenance.transform,
        cell_counts: GroupCounts::from_sizes(sizes),
    })
}

/// Monte Carlo aggregates of the model approximation: mean change in
/// representation bias per subgroup (quota minus blind) with standard
/// errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproximationSummary {
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
}

impl ApproximationSummary {
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

/// Redraws quality from the fitted normal model while keeping every row's
/// attribute pair fixed, then reruns the blind-vs-quota comparison, `reps`
/// times. Repetition `r` uses the stream seeded by `derive_seed(seed, [r])`.
pub fn simulate_approximation(
    fit: &ModelFit,
    emp: &EmpiricalPopulation,
    k: f64,
    reps: u32,
    seed: u64,
) -> Result<ApproximationSummary> {
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be >= 1".into()));
    }
    if fit.cell_counts != GroupCounts::from_sizes(emp.cell_sizes()) {
        return Err(Error::InvalidArgument(
            "model fit cell counts do not match the dataset".into(),
        ));
    }
    let outcomes: Vec<Option<[Option<f64>; 4]>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[rep as u64]));
            let scores: Vec<f64> = emp
                .rows
                .iter()
                .map(|row| {
                    let q: f64 = StandardNormal.sample(&mut rng);
                    let q = fit.mu + fit.sigma * q;
                    q - fit.d_visible * if row.visible_disadvantaged { 1.0 } else { 0.0 }
                        - fit.d_hidden * if row.hidden_disadvantaged { 1.0 } else { 0.0 }
                })
                .collect();
            match representation_for_scores(emp, &scores, k) {
                Ok((blind, quota)) => {
                    let delta = Subgroup::ALL.map(|g| {
                        Some(
                            quota.group(g).representation_bias?
                                - blind.group(g).representation_bias?,
                        )
                    });
                    Ok(Some(delta))
                }
                Err(Error::QuotaInfeasible { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let mut per_group: [Vec<f64>; 4] = Default::default();
    let mut failures = 0u32;
    for outcome in &outcomes {
        match outcome {
            Some(delta) => {
                for (acc, value) in per_group.iter_mut().zip(delta) {
                    if let Some(v) = value {
                        acc.push(*v);
                    }
                }
            }
            None => failures += 1,
        }
    }
    let (gs_mean, gs_se) = crate::analysis::mean_se(&per_group[0]);
    let (gc_mean, gc_se) = crate::analysis::mean_se(&per_group[1]);
    let (os_mean, os_se) = crate::analysis::mean_se(&per_group[2]);
    let (oc_mean, oc_se) = crate::analysis::mean_se(&per_group[3]);
    Ok(ApproximationSummary {
        reps,
        failures,
        delta_b_green_star_mean: gs_mean,
        delta_b_green_star_se: gs_se,
        delta_b_green_circle_mean: gc_mean,
        delta_b_green_circle_se: gc_se,
        delta_b_orange_star_mean: os_mean,
        delta_b_orange_star_se: os_se,
        delta_b_orange_circle_mean: oc_mean,
        delta_b_orange_circle_se: oc_se,
    })
}

/// Full dataset pipeline output: correlation, empirical blind-vs-quota
/// reports, model fit, and the approximation's representation changes.
#[derive(Debug, Clone, Serialize)]
pub struct DatasetReport {
    pub source: String,
    pub n_rows: usize,
    pub n_dropped: usize,
    pub k: f64,
    pub higher_is_worse: bool,
    pub correlation_r: f64,
    pub correlation_p: f64,
    pub blind: RepresentationReport,
    pub quota_visible: RepresentationReport,
    pub delta_b_green_star: Option<f64>,
    pub delta_b_green_circle: Option<f64>,
    pub delta_b_orange_star: Option<f64>,
    pub delta_b_orange_circle: Option<f64>,
    pub fit: ModelFit,
    pub approximation: ApproximationSummary,
}

impl DatasetReport {
    pub fn delta_b(&self, subgroup: Subgroup) -> Option<f64> {
        match subgroup {
            Subgroup::GreenStar => self.delta_b_green_star,
            Subgroup::GreenCircle => self.delta_b_green_circle,
            Subgroup::OrangeStar => self.delta_b_orange_star,
            Subgroup::OrangeCircle => self.delta_b_orange_circle,
        }
    }
}

/// Runs the whole pipeline on an already-loaded dataset: attribute
/// correlation, empirical representation with and without the visible
/// quota, model fit, and the fitted-model approximation.
pub fn analyze_loaded(
    emp: &EmpiricalPopulation,
    k: f64,
    reps: u32,
    seed: u64,
) -> Result<DatasetReport> {
    let (correlation_r, correlation_p) = emp.attribute_correlation()?;
    let (blind, quota_visible) = empirical_representation(emp, k)?;
    let fit = fit_model_approximation(emp)?;
    let approximation = simulate_approximation(&fit, emp, k, reps, seed)?;
    let delta = |g: Subgroup| {
        Some(quota_visible.group(g).representation_bias? - blind.group(g).representation_bias?)
    };
    Ok(DatasetReport {
        source: emp.provenance.source.display().to_string(),
        n_rows: emp.rows.len(),
        n_dropped: emp.n_dropped,
        k,
        higher_is_worse: emp.provenance.higher_is_worse,
        correlation_r,
        correlation_p,
        delta_b_green_star: delta(Subgroup::GreenStar),
        delta_b_green_circle: delta(Subgroup::GreenCircle),
        delta_b_orange_star: delta(Subgroup::OrangeStar),
        delta_b_orange_circle: delta(Subgroup::OrangeCircle),
        blind,
        quota_visible,
        fit,
        approximation,
    })
}

/// Loads `spec` and runs [`analyze_loaded`]. `k` falls back to the spec's
/// value, then to 0.2.
pub fn analyze_dataset(
    spec: &DatasetSpec,
    k: Option<f64>,
    reps: u32,
    seed: u64,
) -> Result<DatasetReport> {
    let emp = load_dataset(spec)?;
    let k = k.or(spec.k).unwrap_or(0.2);
    analyze_loaded(&emp, k, reps, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp_csv(content: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let mut file = std::fs::File::create(&path).unwrap();
        file.write_all(content.as_bytes()).unwrap();
        (dir, path)
    }

    fn category_spec(source: PathBuf) -> DatasetSpec {
        DatasetSpec {
            source,
            quality_column: "score".into(),
            visible: AttributeSpec {
                column: "vis".into(),
                rule: BinarizationRule::Categories {
                    advantaged: vec!["M".into()],
                    disadvantaged: vec!["F".into()],
                },
            },
            hidden: AttributeSpec {
                column: "hid".into(),
                rule: BinarizationRule::Categories {
                    advantaged: vec!["yes".into()],
                    disadvantaged: vec!["no".into()],
                },
            },
            transform: QualityTransform::Identity,
            k: None,
            higher_is_worse: false,
        }
    }

    #[test]
    fn median_split_labels_top_half_advantaged() {
        let mut csv = String::from("score,vis,hid\n");
        for i in 1..=10 {
            csv.push_str(&format!("{i},M,{i}\n"));
        }
        let (_dir, path) = write_temp_csv(&csv);
        let mut spec = category_spec(path);
        spec.visible.rule = BinarizationRule::Categories {
            advantaged: vec!["M".into()],
            disadvantaged: vec!["F".into()],
        };
        spec.hidden.rule = BinarizationRule::MedianSplit;
        let emp = load_dataset(&spec).unwrap();
        // Median of 1..=10 is 5.5; values 6..=10 are advantaged.
        let advantaged = emp.rows.iter().filter(|r| !r.hidden_disadvantaged).count();
        assert_eq!(advantaged, 5);
        for (i, row) in emp.rows.iter().enumerate() {
            assert_eq!(row.hidden_disadvantaged, i < 5);
        }
    }

    #[test]
    fn category_mapping_and_unknown_drop() {
        let csv = "score,vis,hid\n1.0,F,yes\n2.0,M,no\n3.0,X,yes\n";
        let (_dir, path) = write_temp_csv(csv);
        let emp = load_dataset(&category_spec(path)).unwrap();
        assert_eq!(emp.rows.len(), 2);
        assert_eq!(emp.n_dropped, 1);
        assert!(emp.rows[0].visible_disadvantaged);
        assert!(!emp.rows[1].visible_disadvantaged);
        assert!(emp.rows[1].hidden_disadvantaged);
    }

    #[test]
    fn threshold_rule_is_strictly_above() {
        let csv = "score,vis,hid\n1.0,2.0,yes\n2.0,5.0,yes\n3.0,5.1,no\n";
        let (_dir, path) = write_temp_csv(csv);
        let mut spec = category_spec(path);
        spec.visible.rule = BinarizationRule::Threshold { value: 5.0 };
        let emp = load_dataset(&spec).unwrap();
        assert!(emp.rows[0].visible_disadvantaged);
        assert!(emp.rows[1].visible_disadvantaged); // exactly at threshold
        assert!(!emp.rows[2].visible_disadvantaged);
    }

    #[test]
    fn missing_values_are_dropped_and_counted() {
        let csv = "score,vis,hid\n1.0,F,yes\n,M,no\n2.0,,yes\n3.0,M,\nnot_a_number,F,no\n4.0,M,yes\n";
        let (_dir, path) = write_temp_csv(csv);
        let emp = load_dataset(&category_spec(path)).unwrap();
        assert_eq!(emp.rows.len(), 2);
        assert_eq!(emp.n_dropped, 4);
    }

    #[test]
    fn schema_errors_name_the_column() {
        let csv = "score,vis\n1.0,F\n";
        let (_dir, path) = write_temp_csv(csv);
        let err = load_dataset(&category_spec(path)).unwrap_err();
        match err {
            Error::MissingColumn { column } => assert_eq!(column, "hid"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_after_filtering_errors() {
        let csv = "score,vis,hid\n1.0,X,yes\n";
        let (_dir, path) = write_temp_csv(csv);
        assert!(matches!(
            load_dataset(&category_spec(path)),
            Err(Error::EmptyData)
        ));
    }

    #[test]
    fn log_transform_rejects_non_positive_quality() {
        let csv = "score,vis,hid\n1.0,F,yes\n-2.0,M,no\n";
        let (_dir, path) = write_temp_csv(csv);
        let mut spec = category_spec(path);
        spec.transform = QualityTransform::Log;
        assert!(matches!(
            load_dataset(&spec),
            Err(Error::Transform(_))
        ));
    }

    fn hand_rows(rows: &[(f64, bool, bool)]) -> EmpiricalPopulation {
        EmpiricalPopulation {
            rows: rows
                .iter()
                .map(|&(q_hat, visible_disadvantaged, hidden_disadvantaged)| EmpiricalRow {
                    q_hat,
                    visible_disadvantaged,
                    hidden_disadvantaged,
                })
                .collect(),
            provenance: category_spec(PathBuf::from("unused.csv")),
            n_dropped: 0,
        }
    }

    #[test]
    fn twelve_row_hand_enumeration() {
        // 8 advantaged-visible rows (2 hidden-dis), 4 disadvantaged-visible
        // rows (2 hidden-dis). k = 0.25 -> m = 3; quota: 2 advantaged + 1
        // disadvantaged.
        let emp = hand_rows(&[
            (10.0, false, false), // 0
            (9.0, false, false),  // 1
            (8.0, false, true),   // 2
            (7.0, false, false),  // 3
            (6.0, false, true),   // 4
            (5.0, false, false),  // 5
            (4.5, false, false),  // 6
            (4.0, false, false),  // 7
            (9.5, true, false),   // 8
            (3.0, true, true),    // 9
            (2.0, true, false),   // 10
            (1.0, true, true),    // 11
        ]);
        let (blind, quota) = empirical_representation(&emp, 0.25).unwrap();
        // Blind top-3 by q_hat: rows 0 (10.0), 8 (9.5), 1 (9.0).
        assert_eq!(blind.m, 3);
        assert_eq!(blind.group(Subgroup::OrangeCircle).selected_count, 2);
        assert_eq!(blind.group(Subgroup::GreenCircle).selected_count, 1);
        assert_eq!(blind.group(Subgroup::OrangeStar).selected_count, 0);
        // k_eff = 3/12 = 0.25; orange_circle: 2/6 / 0.25 - 1 = 1/3.
        let b_oc = blind.group(Subgroup::OrangeCircle).representation_bias.unwrap();
        assert!((b_oc - (2.0 / 6.0 / 0.25 - 1.0)).abs() < 1e-12);
        assert_eq!(
            blind.group(Subgroup::OrangeStar).representation_bias,
            Some(-1.0)
        );

        // Quota: advantaged group (8 rows) gets 2 slots: rows 0, 1; the
        // disadvantaged group (4 rows) gets 1 slot: row 8.
        assert_eq!(quota.group(Subgroup::OrangeCircle).selected_count, 2);
        assert_eq!(quota.group(Subgroup::GreenCircle).selected_count, 1);
        assert_eq!(quota.group(Subgroup::GreenStar).selected_count, 0);
    }

    #[test]
    fn equal_scores_fall_back_to_row_order_with_parity() {
        let rows: Vec<(f64, bool, bool)> =
            (0..10).map(|i| (1.0, i % 2 == 0, false)).collect();
        let emp = hand_rows(&rows);
        let (blind, quota) = empirical_representation(&emp, 0.4).unwrap();
        // Blind: first four rows by id.
        assert_eq!(blind.m, 4);
        let total_green_blind = blind.group(Subgroup::GreenCircle).selected_count
            + blind.group(Subgroup::GreenStar).selected_count;
        assert_eq!(total_green_blind, 2);
        let green_quota = quota.group(Subgroup::GreenCircle).selected_count;
        let orange_quota = quota.group(Subgroup::OrangeCircle).selected_count;
        assert!(green_quota.abs_diff(orange_quota) <= 1);
    }

    #[test]
    fn fit_recovers_hand_set_means() {
        let emp = hand_rows(&[
            (1.2, false, false),
            (0.8, false, true),
            (0.3, true, false),
            (0.1, true, true),
        ]);
        let fit = fit_model_approximation(&emp).unwrap();
        assert!((fit.d_visible - 0.8).abs() < 1e-12);
        assert!((fit.d_hidden - 0.3).abs() < 1e-12);
        assert!((fit.mu - 0.6).abs() < 1e-12);
    }

    #[test]
    fn fit_is_shift_invariant_in_the_gaps() {
        let base = [
            (1.2, false, false),
            (0.8, false, true),
            (0.3, true, false),
            (0.1, true, true),
        ];
        let shifted: Vec<(f64, bool, bool)> =
            base.iter().map(|&(q, v, h)| (q + 10.0, v, h)).collect();
        let fit_a = fit_model_approximation(&hand_rows(&base)).unwrap();
        let fit_b = fit_model_approximation(&hand_rows(&shifted)).unwrap();
        assert!((fit_b.mu - fit_a.mu - 10.0).abs() < 1e-12);
        assert!((fit_b.d_visible - fit_a.d_visible).abs() < 1e-12);
        assert!((fit_b.d_hidden - fit_a.d_hidden).abs() < 1e-12);
        assert!((fit_b.sigma - fit_a.sigma).abs() < 1e-12);
    }

    #[test]
    fn fit_names_the_empty_cell() {
        let emp = hand_rows(&[
            (1.2, false, false),
            (0.8, false, true),
            (0.3, true, false),
        ]);
        match fit_model_approximation(&emp) {
            Err(Error::EmptyCell { cell }) => assert_eq!(cell, "green_star"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_bias_approximation_stays_flat() {
        let rows: Vec<(f64, bool, bool)> = (0..200)
            .map(|i| (0.0, i % 2 == 0, i % 4 < 2))
            .collect();
        let mut emp = hand_rows(&rows);
        // Give the fit a non-degenerate sigma but no group gaps.
        for (i, row) in emp.rows.iter_mut().enumerate() {
            row.q_hat = if i % 8 < 4 { 1.0 } else { -1.0 };
        }
        let fit = ModelFit {
            mu: 0.0,
            sigma: 1.0,
            d_visible: 0.0,
            d_hidden: 0.0,
            transform: QualityTransform::Identity,
            cell_counts: GroupCounts::from_sizes(emp.cell_sizes()),
        };
        let summary = simulate_approximation(&fit, &emp, 0.2, 50, 11).unwrap();
        for subgroup in Subgroup::ALL {
            assert!(summary.delta_b_mean(subgroup).unwrap().abs() < 0.1);
        }
    }

    #[test]
    fn single_rep_approximation_is_reproducible() {
        let rows: Vec<(f64, bool, bool)> = (0..100)
            .map(|i| (i as f64, i % 3 == 0, i % 5 == 0))
            .collect();
        let emp = hand_rows(&rows);
        let fit = fit_model_approximation(&emp).unwrap();
        let a = simulate_approximation(&fit, &emp, 0.2, 1, 77).unwrap();
        let b = simulate_approximation(&fit, &emp, 0.2, 1, 77).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.delta_b_se(Subgroup::GreenStar), Some(0.0));
    }

    #[test]
    fn spec_json_round_trip_and_unknown_field_rejection() {
        let text = r#"{
            "source": "data.csv",
            "quality_column": "score",
            "visible": {"column": "vis", "rule": {"kind": "categories", "advantaged": ["M"], "disadvantaged": ["F"]}},
            "hidden": {"column": "hid", "rule": {"kind": "median_split"}},
            "transform": "log",
            "k": 0.2
        }"#;
        let spec: DatasetSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.transform, QualityTransform::Log);
        assert_eq!(spec.k, Some(0.2));
        assert!(!spec.higher_is_worse);

        let bad = text.replace("\"k\": 0.2", "\"k\": 0.2, \"bogus\": 1");
        assert!(serde_json::from_str::<DatasetSpec>(&bad).is_err());
    }
}
