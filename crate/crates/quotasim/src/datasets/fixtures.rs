//! Deterministic synthetic fixtures shaped like the four reference datasets,
//! plus a CSV writer for synthetic populations.
//!
//! The real datasets are not redistributable, so the bundled files are drawn
//! from the synthetic model with cell counts, correlation sign and
//! magnitude, and advantaged directions matched to each dataset's published
//! shape. Regenerating with the same seed reproduces the files byte for
//! byte (see the `generate_fixtures` example).

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::population::{BiasParams, Population};

use super::{AttributeSpec, BinarizationRule, DatasetSpec, QualityTransform};

/// Writes a synthetic population as CSV with columns `q_hat,color,shape`,
/// one row per entity in id order. Quality is formatted with the shortest
/// round-trip representation, so re-ingesting reproduces the exact floats.
pub fn write_population_csv<W: Write>(
    population: &Population,
    bias: BiasParams,
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["q_hat", "color", "shape"])?;
    for entity in population.entities() {
        let color = match entity.color {
            crate::population::Color::Green => "green",
            crate::population::Color::Orange => "orange",
        };
        let shape = match entity.shape {
            crate::population::Shape::Star => "star",
            crate::population::Shape::Circle => "circle",
        };
        w.write_record([
            entity.perceived_quality(bias).to_string().as_str(),
            color,
            shape,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// The canonical spec for CSVs produced by [`write_population_csv`]:
/// orange/circle are the advantaged sides, matching the indicator
/// convention of the synthetic model.
pub fn synthetic_dataset_spec(source: PathBuf) -> DatasetSpec {
    DatasetSpec {
        source,
        quality_column: "q_hat".into(),
        visible: AttributeSpec {
            column: "color".into(),
            rule: BinarizationRule::Categories {
                advantaged: vec!["orange".into()],
                disadvantaged: vec!["green".into()],
            },
        },
        hidden: AttributeSpec {
            column: "shape".into(),
            rule: BinarizationRule::Categories {
                advantaged: vec!["circle".into()],
                disadvantaged: vec!["star".into()],
            },
        },
        transform: QualityTransform::Identity,
        k: Some(0.2),
        higher_is_worse: false,
    }
}

/// Cell order used by the generators: (visible disadvantaged?, hidden
/// disadvantaged?) as (true,true), (true,false), (false,true), (false,false).
type CellWeights = [f64; 4];

/// Largest-remainder rounding of `n * weights[i]` to integer cell counts
/// summing to `n`.
fn apportion_cells(n: usize, weights: CellWeights) -> [usize; 4] {
    let mut counts = [0usize; 4];
    let mut remainders: Vec<(f64, usize)> = Vec::with_capacity(4);
    let mut assigned = 0usize;
    for (i, &w) in weights.iter().enumerate() {
        let exact = w * n as f64;
        let floor = exact.floor() as usize;
        counts[i] = floor;
        assigned += floor;
        remainders.push((exact - floor as f64, i));
    }
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().take(n - assigned) {
        counts[i] += 1;
    }
    counts
}

struct FixtureModel {
    n: usize,
    weights: CellWeights,
    /// Penalty on the visible disadvantaged side, in standard-normal units.
    d_visible: f64,
    /// Penalty on the hidden disadvantaged side.
    d_hidden: f64,
    seed: u64,
}

impl FixtureModel {
    /// Per-row (visible_disadvantaged, hidden_disadvantaged, latent q_hat).
    fn rows(&self) -> Vec<(bool, bool, f64)> {
        let counts = apportion_cells(self.n, self.weights);
        let cells = [(true, true), (true, false), (false, true), (false, false)];
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut rows = Vec::with_capacity(self.n);
        for (&count, &(vis, hid)) in counts.iter().zip(&cells) {
            for _ in 0..count {
                let q: f64 = StandardNormal.sample(&mut rng);
                let q_hat = q
                    - self.d_visible * if vis { 1.0 } else { 0.0 }
                    - self.d_hidden * if hid { 1.0 } else { 0.0 };
                rows.push((vis, hid, q_hat));
            }
        }
        rows
    }
}

fn write_csv_rows(path: &Path, header: [&str; 3], rows: Vec<[String; 3]>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Educational-outcomes shape: 2,751 rows, a large-city visible attribute
/// covering 20% of rows, a median-split socioeconomic hidden attribute, and
/// indicator correlation close to +0.10.
///
/// The cells are built so the declared-disadvantaged visible side (town) is
/// overrepresented at the top despite the declared direction, which is what
/// lets a city-size quota push the already underrepresented (town, low
/// status) cell further down.
pub fn write_trec_fixture(path: &Path) -> Result<()> {
    let model = FixtureModel {
        n: 2751,
        // (town,low), (town,high), (large,low), (large,high)
        weights: [0.42, 0.38, 0.08, 0.12],
        d_visible: -0.5,
        d_hidden: 1.2,
        seed: 0x7265_6331,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed ^ 0xA5A5_A5A5);
    let rows = model
        .rows()
        .into_iter()
        .map(|(vis, hid, q_hat)| {
            let pisa = 500.0 + 100.0 * q_hat;
            let settlement = if vis { "town" } else { "large_city" };
            // Numeric index consistent with the hidden label: low status
            // strictly below the median, high strictly above.
            let u: f64 = rng.random();
            let escs = if hid { -0.1 - u } else { 0.1 + u };
            [pisa.to_string(), settlement.to_string(), escs.to_string()]
        })
        .collect();
    write_csv_rows(path, ["pisa_read", "settlement", "escs"], rows)
}

/// City-payroll shape: 5,779 rows, gender as the visible attribute, a
/// full-time flag as the hidden attribute, indicator correlation near
/// +0.62, and hourly rates around 45.
pub fn write_wages_fixture(path: &Path) -> Result<()> {
    let model = FixtureModel {
        n: 5779,
        // (woman,part), (woman,full), (man,part), (man,full)
        weights: [0.259, 0.141, 0.041, 0.559],
        d_visible: 0.4,
        d_hidden: 1.0,
        seed: 0x7761_6765,
    };
    let rows = model
        .rows()
        .into_iter()
        .map(|(vis, hid, q_hat)| {
            let rate = 45.0 + 10.0 * q_hat;
            let gender = if vis { "FEMALE" } else { "MALE" };
            let schedule = if hid { "P" } else { "F" };
            [rate.to_string(), gender.to_string(), schedule.to_string()]
        })
        .collect();
    write_csv_rows(path, ["hourly_rate", "gender", "full_or_part_time"], rows)
}

/// Citation-database shape: 80,210 rows, gender visible, US-institution
/// hidden, indicator correlation near -0.04, and log-normal citation counts
/// (hence the log transform in the companion spec).
pub fn write_citations_fixture(path: &Path) -> Result<()> {
    let model = FixtureModel {
        n: 80_210,
        // (woman,other), (woman,usa), (man,other), (man,usa)
        weights: [0.1224, 0.0776, 0.5276, 0.2724],
        d_visible: 0.3,
        d_hidden: 0.5,
        seed: 0x6369_7465,
    };
    let rows = model
        .rows()
        .into_iter()
        .map(|(vis, hid, q_hat)| {
            let citations = (6.5 + q_hat).exp().round().max(1.0);
            let gender = if vis { "female" } else { "male" };
            let country = if hid { "other" } else { "usa" };
            [
                format!("{}", citations as u64),
                gender.to_string(),
                country.to_string(),
            ]
        })
        .collect();
    write_csv_rows(path, ["nc9617_ns", "gender", "cntry"], rows)
}

/// Risk-score shape: 6,000 rows, ethnicity visible (two raw codes per
/// side), sex hidden, indicator correlation near +0.05. Higher scores are a
/// worse outcome here; the companion spec carries `higher_is_worse`.
pub fn write_compas_fixture(path: &Path) -> Result<()> {
    let model = FixtureModel {
        n: 6000,
        // (nonaa,woman), (nonaa,man), (aa,woman), (aa,man)
        weights: [0.11, 0.39, 0.09, 0.41],
        d_visible: 0.6,
        d_hidden: 0.4,
        seed: 0x636F_6D70,
    };
    let mut alternator = 0usize;
    let rows = model
        .rows()
        .into_iter()
        .map(|(vis, hid, q_hat)| {
            let raw = -1.0 + 0.7 * q_hat;
            alternator += 1;
            let ethnicity = match (vis, alternator % 2) {
                (true, 0) => "Caucasian",
                (true, _) => "Asian",
                (false, 0) => "African-American",
                (false, _) => "African-Am",
            };
            let sex = if hid { "F" } else { "M" };
            [raw.to_string(), ethnicity.to_string(), sex.to_string()]
        })
        .collect();
    write_csv_rows(path, ["raw_score", "ethnic_code", "sex_code"], rows)
}

type FixtureWriter = fn(&Path) -> Result<()>;

/// Writes all four bundled fixture CSVs into `dir` with their canonical
/// file names. Returns the paths written.
pub fn write_all_fixtures(dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let files: [(&str, FixtureWriter); 4] = [
        ("trec_shaped.csv", write_trec_fixture),
        ("wages_shaped.csv", write_wages_fixture),
        ("citations_shaped.csv", write_citations_fixture),
        ("compas_shaped.csv", write_compas_fixture),
    ];
    let mut written = Vec::new();
    for (name, generate) in files {
        let path = dir.join(name);
        generate(&path)?;
        written.push(path);
    }
    Ok(written)
}
