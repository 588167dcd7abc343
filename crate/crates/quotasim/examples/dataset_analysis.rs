//! Full dataset pipeline on a bundled fixture: load and binarize the CSV,
//! measure the attribute correlation, compare blind vs visible-quota
//! representation, fit the normal model approximation, and rerun the
//! comparison under the fitted model.
//!
//! ```text
//! cargo run --release --example dataset_analysis [-- <spec.json>]
//! ```
//!
//! Defaults to the wages-shaped fixture; pass any DatasetSpec file instead.

use std::path::PathBuf;

use quotasim::datasets::{analyze_dataset, load_spec};
use quotasim::population::Subgroup;

fn main() -> quotasim::Result<()> {
    let spec_path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/wages_shaped.spec.json")
    });
    let spec = load_spec(&spec_path)?;
    let report = analyze_dataset(&spec, None, 200, 1)?;

    println!("dataset: {}", report.source);
    println!(
        "rows: {} (dropped {}), k = {}, attribute correlation r = {:.4} (p = {:.3e})",
        report.n_rows, report.n_dropped, report.k, report.correlation_r, report.correlation_p
    );
    if report.higher_is_worse {
        println!("note: higher scores are a worse outcome here; overrepresentation at the top is harmful");
    }
    println!(
        "model fit: mu = {:.4}, sigma = {:.4}, d_visible = {:.4}, d_hidden = {:.4} ({:?})",
        report.fit.mu, report.fit.sigma, report.fit.d_visible, report.fit.d_hidden,
        report.fit.transform
    );
    println!();
    println!(
        "{:<14} {:>8} {:>10} {:>10} {:>10} {:>14}",
        "subgroup", "size", "blind B", "quota B", "delta B", "approx delta B"
    );
    for subgroup in Subgroup::ALL {
        let fmt = |v: Option<f64>| match v {
            Some(x) => format!("{x:+.4}"),
            None => "undef".into(),
        };
        println!(
            "{:<14} {:>8} {:>10} {:>10} {:>10} {:>14}",
            subgroup.key(),
            report.blind.group(subgroup).group_size,
            fmt(report.blind.group(subgroup).representation_bias),
            fmt(report.quota_visible.group(subgroup).representation_bias),
            fmt(report.delta_b(subgroup)),
            fmt(report.approximation.delta_b_mean(subgroup)),
        );
    }
    println!();
    println!("subgroup naming: green = visible disadvantaged, star = hidden disadvantaged");
    Ok(())
}
