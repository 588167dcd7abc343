//! Does debiasing improve the quality of who gets selected?
//!
//! Sweeps d_color for a few d_shape levels and compares the mean true
//! quality of the selected set before and after the color quota, against
//! the unbiased optimum. With uncorrelated attributes (f = 0.5) the quota
//! can only help; with correlated attributes (f = 0.2) there is a region
//! where it makes the selection strictly worse.
//!
//! ```text
//! cargo run --release --example quality_curves [-- <output.csv>]
//! ```

use std::path::PathBuf;

use quotasim::analysis::{quality_sweep, write_quality_csv, AxisRange, QualitySweepSpec};

fn print_table(label: &str, cells: &[quotasim::analysis::QualityCellResult]) {
    println!("{label}");
    println!(
        "{:>8} {:>8} {:>12} {:>12} {:>12} {:>12}",
        "d_color", "d_shape", "blind q", "quota q", "optimum q", "delta q"
    );
    for cell in cells {
        println!(
            "{:>8.2} {:>8.2} {:>12.4} {:>12.4} {:>12.4} {:>+12.4}",
            cell.d_color,
            cell.d_shape,
            cell.quality_blind_mean.unwrap(),
            cell.quality_quota_mean.unwrap(),
            cell.quality_unbiased_mean.unwrap(),
            cell.delta_quality_mean.unwrap(),
        );
    }
    println!();
}

fn main() -> quotasim::Result<()> {
    let uncorrelated = QualitySweepSpec {
        f: 0.5,
        k: 0.2,
        d_color: AxisRange {
            min: -2.0,
            max: 0.0,
            steps: 5,
        },
        d_shape_values: vec![0.0, 1.0],
        n: 4_000,
        reps: 100,
        master_seed: 11,
    };
    let cells = quality_sweep(&uncorrelated)?;
    print_table("uncorrelated attributes (f = 0.5): quota never hurts", &cells);

    let correlated = QualitySweepSpec {
        f: 0.2,
        k: 0.2,
        d_color: AxisRange {
            min: -1.0,
            max: 0.0,
            steps: 3,
        },
        d_shape_values: vec![0.0, 3.0],
        n: 4_000,
        reps: 100,
        master_seed: 13,
    };
    let cells2 = quality_sweep(&correlated)?;
    print_table(
        "correlated attributes (f = 0.2): quota lowers quality once d_shape is large",
        &cells2,
    );

    let output = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("quality_curves.csv"));
    let mut all = cells;
    all.extend(cells2);
    write_quality_csv(&all, std::fs::File::create(&output)?)?;
    println!("both grids written to {}", output.display());
    Ok(())
}
