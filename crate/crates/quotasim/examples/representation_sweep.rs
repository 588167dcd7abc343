//! Monte Carlo grid over (d_shape, f): where does the color quota help or
//! hurt the most underrepresented subgroup?
//!
//! Reproduces the sign structure of the paradox region: the mean change in
//! orange-star representation flips from positive to negative along the
//! analytical curve d_shape = -d_color / (1 - 2f). Writes the full grid as
//! CSV next to the printed summary.
//!
//! ```text
//! cargo run --release --example representation_sweep [-- <output.csv>]
//! ```

use std::path::PathBuf;

use quotasim::analysis::{
    paradox_boundary, sweep, write_sweep_csv, SweepAxis, SweepParam, SweepSpec,
};
use quotasim::population::Subgroup;

fn main() -> quotasim::Result<()> {
    let spec = SweepSpec {
        axes: vec![
            SweepAxis {
                param: SweepParam::DShape,
                min: 0.2,
                max: 1.6,
                steps: 8,
            },
            SweepAxis {
                param: SweepParam::F,
                min: 0.1,
                max: 0.4,
                steps: 4,
            },
        ],
        d_color: Some(-0.5),
        d_shape: None,
        f: None,
        k: 0.2,
        n: 2_000,
        reps: 200,
        master_seed: 7,
    };
    let results = sweep(&spec)?;

    println!(
        "mean change in B(orange_star) after color quota; {} reps per cell, n = {}",
        spec.reps, spec.n
    );
    println!("'*' marks cells past the analytical threshold -d_color/(1-2f)\n");
    print!("{:>8} |", "d_shape");
    for f in [0.1, 0.2, 0.3, 0.4] {
        print!(" {:>12}", format!("f={f}"));
    }
    println!();
    let mut row_label = f64::NAN;
    for cell in &results {
        if cell.d_shape != row_label {
            if !row_label.is_nan() {
                println!();
            }
            row_label = cell.d_shape;
            print!("{row_label:>8.2} |");
        }
        let delta = cell.delta_b_mean(Subgroup::OrangeStar).unwrap();
        let past = cell.d_shape > paradox_boundary(cell.d_color, cell.f)?;
        print!(" {:>11.4}{}", delta, if past { "*" } else { " " });
    }
    println!();

    let output = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("representation_sweep.csv"));
    write_sweep_csv(&results, std::fs::File::create(&output)?)?;
    println!("\nfull grid written to {}", output.display());
    Ok(())
}
