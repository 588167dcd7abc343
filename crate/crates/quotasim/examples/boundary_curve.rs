//! The analytical boundary of the paradox region.
//!
//! Prints the threshold d_shape = -d_color / (1 - 2f) over a range of mixing
//! fractions, and shows that the aggregate color biases cross exactly at the
//! threshold: below it green is aggregate-advantaged, above it orange is.
//!
//! ```text
//! cargo run --release --example boundary_curve
//! ```

use quotasim::analysis::{aggregate_color_bias, linspace, paradox_boundary};
use quotasim::population::BiasParams;

fn main() -> quotasim::Result<()> {
    let d_color = -0.5;

    println!("threshold d_shape = -d_color / (1 - 2f) at d_color = {d_color}");
    println!("{:>6} {:>12}", "f", "threshold");
    for f in linspace(0.05, 0.45, 9) {
        println!("{f:>6.2} {:>12.5}", paradox_boundary(d_color, f)?);
    }

    let f = 0.2;
    let threshold = paradox_boundary(d_color, f)?;
    println!();
    println!("aggregate color biases at f = {f} (threshold {threshold:.5}):");
    println!("{:>8} {:>10} {:>10} {:>18}", "d_shape", "d_green", "d_orange", "advantaged side");
    for d_shape in [0.0, 0.4, threshold, 1.2, 1.6] {
        let agg = aggregate_color_bias(BiasParams::new(d_color, d_shape), f)?;
        let side = if (agg.d_green - agg.d_orange).abs() < 1e-12 {
            "neither (boundary)"
        } else if agg.d_green > agg.d_orange {
            "green"
        } else {
            "orange"
        };
        println!(
            "{d_shape:>8.4} {:>10.4} {:>10.4} {side:>18}",
            agg.d_green, agg.d_orange
        );
    }
    Ok(())
}
