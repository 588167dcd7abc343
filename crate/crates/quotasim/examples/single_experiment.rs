//! One world, two selections: blind perceived-quality top-k versus the same
//! top-k under a proportional color quota.
//!
//! With a small green advantage on color (d_color = -0.5) and a large star
//! penalty on the hidden attribute (d_shape = 1.5), greens look worse in
//! aggregate because most greens are stars. The color quota then shifts
//! slots from orange to green, and the already most disadvantaged subgroup
//! (orange stars) loses further ground.
//!
//! ```text
//! cargo run --release --example single_experiment
//! ```

use quotasim::analysis::run_single_experiment;
use quotasim::population::{BiasParams, PopulationConfig, Subgroup};

fn main() -> quotasim::Result<()> {
    let config = PopulationConfig::new(10_000, 0.2, BiasParams::new(-0.5, 1.5), 42);
    let k = 0.2;
    let result = run_single_experiment(&config, k)?;

    println!(
        "n = {} per shape ({} entities), f = {}, d_color = {}, d_shape = {}, k = {k}",
        config.n,
        config.total(),
        config.f,
        config.bias.d_color,
        config.bias.d_shape
    );
    println!();
    println!(
        "{:<14} {:>8} {:>10} {:>10} {:>10} {:>10}",
        "subgroup", "size", "blind sel", "blind B", "quota B", "delta B"
    );
    for subgroup in Subgroup::ALL {
        let blind = result.blind.group(subgroup);
        let quota = result.quota_color.group(subgroup);
        println!(
            "{:<14} {:>8} {:>10} {:>10.4} {:>10.4} {:>+10.4}",
            subgroup.key(),
            blind.group_size,
            blind.selected_count,
            blind.representation_bias.unwrap(),
            quota.representation_bias.unwrap(),
            result.delta_b(subgroup).unwrap(),
        );
    }
    println!();
    println!(
        "selection quality F_k: blind {:+.4}, after color quota {:+.4}",
        result.blind_fairness.f_k, result.quota_fairness.f_k
    );
    Ok(())
}
