//! Statistical agreement between the fitted-model approximation and the
//! generating model.

use quotasim::datasets::{
    empirical_representation, fit_model_approximation, fixtures, load_dataset,
    simulate_approximation,
};
use quotasim::population::{generate_population, BiasParams, PopulationConfig, Subgroup};

/// The approximation redraws quality from the fitted normal model; over many
/// seeds its per-subgroup representation changes must reproduce the sign
/// pattern of the generating model in at least 95% of seeds.
#[test]
fn approximation_reproduces_sign_pattern_across_seeds() {
    let config = PopulationConfig::new(5_000, 0.2, BiasParams::new(-0.5, 1.5), 12345);
    let population = generate_population(&config).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("synthetic.csv");
    fixtures::write_population_csv(
        &population,
        config.bias,
        std::fs::File::create(&csv_path).unwrap(),
    )
    .unwrap();
    let spec = fixtures::synthetic_dataset_spec(csv_path);
    let emp = load_dataset(&spec).unwrap();
    assert_eq!(emp.rows.len(), 10_000);

    let (blind, quota) = empirical_representation(&emp, 0.2).unwrap();
    let reference: Vec<bool> = Subgroup::ALL
        .iter()
        .map(|&g| {
            let delta = quota.group(g).representation_bias.unwrap()
                - blind.group(g).representation_bias.unwrap();
            delta > 0.0
        })
        .collect();
    // Past the boundary, the color quota lifts the green cells and costs the
    // orange cells.
    assert_eq!(reference, [true, true, false, false]);

    let fit = fit_model_approximation(&emp).unwrap();
    let mut matches = 0usize;
    let seeds = 100u64;
    for seed in 0..seeds {
        let summary = simulate_approximation(&fit, &emp, 0.2, 1, seed).unwrap();
        let agrees = Subgroup::ALL
            .iter()
            .zip(&reference)
            .all(|(&g, &positive)| (summary.delta_b_mean(g).unwrap() > 0.0) == positive);
        matches += usize::from(agrees);
    }
    assert!(
        matches >= 95,
        "sign pattern matched in only {matches}/{seeds} seeds"
    );
}
