//! Simulation and analysis toolkit for quota-based debiasing of top-k
//! selections over populations with two correlated binary attributes.
//!
//! The synthetic model draws a world of entities with a true quality and two
//! binary attributes (color, visible; shape, hidden). A biased selector
//! ranks by perceived quality, penalizing one side of each attribute. The
//! toolkit measures per-subgroup representation before and after a
//! proportional quota on the visible attribute, exposing the regime where
//! the quota pushes an already underrepresented subgroup further down and
//! lowers overall selection quality.
//!
//! Start with the runnable examples (`cargo run --release --example
//! single_experiment`), or drive everything from JSON configs through the
//! `quotasim` binary.
//!
//! ```
//! use quotasim::analysis::run_single_experiment;
//! use quotasim::population::{BiasParams, PopulationConfig, Subgroup};
//!
//! let config = PopulationConfig::new(2_000, 0.2, BiasParams::new(-0.5, 1.5), 42);
//! let result = run_single_experiment(&config, 0.2).unwrap();
//! // The color quota costs the most disadvantaged subgroup representation.
//! assert!(result.delta_b(Subgroup::OrangeStar).unwrap() < 0.0);
//! ```

pub mod analysis;
pub mod cli;
pub mod datasets;
pub mod error;
pub mod metrics;
pub mod population;
pub mod seeding;
pub mod selection;

pub use error::{Error, Result};
pub use metrics::{fairness, representation_bias, FairnessReport, RepresentationReport};
pub use population::{
    generate_population, Attribute, BiasParams, Color, Entity, Population, PopulationConfig,
    Shape, Subgroup,
};
pub use selection::{
    select, select_top_k, select_with_quota, ScoreBasis, SelectionResult, SelectionRule,
};
