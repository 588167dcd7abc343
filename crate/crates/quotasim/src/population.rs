//! Synthetic populations with two correlated binary attributes.
//!
//! A world holds `2n` entities: `n` stars and `n` circles, half green and
//! half orange overall. The mixing fraction `f` controls the correlation
//! between the attributes: there are `round(f*n)` orange stars and equally
//! many green circles, so small `f` means green goes with star and orange
//! with circle. Each entity carries a true quality `q` drawn i.i.d. standard
//! normal from a stream keyed by the config seed, independent of both
//! attributes. A biased observer ranks by perceived quality
//! `q_hat = q - d_color*I_color - d_shape*I_shape` instead.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Visible binary attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    Green,
    Orange,
}

impl Color {
    /// Indicator convention: 1 for green, 0 for orange.
    pub fn indicator(self) -> f64 {
        match self {
            Color::Green => 1.0,
            Color::Orange => 0.0,
        }
    }
}

/// Hidden binary attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Star,
    Circle,
}

impl Shape {
    /// Indicator convention: 1 for star, 0 for circle.
    pub fn indicator(self) -> f64 {
        match self {
            Shape::Star => 1.0,
            Shape::Circle => 0.0,
        }
    }
}

/// Names one of the two binary attributes, e.g. as a quota target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Color,
    Shape,
}

/// One of the four (color, shape) subgroups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subgroup {
    GreenStar,
    GreenCircle,
    OrangeStar,
    OrangeCircle,
}

impl Subgroup {
    /// All subgroups in canonical report order.
    pub const ALL: [Subgroup; 4] = [
        Subgroup::GreenStar,
        Subgroup::GreenCircle,
        Subgroup::OrangeStar,
        Subgroup::OrangeCircle,
    ];

    pub fn of(color: Color, shape: Shape) -> Subgroup {
        match (color, shape) {
            (Color::Green, Shape::Star) => Subgroup::GreenStar,
            (Color::Green, Shape::Circle) => Subgroup::GreenCircle,
            (Color::Orange, Shape::Star) => Subgroup::OrangeStar,
            (Color::Orange, Shape::Circle) => Subgroup::OrangeCircle,
        }
    }

    pub fn color(self) -> Color {
        match self {
            Subgroup::GreenStar | Subgroup::GreenCircle => Color::Green,
            Subgroup::OrangeStar | Subgroup::OrangeCircle => Color::Orange,
        }
    }

    pub fn shape(self) -> Shape {
        match self {
            Subgroup::GreenStar | Subgroup::OrangeStar => Shape::Star,
            Subgroup::GreenCircle | Subgroup::OrangeCircle => Shape::Circle,
        }
    }

    /// Position in [`Subgroup::ALL`]; also the index used by reports.
    pub fn index(self) -> usize {
        match self {
            Subgroup::GreenStar => 0,
            Subgroup::GreenCircle => 1,
            Subgroup::OrangeStar => 2,
            Subgroup::OrangeCircle => 3,
        }
    }

    /// Fixed JSON/CSV key for this subgroup.
    pub fn key(self) -> &'static str {
        match self {
            Subgroup::GreenStar => "green_star",
            Subgroup::GreenCircle => "green_circle",
            Subgroup::OrangeStar => "orange_star",
            Subgroup::OrangeCircle => "orange_circle",
        }
    }

    /// The two subgroups sharing `color`.
    pub fn with_color(color: Color) -> [Subgroup; 2] {
        match color {
            Color::Green => [Subgroup::GreenStar, Subgroup::GreenCircle],
            Color::Orange => [Subgroup::OrangeStar, Subgroup::OrangeCircle],
        }
    }

    /// The two subgroups sharing `shape`.
    pub fn with_shape(shape: Shape) -> [Subgroup; 2] {
        match shape {
            Shape::Star => [Subgroup::GreenStar, Subgroup::OrangeStar],
            Shape::Circle => [Subgroup::GreenCircle, Subgroup::OrangeCircle],
        }
    }
}

/// Fixed perception penalties applied on top of true quality.
///
/// Positive values penalize the indicator-1 side (green, star); negative
/// values are an advantage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasParams {
    pub d_color: f64,
    pub d_shape: f64,
}

impl BiasParams {
    pub const ZERO: BiasParams = BiasParams {
        d_color: 0.0,
        d_shape: 0.0,
    };

    pub fn new(d_color: f64, d_shape: f64) -> Self {
        Self { d_color, d_shape }
    }

    fn validate(&self) -> Result<()> {
        if !self.d_color.is_finite() || !self.d_shape.is_finite() {
            return Err(Error::InvalidConfig(
                "bias parameters must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// One individual: unique id, true quality, and both attributes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entity {
    pub id: u64,
    pub q: f64,
    pub color: Color,
    pub shape: Shape,
}

impl Entity {
    /// Perceived quality `q - d_color*I_color - d_shape*I_shape`.
    pub fn perceived_quality(&self, bias: BiasParams) -> f64 {
        self.q - bias.d_color * self.color.indicator() - bias.d_shape * self.shape.indicator()
    }

    pub fn subgroup(&self) -> Subgroup {
        Subgroup::of(self.color, self.shape)
    }
}

/// Perceived quality of `entity` under `bias`.
pub fn perceived_quality(entity: &Entity, bias: BiasParams) -> f64 {
    entity.perceived_quality(bias)
}

/// The (color, shape) subgroup of `entity`. Total: every entity maps to
/// exactly one of the four subgroups.
pub fn group_of(entity: &Entity) -> Subgroup {
    entity.subgroup()
}

/// Generative parameters for a synthetic world.
///
/// `n` is the star count (= circle count); the population holds `2n`
/// entities. `f` must lie in `(0, 0.5]`; `f = 0.5` is the boundary case with
/// uncorrelated attributes. The minority count `round(f*n)` (half away from
/// zero) must land strictly between 0 and `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationConfig {
    pub n: u64,
    pub f: f64,
    pub bias: BiasParams,
    pub seed: u64,
}

impl PopulationConfig {
    pub fn new(n: u64, f: f64, bias: BiasParams, seed: u64) -> Self {
        Self { n, f, bias, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be positive".into()));
        }
        if !self.f.is_finite() || self.f <= 0.0 || self.f > 0.5 {
            return Err(Error::InvalidConfig(format!(
                "f must lie in (0, 0.5], got {}",
                self.f
            )));
        }
        self.bias.validate()?;
        let minority = self.minority_count();
        if minority == 0 || minority >= self.n {
            return Err(Error::InvalidConfig(format!(
                "round(f*n) = {} must lie strictly between 0 and n = {}",
                minority, self.n
            )));
        }
        Ok(())
    }

    /// `round(f*n)` to nearest, half up: the count of orange stars and of
    /// green circles.
    pub fn minority_count(&self) -> u64 {
        (self.f * self.n as f64 + 0.5).floor() as u64
    }

    /// Expected subgroup counts in [`Subgroup::ALL`] order.
    pub fn subgroup_counts(&self) -> [u64; 4] {
        let minority = self.minority_count();
        let majority = self.n - minority;
        // green_star, green_circle, orange_star, orange_circle
        [majority, minority, minority, majority]
    }

    /// Total entity count `2n`.
    pub fn total(&self) -> u64 {
        2 * self.n
    }
}

/// An immutable synthetic world. Construct with [`generate_population`];
/// regenerating from the same config yields a bit-identical entity list.
#[derive(Debug, Clone)]
pub struct Population {
    config: PopulationConfig,
    entities: Vec<Entity>,
}

impl Population {
    pub fn config(&self) -> &PopulationConfig {
        &self.config
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    /// Entity ids are dense indices `0..2n`.
    pub fn get(&self, id: u64) -> Option<&Entity> {
        self.entities.get(id as usize)
    }

    /// Realized subgroup sizes in [`Subgroup::ALL`] order.
    pub fn subgroup_sizes(&self) -> [usize; 4] {
        let mut sizes = [0usize; 4];
        for entity in &self.entities {
            sizes[entity.subgroup().index()] += 1;
        }
        sizes
    }
}

#[cfg(test)]
impl Population {
    /// Hand-built pool for unit tests; the embedded config is a placeholder.
    pub(crate) fn for_tests(entities: Vec<Entity>) -> Population {
        let n = (entities.len() as u64 / 2).max(2);
        Population {
            config: PopulationConfig::new(n, 0.25, BiasParams::ZERO, 0),
            entities,
        }
    }
}

/// Builds the `2n` entities for `config`.
///
/// Attribute assignment is positional: `round(f*n)` orange stars, then the
/// green stars, then the orange circles, then `round(f*n)` green circles.
/// Quality values come from a `ChaCha8` stream seeded with `config.seed`,
/// assigned in id order and therefore independent of the attribute layout.
pub fn generate_population(config: &PopulationConfig) -> Result<Population> {
    config.validate()?;
    let minority = config.minority_count() as usize;
    let n = config.n as usize;
    let majority = n - minority;

    let mut layout: Vec<(Color, Shape)> = Vec::with_capacity(2 * n);
    layout.extend(std::iter::repeat_n((Color::Orange, Shape::Star), minority));
    layout.extend(std::iter::repeat_n((Color::Green, Shape::Star), majority));
    layout.extend(std::iter::repeat_n((Color::Orange, Shape::Circle), majority));
    layout.extend(std::iter::repeat_n((Color::Green, Shape::Circle), minority));

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let entities = layout
        .into_iter()
        .enumerate()
        .map(|(id, (color, shape))| Entity {
            id: id as u64,
            q: StandardNormal.sample(&mut rng),
            color,
            shape,
        })
        .collect();

    Ok(Population {
        config: *config,
        entities,
    })
}
