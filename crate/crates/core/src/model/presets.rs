//! The bundled bivariate test model, with deterministic or exponential marks.

use super::{ModelConfig, ModelError, ModelSpec};

pub const BIVARIATE_RANDOM_TOML: &str = include_str!("../../configs/bivariate_random.toml");
pub const BIVARIATE_DETERMINISTIC_TOML: &str =
    include_str!("../../configs/bivariate_deterministic.toml");

/// Which mark law the bundled model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkRegime {
    Deterministic,
    Random,
}

impl MarkRegime {
    pub fn toml(self) -> &'static str {
        match self {
            MarkRegime::Deterministic => BIVARIATE_DETERMINISTIC_TOML,
            MarkRegime::Random => BIVARIATE_RANDOM_TOML,
        }
    }
}

/// `λ̄ = (0.5, 0.5)`, `g_ij(t) = e^{−α_i t}` with `α = (2, 1.5)`,
/// `E B = [[0.5, 0.25], [0.3, 0.4]]`, exponential claims with means
/// `[[2, 2.5], [2.5, 3]]` and premium rate 8 on both components.
pub fn bivariate(regime: MarkRegime) -> Result<ModelSpec, ModelError> {
    ModelConfig::from_toml_str(regime.toml())?.build()
}
