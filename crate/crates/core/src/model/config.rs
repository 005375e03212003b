//! Text configuration (JSON or TOML) for models.
//!
//! ```toml
//! dims = { d = 2, dstar = 2 }
//! lambda_bar = [0.5, 0.5]
//! # either a full d×d matrix or one kernel per receiving component
//! kernels = [{ family = "exponential", alpha = 2.0 }, { family = "exponential", alpha = 1.5 }]
//! marks = [{ family = "exponential", params = [2.0, 3.3333333333333335] }, ...]
//! claims = [{ family = "exponential", params = [0.5, 0.4] }, ...]
//! premium = [8.0, 8.0]
//! ```
//!
//! Exponential laws take rates as `params`; deterministic laws take values.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DecayKernel, ModelError, ModelSpec, TabulatedKernel, VectorLaw};
use crate::numerics::NumericsConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub dims: DimsConfig,
    pub lambda_bar: Vec<f64>,
    pub kernels: KernelsConfig,
    pub marks: Vec<LawConfig>,
    pub claims: Vec<LawConfig>,
    pub premium: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numerics: Option<NumericsConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimsConfig {
    pub d: usize,
    pub dstar: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelsConfig {
    /// `kernels[i][j]`: effect of component `j` on component `i`.
    Matrix(Vec<Vec<KernelConfig>>),
    /// `kernels[i]` used for every emitting component.
    PerReceiver(Vec<KernelConfig>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelConfig {
    Exponential {
        alpha: f64,
        #[serde(default = "unit", skip_serializing_if = "is_unit")]
        scale: f64,
    },
    Tabulated {
        table: TableConfig,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    pub step: f64,
    pub values: Vec<f64>,
    pub l1_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawFamily {
    Deterministic,
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    pub family: LawFamily,
    pub params: Vec<f64>,
}

fn unit() -> f64 {
    1.0
}

fn is_unit(x: &f64) -> bool {
    *x == 1.0
}

impl KernelConfig {
    fn build(&self) -> Result<DecayKernel, ModelError> {
        match self {
            KernelConfig::Exponential { alpha, scale } => {
                DecayKernel::scaled_exponential(*alpha, *scale)
            }
            KernelConfig::Tabulated { table } => Ok(DecayKernel::Tabulated(TabulatedKernel::new(
                table.step,
                table.values.clone(),
                table.l1_norm,
            )?)),
        }
    }

    fn from_kernel(k: &DecayKernel) -> Self {
        match k {
            DecayKernel::Exponential { alpha, scale } => KernelConfig::Exponential {
                alpha: *alpha,
                scale: *scale,
            },
            DecayKernel::Tabulated(t) => KernelConfig::Tabulated {
                table: TableConfig {
                    step: t.step(),
                    values: t.values().to_vec(),
                    l1_norm: t.l1_norm(),
                },
            },
        }
    }
}

impl LawConfig {
    fn build(&self) -> Result<VectorLaw, ModelError> {
        match self.family {
            LawFamily::Deterministic => VectorLaw::deterministic(self.params.clone()),
            LawFamily::Exponential => VectorLaw::exponential(self.params.clone()),
        }
    }

    fn from_law(law: &VectorLaw) -> Self {
        let family = match law {
            VectorLaw::Deterministic(_) => LawFamily::Deterministic,
            VectorLaw::ExponentialIndependent(_) => LawFamily::Exponential,
        };
        LawConfig {
            family,
            params: law.params().to_vec(),
        }
    }
}

impl ModelConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ModelError> {
        toml::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))
    }

    /// Read a config file; `.json` is parsed as JSON, anything else as TOML.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::Parse(format!("{}: {e}", path.display())))?;
        if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"))
        {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("model config serializes to TOML")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("model config serializes to JSON")
    }

    /// Validate and build the model.
    pub fn build(&self) -> Result<ModelSpec, ModelError> {
        let DimsConfig { d, dstar } = self.dims;
        let check = |what: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(ModelError::DimensionMismatch(format!(
                    "{what}: expected {want} entries, found {got}"
                )))
            }
        };
        check("lambda_bar", self.lambda_bar.len(), d)?;
        check("marks", self.marks.len(), d)?;
        check("claims", self.claims.len(), d)?;
        check("premium", self.premium.len(), dstar)?;
        let kernels = match &self.kernels {
            KernelsConfig::Matrix(rows) => {
                check("kernels", rows.len(), d)?;
                rows.iter()
                    .map(|row| {
                        check("kernel row", row.len(), d)?;
                        row.iter().map(KernelConfig::build).collect()
                    })
                    .collect::<Result<Vec<Vec<_>>, _>>()?
            }
            KernelsConfig::PerReceiver(list) => {
                check("kernels", list.len(), d)?;
                list.iter()
                    .map(|k| Ok(vec![k.build()?; d]))
                    .collect::<Result<Vec<Vec<_>>, ModelError>>()?
            }
        };
        let marks = self
            .marks
            .iter()
            .map(LawConfig::build)
            .collect::<Result<Vec<_>, _>>()?;
        let claims = self
            .claims
            .iter()
            .map(LawConfig::build)
            .collect::<Result<Vec<_>, _>>()?;
        ModelSpec::with_numerics(
            self.lambda_bar.clone(),
            kernels,
            marks,
            claims,
            self.premium.clone(),
            self.numerics.unwrap_or_default(),
        )
    }

    /// Config describing an existing model, always with a full kernel matrix.
    pub fn from_spec(spec: &ModelSpec) -> Self {
        ModelConfig {
            dims: DimsConfig {
                d: spec.d(),
                dstar: spec.dstar(),
            },
            lambda_bar: spec.lambda_bar().to_vec(),
            kernels: KernelsConfig::Matrix(
                spec.kernels()
                    .iter()
                    .map(|row| row.iter().map(KernelConfig::from_kernel).collect())
                    .collect(),
            ),
            marks: spec.marks().iter().map(LawConfig::from_law).collect(),
            claims: spec.claims().iter().map(LawConfig::from_law).collect(),
            premium: spec.premium().to_vec(),
            numerics: None,
        }
    }
}
