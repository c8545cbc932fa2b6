//! Experiment configuration files and the figure recipes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detlaw::ComplexPoint;
use crate::model::{ModelError, SbmParams};
use crate::verify::GridSpec;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("unsupported config version {0} (expected {CONFIG_VERSION})")]
    Version(u32),
    #[error("config field {field}: {message}")]
    Field { field: &'static str, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Caveats attached to a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Warning {
    /// Isolated vertices are expected; edge statistics follow no limit law.
    Disconnected,
    /// Transition regime between Tracy–Widom and Gaussian edge fluctuations.
    Crossover,
}

/// Parameter bundle for one experiment. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub model: SbmParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    /// Spectral parameters `[E, η]` for the weak-law scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_points: Option<Vec<[f64; 2]>>,
    /// Intervals `[E1, E2]` for the density-of-states comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<[f64; 2]>>,
    /// Offset `c` of the outlier threshold `2 + c`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub allow_disconnected: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<Warning>,
}

impl ExperimentConfig {
    pub fn new(model: SbmParams) -> Self {
        Self {
            version: CONFIG_VERSION,
            name: None,
            model,
            trials: None,
            margin: None,
            grid: None,
            z_points: None,
            intervals: None,
            threshold_c: None,
            output: None,
            allow_disconnected: false,
            warnings: Vec::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(ConfigError::Version(self.version));
        }
        self.model.validate()?;
        if self.trials == Some(0) {
            return Err(ConfigError::Field {
                field: "trials",
                message: "must be at least 1".into(),
            });
        }
        if let Some(m) = self.margin {
            if !(m > 0.0) {
                return Err(ConfigError::Field {
                    field: "margin",
                    message: format!("must be positive, got {m}"),
                });
            }
        }
        if let Some(grid) = &self.grid {
            if grid.etas.iter().any(|&eta| !(eta > 0.0)) {
                return Err(ConfigError::Field {
                    field: "grid.etas",
                    message: "every eta must be > 0 (spectral parameters lie in the upper half plane)".into(),
                });
            }
        }
        if let Some(zs) = &self.z_points {
            if zs.iter().any(|z| !(z[1] > 0.0)) {
                return Err(ConfigError::Field {
                    field: "z_points",
                    message: "every eta must be > 0".into(),
                });
            }
        }
        if let Some(iv) = &self.intervals {
            if iv.iter().any(|i| !(i[0] < i[1])) {
                return Err(ConfigError::Field {
                    field: "intervals",
                    message: "each interval needs E1 < E2".into(),
                });
            }
        }
        Ok(())
    }

    pub fn z_list(&self) -> Option<Vec<ComplexPoint>> {
        self.z_points
            .as_ref()
            .map(|zs| zs.iter().map(|z| ComplexPoint { energy: z[0], eta: z[1] }).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FigureId {
    #[serde(rename = "1a")]
    Fig1a,
    #[serde(rename = "1b")]
    Fig1b,
    #[serde(rename = "1c")]
    Fig1c,
    #[serde(rename = "2a")]
    Fig2a,
    #[serde(rename = "2b")]
    Fig2b,
}

impl FigureId {
    pub const ALL: [FigureId; 5] = [Self::Fig1a, Self::Fig1b, Self::Fig1c, Self::Fig2a, Self::Fig2b];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Fig1a => "1a",
            Self::Fig1b => "1b",
            Self::Fig1c => "1c",
            Self::Fig2a => "2a",
            Self::Fig2b => "2b",
        }
    }

    /// Edge-statistics figures (1a–1c) as opposed to outlier figures.
    pub fn is_edge(&self) -> bool {
        matches!(self, Self::Fig1a | Self::Fig1b | Self::Fig1c)
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown figure {s:?} (expected 1a, 1b, 1c, 2a or 2b)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Desk,
    Paper,
}

impl FromStr for Scale {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desk" => Ok(Self::Desk),
            "paper" => Ok(Self::Paper),
            other => Err(format!("unknown scale {other:?} (expected desk or paper)")),
        }
    }
}

/// Edge-figure size at desk scale: the largest multiple of 3 not above 4000.
pub const DESK_EDGE_N: usize = 3999;
pub const PAPER_EDGE_N: usize = 27000;
pub const OUTLIER_N: usize = 3000;

/// Parameters of the published figures, or their desk-scale substitutes.
pub fn figure_recipe(which: FigureId, scale: Scale) -> ExperimentConfig {
    let edge_n = match scale {
        Scale::Desk => DESK_EDGE_N,
        Scale::Paper => PAPER_EDGE_N,
    };
    let (n, k, ps, pd, trials, warnings) = match which {
        FigureId::Fig1a => (edge_n, 3, 0.03, 0.01, 100, vec![]),
        FigureId::Fig1b => (edge_n, 3, 0.009, 0.006, 100, vec![Warning::Crossover]),
        FigureId::Fig1c => (edge_n, 3, 0.002, 0.001, 100, vec![Warning::Disconnected]),
        FigureId::Fig2a => (OUTLIER_N, 3, 0.03, 0.01, 20, vec![]),
        FigureId::Fig2b => (OUTLIER_N, 6, 0.03, 0.01, 20, vec![]),
    };
    let model = SbmParams {
        n_vertices: n,
        n_communities: k,
        p_intra: ps,
        p_inter: pd,
        seed: 0,
        shuffle_labels: false,
    };
    ExperimentConfig {
        name: Some(format!("figure-{}-{}", which, if scale == Scale::Desk { "desk" } else { "paper" })),
        trials: Some(trials),
        threshold_c: (!which.is_edge()).then_some(crate::detect::DEFAULT_C),
        allow_disconnected: warnings.contains(&Warning::Disconnected),
        warnings,
        ..ExperimentConfig::new(model)
    }
}
