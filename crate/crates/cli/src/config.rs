//! Pipeline configuration: a TOML file with one table per stage. Every key
//! has a default, so an empty file is a valid configuration.

use std::path::{Path, PathBuf};

use curvnet_core::curvature::{CurvatureKind, CurvatureOptions, HaantjesMode};
use curvnet_core::forecaster::{AdamConfig, TrainConfig};
use curvnet_core::market_data::WindowScheme;
use curvnet_core::pipeline::AnalysisConfig;
use curvnet_core::wavelet::{ThresholdMode, WaveletFamily, WaveletSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketDataConfig {
    pub input: Option<PathBuf>,
    pub scheme: WindowScheme,
    pub tau: usize,
    pub delta: usize,
}

impl Default for MarketDataConfig {
    fn default() -> Self {
        Self {
            input: None,
            scheme: WindowScheme::Rolling,
            tau: 22,
            delta: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub theta: f64,
    pub dump_networks: bool,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            theta: 0.75,
            dump_networks: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvatureConfig {
    /// Kinds to forecast and report. `analyze` always writes all four.
    pub kinds: Vec<CurvatureKind>,
    pub max_path_len: usize,
    pub haantjes: HaantjesMode,
}

impl Default for CurvatureConfig {
    fn default() -> Self {
        Self {
            kinds: CurvatureKind::ALL.to_vec(),
            max_path_len: 4,
            haantjes: HaantjesMode::Sqrt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveletConfig {
    pub family: WaveletFamily,
    pub levels: usize,
    pub denoise: bool,
    /// Denoising threshold; the universal threshold when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub mode: ThresholdMode,
}

impl Default for WaveletConfig {
    fn default() -> Self {
        Self {
            family: WaveletFamily::Db4,
            levels: 4,
            denoise: false,
            threshold: None,
            mode: ThresholdMode::Soft,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecasterConfig {
    pub hidden_size: usize,
    pub train_fraction: f64,
    pub max_iterations: usize,
    pub learning_rate: f64,
    pub gradient_clip: f64,
    /// Also fit the plain-LSTM baseline.
    pub baseline: bool,
    pub adam: AdamConfig,
}

impl Default for ForecasterConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            hidden_size: t.hidden_size,
            train_fraction: t.train_fraction,
            max_iterations: t.max_iterations,
            learning_rate: t.learning_rate,
            gradient_clip: t.gradient_clip,
            baseline: true,
            adam: t.adam,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub market_data: MarketDataConfig,
    pub network: NetworkConfig,
    pub curvature: CurvatureConfig,
    pub wavelet: WaveletConfig,
    pub forecaster: ForecasterConfig,
    pub output: OutputConfig,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises to TOML")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn analysis(&self) -> AnalysisConfig {
        AnalysisConfig {
            scheme: self.market_data.scheme,
            tau: self.market_data.tau,
            delta: self.market_data.delta,
            theta: self.network.theta,
            curvature: CurvatureOptions {
                max_path_len: self.curvature.max_path_len,
                haantjes: self.curvature.haantjes,
            },
        }
    }

    pub fn wavelet_spec(&self) -> WaveletSpec {
        WaveletSpec {
            family: self.wavelet.family,
            levels: self.wavelet.levels,
        }
    }

    /// Training configuration with the top-level seed; per-model seeds are
    /// derived from it by stream name.
    pub fn train(&self) -> TrainConfig {
        let f = &self.forecaster;
        TrainConfig {
            hidden_size: f.hidden_size,
            train_fraction: f.train_fraction,
            max_iterations: f.max_iterations,
            learning_rate: f.learning_rate,
            gradient_clip: f.gradient_clip,
            adam: f.adam,
            seed: self.seed,
        }
    }

    /// Cross-field checks that do not need any input data.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(-1.0..=1.0).contains(&self.network.theta) {
            return bad(format!("network.theta {} must lie in [-1, 1]", self.network.theta));
        }
        if self.curvature.kinds.is_empty() {
            return bad("curvature.kinds must name at least one kind".into());
        }
        if self.wavelet.levels == 0 {
            return bad("wavelet.levels must be at least 1".into());
        }
        if let Some(t) = self.wavelet.threshold {
            if !(t >= 0.0) {
                return bad(format!("wavelet.threshold {t} must be non-negative"));
            }
        }
        self.analysis().curvature.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.train().validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }
}
