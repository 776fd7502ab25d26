//! Experiment configuration: one JSON document, every field required
//! unless marked optional, unknown fields rejected.
//!
//! `configs/default.json` at the repository root carries the
//! defaults of [`ExperimentConfig::standard`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vitalcast_core::data::{SplitPlan, Vital};
use vitalcast_core::evaluation::{KernelSettings, Method, ModelSettings, SuiteConfig};
use vitalcast_core::models::kernel::GridPoint;
use vitalcast_core::models::lstm::{LstmConfig, LstmGrid};
use vitalcast_core::models::mlp::MlpConfig;
use vitalcast_core::models::{gpr, krr, TrainConfig};
use vitalcast_core::strategies::PredictorWindows;
use vitalcast_core::synthgen::CohortSpec;

use crate::error::{AppError, AppResult};
use crate::report::ReportFormat;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    /// One of heart_rate, resp_rate, spo2, temp, sbp.
    pub target: String,
    /// Observation window length (M).
    pub window: usize,
    pub horizons: Vec<usize>,
    pub seeds: Vec<u64>,
    pub split: SplitSection,
    pub methods: Vec<String>,
    pub models: ModelsSection,
    pub output: OutputSection,
}

/// Where the cohort comes from. Relative paths resolve against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Csv { path: PathBuf },
    Synthetic(SyntheticSection),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub patients: usize,
    pub steps: usize,
    pub archetypes: usize,
    pub missing_rate: f64,
    pub seed: u64,
}

impl From<&SyntheticSection> for CohortSpec {
    fn from(s: &SyntheticSection) -> Self {
        CohortSpec {
            n_patients: s.patients,
            steps_per_patient: s.steps,
            n_archetypes: s.archetypes,
            missing_rate: s.missing_rate,
            seed: s.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
    /// Shares of the whole cohort; they partition `train`.
    pub predictive: f64,
    pub generative: f64,
    /// Optional: shuffle every run with this seed instead of the run seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LstmSection {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Validation-tuning candidates; empty keeps the base value.
    pub hidden_grid: Vec<usize>,
    pub learning_rate_grid: Vec<f64>,
}

impl LstmSection {
    fn config(&self) -> LstmConfig {
        LstmConfig {
            hidden: self.hidden,
            train: TrainConfig { epochs: self.epochs, batch_size: self.batch_size, learning_rate: self.learning_rate },
        }
    }

    fn grid(&self) -> LstmGrid {
        LstmGrid { hidden: self.hidden_grid.clone(), learning_rates: self.learning_rate_grid.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpSection {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub learning_rate_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub variance: f64,
    /// Length scale as a multiple of the median training distance.
    pub length_scale_factor: f64,
    pub noise: f64,
}

impl From<&GridSection> for GridPoint {
    fn from(g: &GridSection) -> Self {
        GridPoint { variance: g.variance, length_scale_factor: g.length_scale_factor, noise: g.noise }
    }
}

impl From<&GridPoint> for GridSection {
    fn from(g: &GridPoint) -> Self {
        GridSection { variance: g.variance, length_scale_factor: g.length_scale_factor, noise: g.noise }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub max_train: usize,
    pub max_validation: usize,
    pub gpr_grid: Vec<GridSection>,
    pub krr_grid: Vec<GridSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiSection {
    /// Neighbour count of the KSG estimator.
    pub k: usize,
    /// Number of score groups (L).
    pub groups: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowsMode {
    Generated,
    Clean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelsSection {
    pub generator: LstmSection,
    /// GLSTM predictors and the direct LSTM benchmark.
    pub predictor: LstmSection,
    pub predictor_windows: WindowsMode,
    pub mlp: MlpSection,
    pub kernel: KernelSection,
    pub mi: MiSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Relative to the config file's directory when not absolute.
    pub dir: PathBuf,
    /// Reports are written as `<dir>/<stem>.<ext>`.
    pub stem: String,
    pub formats: Vec<ReportFormat>,
}

impl ExperimentConfig {
    pub fn standard() -> Self {
        let lstm = |epochs, learning_rate| LstmSection {
            hidden: 1,
            epochs,
            batch_size: 20,
            learning_rate,
            hidden_grid: Vec::new(),
            learning_rate_grid: Vec::new(),
        };
        Self {
            data: DataSource::Synthetic(SyntheticSection {
                patients: 40,
                steps: 288,
                archetypes: 3,
                missing_rate: 0.0,
                seed: 2024,
            }),
            target: Vital::HeartRate.name().into(),
            window: 20,
            horizons: (1..=12).collect(),
            seeds: (0..10).collect(),
            split: SplitSection {
                train: 0.6,
                validation: 0.2,
                test: 0.2,
                predictive: 0.4,
                generative: 0.2,
                fixed_seed: None,
            },
            methods: Method::default_suite().iter().map(Method::name).collect(),
            models: ModelsSection {
                generator: lstm(300, 0.0005),
                predictor: lstm(100, 0.001),
                predictor_windows: WindowsMode::Generated,
                mlp: MlpSection {
                    hidden: vec![10, 5, 3],
                    epochs: 100,
                    batch_size: 20,
                    learning_rate: 0.001,
                    learning_rate_grid: Vec::new(),
                },
                kernel: KernelSection {
                    max_train: 500,
                    max_validation: 500,
                    gpr_grid: gpr::default_grid().iter().map(GridSection::from).collect(),
                    krr_grid: krr::default_grid().iter().map(GridSection::from).collect(),
                },
                mi: MiSection { k: 3, groups: 10 },
            },
            output: OutputSection {
                dir: "reports".into(),
                stem: "report".into(),
                formats: vec![ReportFormat::Csv, ReportFormat::Markdown, ReportFormat::Json],
            },
        }
    }

    /// Parse JSON text. Missing or unknown fields are configuration errors
    /// naming the field.
    pub fn from_json(text: &str) -> AppResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| AppError::Config(e.to_string()))?;
        cfg.suite()?;
        if cfg.output.formats.is_empty() {
            return Err(AppError::Config("output.formats must name at least one format".into()));
        }
        if cfg.output.stem.is_empty() || cfg.output.stem.contains(['/', '\\']) {
            return Err(AppError::Config("output.stem must be a plain file name".into()));
        }
        Ok(cfg)
    }

    /// Load a config file and resolve its relative paths against the
    /// file's directory.
    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        let mut cfg = Self::from_json(&text).map_err(|e| match e {
            AppError::Config(m) => AppError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let DataSource::Csv { path: p } = &mut cfg.data {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if cfg.output.dir.is_relative() {
            cfg.output.dir = base.join(&cfg.output.dir);
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn target_vital(&self) -> AppResult<Vital> {
        Vital::from_name(&self.target).ok_or_else(|| AppError::Config(format!("target: unknown vital '{}'", self.target)))
    }

    /// The validated suite description.
    pub fn suite(&self) -> AppResult<SuiteConfig> {
        let cfg = |e: vitalcast_core::Error| AppError::Config(e.to_string());
        let methods = self
            .methods
            .iter()
            .map(|m| Method::parse(m).map_err(|e| AppError::Config(format!("methods: {e}"))))
            .collect::<AppResult<Vec<_>>>()?;
        let m = &self.models;
        let suite = SuiteConfig {
            methods,
            horizons: self.horizons.clone(),
            target: self.target_vital()?,
            window: self.window,
            seeds: self.seeds.clone(),
            split: SplitPlan {
                train: self.split.train,
                validation: self.split.validation,
                test: self.split.test,
                predictive: self.split.predictive,
                generative: self.split.generative,
                seed: 0,
            },
            fixed_split_seed: self.split.fixed_seed,
            models: ModelSettings {
                generator: m.generator.config(),
                generator_grid: m.generator.grid(),
                predictor: m.predictor.config(),
                predictor_grid: m.predictor.grid(),
                predictor_windows: match m.predictor_windows {
                    WindowsMode::Generated => PredictorWindows::Generated,
                    WindowsMode::Clean => PredictorWindows::Clean,
                },
                mlp: MlpConfig {
                    hidden: m.mlp.hidden.clone(),
                    train: TrainConfig {
                        epochs: m.mlp.epochs,
                        batch_size: m.mlp.batch_size,
                        learning_rate: m.mlp.learning_rate,
                    },
                },
                mlp_learning_rates: m.mlp.learning_rate_grid.clone(),
                kernel: KernelSettings {
                    max_train: m.kernel.max_train,
                    max_validation: m.kernel.max_validation,
                    gpr_grid: m.kernel.gpr_grid.iter().map(GridPoint::from).collect(),
                    krr_grid: m.kernel.krr_grid.iter().map(GridPoint::from).collect(),
                },
                mi_k: m.mi.k,
                mi_groups: m.mi.groups,
            },
        };
        suite.validate().map_err(cfg)?;
        if m.kernel.gpr_grid.is_empty() || m.kernel.krr_grid.is_empty() {
            return Err(AppError::Config("models.kernel grids must be nonempty".into()));
        }
        if m.mlp.hidden.is_empty() || m.mlp.hidden.contains(&0) || m.generator.hidden == 0 || m.predictor.hidden == 0 {
            return Err(AppError::Config("hidden sizes must be at least 1".into()));
        }
        if let DataSource::Synthetic(s) = &self.data {
            CohortSpec::from(s).validate().map_err(|e| AppError::Config(format!("data.synthetic: {e}")))?;
        }
        Ok(suite)
    }
}
