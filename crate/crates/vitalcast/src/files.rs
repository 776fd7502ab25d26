//! Checkpoint and window files.
//!
//! A checkpoint is the binary model file (layout documented in
//! `vitalcast_core::models::checkpoint`) plus a JSON sidecar at
//! `<checkpoint>.json` holding what is needed to reuse the model on new
//! data: target vital, window length, horizon and the fitted scaler.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vitalcast_core::data::{MinMaxScaler, Vital, WindowedDataset, N_FEATURES};
use vitalcast_core::models::checkpoint::{decode, encode, ModelParams};

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalerMeta {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub fitted_on: String,
    pub fitted_patients: Vec<String>,
}

impl From<&MinMaxScaler> for ScalerMeta {
    fn from(s: &MinMaxScaler) -> Self {
        Self {
            min: s.min.to_vec(),
            max: s.max.to_vec(),
            fitted_on: s.fitted_on.clone(),
            fitted_patients: s.fitted_patients.clone(),
        }
    }
}

impl ScalerMeta {
    pub fn scaler(&self) -> AppResult<MinMaxScaler> {
        let arr = |v: &[f64], what: &str| -> AppResult<[f64; N_FEATURES]> {
            v.try_into().map_err(|_| AppError::Config(format!("scaler {what} must have {N_FEATURES} entries")))
        };
        Ok(MinMaxScaler::from_ranges(
            arr(&self.min, "min")?,
            arr(&self.max, "max")?,
            &self.fitted_on,
            self.fitted_patients.clone(),
        ))
    }
}

/// Sidecar of a checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelMeta {
    pub kind: String,
    pub target: String,
    pub window: usize,
    pub horizon: usize,
    pub seed: u64,
    pub validation_mse: Option<f64>,
    pub scaler: ScalerMeta,
}

impl ModelMeta {
    pub fn target_vital(&self) -> AppResult<Vital> {
        Vital::from_name(&self.target).ok_or_else(|| AppError::Config(format!("unknown target '{}'", self.target)))
    }
}

pub fn sidecar_path(checkpoint: &Path) -> PathBuf {
    let mut s = checkpoint.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write(path: &Path, bytes: &[u8]) -> AppResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| AppError::io(path, e))
}

pub fn save_checkpoint(path: &Path, params: &ModelParams, meta: &ModelMeta) -> AppResult<()> {
    if meta.kind != params.kind_name() {
        return Err(AppError::Usage(format!("sidecar kind '{}' does not match model '{}'", meta.kind, params.kind_name())));
    }
    write(path, &encode(params))?;
    let mut json = serde_json::to_string_pretty(meta).expect("metadata serializes");
    json.push('\n');
    write(&sidecar_path(path), json.as_bytes())
}

pub fn load_checkpoint(path: &Path) -> AppResult<(ModelParams, ModelMeta)> {
    let bytes = std::fs::read(path).map_err(|e| AppError::io(path, e))?;
    let params = decode(&bytes).map_err(|e| AppError::Format { path: path.into(), message: e.to_string() })?;
    let side = sidecar_path(path);
    let text = std::fs::read_to_string(&side).map_err(|e| AppError::io(&side, e))?;
    let meta: ModelMeta =
        serde_json::from_str(&text).map_err(|e| AppError::Format { path: side.clone(), message: e.to_string() })?;
    if meta.kind != params.kind_name() {
        return Err(AppError::Format {
            path: side,
            message: format!("sidecar describes a {} model but the checkpoint holds {}", meta.kind, params.kind_name()),
        });
    }
    Ok((params, meta))
}

/// Windows in the flat binary layout of [`WindowedDataset::to_bytes`].
pub fn export_windows(path: &Path, ds: &WindowedDataset) -> AppResult<()> {
    write(path, &ds.to_bytes()?)
}
