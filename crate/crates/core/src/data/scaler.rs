use alloc::string::String;
use alloc::vec::Vec;

use crate::data::record::{PatientRecord, N_FEATURES};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Per-feature affine map onto `[0, 1]`.
///
/// Values outside the fitted range are clamped on `apply`. A feature whose
/// fitted range is empty maps to 0.5 and is marked in `constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    pub min: [f64; N_FEATURES],
    pub max: [f64; N_FEATURES],
    pub constant: [bool; N_FEATURES],
    /// Label of the split the scaler was fitted on.
    pub fitted_on: String,
    /// Patients whose values were seen during fitting.
    pub fitted_patients: Vec<String>,
}

impl MinMaxScaler {
    /// Fit on imputed records.
    pub fn fit<'a, I>(records: I, split_label: &str) -> Result<Self>
    where
        I: IntoIterator<Item = &'a PatientRecord>,
    {
        let mut min = [f64::INFINITY; N_FEATURES];
        let mut max = [f64::NEG_INFINITY; N_FEATURES];
        let mut ids = Vec::new();
        for r in records {
            let m = r.feature_matrix()?;
            for t in 0..m.rows() {
                for (f, &x) in m.row(t).iter().enumerate() {
                    min[f] = min[f].min(x);
                    max[f] = max[f].max(x);
                }
            }
            ids.push(r.patient_id.clone());
        }
        if ids.is_empty() || min.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("scaler needs at least one non-empty record"));
        }
        Ok(Self::from_ranges(min, max, split_label, ids))
    }

    pub fn from_ranges(min: [f64; N_FEATURES], max: [f64; N_FEATURES], split_label: &str, fitted_patients: Vec<String>) -> Self {
        let mut constant = [false; N_FEATURES];
        for f in 0..N_FEATURES {
            constant[f] = max[f] <= min[f];
        }
        Self {
            min,
            max,
            constant,
            fitted_on: split_label.into(),
            fitted_patients,
        }
    }

    pub fn apply_value(&self, feature: usize, x: f64) -> f64 {
        if self.constant[feature] {
            return 0.5;
        }
        ((x - self.min[feature]) / (self.max[feature] - self.min[feature])).clamp(0.0, 1.0)
    }

    pub fn invert_value(&self, feature: usize, y: f64) -> f64 {
        if self.constant[feature] {
            return self.min[feature];
        }
        self.min[feature] + y * (self.max[feature] - self.min[feature])
    }

    pub fn apply(&self, features: &Matrix) -> Result<Matrix> {
        self.check(features)?;
        let mut out = features.clone();
        for t in 0..out.rows() {
            for (f, x) in out.row_mut(t).iter_mut().enumerate() {
                *x = self.apply_value(f, *x);
            }
        }
        Ok(out)
    }

    pub fn invert(&self, scaled: &Matrix) -> Result<Matrix> {
        self.check(scaled)?;
        let mut out = scaled.clone();
        for t in 0..out.rows() {
            for (f, x) in out.row_mut(t).iter_mut().enumerate() {
                *x = self.invert_value(f, *x);
            }
        }
        Ok(out)
    }

    fn check(&self, m: &Matrix) -> Result<()> {
        if m.cols() != N_FEATURES {
            return Err(Error::shape("MinMaxScaler", N_FEATURES, m.cols()));
        }
        Ok(())
    }

    /// Scale an imputed record into a [`PatientSeries`].
    pub fn series(&self, record: &PatientRecord) -> Result<PatientSeries> {
        let original = record.feature_matrix()?;
        let scaled = self.apply(&original)?;
        Ok(PatientSeries {
            patient_id: record.patient_id.clone(),
            original,
            scaled,
        })
    }
}

/// A patient's features in original units alongside their scaled copy.
#[derive(Debug, Clone, PartialEq)]
pub struct PatientSeries {
    pub patient_id: String,
    pub original: Matrix,
    pub scaled: Matrix,
}

impl PatientSeries {
    pub fn len(&self) -> usize {
        self.original.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.original.rows() == 0
    }
}
