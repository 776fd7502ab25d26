use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Number of time-varying vitals per step.
pub const N_VITALS: usize = 5;
/// Static features broadcast to every step: age and gender.
pub const STATIC_FEATURES: usize = 2;
/// Features per time step in a window (K).
pub const N_FEATURES: usize = STATIC_FEATURES + N_VITALS;
/// Sampling cadence.
pub const STEP_MINUTES: i64 = 5;

/// Column names in feature order.
pub const FEATURE_NAMES: [&str; N_FEATURES] =
    ["age", "gender", "heart_rate", "resp_rate", "spo2", "temp", "sbp"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vital {
    HeartRate,
    RespRate,
    Spo2,
    Temp,
    Sbp,
}

impl Vital {
    pub const ALL: [Vital; N_VITALS] = [Vital::HeartRate, Vital::RespRate, Vital::Spo2, Vital::Temp, Vital::Sbp];

    /// Position among the five vitals.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Column in the K-feature layout.
    pub fn feature_index(self) -> usize {
        STATIC_FEATURES + self.index()
    }

    pub fn name(self) -> &'static str {
        FEATURE_NAMES[self.feature_index()]
    }

    pub fn from_name(name: &str) -> Option<Vital> {
        match name {
            "heart_rate" | "hr" => Some(Vital::HeartRate),
            "resp_rate" | "rr" => Some(Vital::RespRate),
            "spo2" => Some(Vital::Spo2),
            "temp" => Some(Vital::Temp),
            "sbp" => Some(Vital::Sbp),
            _ => None,
        }
    }

    /// Physiological plausibility range.
    pub fn clip_range(self) -> (f64, f64) {
        match self {
            Vital::HeartRate => (30.0, 200.0),
            Vital::RespRate => (5.0, 50.0),
            Vital::Spo2 => (70.0, 100.0),
            Vital::Temp => (34.0, 42.0),
            Vital::Sbp => (60.0, 250.0),
        }
    }
}

/// One patient's vitals on the 5-minute grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PatientRecord {
    pub patient_id: String,
    pub age: f64,
    /// 0 or 1.
    pub gender: u8,
    /// Minutes since the Unix epoch of step 0.
    pub start_minute: i64,
    /// One entry per step; `None` marks a missing reading.
    pub vitals: Vec<[Option<f64>; N_VITALS]>,
}

impl PatientRecord {
    /// Number of time steps (p).
    pub fn len(&self) -> usize {
        self.vitals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vitals.is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.vitals.iter().flatten().filter(|v| v.is_none()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.missing_count() == 0
    }

    pub fn vital_series(&self, vital: Vital) -> Vec<Option<f64>> {
        self.vitals.iter().map(|row| row[vital.index()]).collect()
    }

    /// p × K feature matrix with statics broadcast to every row.
    pub fn feature_matrix(&self) -> Result<Matrix> {
        let mut out = Matrix::zeros(self.len(), N_FEATURES);
        for (t, row) in self.vitals.iter().enumerate() {
            let dst = out.row_mut(t);
            dst[0] = self.age;
            dst[1] = f64::from(self.gender);
            for (v, cell) in row.iter().enumerate() {
                dst[STATIC_FEATURES + v] = cell.ok_or_else(|| Error::Data {
                    patient: self.patient_id.clone(),
                    message: alloc::format!("{} missing at step {t}; impute first", Vital::ALL[v].name()),
                })?;
            }
        }
        Ok(out)
    }
}

/// A set of patients with unique ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cohort {
    records: Vec<PatientRecord>,
}

impl Cohort {
    pub fn new(records: Vec<PatientRecord>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for r in &records {
            if !seen.insert(r.patient_id.as_str()) {
                return Err(Error::Data {
                    patient: r.patient_id.clone(),
                    message: "duplicate patient id".into(),
                });
            }
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[PatientRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, patient_id: &str) -> Option<&PatientRecord> {
        self.records.iter().find(|r| r.patient_id == patient_id)
    }

    pub fn into_records(self) -> Vec<PatientRecord> {
        self.records
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn record(id: &str) -> PatientRecord {
        PatientRecord {
            patient_id: id.into(),
            age: 60.0,
            gender: 1,
            start_minute: 0,
            vitals: vec![[Some(70.0), Some(16.0), Some(97.0), Some(36.8), Some(120.0)]; 3],
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        assert!(Cohort::new(vec![record("a"), record("b")]).is_ok());
        assert!(Cohort::new(vec![record("a"), record("a")]).is_err());
    }

    #[test]
    fn feature_matrix_broadcasts_statics() {
        let m = record("a").feature_matrix().unwrap();
        assert_eq!(m.shape(), (3, N_FEATURES));
        assert!((0..3).all(|t| m.get(t, 0) == 60.0 && m.get(t, 1) == 1.0));
        assert_eq!(m.get(2, Vital::Sbp.feature_index()), 120.0);
    }

    #[test]
    fn feature_matrix_requires_imputation() {
        let mut r = record("a");
        r.vitals[1][0] = None;
        assert_eq!(r.missing_count(), 1);
        assert!(r.feature_matrix().is_err());
    }

    #[test]
    fn vital_names_round_trip() {
        for v in Vital::ALL {
            assert_eq!(Vital::from_name(v.name()), Some(v));
        }
    }
}
