//! Patient cohorts: imputation, min–max scaling, sliding windows and
//! patient-level splits.

mod impute;
mod record;
mod scaler;
mod split;
mod window;

pub use impute::impute_locf;
pub use record::{
    Cohort, PatientRecord, Vital, FEATURE_NAMES, N_FEATURES, N_VITALS, STATIC_FEATURES, STEP_MINUTES,
};
pub use scaler::{MinMaxScaler, PatientSeries};
pub use split::{largest_remainder, split_patients, PatientSplit, SplitPlan};
pub use window::{make_windows, make_windows_led, Provenance, TargetSpec, WindowedDataset, WINDOWS_MAGIC, WINDOWS_VERSION};
