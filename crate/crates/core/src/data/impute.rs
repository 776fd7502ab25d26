use crate::data::record::{PatientRecord, Vital, N_VITALS};
use crate::error::{Error, Result};

/// Last-observation-carried-forward imputation per vital.
///
/// Cells before a vital's first reading take that first reading.
pub fn impute_locf(record: &PatientRecord) -> Result<PatientRecord> {
    let mut out = record.clone();
    for v in 0..N_VITALS {
        let first = record.vitals.iter().find_map(|row| row[v]).ok_or_else(|| Error::Data {
            patient: record.patient_id.clone(),
            message: alloc::format!("{} has no observations", Vital::ALL[v].name()),
        })?;
        let mut last = first;
        for row in out.vitals.iter_mut() {
            match row[v] {
                Some(x) => last = x,
                None => row[v] = Some(last),
            }
        }
    }
    Ok(out)
}
