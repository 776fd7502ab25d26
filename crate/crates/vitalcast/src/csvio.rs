//! The patient CSV contract.
//!
//! Header `patient_id,timestamp,age,gender,heart_rate,resp_rate,spo2,temp,sbp`
//! (any column order), UTF-8, one row per patient and 5-minute step.
//! Timestamps are ISO-8601; an empty vital cell is a missing reading. Steps
//! absent from a patient's grid between its first and last row become rows
//! of missing cells.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use vitalcast_core::data::{Cohort, PatientRecord, Vital, N_VITALS, STEP_MINUTES};

use crate::error::{AppError, AppResult};

/// Required columns in the order they are written.
pub const CSV_COLUMNS: [&str; 9] =
    ["patient_id", "timestamp", "age", "gender", "heart_rate", "resp_rate", "spo2", "temp", "sbp"];

const TIMESTAMP_FORMATS: [&str; 4] = ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M"];

/// Minutes since the Unix epoch of an ISO-8601 timestamp on a whole minute.
pub fn parse_timestamp(s: &str) -> Result<i64, String> {
    let dt = match DateTime::parse_from_rfc3339(s) {
        Ok(dt) => dt.naive_utc(),
        Err(_) => TIMESTAMP_FORMATS
            .iter()
            .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
            .ok_or_else(|| format!("unparseable timestamp '{s}'"))?,
    };
    let secs = dt.and_utc().timestamp();
    if secs % 60 != 0 || dt.and_utc().timestamp_subsec_nanos() != 0 {
        return Err(format!("timestamp '{s}' is not on a whole minute"));
    }
    Ok(secs.div_euclid(60))
}

/// `YYYY-MM-DDTHH:MM:SSZ` for minutes since the epoch.
pub fn format_timestamp(minute: i64) -> String {
    DateTime::from_timestamp(minute * 60, 0)
        .expect("timestamp within chrono range")
        .format("%Y-%m-%dT%H:%M:%SZ")
        .to_string()
}

struct Row {
    line: u64,
    minute: i64,
    age: f64,
    gender: u8,
    vitals: [Option<f64>; N_VITALS],
}

/// Parse a cohort from CSV text; `source` names the input in errors.
pub fn read_cohort<R: Read>(reader: R, source: &Path) -> AppResult<Cohort> {
    let bad = |line: u64, message: String| AppError::Input { path: source.to_path_buf(), line, message };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| bad(1, e.to_string()))?.clone();
    let mut col = [usize::MAX; 9];
    for (i, name) in header.iter().enumerate() {
        let name = name.trim();
        let slot = CSV_COLUMNS
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| bad(1, format!("unknown column '{name}'")))?;
        if col[slot] != usize::MAX {
            return Err(bad(1, format!("duplicate column '{name}'")));
        }
        col[slot] = i;
    }
    if let Some(missing) = CSV_COLUMNS.iter().zip(col).find(|(_, c)| *c == usize::MAX) {
        return Err(bad(1, format!("missing column '{}'", missing.0)));
    }

    let mut order: Vec<String> = Vec::new();
    let mut by_patient: HashMap<String, Vec<Row>> = HashMap::new();
    for result in rdr.records() {
        let rec = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            bad(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |slot: usize| rec.get(col[slot]).unwrap_or("").trim();
        let id = field(0);
        if id.is_empty() {
            return Err(bad(line, "empty patient_id".into()));
        }
        let minute = parse_timestamp(field(1)).map_err(|m| bad(line, m))?;
        let number = |slot: usize| -> Result<Option<f64>, AppError> {
            let s = field(slot);
            if s.is_empty() {
                return Ok(None);
            }
            let v: f64 = s.parse().map_err(|_| bad(line, format!("{}: '{s}' is not a number", CSV_COLUMNS[slot])))?;
            if !v.is_finite() {
                return Err(bad(line, format!("{}: non-finite value '{s}'", CSV_COLUMNS[slot])));
            }
            Ok(Some(v))
        };
        let age = number(2)?.ok_or_else(|| bad(line, "age is required".into()))?;
        let gender = match field(3) {
            "0" => 0,
            "1" => 1,
            other => return Err(bad(line, format!("gender must be 0 or 1, got '{other}'"))),
        };
        let mut vitals = [None; N_VITALS];
        for (v, cell) in vitals.iter_mut().enumerate() {
            *cell = number(4 + v)?;
        }
        let rows = by_patient.entry(id.to_string()).or_insert_with(|| {
            order.push(id.to_string());
            Vec::new()
        });
        rows.push(Row { line, minute, age, gender, vitals });
    }

    let mut records = Vec::with_capacity(order.len());
    for id in order {
        let mut rows = by_patient.remove(&id).expect("patient collected");
        rows.sort_by_key(|r| (r.minute, r.line));
        let first = &rows[0];
        for pair in rows.windows(2) {
            if pair[0].minute == pair[1].minute {
                return Err(bad(
                    pair[1].line,
                    format!("duplicate timestamp {} for patient '{id}' (first seen on line {})", format_timestamp(pair[1].minute), pair[0].line),
                ));
            }
        }
        for r in &rows {
            if r.age != first.age || r.gender != first.gender {
                return Err(bad(r.line, format!("age/gender of patient '{id}' differ from line {}", first.line)));
            }
            if (r.minute - first.minute) % STEP_MINUTES != 0 {
                return Err(bad(r.line, format!("timestamp is off the {STEP_MINUTES}-minute grid of patient '{id}'")));
            }
        }
        let last = rows.last().expect("nonempty").minute;
        let steps = usize::try_from((last - first.minute) / STEP_MINUTES).expect("sorted") + 1;
        let mut vitals = vec![[None; N_VITALS]; steps];
        for r in &rows {
            vitals[usize::try_from((r.minute - first.minute) / STEP_MINUTES).expect("sorted")] = r.vitals;
        }
        records.push(PatientRecord {
            patient_id: id,
            age: first.age,
            gender: first.gender,
            start_minute: first.minute,
            vitals,
        });
    }
    Ok(Cohort::new(records)?)
}

/// Read and parse a patient CSV file.
pub fn ingest_csv(path: &Path) -> AppResult<Cohort> {
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    read_cohort(std::io::BufReader::new(file), path)
}

/// Write a cohort in the CSV contract, one row per grid step, `\n` endings.
pub fn write_cohort<W: Write>(cohort: &Cohort, writer: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(CSV_COLUMNS)?;
    for r in cohort.records() {
        let age = r.age.to_string();
        let gender = r.gender.to_string();
        for (t, row) in r.vitals.iter().enumerate() {
            let ts = format_timestamp(r.start_minute + t as i64 * STEP_MINUTES);
            let mut fields = vec![r.patient_id.clone(), ts, age.clone(), gender.clone()];
            fields.extend(row.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            w.write_record(&fields)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Write a cohort CSV file.
pub fn export_csv(cohort: &Cohort, path: &Path) -> AppResult<()> {
    let mut buf = Vec::new();
    write_cohort(cohort, &mut buf).map_err(|e| AppError::Format { path: path.into(), message: e.to_string() })?;
    std::fs::write(path, buf).map_err(|e| AppError::io(path, e))
}

/// A reading outside the physiological plausibility range.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeWarning {
    pub patient_id: String,
    pub step: usize,
    pub vital: Vital,
    pub value: f64,
}

/// Every reading outside [`Vital::clip_range`].
pub fn range_warnings(cohort: &Cohort) -> Vec<RangeWarning> {
    let mut out = Vec::new();
    for r in cohort.records() {
        for (step, row) in r.vitals.iter().enumerate() {
            for vital in Vital::ALL {
                if let Some(value) = row[vital.index()] {
                    let (lo, hi) = vital.clip_range();
                    if value < lo || value > hi {
                        out.push(RangeWarning { patient_id: r.patient_id.clone(), step, vital, value });
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> AppResult<Cohort> {
        read_cohort(text.as_bytes(), Path::new("test.csv"))
    }

    const HEADER: &str = "patient_id,timestamp,age,gender,heart_rate,resp_rate,spo2,temp,sbp\n";

    #[test]
    fn two_patients_three_rows() {
        let mut s = HEADER.to_string();
        for id in ["a", "b"] {
            for m in ["00", "05", "10"] {
                s += &format!("{id},2024-01-01T00:{m}:00Z,50,1,70,16,97,36.8,120\n");
            }
        }
        let c = parse(&s).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.records().iter().all(|r| r.len() == 3 && r.is_complete()));
        assert_eq!(c.records()[0].patient_id, "a");
    }

    #[test]
    fn empty_cell_is_missing() {
        let s = format!("{HEADER}a,2024-01-01T00:00:00Z,50,0,,16,97,36.8,120\n");
        let c = parse(&s).unwrap();
        assert_eq!(c.records()[0].vitals[0][0], None);
        assert_eq!(c.records()[0].vitals[0][1], Some(16.0));
    }

    #[test]
    fn gaps_are_materialized() {
        let mut s = HEADER.to_string();
        for m in ["00", "05", "15"] {
            s += &format!("a,2024-01-01T00:{m}:00Z,50,0,70,16,97,36.8,120\n");
        }
        let c = parse(&s).unwrap();
        let r = &c.records()[0];
        assert_eq!(r.len(), 4);
        assert_eq!(r.vitals[2], [None; N_VITALS]);
        assert_eq!(r.missing_count(), 5);
    }

    #[test]
    fn rows_are_ordered_by_time() {
        let s = format!(
            "{HEADER}a,2024-01-01T00:05:00Z,50,0,72,16,97,36.8,120\na,2024-01-01T00:00:00Z,50,0,70,16,97,36.8,120\n"
        );
        let c = parse(&s).unwrap();
        let r = &c.records()[0];
        assert_eq!(r.vitals[0][0], Some(70.0));
        assert_eq!(r.start_minute, parse_timestamp("2024-01-01T00:00:00Z").unwrap());
    }

    fn line_of(err: AppError) -> u64 {
        match err {
            AppError::Input { line, .. } => line,
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn duplicate_timestamp_cites_the_later_line() {
        let s = format!(
            "{HEADER}a,2024-01-01T00:00:00Z,50,0,70,16,97,36.8,120\na,2024-01-01T00:05:00Z,50,0,70,16,97,36.8,120\na,2024-01-01T00:00:00Z,50,0,71,16,97,36.8,120\n"
        );
        assert_eq!(line_of(parse(&s).unwrap_err()), 4);
    }

    #[test]
    fn malformed_rows_cite_their_line() {
        let s = format!("{HEADER}a,2024-01-01T00:00:00Z,50,0,70,16,97,36.8,120\na,2024-01-01T00:05:00Z,50,0,fast,16,97,36.8,120\n");
        assert_eq!(line_of(parse(&s).unwrap_err()), 3);
        let s = format!("{HEADER}a,2024-01-01T00:00:00Z,50,0,70,16\n");
        assert_eq!(line_of(parse(&s).unwrap_err()), 2);
        let s = format!("{HEADER}a,yesterday,50,0,70,16,97,36.8,120\n");
        assert_eq!(line_of(parse(&s).unwrap_err()), 2);
        let s = format!("{HEADER}a,2024-01-01T00:03:00Z,50,2,70,16,97,36.8,120\n");
        assert_eq!(line_of(parse(&s).unwrap_err()), 2);
    }

    #[test]
    fn off_grid_and_inconsistent_statics() {
        let s = format!("{HEADER}a,2024-01-01T00:00:00Z,50,0,70,16,97,36.8,120\na,2024-01-01T00:07:00Z,50,0,70,16,97,36.8,120\n");
        assert_eq!(line_of(parse(&s).unwrap_err()), 3);
        let s = format!("{HEADER}a,2024-01-01T00:00:00Z,50,0,70,16,97,36.8,120\na,2024-01-01T00:05:00Z,51,0,70,16,97,36.8,120\n");
        assert_eq!(line_of(parse(&s).unwrap_err()), 3);
    }

    #[test]
    fn header_problems() {
        let s = "patient_id,timestamp,age,gender,heart_rate,resp_rate,spo2,temp,sbp,lactate\n";
        assert!(parse(s).unwrap_err().to_string().contains("unknown column 'lactate'"));
        let s = "patient_id,timestamp,age,gender,heart_rate,resp_rate,spo2,temp\n";
        assert!(parse(s).unwrap_err().to_string().contains("missing column 'sbp'"));
    }

    #[test]
    fn column_order_is_free() {
        let s = "sbp,temp,spo2,resp_rate,heart_rate,gender,age,timestamp,patient_id\n120,36.8,97,16,70,1,50,2024-01-01T00:00:00Z,a\n";
        let c = parse(s).unwrap();
        let r = &c.records()[0];
        assert_eq!(r.vitals[0], [Some(70.0), Some(16.0), Some(97.0), Some(36.8), Some(120.0)]);
        assert_eq!(r.gender, 1);
    }

    #[test]
    fn timestamps_in_several_spellings() {
        let m = parse_timestamp("2024-01-01T00:05:00Z").unwrap();
        assert_eq!(parse_timestamp("2024-01-01T00:05:00").unwrap(), m);
        assert_eq!(parse_timestamp("2024-01-01 00:05").unwrap(), m);
        assert_eq!(parse_timestamp("2024-01-01T01:05:00+01:00").unwrap(), m);
        assert_eq!(format_timestamp(m), "2024-01-01T00:05:00Z");
        assert!(parse_timestamp("2024-01-01T00:05:30Z").is_err());
    }

    #[test]
    fn write_then_read_round_trips() {
        let mut s = HEADER.to_string();
        s += "b,2024-01-01T00:00:00Z,61.5,1,88.2,,95,37.25,131\n";
        s += "b,2024-01-01T00:10:00Z,61.5,1,90,18,95,37.3,130\n";
        s += "a,2024-01-02T00:00:00Z,40,0,70,16,97,36.8,120\n";
        let c = parse(&s).unwrap();
        let mut out = Vec::new();
        write_cohort(&c, &mut out).unwrap();
        let again = read_cohort(out.as_slice(), Path::new("round.csv")).unwrap();
        assert_eq!(c, again);
        let text = String::from_utf8(out).unwrap();
        assert!(text.ends_with('\n') && !text.contains('\r'));
        assert!(text.contains("b,2024-01-01T00:05:00Z,61.5,1,,,,,\n"));
    }

    #[test]
    fn out_of_range_readings_warn() {
        let s = format!("{HEADER}a,2024-01-01T00:00:00Z,50,0,250,16,97,36.8,120\n");
        let w = range_warnings(&parse(&s).unwrap());
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].vital, Vital::HeartRate);
    }
}
