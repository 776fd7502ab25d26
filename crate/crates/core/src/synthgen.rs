//! Reproducible synthetic vital-sign cohorts.
//!
//! Every patient belongs to one archetype. Vital `v` of patient `p` in
//! archetype `a` at step `t` is
//!
//! ```text
//! x = base[a][v] + δ[p][v] + A[v]·sin(2πt/T + φ_a)
//!     + σ[v]·( √(1 − ω)·( √w_p·s[a][v]·z_a(t) + √(1 − w_p)·r[p][v]·u_p(t) ) + √ω·ε_{p,v}(t) )
//! ```
//!
//! - `z_a` is one AR(2) stream shared by every member of archetype `a`.
//! - `u_p` is the patient's own AR(2) stream.
//! - `ε` is white measurement noise.
//! - All three have unit variance; the AR coefficients are [`AR_COEFFS`].
//! - `s[a][v]` and `r[p][v]` are ±1 loading signs; `ω` is [`WHITE_FRACTION`].
//!
//! The shared stream gives same-archetype patients step-aligned dependence,
//! which mutual information can recover. The loading `w_p` varies per
//! patient, so patients are not equally representative. Streams of
//! different archetypes are independent. Each patient's slowly varying part
//! is deliberately one-dimensional per stream: independent autocorrelated
//! noise in all five vitals would make time-paired nearest-neighbour MI
//! between unrelated patients look large.
//!
//! Values are clipped to the physiological ranges of [`Vital::clip_range`]
//! and rounded to the resolution of bedside monitors. Cells are then
//! blanked at `missing_rate`.
//!
//! Scale constants: the AR streams have lag-one autocorrelation
//! `ρ₁ = φ₁/(1 − φ₂) = 0.75`. The one-step difference therefore has standard
//! deviation `σ·√(2(1 − ω)(1 − ρ₁) + 2ω) ≈ 0.97σ`, and `σ_HR = 7` puts
//! naive-persistence MAPE for heart rate near 7 % at about 80 bpm.
//! Circadian amplitudes are at most 0.3σ, so the common time-of-day signal
//! adds little MI across archetypes.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::{Cohort, PatientRecord, Vital, N_VITALS};
use crate::error::{Error, Result};
use crate::math;
use crate::numerics::Rng;

/// Steps per patient by default: 24 hours at a 5-minute cadence.
pub const DEFAULT_STEPS: usize = 288;
/// Circadian period in steps (24 h).
pub const CIRCADIAN_PERIOD: f64 = 288.0;
/// AR(2) coefficients of the shared and patient-level streams.
pub const AR_COEFFS: [f64; 2] = [0.6, 0.2];
/// Generated series must exceed the default window (20) plus horizon (12).
pub const MIN_STEPS: usize = 33;
/// Upper bound (exclusive) for `missing_rate`.
pub const MAX_MISSING_RATE: f64 = 0.1;
/// Share `ω` of each vital's stochastic variance that is white noise.
pub const WHITE_FRACTION: f64 = 0.3;
/// Range of the per-patient shared-stream loading `w_p`.
pub const LOADING_RANGE: (f64, f64) = (0.25, 0.75);
/// Age range in years, drawn uniformly.
pub const AGE_RANGE: (f64, f64) = (30.0, 85.0);
/// Step 0 of every patient: 2024-01-01T00:00Z in minutes since the epoch.
pub const START_MINUTE: i64 = 28_401_120;
/// Burn-in steps discarded so AR streams start near stationarity.
const BURN_IN: usize = 100;

/// Per-vital constants, in [`Vital::ALL`] order.
#[derive(Debug, Clone, Copy)]
pub struct VitalScale {
    /// Circadian amplitude `A`.
    pub amplitude: f64,
    /// Standard deviation `σ` of the stochastic part.
    pub sigma: f64,
    /// Standard deviation of the per-patient baseline offset `δ`.
    pub offset_sd: f64,
    /// Rounding resolution of emitted values.
    pub resolution: f64,
}

pub const VITAL_SCALES: [VitalScale; N_VITALS] = [
    VitalScale { amplitude: 2.0, sigma: 7.0, offset_sd: 4.0, resolution: 0.1 },
    VitalScale { amplitude: 0.6, sigma: 2.0, offset_sd: 1.5, resolution: 0.1 },
    VitalScale { amplitude: 0.2, sigma: 0.8, offset_sd: 0.5, resolution: 0.1 },
    VitalScale { amplitude: 0.06, sigma: 0.2, offset_sd: 0.15, resolution: 0.01 },
    VitalScale { amplitude: 3.0, sigma: 10.0, offset_sd: 6.0, resolution: 0.1 },
];

/// Baselines and shared-stream loading signs of one archetype.
#[derive(Debug, Clone, Copy)]
pub struct Archetype {
    pub name: &'static str,
    /// Heart rate, respiratory rate, SpO2, temperature, systolic BP.
    pub baseline: [f64; N_VITALS],
    pub loading_sign: [f64; N_VITALS],
}

/// The archetype table; archetype `a` uses entry `a % 3` with circadian
/// phase `2πa / n_archetypes`.
pub const ARCHETYPES: [Archetype; 3] = [
    Archetype {
        name: "stable",
        baseline: [74.0, 15.0, 97.0, 36.8, 122.0],
        loading_sign: [1.0, 1.0, -1.0, 1.0, 1.0],
    },
    Archetype {
        name: "tachycardic",
        baseline: [96.0, 20.0, 95.0, 37.5, 108.0],
        loading_sign: [1.0, 1.0, -1.0, 1.0, -1.0],
    },
    Archetype {
        name: "hypertensive",
        baseline: [66.0, 16.0, 96.0, 36.5, 146.0],
        loading_sign: [1.0, -1.0, 1.0, -1.0, 1.0],
    },
];

/// What to generate.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortSpec {
    pub n_patients: usize,
    pub steps_per_patient: usize,
    pub n_archetypes: usize,
    pub missing_rate: f64,
    pub seed: u64,
}

impl Default for CohortSpec {
    fn default() -> Self {
        Self {
            n_patients: 40,
            steps_per_patient: DEFAULT_STEPS,
            n_archetypes: 3,
            missing_rate: 0.0,
            seed: 0,
        }
    }
}

impl CohortSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_archetypes == 0 || self.n_patients < self.n_archetypes {
            return Err(Error::invalid(format!(
                "need n_patients ≥ n_archetypes ≥ 1, got {} patients and {} archetypes",
                self.n_patients, self.n_archetypes
            )));
        }
        if !(0.0..MAX_MISSING_RATE).contains(&self.missing_rate) {
            return Err(Error::invalid(format!(
                "missing_rate must be in [0, {MAX_MISSING_RATE}), got {}",
                self.missing_rate
            )));
        }
        if self.steps_per_patient < MIN_STEPS {
            return Err(Error::invalid(format!(
                "steps_per_patient must be at least {MIN_STEPS}, got {}",
                self.steps_per_patient
            )));
        }
        Ok(())
    }
}

/// A generated cohort plus its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCohort {
    pub cohort: Cohort,
    /// Archetype index per record, in record order.
    pub archetypes: Vec<usize>,
    /// Shared-stream loading `w_p` per record.
    pub loadings: Vec<f64>,
}

/// Unit-variance AR(2) path of length `n` with coefficients [`AR_COEFFS`].
fn ar2_path(rng: &mut Rng, n: usize) -> Vec<f64> {
    let [p1, p2] = AR_COEFFS;
    // stationary variance of y_t = p1 y_{t-1} + p2 y_{t-2} + e_t with unit e
    let var = (1.0 - p2) / ((1.0 + p2) * ((1.0 - p2) * (1.0 - p2) - p1 * p1));
    let scale = 1.0 / math::sqrt(var);
    let mut y = vec![0.0; n + BURN_IN];
    for t in 2..y.len() {
        y[t] = p1 * y[t - 1] + p2 * y[t - 2] + scale * rng.normal();
    }
    y.split_off(BURN_IN)
}

fn quantize(x: f64, resolution: f64) -> f64 {
    let q = math::round(x / resolution) * resolution;
    // trim binary noise so values print with at most the resolution's digits
    let decimals = if resolution >= 1.0 { 0 } else if resolution >= 0.1 { 1 } else { 2 };
    let f = math::powi(10.0, decimals);
    math::round(q * f) / f
}

/// Archetype of patient `i`: a balanced round-robin assignment.
fn archetype_of(i: usize, n_archetypes: usize) -> usize {
    i % n_archetypes
}

/// Generate a cohort from `spec`. Deterministic per spec.
pub fn generate_cohort(spec: &CohortSpec) -> Result<SyntheticCohort> {
    spec.validate()?;
    let root = Rng::new(spec.seed);
    let n = spec.steps_per_patient;
    let shared: Vec<Vec<f64>> = (0..spec.n_archetypes)
        .map(|a| ar2_path(&mut root.substream_named(&format!("archetype-{a}")), n))
        .collect();
    let digits = format!("{}", spec.n_patients - 1).len().max(3);
    let mut records = Vec::with_capacity(spec.n_patients);
    let mut archetypes = Vec::with_capacity(spec.n_patients);
    let mut loadings = Vec::with_capacity(spec.n_patients);
    for i in 0..spec.n_patients {
        let a = archetype_of(i, spec.n_archetypes);
        let profile = &ARCHETYPES[a % ARCHETYPES.len()];
        let phase = 2.0 * core::f64::consts::PI * a as f64 / spec.n_archetypes as f64;
        let mut rng = root.substream(i as u64);
        let age = math::round(rng.uniform_range(AGE_RANGE.0, AGE_RANGE.1));
        let gender = rng.below(2) as u8;
        let w = rng.uniform_range(LOADING_RANGE.0, LOADING_RANGE.1);
        let (ws, wo) = (math::sqrt(w), math::sqrt(1.0 - w));
        let (slow, white) = (math::sqrt(1.0 - WHITE_FRACTION), math::sqrt(WHITE_FRACTION));
        let own = ar2_path(&mut rng, n);
        let mut vitals = vec![[None; N_VITALS]; n];
        for (v, vital) in Vital::ALL.iter().enumerate() {
            let sc = &VITAL_SCALES[v];
            let offset = sc.offset_sd * rng.normal();
            let own_sign = if rng.below(2) == 0 { -1.0 } else { 1.0 };
            let (lo, hi) = vital.clip_range();
            for t in 0..n {
                let circ = sc.amplitude * math::sin(2.0 * core::f64::consts::PI * t as f64 / CIRCADIAN_PERIOD + phase);
                let drift = ws * profile.loading_sign[v] * shared[a][t] + wo * own_sign * own[t];
                let noise = sc.sigma * (slow * drift + white * rng.normal());
                let x = (profile.baseline[v] + offset + circ + noise).clamp(lo, hi);
                vitals[t][v] = Some(quantize(x, sc.resolution).clamp(lo, hi));
            }
        }
        if spec.missing_rate > 0.0 {
            let mut mrng = rng.substream_named("missing");
            for row in vitals.iter_mut() {
                for cell in row.iter_mut() {
                    if mrng.uniform() < spec.missing_rate {
                        *cell = None;
                    }
                }
            }
            // every vital keeps at least one reading so imputation is defined
            for v in 0..N_VITALS {
                if vitals.iter().all(|row| row[v].is_none()) {
                    vitals[0][v] = Some(profile.baseline[v]);
                }
            }
        }
        records.push(PatientRecord {
            patient_id: format!("syn-{i:0digits$}"),
            age,
            gender,
            start_minute: START_MINUTE,
            vitals,
        });
        archetypes.push(a);
        loadings.push(w);
    }
    Ok(SyntheticCohort {
        cohort: Cohort::new(records)?,
        archetypes,
        loadings,
    })
}

/// Name of archetype `a` in the table.
pub fn archetype_name(a: usize) -> String {
    String::from(ARCHETYPES[a % ARCHETYPES.len()].name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, missing: f64, seed: u64) -> CohortSpec {
        CohortSpec {
            n_patients: n,
            steps_per_patient: DEFAULT_STEPS,
            n_archetypes: 3.min(n),
            missing_rate: missing,
            seed,
        }
    }

    #[test]
    fn single_patient_no_missing() {
        let s = generate_cohort(&spec(1, 0.0, 0)).unwrap();
        assert_eq!(s.cohort.len(), 1);
        let r = &s.cohort.records()[0];
        assert_eq!(r.len(), 288);
        assert_eq!(r.missing_count(), 0);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_cohort(&spec(6, 0.05, 9)).unwrap();
        let b = generate_cohort(&spec(6, 0.05, 9)).unwrap();
        assert_eq!(a, b);
        let c = generate_cohort(&spec(6, 0.05, 10)).unwrap();
        assert_ne!(a.cohort, c.cohort);
    }

    #[test]
    fn values_within_clip_ranges() {
        let s = generate_cohort(&spec(30, 0.05, 1)).unwrap();
        for r in s.cohort.records() {
            for row in &r.vitals {
                for (v, cell) in row.iter().enumerate() {
                    if let Some(x) = cell {
                        let (lo, hi) = Vital::ALL[v].clip_range();
                        assert!(*x >= lo && *x <= hi, "{x}");
                    }
                }
            }
            assert!(r.gender <= 1 && r.age >= 30.0 && r.age <= 85.0);
        }
    }

    #[test]
    fn missing_rate_roughly_respected() {
        let s = generate_cohort(&spec(20, 0.05, 2)).unwrap();
        let cells = 20 * 288 * N_VITALS;
        let missing: usize = s.cohort.records().iter().map(|r| r.missing_count()).sum();
        let rate = missing as f64 / cells as f64;
        assert!((rate - 0.05).abs() < 0.01, "{rate}");
    }

    #[test]
    fn archetypes_balanced_and_recorded() {
        let s = generate_cohort(&spec(30, 0.0, 3)).unwrap();
        for a in 0..3 {
            assert_eq!(s.archetypes.iter().filter(|&&x| x == a).count(), 10);
        }
        assert!(s.loadings.iter().all(|w| (LOADING_RANGE.0..LOADING_RANGE.1).contains(w)));
    }

    #[test]
    fn persistence_mape_for_heart_rate_in_regime() {
        let s = generate_cohort(&spec(30, 0.0, 4)).unwrap();
        let (mut sum, mut n) = (0.0, 0usize);
        for r in s.cohort.records() {
            for t in 1..r.len() {
                let (prev, cur) = (r.vitals[t - 1][0].unwrap(), r.vitals[t][0].unwrap());
                sum += (cur - prev).abs() / cur;
                n += 1;
            }
        }
        let mape = 100.0 * sum / n as f64;
        assert!((5.0..=10.0).contains(&mape), "{mape}");
    }

    #[test]
    fn spec_violations_rejected() {
        assert!(generate_cohort(&CohortSpec { n_patients: 2, n_archetypes: 3, ..CohortSpec::default() }).is_err());
        assert!(generate_cohort(&CohortSpec { n_archetypes: 0, ..CohortSpec::default() }).is_err());
        assert!(generate_cohort(&CohortSpec { missing_rate: 0.1, ..CohortSpec::default() }).is_err());
        assert!(generate_cohort(&CohortSpec { steps_per_patient: 32, ..CohortSpec::default() }).is_err());
    }

    #[test]
    fn quantize_trims_binary_noise() {
        assert_eq!(quantize(36.8149, 0.01), 36.81);
        assert_eq!(quantize(72.26, 0.1), 72.3);
    }
}
