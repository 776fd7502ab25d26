use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::numerics::Rng;

/// Patient-level split fractions. `predictive + generative` partitions the
/// training fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
    pub predictive: f64,
    pub generative: f64,
    pub seed: u64,
}

impl Default for SplitPlan {
    fn default() -> Self {
        Self {
            train: 0.6,
            validation: 0.2,
            test: 0.2,
            predictive: 0.4,
            generative: 0.2,
            seed: 0,
        }
    }
}

impl SplitPlan {
    pub fn validate(&self) -> Result<()> {
        let fr = [self.train, self.validation, self.test, self.predictive, self.generative];
        if fr.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
            return Err(Error::invalid("split fractions must lie in (0, 1)"));
        }
        if math::abs(self.train + self.validation + self.test - 1.0) > 1e-9 {
            return Err(Error::invalid("train + validation + test must equal 1"));
        }
        if math::abs(self.predictive + self.generative - self.train) > 1e-9 {
            return Err(Error::invalid("predictive + generative must equal train"));
        }
        Ok(())
    }
}

/// Indices into the cohort for every subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatientSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    /// Subset of `train` for the predictive models.
    pub predictive: Vec<usize>,
    /// Subset of `train` for the generative model.
    pub generative: Vec<usize>,
}

/// Apportion `n` seats by the largest-remainder method.
///
/// Each share gets `floor(n · w_i / Σw)`; leftover seats go to the largest
/// fractional parts. Ties go to the later share.
pub fn largest_remainder(n: usize, weights: &[f64]) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || !(total > 0.0) {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| n as f64 * w / total).collect();
    let mut seats: Vec<usize> = quotas.iter().map(|q| math::floor(*q + 1e-9) as usize).collect();
    let assigned: usize = seats.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    // Remainders within 1e-9 count as equal so float noise cannot break ties.
    let rem = |i: usize| {
        let r = quotas[i] - seats[i] as f64;
        math::round(r * 1e9) / 1e9
    };
    order.sort_by(|&a, &b| rem(b).partial_cmp(&rem(a)).unwrap().then(b.cmp(&a)));
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        seats[i] += 1;
    }
    seats
}

/// Shuffle patients with `plan.seed` and cut them into train/validation/test,
/// then cut train into predictive/generative.
pub fn split_patients(n_patients: usize, plan: &SplitPlan) -> Result<PatientSplit> {
    plan.validate()?;
    if n_patients < 5 {
        return Err(Error::invalid(alloc::format!("need at least 5 patients to split, got {n_patients}")));
    }
    let outer = largest_remainder(n_patients, &[plan.train, plan.validation, plan.test]);
    let inner = largest_remainder(outer[0], &[plan.predictive, plan.generative]);
    let names = ["train", "validation", "test", "predictive", "generative"];
    for (name, size) in names.iter().zip(outer.iter().chain(&inner)) {
        if *size == 0 {
            return Err(Error::invalid(alloc::format!("{name} split is empty for {n_patients} patients")));
        }
    }
    let mut rng = Rng::new(plan.seed);
    let mut order: Vec<usize> = (0..n_patients).collect();
    rng.shuffle(&mut order);
    let (train, rest) = order.split_at(outer[0]);
    let (validation, test) = rest.split_at(outer[1]);
    let (predictive, generative) = train.split_at(inner[0]);
    Ok(PatientSplit {
        train: train.to_vec(),
        validation: validation.to_vec(),
        test: test.to_vec(),
        predictive: predictive.to_vec(),
        generative: generative.to_vec(),
    })
}
