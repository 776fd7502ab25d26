use alloc::string::String;
use alloc::vec::Vec;

use crate::data::{PatientSeries, N_VITALS, STATIC_FEATURES};
use crate::error::{Error, Result};
use crate::micluster::ksg::ksg_mi;
use crate::numerics::{Matrix, Rng};

/// The first `n` steps of a patient's scaled time-varying vitals (n × 5).
/// Static features are left out: they are constant within a patient.
pub fn vitals_matrix(series: &PatientSeries, n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, N_VITALS);
    for t in 0..n {
        m.row_mut(t).copy_from_slice(&series.scaled.row(t)[STATIC_FEATURES..STATIC_FEATURES + N_VITALS]);
    }
    m
}

fn jitter_rng(root: &Rng, patient_id: &str) -> Rng {
    root.substream_named(patient_id)
}

/// MI between two patients from step-paired rows.
///
/// Both series are truncated to their common prefix. When `jitter` is given,
/// each patient's values are perturbed by a stream keyed on its own id, so
/// the result does not depend on argument order.
pub fn patient_mi(a: &PatientSeries, b: &PatientSeries, k: usize, jitter: Option<&Rng>) -> Result<f64> {
    let n = a.len().min(b.len());
    if n <= k {
        return Err(Error::invalid(alloc::format!(
            "patients {} and {} share only {n} steps; MI needs more than k = {k}",
            a.patient_id, b.patient_id
        )));
    }
    let (x, y) = (vitals_matrix(a, n), vitals_matrix(b, n));
    let (x, y) = match jitter {
        Some(root) => (
            perturb(&x, &mut jitter_rng(root, &a.patient_id)),
            perturb(&y, &mut jitter_rng(root, &b.patient_id)),
        ),
        None => (x, y),
    };
    Ok(ksg_mi(&x, &y, k, None)?.nats)
}

/// Like [`patient_mi`] on already-extracted vitals matrices.
pub fn patient_mi_matrices(x: &Matrix, y: &Matrix, k: usize) -> Result<f64> {
    let n = x.rows().min(y.rows());
    Ok(ksg_mi(&x.slice_rows(0, n), &y.slice_rows(0, n), k, None)?.nats)
}

fn perturb(m: &Matrix, rng: &mut Rng) -> Matrix {
    let mut out = m.clone();
    for v in out.as_mut_slice() {
        *v += super::JITTER_SCALE * rng.uniform();
    }
    out
}

/// A pair whose series had different lengths and were truncated.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTruncation {
    pub first: usize,
    pub second: usize,
    pub used_steps: usize,
}

/// Pairwise MI and per-patient scores `J_i = Σ_{j≠i} I_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct MiScoreTable {
    pub patient_ids: Vec<String>,
    /// Symmetric, zero diagonal.
    pub mi: Matrix,
    pub scores: Vec<f64>,
    pub truncations: Vec<PairTruncation>,
}

impl MiScoreTable {
    /// Build from a symmetric pairwise matrix (the diagonal is ignored and
    /// stored as zero).
    pub fn from_pairwise(patient_ids: Vec<String>, mut mi: Matrix) -> Result<Self> {
        let n = patient_ids.len();
        if mi.shape() != (n, n) {
            return Err(Error::shape("MiScoreTable matrix", alloc::format!("{n}x{n}"), alloc::format!("{}x{}", mi.rows(), mi.cols())));
        }
        if !mi.is_symmetric(1e-9) {
            return Err(Error::invalid("pairwise MI matrix must be symmetric"));
        }
        for i in 0..n {
            mi.set(i, i, 0.0);
        }
        let scores = (0..n).map(|i| (0..n).filter(|&j| j != i).map(|j| mi.get(i, j)).sum()).collect();
        Ok(Self {
            patient_ids,
            mi,
            scores,
            truncations: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.patient_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patient_ids.is_empty()
    }

    /// Indices ordered by descending score (lower index first on ties).
    pub fn descending_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]).then(a.cmp(&b)));
        order
    }
}

/// Score every patient; each unordered pair is estimated once.
pub fn score_cohort(series: &[PatientSeries], k: usize, jitter: Option<&Rng>) -> Result<MiScoreTable> {
    let n = series.len();
    if n < 2 {
        return Err(Error::invalid(alloc::format!("MI scoring needs at least 2 patients, got {n}")));
    }
    let mats: Vec<Matrix> = series
        .iter()
        .map(|s| {
            let m = vitals_matrix(s, s.len());
            match jitter {
                Some(root) => perturb(&m, &mut jitter_rng(root, &s.patient_id)),
                None => m,
            }
        })
        .collect();
    let mut mi = Matrix::zeros(n, n);
    let mut truncations = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let used = mats[i].rows().min(mats[j].rows());
            if used <= k {
                return Err(Error::invalid(alloc::format!(
                    "patients {} and {} share only {used} steps; MI needs more than k = {k}",
                    series[i].patient_id, series[j].patient_id
                )));
            }
            let v = patient_mi_matrices(&mats[i], &mats[j], k)?;
            mi.set(i, j, v);
            mi.set(j, i, v);
            if mats[i].rows() != mats[j].rows() {
                truncations.push(PairTruncation { first: i, second: j, used_steps: used });
            }
        }
    }
    let mut table = MiScoreTable::from_pairwise(series.iter().map(|s| s.patient_id.clone()).collect(), mi)?;
    table.truncations = truncations;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{impute_locf, MinMaxScaler};
    use crate::synthgen::{generate_cohort, CohortSpec};
    use alloc::vec;

    fn cohort_series(n: usize, seed: u64) -> (Vec<PatientSeries>, Vec<usize>) {
        let syn = generate_cohort(&CohortSpec { n_patients: n, seed, ..CohortSpec::default() }).unwrap();
        let recs: Vec<_> = syn.cohort.records().iter().map(|r| impute_locf(r).unwrap()).collect();
        let scaler = MinMaxScaler::fit(recs.iter(), "all").unwrap();
        (recs.iter().map(|r| scaler.series(r).unwrap()).collect(), syn.archetypes)
    }

    #[test]
    fn stubbed_three_patient_scores() {
        let ids = vec!["a".into(), "b".into(), "c".into()];
        let mi = Matrix::from_rows(&[&[0.0, 0.5, 0.2], &[0.5, 0.0, 0.1], &[0.2, 0.1, 0.0]]).unwrap();
        let t = MiScoreTable::from_pairwise(ids, mi).unwrap();
        let expected = [0.7, 0.6, 0.3];
        for (s, e) in t.scores.iter().zip(expected) {
            assert!((s - e).abs() < 1e-15);
        }
        assert_eq!(t.descending_order(), vec![0, 1, 2]);
    }

    #[test]
    fn two_patients_share_score() {
        let (s, _) = cohort_series(3, 1);
        let s = &s[..2];
        let t = score_cohort(&s, 3, None).unwrap();
        assert_eq!(t.scores[0], t.scores[1]);
        assert_eq!(t.scores[0], t.mi.get(0, 1));
    }

    #[test]
    fn patient_mi_symmetric_exactly() {
        let (s, _) = cohort_series(3, 2);
        let root = Rng::new(5);
        assert_eq!(patient_mi(&s[0], &s[1], 3, Some(&root)).unwrap(), patient_mi(&s[1], &s[0], 3, Some(&root)).unwrap());
        assert_eq!(patient_mi(&s[0], &s[2], 3, None).unwrap(), patient_mi(&s[2], &s[0], 3, None).unwrap());
    }

    #[test]
    fn jittered_copy_dominates_and_raises_score() {
        let (mut s, _) = cohort_series(6, 3);
        let mut rng = Rng::new(4);
        let mut copy = s[0].clone();
        copy.patient_id = "copy".into();
        for v in copy.scaled.as_mut_slice() {
            *v += 1e-3 * rng.normal();
        }
        let self_mi = patient_mi(&s[0], &copy, 3, None).unwrap();
        for other in &s[1..] {
            assert!(self_mi > patient_mi(&s[0], other, 3, None).unwrap());
        }
        let before = score_cohort(&s, 3, None).unwrap().scores[0];
        s.push(copy);
        let after = score_cohort(&s, 3, None).unwrap().scores[0];
        assert!(after > before);
    }

    #[test]
    fn archetype_structure_is_recoverable() {
        let (s, arch) = cohort_series(30, 0);
        let t = score_cohort(&s, 3, Some(&Rng::new(0))).unwrap();
        let (mut same, mut ns, mut cross, mut nc) = (0.0, 0, 0.0, 0);
        for i in 0..30 {
            for j in i + 1..30 {
                if arch[i] == arch[j] {
                    same += t.mi.get(i, j);
                    ns += 1;
                } else {
                    cross += t.mi.get(i, j);
                    nc += 1;
                }
            }
        }
        let (same, cross) = (same / ns as f64, cross / nc as f64);
        assert!(same - cross >= 0.05, "same {same} cross {cross}");
        assert!(cross < 0.1, "cross {cross}");
    }

    #[test]
    fn truncation_recorded_for_unequal_lengths() {
        let (mut s, _) = cohort_series(3, 6);
        s[1].original = s[1].original.slice_rows(0, 100);
        s[1].scaled = s[1].scaled.slice_rows(0, 100);
        let t = score_cohort(&s, 3, None).unwrap();
        assert_eq!(t.truncations.len(), 2);
        assert!(t.truncations.iter().all(|p| p.used_steps == 100));
        s[2].scaled = s[2].scaled.slice_rows(0, 3);
        s[2].original = s[2].original.slice_rows(0, 3);
        let err = score_cohort(&s, 3, None).unwrap_err();
        assert!(alloc::format!("{err}").contains(&s[2].patient_id));
    }
}
