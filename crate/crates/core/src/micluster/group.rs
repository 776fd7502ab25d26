use alloc::vec::Vec;

use crate::data::largest_remainder;
use crate::error::{Error, Result};
use crate::math;
use crate::micluster::MiScoreTable;
use crate::numerics::Rng;

/// Score-ordered groups of patient indices (into the score table).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAssignment {
    /// Each group lists members by descending score; group 0 scores highest.
    pub groups: Vec<Vec<usize>>,
    /// Group label per patient index.
    pub labels: Vec<usize>,
}

/// Outcome of proportional sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSplit {
    pub assignment: GroupAssignment,
    /// Per-group sample counts.
    pub quotas: Vec<usize>,
    /// Indices sampled for the generative set, ascending.
    pub generative: Vec<usize>,
    /// The remaining indices, ascending.
    pub predictive: Vec<usize>,
}

/// Sort by descending score, cut into `l` contiguous groups whose sizes
/// differ by at most one (earlier groups take the remainder), then sample
/// uniformly without replacement from each group.
///
/// The overall sample size is `round(g_fraction · n)`; it is apportioned to
/// groups by largest remainder on group size, so every group contributes
/// `g_fraction · size` rounded and the total is exact.
pub fn group_and_sample(table: &MiScoreTable, l: usize, g_fraction: f64, rng: &mut Rng) -> Result<SampledSplit> {
    let n = table.len();
    if !(g_fraction > 0.0 && g_fraction < 1.0) {
        return Err(Error::invalid(alloc::format!("g_fraction must lie in (0, 1), got {g_fraction}")));
    }
    if l == 0 || n < l {
        return Err(Error::invalid(alloc::format!("need at least L = {l} ≥ 1 patients for grouping, got {n}")));
    }
    let order = table.descending_order();
    let (base, extra) = (n / l, n % l);
    let mut groups = Vec::with_capacity(l);
    let mut labels = alloc::vec![0; n];
    let mut at = 0;
    for g in 0..l {
        let size = base + usize::from(g < extra);
        let members = order[at..at + size].to_vec();
        for &i in &members {
            labels[i] = g;
        }
        groups.push(members);
        at += size;
    }
    let total = math::round(g_fraction * n as f64) as usize;
    if total == 0 || total == n {
        return Err(Error::invalid(alloc::format!(
            "g_fraction {g_fraction} of {n} patients leaves one side empty"
        )));
    }
    let sizes: Vec<f64> = groups.iter().map(|g| g.len() as f64).collect();
    let quotas = largest_remainder(total, &sizes);
    let mut generative = Vec::with_capacity(total);
    for (members, &q) in groups.iter().zip(&quotas) {
        let mut pool = members.clone();
        rng.shuffle(&mut pool);
        generative.extend_from_slice(&pool[..q]);
    }
    generative.sort_unstable();
    let predictive = (0..n).filter(|i| generative.binary_search(i).is_err()).collect();
    Ok(SampledSplit {
        assignment: GroupAssignment { groups, labels },
        quotas,
        generative,
        predictive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Matrix;
    use alloc::string::String;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, prop_assume, proptest};

    fn table(scores: &[f64]) -> MiScoreTable {
        let n = scores.len();
        let ids: Vec<String> = (0..n).map(|i| alloc::format!("p{i}")).collect();
        let mut t = MiScoreTable::from_pairwise(ids, Matrix::zeros(n, n)).unwrap();
        t.scores = scores.to_vec();
        t
    }

    #[test]
    fn thirty_patients_ten_groups_one_third() {
        let scores: Vec<f64> = (0..30).map(|i| (i * 7 % 30) as f64).collect();
        let s = group_and_sample(&table(&scores), 10, 1.0 / 3.0, &mut Rng::new(1)).unwrap();
        assert!(s.assignment.groups.iter().all(|g| g.len() == 3));
        assert_eq!(s.quotas, alloc::vec![1; 10]);
        assert_eq!((s.generative.len(), s.predictive.len()), (10, 20));
        for g in &s.assignment.groups {
            assert_eq!(g.iter().filter(|i| s.generative.contains(i)).count(), 1);
        }
    }

    #[test]
    fn single_group_is_plain_sampling() {
        let s = group_and_sample(&table(&[3.0, 1.0, 2.0, 5.0, 4.0]), 1, 0.4, &mut Rng::new(2)).unwrap();
        assert_eq!(s.assignment.groups, alloc::vec![alloc::vec![3, 4, 0, 2, 1]]);
        assert_eq!(s.generative.len(), 2);
    }

    #[test]
    fn deterministic_per_seed() {
        let t = table(&(0..24).map(|i| i as f64).collect::<Vec<_>>());
        let a = group_and_sample(&t, 10, 1.0 / 3.0, &mut Rng::new(3)).unwrap();
        let b = group_and_sample(&t, 10, 1.0 / 3.0, &mut Rng::new(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_arguments() {
        let t = table(&[1.0, 2.0, 3.0]);
        assert!(group_and_sample(&t, 2, 0.0, &mut Rng::new(0)).is_err());
        assert!(group_and_sample(&t, 2, 1.0, &mut Rng::new(0)).is_err());
        assert!(group_and_sample(&t, 4, 0.5, &mut Rng::new(0)).is_err());
        assert!(group_and_sample(&t, 0, 0.5, &mut Rng::new(0)).is_err());
    }

    proptest! {
        #[test]
        fn partition_and_order_invariants(n in 1usize..80, l in 1usize..12, g in 0.05f64..0.95, seed in any::<u64>()) {
            prop_assume!(n >= l);
            let mut rng = Rng::new(seed);
            let scores: Vec<f64> = rng.uniform_vec(n);
            let t = table(&scores);
            match group_and_sample(&t, l, g, &mut Rng::new(seed)) {
                Ok(s) => {
                    let sizes: Vec<usize> = s.assignment.groups.iter().map(Vec::len).collect();
                    prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
                    let concat: Vec<usize> = s.assignment.groups.concat();
                    prop_assert_eq!(concat, t.descending_order());
                    let mut all = s.generative.clone();
                    all.extend_from_slice(&s.predictive);
                    all.sort_unstable();
                    prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                    prop_assert_eq!(s.generative.len(), math::round(g * n as f64) as usize);
                    for (members, &q) in s.assignment.groups.iter().zip(&s.quotas) {
                        prop_assert!(q <= members.len());
                    }
                }
                Err(_) => {
                    let total = math::round(g * n as f64) as usize;
                    prop_assert!(total == 0 || total == n);
                }
            }
        }
    }
}
