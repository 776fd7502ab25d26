//! Representative-subset selection by mutual information.
//!
//! Every patient is scored by the sum of its estimated mutual information
//! with every other patient ([`score_cohort`]); patients are then ordered by
//! descending score, cut into `L` near-equal groups, and a proportional
//! random sample of each group forms the generator's training set
//! ([`group_and_sample`]).

mod group;
mod ksg;
mod score;

pub use group::{group_and_sample, GroupAssignment, SampledSplit};
pub use ksg::{ksg_mi, MiEstimate, JITTER_SCALE};
pub use score::{patient_mi, patient_mi_matrices, score_cohort, vitals_matrix, MiScoreTable, PairTruncation};
