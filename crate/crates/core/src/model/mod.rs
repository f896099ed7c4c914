//! Domain types: grouped data, assignments, matching maps, partitions and
//! the group-fairness measures.

mod assignment;
mod dataset;
mod fairness;
mod matching;
mod partition;

pub use assignment::Assignment;
pub use dataset::{FeatureKind, FeatureMatrix, GroupedDataset};
pub use fairness::{balance, delta_fairness};
pub use matching::{
    validate_matching, GroupMatching, GroupMatchingRecord, MaskSet, MatchingState,
    MatchingViolation,
};
pub use partition::{Cluster, Partition};

/// Cluster labels for every group induced by a reference-group partition and
/// the matching maps: group-0 instance `i` gets the label of its cluster and
/// group-`b` instance `j` inherits the label of the reference instance it is
/// routed to.
pub fn assignments_from<S>(partition: &Partition<S>, matching: &MatchingState) -> Assignment {
    assignments_from_labels(partition.slot_labels(), matching)
}

/// As [`assignments_from`], starting from raw reference-group labels.
pub fn assignments_from_labels(reference: &[usize], matching: &MatchingState) -> Assignment {
    let mut raw = Vec::with_capacity(matching.groups().len() + 1);
    raw.push(reference.to_vec());
    for g in matching.groups() {
        raw.push((0..g.nb()).map(|j| reference[g.route(j)]).collect());
    }
    Assignment::canonical(&raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zb(v: &[usize]) -> Vec<usize> {
        v.iter().map(|x| x - 1).collect()
    }

    #[test]
    fn two_group_worked_example() {
        let t = zb(&[3, 4, 1, 2]);
        let m = MatchingState::new(vec![GroupMatching::new(4, t.clone(), t, &[], vec![])]);
        let a = assignments_from_labels(&[0, 0, 1, 1], &m);
        assert_eq!(a.group(1), &zb(&[2, 2, 1, 1])[..]);
        assert_eq!(delta_fairness(&[4, 4], &a).unwrap(), 0.0);
    }

    #[test]
    fn full_mask_with_identical_maps_changes_nothing() {
        let t = zb(&[3, 4, 1, 2]);
        let plain = MatchingState::new(vec![GroupMatching::new(4, t.clone(), t.clone(), &[], vec![])]);
        let masked = MatchingState::new(vec![GroupMatching::new(4, t.clone(), t, &[0, 1, 2, 3], vec![])]);
        let labels = [0, 0, 1, 1];
        assert_eq!(
            assignments_from_labels(&labels, &plain),
            assignments_from_labels(&labels, &masked)
        );
    }

    #[test]
    fn identity_singletons_fair() {
        let m = MatchingState::new(vec![GroupMatching::new(2, vec![0, 1], vec![0, 1], &[], vec![])]);
        let a = assignments_from_labels(&[0, 1], &m);
        assert_eq!(a.group(1), &[0, 1]);
        assert_eq!(delta_fairness(&[2, 2], &a).unwrap(), 0.0);
    }

    #[test]
    fn labels_are_canonical_under_relabeling() {
        let t = zb(&[2, 1, 3]);
        let m = MatchingState::new(vec![GroupMatching::new(3, t.clone(), t, &[], vec![])]);
        let a = assignments_from_labels(&[5, 5, 2], &m);
        let b = assignments_from_labels(&[0, 0, 9], &m);
        assert_eq!(a, b);
        assert_eq!(a.group(0), &[0, 0, 1]);
    }
}
