//! Matching maps between each non-reference group and group 0.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Subset `E` of a group's indices with O(1) membership tests and O(1)
/// member/non-member swaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskSet {
    member: Vec<bool>,
    inside: Vec<usize>,
    outside: Vec<usize>,
    // position of each index inside `inside` or `outside`
    pos: Vec<usize>,
}

impl MaskSet {
    pub fn new(n: usize, members: &[usize]) -> Self {
        let mut member = vec![false; n];
        for &j in members {
            member[j] = true;
        }
        let mut inside = Vec::new();
        let mut outside = Vec::new();
        let mut pos = vec![0; n];
        for (j, &m) in member.iter().enumerate() {
            if m {
                pos[j] = inside.len();
                inside.push(j);
            } else {
                pos[j] = outside.len();
                outside.push(j);
            }
        }
        Self {
            member,
            inside,
            outside,
            pos,
        }
    }

    #[inline]
    pub fn contains(&self, j: usize) -> bool {
        self.member[j]
    }

    pub fn len(&self) -> usize {
        self.inside.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inside.is_empty()
    }

    pub fn universe(&self) -> usize {
        self.member.len()
    }

    pub fn members(&self) -> &[usize] {
        &self.inside
    }

    pub fn non_members(&self) -> &[usize] {
        &self.outside
    }

    /// Sorted copy of the members.
    pub fn sorted_members(&self) -> Vec<usize> {
        let mut v = self.inside.clone();
        v.sort_unstable();
        v
    }

    /// Moves `leaving` out of the set and `entering` into it.
    pub fn swap(&mut self, leaving: usize, entering: usize) {
        debug_assert!(self.member[leaving] && !self.member[entering]);
        let pl = self.pos[leaving];
        let pe = self.pos[entering];
        self.inside[pl] = entering;
        self.outside[pe] = leaving;
        self.pos[entering] = pl;
        self.pos[leaving] = pe;
        self.member[leaving] = false;
        self.member[entering] = true;
    }
}

/// `(T, T0, E, R)` for one non-reference group of size `n_b = beta * n_0 + r`.
///
/// Index `j` of the group is routed to reference instance `T0[j]` when
/// `j ∈ E`, and to `T[j]` otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupMatching {
    n0: usize,
    t_map: Vec<usize>,
    t0_map: Vec<usize>,
    mask: MaskSet,
    residual: Vec<usize>,
}

impl GroupMatching {
    pub fn new(
        n0: usize,
        t_map: Vec<usize>,
        t0_map: Vec<usize>,
        mask: &[usize],
        residual: Vec<usize>,
    ) -> Self {
        let nb = t_map.len();
        let mut residual = residual;
        residual.sort_unstable();
        Self {
            n0,
            mask: MaskSet::new(nb, mask),
            t_map,
            t0_map,
            residual,
        }
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn nb(&self) -> usize {
        self.t_map.len()
    }

    pub fn beta(&self) -> usize {
        self.nb().checked_div(self.n0).unwrap_or(0)
    }

    pub fn r(&self) -> usize {
        if self.n0 == 0 {
            0
        } else {
            self.nb() % self.n0
        }
    }

    pub fn t_map(&self) -> &[usize] {
        &self.t_map
    }

    pub fn t0_map(&self) -> &[usize] {
        &self.t0_map
    }

    pub fn mask(&self) -> &MaskSet {
        &self.mask
    }

    pub fn residual(&self) -> &[usize] {
        &self.residual
    }

    /// Reference instance that `j` is currently routed to.
    #[inline]
    pub fn route(&self, j: usize) -> usize {
        if self.mask.contains(j) {
            self.t0_map[j]
        } else {
            self.t_map[j]
        }
    }

    pub fn swap_t(&mut self, i1: usize, i2: usize) {
        self.t_map.swap(i1, i2);
    }

    pub fn set_t0(&mut self, j: usize, target: usize) {
        self.t0_map[j] = target;
    }

    pub fn swap_mask(&mut self, leaving: usize, entering: usize) {
        self.mask.swap(leaving, entering);
    }

    pub fn record(&self) -> GroupMatchingRecord {
        GroupMatchingRecord {
            map: self.t_map.clone(),
            fallback_map: self.t0_map.clone(),
            mask: self.mask.sorted_members(),
            residual: self.residual.clone(),
        }
    }

    pub fn from_record(n0: usize, rec: &GroupMatchingRecord) -> Self {
        Self::new(
            n0,
            rec.map.clone(),
            rec.fallback_map.clone(),
            &rec.mask,
            rec.residual.clone(),
        )
    }
}

/// Serializable form of [`GroupMatching`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupMatchingRecord {
    /// Constrained matching map.
    pub map: Vec<usize>,
    /// Unconstrained map used by masked instances.
    pub fallback_map: Vec<usize>,
    /// Masked positions, sorted.
    pub mask: Vec<usize>,
    pub residual: Vec<usize>,
}

/// Matchings for every non-reference group (star topology around group 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingState {
    groups: Vec<GroupMatching>,
}

impl MatchingState {
    pub fn new(groups: Vec<GroupMatching>) -> Self {
        Self { groups }
    }

    /// Matchings for internal groups `1..B`; entry `b - 1` is group `b`.
    pub fn groups(&self) -> &[GroupMatching] {
        &self.groups
    }

    pub fn group(&self, b: usize) -> &GroupMatching {
        &self.groups[b - 1]
    }

    pub(crate) fn group_mut(&mut self, b: usize) -> &mut GroupMatching {
        &mut self.groups[b - 1]
    }

    /// Stable hex digest of `(T, T0, E)` for every group.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for g in &self.groups {
            for part in [&g.t_map[..], &g.t0_map[..], &g.mask.sorted_members()[..]] {
                h.update((part.len() as u64).to_le_bytes());
                for &v in part {
                    h.update((v as u64).to_le_bytes());
                }
            }
        }
        hex::encode(&h.finalize()[..16])
    }

    pub fn records(&self) -> Vec<GroupMatchingRecord> {
        self.groups.iter().map(GroupMatching::record).collect()
    }

    pub fn from_records(n0: usize, recs: &[GroupMatchingRecord]) -> Self {
        Self::new(
            recs.iter()
                .map(|r| GroupMatching::from_record(n0, r))
                .collect(),
        )
    }

    /// Validates every group against the group sizes (`sizes[0]` is `n_0`).
    pub fn validate(&self, sizes: &[usize]) -> Result<(), MatchingViolation> {
        if sizes.len() != self.groups.len() + 1 {
            return Err(MatchingViolation::GroupCount {
                expected: sizes.len().saturating_sub(1),
                found: self.groups.len(),
            });
        }
        for (k, g) in self.groups.iter().enumerate() {
            validate_matching(g, sizes[0], sizes[k + 1]).map_err(|v| v.in_group(k + 1))?;
        }
        Ok(())
    }
}

/// First violated matching condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchingViolation {
    GroupCount { expected: usize, found: usize },
    SizeMismatch { expected: usize, found: usize },
    SmallerThanReference { n0: usize, nb: usize },
    OutOfRange { index: usize, target: usize },
    NotOnto { unmatched: usize },
    PreimageSize { target: usize, size: usize },
    ResidualMismatch { expected: Vec<usize>, found: Vec<usize> },
    MaskInconsistent,
    InGroup { group: usize, violation: Box<MatchingViolation> },
}

impl MatchingViolation {
    fn in_group(self, group: usize) -> Self {
        MatchingViolation::InGroup {
            group,
            violation: Box::new(self),
        }
    }
}

impl fmt::Display for MatchingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use MatchingViolation::*;
        match self {
            GroupCount { expected, found } => {
                write!(f, "expected {expected} group matchings, found {found}")
            }
            SizeMismatch { expected, found } => {
                write!(f, "map length {found}, expected {expected}")
            }
            SmallerThanReference { n0, nb } => {
                write!(f, "group of size {nb} is smaller than reference {n0}")
            }
            OutOfRange { index, target } => write!(f, "index {index} maps to {target}, out of range"),
            NotOnto { unmatched } => write!(f, "not onto: reference {unmatched} has no preimage"),
            PreimageSize { target, size } => {
                write!(f, "reference {target} has {size} preimages")
            }
            ResidualMismatch { .. } => write!(f, "residual set differs from the (beta+1)-preimage set"),
            MaskInconsistent => write!(f, "mask set bookkeeping is inconsistent"),
            InGroup { group, violation } => write!(f, "group {group}: {violation}"),
        }
    }
}

impl std::error::Error for MatchingViolation {}

/// Checks that `T` is onto `[n0]` with preimages of size `beta` or `beta+1`,
/// that the `(beta+1)` targets are exactly `R`, that `T0` stays in range and
/// that the mask set is well formed.
pub fn validate_matching(
    m: &GroupMatching,
    n0: usize,
    nb: usize,
) -> Result<(), MatchingViolation> {
    use MatchingViolation::*;
    if m.n0 != n0 {
        return Err(SizeMismatch {
            expected: n0,
            found: m.n0,
        });
    }
    if m.t_map.len() != nb || m.t0_map.len() != nb || m.mask.universe() != nb {
        return Err(SizeMismatch {
            expected: nb,
            found: m.t_map.len(),
        });
    }
    if nb < n0 || n0 == 0 {
        return Err(SmallerThanReference { n0, nb });
    }
    let beta = nb / n0;
    let mut pre = vec![0usize; n0];
    for (j, &i) in m.t_map.iter().enumerate() {
        if i >= n0 {
            return Err(OutOfRange {
                index: j,
                target: i,
            });
        }
        pre[i] += 1;
    }
    if let Some(i) = pre.iter().position(|&c| c == 0) {
        return Err(NotOnto { unmatched: i });
    }
    if let Some(i) = pre.iter().position(|&c| c != beta && c != beta + 1) {
        return Err(PreimageSize {
            target: i,
            size: pre[i],
        });
    }
    let found: Vec<usize> = (0..n0).filter(|&i| pre[i] == beta + 1).collect();
    if found != m.residual {
        return Err(ResidualMismatch {
            expected: m.residual.clone(),
            found,
        });
    }
    if let Some(j) = m.t0_map.iter().position(|&i| i >= n0) {
        return Err(OutOfRange {
            index: j,
            target: m.t0_map[j],
        });
    }
    let mk = &m.mask;
    let flagged = mk.member.iter().filter(|&&b| b).count();
    if flagged != mk.inside.len()
        || mk.inside.len() + mk.outside.len() != nb
        || mk.inside.iter().any(|&j| !mk.member[j])
        || mk.outside.iter().any(|&j| mk.member[j])
    {
        return Err(MaskInconsistent);
    }
    Ok(())
}
