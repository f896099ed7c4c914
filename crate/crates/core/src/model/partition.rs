use std::collections::HashMap;

/// One block of a partition of the reference group, with the sufficient
/// statistics of every instance routed into it and a cached score.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster<S> {
    /// Number of reference-group (group 0) members.
    pub size: usize,
    pub stats: S,
    /// Cached log marginal likelihood (or log likelihood under the cluster
    /// parameter on the auxiliary-parameter path) of `stats`.
    pub value: f64,
}

/// Partition of `[n0]` stored as a slab of clusters plus a label per item.
///
/// Slot identifiers are internal; [`Partition::canonical_labels`] gives
/// labels numbered by first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition<S> {
    labels: Vec<usize>,
    slots: Vec<Option<Cluster<S>>>,
    free: Vec<usize>,
    active: usize,
}

impl<S> Partition<S> {
    /// All items in one cluster.
    pub fn single(n: usize, stats: S, value: f64) -> Self {
        Self {
            labels: vec![0; n],
            slots: vec![Some(Cluster {
                size: n,
                stats,
                value,
            })],
            free: Vec::new(),
            active: 1,
        }
    }

    /// Builds a partition from arbitrary labels, computing each cluster's
    /// statistics and value with the supplied closures.
    pub fn from_labels(
        raw: &[usize],
        mut stats_of: impl FnMut(&[usize]) -> S,
        mut value_of: impl FnMut(&S) -> f64,
    ) -> Self {
        let mut index: HashMap<usize, usize> = HashMap::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        let labels = raw
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let slot = *index.entry(*l).or_insert_with(|| {
                    members.push(Vec::new());
                    members.len() - 1
                });
                members[slot].push(i);
                slot
            })
            .collect();
        let slots: Vec<Option<Cluster<S>>> = members
            .iter()
            .map(|m| {
                let stats = stats_of(m);
                let value = value_of(&stats);
                Some(Cluster {
                    size: m.len(),
                    stats,
                    value,
                })
            })
            .collect();
        let active = slots.len();
        Self {
            labels,
            slots,
            free: Vec::new(),
            active,
        }
    }

    pub fn n_items(&self) -> usize {
        self.labels.len()
    }

    /// Number of non-empty clusters `t`.
    pub fn n_clusters(&self) -> usize {
        self.active
    }

    #[inline]
    pub fn slot_of(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn slot_labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn cluster(&self, slot: usize) -> &Cluster<S> {
        self.slots[slot].as_ref().expect("active slot")
    }

    #[inline]
    pub fn cluster_mut(&mut self, slot: usize) -> &mut Cluster<S> {
        self.slots[slot].as_mut().expect("active slot")
    }

    pub fn slot_capacity(&self) -> usize {
        self.slots.len()
    }

    /// Active slot ids in increasing order.
    pub fn active_slots(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(s, c)| c.as_ref().map(|_| s))
    }

    pub fn clusters_iter(&self) -> impl Iterator<Item = (usize, &Cluster<S>)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(s, c)| c.as_ref().map(|c| (s, c)))
    }

    /// Opens a new cluster and returns its slot.
    pub fn open(&mut self, cluster: Cluster<S>) -> usize {
        self.active += 1;
        if let Some(s) = self.free.pop() {
            self.slots[s] = Some(cluster);
            s
        } else {
            self.slots.push(Some(cluster));
            self.slots.len() - 1
        }
    }

    /// Removes a cluster; its items must already have been relabeled.
    pub fn close(&mut self, slot: usize) -> Cluster<S> {
        let c = self.slots[slot].take().expect("active slot");
        self.active -= 1;
        self.free.push(slot);
        c
    }

    pub fn set_slot(&mut self, i: usize, slot: usize) {
        self.labels[i] = slot;
    }

    /// Labels numbered by first appearance.
    pub fn canonical_labels(&self) -> Vec<usize> {
        let mut map = vec![usize::MAX; self.slots.len()];
        let mut next = 0;
        self.labels
            .iter()
            .map(|&s| {
                if map[s] == usize::MAX {
                    map[s] = next;
                    next += 1;
                }
                map[s]
            })
            .collect()
    }

    /// Member index sets, ordered by first appearance.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); self.active];
        for (i, l) in self.canonical_labels().into_iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    /// Sum of the cached cluster values.
    pub fn total_value(&self) -> f64 {
        self.clusters_iter().map(|(_, c)| c.value).sum()
    }

    /// Checks that labels point to active slots and that sizes agree.
    pub fn is_consistent(&self) -> bool {
        let mut counts = vec![0usize; self.slots.len()];
        for &s in &self.labels {
            if s >= self.slots.len() || self.slots[s].is_none() {
                return false;
            }
            counts[s] += 1;
        }
        let active = self.slots.iter().filter(|c| c.is_some()).count();
        active == self.active
            && self
                .slots
                .iter()
                .zip(&counts)
                .all(|(c, &n)| c.as_ref().map_or(n == 0, |c| c.size == n && n > 0))
    }
}
