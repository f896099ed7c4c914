use serde::{Deserialize, Serialize};

use crate::error::{FbcError, Result};

/// Dense row-major matrix of instances (rows) by features (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(FbcError::dim(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(FbcError::dim(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Stacks matrices vertically; all must share the column count.
    pub fn vstack<'a>(parts: impl IntoIterator<Item = &'a FeatureMatrix>) -> Result<Self> {
        let mut rows = 0;
        let mut cols = None;
        let mut data = Vec::new();
        for m in parts {
            match cols {
                None => cols = Some(m.cols),
                Some(c) if c != m.cols => {
                    return Err(FbcError::dim(format!(
                        "cannot stack {} columns onto {c}",
                        m.cols
                    )))
                }
                _ => {}
            }
            rows += m.rows;
            data.extend_from_slice(&m.data);
        }
        Ok(Self {
            rows,
            cols: cols.unwrap_or(0),
            data,
        })
    }

    /// Returns the rows selected by `idx`, in that order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    Continuous,
    Binary,
}

/// Instances split by sensitive group.
///
/// Groups are stored smallest first: internal group 0 always has the fewest
/// instances, which is the reference group every matching map points into.
/// `relabel_map[b]` gives the caller's original index for internal group `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedDataset {
    groups: Vec<FeatureMatrix>,
    kind: FeatureKind,
    relabel_map: Vec<usize>,
    group_names: Vec<String>,
    feature_names: Vec<String>,
}

impl GroupedDataset {
    /// Builds a dataset from groups given in their original order.
    pub fn new(groups: Vec<FeatureMatrix>, kind: FeatureKind) -> Result<Self> {
        let names = (0..groups.len()).map(|b| b.to_string()).collect();
        Self::with_names(groups, kind, names, Vec::new())
    }

    pub fn with_names(
        groups: Vec<FeatureMatrix>,
        kind: FeatureKind,
        group_names: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if groups.len() < 2 {
            return Err(FbcError::invalid(format!(
                "need at least 2 sensitive groups, got {}",
                groups.len()
            )));
        }
        if group_names.len() != groups.len() {
            return Err(FbcError::dim("one name per group required"));
        }
        let d = groups[0].cols();
        for (b, g) in groups.iter().enumerate() {
            if g.rows() == 0 {
                return Err(FbcError::InvalidData(format!(
                    "group '{}' is empty",
                    group_names[b]
                )));
            }
            if g.cols() != d {
                return Err(FbcError::dim(format!(
                    "group '{}' has {} features, expected {d}",
                    group_names[b],
                    g.cols()
                )));
            }
            if kind == FeatureKind::Binary && !g.is_binary() {
                return Err(FbcError::InvalidData(format!(
                    "group '{}' contains non-binary values",
                    group_names[b]
                )));
            }
        }
        if !feature_names.is_empty() && feature_names.len() != d {
            return Err(FbcError::dim("one name per feature required"));
        }

        let mut order: Vec<usize> = (0..groups.len()).collect();
        order.sort_by_key(|&b| (groups[b].rows(), b));
        let mut slots: Vec<Option<FeatureMatrix>> = groups.into_iter().map(Some).collect();
        let groups = order.iter().map(|&b| slots[b].take().unwrap()).collect();
        let group_names = order.iter().map(|&b| group_names[b].clone()).collect();
        Ok(Self {
            groups,
            kind,
            relabel_map: order,
            group_names,
            feature_names,
        })
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, b: usize) -> &FeatureMatrix {
        &self.groups[b]
    }

    pub fn groups(&self) -> &[FeatureMatrix] {
        &self.groups
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(FeatureMatrix::rows).collect()
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(FeatureMatrix::rows).sum()
    }

    pub fn dim(&self) -> usize {
        self.groups[0].cols()
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    /// Original (caller-facing) index of internal group `b`.
    pub fn original_group(&self, b: usize) -> usize {
        self.relabel_map[b]
    }

    pub fn relabel_map(&self) -> &[usize] {
        &self.relabel_map
    }

    pub fn group_name(&self, b: usize) -> &str {
        &self.group_names[b]
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// All instances stacked in internal group order.
    pub fn pooled(&self) -> FeatureMatrix {
        FeatureMatrix::vstack(&self.groups).expect("groups share a column count")
    }

    /// Offset of each internal group within [`pooled`](Self::pooled).
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.groups
            .iter()
            .map(|g| {
                let o = acc;
                acc += g.rows();
                o
            })
            .collect()
    }
}
