use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FbcError, Result};
use crate::model::{FeatureKind, FeatureMatrix, GroupedDataset};

use super::synthetic::generate_toy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preprocess {
    /// Zero mean and unit variance per column, pooled over groups.
    #[default]
    Standardize,
    /// 1 when strictly above the pooled column median, else 0.
    BinarizeMedian,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetSource {
    Csv(PathBuf),
    Toy,
}

/// Where the data come from and how they are prepared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub source: DatasetSource,
    /// Feature columns; empty selects every column except the sensitive one.
    #[serde(default)]
    pub features: Vec<String>,
    #[serde(default)]
    pub sensitive: String,
    #[serde(default)]
    pub preprocess: Preprocess,
    /// Keep a uniform random subset of this many rows.
    #[serde(default)]
    pub subsample: Option<usize>,
    /// Hold out this many rows of each group as test data.
    #[serde(default)]
    pub test_per_group: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl DatasetSpec {
    pub fn toy(seed: u64) -> Self {
        Self {
            source: DatasetSource::Toy,
            features: Vec::new(),
            sensitive: String::new(),
            preprocess: Preprocess::Standardize,
            subsample: None,
            test_per_group: None,
            seed,
        }
    }

    pub fn csv(path: impl Into<PathBuf>, sensitive: &str, features: &[&str]) -> Self {
        Self {
            source: DatasetSource::Csv(path.into()),
            features: features.iter().map(|s| s.to_string()).collect(),
            sensitive: sensitive.to_string(),
            preprocess: Preprocess::Standardize,
            subsample: None,
            test_per_group: None,
            seed: 0,
        }
    }
}

/// Training data plus optional held-out rows per internal group.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedData {
    pub train: GroupedDataset,
    pub test: Option<Vec<FeatureMatrix>>,
}

fn is_missing(v: &str) -> bool {
    matches!(v.trim(), "" | "NA" | "na" | "NaN" | "nan" | "?" | "null")
}

/// Pooled standardization; constant columns are only centered.
pub fn standardize(x: &FeatureMatrix) -> FeatureMatrix {
    let (n, d) = (x.rows(), x.cols());
    let mut out = x.as_slice().to_vec();
    for j in 0..d {
        let mean = (0..n).map(|i| x.row(i)[j]).sum::<f64>() / n as f64;
        let var = (0..n).map(|i| (x.row(i)[j] - mean).powi(2)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        for i in 0..n {
            let v = &mut out[i * d + j];
            *v -= mean;
            if sd > 0.0 {
                *v /= sd;
            }
        }
    }
    FeatureMatrix::new(n, d, out).expect("shape preserved")
}

/// 1 where the value is strictly greater than its column median.
pub fn binarize_median(x: &FeatureMatrix) -> FeatureMatrix {
    let (n, d) = (x.rows(), x.cols());
    let mut out = vec![0.0; n * d];
    for j in 0..d {
        let mut col: Vec<f64> = (0..n).map(|i| x.row(i)[j]).collect();
        col.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 {
            col[n / 2]
        } else {
            0.5 * (col[n / 2 - 1] + col[n / 2])
        };
        for i in 0..n {
            out[i * d + j] = if x.row(i)[j] > median { 1.0 } else { 0.0 };
        }
    }
    FeatureMatrix::new(n, d, out).expect("shape preserved")
}

/// Standardizes a grouped dataset pooled over groups.
pub fn standardize_dataset(data: &GroupedDataset) -> GroupedDataset {
    let pooled = standardize(&data.pooled());
    regroup(data, &pooled, FeatureKind::Continuous)
}

fn regroup(like: &GroupedDataset, pooled: &FeatureMatrix, kind: FeatureKind) -> GroupedDataset {
    let groups: Vec<FeatureMatrix> = like
        .offsets()
        .iter()
        .zip(like.sizes())
        .map(|(&o, n)| pooled.select_rows(&(o..o + n).collect::<Vec<_>>()))
        .collect();
    // restore caller order so relabeling reproduces the same internal order
    let mut original: Vec<Option<FeatureMatrix>> = vec![None; groups.len()];
    let mut names = vec![String::new(); groups.len()];
    for (b, g) in groups.into_iter().enumerate() {
        original[like.original_group(b)] = Some(g);
        names[like.original_group(b)] = like.group_name(b).to_string();
    }
    GroupedDataset::with_names(
        original.into_iter().map(Option::unwrap).collect(),
        kind,
        names,
        like.feature_names().to_vec(),
    )
    .expect("regrouping preserves validity")
}

/// Splits pooled rows by group label into a dataset, holding out
/// `test_per_group` rows of each group when requested.
pub fn split_by_group(
    x: &FeatureMatrix,
    labels: &[String],
    kind: FeatureKind,
    feature_names: Vec<String>,
    test_per_group: Option<usize>,
    rng: &mut ChaCha8Rng,
) -> Result<LoadedData> {
    let mut by_group: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_group.entry(l.as_str()).or_default().push(i);
    }
    if by_group.len() < 2 {
        return Err(FbcError::InvalidData(format!(
            "sensitive attribute has {} distinct value(s), need at least 2",
            by_group.len()
        )));
    }
    let names: Vec<String> = by_group.keys().map(|s| s.to_string()).collect();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for idx in by_group.values() {
        match test_per_group {
            Some(t) => {
                if t >= idx.len() {
                    return Err(FbcError::InvalidData(format!(
                        "cannot hold out {t} rows from a group of {}",
                        idx.len()
                    )));
                }
                let mut held: Vec<usize> = sample(rng, idx.len(), t).into_vec();
                held.sort_unstable();
                let mut is_held = vec![false; idx.len()];
                held.iter().for_each(|&h| is_held[h] = true);
                let keep: Vec<usize> = (0..idx.len()).filter(|&k| !is_held[k]).map(|k| idx[k]).collect();
                let out: Vec<usize> = held.iter().map(|&k| idx[k]).collect();
                train.push(x.select_rows(&keep));
                test.push(x.select_rows(&out));
            }
            None => train.push(x.select_rows(idx)),
        }
    }
    let train = GroupedDataset::with_names(train, kind, names, feature_names)?;
    let test = test_per_group.map(|_| train.relabel_map().iter().map(|&b| test[b].clone()).collect());
    Ok(LoadedData { train, test })
}

/// Reads `spec` from a CSV file: drops rows whose sensitive value is
/// missing, subsamples, preprocesses pooled over groups, then splits by
/// group.
pub fn load_csv(path: &Path, spec: &DatasetSpec) -> Result<LoadedData> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| FbcError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("missing column '{name}'"),
        })
    };
    let s_col = col(&spec.sensitive)?;
    let feature_names: Vec<String> = if spec.features.is_empty() {
        header.iter().filter(|h| **h != spec.sensitive).cloned().collect()
    } else {
        spec.features.clone()
    };
    let f_cols = feature_names.iter().map(|f| col(f)).collect::<Result<Vec<_>>>()?;

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let s = rec.get(s_col).unwrap_or("");
        if is_missing(s) {
            continue;
        }
        for (&c, name) in f_cols.iter().zip(&feature_names) {
            let raw = rec.get(c).unwrap_or("");
            let v: f64 = raw.parse().map_err(|_| FbcError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("column '{name}': cannot parse '{raw}' as a number"),
            })?;
            values.push(v);
        }
        labels.push(s.to_string());
    }
    if labels.is_empty() {
        return Err(FbcError::InvalidData(format!("{}: no usable rows", path.display())));
    }
    let x = FeatureMatrix::new(labels.len(), f_cols.len(), values)?;
    prepare(x, labels, feature_names, spec)
}

fn prepare(x: FeatureMatrix, labels: Vec<String>, feature_names: Vec<String>, spec: &DatasetSpec) -> Result<LoadedData> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (x, labels) = match spec.subsample {
        Some(n) if n < labels.len() => {
            let mut idx = sample(&mut rng, labels.len(), n).into_vec();
            idx.sort_unstable();
            let l = idx.iter().map(|&i| labels[i].clone()).collect();
            (x.select_rows(&idx), l)
        }
        _ => (x, labels),
    };
    let (x, kind) = match spec.preprocess {
        Preprocess::Standardize => (standardize(&x), FeatureKind::Continuous),
        Preprocess::BinarizeMedian => (binarize_median(&x), FeatureKind::Binary),
        Preprocess::None => {
            let kind = if x.is_binary() {
                FeatureKind::Binary
            } else {
                FeatureKind::Continuous
            };
            (x, kind)
        }
    };
    split_by_group(&x, &labels, kind, feature_names, spec.test_per_group, &mut rng)
}

/// Loads whatever `spec` points at.
pub fn load_dataset(spec: &DatasetSpec) -> Result<LoadedData> {
    match &spec.source {
        DatasetSource::Csv(p) => load_csv(p, spec),
        DatasetSource::Toy => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let raw = generate_toy(&mut rng);
            let mut labels = Vec::with_capacity(raw.total());
            for b in 0..raw.n_groups() {
                labels.extend(std::iter::repeat_n(raw.group_name(b).to_string(), raw.group(b).rows()));
            }
            let names = raw.feature_names().to_vec();
            prepare(raw.pooled(), labels, names, spec)
        }
    }
}

/// Writes a dataset as CSV with a `group` column holding each row's group
/// name.
pub fn write_dataset_csv(data: &GroupedDataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let names: Vec<String> = if data.feature_names().is_empty() {
        (0..data.dim()).map(|j| format!("x{j}")).collect()
    } else {
        data.feature_names().to_vec()
    };
    let mut header = names.clone();
    header.push("group".into());
    w.write_record(&header)?;
    for b in 0..data.n_groups() {
        for row in data.group(b).iter_rows() {
            let mut rec: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            rec.push(data.group_name(b).to_string());
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}
