use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::harness::RecordingMeta;
use crate::scalar::Float;

/// Labelled feature matrix, one row per chunk.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<F = f64> {
    pub x: Vec<Vec<F>>,
    pub y: Vec<usize>,
    pub label_names: Vec<String>,
    /// Per-row recording metadata, when rows come from a manifest.
    pub meta: Option<Vec<RecordingMeta>>,
    /// Per-row source file index; rows sharing a group are split together.
    pub groups: Option<Vec<usize>>,
}

impl<F: Float> Dataset<F> {
    pub fn new(x: Vec<Vec<F>>, y: Vec<usize>, label_names: Vec<String>) -> Result<Self> {
        let ds = Self {
            x,
            y,
            label_names,
            meta: None,
            groups: None,
        };
        ds.check()?;
        Ok(ds)
    }

    pub fn check(&self) -> Result<()> {
        if self.x.len() != self.y.len() {
            return Err(Error::Shape(format!("{} rows but {} labels", self.x.len(), self.y.len())));
        }
        if let Some(d) = self.x.first().map(Vec::len) {
            if self.x.iter().any(|r| r.len() != d) {
                return Err(Error::Shape("ragged feature rows".into()));
            }
        }
        if let Some(&bad) = self.y.iter().find(|&&c| c >= self.label_names.len()) {
            return Err(Error::Label(format!("class index {bad}")));
        }
        if self.meta.as_ref().is_some_and(|m| m.len() != self.x.len())
            || self.groups.as_ref().is_some_and(|g| g.len() != self.x.len())
        {
            return Err(Error::Shape("per-row metadata length mismatch".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_classes()];
        for &y in &self.y {
            c[y] += 1;
        }
        c
    }

    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            x: rows.iter().map(|&i| self.x[i].clone()).collect(),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            label_names: self.label_names.clone(),
            meta: self.meta.as_ref().map(|m| rows.iter().map(|&i| m[i].clone()).collect()),
            groups: self.groups.as_ref().map(|g| rows.iter().map(|&i| g[i]).collect()),
        }
    }

    /// Rows whose metadata satisfies `keep`; rows without metadata are dropped.
    pub fn filter_meta(&self, keep: impl Fn(&RecordingMeta) -> bool) -> Self {
        let rows: Vec<usize> = match &self.meta {
            Some(m) => (0..self.len()).filter(|&i| keep(&m[i])).collect(),
            None => Vec::new(),
        };
        self.subset(&rows)
    }

    pub fn map_x(&self, f: impl Fn(&[F]) -> Vec<F>) -> Self {
        Self {
            x: self.x.iter().map(|r| f(r)).collect(),
            ..self.clone()
        }
    }
}

/// Per-feature min/max from a training split.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalerParams<F = f64> {
    pub min: Vec<F>,
    pub max: Vec<F>,
}

impl<F: Float> ScalerParams<F> {
    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// `(x - min) / (max - min)`, constant features map to 0. No clamping.
    pub fn apply_row(&self, row: &[F]) -> Vec<F> {
        row.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| if hi > lo { (v - lo) / (hi - lo) } else { F::zero() })
            .collect()
    }
}

pub fn minmax_fit<F: Float>(x: &[Vec<F>]) -> Result<ScalerParams<F>> {
    let first = x.first().ok_or(Error::EmptyDataset)?;
    let mut min = first.clone();
    let mut max = first.clone();
    for row in &x[1..] {
        for (j, &v) in row.iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    Ok(ScalerParams { min, max })
}

pub fn minmax_apply<F: Float>(params: &ScalerParams<F>, x: &[Vec<F>]) -> Result<Vec<Vec<F>>> {
    x.iter()
        .map(|row| {
            if row.len() != params.dim() {
                return Err(Error::Shape(format!(
                    "scaler fitted on {} features, row has {}",
                    params.dim(),
                    row.len()
                )));
            }
            Ok(params.apply_row(row))
        })
        .collect()
}

/// Stratified partition of item indices: per class, `round(fraction * count)`
/// items (at least 1, at most `count - 1`) go to validation.
pub fn stratified_indices(
    labels: &[usize],
    n_classes: usize,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidConfig(format!("validation fraction {fraction}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut val = Vec::new();
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < 2 {
            return Err(Error::Stratify(format!(
                "class {class} has {} item(s), need at least 2",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        let n_val = ((fraction * members.len() as f64).round() as usize).clamp(1, members.len() - 1);
        val.extend_from_slice(&members[..n_val]);
        train.extend_from_slice(&members[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    Ok((train, val))
}

/// Row-level stratified split into (train, validation).
pub fn stratified_split<F: Float>(
    dataset: &Dataset<F>,
    fraction: f64,
    seed: u64,
) -> Result<(Dataset<F>, Dataset<F>)> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (train, val) = stratified_indices(&dataset.y, dataset.n_classes(), fraction, seed)?;
    Ok((dataset.subset(&train), dataset.subset(&val)))
}

/// Splits whole groups (source files), stratified by each group's label,
/// then expands back to rows.
pub fn stratified_group_split<F: Float>(
    dataset: &Dataset<F>,
    fraction: f64,
    seed: u64,
) -> Result<(Dataset<F>, Dataset<F>)> {
    let Some(groups) = &dataset.groups else {
        return stratified_split(dataset, fraction, seed);
    };
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut ids: Vec<usize> = groups.clone();
    ids.sort_unstable();
    ids.dedup();
    let group_labels: Vec<usize> = ids
        .iter()
        .map(|g| dataset.y[groups.iter().position(|x| x == g).unwrap()])
        .collect();
    let (_, val_g) = stratified_indices(&group_labels, dataset.n_classes(), fraction, seed)?;
    let in_val: std::collections::HashSet<usize> = val_g.iter().map(|&i| ids[i]).collect();
    let (val_rows, train_rows): (Vec<usize>, Vec<usize>) =
        (0..dataset.len()).partition(|&i| in_val.contains(&groups[i]));
    Ok((dataset.subset(&train_rows), dataset.subset(&val_rows)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(counts: &[usize]) -> Dataset {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (c, &n) in counts.iter().enumerate() {
            for i in 0..n {
                x.push(vec![i as f64, c as f64]);
                y.push(c);
            }
        }
        let names = (0..counts.len()).map(|c| format!("c{c}")).collect();
        Dataset::new(x, y, names).unwrap()
    }

    #[test]
    fn minmax_basic() {
        let p = minmax_fit(&[vec![2.0, 5.0], vec![4.0, 5.0]]).unwrap();
        assert_eq!(p.min, vec![2.0, 5.0]);
        assert_eq!(p.max, vec![4.0, 5.0]);
        assert_eq!(p.apply_row(&[3.0, 5.0]), vec![0.5, 0.0]);
        assert_eq!(p.apply_row(&[10.0, 7.0]), vec![4.0, 0.0]);
        assert!(matches!(minmax_fit::<f64>(&[]), Err(Error::EmptyDataset)));
        assert!(minmax_apply(&p, &[vec![1.0]]).is_err());
    }

    #[test]
    fn balanced_split() {
        let d = ds(&[25, 25, 25, 25]);
        let (tr, va) = stratified_split(&d, 0.2, 3).unwrap();
        assert_eq!(va.class_counts(), vec![5, 5, 5, 5]);
        assert_eq!(tr.class_counts(), vec![20, 20, 20, 20]);
        let (tr2, va2) = stratified_split(&d, 0.2, 3).unwrap();
        assert_eq!((tr, va), (tr2, va2));
    }

    #[test]
    fn imbalanced_split() {
        let (_, va) = stratified_split(&ds(&[70, 30]), 0.2, 1).unwrap();
        assert_eq!(va.class_counts(), vec![14, 6]);
    }

    #[test]
    fn singleton_class_rejected() {
        assert!(matches!(stratified_split(&ds(&[5, 1]), 0.2, 1), Err(Error::Stratify(_))));
    }

    #[test]
    fn minimum_one_validation_row() {
        let (tr, va) = stratified_split(&ds(&[2, 3]), 0.1, 1).unwrap();
        assert_eq!(va.class_counts(), vec![1, 1]);
        assert_eq!(tr.class_counts(), vec![1, 2]);
    }

    #[test]
    fn group_split_keeps_files_whole() {
        let mut d = ds(&[20, 20]);
        d.groups = Some((0..40).map(|i| i / 4).collect());
        let (tr, va) = stratified_group_split(&d, 0.2, 9).unwrap();
        let tg: std::collections::HashSet<_> = tr.groups.unwrap().into_iter().collect();
        let vg: std::collections::HashSet<_> = va.groups.clone().unwrap().into_iter().collect();
        assert!(tg.is_disjoint(&vg));
        // 5 files per class, 1 to validation
        assert_eq!(va.class_counts(), vec![4, 4]);
    }
}
