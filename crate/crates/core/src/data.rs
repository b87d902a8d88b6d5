//! Dataset ingestion and preprocessing: CSV loading, two-class selection with
//! ±1 binarization, per-column min-max normalization into (0, 1), and PCA.

use std::fs;
use std::path::Path;

use crate::error::Error;
use crate::Result;

/// Default clipping margin for normalization. Exact 0/1 values would break
/// `ln x` and `ln(1−x)` in the beta MLE, so columns map to [ε, 1−ε].
pub const DEFAULT_NORMALIZE_EPSILON: f64 = 1e-6;

/// Parsed CSV content before class selection: numeric feature rows plus the
/// raw categorical labels.
#[derive(Debug, Clone)]
pub struct RawTable {
    rows: Vec<Vec<f64>>,
    labels: Vec<String>,
}

impl RawTable {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Distinct labels in first-appearance order.
    pub fn distinct_labels(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for label in &self.labels {
            if !seen.contains(label) {
                seen.push(label.clone());
            }
        }
        seen
    }
}

/// Feature matrix with ±1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>, // row-major m×d
    labels: Vec<f64>,
    num_samples: usize,
    feature_dim: usize,
}

impl Dataset {
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                actual: labels.len(),
            });
        }
        for &label in &labels {
            if label != 1.0 && label != -1.0 {
                return Err(Error::InvalidParameter(format!(
                    "labels must be ±1, got {label}"
                )));
            }
        }
        let feature_dim = rows.first().map_or(0, Vec::len);
        let mut features = Vec::with_capacity(rows.len() * feature_dim);
        for row in &rows {
            if row.len() != feature_dim {
                return Err(Error::DimensionMismatch {
                    expected: feature_dim,
                    actual: row.len(),
                });
            }
            features.extend_from_slice(row);
        }
        Ok(Self {
            num_samples: rows.len(),
            feature_dim,
            features,
            labels,
        })
    }

    pub fn num_samples(&self) -> usize {
        self.num_samples
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn row(&self, index: usize) -> &[f64] {
        let start = index * self.feature_dim;
        &self.features[start..start + self.feature_dim]
    }

    pub fn label(&self, index: usize) -> f64 {
        self.labels[index]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Row-major view of all feature values; the pooled sample the
    /// initialization distributions are fitted on.
    pub fn flat_features(&self) -> &[f64] {
        &self.features
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        (0..self.num_samples).map(move |i| (self.row(i), self.labels[i]))
    }

    /// New dataset keeping the rows at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.feature_dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            features,
            labels,
            num_samples: indices.len(),
            feature_dim: self.feature_dim,
        }
    }
}

/// Loads a comma-separated table. `label_column` picks the categorical
/// column (`None` = last column); every other cell must parse as a float.
/// Parse failures report the 1-based line number.
pub fn load_csv(path: &Path, label_column: Option<usize>, has_header: bool) -> Result<RawTable> {
    let content = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut arity: Option<usize> = None;
    for (line_index, line) in content.lines().enumerate() {
        let line_number = line_index + 1;
        if line.trim().is_empty() {
            continue;
        }
        if has_header && line_index == 0 {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let expected = *arity.get_or_insert(cells.len());
        if cells.len() != expected {
            return Err(Error::Parse {
                line: line_number,
                message: format!("expected {expected} cells, found {}", cells.len()),
            });
        }
        let label_index = label_column.unwrap_or(expected.saturating_sub(1));
        if label_index >= expected {
            return Err(Error::Parse {
                line: line_number,
                message: format!(
                    "label column {label_index} out of range for {expected} columns"
                ),
            });
        }
        let mut row = Vec::with_capacity(expected - 1);
        for (column, cell) in cells.iter().enumerate() {
            if column == label_index {
                labels.push((*cell).to_string());
            } else {
                let value: f64 = cell.parse().map_err(|_| Error::Parse {
                    line: line_number,
                    message: format!("non-numeric feature {cell:?} in column {column}"),
                })?;
                row.push(value);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("csv file"));
    }
    Ok(RawTable { rows, labels })
}

/// Keeps only the rows labeled `class_a` or `class_b`, mapping them to +1 and
/// −1 respectively. Row order is preserved.
pub fn select_two_classes_binarize(
    table: &RawTable,
    class_a: &str,
    class_b: &str,
) -> Result<Dataset> {
    for class in [class_a, class_b] {
        if !table.labels.iter().any(|l| l == class) {
            return Err(Error::MissingClass(class.to_string()));
        }
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (row, label) in table.rows.iter().zip(&table.labels) {
        if label == class_a {
            rows.push(row.clone());
            labels.push(1.0);
        } else if label == class_b {
            rows.push(row.clone());
            labels.push(-1.0);
        }
    }
    Dataset::from_rows(rows, labels)
}

/// Per-column affine map `x → ε + (1−2ε)·(x − min)/(max − min)`, so every
/// value lands in [ε, 1−ε] ⊂ (0, 1).
pub fn minmax_normalize(dataset: &Dataset, epsilon: f64) -> Result<Dataset> {
    if !(0.0..0.5).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in [0, 0.5), got {epsilon}"
        )));
    }
    let m = dataset.num_samples();
    let d = dataset.feature_dim();
    if m == 0 || d == 0 {
        return Err(Error::EmptyInput("dataset"));
    }
    let mut normalized = dataset.features.clone();
    for column in 0..d {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in 0..m {
            let v = dataset.features[row * d + column];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi == lo {
            return Err(Error::ConstantColumn { column });
        }
        let scale = (1.0 - 2.0 * epsilon) / (hi - lo);
        for row in 0..m {
            let v = &mut normalized[row * d + column];
            *v = epsilon + (*v - lo) * scale;
        }
    }
    Ok(Dataset {
        features: normalized,
        labels: dataset.labels.clone(),
        num_samples: m,
        feature_dim: d,
    })
}

/// Orthonormal principal directions of a dataset's covariance, largest
/// eigenvalues first.
#[derive(Debug, Clone)]
pub struct PcaBasis {
    feature_dim: usize,
    /// Column-major d×k: component `j` occupies `[j*d, (j+1)*d)`.
    components: Vec<f64>,
    eigenvalues: Vec<f64>,
    column_means: Vec<f64>,
}

impl PcaBasis {
    pub fn component(&self, j: usize) -> &[f64] {
        &self.components[j * self.feature_dim..(j + 1) * self.feature_dim]
    }

    pub fn num_components(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn column_means(&self) -> &[f64] {
        &self.column_means
    }
}

/// Fits the top `target_dim` principal components of the sample covariance
/// (divisor m−1) by cyclic Jacobi eigendecomposition. Each component's sign
/// is fixed so its largest-magnitude entry is positive.
pub fn pca_basis(dataset: &Dataset, target_dim: usize) -> Result<PcaBasis> {
    let m = dataset.num_samples();
    let d = dataset.feature_dim();
    if target_dim == 0 || target_dim > d {
        return Err(Error::InvalidParameter(format!(
            "target dimension {target_dim} invalid for {d} features"
        )));
    }
    if m <= target_dim {
        return Err(Error::TooFewSamples {
            needed: target_dim + 1,
            got: m,
        });
    }

    let mut means = vec![0.0; d];
    for row in 0..m {
        for (column, mean) in means.iter_mut().enumerate() {
            *mean += dataset.features[row * d + column];
        }
    }
    for mean in &mut means {
        *mean /= m as f64;
    }

    let mut covariance = vec![0.0; d * d];
    for row in 0..m {
        for i in 0..d {
            let di = dataset.features[row * d + i] - means[i];
            for j in i..d {
                let dj = dataset.features[row * d + j] - means[j];
                covariance[i * d + j] += di * dj;
            }
        }
    }
    let denom = (m - 1) as f64;
    for i in 0..d {
        for j in i..d {
            covariance[i * d + j] /= denom;
            covariance[j * d + i] = covariance[i * d + j];
        }
    }

    let (eigenvalues, eigenvectors) = jacobi_eigh(covariance, d);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));

    let mut components = Vec::with_capacity(target_dim * d);
    let mut top_values = Vec::with_capacity(target_dim);
    for &which in order.iter().take(target_dim) {
        let mut column: Vec<f64> = (0..d).map(|row| eigenvectors[row * d + which]).collect();
        let extreme = column
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(0.0);
        if extreme < 0.0 {
            for v in &mut column {
                *v = -*v;
            }
        }
        components.extend_from_slice(&column);
        top_values.push(eigenvalues[which]);
    }

    Ok(PcaBasis {
        feature_dim: d,
        components,
        eigenvalues: top_values,
        column_means: means,
    })
}

/// Projects the centered data onto its top `target_dim` principal components.
pub fn pca_reduce(dataset: &Dataset, target_dim: usize) -> Result<Dataset> {
    let basis = pca_basis(dataset, target_dim)?;
    let m = dataset.num_samples();
    let d = dataset.feature_dim();
    let mut projected = Vec::with_capacity(m * target_dim);
    for row in 0..m {
        let sample = &dataset.features[row * d..(row + 1) * d];
        for j in 0..target_dim {
            let score: f64 = basis
                .component(j)
                .iter()
                .zip(sample)
                .zip(&basis.column_means)
                .map(|((weight, x), mean)| weight * (x - mean))
                .sum();
            projected.push(score);
        }
    }
    Ok(Dataset {
        features: projected,
        labels: dataset.labels.clone(),
        num_samples: m,
        feature_dim: target_dim,
    })
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix (row-major).
/// Returns (eigenvalues, eigenvectors) with eigenvector `k` in column `k`.
fn jacobi_eigh(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let idx = |r: usize, c: usize| r * n + c;
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[idx(i, i)] = 1.0;
    }
    if n == 1 {
        return (vec![a[0]], v);
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[idx(p, q)] * a[idx(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[idx(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a[idx(k, p)];
                        let akq = a[idx(k, q)];
                        a[idx(k, p)] = c * akp - s * akq;
                        a[idx(p, k)] = a[idx(k, p)];
                        a[idx(k, q)] = s * akp + c * akq;
                        a[idx(q, k)] = a[idx(k, q)];
                    }
                }
                a[idx(p, p)] = app - t * apq;
                a[idx(q, q)] = aqq + t * apq;
                a[idx(p, q)] = 0.0;
                a[idx(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[idx(k, p)];
                    let vkq = v[idx(k, q)];
                    v[idx(k, p)] = c * vkp - s * vkq;
                    v[idx(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigenvalues: Vec<f64> = (0..n).map(|i| a[idx(i, i)]).collect();
    (eigenvalues, v)
}
