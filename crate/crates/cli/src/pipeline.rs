//! Dataset preparation shared by the experiment subcommands: load, pick two
//! classes, optionally PCA-project, normalize into (0, 1), and fit the three
//! candidate initialization distributions on the pooled feature values.
//!
//! PCA (when requested) runs before normalization: projections are
//! unbounded, while the beta fit needs (0, 1) support.

use std::path::PathBuf;

use beinit_core::data::{
    load_csv, minmax_normalize, pca_reduce, select_two_classes_binarize, Dataset,
    DEFAULT_NORMALIZE_EPSILON,
};
use beinit_core::distributions::{
    fit_beta_mle, fit_normal, fit_uniform, BetaMleFit, DistributionSpec,
};
use beinit_core::error::Error;
use beinit_core::Result;

#[derive(Debug, Clone)]
pub struct DataOptions {
    pub path: PathBuf,
    /// Column holding the class label; `None` means the last column.
    pub label_column: Option<usize>,
    pub has_header: bool,
    /// Classes mapped to +1 / −1; default: the first two distinct labels.
    pub class_a: Option<String>,
    pub class_b: Option<String>,
    /// Optional PCA target dimension applied before normalization.
    pub pca_dim: Option<usize>,
    pub epsilon: f64,
}

impl DataOptions {
    pub fn new(path: PathBuf) -> Self {
        Self {
            path,
            label_column: None,
            has_header: true,
            class_a: None,
            class_b: None,
            pca_dim: None,
            epsilon: DEFAULT_NORMALIZE_EPSILON,
        }
    }
}

/// A normalized two-class dataset plus the distributions fitted on it.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub dataset: Dataset,
    pub class_a: String,
    pub class_b: String,
    pub beta: BetaMleFit,
    pub uniform: DistributionSpec,
    pub normal: DistributionSpec,
}

impl PreparedData {
    pub fn beta_spec(&self) -> DistributionSpec {
        DistributionSpec::Beta {
            alpha: self.beta.params.alpha,
            beta: self.beta.params.beta,
        }
    }
}

pub fn prepare(options: &DataOptions) -> Result<PreparedData> {
    let table = load_csv(&options.path, options.label_column, options.has_header)?;
    let distinct = table.distinct_labels();
    let class_a = match &options.class_a {
        Some(c) => c.clone(),
        None => distinct
            .first()
            .cloned()
            .ok_or(Error::EmptyInput("class labels"))?,
    };
    let class_b = match &options.class_b {
        Some(c) => c.clone(),
        None => distinct
            .iter()
            .find(|c| **c != class_a)
            .cloned()
            .ok_or_else(|| Error::MissingClass("second class".into()))?,
    };

    let mut dataset = select_two_classes_binarize(&table, &class_a, &class_b)?;
    if let Some(dim) = options.pca_dim {
        dataset = pca_reduce(&dataset, dim)?;
    }
    let dataset = minmax_normalize(&dataset, options.epsilon)?;

    let pooled = dataset.flat_features();
    let beta = fit_beta_mle(pooled)?;
    let uniform = fit_uniform(pooled)?;
    let normal = fit_normal(pooled)?;

    Ok(PreparedData {
        dataset,
        class_a,
        class_b,
        beta,
        uniform,
        normal,
    })
}
