//! Gaussian binning shared by the counterfactual search and every histogram.
//!
//! Each continuous feature gets `n` bins: `n - 2` equal-width inner bins that
//! span `[mean - 2 std, mean + 2 std)` and two open-ended extreme bins. Inner
//! edges are left-closed, so `mean + 2 std` itself falls in the top bin.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Dataset, FeatureKind, Value};
use crate::scalar::Scalar;

pub const DEFAULT_BIN_COUNT: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiscretizeError {
    #[error("bin count must be at least 4, got {0}")]
    InvalidBinCount(usize),
    #[error("cannot fit a scheme on an empty dataset")]
    EmptyDataset,
    #[error("feature {0} has zero spread and cannot be binned")]
    UnbinnableFeature(usize),
    #[error("feature {0} is not continuous")]
    NotContinuous(usize),
    #[error("feature {0} does not exist in the scheme")]
    UnknownFeature(usize),
    #[error("bin {bin} is out of range for feature {feature}")]
    BinOutOfRange { feature: usize, bin: usize },
    #[error("value does not match the kind of feature {0}")]
    KindMismatch(usize),
}

/// Bins for one continuous feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianBins<T> {
    pub feature: String,
    pub mean: T,
    pub std: T,
    pub bin_count: usize,
    /// `bin_count - 1` strictly increasing edges from `mean - 2 std` to `mean + 2 std`.
    pub inner_edges: Vec<T>,
}

impl<T: Scalar> GaussianBins<T> {
    /// Returns `None` when the edges would not be strictly increasing
    /// (zero or numerically vanishing spread).
    pub fn new(feature: impl Into<String>, mean: T, std: T, bin_count: usize) -> Option<Self> {
        if !mean.is_finite() || !std.is_finite() || std <= T::zero() || bin_count < 4 {
            return None;
        }
        let inner = T::from_usize_lossy(bin_count - 2);
        let two = T::from_f64_lossy(2.0);
        let four = T::from_f64_lossy(4.0);
        let inner_edges: Vec<T> = (0..bin_count - 1)
            .map(|i| mean + std * (four * T::from_usize_lossy(i) / inner - two))
            .collect();
        if inner_edges.windows(2).any(|w| w[0] >= w[1]) {
            return None;
        }
        Some(Self {
            feature: feature.into(),
            mean,
            std,
            bin_count,
            inner_edges,
        })
    }

    /// Width of every inner bin, `4 std / (n - 2)`.
    pub fn inner_width(&self) -> T {
        T::from_f64_lossy(4.0) * self.std / T::from_usize_lossy(self.bin_count - 2)
    }

    pub fn bin_of(&self, value: T) -> usize {
        // Number of edges at or below the value.
        self.inner_edges.partition_point(|&e| e <= value)
    }

    /// Lower and upper bound of a bin; `None` marks an open end.
    pub fn bounds(&self, bin: usize) -> (Option<T>, Option<T>) {
        let lo = if bin == 0 {
            None
        } else {
            Some(self.inner_edges[bin - 1])
        };
        let hi = self.inner_edges.get(bin).copied();
        (lo, hi)
    }

    pub fn representative(&self, bin: usize) -> T {
        let half = self.inner_width() / T::from_f64_lossy(2.0);
        let last = self.bin_count - 1;
        if bin == 0 {
            self.inner_edges[0] - half
        } else if bin >= last {
            self.inner_edges[last - 1] + half
        } else {
            (self.inner_edges[bin - 1] + self.inner_edges[bin]) / T::from_f64_lossy(2.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureBinning<T> {
    Continuous(GaussianBins<T>),
    /// Continuous feature with zero spread; never moved by the search.
    Degenerate {
        feature: String,
        mean: T,
    },
    Categorical {
        feature: String,
        categories: Vec<String>,
    },
}

impl<T: Scalar> FeatureBinning<T> {
    pub fn feature_name(&self) -> &str {
        match self {
            FeatureBinning::Continuous(b) => &b.feature,
            FeatureBinning::Degenerate { feature, .. } | FeatureBinning::Categorical { feature, .. } => feature,
        }
    }

    pub fn as_bins(&self) -> Option<&GaussianBins<T>> {
        match self {
            FeatureBinning::Continuous(b) => Some(b),
            _ => None,
        }
    }

    /// Number of histogram cells: bins or categories. Zero for degenerate features.
    pub fn cell_count(&self) -> usize {
        match self {
            FeatureBinning::Continuous(b) => b.bin_count,
            FeatureBinning::Degenerate { .. } => 0,
            FeatureBinning::Categorical { categories, .. } => categories.len(),
        }
    }
}

/// Per-feature binning for a whole dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationScheme<T> {
    pub bin_count: usize,
    pub features: Vec<FeatureBinning<T>>,
}

impl<T: Scalar> DiscretizationScheme<T> {
    /// Fits one Gaussian per continuous feature (population standard deviation).
    pub fn fit(dataset: &Dataset<T>, bin_count: usize) -> Result<Self, DiscretizeError> {
        if bin_count < 4 {
            return Err(DiscretizeError::InvalidBinCount(bin_count));
        }
        if dataset.is_empty() {
            return Err(DiscretizeError::EmptyDataset);
        }
        let n = T::from_usize_lossy(dataset.len());
        let features = dataset
            .schema()
            .iter()
            .enumerate()
            .map(|(i, f)| match f.kind {
                FeatureKind::Categorical => FeatureBinning::Categorical {
                    feature: f.name.clone(),
                    categories: f.categories.clone(),
                },
                FeatureKind::Continuous => {
                    let values = || dataset.column(i).filter_map(|v| v.as_num());
                    let mean = values().fold(T::zero(), |acc, x| acc + x) / n;
                    let var = values().fold(T::zero(), |acc, x| acc + (x - mean) * (x - mean)) / n;
                    match GaussianBins::new(f.name.clone(), mean, var.sqrt(), bin_count) {
                        Some(b) => FeatureBinning::Continuous(b),
                        None => FeatureBinning::Degenerate {
                            feature: f.name.clone(),
                            mean,
                        },
                    }
                }
            })
            .collect();
        Ok(Self { bin_count, features })
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn feature(&self, feature: usize) -> Result<&FeatureBinning<T>, DiscretizeError> {
        self.features
            .get(feature)
            .ok_or(DiscretizeError::UnknownFeature(feature))
    }

    pub fn bins(&self, feature: usize) -> Result<&GaussianBins<T>, DiscretizeError> {
        match self.feature(feature)? {
            FeatureBinning::Continuous(b) => Ok(b),
            FeatureBinning::Degenerate { .. } => Err(DiscretizeError::UnbinnableFeature(feature)),
            FeatureBinning::Categorical { .. } => Err(DiscretizeError::NotContinuous(feature)),
        }
    }

    pub fn is_binnable(&self, feature: usize) -> bool {
        matches!(self.features.get(feature), Some(FeatureBinning::Continuous(_)))
    }

    /// Continuous features excluded from moves because their spread is zero.
    pub fn degenerate_features(&self) -> Vec<usize> {
        self.features
            .iter()
            .enumerate()
            .filter(|(_, f)| matches!(f, FeatureBinning::Degenerate { .. }))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn bin_of(&self, value: T, feature: usize) -> Result<usize, DiscretizeError> {
        Ok(self.bins(feature)?.bin_of(value))
    }

    /// Numeric value a bin maps back to: the midpoint for inner bins, and half
    /// an inner width beyond the outer edge for the extreme bins.
    pub fn representative_value(&self, bin: usize, feature: usize) -> Result<T, DiscretizeError> {
        let bins = self.bins(feature)?;
        if bin >= bins.bin_count {
            return Err(DiscretizeError::BinOutOfRange { feature, bin });
        }
        Ok(bins.representative(bin))
    }

    pub fn bin_bounds(&self, bin: usize, feature: usize) -> Result<(Option<T>, Option<T>), DiscretizeError> {
        let bins = self.bins(feature)?;
        if bin >= bins.bin_count {
            return Err(DiscretizeError::BinOutOfRange { feature, bin });
        }
        Ok(bins.bounds(bin))
    }

    /// Histogram cell of a value: its bin for continuous features, its
    /// category ordinal for categorical ones.
    pub fn cell_of(&self, value: &Value<T>, feature: usize) -> Result<usize, DiscretizeError> {
        match (self.feature(feature)?, value) {
            (FeatureBinning::Continuous(b), Value::Num(x)) => Ok(b.bin_of(*x)),
            (FeatureBinning::Categorical { categories, .. }, Value::Cat(c)) if *c < categories.len() => Ok(*c),
            (FeatureBinning::Degenerate { .. }, Value::Num(_)) => Err(DiscretizeError::UnbinnableFeature(feature)),
            _ => Err(DiscretizeError::KindMismatch(feature)),
        }
    }

    /// Counts per bin (or per category). Counts always sum to `values.len()`.
    pub fn histogram<'a, I>(&self, values: I, feature: usize) -> Result<Vec<usize>, DiscretizeError>
    where
        I: IntoIterator<Item = &'a Value<T>>,
    {
        let mut counts = vec![0; self.feature(feature)?.cell_count()];
        if counts.is_empty() {
            return Err(DiscretizeError::UnbinnableFeature(feature));
        }
        for v in values {
            counts[self.cell_of(v, feature)?] += 1;
        }
        Ok(counts)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scheme serialization is infallible")
    }
}
