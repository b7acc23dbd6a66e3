//! User-defined cohorts: filter sets, per-feature summaries and the feature
//! ordering used to compare two cohorts side by side.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::TransitionAggregate;
use crate::data::{Dataset, FeatureKind, Instance, Value};
use crate::discretize::{DiscretizationScheme, DiscretizeError, FeatureBinning};
use crate::predictor::{ConfusionCell, PredictionCache};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CohortError {
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("row {0} does not exist")]
    UnknownRow(usize),
    #[error("prediction cache covers {cache} rows but the dataset has {dataset}")]
    CacheMismatch { cache: usize, dataset: usize },
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
}

/// Closed interval over the predicted probability of the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceRange<T> {
    pub low: T,
    pub high: T,
}

impl<T: Scalar> Default for ConfidenceRange<T> {
    fn default() -> Self {
        Self {
            low: T::zero(),
            high: T::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RangeClause<T> {
    /// Closed numeric interval on a continuous feature.
    Numeric { feature: usize, low: T, high: T },
    /// Allowed category labels of a categorical feature.
    Categories { feature: usize, allowed: BTreeSet<String> },
}

impl<T> RangeClause<T> {
    pub fn feature(&self) -> usize {
        match self {
            RangeClause::Numeric { feature, .. } | RangeClause::Categories { feature, .. } => *feature,
        }
    }
}

/// Conjunction of a confidence interval, a set of confusion cells (empty
/// means all cells) and per-feature range clauses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct FilterSet<T> {
    #[serde(default)]
    pub confidence: ConfidenceRange<T>,
    #[serde(default)]
    pub cells: BTreeSet<ConfusionCell>,
    #[serde(default)]
    pub ranges: Vec<RangeClause<T>>,
    /// Visibility only; never affects membership.
    #[serde(default)]
    pub hidden: bool,
}

impl<T: Scalar> Default for FilterSet<T> {
    fn default() -> Self {
        Self {
            confidence: ConfidenceRange::default(),
            cells: BTreeSet::new(),
            ranges: Vec::new(),
            hidden: false,
        }
    }
}

impl<T: Scalar> FilterSet<T> {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn predicted_positive() -> Self {
        Self::with_cells([ConfusionCell::TP, ConfusionCell::FP])
    }

    pub fn predicted_negative() -> Self {
        Self::with_cells([ConfusionCell::TN, ConfusionCell::FN])
    }

    pub fn with_cells(cells: impl IntoIterator<Item = ConfusionCell>) -> Self {
        Self {
            cells: cells.into_iter().collect(),
            ..Self::default()
        }
    }

    pub fn with_range(mut self, clause: RangeClause<T>) -> Self {
        self.ranges.push(clause);
        self
    }

    pub fn validate(&self, dataset: &Dataset<T>) -> Result<(), CohortError> {
        let ConfidenceRange { low, high } = self.confidence;
        if !(low >= T::zero() && high <= T::one() && low <= high) {
            return Err(CohortError::InvalidFilter(format!(
                "confidence range [{low}, {high}] is not inside [0, 1]"
            )));
        }
        for clause in &self.ranges {
            let f = clause.feature();
            let feature = dataset
                .schema()
                .get(f)
                .ok_or_else(|| CohortError::InvalidFilter(format!("feature {f} does not exist")))?;
            match (clause, feature.kind) {
                (RangeClause::Numeric { low, high, .. }, FeatureKind::Continuous) => {
                    if low.is_nan() || high.is_nan() || low > high {
                        return Err(CohortError::InvalidFilter(format!(
                            "range on `{}` has low {low} above high {high}",
                            feature.name
                        )));
                    }
                }
                (RangeClause::Categories { allowed, .. }, FeatureKind::Categorical) => {
                    if let Some(bad) = allowed.iter().find(|c| feature.category_index(c).is_none()) {
                        return Err(CohortError::InvalidFilter(format!(
                            "`{bad}` is not a category of `{}`",
                            feature.name
                        )));
                    }
                }
                _ => {
                    return Err(CohortError::InvalidFilter(format!(
                        "clause kind does not match feature `{}`",
                        feature.name
                    )))
                }
            }
        }
        Ok(())
    }
}

/// Rows satisfying every clause of the filter, in row_id order.
pub fn apply_filterset<T: Scalar>(
    dataset: &Dataset<T>,
    cache: &PredictionCache<T>,
    filter: &FilterSet<T>,
) -> Result<Vec<usize>, CohortError> {
    filter.validate(dataset)?;
    if cache.len() != dataset.len() {
        return Err(CohortError::CacheMismatch {
            cache: cache.len(),
            dataset: dataset.len(),
        });
    }
    let allowed_ordinals: Vec<Option<BTreeSet<usize>>> = filter
        .ranges
        .iter()
        .map(|clause| match clause {
            RangeClause::Categories { feature, allowed } => Some(
                allowed
                    .iter()
                    .filter_map(|c| dataset.feature(*feature).category_index(c))
                    .collect(),
            ),
            RangeClause::Numeric { .. } => None,
        })
        .collect();

    let keeps = |row: &Instance<T>| {
        let entry = &cache.entries[row.row_id];
        if entry.probability < filter.confidence.low || entry.probability > filter.confidence.high {
            return false;
        }
        if !filter.cells.is_empty() && !filter.cells.contains(&entry.cell) {
            return false;
        }
        filter.ranges.iter().zip(&allowed_ordinals).all(|(clause, ordinals)| {
            match (clause, &row.values[clause.feature()], ordinals) {
                (RangeClause::Numeric { low, high, .. }, Value::Num(x), _) => low <= x && x <= high,
                (RangeClause::Categories { .. }, Value::Cat(c), Some(set)) => set.contains(c),
                _ => false,
            }
        })
    };
    Ok(dataset.rows().iter().filter(|r| keeps(r)).map(|r| r.row_id).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureSummary<T> {
    Continuous {
        median: Option<T>,
        /// `None` for empty cohorts and zero-spread features.
        median_bin: Option<usize>,
        /// Empty for zero-spread features.
        histogram: Vec<usize>,
    },
    Categorical {
        mode: Option<usize>,
        counts: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSummary<T> {
    pub size: usize,
    pub features: Vec<FeatureSummary<T>>,
}

impl<T: Scalar> CohortSummary<T> {
    pub fn median(&self, feature: usize) -> Option<T> {
        match self.features.get(feature)? {
            FeatureSummary::Continuous { median, .. } => *median,
            FeatureSummary::Categorical { .. } => None,
        }
    }

    /// Histogram (continuous) or category counts (categorical).
    pub fn counts(&self, feature: usize) -> &[usize] {
        match &self.features[feature] {
            FeatureSummary::Continuous { histogram, .. } => histogram,
            FeatureSummary::Categorical { counts, .. } => counts,
        }
    }
}

/// Lower median: for an even count, the smaller of the two central values.
pub fn lower_median<T: Scalar>(values: &mut [T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Some(values[(values.len() - 1) / 2])
}

pub fn summarize_cohort<T: Scalar>(
    row_ids: &[usize],
    dataset: &Dataset<T>,
    scheme: &DiscretizationScheme<T>,
) -> Result<CohortSummary<T>, CohortError> {
    let rows: Vec<&Instance<T>> = row_ids
        .iter()
        .map(|&r| dataset.row(r).ok_or(CohortError::UnknownRow(r)))
        .collect::<Result<_, _>>()?;
    let features = (0..dataset.n_features())
        .map(|f| -> Result<FeatureSummary<T>, CohortError> {
            let values: Vec<Value<T>> = rows.iter().map(|r| r.values[f]).collect();
            Ok(match scheme.feature(f)? {
                FeatureBinning::Categorical { categories, .. } => {
                    let counts = scheme.histogram(&values, f)?;
                    // Ties resolve to the lowest ordinal.
                    let mode =
                        (!rows.is_empty()).then(|| (0..categories.len()).rev().max_by_key(|&c| counts[c]).unwrap_or(0));
                    FeatureSummary::Categorical { mode, counts }
                }
                binning => {
                    let mut nums: Vec<T> = values.iter().filter_map(Value::as_num).collect();
                    let median = lower_median(&mut nums);
                    match binning {
                        FeatureBinning::Continuous(bins) => FeatureSummary::Continuous {
                            median,
                            median_bin: median.map(|m| bins.bin_of(m)),
                            histogram: scheme.histogram(&values, f)?,
                        },
                        _ => FeatureSummary::Continuous {
                            median,
                            median_bin: None,
                            histogram: Vec::new(),
                        },
                    }
                }
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(CohortSummary {
        size: rows.len(),
        features,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortKey {
    #[default]
    MedianDifference,
    CounterfactualCount,
    SchemaOrder,
}

impl std::str::FromStr for SortKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "median_difference" => Ok(SortKey::MedianDifference),
            "counterfactual_count" => Ok(SortKey::CounterfactualCount),
            "schema_order" => Ok(SortKey::SchemaOrder),
            other => Err(format!("unknown sort key `{other}`")),
        }
    }
}

/// Per-feature comparison score for one sort key (higher sorts first).
///
/// Continuous median difference is normalised by the feature's `4 std` inner
/// span; categorical features use the total-variation distance between the
/// two cohorts' category shares.
pub fn feature_scores<T: Scalar>(
    a: &CohortSummary<T>,
    b: &CohortSummary<T>,
    aggregates: Option<(&TransitionAggregate, &TransitionAggregate)>,
    scheme: &DiscretizationScheme<T>,
    key: SortKey,
) -> Vec<f64> {
    (0..scheme.n_features())
        .map(|f| match key {
            SortKey::SchemaOrder => 0.0,
            SortKey::CounterfactualCount => {
                aggregates.map_or(0, |(x, y)| x.feature_total(f) + y.feature_total(f)) as f64
            }
            SortKey::MedianDifference => match &scheme.features[f] {
                FeatureBinning::Continuous(bins) => match (a.median(f), b.median(f)) {
                    (Some(ma), Some(mb)) => {
                        let span = 4.0 * bins.std.to_f64_lossless();
                        ((ma - mb).abs().to_f64_lossless()) / span
                    }
                    _ => 0.0,
                },
                FeatureBinning::Categorical { .. } => {
                    if a.size == 0 || b.size == 0 {
                        return 0.0;
                    }
                    let (ca, cb) = (a.counts(f), b.counts(f));
                    0.5 * ca
                        .iter()
                        .zip(cb)
                        .map(|(&x, &y)| (x as f64 / a.size as f64 - y as f64 / b.size as f64).abs())
                        .sum::<f64>()
                }
                FeatureBinning::Degenerate { .. } => 0.0,
            },
        })
        .collect()
}

/// Feature display order: continuous before categorical, then by descending
/// score, then by schema order.
pub fn sort_features<T: Scalar>(
    a: &CohortSummary<T>,
    b: &CohortSummary<T>,
    aggregates: Option<(&TransitionAggregate, &TransitionAggregate)>,
    scheme: &DiscretizationScheme<T>,
    key: SortKey,
) -> Vec<usize> {
    let scores = feature_scores(a, b, aggregates, scheme, key);
    let categorical = |f: usize| matches!(scheme.features[f], FeatureBinning::Categorical { .. });
    let mut order: Vec<usize> = (0..scheme.n_features()).collect();
    order.sort_by(|&x, &y| {
        categorical(x)
            .cmp(&categorical(y))
            .then_with(|| scores[y].partial_cmp(&scores[x]).unwrap_or(Ordering::Equal))
            .then_with(|| x.cmp(&y))
    });
    order
}

/// Cohort rows whose value for `feature` falls in `bin` (a category ordinal
/// for categorical features), with their full value vectors.
pub fn bin_slice<'a, T: Scalar>(
    row_ids: &[usize],
    dataset: &'a Dataset<T>,
    scheme: &DiscretizationScheme<T>,
    feature: usize,
    bin: usize,
) -> Result<Vec<&'a Instance<T>>, CohortError> {
    let cells = scheme.feature(feature)?.cell_count();
    if cells == 0 {
        return Err(DiscretizeError::UnbinnableFeature(feature).into());
    }
    if bin >= cells {
        return Err(DiscretizeError::BinOutOfRange { feature, bin }.into());
    }
    let mut out = Vec::new();
    for &r in row_ids {
        let row = dataset.row(r).ok_or(CohortError::UnknownRow(r))?;
        if scheme.cell_of(&row.values[feature], feature)? == bin {
            out.push(row);
        }
    }
    Ok(out)
}
