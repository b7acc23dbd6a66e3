//! Greedy counterfactual search over the binned feature space.
//!
//! Starting from an instance, every step scores all admissible one-bin (or
//! one-category) moves with the black-box predictor and applies the one that
//! pushes the probability furthest toward the opposite class. The search stops
//! as soon as the decision flips, or when no move makes progress.
//!
//! Constraints:
//! - at most `max_changed_features` features differ from the original;
//! - a continuous feature never sits more than `max_bin_displacement` bins
//!   away from its original bin;
//! - a categorical feature switches at most once, from its original category;
//! - locked and zero-spread features are never moved.
//!
//! Ties are broken by lowest feature index, then downward before upward bin
//! moves, then lowest target category ordinal.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::data::{Dataset, FeatureKind, Instance, Value};
use crate::discretize::{DiscretizationScheme, DiscretizeError, FeatureBinning};
use crate::predictor::{DecisionConfig, PredictError, Predictor};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_CHANGED_FEATURES: usize = 5;
pub const DEFAULT_MAX_BIN_DISPLACEMENT: usize = 4;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid algorithm configuration: {0}")]
    InvalidConfig(String),
    #[error("instance does not match the scheme: {0}")]
    InvalidInstance(String),
    #[error("row {0} does not exist")]
    UnknownRow(usize),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    /// `w`: cap on distinct features that differ from the original.
    pub max_changed_features: usize,
    /// `l`: cap on cumulative bin displacement of a continuous feature.
    pub max_bin_displacement: usize,
    #[serde(default)]
    pub locked_features: BTreeSet<usize>,
    /// Defaults to `w * l + number of categorical features`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        Self {
            max_changed_features: DEFAULT_MAX_CHANGED_FEATURES,
            max_bin_displacement: DEFAULT_MAX_BIN_DISPLACEMENT,
            locked_features: BTreeSet::new(),
            max_steps: None,
        }
    }
}

impl AlgorithmConfig {
    pub fn new(max_changed_features: usize, max_bin_displacement: usize) -> Self {
        Self {
            max_changed_features,
            max_bin_displacement,
            ..Self::default()
        }
    }

    pub fn with_locked(mut self, features: impl IntoIterator<Item = usize>) -> Self {
        self.locked_features.extend(features);
        self
    }

    pub fn step_cap(&self, n_categorical: usize) -> usize {
        self.max_steps
            .unwrap_or(self.max_changed_features * self.max_bin_displacement + n_categorical)
    }

    pub fn validate(&self, n_features: usize) -> Result<(), EngineError> {
        if self.max_changed_features == 0 {
            return Err(EngineError::InvalidConfig("max_changed_features must be >= 1".into()));
        }
        if self.max_bin_displacement == 0 {
            return Err(EngineError::InvalidConfig("max_bin_displacement must be >= 1".into()));
        }
        if let Some(&f) = self.locked_features.iter().find(|&&f| f >= n_features) {
            return Err(EngineError::InvalidConfig(format!("locked feature {f} does not exist")));
        }
        Ok(())
    }
}

/// One admissible step of the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CandidateMove {
    Bin {
        feature: usize,
        from_bin: usize,
        to_bin: usize,
    },
    Category {
        feature: usize,
        from_category: usize,
        to_category: usize,
    },
}

impl CandidateMove {
    pub fn feature(&self) -> usize {
        match *self {
            CandidateMove::Bin { feature, .. } | CandidateMove::Category { feature, .. } => feature,
        }
    }
}

/// Net difference between the counterfactual and the original for one feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureChange<T> {
    Continuous {
        feature: usize,
        from_bin: usize,
        to_bin: usize,
        from_value: T,
        to_value: T,
    },
    Categorical {
        feature: usize,
        from_category: usize,
        to_category: usize,
    },
}

impl<T: Scalar> FeatureChange<T> {
    pub fn feature(&self) -> usize {
        match *self {
            FeatureChange::Continuous { feature, .. } | FeatureChange::Categorical { feature, .. } => feature,
        }
    }

    /// `(from, to)` histogram cells: bins or category ordinals.
    pub fn transition(&self) -> (usize, usize) {
        match *self {
            FeatureChange::Continuous { from_bin, to_bin, .. } => (from_bin, to_bin),
            FeatureChange::Categorical {
                from_category,
                to_category,
                ..
            } => (from_category, to_category),
        }
    }

    pub fn target_value(&self) -> Value<T> {
        match *self {
            FeatureChange::Continuous { to_value, .. } => Value::Num(to_value),
            FeatureChange::Categorical { to_category, .. } => Value::Cat(to_category),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The decision changed; the explanation is a success.
    Flipped,
    NoImprovement,
    Exhausted,
    StepCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep<T> {
    pub step: usize,
    pub candidate: CandidateMove,
    /// Probability after applying the move.
    pub probability: T,
    pub improvement: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualExplanation<T> {
    pub row_id: usize,
    /// Scheme and configuration the search ran under.
    pub fingerprint: String,
    pub original_prob: T,
    pub original_decision: u8,
    pub success: bool,
    pub stop_reason: StopReason,
    pub changes: Vec<FeatureChange<T>>,
    pub trace: Vec<TraceStep<T>>,
    pub final_prob: T,
}

impl<T: Scalar> CounterfactualExplanation<T> {
    /// The original instance with `changes` applied.
    pub fn apply_to(&self, original: &[Value<T>]) -> Vec<Value<T>> {
        apply_changes(original, &self.changes)
    }
}

pub fn apply_changes<T: Scalar>(original: &[Value<T>], changes: &[FeatureChange<T>]) -> Vec<Value<T>> {
    let mut values = original.to_vec();
    for c in changes {
        values[c.feature()] = c.target_value();
    }
    values
}

/// Short hex digest of the scheme, algorithm configuration and threshold.
pub fn fingerprint<T: Scalar>(
    scheme: &DiscretizationScheme<T>,
    config: &AlgorithmConfig,
    decision: &DecisionConfig<T>,
) -> String {
    #[derive(Serialize)]
    struct Fingerprinted<'a, T> {
        scheme: &'a DiscretizationScheme<T>,
        config: &'a AlgorithmConfig,
        threshold: f64,
    }
    let doc = serde_json::to_vec(&Fingerprinted {
        scheme,
        config,
        threshold: decision.threshold.to_f64_lossless(),
    })
    .expect("fingerprint serialization is infallible");
    hex::encode(&Sha256::digest(&doc)[..8])
}

/// Search position: current values plus the cell (bin or category) of every
/// movable feature, alongside the original's.
#[derive(Debug, Clone)]
struct SearchState<T> {
    values: Vec<Value<T>>,
    cells: Vec<Option<usize>>,
}

impl<T: Scalar> SearchState<T> {
    fn locate(values: &[Value<T>], scheme: &DiscretizationScheme<T>) -> Result<Self, EngineError> {
        if values.len() != scheme.n_features() {
            return Err(EngineError::InvalidInstance(format!(
                "{} values for {} features",
                values.len(),
                scheme.n_features()
            )));
        }
        let cells = values
            .iter()
            .enumerate()
            .map(|(f, v)| match (&scheme.features[f], v) {
                (FeatureBinning::Degenerate { .. }, Value::Num(_)) => Ok(None),
                _ => scheme
                    .cell_of(v, f)
                    .map(Some)
                    .map_err(|e| EngineError::InvalidInstance(e.to_string())),
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            values: values.to_vec(),
            cells,
        })
    }
}

fn changed_count<T>(current: &SearchState<T>, original: &SearchState<T>) -> usize {
    current
        .cells
        .iter()
        .zip(&original.cells)
        .filter(|(c, o)| c != o)
        .count()
}

fn candidates<T: Scalar>(
    current: &SearchState<T>,
    original: &SearchState<T>,
    scheme: &DiscretizationScheme<T>,
    config: &AlgorithmConfig,
) -> Vec<CandidateMove> {
    let changed = changed_count(current, original);
    let room = changed < config.max_changed_features;
    let l = config.max_bin_displacement;
    let mut out = Vec::new();
    for (f, binning) in scheme.features.iter().enumerate() {
        if config.locked_features.contains(&f) {
            continue;
        }
        let (Some(cur), Some(orig)) = (current.cells[f], original.cells[f]) else {
            continue;
        };
        let is_changed = cur != orig;
        match binning {
            FeatureBinning::Continuous(bins) => {
                let down = cur.checked_sub(1);
                let up = (cur + 1 < bins.bin_count).then_some(cur + 1);
                for to in [down, up].into_iter().flatten() {
                    if to.abs_diff(orig) > l {
                        continue;
                    }
                    // Moving an unchanged feature away from its original bin
                    // adds one to the changed-feature count.
                    if !is_changed && !room {
                        continue;
                    }
                    out.push(CandidateMove::Bin {
                        feature: f,
                        from_bin: cur,
                        to_bin: to,
                    });
                }
            }
            FeatureBinning::Categorical { categories, .. } => {
                if is_changed || !room {
                    continue;
                }
                out.extend(
                    (0..categories.len())
                        .filter(|&c| c != orig)
                        .map(|c| CandidateMove::Category {
                            feature: f,
                            from_category: orig,
                            to_category: c,
                        }),
                );
            }
            FeatureBinning::Degenerate { .. } => {}
        }
    }
    out
}

fn apply_move<T: Scalar>(
    state: &SearchState<T>,
    original: &SearchState<T>,
    mv: &CandidateMove,
    scheme: &DiscretizationScheme<T>,
) -> SearchState<T> {
    let mut next = state.clone();
    match *mv {
        CandidateMove::Bin { feature, to_bin, .. } => {
            next.values[feature] = if Some(to_bin) == original.cells[feature] {
                original.values[feature]
            } else {
                let bins = scheme.features[feature]
                    .as_bins()
                    .expect("bin moves are only generated for binned features");
                Value::Num(bins.representative(to_bin))
            };
            next.cells[feature] = Some(to_bin);
        }
        CandidateMove::Category {
            feature, to_category, ..
        } => {
            next.values[feature] = Value::Cat(to_category);
            next.cells[feature] = Some(to_category);
        }
    }
    next
}

/// Admissible moves from `current`, in tie-break order.
pub fn enumerate_candidates<T: Scalar>(
    current: &[Value<T>],
    original: &[Value<T>],
    scheme: &DiscretizationScheme<T>,
    config: &AlgorithmConfig,
) -> Result<Vec<CandidateMove>, EngineError> {
    let cur = SearchState::locate(current, scheme)?;
    let orig = SearchState::locate(original, scheme)?;
    Ok(candidates(&cur, &orig, scheme, config))
}

/// Net per-feature changes between `current` and `original`, in feature order.
fn net_changes<T: Scalar>(
    current: &SearchState<T>,
    original: &SearchState<T>,
    scheme: &DiscretizationScheme<T>,
) -> Vec<FeatureChange<T>> {
    (0..current.cells.len())
        .filter(|&f| current.cells[f] != original.cells[f])
        .filter_map(|f| {
            let (from, to) = (original.cells[f]?, current.cells[f]?);
            Some(match (&scheme.features[f], current.values[f], original.values[f]) {
                (FeatureBinning::Categorical { .. }, _, _) => FeatureChange::Categorical {
                    feature: f,
                    from_category: from,
                    to_category: to,
                },
                (_, Value::Num(to_value), Value::Num(from_value)) => FeatureChange::Continuous {
                    feature: f,
                    from_bin: from,
                    to_bin: to,
                    from_value,
                    to_value,
                },
                _ => return None,
            })
        })
        .collect()
}

/// Runs the search for many rows under one scheme, configuration and
/// predictor.
pub struct Explainer<'a, T: Scalar, P: Predictor<T> + ?Sized> {
    predictor: &'a P,
    scheme: &'a DiscretizationScheme<T>,
    config: &'a AlgorithmConfig,
    decision: DecisionConfig<T>,
    fingerprint: String,
    step_cap: usize,
}

impl<'a, T: Scalar, P: Predictor<T> + ?Sized> Explainer<'a, T, P> {
    pub fn new(
        predictor: &'a P,
        scheme: &'a DiscretizationScheme<T>,
        config: &'a AlgorithmConfig,
        decision: DecisionConfig<T>,
    ) -> Result<Self, EngineError> {
        config.validate(scheme.n_features())?;
        let n_categorical = scheme
            .features
            .iter()
            .filter(|f| matches!(f, FeatureBinning::Categorical { .. }))
            .count();
        Ok(Self {
            predictor,
            scheme,
            config,
            decision,
            fingerprint: fingerprint(scheme, config, &decision),
            step_cap: config.step_cap(n_categorical),
        })
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn explain(&self, row_id: usize, values: &[Value<T>]) -> Result<CounterfactualExplanation<T>, EngineError> {
        let original = SearchState::locate(values, self.scheme)?;
        let original_prob = self.predictor.predict_proba(values)?;
        let original_decision = self.decision.decide(original_prob);
        let toward_positive = original_decision == 0;

        let mut current = original.clone();
        let mut p_current = original_prob;
        let mut trace = Vec::new();
        let stop_reason = loop {
            let moves = candidates(&current, &original, self.scheme, self.config);
            if moves.is_empty() {
                break StopReason::Exhausted;
            }
            let states: Vec<SearchState<T>> = moves
                .iter()
                .map(|mv| apply_move(&current, &original, mv, self.scheme))
                .collect();
            let rows: Vec<Vec<Value<T>>> = states.iter().map(|s| s.values.clone()).collect();
            let probs = self.predictor.predict_batch(&rows)?;
            if probs.len() != moves.len() {
                return Err(PredictError::MalformedResponse(format!(
                    "expected {} probabilities, got {}",
                    moves.len(),
                    probs.len()
                ))
                .into());
            }

            let mut best: Option<(usize, T)> = None;
            for (i, &p) in probs.iter().enumerate() {
                let gain = if toward_positive { p - p_current } else { p_current - p };
                // Strict comparison keeps the first candidate on ties.
                if best.is_none_or(|(_, g)| gain > g) {
                    best = Some((i, gain));
                }
            }
            let (i, gain) = best.expect("moves is non-empty");
            if gain.is_nan() || gain <= T::zero() {
                break StopReason::NoImprovement;
            }
            // Only reported when an improving move is being withheld.
            if trace.len() >= self.step_cap {
                break StopReason::StepCap;
            }
            current = states.into_iter().nth(i).expect("index from enumeration");
            p_current = probs[i];
            trace.push(TraceStep {
                step: trace.len() + 1,
                candidate: moves[i],
                probability: p_current,
                improvement: gain,
            });
            if self.decision.decide(p_current) != original_decision {
                break StopReason::Flipped;
            }
        };

        Ok(CounterfactualExplanation {
            row_id,
            fingerprint: self.fingerprint.clone(),
            original_prob,
            original_decision,
            success: stop_reason == StopReason::Flipped,
            stop_reason,
            changes: net_changes(&current, &original, self.scheme),
            trace,
            final_prob: p_current,
        })
    }
}

pub fn generate_counterfactual<T: Scalar, P: Predictor<T> + ?Sized>(
    instance: &Instance<T>,
    predictor: &P,
    scheme: &DiscretizationScheme<T>,
    config: &AlgorithmConfig,
    decision: &DecisionConfig<T>,
) -> Result<CounterfactualExplanation<T>, EngineError> {
    Explainer::new(predictor, scheme, config, *decision)?.explain(instance.row_id, &instance.values)
}

/// One explanation per requested row, in request order.
pub fn generate_batch<T: Scalar, P: Predictor<T> + ?Sized>(
    dataset: &Dataset<T>,
    rows: &[usize],
    predictor: &P,
    scheme: &DiscretizationScheme<T>,
    config: &AlgorithmConfig,
    decision: &DecisionConfig<T>,
) -> Result<Vec<CounterfactualExplanation<T>>, EngineError> {
    let explainer = Explainer::new(predictor, scheme, config, *decision)?;
    rows.iter()
        .map(|&r| {
            let row = dataset.row(r).ok_or(EngineError::UnknownRow(r))?;
            explainer.explain(row.row_id, &row.values)
        })
        .collect()
}

/// Same result as [`generate_batch`], with rows searched on the rayon pool.
pub fn generate_batch_parallel<T: Scalar, P: Predictor<T> + ?Sized>(
    dataset: &Dataset<T>,
    rows: &[usize],
    predictor: &P,
    scheme: &DiscretizationScheme<T>,
    config: &AlgorithmConfig,
    decision: &DecisionConfig<T>,
) -> Result<Vec<CounterfactualExplanation<T>>, EngineError> {
    let explainer = Explainer::new(predictor, scheme, config, *decision)?;
    rows.par_iter()
        .map(|&r| {
            let row = dataset.row(r).ok_or(EngineError::UnknownRow(r))?;
            explainer.explain(row.row_id, &row.values)
        })
        .collect()
}

/// Feature kinds in schema order, used by callers that only hold a scheme.
pub fn feature_kinds<T: Scalar>(scheme: &DiscretizationScheme<T>) -> Vec<FeatureKind> {
    scheme
        .features
        .iter()
        .map(|f| match f {
            FeatureBinning::Categorical { .. } => FeatureKind::Categorical,
            _ => FeatureKind::Continuous,
        })
        .collect()
}
