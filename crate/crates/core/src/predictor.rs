//! Black-box prediction boundary.
//!
//! The search only ever sees [`Predictor::predict_proba`] and its batched
//! form. Built-in linear models, margin models wrapped by a squashing
//! adapter, and a remote HTTP adapter all sit behind the same trait.

use std::fs::File;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Dataset, FeatureKind, FeatureSchema, Value};
use crate::scalar::{logistic, Scalar};

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("expected {expected} encoded weights, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("training labels contain a single class")]
    SingleClassDataset,
    #[error("cannot train on an empty dataset")]
    EmptyDataset,
    #[error("decision threshold must lie strictly inside (0, 1), got {0}")]
    InvalidThreshold(f64),
    #[error("instance does not match the model schema: {0}")]
    InvalidInstance(String),
    #[error("transport failure: {0}")]
    TransportFailure(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("probability {0} is outside [0, 1]")]
    OutOfRangeProbability(f64),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("coefficient file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Probability of the positive class for an instance encoded per schema.
///
/// Implementations must be deterministic and return values in `[0, 1]`.
pub trait Predictor<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    fn predict_proba(&self, values: &[Value<T>]) -> Result<T, PredictError>;

    fn predict_batch(&self, rows: &[Vec<Value<T>>]) -> Result<Vec<T>, PredictError> {
        rows.iter().map(|r| self.predict_proba(r)).collect()
    }
}

impl<T: Scalar, P: Predictor<T> + ?Sized> Predictor<T> for Arc<P> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn predict_proba(&self, values: &[Value<T>]) -> Result<T, PredictError> {
        (**self).predict_proba(values)
    }

    fn predict_batch(&self, rows: &[Vec<Value<T>>]) -> Result<Vec<T>, PredictError> {
        (**self).predict_batch(rows)
    }
}

impl<T: Scalar, P: Predictor<T> + ?Sized> Predictor<T> for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn predict_proba(&self, values: &[Value<T>]) -> Result<T, PredictError> {
        (**self).predict_proba(values)
    }

    fn predict_batch(&self, rows: &[Vec<Value<T>>]) -> Result<Vec<T>, PredictError> {
        (**self).predict_batch(rows)
    }
}

/// Real-valued decision score (e.g. an SVM margin) before squashing.
pub trait MarginModel<T: Scalar>: Send + Sync {
    fn margin(&self, values: &[Value<T>]) -> Result<T, PredictError>;
}

/// Turns a margin model into a probability model via `logistic(scale * margin)`.
pub struct SquashedMargin<M> {
    name: String,
    model: M,
    scale: f64,
}

impl<M> SquashedMargin<M> {
    pub fn new(name: impl Into<String>, model: M, scale: f64) -> Self {
        Self {
            name: name.into(),
            model,
            scale,
        }
    }
}

impl<T: Scalar, M: MarginModel<T>> Predictor<T> for SquashedMargin<M> {
    fn name(&self) -> &str {
        &self.name
    }

    fn predict_proba(&self, values: &[Value<T>]) -> Result<T, PredictError> {
        let m = self.model.margin(values)?;
        Ok(logistic(T::from_f64_lossy(self.scale) * m))
    }
}

/// Full one-hot layout: one slot per continuous feature, one slot per
/// category (schema order, no reference category dropped).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneHotLayout {
    offsets: Vec<usize>,
    kinds: Vec<FeatureKind>,
    arity: Vec<usize>,
    width: usize,
}

impl OneHotLayout {
    pub fn new(schema: &[FeatureSchema]) -> Self {
        let mut offsets = Vec::with_capacity(schema.len());
        let mut width = 0;
        for f in schema {
            offsets.push(width);
            width += match f.kind {
                FeatureKind::Continuous => 1,
                FeatureKind::Categorical => f.categories.len(),
            };
        }
        Self {
            offsets,
            kinds: schema.iter().map(|f| f.kind).collect(),
            arity: schema.iter().map(|f| f.categories.len()).collect(),
            width,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn n_features(&self) -> usize {
        self.offsets.len()
    }

    pub fn encode<T: Scalar>(&self, values: &[Value<T>]) -> Result<Vec<T>, PredictError> {
        let mut out = vec![T::zero(); self.width];
        self.for_each_active(values, |slot, x| out[slot] = x)?;
        Ok(out)
    }

    /// Visits every non-zero encoded slot.
    fn for_each_active<T: Scalar>(&self, values: &[Value<T>], mut f: impl FnMut(usize, T)) -> Result<(), PredictError> {
        if values.len() != self.offsets.len() {
            return Err(PredictError::InvalidInstance(format!(
                "{} values for {} features",
                values.len(),
                self.offsets.len()
            )));
        }
        for (i, v) in values.iter().enumerate() {
            match (self.kinds[i], *v) {
                (FeatureKind::Continuous, Value::Num(x)) => f(self.offsets[i], x),
                (FeatureKind::Categorical, Value::Cat(c)) if c < self.arity[i] => f(self.offsets[i] + c, T::one()),
                _ => {
                    return Err(PredictError::InvalidInstance(format!(
                        "feature {i} has the wrong kind of value"
                    )))
                }
            }
        }
        Ok(())
    }
}

/// Coefficient file contents: `{"intercept": b, "weights": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub intercept: f64,
    pub weights: Vec<f64>,
}

impl Coefficients {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, PredictError> {
        Ok(serde_json::from_reader(File::open(path)?)?)
    }
}

/// `logistic(intercept + w . onehot(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel<T> {
    name: String,
    layout: OneHotLayout,
    intercept: T,
    weights: Vec<T>,
}

impl<T: Scalar> LinearModel<T> {
    pub fn new(schema: &[FeatureSchema], intercept: T, weights: Vec<T>) -> Result<Self, PredictError> {
        let layout = OneHotLayout::new(schema);
        if weights.len() != layout.width() {
            return Err(PredictError::ArityMismatch {
                expected: layout.width(),
                found: weights.len(),
            });
        }
        Ok(Self {
            name: "linear".to_string(),
            layout,
            intercept,
            weights,
        })
    }

    pub fn from_coefficients(schema: &[FeatureSchema], coef: &Coefficients) -> Result<Self, PredictError> {
        let weights = coef.weights.iter().map(|&w| T::from_f64_lossy(w)).collect();
        Self::new(schema, T::from_f64_lossy(coef.intercept), weights)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn intercept(&self) -> T {
        self.intercept
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn layout(&self) -> &OneHotLayout {
        &self.layout
    }

    pub fn coefficients(&self) -> Coefficients {
        Coefficients {
            intercept: self.intercept.to_f64_lossless(),
            weights: self.weights.iter().map(|w| w.to_f64_lossless()).collect(),
        }
    }

    /// Largest absolute weight touching one feature (the feature's own slot,
    /// or the max over its category slots).
    pub fn feature_weight(&self, feature: usize) -> T {
        let start = self.layout.offsets[feature];
        let end = self
            .layout
            .offsets
            .get(feature + 1)
            .copied()
            .unwrap_or(self.layout.width);
        self.weights[start..end]
            .iter()
            .fold(T::zero(), |acc, w| acc.max(w.abs()))
    }
}

impl<T: Scalar> MarginModel<T> for LinearModel<T> {
    fn margin(&self, values: &[Value<T>]) -> Result<T, PredictError> {
        let mut z = self.intercept;
        self.layout
            .for_each_active(values, |slot, x| z = z + self.weights[slot] * x)?;
        Ok(z)
    }
}

impl<T: Scalar> Predictor<T> for LinearModel<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn predict_proba(&self, values: &[Value<T>]) -> Result<T, PredictError> {
        Ok(logistic(self.margin(values)?))
    }
}

pub fn load_linear<T: Scalar>(
    path: impl AsRef<Path>,
    schema: &[FeatureSchema],
) -> Result<LinearModel<T>, PredictError> {
    LinearModel::from_coefficients(schema, &Coefficients::from_json_file(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            learning_rate: 0.1,
            seed: 0,
        }
    }
}

/// Full-batch gradient descent on the log-loss.
///
/// Encoded columns are standardised internally and the learned weights are
/// mapped back to raw feature units, so the returned model scores raw rows.
pub fn train_logistic<T: Scalar>(dataset: &Dataset<T>, config: &TrainConfig) -> Result<LinearModel<T>, PredictError> {
    if dataset.is_empty() {
        return Err(PredictError::EmptyDataset);
    }
    let positives = dataset.labels().iter().filter(|&&y| y == 1).count();
    if positives == 0 || positives == dataset.len() {
        return Err(PredictError::SingleClassDataset);
    }
    let layout = OneHotLayout::new(dataset.schema());
    let d = layout.width();
    let n = T::from_usize_lossy(dataset.len());

    let encoded: Vec<Vec<T>> = dataset
        .rows()
        .iter()
        .map(|r| layout.encode(&r.values))
        .collect::<Result<_, _>>()?;
    let mut center = vec![T::zero(); d];
    let mut scale = vec![T::zero(); d];
    for row in &encoded {
        for (c, &x) in center.iter_mut().zip(row) {
            *c = *c + x;
        }
    }
    center.iter_mut().for_each(|c| *c = *c / n);
    for row in &encoded {
        for j in 0..d {
            let dx = row[j] - center[j];
            scale[j] = scale[j] + dx * dx;
        }
    }
    // Constant columns get scale 0 and never move off zero weight.
    scale.iter_mut().for_each(|s| *s = (*s / n).sqrt());
    let z: Vec<Vec<T>> = encoded
        .iter()
        .map(|row| {
            (0..d)
                .map(|j| {
                    if scale[j] > T::zero() {
                        (row[j] - center[j]) / scale[j]
                    } else {
                        T::zero()
                    }
                })
                .collect()
        })
        .collect();
    let y: Vec<T> = dataset
        .labels()
        .iter()
        .map(|&l| T::from_usize_lossy(l as usize))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut w: Vec<T> = (0..d)
        .map(|j| {
            let r: f64 = rng.random_range(-0.01..0.01);
            if scale[j] > T::zero() {
                T::from_f64_lossy(r)
            } else {
                T::zero()
            }
        })
        .collect();
    let mut b = T::zero();
    let lr = T::from_f64_lossy(config.learning_rate);
    let mut grad = vec![T::zero(); d];
    for _ in 0..config.epochs {
        grad.iter_mut().for_each(|g| *g = T::zero());
        let mut grad_b = T::zero();
        for (row, &target) in z.iter().zip(&y) {
            let margin = row.iter().zip(&w).fold(b, |acc, (&x, &wj)| acc + x * wj);
            let err = logistic(margin) - target;
            grad_b = grad_b + err;
            for (g, &x) in grad.iter_mut().zip(row) {
                *g = *g + err * x;
            }
        }
        b = b - lr * grad_b / n;
        for (wj, &g) in w.iter_mut().zip(&grad) {
            *wj = *wj - lr * g / n;
        }
    }

    let mut intercept = b;
    let raw: Vec<T> = (0..d)
        .map(|j| {
            if scale[j] > T::zero() {
                let wj = w[j] / scale[j];
                intercept = intercept - wj * center[j];
                wj
            } else {
                T::zero()
            }
        })
        .collect();
    Ok(LinearModel::new(dataset.schema(), intercept, raw)?.with_name("logistic"))
}

/// Binary decision rule: positive iff `p >= threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionConfig<T> {
    pub threshold: T,
}

impl<T: Scalar> Default for DecisionConfig<T> {
    fn default() -> Self {
        Self {
            threshold: T::from_f64_lossy(0.5),
        }
    }
}

impl<T: Scalar> DecisionConfig<T> {
    pub fn new(threshold: T) -> Result<Self, PredictError> {
        if threshold > T::zero() && threshold < T::one() {
            Ok(Self { threshold })
        } else {
            Err(PredictError::InvalidThreshold(threshold.to_f64_lossless()))
        }
    }

    pub fn decide(&self, p: T) -> u8 {
        u8::from(p >= self.threshold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConfusionCell {
    TP,
    FP,
    TN,
    FN,
}

impl ConfusionCell {
    pub fn from_outcome(decision: u8, label: u8) -> Self {
        match (decision, label) {
            (1, 1) => ConfusionCell::TP,
            (1, _) => ConfusionCell::FP,
            (_, 1) => ConfusionCell::FN,
            _ => ConfusionCell::TN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionEntry<T> {
    pub probability: T,
    pub decision: u8,
    pub cell: ConfusionCell,
}

/// Per-row predictions under a fixed decision threshold; indexed by row_id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionCache<T> {
    pub threshold: T,
    pub entries: Vec<PredictionEntry<T>>,
}

impl<T: Scalar> PredictionCache<T> {
    pub fn build<P: Predictor<T> + ?Sized>(
        dataset: &Dataset<T>,
        predictor: &P,
        decision: &DecisionConfig<T>,
    ) -> Result<Self, PredictError> {
        let mut entries = Vec::with_capacity(dataset.len());
        for chunk in dataset.rows().chunks(1024) {
            let batch: Vec<Vec<Value<T>>> = chunk.iter().map(|r| r.values.clone()).collect();
            let probs = predictor.predict_batch(&batch)?;
            for (row, p) in chunk.iter().zip(probs) {
                check_probability(p)?;
                let d = decision.decide(p);
                entries.push(PredictionEntry {
                    probability: p,
                    decision: d,
                    cell: ConfusionCell::from_outcome(d, dataset.labels()[row.row_id]),
                });
            }
        }
        Ok(Self {
            threshold: decision.threshold,
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, row_id: usize) -> Option<&PredictionEntry<T>> {
        self.entries.get(row_id)
    }

    pub fn accuracy(&self) -> f64 {
        let m = confusion_matrix(self);
        (m.tp + m.tn) as f64 / m.total().max(1) as f64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

pub fn confusion_matrix<T: Scalar>(cache: &PredictionCache<T>) -> ConfusionMatrix {
    let mut m = ConfusionMatrix::default();
    for e in &cache.entries {
        match e.cell {
            ConfusionCell::TP => m.tp += 1,
            ConfusionCell::FP => m.fp += 1,
            ConfusionCell::TN => m.tn += 1,
            ConfusionCell::FN => m.fn_ += 1,
        }
    }
    m
}

fn check_probability<T: Scalar>(p: T) -> Result<(), PredictError> {
    if p >= T::zero() && p <= T::one() {
        Ok(())
    } else {
        Err(PredictError::OutOfRangeProbability(p.to_f64_lossless()))
    }
}

/// JSON wire format of the remote predictor protocol.
pub mod wire {
    use serde::{Deserialize, Serialize};

    use super::PredictError;
    use crate::data::{FeatureKind, FeatureSchema, Value};
    use crate::scalar::Scalar;

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct PredictRequest {
        pub instances: Vec<Vec<serde_json::Value>>,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct PredictResponse {
        pub probabilities: Vec<f64>,
    }

    /// Continuous cells become JSON numbers, categorical cells their labels.
    pub fn encode_request<T: Scalar>(schema: &[FeatureSchema], rows: &[Vec<Value<T>>]) -> PredictRequest {
        let instances = rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(schema)
                    .map(|(v, f)| match *v {
                        Value::Num(x) => serde_json::Value::from(x.to_f64_lossless()),
                        Value::Cat(c) => serde_json::Value::from(f.categories[c].clone()),
                    })
                    .collect()
            })
            .collect();
        PredictRequest { instances }
    }

    pub fn decode_instances<T: Scalar>(
        schema: &[FeatureSchema],
        request: &PredictRequest,
    ) -> Result<Vec<Vec<Value<T>>>, PredictError> {
        request
            .instances
            .iter()
            .map(|row| {
                if row.len() != schema.len() {
                    return Err(PredictError::InvalidInstance(format!(
                        "{} values for {} features",
                        row.len(),
                        schema.len()
                    )));
                }
                row.iter()
                    .zip(schema)
                    .map(|(cell, f)| match f.kind {
                        FeatureKind::Continuous => cell
                            .as_f64()
                            .map(|x| Value::Num(T::from_f64_lossy(x)))
                            .ok_or_else(|| PredictError::InvalidInstance(format!("`{}` needs a number", f.name))),
                        FeatureKind::Categorical => cell
                            .as_str()
                            .and_then(|s| f.category_index(s))
                            .map(Value::Cat)
                            .ok_or_else(|| {
                                PredictError::InvalidInstance(format!("`{}` needs a category label", f.name))
                            }),
                    })
                    .collect()
            })
            .collect()
    }

    /// Parses and validates a response body against the request size.
    pub fn decode_response(body: &[u8], expected: usize) -> Result<Vec<f64>, PredictError> {
        let resp: PredictResponse =
            serde_json::from_slice(body).map_err(|e| PredictError::MalformedResponse(e.to_string()))?;
        if resp.probabilities.len() != expected {
            return Err(PredictError::MalformedResponse(format!(
                "expected {expected} probabilities, got {}",
                resp.probabilities.len()
            )));
        }
        if let Some(&p) = resp.probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(PredictError::OutOfRangeProbability(p));
        }
        Ok(resp.probabilities)
    }
}

/// Calls an external model over HTTP (`POST` with a JSON batch).
pub struct RemotePredictor {
    name: String,
    endpoint: String,
    schema: Vec<FeatureSchema>,
    client: reqwest::blocking::Client,
    batch_size: usize,
}

impl RemotePredictor {
    pub fn new(endpoint: impl Into<String>, schema: Vec<FeatureSchema>) -> Result<Self, PredictError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| PredictError::TransportFailure(e.to_string()))?;
        let endpoint = endpoint.into();
        Ok(Self {
            name: format!("remote:{endpoint}"),
            endpoint,
            schema,
            client,
            batch_size: 4096,
        })
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size.max(1);
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn call<T: Scalar>(&self, rows: &[Vec<Value<T>>]) -> Result<Vec<T>, PredictError> {
        let body = wire::encode_request(&self.schema, rows);
        let resp = self
            .client
            .post(&self.endpoint)
            .json(&body)
            .send()
            .map_err(|e| PredictError::TransportFailure(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(PredictError::TransportFailure(format!("endpoint answered {status}")));
        }
        let bytes = resp
            .bytes()
            .map_err(|e| PredictError::TransportFailure(e.to_string()))?;
        Ok(wire::decode_response(&bytes, rows.len())?
            .into_iter()
            .map(T::from_f64_lossy)
            .collect())
    }
}

/// Order-aligned probabilities for a batch of instances.
pub fn remote_predict<T: Scalar>(
    predictor: &RemotePredictor,
    instances: &[Vec<Value<T>>],
) -> Result<Vec<T>, PredictError> {
    let mut out = Vec::with_capacity(instances.len());
    for chunk in instances.chunks(predictor.batch_size) {
        out.extend(predictor.call(chunk)?);
    }
    Ok(out)
}

impl<T: Scalar> Predictor<T> for RemotePredictor {
    fn name(&self) -> &str {
        &self.name
    }

    fn predict_proba(&self, values: &[Value<T>]) -> Result<T, PredictError> {
        let mut p = self.call(std::slice::from_ref(&values.to_vec()))?;
        p.pop()
            .ok_or_else(|| PredictError::MalformedResponse("empty response".into()))
    }

    fn predict_batch(&self, rows: &[Vec<Value<T>>]) -> Result<Vec<T>, PredictError> {
        remote_predict(self, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn one_feature() -> Vec<FeatureSchema> {
        vec![FeatureSchema::continuous("x")]
    }

    #[test]
    fn zero_model_is_half_everywhere() {
        let schema = vec![
            FeatureSchema::continuous("x"),
            FeatureSchema::categorical("c", ["a", "b"]),
        ];
        let m = LinearModel::<f64>::new(&schema, 0.0, vec![0.0; 3]).unwrap();
        for row in [[Value::Num(-5.0), Value::Cat(0)], [Value::Num(7.0), Value::Cat(1)]] {
            assert_eq!(m.predict_proba(&row).unwrap(), 0.5);
        }
    }

    #[test]
    fn closed_form_logistic() {
        let m = LinearModel::<f64>::new(&one_feature(), 0.0, vec![2.0]).unwrap();
        assert_relative_eq!(
            m.predict_proba(&[Value::Num(0.25)]).unwrap(),
            0.622_459_331_201_854_6,
            epsilon = 1e-15
        );
    }

    #[test]
    fn arity_mismatch() {
        let err = LinearModel::<f64>::new(&one_feature(), 0.0, vec![1.0, 2.0]).unwrap_err();
        assert!(matches!(err, PredictError::ArityMismatch { expected: 1, found: 2 }));
    }

    #[test]
    fn one_hot_layout_is_full_and_ordered() {
        let schema = vec![
            FeatureSchema::categorical("c", ["a", "b", "c"]),
            FeatureSchema::continuous("x"),
        ];
        let layout = OneHotLayout::new(&schema);
        assert_eq!(layout.width(), 4);
        assert_eq!(
            layout.encode(&[Value::Cat(1), Value::Num(2.5f64)]).unwrap(),
            vec![0.0, 1.0, 0.0, 2.5]
        );
        assert!(layout.encode(&[Value::Num(1.0f64), Value::Num(2.5)]).is_err());
    }

    #[test]
    fn training_separable_toy_set() {
        let ds = Dataset::from_numeric(["x"], vec![vec![-1.0], vec![1.0]], vec![0, 1]).unwrap();
        let m = train_logistic(&ds, &TrainConfig::default()).unwrap();
        assert!(m.weights()[0] > 0.0);
        let hi = m.predict_proba(&[Value::Num(1.0)]).unwrap();
        let lo = m.predict_proba(&[Value::Num(-1.0)]).unwrap();
        assert!(hi > 0.5 && 0.5 > lo);
    }

    #[test]
    fn training_is_seed_deterministic() {
        let ds = Dataset::from_numeric(
            ["x", "z"],
            vec![vec![-1.0, 3.0], vec![1.0, 2.0], vec![0.5, 0.0], vec![-0.2, 1.0]],
            vec![0, 1, 1, 0],
        )
        .unwrap();
        let a = train_logistic(&ds, &TrainConfig::default()).unwrap();
        let b = train_logistic(&ds, &TrainConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_class_rejected() {
        let ds = Dataset::from_numeric(["x"], vec![vec![-1.0], vec![1.0]], vec![1, 1]).unwrap();
        assert!(matches!(
            train_logistic(&ds, &TrainConfig::default()),
            Err(PredictError::SingleClassDataset)
        ));
    }

    struct FixedProbs(Vec<f64>);

    impl Predictor<f64> for FixedProbs {
        fn name(&self) -> &str {
            "fixed"
        }

        fn predict_proba(&self, values: &[Value<f64>]) -> Result<f64, PredictError> {
            // Row index is smuggled in the only feature.
            Ok(self.0[values[0].as_num().unwrap() as usize])
        }
    }

    #[test]
    fn confusion_cells_from_cache() {
        let ds = Dataset::from_numeric(["i"], (0..4).map(|i| vec![i as f64]).collect(), vec![1, 0, 1, 0]).unwrap();
        let p = FixedProbs(vec![0.9, 0.8, 0.2, 0.1]);
        let cache = PredictionCache::build(&ds, &p, &DecisionConfig::default()).unwrap();
        let m = confusion_matrix(&cache);
        assert_eq!(
            m,
            ConfusionMatrix {
                tp: 1,
                fp: 1,
                tn: 1,
                fn_: 1
            }
        );
        assert_eq!(m.total(), 4);
        assert_eq!(cache.entries[1].cell, ConfusionCell::FP);

        let perfect = FixedProbs(vec![0.9, 0.1, 0.7, 0.3]);
        let m = confusion_matrix(&PredictionCache::build(&ds, &perfect, &DecisionConfig::default()).unwrap());
        assert_eq!((m.fp, m.fn_), (0, 0));
    }

    #[test]
    fn threshold_validation_and_boundary() {
        assert!(DecisionConfig::new(0.0f64).is_err());
        assert!(DecisionConfig::new(1.0f64).is_err());
        let d = DecisionConfig::new(0.5f64).unwrap();
        assert_eq!(d.decide(0.5), 1);
        assert_eq!(d.decide(0.499_999), 0);
    }

    #[test]
    fn squashed_margin_wraps_svm_like_scores() {
        struct Svm;
        impl MarginModel<f64> for Svm {
            fn margin(&self, values: &[Value<f64>]) -> Result<f64, PredictError> {
                Ok(3.0 * values[0].as_num().unwrap() - 1.0)
            }
        }
        let p = SquashedMargin::new("svm", Svm, 1.0);
        assert_relative_eq!(p.predict_proba(&[Value::Num(1.0 / 3.0)]).unwrap(), 0.5);
        assert!(p.predict_proba(&[Value::Num(1.0)]).unwrap() > 0.5);
    }

    #[test]
    fn wire_response_validation() {
        assert_eq!(
            wire::decode_response(br#"{"probabilities":[0.5,0.25]}"#, 2).unwrap(),
            vec![0.5, 0.25]
        );
        assert!(matches!(
            wire::decode_response(br#"{"probabilities":[1.3]}"#, 1),
            Err(PredictError::OutOfRangeProbability(p)) if p == 1.3
        ));
        assert!(matches!(
            wire::decode_response(br#"{"probs":[0.1]}"#, 1),
            Err(PredictError::MalformedResponse(_))
        ));
        assert!(matches!(
            wire::decode_response(br#"{"probabilities":[0.1]}"#, 2),
            Err(PredictError::MalformedResponse(_))
        ));
    }

    #[test]
    fn wire_request_uses_labels_for_categories() {
        let schema = vec![
            FeatureSchema::continuous("x"),
            FeatureSchema::categorical("c", ["lo", "hi"]),
        ];
        let req = wire::encode_request(&schema, &[vec![Value::Num(0.1f64), Value::Cat(1)]]);
        assert_eq!(serde_json::to_string(&req).unwrap(), r#"{"instances":[[0.1,"hi"]]}"#);
        let back: Vec<Vec<Value<f64>>> = wire::decode_instances(&schema, &req).unwrap();
        assert_eq!(back, vec![vec![Value::Num(0.1), Value::Cat(1)]]);
    }
}
