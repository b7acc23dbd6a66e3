//! Analysis sessions: one dataset, one model, one scheme and configuration,
//! two cohorts and the eagerly generated explanation store.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::aggregate::{aggregate_transitions, AggregateError, TransitionAggregate};
use crate::cohort::{
    apply_filterset, bin_slice, feature_scores, sort_features, summarize_cohort, CohortError, CohortSummary, FilterSet,
    SortKey,
};
use crate::data::{read_csv, DataError, Dataset, Instance, SchemaSpec};
use crate::discretize::{DiscretizationScheme, DiscretizeError, DEFAULT_BIN_COUNT};
use crate::engine::{fingerprint, generate_batch_parallel, AlgorithmConfig, CounterfactualExplanation, EngineError};
use crate::export;
use crate::predictor::{
    train_logistic, Coefficients, DecisionConfig, LinearModel, PredictError, PredictionCache, Predictor,
    RemotePredictor, TrainConfig,
};
use crate::scalar::Scalar;

/// Version tag of the persisted session document.
pub const SESSION_FORMAT: u32 = 1;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("dataset: {0}")]
    Data(#[from] DataError),
    #[error("model: {0}")]
    Predict(#[from] PredictError),
    #[error("discretizer: {0}")]
    Discretize(#[from] DiscretizeError),
    #[error("search: {0}")]
    Engine(#[from] EngineError),
    #[error("cohort: {0}")]
    Cohort(#[from] CohortError),
    #[error("aggregation: {0}")]
    Aggregate(#[from] AggregateError),
    #[error("i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("session document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("dataset content changed: expected sha256 {expected}, found {found}")]
    DatasetChanged { expected: String, found: String },
    #[error("stored fingerprint {stored} does not match recomputed {computed}")]
    FingerprintMismatch { stored: String, computed: String },
    #[error("invalid session input: {0}")]
    Invalid(String),
}

impl SessionError {
    /// Input problems (as opposed to runtime failures such as an unreachable
    /// model endpoint).
    pub fn is_validation(&self) -> bool {
        match self {
            SessionError::Data(DataError::Io(_)) | SessionError::Io { .. } => false,
            SessionError::Data(_)
            | SessionError::Discretize(_)
            | SessionError::Cohort(_)
            | SessionError::Json(_)
            | SessionError::DatasetChanged { .. }
            | SessionError::FingerprintMismatch { .. }
            | SessionError::Invalid(_) => true,
            SessionError::Engine(e) => matches!(e, EngineError::InvalidConfig(_) | EngineError::UnknownRow(_)),
            SessionError::Predict(e) => !matches!(
                e,
                PredictError::TransportFailure(_)
                    | PredictError::MalformedResponse(_)
                    | PredictError::OutOfRangeProbability(_)
                    | PredictError::Io(_)
            ),
            SessionError::Aggregate(_) | SessionError::UnknownSession(_) => false,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SessionError + '_ {
    move |source| SessionError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemaSource {
    Inline(SchemaSpec),
    Path(PathBuf),
}

impl SchemaSource {
    pub fn resolve(&self) -> Result<SchemaSpec, SessionError> {
        match self {
            SchemaSource::Inline(spec) => Ok(spec.clone()),
            SchemaSource::Path(p) => Ok(SchemaSpec::from_json_file(p)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    /// Coefficients file (`{"intercept": .., "weights": [..]}`) over the
    /// one-hot layout of the schema.
    LinearFile {
        path: PathBuf,
    },
    Linear {
        coefficients: Coefficients,
    },
    /// Logistic baseline trained on the session dataset.
    Logistic {
        #[serde(default)]
        train: TrainConfig,
    },
    Remote {
        endpoint: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        batch_size: Option<usize>,
    },
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Logistic {
            train: TrainConfig::default(),
        }
    }
}

/// Uniform row sample (fixed seed) restricting which rows get explained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCap {
    pub max_rows: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConfigOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<AlgorithmConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleCap>,
}

/// Everything needed to build a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSpec {
    pub dataset: PathBuf,
    pub schema: SchemaSource,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub config: ConfigOverrides,
}

/// Request body of a configuration update; absent fields keep their value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConfigUpdate {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<AlgorithmConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegenerationReport {
    pub previous_fingerprint: String,
    pub fingerprint: String,
    /// False when the submitted configuration equals the current one.
    pub regenerated: bool,
    pub explained_rows: usize,
    pub previous_success_rate: f64,
    pub success_rate: f64,
    pub success_rate_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CohortId {
    A,
    B,
}

impl CohortId {
    fn index(self) -> usize {
        match self {
            CohortId::A => 0,
            CohortId::B => 1,
        }
    }
}

impl FromStr for CohortId {
    type Err = SessionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(CohortId::A),
            "B" | "b" => Ok(CohortId::B),
            other => Err(SessionError::Invalid(format!("cohort must be A or B, got `{other}`"))),
        }
    }
}

impl fmt::Display for CohortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CohortId::A => "A",
            CohortId::B => "B",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison<T> {
    pub fingerprint: String,
    pub sort: SortKey,
    pub a: CohortSummary<T>,
    pub b: CohortSummary<T>,
    pub order: Vec<usize>,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DatasetRef {
    path: PathBuf,
    sha256: String,
    rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
struct Filters<T> {
    a: FilterSet<T>,
    b: FilterSet<T>,
}

/// Persisted form: the dataset is referenced by path and content hash,
/// everything derived from it is stored verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
struct SessionDocument<T> {
    format: u32,
    id: String,
    dataset: DatasetRef,
    schema: SchemaSpec,
    model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coefficients: Option<Coefficients>,
    threshold: T,
    bin_count: usize,
    algorithm: AlgorithmConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sample: Option<SampleCap>,
    filters: Filters<T>,
    fingerprint: String,
    scheme: DiscretizationScheme<T>,
    predictions: PredictionCache<T>,
    explained_rows: Vec<usize>,
    explanations: Vec<CounterfactualExplanation<T>>,
}

#[derive(Clone)]
pub struct Session<T: Scalar> {
    id: String,
    dataset_ref: DatasetRef,
    schema_spec: SchemaSpec,
    model_spec: ModelSpec,
    coefficients: Option<Coefficients>,
    dataset: Arc<Dataset<T>>,
    predictor: Arc<dyn Predictor<T>>,
    decision: DecisionConfig<T>,
    bin_count: usize,
    algorithm: AlgorithmConfig,
    sample: Option<SampleCap>,
    filters: [FilterSet<T>; 2],
    scheme: DiscretizationScheme<T>,
    cache: Arc<PredictionCache<T>>,
    explained_rows: Vec<usize>,
    explanations: Vec<CounterfactualExplanation<T>>,
    fingerprint: String,
}

impl<T: Scalar> fmt::Debug for Session<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Session")
            .field("id", &self.id)
            .field("dataset", &self.dataset_ref.path)
            .field("rows", &self.dataset.len())
            .field("predictor", &self.predictor.name())
            .field("fingerprint", &self.fingerprint)
            .finish_non_exhaustive()
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read_dataset<T: Scalar>(path: &Path, spec: &SchemaSpec) -> Result<(Dataset<T>, String), SessionError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    let hash = sha256_hex(&bytes);
    Ok((read_csv(bytes.as_slice(), spec)?, hash))
}

fn sampled_rows(n: usize, sample: Option<SampleCap>) -> Vec<usize> {
    match sample {
        Some(SampleCap { max_rows, seed }) if max_rows < n => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rows = rand::seq::index::sample(&mut rng, n, max_rows).into_vec();
            rows.sort_unstable();
            rows
        }
        _ => (0..n).collect(),
    }
}

fn success_rate<T>(explanations: &[CounterfactualExplanation<T>]) -> f64 {
    if explanations.is_empty() {
        return 0.0;
    }
    explanations.iter().filter(|e| e.success).count() as f64 / explanations.len() as f64
}

fn build_predictor<T: Scalar>(
    model: &ModelSpec,
    coefficients: Option<&Coefficients>,
    dataset: &Dataset<T>,
) -> Result<Arc<dyn Predictor<T>>, SessionError> {
    if let Some(coef) = coefficients {
        let name = match model {
            ModelSpec::Logistic { .. } => "logistic",
            _ => "linear",
        };
        return Ok(Arc::new(
            LinearModel::<T>::from_coefficients(dataset.schema(), coef)?.with_name(name),
        ));
    }
    match model {
        ModelSpec::Remote { endpoint, batch_size } => {
            let mut remote = RemotePredictor::new(endpoint.clone(), dataset.schema().to_vec())?;
            if let Some(b) = batch_size {
                remote = remote.with_batch_size(*b);
            }
            Ok(Arc::new(remote))
        }
        _ => Err(SessionError::Invalid("linear model without coefficients".into())),
    }
}

impl<T: Scalar> Session<T> {
    /// Loads the dataset, builds the model, fills the prediction cache, fits
    /// the scheme and generates every explanation.
    pub fn create(spec: &SessionSpec) -> Result<Self, SessionError> {
        let schema_spec = spec.schema.resolve()?;
        let (dataset, sha256) = read_dataset::<T>(&spec.dataset, &schema_spec)?;

        let coefficients = match &spec.model {
            ModelSpec::LinearFile { path } => Some(Coefficients::from_json_file(path)?),
            ModelSpec::Linear { coefficients } => Some(coefficients.clone()),
            ModelSpec::Logistic { train } => Some(train_logistic(&dataset, train)?.coefficients()),
            ModelSpec::Remote { .. } => None,
        };
        let predictor = build_predictor(&spec.model, coefficients.as_ref(), &dataset)?;

        let decision = match spec.config.threshold {
            Some(t) => DecisionConfig::new(T::from_f64_lossy(t))?,
            None => DecisionConfig::default(),
        };
        let bin_count = spec.config.bin_count.unwrap_or(DEFAULT_BIN_COUNT);
        let algorithm = spec.config.algorithm.clone().unwrap_or_default();
        algorithm.validate(dataset.n_features())?;
        if spec.config.sample.is_some_and(|s| s.max_rows == 0) {
            return Err(SessionError::Invalid("sample cap must keep at least one row".into()));
        }

        let cache = PredictionCache::build(&dataset, &*predictor, &decision)?;
        let scheme = DiscretizationScheme::fit(&dataset, bin_count)?;
        let explained_rows = sampled_rows(dataset.len(), spec.config.sample);
        let explanations =
            generate_batch_parallel(&dataset, &explained_rows, &*predictor, &scheme, &algorithm, &decision)?;
        let fingerprint = fingerprint(&scheme, &algorithm, &decision);

        Ok(Self {
            id: uuid::Uuid::new_v4().to_string(),
            dataset_ref: DatasetRef {
                path: spec.dataset.clone(),
                sha256,
                rows: dataset.len(),
            },
            schema_spec,
            model_spec: spec.model.clone(),
            coefficients,
            dataset: Arc::new(dataset),
            predictor,
            decision,
            bin_count,
            algorithm,
            sample: spec.config.sample,
            filters: [FilterSet::predicted_positive(), FilterSet::predicted_negative()],
            scheme,
            cache: Arc::new(cache),
            explained_rows,
            explanations,
            fingerprint,
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn dataset(&self) -> &Dataset<T> {
        &self.dataset
    }

    pub fn dataset_sha256(&self) -> &str {
        &self.dataset_ref.sha256
    }

    pub fn predictor(&self) -> &dyn Predictor<T> {
        &*self.predictor
    }

    pub fn coefficients(&self) -> Option<&Coefficients> {
        self.coefficients.as_ref()
    }

    pub fn decision(&self) -> DecisionConfig<T> {
        self.decision
    }

    pub fn scheme(&self) -> &DiscretizationScheme<T> {
        &self.scheme
    }

    pub fn algorithm(&self) -> &AlgorithmConfig {
        &self.algorithm
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    pub fn cache(&self) -> &PredictionCache<T> {
        &self.cache
    }

    /// Rows the explanation store covers (all rows unless sampling is on).
    pub fn explained_rows(&self) -> &[usize] {
        &self.explained_rows
    }

    /// Explanations in row_id order.
    pub fn explanations(&self) -> &[CounterfactualExplanation<T>] {
        &self.explanations
    }

    pub fn success_rate(&self) -> f64 {
        success_rate(&self.explanations)
    }

    /// Re-fits the scheme (when the bin count changes) and regenerates every
    /// explanation. Resubmitting the current configuration is a no-op.
    pub fn update_config(&mut self, update: &ConfigUpdate) -> Result<RegenerationReport, SessionError> {
        let algorithm = update.algorithm.clone().unwrap_or_else(|| self.algorithm.clone());
        let bin_count = update.bin_count.unwrap_or(self.bin_count);
        let previous_fingerprint = self.fingerprint.clone();
        let previous_success_rate = self.success_rate();
        if algorithm == self.algorithm && bin_count == self.bin_count {
            return Ok(RegenerationReport {
                previous_fingerprint: previous_fingerprint.clone(),
                fingerprint: previous_fingerprint,
                regenerated: false,
                explained_rows: self.explained_rows.len(),
                previous_success_rate,
                success_rate: previous_success_rate,
                success_rate_delta: 0.0,
            });
        }
        algorithm.validate(self.dataset.n_features())?;
        let scheme = if bin_count == self.bin_count {
            self.scheme.clone()
        } else {
            DiscretizationScheme::fit(&self.dataset, bin_count)?
        };
        let explanations = generate_batch_parallel(
            &self.dataset,
            &self.explained_rows,
            &*self.predictor,
            &scheme,
            &algorithm,
            &self.decision,
        )?;
        // Commit only after every fallible step succeeded.
        self.fingerprint = fingerprint(&scheme, &algorithm, &self.decision);
        self.scheme = scheme;
        self.algorithm = algorithm;
        self.bin_count = bin_count;
        self.explanations = explanations;
        let rate = self.success_rate();
        Ok(RegenerationReport {
            previous_fingerprint,
            fingerprint: self.fingerprint.clone(),
            regenerated: true,
            explained_rows: self.explained_rows.len(),
            previous_success_rate,
            success_rate: rate,
            success_rate_delta: rate - previous_success_rate,
        })
    }

    pub fn filter(&self, cohort: CohortId) -> &FilterSet<T> {
        &self.filters[cohort.index()]
    }

    /// Replaces a cohort's filter; explanations are untouched.
    pub fn set_filter(&mut self, cohort: CohortId, filter: FilterSet<T>) -> Result<(), SessionError> {
        filter.validate(&self.dataset)?;
        self.filters[cohort.index()] = filter;
        Ok(())
    }

    pub fn cohort_rows(&self, cohort: CohortId) -> Result<Vec<usize>, SessionError> {
        Ok(apply_filterset(&self.dataset, &self.cache, self.filter(cohort))?)
    }

    pub fn cohort_summary(&self, cohort: CohortId) -> Result<(Vec<usize>, CohortSummary<T>), SessionError> {
        let rows = self.cohort_rows(cohort)?;
        let summary = summarize_cohort(&rows, &self.dataset, &self.scheme)?;
        Ok((rows, summary))
    }

    /// Stored explanations of the cohort's rows, in row_id order.
    pub fn cohort_explanations(&self, cohort: CohortId) -> Result<Vec<&CounterfactualExplanation<T>>, SessionError> {
        let rows = self.cohort_rows(cohort)?;
        Ok(self.explanations_for(&rows))
    }

    fn explanations_for(&self, sorted_rows: &[usize]) -> Vec<&CounterfactualExplanation<T>> {
        self.explanations
            .iter()
            .filter(|e| sorted_rows.binary_search(&e.row_id).is_ok())
            .collect()
    }

    pub fn aggregate(&self, cohort: CohortId) -> Result<TransitionAggregate, SessionError> {
        let mut agg = aggregate_transitions(self.cohort_explanations(cohort)?)?;
        agg.fingerprint.get_or_insert_with(|| self.fingerprint.clone());
        Ok(agg)
    }

    pub fn compare(&self, sort: SortKey) -> Result<Comparison<T>, SessionError> {
        let (_, a) = self.cohort_summary(CohortId::A)?;
        let (_, b) = self.cohort_summary(CohortId::B)?;
        let (agg_a, agg_b) = (self.aggregate(CohortId::A)?, self.aggregate(CohortId::B)?);
        let aggs = Some((&agg_a, &agg_b));
        Ok(Comparison {
            fingerprint: self.fingerprint.clone(),
            sort,
            order: sort_features(&a, &b, aggs, &self.scheme, sort),
            scores: feature_scores(&a, &b, aggs, &self.scheme, sort),
            a,
            b,
        })
    }

    pub fn explanation(&self, row_id: usize) -> Result<&CounterfactualExplanation<T>, SessionError> {
        self.explanations
            .binary_search_by_key(&row_id, |e| e.row_id)
            .map(|i| &self.explanations[i])
            .map_err(|_| AggregateError::UnknownRow(row_id).into())
    }

    pub fn slice(&self, cohort: CohortId, feature: usize, bin: usize) -> Result<Vec<&Instance<T>>, SessionError> {
        let rows = self.cohort_rows(cohort)?;
        Ok(bin_slice(&rows, &self.dataset, &self.scheme, feature, bin)?)
    }

    pub fn write_explanations_jsonl<W: Write>(&self, writer: W) -> std::io::Result<()> {
        export::write_jsonl(self.dataset.schema(), &self.explanations, writer)
    }

    pub fn explanations_jsonl(&self) -> String {
        export::to_jsonl_string(self.dataset.schema(), &self.explanations)
    }

    fn document(&self) -> SessionDocument<T> {
        SessionDocument {
            format: SESSION_FORMAT,
            id: self.id.clone(),
            dataset: self.dataset_ref.clone(),
            schema: self.schema_spec.clone(),
            model: self.model_spec.clone(),
            coefficients: self.coefficients.clone(),
            threshold: self.decision.threshold,
            bin_count: self.bin_count,
            algorithm: self.algorithm.clone(),
            sample: self.sample,
            filters: Filters {
                a: self.filters[0].clone(),
                b: self.filters[1].clone(),
            },
            fingerprint: self.fingerprint.clone(),
            scheme: self.scheme.clone(),
            predictions: (*self.cache).clone(),
            explained_rows: self.explained_rows.clone(),
            explanations: self.explanations.clone(),
        }
    }

    pub fn to_json_bytes(&self) -> Result<Vec<u8>, SessionError> {
        let mut bytes = serde_json::to_vec_pretty(&self.document())?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SessionError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_bytes()?).map_err(io_err(path))
    }

    /// Restores a saved session. The dataset must still hash to the stored
    /// digest; the model is rebuilt from stored coefficients (or the remote
    /// endpoint) without retraining.
    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self, SessionError> {
        let doc: SessionDocument<T> = serde_json::from_slice(bytes)?;
        if doc.format != SESSION_FORMAT {
            return Err(SessionError::Invalid(format!(
                "unsupported session format {}",
                doc.format
            )));
        }
        let (dataset, sha256) = read_dataset::<T>(&doc.dataset.path, &doc.schema)?;
        if sha256 != doc.dataset.sha256 {
            return Err(SessionError::DatasetChanged {
                expected: doc.dataset.sha256,
                found: sha256,
            });
        }
        let decision = DecisionConfig::new(doc.threshold)?;
        let computed = fingerprint(&doc.scheme, &doc.algorithm, &decision);
        if computed != doc.fingerprint {
            return Err(SessionError::FingerprintMismatch {
                stored: doc.fingerprint,
                computed,
            });
        }
        if doc.predictions.len() != dataset.len() {
            return Err(SessionError::Invalid(
                "stored predictions do not cover the dataset".into(),
            ));
        }
        if let Some(e) = doc.explanations.iter().find(|e| e.fingerprint != doc.fingerprint) {
            return Err(SessionError::FingerprintMismatch {
                stored: doc.fingerprint,
                computed: e.fingerprint.clone(),
            });
        }
        doc.filters.a.validate(&dataset)?;
        doc.filters.b.validate(&dataset)?;
        let predictor = build_predictor(&doc.model, doc.coefficients.as_ref(), &dataset)?;
        Ok(Self {
            id: doc.id,
            dataset_ref: doc.dataset,
            schema_spec: doc.schema,
            model_spec: doc.model,
            coefficients: doc.coefficients,
            dataset: Arc::new(dataset),
            predictor,
            decision,
            bin_count: doc.bin_count,
            algorithm: doc.algorithm,
            sample: doc.sample,
            filters: [doc.filters.a, doc.filters.b],
            scheme: doc.scheme,
            cache: Arc::new(doc.predictions),
            explained_rows: doc.explained_rows,
            explanations: doc.explanations,
            fingerprint: doc.fingerprint,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SessionError> {
        let path = path.as_ref();
        Self::from_json_bytes(&std::fs::read(path).map_err(io_err(path))?)
    }

    /// Feature schema, scheme and fingerprint as one JSON view.
    pub fn schema_view(&self) -> serde_json::Value {
        serde_json::json!({
            "fingerprint": self.fingerprint,
            "label_column": self.dataset.label_column(),
            "positive_label": self.dataset.positive_label_name(),
            "negative_label": self.dataset.negative_label_name(),
            "features": self.dataset.schema(),
            "scheme": self.scheme,
            "threshold": self.decision.threshold.to_f64_lossless(),
            "algorithm": self.algorithm,
            "predictor": self.predictor.name(),
        })
    }
}
