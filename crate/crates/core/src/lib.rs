//! Counterfactual explanations for binary tabular classifiers.
//!
//! The pipeline: load a dataset ([`data`]), score it with a black-box model
//! ([`predictor`]), bin continuous features with Gaussian-derived edges
//! ([`discretize`]), run a greedy bin-by-bin search for the smallest change
//! that flips each decision ([`engine`]), then slice rows into cohorts
//! ([`cohort`]) and count feature transitions per cohort ([`aggregate`]).
//! [`session`] ties the stages together and persists them.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`.

pub mod aggregate;
pub mod cohort;
pub mod data;
pub mod discretize;
pub mod engine;
pub mod export;
pub mod predictor;
pub mod scalar;
pub mod session;

pub use aggregate::{aggregate_transitions, explanation_detail, TransitionAggregate};
pub use cohort::{apply_filterset, bin_slice, sort_features, summarize_cohort, SortKey};
pub use data::{load_csv, read_csv, FeatureKind, FeatureSchema, SchemaSpec};
pub use discretize::DEFAULT_BIN_COUNT;
pub use engine::{
    generate_batch, generate_batch_parallel, generate_counterfactual, AlgorithmConfig, CandidateMove, StopReason,
};
pub use predictor::{train_logistic, Coefficients, ConfusionCell, ConfusionMatrix, Predictor, TrainConfig};
pub use scalar::Scalar;
pub use session::{CohortId, ConfigUpdate, ModelSpec, SessionError, SessionSpec};

pub type Value = data::Value<f64>;
pub type Instance = data::Instance<f64>;
pub type Dataset = data::Dataset<f64>;
pub type GaussianBins = discretize::GaussianBins<f64>;
pub type FeatureBinning = discretize::FeatureBinning<f64>;
pub type DiscretizationScheme = discretize::DiscretizationScheme<f64>;
pub type LinearModel = predictor::LinearModel<f64>;
pub type DecisionConfig = predictor::DecisionConfig<f64>;
pub type PredictionCache = predictor::PredictionCache<f64>;
pub type FeatureChange = engine::FeatureChange<f64>;
pub type TraceStep = engine::TraceStep<f64>;
pub type CounterfactualExplanation = engine::CounterfactualExplanation<f64>;
pub type FilterSet = cohort::FilterSet<f64>;
pub type RangeClause = cohort::RangeClause<f64>;
pub type CohortSummary = cohort::CohortSummary<f64>;
pub type FeatureSummary = cohort::FeatureSummary<f64>;
pub type Session = session::Session<f64>;

/// Single-precision variants.
pub mod f32 {
    pub type Dataset = crate::data::Dataset<f32>;
    pub type DiscretizationScheme = crate::discretize::DiscretizationScheme<f32>;
    pub type LinearModel = crate::predictor::LinearModel<f32>;
    pub type CounterfactualExplanation = crate::engine::CounterfactualExplanation<f32>;
    pub type Session = crate::session::Session<f32>;
}
