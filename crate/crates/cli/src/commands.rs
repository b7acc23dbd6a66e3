//! Batch commands: ingest, train, explain, summarize and serve.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use cfscope_core::cohort::SortKey;
use cfscope_core::data::{load_csv, Dataset, SchemaSpec};
use cfscope_core::discretize::{DiscretizationScheme, FeatureBinning};
use cfscope_core::predictor::{confusion_matrix, train_logistic, PredictionCache, TrainConfig};
use cfscope_core::session::{CohortId, ConfigOverrides, ModelSpec, SampleCap, SchemaSource, SessionError, SessionSpec};
use cfscope_core::{AlgorithmConfig, DecisionConfig, FilterSet, Session, DEFAULT_BIN_COUNT};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::server::{self, AppState};

#[derive(Debug, Parser)]
#[command(
    name = "cfscope",
    version,
    about = "Counterfactual cohort analysis for binary tabular classifiers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a CSV against its schema and report the fitted bins.
    Ingest(DataArgs),
    /// Train the logistic baseline and write its coefficients.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        #[arg(long, default_value_t = 0.1)]
        learning_rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Coefficients output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate explanations for every row as JSON lines.
    Explain {
        #[command(flatten)]
        session: SessionArgs,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the full session document here.
        #[arg(long)]
        save_session: Option<PathBuf>,
    },
    /// Print cohort statistics and the feature comparison order.
    Summarize {
        #[command(flatten)]
        session: SessionArgs,
        /// Filter set JSON for cohort A (default: predicted positive).
        #[arg(long)]
        filter_a: Option<PathBuf>,
        /// Filter set JSON for cohort B (default: predicted negative).
        #[arg(long)]
        filter_b: Option<PathBuf>,
        #[arg(long, default_value = "median_difference")]
        sort: String,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory where sessions are persisted and restored from.
        #[arg(long)]
        session_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Schema descriptor JSON.
    #[arg(long)]
    pub schema: PathBuf,
}

#[derive(Debug, Args)]
pub struct SessionArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Linear coefficients JSON; the logistic baseline is trained otherwise.
    #[arg(long, conflicts_with = "remote")]
    pub model: Option<PathBuf>,
    /// URL of an external prediction endpoint.
    #[arg(long)]
    pub remote: Option<String>,
    /// Maximum number of changed features (w).
    #[arg(long, default_value_t = cfscope_core::engine::DEFAULT_MAX_CHANGED_FEATURES)]
    pub max_changes: usize,
    /// Maximum bin displacement per feature (l).
    #[arg(long, default_value_t = cfscope_core::engine::DEFAULT_MAX_BIN_DISPLACEMENT)]
    pub max_displacement: usize,
    /// Feature names the search may not change (repeatable).
    #[arg(long = "lock")]
    pub locked: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_BIN_COUNT)]
    pub bins: usize,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Explain a uniform sample of at most this many rows.
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub sample_seed: u64,
}

/// Failure classes mapped to process exit codes.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<SessionError> for CliError {
    fn from(e: SessionError) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn validation<E: Into<SessionError>>(e: E) -> CliError {
    e.into().into()
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json(value: &serde_json::Value) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Runtime(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn load(data: &DataArgs) -> Result<(SchemaSpec, Dataset<f64>), CliError> {
    let spec = SchemaSpec::from_json_file(&data.schema).map_err(validation)?;
    let dataset = load_csv(&data.data, &spec).map_err(validation)?;
    Ok((spec, dataset))
}

impl SessionArgs {
    fn spec(&self) -> Result<SessionSpec, CliError> {
        let schema = SchemaSpec::from_json_file(&self.data.schema).map_err(validation)?;
        let locked = self
            .locked
            .iter()
            .map(|name| {
                schema
                    .features
                    .iter()
                    .position(|f| &f.name == name)
                    .ok_or_else(|| CliError::Validation(format!("cannot lock unknown feature `{name}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let model = match (&self.model, &self.remote) {
            (Some(path), _) => ModelSpec::LinearFile { path: path.clone() },
            (None, Some(endpoint)) => ModelSpec::Remote {
                endpoint: endpoint.clone(),
                batch_size: None,
            },
            (None, None) => ModelSpec::default(),
        };
        Ok(SessionSpec {
            dataset: self.data.data.clone(),
            schema: SchemaSource::Inline(schema),
            model,
            config: ConfigOverrides {
                algorithm: Some(AlgorithmConfig::new(self.max_changes, self.max_displacement).with_locked(locked)),
                bin_count: Some(self.bins),
                threshold: Some(self.threshold),
                sample: self.sample.map(|max_rows| SampleCap {
                    max_rows,
                    seed: self.sample_seed,
                }),
            },
        })
    }

    fn session(&self) -> Result<Session, CliError> {
        Ok(Session::create(&self.spec()?)?)
    }
}

fn ingest(data: &DataArgs) -> Result<(), CliError> {
    let (_, dataset) = load(data)?;
    let scheme = DiscretizationScheme::fit(&dataset, DEFAULT_BIN_COUNT).map_err(validation)?;
    let positives = dataset.labels().iter().filter(|&&y| y == 1).count();
    let features: Vec<serde_json::Value> = dataset
        .schema()
        .iter()
        .zip(&scheme.features)
        .map(|(f, b)| match b {
            FeatureBinning::Continuous(bins) => json!({
                "name": f.name, "kind": "continuous", "mean": bins.mean, "std": bins.std,
                "inner_edges": bins.inner_edges,
            }),
            FeatureBinning::Degenerate { mean, .. } => json!({
                "name": f.name, "kind": "continuous", "mean": mean, "degenerate": true,
            }),
            FeatureBinning::Categorical { categories, .. } => json!({
                "name": f.name, "kind": "categorical", "categories": categories,
            }),
        })
        .collect();
    print_json(&json!({
        "rows": dataset.len(),
        "label_column": dataset.label_column(),
        "positive": { "label": dataset.positive_label_name(), "count": positives },
        "negative": { "label": dataset.negative_label_name(), "count": dataset.len() - positives },
        "features": features,
    }))
}

fn train(data: &DataArgs, config: TrainConfig, out: &Option<PathBuf>) -> Result<(), CliError> {
    let (_, dataset) = load(data)?;
    let model = train_logistic(&dataset, &config).map_err(validation)?;
    let cache = PredictionCache::build(&dataset, &model, &DecisionConfig::default()).map_err(validation)?;
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, &model.coefficients()).map_err(|e| CliError::Runtime(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    eprintln!(
        "trained logistic model: accuracy {:.4}, confusion {:?}",
        cache.accuracy(),
        confusion_matrix(&cache)
    );
    Ok(())
}

fn explain(args: &SessionArgs, out: &Option<PathBuf>, save: &Option<PathBuf>) -> Result<(), CliError> {
    let session = args.session()?;
    let mut w = output(out)?;
    session.write_explanations_jsonl(&mut w)?;
    if let Some(path) = save {
        session.save(path)?;
    }
    eprintln!(
        "{} explanations, success rate {:.4}, fingerprint {}",
        session.explanations().len(),
        session.success_rate(),
        session.fingerprint()
    );
    Ok(())
}

fn read_filter(path: &PathBuf) -> Result<FilterSet, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn summarize(
    args: &SessionArgs,
    filter_a: &Option<PathBuf>,
    filter_b: &Option<PathBuf>,
    sort: &str,
) -> Result<(), CliError> {
    let sort: SortKey = sort.parse().map_err(CliError::Validation)?;
    let mut session = args.session()?;
    for (cohort, path) in [(CohortId::A, filter_a), (CohortId::B, filter_b)] {
        if let Some(p) = path {
            session.set_filter(cohort, read_filter(p)?)?;
        }
    }
    let comparison = session.compare(sort)?;
    let names: Vec<&str> = session.dataset().schema().iter().map(|f| f.name.as_str()).collect();
    let cohort = |id: CohortId| -> Result<serde_json::Value, CliError> {
        let agg = session.aggregate(id)?;
        Ok(json!({
            "filter": session.filter(id),
            "size": session.cohort_rows(id)?.len(),
            "explained": agg.explained(),
            "unexplained": agg.unexplained,
        }))
    };
    print_json(&json!({
        "fingerprint": session.fingerprint(),
        "confusion": confusion_matrix(session.cache()),
        "success_rate": session.success_rate(),
        "cohorts": { "A": cohort(CohortId::A)?, "B": cohort(CohortId::B)? },
        "sort": sort,
        "order": comparison.order.iter().map(|&i| names[i]).collect::<Vec<_>>(),
        "scores": comparison.order.iter().map(|&i| comparison.scores[i]).collect::<Vec<_>>(),
        "summaries": { "A": comparison.a, "B": comparison.b },
    }))
}

fn serve(host: &str, port: u16, session_dir: &Option<PathBuf>) -> Result<(), CliError> {
    let state = AppState::new(session_dir.clone())?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    runtime
        .block_on(server::serve(state, &format!("{host}:{port}")))
        .map_err(|e| CliError::Runtime(format!("server: {e}")))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Ingest(data) => ingest(data),
        Command::Train {
            data,
            epochs,
            learning_rate,
            seed,
            out,
        } => train(
            data,
            TrainConfig {
                epochs: *epochs,
                learning_rate: *learning_rate,
                seed: *seed,
            },
            out,
        ),
        Command::Explain {
            session,
            out,
            save_session,
        } => explain(session, out, save_session),
        Command::Summarize {
            session,
            filter_a,
            filter_b,
            sort,
        } => summarize(session, filter_a, filter_b, sort),
        Command::Serve {
            port,
            host,
            session_dir,
        } => serve(host, *port, session_dir),
    }
}
