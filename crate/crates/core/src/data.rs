//! Dataset schema, CSV ingestion and row storage for binary-labelled tabular data.
//!
//! Rows are stored with categorical values as ordinals into the owning
//! feature's category list; continuous values are kept as scalars. Datasets
//! are immutable once built.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema descriptor is not valid JSON: {0}")]
    SchemaJson(#[from] serde_json::Error),
    #[error("column `{0}` is missing from the CSV header")]
    MissingColumn(String),
    #[error("row {row}: column `{column}` value `{value}` is not a finite number")]
    NonNumericContinuous { row: usize, column: String, value: String },
    #[error("row {row}: column `{column}` value `{value}` is not a declared category")]
    UnknownCategory { row: usize, column: String, value: String },
    #[error("row {row}: column `{column}` is empty")]
    MissingValue { row: usize, column: String },
    #[error("row {row}: label `{value}` is neither the positive nor the negative label")]
    UnknownLabel { row: usize, value: String },
    #[error("label column has more than two classes: {0:?}")]
    MultiClassLabel(Vec<String>),
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("feature `{0}` is declared more than once")]
    DuplicateFeature(String),
    #[error("categorical feature `{0}` needs at least two categories")]
    TooFewCategories(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("row {row}: {reason}")]
    InvalidRow { row: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Continuous,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub name: String,
    pub kind: FeatureKind,
    /// Ordered category labels; empty for continuous features.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display_unit: Option<String>,
}

impl FeatureSchema {
    pub fn continuous(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Continuous,
            categories: Vec::new(),
            display_unit: None,
        }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, categories: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Categorical,
            categories: categories.into_iter().map(Into::into).collect(),
            display_unit: None,
        }
    }

    pub fn is_continuous(&self) -> bool {
        self.kind == FeatureKind::Continuous
    }

    pub fn category_index(&self, label: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == label)
    }
}

/// One cell of an instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value<T> {
    Num(T),
    /// Ordinal into the feature's category list.
    Cat(usize),
}

impl<T: Scalar> Value<T> {
    pub fn as_num(&self) -> Option<T> {
        match *self {
            Value::Num(v) => Some(v),
            Value::Cat(_) => None,
        }
    }

    pub fn as_cat(&self) -> Option<usize> {
        match *self {
            Value::Cat(c) => Some(c),
            Value::Num(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T> {
    pub row_id: usize,
    pub values: Vec<Value<T>>,
}

/// Binary-labelled table. Labels are 1 for the positive class, 0 otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    schema: Vec<FeatureSchema>,
    rows: Vec<Instance<T>>,
    labels: Vec<u8>,
    label_column: String,
    positive_label_name: String,
    negative_label_name: String,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset after checking every schema and row invariant.
    pub fn new(
        schema: Vec<FeatureSchema>,
        rows: Vec<Vec<Value<T>>>,
        labels: Vec<u8>,
        label_column: impl Into<String>,
        positive_label_name: impl Into<String>,
        negative_label_name: impl Into<String>,
    ) -> Result<Self, DataError> {
        validate_schema(&schema)?;
        if rows.is_empty() {
            return Err(DataError::EmptyDataset);
        }
        if rows.len() != labels.len() {
            return Err(DataError::InvalidSchema(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        for (row, (values, &label)) in rows.iter().zip(&labels).enumerate() {
            if label > 1 {
                return Err(DataError::InvalidRow {
                    row,
                    reason: format!("label {label} is not 0 or 1"),
                });
            }
            check_values(&schema, values).map_err(|reason| DataError::InvalidRow { row, reason })?;
        }
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(row_id, values)| Instance { row_id, values })
            .collect();
        Ok(Self {
            schema,
            rows,
            labels,
            label_column: label_column.into(),
            positive_label_name: positive_label_name.into(),
            negative_label_name: negative_label_name.into(),
        })
    }

    /// All-continuous dataset, mostly for tests and small tools.
    pub fn from_numeric<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        rows: Vec<Vec<T>>,
        labels: Vec<u8>,
    ) -> Result<Self, DataError> {
        let schema = names.into_iter().map(FeatureSchema::continuous).collect();
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(Value::Num).collect())
            .collect();
        Self::new(schema, rows, labels, "label", "1", "0")
    }

    pub fn schema(&self) -> &[FeatureSchema] {
        &self.schema
    }

    pub fn feature(&self, index: usize) -> &FeatureSchema {
        &self.schema[index]
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|f| f.name == name)
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Instance<T>] {
        &self.rows
    }

    pub fn row(&self, row_id: usize) -> Option<&Instance<T>> {
        self.rows.get(row_id)
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label_column(&self) -> &str {
        &self.label_column
    }

    pub fn positive_label_name(&self) -> &str {
        &self.positive_label_name
    }

    pub fn negative_label_name(&self) -> &str {
        &self.negative_label_name
    }

    /// Column view of one feature, in row order.
    pub fn column(&self, feature: usize) -> impl Iterator<Item = Value<T>> + '_ {
        self.rows.iter().map(move |r| r.values[feature])
    }

    /// Continuous and categorical feature indices, each in schema order.
    pub fn split_feature_kinds(&self) -> (Vec<usize>, Vec<usize>) {
        split_feature_kinds(&self.schema)
    }

    /// Renders a cell the way it appears in CSV and wire payloads.
    pub fn value_json(&self, feature: usize, value: &Value<T>) -> serde_json::Value {
        match *value {
            Value::Num(v) => serde_json::Value::from(v.to_f64_lossless()),
            Value::Cat(c) => serde_json::Value::from(self.schema[feature].categories[c].clone()),
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DataError> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.schema.iter().map(|f| f.name.as_str()).collect();
        header.push(&self.label_column);
        out.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for (row, &label) in self.rows.iter().zip(&self.labels) {
            record.clear();
            for (f, v) in self.schema.iter().zip(&row.values) {
                record.push(match *v {
                    Value::Num(x) => x.to_string(),
                    Value::Cat(c) => f.categories[c].clone(),
                });
            }
            record.push(if label == 1 {
                self.positive_label_name.clone()
            } else {
                self.negative_label_name.clone()
            });
            out.write_record(&record)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn split_feature_kinds(schema: &[FeatureSchema]) -> (Vec<usize>, Vec<usize>) {
    (0..schema.len()).partition(|&i| schema[i].is_continuous())
}

fn validate_schema(schema: &[FeatureSchema]) -> Result<(), DataError> {
    let mut seen = HashSet::new();
    for f in schema {
        if !seen.insert(f.name.as_str()) {
            return Err(DataError::DuplicateFeature(f.name.clone()));
        }
        match f.kind {
            FeatureKind::Continuous if !f.categories.is_empty() => {
                return Err(DataError::InvalidSchema(format!(
                    "continuous feature `{}` carries a category list",
                    f.name
                )))
            }
            FeatureKind::Categorical => {
                let distinct: HashSet<_> = f.categories.iter().collect();
                if distinct.len() != f.categories.len() {
                    return Err(DataError::InvalidSchema(format!(
                        "categorical feature `{}` repeats a category",
                        f.name
                    )));
                }
                if distinct.len() < 2 {
                    return Err(DataError::TooFewCategories(f.name.clone()));
                }
            }
            _ => {}
        }
    }
    Ok(())
}

fn check_values<T: Scalar>(schema: &[FeatureSchema], values: &[Value<T>]) -> Result<(), String> {
    if values.len() != schema.len() {
        return Err(format!("{} values for {} features", values.len(), schema.len()));
    }
    for (f, v) in schema.iter().zip(values) {
        match (f.kind, v) {
            (FeatureKind::Continuous, Value::Num(x)) if x.is_finite() => {}
            (FeatureKind::Continuous, _) => {
                return Err(format!("`{}` needs a finite number", f.name));
            }
            (FeatureKind::Categorical, Value::Cat(c)) if *c < f.categories.len() => {}
            (FeatureKind::Categorical, _) => {
                return Err(format!("`{}` needs a valid category ordinal", f.name));
            }
        }
    }
    Ok(())
}

/// Schema descriptor read alongside a CSV file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaSpec {
    pub label_column: String,
    /// Raw label value mapped to class 1.
    pub positive_label: String,
    /// When given, every other label value is rejected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative_label: Option<String>,
    pub features: Vec<FeatureSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    /// Explicit category list; inferred from the data when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display_unit: Option<String>,
}

impl SchemaSpec {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, DataError> {
        let file = File::open(path)?;
        Ok(serde_json::from_reader(file)?)
    }
}

pub fn load_csv<T: Scalar>(path: impl AsRef<Path>, spec: &SchemaSpec) -> Result<Dataset<T>, DataError> {
    read_csv(File::open(path)?, spec)
}

/// Parses CSV text against a schema descriptor. Row order is preserved and
/// `row_id` is the 0-based data row position.
pub fn read_csv<T: Scalar, R: Read>(reader: R, spec: &SchemaSpec) -> Result<Dataset<T>, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    let column_of = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let label_col = column_of(&spec.label_column)?;
    let feature_cols = spec
        .features
        .iter()
        .map(|f| column_of(&f.name))
        .collect::<Result<Vec<_>, _>>()?;

    let mut raw: Vec<csv::StringRecord> = Vec::new();
    for record in rdr.records() {
        raw.push(record?);
    }
    if raw.is_empty() {
        return Err(DataError::EmptyDataset);
    }

    let mut schema = Vec::with_capacity(spec.features.len());
    for (f, &col) in spec.features.iter().zip(&feature_cols) {
        let categories = match (f.kind, &f.categories) {
            (FeatureKind::Continuous, _) => Vec::new(),
            (FeatureKind::Categorical, Some(explicit)) => explicit.clone(),
            (FeatureKind::Categorical, None) => {
                let observed: BTreeSet<&str> = raw
                    .iter()
                    .map(|r| r.get(col).unwrap_or("").trim())
                    .filter(|s| !s.is_empty())
                    .collect();
                order_categories(observed.into_iter().map(str::to_string).collect())
            }
        };
        schema.push(FeatureSchema {
            name: f.name.clone(),
            kind: f.kind,
            categories,
            display_unit: f.display_unit.clone(),
        });
    }
    validate_schema(&schema)?;

    let lookups: Vec<HashMap<&str, usize>> = schema
        .iter()
        .map(|f| f.categories.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect())
        .collect();

    let mut negative_name = spec.negative_label.clone();
    let mut rows = Vec::with_capacity(raw.len());
    let mut labels = Vec::with_capacity(raw.len());
    for (row, record) in raw.iter().enumerate() {
        let mut values = Vec::with_capacity(schema.len());
        for ((f, &col), lookup) in schema.iter().zip(&feature_cols).zip(&lookups) {
            let cell = record.get(col).unwrap_or("").trim();
            if cell.is_empty() {
                return Err(DataError::MissingValue {
                    row,
                    column: f.name.clone(),
                });
            }
            let value = match f.kind {
                FeatureKind::Continuous => match cell.parse::<T>() {
                    Ok(x) if x.is_finite() => Value::Num(x),
                    _ => {
                        return Err(DataError::NonNumericContinuous {
                            row,
                            column: f.name.clone(),
                            value: cell.to_string(),
                        })
                    }
                },
                FeatureKind::Categorical => match lookup.get(cell) {
                    Some(&c) => Value::Cat(c),
                    None => {
                        return Err(DataError::UnknownCategory {
                            row,
                            column: f.name.clone(),
                            value: cell.to_string(),
                        })
                    }
                },
            };
            values.push(value);
        }

        let label = record.get(label_col).unwrap_or("").trim();
        if label.is_empty() {
            return Err(DataError::MissingValue {
                row,
                column: spec.label_column.clone(),
            });
        }
        let class = if label == spec.positive_label {
            1
        } else {
            match negative_name.as_deref() {
                Some(neg) if neg == label => 0,
                Some(_) if spec.negative_label.is_some() => {
                    return Err(DataError::UnknownLabel {
                        row,
                        value: label.to_string(),
                    });
                }
                Some(neg) => {
                    return Err(DataError::MultiClassLabel(vec![
                        spec.positive_label.clone(),
                        neg.to_string(),
                        label.to_string(),
                    ]))
                }
                None => {
                    negative_name = Some(label.to_string());
                    0
                }
            }
        };
        rows.push(values);
        labels.push(class);
    }

    let negative_name = negative_name.unwrap_or_else(|| format!("not {}", spec.positive_label));
    Dataset::new(
        schema,
        rows,
        labels,
        spec.label_column.clone(),
        spec.positive_label.clone(),
        negative_name,
    )
}

/// Numeric-looking category sets sort numerically, everything else lexically.
fn order_categories(mut cats: Vec<String>) -> Vec<String> {
    let numeric: Option<Vec<f64>> = cats.iter().map(|c| c.parse::<f64>().ok()).collect();
    if let Some(keys) = numeric {
        let mut paired: Vec<(f64, String)> = keys.into_iter().zip(cats).collect();
        paired.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        paired.into_iter().map(|(_, c)| c).collect()
    } else {
        cats.sort();
        cats
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_spec() -> SchemaSpec {
        SchemaSpec {
            label_column: "y".into(),
            positive_label: "1".into(),
            negative_label: None,
            features: vec![FeatureSpec {
                name: "x".into(),
                kind: FeatureKind::Continuous,
                categories: None,
                display_unit: None,
            }],
        }
    }

    #[test]
    fn toy_file_keeps_row_order() {
        let ds: Dataset<f64> = read_csv("x,y\n1.0,0\n2.0,1\n3.0,1\n".as_bytes(), &toy_spec()).unwrap();
        assert_eq!(ds.len(), 3);
        let ids: Vec<_> = ds.rows().iter().map(|r| r.row_id).collect();
        assert_eq!(ids, vec![0, 1, 2]);
        let xs: Vec<_> = ds.column(0).map(|v| v.as_num().unwrap()).collect();
        assert_eq!(xs, vec![1.0, 2.0, 3.0]);
        assert_eq!(ds.labels(), &[0, 1, 1]);
        assert_eq!(ds.negative_label_name(), "0");
    }

    #[test]
    fn header_only_file_is_empty_dataset() {
        let err = read_csv::<f64, _>("x,y\n".as_bytes(), &toy_spec()).unwrap_err();
        assert!(matches!(err, DataError::EmptyDataset));
    }

    #[test]
    fn missing_column_is_named() {
        let err = read_csv::<f64, _>("z,y\n1,0\n".as_bytes(), &toy_spec()).unwrap_err();
        match err {
            DataError::MissingColumn(c) => assert_eq!(c, "x"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_and_missing_cells_are_rejected() {
        let err = read_csv::<f64, _>("x,y\nabc,0\n".as_bytes(), &toy_spec()).unwrap_err();
        assert!(matches!(err, DataError::NonNumericContinuous { row: 0, .. }));
        let err = read_csv::<f64, _>("x,y\nNaN,0\n".as_bytes(), &toy_spec()).unwrap_err();
        assert!(matches!(err, DataError::NonNumericContinuous { .. }));
        let err = read_csv::<f64, _>("x,y\n1,0\n,1\n".as_bytes(), &toy_spec()).unwrap_err();
        assert!(matches!(err, DataError::MissingValue { row: 1, .. }));
    }

    #[test]
    fn categories_inferred_or_enforced() {
        let mut spec = toy_spec();
        spec.features.push(FeatureSpec {
            name: "c".into(),
            kind: FeatureKind::Categorical,
            categories: None,
            display_unit: None,
        });
        let csv = "x,c,y\n1,10,0\n2,2,1\n3,2,1\n";
        let ds: Dataset<f64> = read_csv(csv.as_bytes(), &spec).unwrap();
        assert_eq!(ds.feature(1).categories, vec!["2", "10"]);
        assert_eq!(ds.rows()[0].values[1], Value::Cat(1));

        spec.features[1].categories = Some(vec!["2".into(), "3".into()]);
        let err = read_csv::<f64, _>(csv.as_bytes(), &spec).unwrap_err();
        assert!(matches!(err, DataError::UnknownCategory { row: 0, .. }));

        let err = read_csv::<f64, _>("x,c,y\n1,a,0\n2,a,1\n".as_bytes(), &{
            let mut s = spec.clone();
            s.features[1].categories = None;
            s
        })
        .unwrap_err();
        assert!(matches!(err, DataError::TooFewCategories(_)));
    }

    #[test]
    fn label_mapping() {
        let mut spec = toy_spec();
        spec.positive_label = "good".into();
        let ds: Dataset<f64> = read_csv("x,y\n1,good\n2,bad\n".as_bytes(), &spec).unwrap();
        assert_eq!(ds.labels(), &[1, 0]);
        assert_eq!(ds.negative_label_name(), "bad");

        let err = read_csv::<f64, _>("x,y\n1,good\n2,bad\n3,ugly\n".as_bytes(), &spec).unwrap_err();
        assert!(matches!(err, DataError::MultiClassLabel(_)));

        spec.negative_label = Some("bad".into());
        let err = read_csv::<f64, _>("x,y\n1,good\n3,ugly\n".as_bytes(), &spec).unwrap_err();
        assert!(matches!(err, DataError::UnknownLabel { row: 1, .. }));
    }

    #[test]
    fn split_kinds() {
        let schema = vec![
            FeatureSchema::continuous("a"),
            FeatureSchema::categorical("b", ["u", "v"]),
            FeatureSchema::continuous("c"),
        ];
        assert_eq!(split_feature_kinds(&schema), (vec![0, 2], vec![1]));
        let all: Vec<_> = (0..5).map(|i| FeatureSchema::continuous(format!("f{i}"))).collect();
        assert_eq!(split_feature_kinds(&all), (vec![0, 1, 2, 3, 4], vec![]));
    }

    #[test]
    fn duplicate_feature_names_rejected() {
        let err = Dataset::<f64>::from_numeric(["a", "a"], vec![vec![1.0, 2.0]], vec![1]).unwrap_err();
        assert!(matches!(err, DataError::DuplicateFeature(_)));
    }
}
