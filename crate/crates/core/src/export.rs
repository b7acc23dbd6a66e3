//! JSON-lines export of explanations, labelled with feature names.

use std::io::{self, Write};

use serde_json::{json, Map, Value as Json};

use crate::data::FeatureSchema;
use crate::engine::{CandidateMove, CounterfactualExplanation, FeatureChange};
use crate::scalar::Scalar;

fn category(schema: &[FeatureSchema], feature: usize, ordinal: usize) -> Json {
    schema[feature]
        .categories
        .get(ordinal)
        .map_or(Json::from(ordinal), |c| Json::from(c.as_str()))
}

fn feature_fields(schema: &[FeatureSchema], feature: usize) -> Map<String, Json> {
    let mut m = Map::new();
    m.insert("feature".into(), json!(schema[feature].name));
    m.insert("feature_index".into(), json!(feature));
    m
}

fn change_record<T: Scalar>(schema: &[FeatureSchema], change: &FeatureChange<T>) -> Json {
    let mut m = feature_fields(schema, change.feature());
    match *change {
        FeatureChange::Continuous {
            from_bin,
            to_bin,
            from_value,
            to_value,
            ..
        } => {
            m.insert("from_bin".into(), json!(from_bin));
            m.insert("to_bin".into(), json!(to_bin));
            m.insert("from_value".into(), json!(from_value.to_f64_lossless()));
            m.insert("to_value".into(), json!(to_value.to_f64_lossless()));
        }
        FeatureChange::Categorical {
            feature,
            from_category,
            to_category,
        } => {
            m.insert("from_category".into(), category(schema, feature, from_category));
            m.insert("to_category".into(), category(schema, feature, to_category));
        }
    }
    Json::Object(m)
}

fn move_fields(schema: &[FeatureSchema], candidate: &CandidateMove) -> Map<String, Json> {
    let mut m = feature_fields(schema, candidate.feature());
    match *candidate {
        CandidateMove::Bin { from_bin, to_bin, .. } => {
            m.insert("from_bin".into(), json!(from_bin));
            m.insert("to_bin".into(), json!(to_bin));
        }
        CandidateMove::Category {
            feature,
            from_category,
            to_category,
        } => {
            m.insert("from_category".into(), category(schema, feature, from_category));
            m.insert("to_category".into(), category(schema, feature, to_category));
        }
    }
    m
}

/// One export object: row_id, success, stop_reason, probabilities, net
/// changes and the step trace.
pub fn explanation_record<T: Scalar>(schema: &[FeatureSchema], e: &CounterfactualExplanation<T>) -> Json {
    let trace: Vec<Json> = e
        .trace
        .iter()
        .map(|s| {
            let mut m = Map::new();
            m.insert("step".into(), json!(s.step));
            m.extend(move_fields(schema, &s.candidate));
            m.insert("probability".into(), json!(s.probability.to_f64_lossless()));
            m.insert("improvement".into(), json!(s.improvement.to_f64_lossless()));
            Json::Object(m)
        })
        .collect();
    json!({
        "row_id": e.row_id,
        "fingerprint": e.fingerprint,
        "success": e.success,
        "stop_reason": e.stop_reason,
        "original_prob": e.original_prob.to_f64_lossless(),
        "original_decision": e.original_decision,
        "final_prob": e.final_prob.to_f64_lossless(),
        "changes": e.changes.iter().map(|c| change_record(schema, c)).collect::<Vec<_>>(),
        "trace": trace,
    })
}

/// Writes one JSON object per line, in the order given.
pub fn write_jsonl<'a, T, W, I>(schema: &[FeatureSchema], explanations: I, mut writer: W) -> io::Result<()>
where
    T: Scalar,
    W: Write,
    I: IntoIterator<Item = &'a CounterfactualExplanation<T>>,
{
    for e in explanations {
        serde_json::to_writer(&mut writer, &explanation_record(schema, e))?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn to_jsonl_string<'a, T, I>(schema: &[FeatureSchema], explanations: I) -> String
where
    T: Scalar,
    I: IntoIterator<Item = &'a CounterfactualExplanation<T>>,
{
    let mut buf = Vec::new();
    write_jsonl(schema, explanations, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{StopReason, TraceStep};

    #[test]
    fn record_shape() {
        let schema = vec![
            FeatureSchema::continuous("x"),
            FeatureSchema::categorical("c", ["lo", "hi"]),
        ];
        let e = CounterfactualExplanation {
            row_id: 7,
            fingerprint: "abc".into(),
            original_prob: 0.4,
            original_decision: 0,
            success: true,
            stop_reason: StopReason::Flipped,
            changes: vec![
                FeatureChange::Continuous {
                    feature: 0,
                    from_bin: 4,
                    to_bin: 5,
                    from_value: -0.1,
                    to_value: 0.25,
                },
                FeatureChange::Categorical {
                    feature: 1,
                    from_category: 0,
                    to_category: 1,
                },
            ],
            trace: vec![TraceStep {
                step: 1,
                candidate: CandidateMove::Category {
                    feature: 1,
                    from_category: 0,
                    to_category: 1,
                },
                probability: 0.6,
                improvement: 0.2,
            }],
            final_prob: 0.6,
        };
        let text = to_jsonl_string(&schema, [&e]);
        assert!(text.ends_with('\n'));
        assert_eq!(text.lines().count(), 1);
        let v: Json = serde_json::from_str(text.trim_end()).unwrap();
        assert_eq!(v["row_id"], 7);
        assert_eq!(v["stop_reason"], "flipped");
        assert_eq!(v["changes"][0]["feature"], "x");
        assert_eq!(v["changes"][0]["to_bin"], 5);
        assert_eq!(v["changes"][0]["to_value"], 0.25);
        assert_eq!(v["changes"][1]["from_category"], "lo");
        assert_eq!(v["changes"][1]["to_category"], "hi");
        assert!(v["changes"][1].get("from_value").is_none());
        assert_eq!(v["trace"][0]["step"], 1);
        assert_eq!(v["trace"][0]["to_category"], "hi");
    }
}
