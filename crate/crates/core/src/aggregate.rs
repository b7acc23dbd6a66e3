//! Collapses per-row counterfactuals into per-feature bin transitions.
//!
//! Every change of every successful explanation lands in exactly one cell
//! `(feature, from, to)`, split by the row's original predicted class. Cells
//! keep the contributing row ids so a single arrow can be joined back to the
//! complete explanations behind it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{FeatureKind, FeatureSchema};
use crate::engine::{CounterfactualExplanation, StopReason};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AggregateError {
    #[error("explanations come from different schemes: {expected} vs {found}")]
    MixedScheme { expected: String, found: String },
    #[error("no explanation for row {0}")]
    UnknownRow(usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionCell {
    pub count: usize,
    pub explanation_ids: Vec<usize>,
}

/// Transitions of one origin class: feature -> (from, to) -> cell.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassTransitions {
    pub features: BTreeMap<usize, BTreeMap<(usize, usize), TransitionCell>>,
}

impl ClassTransitions {
    fn add(&mut self, feature: usize, transition: (usize, usize), row_id: usize) {
        let cell = self.features.entry(feature).or_default().entry(transition).or_default();
        cell.count += 1;
        cell.explanation_ids.push(row_id);
    }

    fn merge(&mut self, other: &ClassTransitions) {
        for (&f, cells) in &other.features {
            let mine = self.features.entry(f).or_default();
            for (&t, cell) in cells {
                let c = mine.entry(t).or_default();
                c.count += cell.count;
                c.explanation_ids.extend_from_slice(&cell.explanation_ids);
            }
        }
    }

    pub fn cell(&self, feature: usize, from: usize, to: usize) -> Option<&TransitionCell> {
        self.features.get(&feature)?.get(&(from, to))
    }

    pub fn feature_total(&self, feature: usize) -> usize {
        self.features
            .get(&feature)
            .map_or(0, |cells| cells.values().map(|c| c.count).sum())
    }

    pub fn total(&self) -> usize {
        self.features.keys().map(|&f| self.feature_total(f)).sum()
    }
}

/// Rows whose search did not flip the decision.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnexplainedTally {
    pub positive_origin: usize,
    pub negative_origin: usize,
    pub by_reason: BTreeMap<StopReason, usize>,
}

impl UnexplainedTally {
    pub fn total(&self) -> usize {
        self.positive_origin + self.negative_origin
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransitionAggregate {
    /// Shared fingerprint of the aggregated explanations; `None` when empty.
    pub fingerprint: Option<String>,
    pub positive_origin: ClassTransitions,
    pub negative_origin: ClassTransitions,
    pub unexplained: UnexplainedTally,
}

impl TransitionAggregate {
    /// Arrow count per feature over both origin classes.
    pub fn feature_total(&self, feature: usize) -> usize {
        self.positive_origin.feature_total(feature) + self.negative_origin.feature_total(feature)
    }

    pub fn explained(&self) -> usize {
        let mut ids: Vec<usize> = self
            .positive_origin
            .features
            .values()
            .chain(self.negative_origin.features.values())
            .flat_map(|cells| cells.values().flat_map(|c| c.explanation_ids.iter().copied()))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }

    /// Cell-wise sum; fails when the fingerprints disagree.
    pub fn merge(&mut self, other: &TransitionAggregate) -> Result<(), AggregateError> {
        match (&self.fingerprint, &other.fingerprint) {
            (Some(a), Some(b)) if a != b => {
                return Err(AggregateError::MixedScheme {
                    expected: a.clone(),
                    found: b.clone(),
                })
            }
            (None, Some(b)) => self.fingerprint = Some(b.clone()),
            _ => {}
        }
        self.positive_origin.merge(&other.positive_origin);
        self.negative_origin.merge(&other.negative_origin);
        self.unexplained.positive_origin += other.unexplained.positive_origin;
        self.unexplained.negative_origin += other.unexplained.negative_origin;
        for (&r, &n) in &other.unexplained.by_reason {
            *self.unexplained.by_reason.entry(r).or_default() += n;
        }
        Ok(())
    }

    pub fn opposition(&self) -> Vec<FeatureSymmetry> {
        opposition_report(&self.positive_origin, &self.negative_origin)
    }

    /// JSON shape: `{fingerprint, positive_origin: {feature: {"from→to": {count, ids}}}, ...}`.
    /// Continuous cells are labelled by bin index, categorical ones by label.
    pub fn to_json(&self, schema: &[FeatureSchema]) -> serde_json::Value {
        let side = |t: &ClassTransitions| {
            let mut out = serde_json::Map::new();
            for (&f, cells) in &t.features {
                let feature = &schema[f];
                let label = |c: usize| match feature.kind {
                    FeatureKind::Continuous => c.to_string(),
                    FeatureKind::Categorical => feature.categories[c].clone(),
                };
                let mut m = serde_json::Map::new();
                for (&(from, to), cell) in cells {
                    m.insert(
                        format!("{}→{}", label(from), label(to)),
                        serde_json::json!({ "count": cell.count, "ids": cell.explanation_ids }),
                    );
                }
                out.insert(feature.name.clone(), serde_json::Value::Object(m));
            }
            serde_json::Value::Object(out)
        };
        serde_json::json!({
            "fingerprint": self.fingerprint,
            "positive_origin": side(&self.positive_origin),
            "negative_origin": side(&self.negative_origin),
            "unexplained": self.unexplained,
        })
    }
}

pub fn aggregate_transitions<'a, T, I>(explanations: I) -> Result<TransitionAggregate, AggregateError>
where
    T: Scalar,
    I: IntoIterator<Item = &'a CounterfactualExplanation<T>>,
{
    let mut agg = TransitionAggregate::default();
    for e in explanations {
        match &agg.fingerprint {
            Some(fp) if *fp != e.fingerprint => {
                return Err(AggregateError::MixedScheme {
                    expected: fp.clone(),
                    found: e.fingerprint.clone(),
                })
            }
            None => agg.fingerprint = Some(e.fingerprint.clone()),
            _ => {}
        }
        if !e.success {
            if e.original_decision == 1 {
                agg.unexplained.positive_origin += 1;
            } else {
                agg.unexplained.negative_origin += 1;
            }
            *agg.unexplained.by_reason.entry(e.stop_reason).or_default() += 1;
            continue;
        }
        let side = if e.original_decision == 1 {
            &mut agg.positive_origin
        } else {
            &mut agg.negative_origin
        };
        for c in &e.changes {
            side.add(c.feature(), c.transition(), e.row_id);
        }
    }
    Ok(agg)
}

pub fn explanation_detail<T: Scalar>(
    row_id: usize,
    explanations: &[CounterfactualExplanation<T>],
) -> Result<&CounterfactualExplanation<T>, AggregateError> {
    explanations
        .iter()
        .find(|e| e.row_id == row_id)
        .ok_or(AggregateError::UnknownRow(row_id))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSymmetry {
    pub feature: usize,
    pub positive_mass: usize,
    pub negative_mass: usize,
    /// Share of positive-origin mass whose reverse transition appears on the
    /// negative side; `None` without positive-origin mass.
    pub positive_mirrored: Option<f64>,
    pub negative_mirrored: Option<f64>,
}

/// Per-feature share of transition mass whose exact reverse shows up for the
/// other origin class.
pub fn opposition_report(positive: &ClassTransitions, negative: &ClassTransitions) -> Vec<FeatureSymmetry> {
    let mirrored = |side: &BTreeMap<(usize, usize), TransitionCell>,
                    other: Option<&BTreeMap<(usize, usize), TransitionCell>>| {
        let mass: usize = side.values().map(|c| c.count).sum();
        let hit: usize = side
            .iter()
            .filter(|(&(from, to), _)| other.is_some_and(|o| o.get(&(to, from)).is_some_and(|c| c.count > 0)))
            .map(|(_, c)| c.count)
            .sum();
        (mass, (mass > 0).then(|| hit as f64 / mass as f64))
    };
    let empty = BTreeMap::new();
    let mut features: Vec<usize> = positive
        .features
        .keys()
        .chain(negative.features.keys())
        .copied()
        .collect();
    features.sort_unstable();
    features.dedup();
    features
        .into_iter()
        .map(|f| {
            let pos = positive.features.get(&f);
            let neg = negative.features.get(&f);
            let (positive_mass, positive_mirrored) = mirrored(pos.unwrap_or(&empty), neg);
            let (negative_mass, negative_mirrored) = mirrored(neg.unwrap_or(&empty), pos);
            FeatureSymmetry {
                feature: f,
                positive_mass,
                negative_mass,
                positive_mirrored,
                negative_mirrored,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{CandidateMove, FeatureChange, TraceStep};

    fn expl(row_id: usize, decision: u8, moves: &[(usize, usize, usize)]) -> CounterfactualExplanation<f64> {
        CounterfactualExplanation {
            row_id,
            fingerprint: "fp".into(),
            original_prob: if decision == 1 { 0.8 } else { 0.2 },
            original_decision: decision,
            success: !moves.is_empty(),
            stop_reason: if moves.is_empty() {
                StopReason::NoImprovement
            } else {
                StopReason::Flipped
            },
            changes: moves
                .iter()
                .map(|&(feature, from_bin, to_bin)| FeatureChange::Continuous {
                    feature,
                    from_bin,
                    to_bin,
                    from_value: 0.0,
                    to_value: 1.0,
                })
                .collect(),
            trace: moves
                .iter()
                .enumerate()
                .map(|(i, &(feature, from_bin, to_bin))| TraceStep {
                    step: i + 1,
                    candidate: CandidateMove::Bin {
                        feature,
                        from_bin,
                        to_bin,
                    },
                    probability: 0.5,
                    improvement: 0.1,
                })
                .collect(),
            final_prob: 0.5,
        }
    }

    #[test]
    fn empty_input_gives_empty_aggregate() {
        let agg = aggregate_transitions::<f64, _>(&[]).unwrap();
        assert_eq!(agg, TransitionAggregate::default());
        let failures = [expl(0, 0, &[]), expl(1, 1, &[])];
        let agg = aggregate_transitions(&failures).unwrap();
        assert_eq!(agg.positive_origin.total() + agg.negative_origin.total(), 0);
        assert_eq!(agg.unexplained.total(), 2);
        assert_eq!(agg.unexplained.by_reason[&StopReason::NoImprovement], 2);
    }

    #[test]
    fn shared_transition_counts_both_rows() {
        let es = [expl(4, 0, &[(2, 3, 4)]), expl(9, 0, &[(2, 3, 4), (0, 1, 2)])];
        let agg = aggregate_transitions(&es).unwrap();
        let cell = agg.negative_origin.cell(2, 3, 4).unwrap();
        assert_eq!(cell.count, 2);
        assert_eq!(cell.explanation_ids, vec![4, 9]);
        assert_eq!(agg.feature_total(0), 1);
        assert_eq!(agg.explained(), 2);
    }

    #[test]
    fn mixed_fingerprints_rejected() {
        let mut other = expl(1, 0, &[(0, 1, 2)]);
        other.fingerprint = "other".into();
        let es = [expl(0, 0, &[(0, 1, 2)]), other];
        assert!(matches!(
            aggregate_transitions(&es),
            Err(AggregateError::MixedScheme { .. })
        ));
    }

    #[test]
    fn merge_equals_concatenation() {
        let a = [expl(0, 0, &[(0, 1, 2)]), expl(1, 1, &[(1, 5, 4)])];
        let b = [expl(2, 0, &[(0, 1, 2), (1, 4, 5)]), expl(3, 1, &[])];
        let mut merged = aggregate_transitions(&a).unwrap();
        merged.merge(&aggregate_transitions(&b).unwrap()).unwrap();
        let all: Vec<_> = a.iter().chain(&b).cloned().collect();
        assert_eq!(merged, aggregate_transitions(&all).unwrap());
    }

    #[test]
    fn detail_lookup() {
        let es = vec![expl(3, 0, &[(1, 4, 5)]), expl(5, 1, &[])];
        assert_eq!(explanation_detail(3, &es).unwrap().changes.len(), 1);
        let failed = explanation_detail(5, &es).unwrap();
        assert!(failed.changes.is_empty());
        assert_eq!(failed.stop_reason, StopReason::NoImprovement);
        assert_eq!(explanation_detail(4, &es), Err(AggregateError::UnknownRow(4)));
    }

    #[test]
    fn opposition_extremes() {
        let mirrored = [expl(0, 1, &[(0, 5, 4)]), expl(1, 0, &[(0, 4, 5)])];
        let agg = aggregate_transitions(&mirrored).unwrap();
        let rep = agg.opposition();
        assert_eq!(rep.len(), 1);
        assert_eq!(rep[0].positive_mirrored, Some(1.0));
        assert_eq!(rep[0].negative_mirrored, Some(1.0));

        let disjoint = [expl(0, 1, &[(0, 5, 4)]), expl(1, 0, &[(0, 2, 3)])];
        let rep = aggregate_transitions(&disjoint).unwrap().opposition();
        assert_eq!(rep[0].positive_mirrored, Some(0.0));
        assert_eq!(rep[0].negative_mirrored, Some(0.0));

        let one_sided = [expl(0, 1, &[(0, 5, 4)])];
        let rep = aggregate_transitions(&one_sided).unwrap().opposition();
        assert_eq!(rep[0].negative_mirrored, None);
    }

    #[test]
    fn json_shape() {
        let schema = vec![
            FeatureSchema::continuous("x"),
            FeatureSchema::categorical("c", ["a", "b"]),
        ];
        let mut e = expl(7, 0, &[(0, 3, 4)]);
        e.changes.push(FeatureChange::Categorical {
            feature: 1,
            from_category: 0,
            to_category: 1,
        });
        let agg = aggregate_transitions(&[e]).unwrap();
        let j = agg.to_json(&schema);
        assert_eq!(j["negative_origin"]["x"]["3→4"]["count"], 1);
        assert_eq!(j["negative_origin"]["c"]["a→b"]["ids"][0], 7);
        assert_eq!(j["fingerprint"], "fp");
    }
}
