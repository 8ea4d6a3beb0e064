//! JSON scenario documents read by the command-line tool.
//!
//! ```json
//! {
//!   "scenario": {
//!     "settings_a": ["0"], "settings_b": ["0"],
//!     "outcomes_a": ["up", "down"], "outcomes_b": ["up", "down"],
//!     "context": {"source": "singlet"}
//!   },
//!   "table": [0.0, 0.5, 0.5, 0.0]
//! }
//! ```
//!
//! `table` is dense and row-major, a-major then b then A then B. A
//! hidden-variable model replaces `table` with
//! `"lambdas": [{"weight": w, "table": [...]}, ...]`. An optional
//! `"timeline": [{"t", "x", "role", "label"}]` and `"region3": [lo, hi]`
//! describe the spacetime layout.

use serde::{Deserialize, Serialize};

use crate::behavior::{Behavior, HiddenVariableModel, Scenario};
use crate::spacetime::Event;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaEntry {
    pub weight: f64,
    pub table: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<LambdaEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeline: Option<Vec<Event>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region3: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelInput {
    Behavior(Behavior),
    Model(HiddenVariableModel),
}

impl ModelInput {
    /// The λ-level view: a behavior becomes a model with empty λ.
    pub fn into_model(self) -> HiddenVariableModel {
        match self {
            ModelInput::Behavior(b) => HiddenVariableModel::lambda_free(b),
            ModelInput::Model(m) => m,
        }
    }
}

impl ScenarioDocument {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_behavior(b: &Behavior) -> Self {
        Self {
            scenario: Some(b.scenario().clone()),
            table: Some(b.table().to_vec()),
            ..Self::default()
        }
    }

    pub fn from_model(m: &HiddenVariableModel) -> Self {
        Self {
            scenario: Some(m.scenario().clone()),
            lambdas: Some(
                m.lambdas()
                    .iter()
                    .map(|l| LambdaEntry {
                        weight: l.weight,
                        table: l.conditional.table().to_vec(),
                    })
                    .collect(),
            ),
            ..Self::default()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn model_input(&self) -> Result<ModelInput> {
        let scenario = self
            .scenario
            .clone()
            .ok_or_else(|| Error::Parse("missing field `scenario`".into()))?;
        scenario.validate()?;
        match (&self.table, &self.lambdas) {
            (Some(t), None) => Ok(ModelInput::Behavior(Behavior::new(scenario, t.clone())?)),
            (None, Some(ls)) => {
                let lambdas = ls
                    .iter()
                    .map(|l| Ok((l.weight, Behavior::new(scenario.clone(), l.table.clone())?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ModelInput::Model(HiddenVariableModel::new(lambdas)?))
            }
            (Some(_), Some(_)) => Err(Error::Parse(
                "give either `table` or `lambdas`, not both".into(),
            )),
            (None, None) => Err(Error::Parse("missing field `table` or `lambdas`".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINGLET: &str = r#"{
        "scenario": {"settings_a": ["0"], "settings_b": ["0"],
                     "outcomes_a": ["up", "down"], "outcomes_b": ["up", "down"],
                     "context": {"source": "singlet"}},
        "table": [0.0, 0.5, 0.5, 0.0]
    }"#;

    #[test]
    fn parses_behavior() {
        let doc = ScenarioDocument::parse(SINGLET).unwrap();
        match doc.model_input().unwrap() {
            ModelInput::Behavior(b) => assert_eq!(b.p(0, 0, 0, 1), 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parses_lambdas() {
        let text = r#"{
            "scenario": {"settings_a": ["x"], "settings_b": ["y"],
                         "outcomes_a": ["+", "-"], "outcomes_b": ["+", "-"]},
            "lambdas": [{"weight": 0.5, "table": [0, 1, 0, 0]},
                        {"weight": 0.5, "table": [0, 0, 1, 0]}]
        }"#;
        let m = ScenarioDocument::parse(text).unwrap().model_input().unwrap().into_model();
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn truncated_input_reports_position() {
        let err = ScenarioDocument::parse(&SINGLET[..60]).unwrap_err();
        match err {
            Error::Parse(msg) => assert!(msg.contains("line"), "{msg}"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn unknown_field_rejected() {
        let err = ScenarioDocument::parse(r#"{"tabel": []}"#).unwrap_err();
        assert!(matches!(err, Error::Parse(m) if m.contains("tabel")));
    }

    #[test]
    fn invalid_table_reported() {
        let doc = ScenarioDocument::parse(&SINGLET.replace("0.5, 0.5", "0.5, 0.4")).unwrap();
        assert!(matches!(doc.model_input(), Err(Error::Normalization { .. })));
    }

    #[test]
    fn behavior_round_trip() {
        let doc = ScenarioDocument::parse(SINGLET).unwrap();
        let again = ScenarioDocument::parse(&doc.to_json().unwrap()).unwrap();
        assert_eq!(doc, again);
    }
}
