//! Bipartite probabilistic models: observable behaviors `P(A,B|a,b)` and
//! finite hidden-variable ensembles over them.

mod sign;

pub use sign::{sign_model, SignModelRun};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::par;
use crate::qstate::{born_joint, Spin, SpinOutcome, StateVector};
use crate::{Error, Result, ALGEBRAIC_TOL};

/// Labels used for the two rotated-spin outcomes.
pub const SPIN_OUTCOMES: [&str; 2] = ["up", "down"];

/// Setting and outcome alphabets of a two-party experiment.
///
/// `context` carries free-form descriptions of the experimental set-up; it is
/// inert metadata and never averaged over. `parallel` lists `(a, b)` index
/// pairs whose settings are physically identical (used by the determinism
/// reduction and the three-setting inequality).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub settings_a: Vec<String>,
    pub settings_b: Vec<String>,
    pub outcomes_a: Vec<String>,
    pub outcomes_b: Vec<String>,
    #[serde(default)]
    pub context: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parallel: Vec<(usize, usize)>,
}

fn check_alphabet(name: &str, labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::InvalidScenario(format!("{name} is empty")));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::InvalidScenario(format!(
                "{name} repeats label `{l}`"
            )));
        }
    }
    Ok(())
}

fn labels<S: AsRef<str>>(xs: &[S]) -> Vec<String> {
    xs.iter().map(|s| s.as_ref().to_string()).collect()
}

impl Scenario {
    pub fn new<S: AsRef<str>, T: AsRef<str>>(
        settings_a: &[S],
        settings_b: &[S],
        outcomes_a: &[T],
        outcomes_b: &[T],
    ) -> Result<Self> {
        let s = Self {
            settings_a: labels(settings_a),
            settings_b: labels(settings_b),
            outcomes_a: labels(outcomes_a),
            outcomes_b: labels(outcomes_b),
            context: BTreeMap::new(),
            parallel: Vec::new(),
        };
        s.validate()?;
        Ok(s)
    }

    /// Two settings per side, outcomes `up`/`down`.
    pub fn binary<S: AsRef<str>>(settings_a: &[S], settings_b: &[S]) -> Result<Self> {
        Self::new(
            settings_a,
            settings_b,
            &SPIN_OUTCOMES[..],
            &SPIN_OUTCOMES[..],
        )
    }

    pub fn with_parallel(mut self, pairs: Vec<(usize, usize)>) -> Result<Self> {
        self.parallel = pairs;
        self.validate()?;
        Ok(self)
    }

    pub fn with_context(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.context.insert(key.into(), value.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_alphabet("settings_a", &self.settings_a)?;
        check_alphabet("settings_b", &self.settings_b)?;
        check_alphabet("outcomes_a", &self.outcomes_a)?;
        check_alphabet("outcomes_b", &self.outcomes_b)?;
        for &(a, b) in &self.parallel {
            if a >= self.settings_a.len() || b >= self.settings_b.len() {
                return Err(Error::InvalidScenario(format!(
                    "parallel pair ({a}, {b}) out of range"
                )));
            }
        }
        Ok(())
    }

    /// `(settings_a, settings_b, outcomes_a, outcomes_b)` counts.
    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (
            self.settings_a.len(),
            self.settings_b.len(),
            self.outcomes_a.len(),
            self.outcomes_b.len(),
        )
    }

    pub fn table_len(&self) -> usize {
        let (sa, sb, oa, ob) = self.shape();
        sa * sb * oa * ob
    }

    /// Row-major position of `(a, b, A, B)`: a-major, then b, then A, then B.
    pub fn cell(&self, a: usize, b: usize, x: usize, y: usize) -> usize {
        let (_, sb, oa, ob) = self.shape();
        ((a * sb + b) * oa + x) * ob + y
    }

    pub fn setting_a(&self, label: &str) -> Result<usize> {
        self.settings_a
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownSetting(label.to_string()))
    }

    pub fn setting_b(&self, label: &str) -> Result<usize> {
        self.settings_b
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownSetting(label.to_string()))
    }
}

/// Observable-level conditional distribution `P(A,B|a,b)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Behavior {
    scenario: Scenario,
    table: Vec<f64>,
}

impl Behavior {
    pub fn new(scenario: Scenario, table: Vec<f64>) -> Result<Self> {
        validate(Self { scenario, table })
    }

    /// Builds `P(A,B|a,b) = f(a, b, A, B)` over the scenario.
    pub fn from_fn(scenario: Scenario, f: impl Fn(usize, usize, usize, usize) -> f64) -> Result<Self> {
        let (sa, sb, oa, ob) = scenario.shape();
        let mut table = Vec::with_capacity(scenario.table_len());
        for a in 0..sa {
            for b in 0..sb {
                for x in 0..oa {
                    for y in 0..ob {
                        table.push(f(a, b, x, y));
                    }
                }
            }
        }
        Self::new(scenario, table)
    }

    /// Deterministic behavior: outcome `out_a[a]` on side A and `out_b[b]`
    /// on side B with certainty.
    pub fn deterministic(scenario: Scenario, out_a: &[usize], out_b: &[usize]) -> Result<Self> {
        let (sa, sb, _, _) = scenario.shape();
        if out_a.len() != sa || out_b.len() != sb {
            return Err(Error::InvalidModel(
                "deterministic response does not cover every setting".into(),
            ));
        }
        Self::from_fn(scenario, |a, b, x, y| {
            if out_a[a] == x && out_b[b] == y {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn p(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.table[self.scenario.cell(a, b, x, y)]
    }

    /// `P(A = x | a, b)`.
    pub fn marginal_a(&self, a: usize, b: usize, x: usize) -> f64 {
        (0..self.scenario.outcomes_b.len())
            .map(|y| self.p(a, b, x, y))
            .sum()
    }

    /// `P(B = y | a, b)`.
    pub fn marginal_b(&self, a: usize, b: usize, y: usize) -> f64 {
        (0..self.scenario.outcomes_a.len())
            .map(|x| self.p(a, b, x, y))
            .sum()
    }

    /// True when every entry is exactly 0 or 1.
    pub fn is_deterministic(&self) -> bool {
        self.table.iter().all(|&p| p == 0.0 || p == 1.0)
    }
}

/// Returns the behavior if every entry lies in `[0,1]` and every `(a,b)` row
/// sums to one within `1e-12`; otherwise reports the first offending cell.
pub fn validate(b: Behavior) -> Result<Behavior> {
    b.scenario.validate()?;
    let expected = b.scenario.table_len();
    if b.table.len() != expected {
        return Err(Error::TableSize {
            expected,
            got: b.table.len(),
        });
    }
    let (sa, sb, oa, ob) = b.scenario.shape();
    for a in 0..sa {
        for bb in 0..sb {
            let mut sum = 0.0;
            for x in 0..oa {
                for y in 0..ob {
                    let value = b.p(a, bb, x, y);
                    if !value.is_finite() {
                        return Err(Error::NonFinite);
                    }
                    if value < 0.0 {
                        return Err(Error::NegativeProbability {
                            a,
                            b: bb,
                            x,
                            y,
                            value,
                        });
                    }
                    if value > 1.0 + ALGEBRAIC_TOL {
                        return Err(Error::ProbabilityAboveOne {
                            a,
                            b: bb,
                            x,
                            y,
                            value,
                        });
                    }
                    sum += value;
                }
            }
            if (sum - 1.0).abs() > ALGEBRAIC_TOL {
                return Err(Error::Normalization {
                    a,
                    b: bb,
                    sum,
                    deficit: 1.0 - sum,
                });
            }
        }
    }
    Ok(b)
}

/// One hidden-variable value: its weight and the conditional behavior it
/// induces.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lambda {
    pub weight: f64,
    pub conditional: Behavior,
}

/// Weighted finite ensemble of conditionals `P(A,B|a,b,λ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HiddenVariableModel {
    scenario: Scenario,
    lambdas: Vec<Lambda>,
}

impl HiddenVariableModel {
    pub fn new(lambdas: Vec<(f64, Behavior)>) -> Result<Self> {
        let Some((_, first)) = lambdas.first() else {
            return Err(Error::InvalidModel("no hidden-variable values".into()));
        };
        let scenario = first.scenario().clone();
        let mut total = 0.0;
        for (i, (w, b)) in lambdas.iter().enumerate() {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidModel(format!(
                    "weight {w} of lambda {i} is not a nonnegative number"
                )));
            }
            if b.scenario() != &scenario {
                return Err(Error::InvalidModel(format!(
                    "lambda {i} uses a different scenario"
                )));
            }
            total += w;
        }
        if (total - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::InvalidModel(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            scenario,
            lambdas: lambdas
                .into_iter()
                .map(|(weight, conditional)| Lambda {
                    weight,
                    conditional,
                })
                .collect(),
        })
    }

    /// Model with an empty hidden variable: a single λ carrying `b`.
    pub fn lambda_free(b: Behavior) -> Self {
        Self {
            scenario: b.scenario().clone(),
            lambdas: vec![Lambda {
                weight: 1.0,
                conditional: b,
            }],
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn lambdas(&self) -> &[Lambda] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

/// `P(A,B|a,b) = Σ_λ w(λ) P(A,B|a,b,λ)`.
pub fn average(model: &HiddenVariableModel) -> Behavior {
    let lambdas = model.lambdas();
    let table = par::map_range(model.scenario().table_len(), |cell| {
        lambdas
            .iter()
            .map(|l| l.weight * l.conditional.table[cell])
            .sum::<f64>()
    });
    Behavior {
        scenario: model.scenario().clone(),
        table,
    }
}

/// Shortest round-trip decimal form of an angle, used as a setting label.
pub fn angle_label(theta: f64) -> String {
    format!("{theta}")
}

/// Born-rule behavior of a two-spin state for the given measurement angles.
/// Outcomes are `up`/`down` along the rotated direction; settings whose
/// angles coincide across the two sides are declared parallel.
pub fn from_quantum(state: &StateVector, angles_a: &[f64], angles_b: &[f64]) -> Result<Behavior> {
    let dims = state.dims();
    if dims.len() != 2 {
        return Err(Error::InvalidScenario(format!(
            "expected a two-spin state, got {} subsystems",
            dims.len()
        )));
    }
    for s in dims {
        if s.dim != 2 {
            return Err(Error::WrongDimension {
                label: s.label.clone(),
                dim: s.dim,
                expected: 2,
            });
        }
    }
    let la: Vec<String> = angles_a.iter().map(|&t| angle_label(t)).collect();
    let lb: Vec<String> = angles_b.iter().map(|&t| angle_label(t)).collect();
    let parallel = angles_a
        .iter()
        .enumerate()
        .flat_map(|(i, ta)| {
            angles_b
                .iter()
                .enumerate()
                .filter(move |(_, tb)| *tb == ta)
                .map(move |(j, _)| (i, j))
        })
        .collect();
    let scenario = Scenario::binary(&la, &lb)?.with_parallel(parallel)?;
    let (first, second) = (&dims[0].label, &dims[1].label);
    let mut table = Vec::with_capacity(scenario.table_len());
    for &ta in angles_a {
        for &tb in angles_b {
            for sa in Spin::BOTH {
                for sb in Spin::BOTH {
                    table.push(born_joint(
                        state,
                        &SpinOutcome::new(first.as_str(), sa, ta),
                        &SpinOutcome::new(second.as_str(), sb, tb),
                    )?);
                }
            }
        }
    }
    Behavior::new(scenario, table)
}
