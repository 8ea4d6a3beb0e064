//! Probabilistic locality conditions as executable checks.
//!
//! Every check returns the largest violation it found together with the
//! cell that attains it, so acceptance tests can be quantitative. Ties are
//! resolved in favour of the lexicographically first cell (λ, then a, b,
//! A, B), independent of how the λ loop is scheduled.

use serde::Serialize;

use crate::behavior::{average, Behavior, HiddenVariableModel};
use crate::par;
use crate::{Error, Result};

/// Conditioning events with probability at or below this are treated as
/// zero-probability and skipped.
pub const ZERO_PROBABILITY: f64 = 1e-14;

/// Default hypothesis tolerance for the determinism reduction.
pub const DEFAULT_HYPOTHESIS_TOL: f64 = 1e-9;
/// Default tolerance for "marginal is 0 or 1".
pub const DEFAULT_DETERMINISM_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Condition {
    NoSignalling,
    ParameterIndependence,
    OutcomeIndependence,
    Factorizability,
    Determinism,
}

/// Cell achieving a check's maximal violation.
///
/// For marginal comparisons (no-signalling, parameter independence) exactly
/// one of `outcome_a`/`outcome_b` is set, naming the side whose marginal
/// moved, and `alt_setting` is the far-side setting it was compared against.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub lambda: Option<usize>,
    pub setting_a: usize,
    pub setting_b: usize,
    pub outcome_a: Option<usize>,
    pub outcome_b: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alt_setting: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub condition: Condition,
    pub passed: bool,
    pub max_violation: f64,
    pub witness: Option<Witness>,
    pub skipped_cells: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Default)]
struct Worst {
    value: f64,
    witness: Option<Witness>,
    skipped: usize,
}

impl Worst {
    fn offer(&mut self, value: f64, witness: impl FnOnce() -> Witness) {
        if value > self.value {
            self.value = value;
            self.witness = Some(witness());
        }
    }

    fn merge(mut self, later: Worst) -> Worst {
        if later.value > self.value {
            self.value = later.value;
            self.witness = later.witness;
        }
        self.skipped += later.skipped;
        self
    }

    fn into_report(self, condition: Condition, tol: f64) -> CheckReport {
        CheckReport {
            condition,
            passed: self.value <= tol,
            max_violation: self.value,
            witness: self.witness,
            skipped_cells: self.skipped,
            notes: Vec::new(),
        }
    }
}

fn per_lambda<F>(m: &HiddenVariableModel, f: F) -> Worst
where
    F: Fn(Option<usize>, &Behavior) -> Worst + Sync + Send,
{
    let lambdas = m.lambdas();
    let tag = |i: usize| if lambdas.len() == 1 { None } else { Some(i) };
    par::map_range(lambdas.len(), |i| f(tag(i), &lambdas[i].conditional))
        .into_iter()
        .fold(Worst::default(), Worst::merge)
}

fn marginal_drift(lambda: Option<usize>, b: &Behavior) -> Worst {
    let (sa, sb, oa, ob) = b.scenario().shape();
    let mut worst = Worst::default();
    for a in 0..sa {
        for x in 0..oa {
            for b1 in 0..sb {
                for b2 in (b1 + 1)..sb {
                    let d = (b.marginal_a(a, b1, x) - b.marginal_a(a, b2, x)).abs();
                    worst.offer(d, || Witness {
                        lambda,
                        setting_a: a,
                        setting_b: b1,
                        outcome_a: Some(x),
                        outcome_b: None,
                        alt_setting: Some(b2),
                    });
                }
            }
        }
    }
    for bb in 0..sb {
        for y in 0..ob {
            for a1 in 0..sa {
                for a2 in (a1 + 1)..sa {
                    let d = (b.marginal_b(a1, bb, y) - b.marginal_b(a2, bb, y)).abs();
                    worst.offer(d, || Witness {
                        lambda,
                        setting_a: a1,
                        setting_b: bb,
                        outcome_a: None,
                        outcome_b: Some(y),
                        alt_setting: Some(a2),
                    });
                }
            }
        }
    }
    worst
}

/// Observable-level marginal independence:
/// `max |Σ_B P(A,B|a,b) − Σ_B P(A,B|a,b′)|` and its mirror.
pub fn check_no_signalling(b: &Behavior, tol: f64) -> CheckReport {
    marginal_drift(None, b).into_report(Condition::NoSignalling, tol)
}

/// λ-level marginal independence from the far setting.
pub fn check_parameter_independence(m: &HiddenVariableModel, tol: f64) -> CheckReport {
    per_lambda(m, marginal_drift).into_report(Condition::ParameterIndependence, tol)
}

/// `max |P(A|B,a,b,λ) − P(A|a,b,λ)|` and its mirror, over conditioning
/// events of positive probability. Zero-probability events are skipped and
/// counted in `skipped_cells`.
pub fn check_outcome_independence(m: &HiddenVariableModel, tol: f64) -> CheckReport {
    per_lambda(m, |lambda, b| {
        let (sa, sb, oa, ob) = b.scenario().shape();
        let mut worst = Worst::default();
        for a in 0..sa {
            for bb in 0..sb {
                for y in 0..ob {
                    let pb = b.marginal_b(a, bb, y);
                    if pb <= ZERO_PROBABILITY {
                        worst.skipped += 1;
                        continue;
                    }
                    for x in 0..oa {
                        let d = (b.p(a, bb, x, y) / pb - b.marginal_a(a, bb, x)).abs();
                        worst.offer(d, || Witness {
                            lambda,
                            setting_a: a,
                            setting_b: bb,
                            outcome_a: Some(x),
                            outcome_b: Some(y),
                            alt_setting: None,
                        });
                    }
                }
                for x in 0..oa {
                    let pa = b.marginal_a(a, bb, x);
                    if pa <= ZERO_PROBABILITY {
                        worst.skipped += 1;
                        continue;
                    }
                    for y in 0..ob {
                        let d = (b.p(a, bb, x, y) / pa - b.marginal_b(a, bb, y)).abs();
                        worst.offer(d, || Witness {
                            lambda,
                            setting_a: a,
                            setting_b: bb,
                            outcome_a: Some(x),
                            outcome_b: Some(y),
                            alt_setting: None,
                        });
                    }
                }
            }
        }
        worst
    })
    .into_report(Condition::OutcomeIndependence, tol)
}

/// `P(A,B|a,b,λ) = P(A|a,λ)·P(B|b,λ)`.
///
/// One-sided marginals are only well defined when parameter independence
/// holds, so the reported violation is the larger of the parameter
/// independence violation and `max |P(A,B|a,b,λ) − P(A|a,b,λ)·P(B|a,b,λ)|`
/// (pair-specific marginals). When parameter independence fails a note
/// records it.
pub fn check_factorizability(m: &HiddenVariableModel, tol: f64) -> CheckReport {
    let pi = check_parameter_independence(m, tol);
    let product = per_lambda(m, |lambda, b| {
        let (sa, sb, oa, ob) = b.scenario().shape();
        let mut worst = Worst::default();
        for a in 0..sa {
            for bb in 0..sb {
                for x in 0..oa {
                    for y in 0..ob {
                        let d = (b.p(a, bb, x, y) - b.marginal_a(a, bb, x) * b.marginal_b(a, bb, y)).abs();
                        worst.offer(d, || Witness {
                            lambda,
                            setting_a: a,
                            setting_b: bb,
                            outcome_a: Some(x),
                            outcome_b: Some(y),
                            alt_setting: None,
                        });
                    }
                }
            }
        }
        worst
    });
    let mut worst = product;
    let mut notes = Vec::new();
    if !pi.passed {
        notes.push(format!(
            "parameter independence fails (max violation {}); pair-specific marginals used",
            pi.max_violation
        ));
    }
    if pi.max_violation > worst.value {
        worst.value = pi.max_violation;
        worst.witness = pi.witness;
    }
    let mut report = worst.into_report(Condition::Factorizability, tol);
    report.notes = notes;
    report
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JarrettReport {
    pub factorizability: CheckReport,
    pub parameter_independence: CheckReport,
    pub outcome_independence: CheckReport,
}

impl JarrettReport {
    /// `factorizability ⇔ (PI ∧ OI)`.
    pub fn equivalent(&self) -> bool {
        self.factorizability.passed
            == (self.parameter_independence.passed && self.outcome_independence.passed)
    }
}

/// Runs factorizability, parameter independence and outcome independence on
/// a model whose conditionals are strictly positive.
pub fn jarrett_decomposition(m: &HiddenVariableModel, tol: f64) -> Result<JarrettReport> {
    let s = m.scenario();
    for (i, l) in m.lambdas().iter().enumerate() {
        if let Some(cell) = l.conditional.table().iter().position(|&p| p <= 0.0) {
            let (_, sb, oa, ob) = s.shape();
            return Err(Error::PositivityViolation {
                lambda: i,
                a: cell / (sb * oa * ob),
                b: (cell / (oa * ob)) % sb,
                x: (cell / ob) % oa,
                y: cell % ob,
            });
        }
    }
    Ok(JarrettReport {
        factorizability: check_factorizability(m, tol),
        parameter_independence: check_parameter_independence(m, tol),
        outcome_independence: check_outcome_independence(m, tol),
    })
}

/// Whether factorizability coincides with parameter plus outcome
/// independence on `m`.
pub fn jarrett_equivalence(m: &HiddenVariableModel, tol: f64) -> Result<bool> {
    Ok(jarrett_decomposition(m, tol)?.equivalent())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ReductionVerdict {
    /// Hypotheses hold and every tested marginal is 0 or 1.
    Holds,
    /// Hypotheses hold but some marginal is not deterministic.
    Fails,
    HypothesesUnsatisfied,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionReport {
    pub verdict: ReductionVerdict,
    pub factorizability: CheckReport,
    /// Largest `P(A = B | a, b)` of the averaged behavior over the declared
    /// parallel pairs (outcomes matched by index).
    pub anticorrelation_deficit: f64,
    pub anticorrelation_pair: (usize, usize),
    /// Distance of λ-conditional marginals at the parallel settings from
    /// `{0, 1}`, over λ of positive weight.
    pub determinism: CheckReport,
}

/// Checks that factorizability plus perfect anticorrelation at the parallel
/// setting pairs forces every λ-conditional marginal there to be 0 or 1.
pub fn suppes_zanotti_reduction(
    m: &HiddenVariableModel,
    tol: f64,
    det_tol: f64,
) -> Result<ReductionReport> {
    let s = m.scenario();
    if s.parallel.is_empty() {
        return Err(Error::NoParallelPair);
    }
    let factorizability = check_factorizability(m, tol);
    let avg = average(m);
    let (_, _, oa, ob) = s.shape();
    let mut deficit = f64::NEG_INFINITY;
    let mut pair = s.parallel[0];
    for &(a, b) in &s.parallel {
        let same: f64 = (0..oa.min(ob)).map(|x| avg.p(a, b, x, x)).sum();
        if same > deficit {
            deficit = same;
            pair = (a, b);
        }
    }

    let parallel = s.parallel.clone();
    let lambdas = m.lambdas();
    let determinism = par::map_range(lambdas.len(), |i| {
        let l = &lambdas[i];
        let mut worst = Worst::default();
        if l.weight <= 0.0 {
            worst.skipped += 1;
            return worst;
        }
        let c = &l.conditional;
        for &(a, b) in &parallel {
            for x in 0..oa {
                let p = c.marginal_a(a, b, x);
                worst.offer(p.min(1.0 - p).max(0.0), || Witness {
                    lambda: Some(i),
                    setting_a: a,
                    setting_b: b,
                    outcome_a: Some(x),
                    outcome_b: None,
                    alt_setting: None,
                });
            }
            for y in 0..ob {
                let p = c.marginal_b(a, b, y);
                worst.offer(p.min(1.0 - p).max(0.0), || Witness {
                    lambda: Some(i),
                    setting_a: a,
                    setting_b: b,
                    outcome_a: None,
                    outcome_b: Some(y),
                    alt_setting: None,
                });
            }
        }
        worst
    })
    .into_iter()
    .fold(Worst::default(), Worst::merge)
    .into_report(Condition::Determinism, det_tol);

    let verdict = if !factorizability.passed || deficit > tol {
        ReductionVerdict::HypothesesUnsatisfied
    } else if determinism.passed {
        ReductionVerdict::Holds
    } else {
        ReductionVerdict::Fails
    };
    Ok(ReductionReport {
        verdict,
        factorizability,
        anticorrelation_deficit: deficit,
        anticorrelation_pair: pair,
        determinism,
    })
}
