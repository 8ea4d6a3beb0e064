//! CHSH and the three-setting (1964-style) inequality: evaluation on
//! behaviors and correlator tables, the classical bound by exhaustive
//! enumeration, and the quantum maximum by grid plus pattern search.
//!
//! Outcome encoding: outcome index 0 ↦ `+1`, index 1 ↦ `−1`.
//! CHSH convention: `S = E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′)`.

use serde::Serialize;
use std::f64::consts::TAU;
use std::io::Write;

use crate::behavior::{angle_label, Behavior, Scenario};
use crate::par;
use crate::qstate::{born_joint, Spin, SpinOutcome, StateVector};
use crate::{Error, Result, ALGEBRAIC_TOL, OPTIMIZATION_TOL};

/// Table of expectation values `E(a,b)` over a settings grid (a-major).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelatorSet {
    labels_a: Vec<String>,
    labels_b: Vec<String>,
    values: Vec<f64>,
}

impl CorrelatorSet {
    pub fn new(labels_a: Vec<String>, labels_b: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let expected = labels_a.len() * labels_b.len();
        if values.len() != expected {
            return Err(Error::TableSize {
                expected,
                got: values.len(),
            });
        }
        for &v in &values {
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            if v.abs() > 1.0 + ALGEBRAIC_TOL {
                return Err(Error::InvalidArgument(format!(
                    "correlator {v} outside [-1, 1]"
                )));
            }
        }
        Ok(Self {
            labels_a,
            labels_b,
            values,
        })
    }

    /// Correlators of a behavior with two outcomes per side.
    pub fn from_behavior(b: &Behavior) -> Result<Self> {
        let s = b.scenario();
        require_binary(s)?;
        let (sa, sb, _, _) = s.shape();
        let values = (0..sa)
            .flat_map(|a| (0..sb).map(move |bb| (a, bb)))
            .map(|(a, bb)| b.p(a, bb, 0, 0) - b.p(a, bb, 0, 1) - b.p(a, bb, 1, 0) + b.p(a, bb, 1, 1))
            .collect();
        Self::new(s.settings_a.clone(), s.settings_b.clone(), values)
    }

    /// Born-rule correlators of a two-spin state on an angle grid.
    pub fn quantum(state: &StateVector, angles_a: &[f64], angles_b: &[f64]) -> Result<Self> {
        let nb = angles_b.len();
        let values = par::map_range(angles_a.len() * nb, |k| {
            quantum_correlator(state, angles_a[k / nb], angles_b[k % nb])
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Self::new(
            angles_a.iter().map(|&t| angle_label(t)).collect(),
            angles_b.iter().map(|&t| angle_label(t)).collect(),
            values,
        )
    }

    pub fn labels_a(&self) -> &[String] {
        &self.labels_a
    }

    pub fn labels_b(&self) -> &[String] {
        &self.labels_b
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.labels_b.len() + b]
    }

    /// `E` at the A-side setting labelled `a` and the B-side setting `b`.
    pub fn lookup(&self, a: &str, b: &str) -> Result<f64> {
        let i = self
            .labels_a
            .iter()
            .position(|l| l == a)
            .ok_or_else(|| Error::UnknownSetting(a.to_string()))?;
        let j = self
            .labels_b
            .iter()
            .position(|l| l == b)
            .ok_or_else(|| Error::UnknownSetting(b.to_string()))?;
        Ok(self.get(i, j))
    }

    /// CSV with columns `a, b, E`, one row per grid point.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["a", "b", "E"])?;
        for (i, la) in self.labels_a.iter().enumerate() {
            for (j, lb) in self.labels_b.iter().enumerate() {
                w.write_record([la.as_str(), lb.as_str(), &self.get(i, j).to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

fn require_binary(s: &Scenario) -> Result<()> {
    let (_, _, oa, ob) = s.shape();
    if oa != 2 || ob != 2 {
        return Err(Error::NonBinaryOutcomes { a: oa, b: ob });
    }
    Ok(())
}

/// `E(θa, θb) = Σ_{A,B} A·B·P(A,B)` for the first two subsystems of `state`.
pub fn quantum_correlator(state: &StateVector, theta_a: f64, theta_b: f64) -> Result<f64> {
    let dims = state.dims();
    if dims.len() != 2 {
        return Err(Error::InvalidScenario(format!(
            "expected a two-spin state, got {} subsystems",
            dims.len()
        )));
    }
    let (first, second) = (dims[0].label.as_str(), dims[1].label.as_str());
    let mut e = 0.0;
    for sa in Spin::BOTH {
        for sb in Spin::BOTH {
            let p = born_joint(
                state,
                &SpinOutcome::new(first, sa, theta_a),
                &SpinOutcome::new(second, sb, theta_b),
            )?;
            e += sa.sign() * sb.sign() * p;
        }
    }
    // Rounding in the projector sums can push |E| a few ulps past 1.
    Ok(e.clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChshResult {
    pub value: f64,
    /// `(a, a′, b, b′)` setting labels.
    pub settings: [String; 4],
    /// Angles, when the settings are measurement directions.
    pub angles: Option<[f64; 4]>,
    /// `[E(a,b), E(a,b′), E(a′,b), E(a′,b′)]`.
    pub terms: [f64; 4],
}

fn chsh_value(t: [f64; 4]) -> f64 {
    t[0] + t[1] + t[2] - t[3]
}

/// CHSH functional on a correlator table; indices are `(a, a′)` on side A
/// and `(b, b′)` on side B.
pub fn chsh(c: &CorrelatorSet, a: usize, a2: usize, b: usize, b2: usize) -> ChshResult {
    let terms = [c.get(a, b), c.get(a, b2), c.get(a2, b), c.get(a2, b2)];
    ChshResult {
        value: chsh_value(terms),
        settings: [
            c.labels_a[a].clone(),
            c.labels_a[a2].clone(),
            c.labels_b[b].clone(),
            c.labels_b[b2].clone(),
        ],
        angles: None,
        terms,
    }
}

/// CHSH functional on a behavior; fails unless both sides have two outcomes.
pub fn chsh_behavior(beh: &Behavior, a: usize, a2: usize, b: usize, b2: usize) -> Result<ChshResult> {
    Ok(chsh(&CorrelatorSet::from_behavior(beh)?, a, a2, b, b2))
}

/// CHSH value of a two-spin state at angles `[a, a′, b, b′]`.
pub fn quantum_chsh(state: &StateVector, angles: [f64; 4]) -> Result<ChshResult> {
    let [a, a2, b, b2] = angles;
    let terms = [
        quantum_correlator(state, a, b)?,
        quantum_correlator(state, a, b2)?,
        quantum_correlator(state, a2, b)?,
        quantum_correlator(state, a2, b2)?,
    ];
    Ok(ChshResult {
        value: chsh_value(terms),
        settings: angles.map(angle_label),
        angles: Some(angles),
        terms,
    })
}

/// One deterministic local strategy in the 2×2×2 scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Strategy {
    /// Outcome index chosen by A at settings `a`, `a′`.
    pub out_a: [usize; 2],
    /// Outcome index chosen by B at settings `b`, `b′`.
    pub out_b: [usize; 2],
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassicalBound {
    pub max_abs: f64,
    pub strategies: Vec<Strategy>,
    /// Indices into `strategies` attaining `max_abs`.
    pub maximizers: Vec<usize>,
}

/// Enumerates all 16 deterministic local strategies of a two-setting,
/// two-outcome scenario and returns the largest `|S|`.
pub fn classical_bound(scenario: &Scenario) -> Result<ClassicalBound> {
    let (sa, sb, _, _) = scenario.shape();
    require_binary(scenario)?;
    if sa != 2 || sb != 2 {
        return Err(Error::WrongScenarioShape { a: sa, b: sb });
    }
    let responses = [[0, 0], [0, 1], [1, 0], [1, 1]];
    let strategies = par::map_range(16, |k| {
        let (out_a, out_b) = (responses[k / 4], responses[k % 4]);
        let beh = Behavior::deterministic(scenario.clone(), &out_a, &out_b)?;
        Ok(Strategy {
            out_a,
            out_b,
            value: chsh_behavior(&beh, 0, 1, 0, 1)?.value,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let max_abs = strategies
        .iter()
        .map(|s| s.value.abs())
        .fold(0.0, f64::max);
    let maximizers = strategies
        .iter()
        .enumerate()
        .filter(|(_, s)| s.value.abs() == max_abs)
        .map(|(i, _)| i)
        .collect();
    Ok(ClassicalBound {
        max_abs,
        strategies,
        maximizers,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantumMax {
    pub result: ChshResult,
    /// Best `|S|` found by the coarse grid before refinement.
    pub grid_value: f64,
    pub evaluations: u64,
}

/// Searches the four measurement angles for the largest `|S|`: an exhaustive
/// grid of spacing `grid_step` over `[0, 2π)` followed by `refine_iters`
/// rounds of compass pattern search whose step halves after every round
/// without improvement. Ties go to the lexicographically smallest settings.
pub fn quantum_max(state: &StateVector, grid_step: f64, refine_iters: usize) -> Result<QuantumMax> {
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    let m = (TAU / grid_step).ceil() as usize;
    let angles: Vec<f64> = (0..m).map(|k| k as f64 * grid_step).collect();
    let table = CorrelatorSet::quantum(state, &angles, &angles)?;
    let e = |i: usize, j: usize| table.values[i * m + j];

    let per_a = par::map_range(m, |i| {
        let mut best = (f64::NEG_INFINITY, [0usize; 4]);
        for i2 in 0..m {
            for j in 0..m {
                for j2 in 0..m {
                    let s = (e(i, j) + e(i, j2) + e(i2, j) - e(i2, j2)).abs();
                    if s > best.0 {
                        best = (s, [i, i2, j, j2]);
                    }
                }
            }
        }
        best
    });
    let (grid_value, idx) = per_a
        .into_iter()
        .fold((f64::NEG_INFINITY, [0usize; 4]), |acc, x| if x.0 > acc.0 { x } else { acc });
    let mut evaluations = (m as u64).pow(4);

    let mut x = idx.map(|k| angles[k]);
    let mut current = quantum_chsh(state, x)?;
    evaluations += 1;
    let mut step = grid_step;
    for _ in 0..refine_iters {
        let mut improved: Option<ChshResult> = None;
        for k in 0..4 {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[k] += dir * step;
                let cand = quantum_chsh(state, y)?;
                evaluations += 1;
                let bar = improved.as_ref().unwrap_or(&current).value.abs();
                if cand.value.abs() > bar {
                    improved = Some(cand);
                }
            }
        }
        match improved {
            Some(next) => {
                x = next.angles.expect("quantum_chsh records angles");
                current = next;
            }
            None => step *= 0.5,
        }
    }
    Ok(QuantumMax {
        result: current,
        grid_value,
        evaluations,
    })
}

/// `(b, b′, S)` over a grid of B-side angles with A-side angles fixed.
pub fn chsh_landscape(
    state: &StateVector,
    a: f64,
    a2: f64,
    angles_b: &[f64],
) -> Result<Vec<(f64, f64, f64)>> {
    let n = angles_b.len();
    par::map_range(n * n, |k| {
        let (b, b2) = (angles_b[k / n], angles_b[k % n]);
        Ok((b, b2, quantum_chsh(state, [a, a2, b, b2])?.value))
    })
    .into_iter()
    .collect()
}

/// CSV with columns `b, b_prime, S`.
pub fn write_landscape_csv<W: Write>(rows: &[(f64, f64, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["b", "b_prime", "S"])?;
    for (b, b2, s) in rows {
        w.write_record([b.to_string(), b2.to_string(), s.to_string()])?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bell1964 {
    /// `1 + E(b,c) − |E(a,b) − E(a,c)|`; nonnegative for local models with
    /// perfect anticorrelation.
    pub slack: f64,
    pub e_ab: f64,
    pub e_ac: f64,
    pub e_bc: f64,
    /// Whether `E(x,x) = −1` within `1e-9` was verified for every setting
    /// `x ∈ {a, b, c}`. Settings absent from either side count as unverified.
    pub precondition_holds: bool,
    /// Largest `|E(x,x) + 1|` among the settings that could be checked.
    pub anticorrelation_deficit: f64,
}

/// Three-setting inequality `1 + E(b,c) ≥ |E(a,b) − E(a,c)|`. `a` and `b`
/// are looked up on side A, `b` and `c` on side B. The slack is computed
/// even when the anticorrelation precondition fails.
pub fn bell_1964(c: &CorrelatorSet, a: &str, b: &str, c_setting: &str) -> Result<Bell1964> {
    let e_ab = c.lookup(a, b)?;
    let e_ac = c.lookup(a, c_setting)?;
    let e_bc = c.lookup(b, c_setting)?;
    let mut precondition_holds = true;
    let mut deficit: f64 = 0.0;
    for x in [a, b, c_setting] {
        match c.lookup(x, x) {
            Ok(e) => {
                let d = (e + 1.0).abs();
                deficit = deficit.max(d);
                if d > OPTIMIZATION_TOL {
                    precondition_holds = false;
                }
            }
            Err(_) => precondition_holds = false,
        }
    }
    Ok(Bell1964 {
        slack: 1.0 + e_bc - (e_ab - e_ac).abs(),
        e_ab,
        e_ac,
        e_bc,
        precondition_holds,
        anticorrelation_deficit: deficit,
    })
}
