//! Branch-by-branch unitary account of EPR-Bohm experiments.
//!
//! Measurements are unitary couplings of a spin to a two-state apparatus;
//! nothing collapses. "Definite" outcomes are read off as support on a
//! single pointer-basis label, relative to a conditioning branch.

use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::behavior::{Behavior, HiddenVariableModel, Scenario};
use crate::causality::{check_no_signalling, check_outcome_independence, CheckReport};
use crate::qstate::{measurement_unitary, rotated_basis, Operator, StateVector, Subsystem};
use crate::spacetime::{Event, Role};
use crate::{Error, Result};

pub const APPARATUS_A: &str = "m_A";
pub const SPIN_1: &str = "1";
pub const SPIN_2: &str = "2";
pub const APPARATUS_B: &str = "m_B";
pub const COMPARER: &str = "C";

/// Systems and apparatus located in region A, resp. region B.
pub const REGION_A: [&str; 2] = [APPARATUS_A, SPIN_1];
pub const REGION_B: [&str; 2] = [SPIN_2, APPARATUS_B];

/// Branches lighter than this are treated as absent.
pub const BRANCH_EPS: f64 = 1e-15;
/// A region is definite when one pointer label carries all but this much
/// of the relative weight.
pub const DEFINITE_TOL: f64 = 1e-9;

pub mod stage {
    pub const PREPARED: &str = "prepared";
    pub const ROTATED: &str = "rotated";
    pub const MEASURED_A: &str = "measured A";
    pub const MEASURED_B: &str = "measured B";
    pub const COMPARED: &str = "compared";
}

/// Declared basis of one subsystem: `vectors[k]` is the pointer state
/// labelled `labels[k]`, in computational components.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointerBasis {
    labels: Vec<String>,
    vectors: Vec<Vec<Complex64>>,
}

impl PointerBasis {
    pub fn computational<S: AsRef<str>>(labels: &[S]) -> Self {
        let d = labels.len();
        let vectors = (0..d)
            .map(|k| {
                let mut v = vec![Complex64::new(0.0, 0.0); d];
                v[k] = Complex64::new(1.0, 0.0);
                v
            })
            .collect();
        Self {
            labels: labels.iter().map(|l| l.as_ref().to_string()).collect(),
            vectors,
        }
    }

    /// Rotated spin eigenbasis at `theta`, labelled `up`/`down` when
    /// `theta == 0` and `up_θ`/`down_θ` otherwise.
    pub fn spin(theta: f64) -> Self {
        let labels = if theta == 0.0 {
            ["up", "down"]
        } else {
            ["up_θ", "down_θ"]
        };
        Self {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            vectors: rotated_basis(theta)
                .iter()
                .map(|v| v.iter().map(|&c| Complex64::new(c, 0.0)).collect())
                .collect(),
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, subsystem: &str, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownPointerLabel {
                subsystem: subsystem.to_string(),
                label: label.to_string(),
            })
    }

    /// Row `k` is `⟨k|`: maps computational components to pointer components.
    fn bra_matrix(&self) -> Vec<Complex64> {
        self.vectors
            .iter()
            .flat_map(|v| v.iter().map(|c| c.conj()))
            .collect()
    }
}

/// Pointer bases keyed by subsystem label.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PointerBases(BTreeMap<String, PointerBasis>);

impl PointerBases {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, subsystem: &str, basis: PointerBasis) -> Self {
        self.0.insert(subsystem.to_string(), basis);
        self
    }

    /// Declared basis, or the computational basis labelled by index.
    pub fn basis_for(&self, s: &Subsystem) -> PointerBasis {
        self.0.get(&s.label).cloned().unwrap_or_else(|| {
            let labels: Vec<String> = (0..s.dim).map(|k| k.to_string()).collect();
            PointerBasis::computational(&labels)
        })
    }
}

/// One term of a pointer-basis decomposition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Branch {
    /// `(subsystem, pointer label)` in subsystem order.
    pub labels: Vec<(String, String)>,
    pub amplitude: Complex64,
    pub weight: f64,
}

impl Branch {
    pub fn label_of(&self, subsystem: &str) -> Option<&str> {
        self.labels
            .iter()
            .find(|(s, _)| s == subsystem)
            .map(|(_, l)| l.as_str())
    }
}

/// Re-expresses the listed subsystems of `state` in their pointer bases.
fn to_pointer_frame(state: &StateVector, bases: &PointerBases, subsystems: &[&str]) -> Result<StateVector> {
    let mut out = state.clone();
    for &label in subsystems {
        let s = &state.dims()[state.position(label)?];
        let basis = bases.basis_for(s);
        if basis.labels.len() != s.dim {
            return Err(Error::WrongDimension {
                label: label.to_string(),
                dim: s.dim,
                expected: basis.labels.len(),
            });
        }
        out = out.apply_local(label, &basis.bra_matrix())?;
    }
    Ok(out)
}

/// All branches of `state` in the declared pointer bases, in basis order.
pub fn decompose(state: &StateVector, bases: &PointerBases) -> Result<Vec<Branch>> {
    let labels: Vec<&str> = state.dims().iter().map(|s| s.label.as_str()).collect();
    let framed = to_pointer_frame(state, bases, &labels)?;
    let pointer: Vec<PointerBasis> = state.dims().iter().map(|s| bases.basis_for(s)).collect();
    Ok(framed
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > BRANCH_EPS)
        .map(|(i, &amplitude)| Branch {
            labels: framed
                .digits(i)
                .iter()
                .zip(state.dims().iter().zip(&pointer))
                .map(|(&d, (s, b))| (s.label.clone(), b.labels[d].clone()))
                .collect(),
            amplitude,
            weight: amplitude.norm_sqr(),
        })
        .collect())
}

/// Normalized state of the remaining subsystems relative to the pointer
/// state `conditioning` (pairs of subsystem and pointer label).
pub fn relative_state(
    state: &StateVector,
    bases: &PointerBases,
    conditioning: &[(&str, &str)],
) -> Result<StateVector> {
    let subsystems: Vec<&str> = conditioning.iter().map(|c| c.0).collect();
    let framed = to_pointer_frame(state, bases, &subsystems)?;
    let mut fixed = Vec::with_capacity(conditioning.len());
    for &(sub, label) in conditioning {
        let pos = state.position(sub)?;
        let idx = bases.basis_for(&state.dims()[pos]).index_of(sub, label)?;
        fixed.push((pos, idx));
    }
    let keep: Vec<usize> = (0..state.dims().len())
        .filter(|p| !fixed.iter().any(|(f, _)| f == p))
        .collect();
    let rest_dims: Vec<Subsystem> = keep.iter().map(|&p| state.dims()[p].clone()).collect();
    let rest_len: usize = rest_dims.iter().map(|s| s.dim).product();
    let mut amps = vec![Complex64::new(0.0, 0.0); rest_len];
    for (i, &a) in framed.amplitudes().iter().enumerate() {
        let digits = framed.digits(i);
        if fixed.iter().all(|&(p, d)| digits[p] == d) {
            let r = keep
                .iter()
                .zip(&rest_dims)
                .fold(0, |acc, (&p, s)| acc * s.dim + digits[p]);
            amps[r] = a;
        }
    }
    let rel = StateVector::new(rest_dims, amps)?;
    if rel.norm_sqr() <= BRANCH_EPS {
        return Err(Error::EmptyBranch);
    }
    rel.normalized()
}

/// Whether `region` has a single pointer-basis outcome relative to the
/// conditioning branch.
pub fn is_definite_relative(
    state: &StateVector,
    bases: &PointerBases,
    region: &[&str],
    conditioning: &[(&str, &str)],
) -> Result<bool> {
    let rel = relative_state(state, bases, conditioning)?;
    let framed = to_pointer_frame(&rel, bases, region)?;
    let positions: Vec<usize> = region
        .iter()
        .map(|r| framed.position(r))
        .collect::<Result<_>>()?;
    let mut marginal: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (i, a) in framed.amplitudes().iter().enumerate() {
        let digits = framed.digits(i);
        let key = positions.iter().map(|&p| digits[p]).collect();
        *marginal.entry(key).or_default() += a.norm_sqr();
    }
    let top = marginal.values().cloned().fold(0.0, f64::max);
    Ok(top >= 1.0 - DEFINITE_TOL)
}

/// Unitarily copies the pointer readings of two binary apparatus into a
/// four-state comparer: `|x⟩|y⟩|c⟩ ↦ |x⟩|y⟩|c + 2x + y mod 4⟩`. The comparer
/// must start in its ready state (index 0).
pub fn compare_pointers(state: &StateVector, comparer: &str, a: &str, b: &str) -> Result<StateVector> {
    let dims = state.dims();
    let cpos = state.position(comparer)?;
    if dims[cpos].dim != 4 {
        return Err(Error::WrongDimension {
            label: comparer.to_string(),
            dim: dims[cpos].dim,
            expected: 4,
        });
    }
    for l in [a, b] {
        let s = &dims[state.position(l)?];
        if s.dim != 2 {
            return Err(Error::WrongDimension {
                label: l.to_string(),
                dim: s.dim,
                expected: 2,
            });
        }
    }
    let busy: f64 = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| state.digits(*i)[cpos] != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    if busy > BRANCH_EPS {
        return Err(Error::ComparerNotReady(comparer.to_string()));
    }
    let mut local = vec![Complex64::new(0.0, 0.0); 16 * 16];
    for x in 0..2 {
        for y in 0..2 {
            for c in 0..4 {
                let col = (x * 2 + y) * 4 + c;
                let row = (x * 2 + y) * 4 + (c + 2 * x + y) % 4;
                local[row * 16 + col] = Complex64::new(1.0, 0.0);
            }
        }
    }
    let op = Operator::embed(dims.to_vec(), &[a, b, comparer], &local, true)?;
    state.apply(&op)
}

/// Comparison of the A and B apparatus readings into `comparer`.
pub fn comparison_measurement(state: &StateVector, comparer: &str) -> Result<StateVector> {
    compare_pointers(state, comparer, APPARATUS_A, APPARATUS_B)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stage {
    pub name: String,
    #[serde(skip)]
    pub state: StateVector,
    pub event: Event,
    pub branches: Vec<Branch>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolTrace {
    pub stages: Vec<Stage>,
    #[serde(skip)]
    pub bases: PointerBases,
    pub final_branches: Vec<Branch>,
}

impl ProtocolTrace {
    fn new(bases: PointerBases) -> Self {
        Self {
            stages: Vec::new(),
            bases,
            final_branches: Vec::new(),
        }
    }

    fn push(&mut self, name: &str, state: StateVector, event: Event) -> Result<()> {
        let branches = decompose(&state, &self.bases)?;
        self.final_branches = branches.clone();
        self.stages.push(Stage {
            name: name.to_string(),
            state,
            event,
            branches,
        });
        Ok(())
    }

    pub fn stage(&self, name: &str) -> Option<&Stage> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn final_state(&self) -> &StateVector {
        &self.stages.last().expect("traces have at least one stage").state
    }

    /// Distinct stage events in order of first appearance.
    pub fn events(&self) -> Vec<Event> {
        let mut out: Vec<Event> = Vec::new();
        for s in &self.stages {
            if !out.contains(&s.event) {
                out.push(s.event.clone());
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasurementOrder {
    AThenB,
    BThenA,
}

fn preparation_event() -> Event {
    Event::new(0.0, 0.0, Role::Preparation, "source")
}

fn measurement_a_event() -> Event {
    Event::new(1.0, -2.0, Role::MeasurementA, "A")
}

fn measurement_b_event() -> Event {
    Event::new(1.0, 2.0, Role::MeasurementB, "B")
}

fn comparison_event() -> Event {
    Event::new(4.0, 0.0, Role::Comparison, "C")
}

fn comparer_basis() -> PointerBasis {
    PointerBasis::computational(&["uu", "ud", "du", "dd"])
}

/// Bases for a run with A measuring along z and B along `theta`.
pub fn protocol_bases(theta: f64) -> PointerBases {
    let apparatus_b = if theta == 0.0 {
        PointerBasis::computational(&["up", "down"])
    } else {
        PointerBasis::computational(&["up_θ", "down_θ"])
    };
    PointerBases::new()
        .with(APPARATUS_A, PointerBasis::computational(&["up", "down"]))
        .with(SPIN_1, PointerBasis::spin(0.0))
        .with(SPIN_2, PointerBasis::spin(theta))
        .with(APPARATUS_B, apparatus_b)
        .with(COMPARER, comparer_basis())
}

/// `|ready⟩_A ⊗ singlet₁₂ ⊗ |ready⟩_B`.
pub fn epr_initial_state() -> StateVector {
    StateVector::up(APPARATUS_A)
        .tensor(&StateVector::singlet(SPIN_1, SPIN_2))
        .and_then(|s| s.tensor(&StateVector::up(APPARATUS_B)))
        .expect("labels are distinct")
}

fn local_measurements(
    trace: &mut ProtocolTrace,
    mut state: StateVector,
    theta: f64,
    order: MeasurementOrder,
) -> Result<StateVector> {
    let steps: [(f64, &str, &str, &str, Event); 2] = [
        (0.0, SPIN_1, APPARATUS_A, stage::MEASURED_A, measurement_a_event()),
        (theta, SPIN_2, APPARATUS_B, stage::MEASURED_B, measurement_b_event()),
    ];
    let sequence = match order {
        MeasurementOrder::AThenB => [0, 1],
        MeasurementOrder::BThenA => [1, 0],
    };
    for k in sequence {
        let (angle, system, apparatus, name, event) = &steps[k];
        let u = measurement_unitary(state.dims(), *angle, system, apparatus)?;
        state = state.apply(&u)?;
        trace.push(name, state.clone(), event.clone())?;
    }
    Ok(state)
}

/// Parallel settings: both sides measure along z.
pub fn run_parallel_epr() -> ProtocolTrace {
    run_parallel_epr_ordered(MeasurementOrder::AThenB)
}

pub fn run_parallel_epr_ordered(order: MeasurementOrder) -> ProtocolTrace {
    let mut trace = ProtocolTrace::new(protocol_bases(0.0));
    let init = epr_initial_state();
    let run = |trace: &mut ProtocolTrace| -> Result<()> {
        trace.push(stage::PREPARED, init.clone(), preparation_event())?;
        local_measurements(trace, init.clone(), 0.0, order)?;
        Ok(())
    };
    run(&mut trace).expect("fixed protocol on fixed labels");
    trace
}

/// A measures along z, B along `theta`; then a comparer reads both
/// apparatus. Stages: prepared, rotated (same state, B side expanded in the
/// rotated basis), measured A, measured B, compared.
pub fn run_nonparallel(theta: f64) -> Result<ProtocolTrace> {
    run_nonparallel_ordered(theta, MeasurementOrder::AThenB)
}

pub fn run_nonparallel_ordered(theta: f64, order: MeasurementOrder) -> Result<ProtocolTrace> {
    if !theta.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut trace = ProtocolTrace::new(protocol_bases(theta));
    let init = epr_initial_state();
    trace.push(stage::PREPARED, init.clone(), preparation_event())?;
    trace.push(stage::ROTATED, init.clone(), preparation_event())?;
    let measured = local_measurements(&mut trace, init, theta, order)?;
    let with_comparer = measured.tensor(&StateVector::basis(COMPARER, 4, 0))?;
    let compared = comparison_measurement(&with_comparer, COMPARER)?;
    trace.push(stage::COMPARED, compared, comparison_event())?;
    Ok(trace)
}

/// Pointer labels fixing a conditioning branch, as (subsystem, label) pairs.
pub type Conditioning = Vec<(String, String)>;

/// Conditioning branches of `from` (with nonzero weight) and whether
/// `to` is definite relative to each.
pub fn cross_region_definiteness(
    state: &StateVector,
    bases: &PointerBases,
    from: &[&str],
    to: &[&str],
) -> Result<Vec<(Conditioning, bool)>> {
    let mut seen: Vec<Conditioning> = Vec::new();
    for br in decompose(state, bases)? {
        let cond: Vec<(String, String)> = from
            .iter()
            .map(|f| {
                br.label_of(f)
                    .map(|l| (f.to_string(), l.to_string()))
                    .ok_or_else(|| Error::UnknownSubsystem(f.to_string()))
            })
            .collect::<Result<_>>()?;
        if !seen.contains(&cond) {
            seen.push(cond);
        }
    }
    seen.into_iter()
        .map(|cond| {
            let refs: Vec<(&str, &str)> = cond.iter().map(|(s, l)| (s.as_str(), l.as_str())).collect();
            let d = is_definite_relative(state, bases, to, &refs)?;
            Ok((cond, d))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefinitenessEntry {
    pub stage: String,
    pub region: String,
    pub conditioning: Vec<(String, String)>,
    pub definite: bool,
}

/// For every stage after the local measurements: is region B definite
/// relative to each branch of region A, and vice versa. Once a comparer is
/// present its reading joins the conditioning branch.
pub fn definiteness_matrix(trace: &ProtocolTrace) -> Result<Vec<DefinitenessEntry>> {
    let mut out = Vec::new();
    for st in &trace.stages {
        let has = |l: &str| st.state.position(l).is_ok();
        if !REGION_A.iter().chain(&REGION_B).all(|l| has(l)) {
            continue;
        }
        if st.name == stage::PREPARED || st.name == stage::ROTATED {
            continue;
        }
        for (region, from, to) in [("B", REGION_A, REGION_B), ("A", REGION_B, REGION_A)] {
            let mut from: Vec<&str> = from.to_vec();
            if has(COMPARER) {
                from.push(COMPARER);
            }
            for (conditioning, definite) in cross_region_definiteness(&st.state, &trace.bases, &from, &to)? {
                out.push(DefinitenessEntry {
                    stage: st.name.clone(),
                    region: region.to_string(),
                    conditioning,
                    definite,
                });
            }
        }
    }
    Ok(out)
}

pub const BOX_L: &str = "box_L";
pub const BOX_R: &str = "box_R";
pub const DETECTOR_L: &str = "det_L";
pub const DETECTOR_R: &str = "det_R";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxesOutcome {
    pub trace: ProtocolTrace,
    pub behavior: Behavior,
    pub oi_report: CheckReport,
    pub no_signalling: CheckReport,
}

/// One particle split evenly between two boxes; each box is opened by a
/// local detector (controlled flip on occupancy).
pub fn einstein_boxes() -> Result<BoxesOutcome> {
    let occupancy = ["empty", "occupied"];
    let detector = ["idle", "found"];
    let bases = PointerBases::new()
        .with(BOX_L, PointerBasis::computational(&occupancy))
        .with(BOX_R, PointerBasis::computational(&occupancy))
        .with(DETECTOR_L, PointerBasis::computational(&detector))
        .with(DETECTOR_R, PointerBasis::computational(&detector));
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let split = StateVector::new(
        vec![Subsystem::qubit(BOX_L), Subsystem::qubit(BOX_R)],
        vec![zero, h, h, zero],
    )?;
    let init = split
        .tensor(&StateVector::up(DETECTOR_L))?
        .tensor(&StateVector::up(DETECTOR_R))?;

    let mut trace = ProtocolTrace::new(bases);
    trace.push(stage::PREPARED, init.clone(), preparation_event())?;
    let cnot = |s: &StateVector, ctl: &str, tgt: &str| -> Result<StateVector> {
        let mut m = vec![zero; 16];
        for (c, t) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let col = c * 2 + t;
            let row = c * 2 + (t ^ c);
            m[row * 4 + col] = Complex64::new(1.0, 0.0);
        }
        s.apply(&Operator::embed(s.dims().to_vec(), &[ctl, tgt], &m, true)?)
    };
    let opened_l = cnot(&init, BOX_L, DETECTOR_L)?;
    trace.push(stage::MEASURED_A, opened_l.clone(), measurement_a_event())?;
    let opened = cnot(&opened_l, BOX_R, DETECTOR_R)?;
    trace.push(stage::MEASURED_B, opened.clone(), measurement_b_event())?;

    // outcome index 0 = found (detector 1), 1 = empty (detector 0)
    let (pl, pr) = (opened.position(DETECTOR_L)?, opened.position(DETECTOR_R)?);
    let mut table = vec![0.0; 4];
    for (i, a) in opened.amplitudes().iter().enumerate() {
        let d = opened.digits(i);
        table[(1 - d[pl]) * 2 + (1 - d[pr])] += a.norm_sqr();
    }
    let scenario = Scenario::new(&["open"], &["open"], &["found", "empty"], &["found", "empty"])?
        .with_context("source", "one particle split between two boxes");
    let behavior = Behavior::new(scenario, table)?;
    let oi_report = check_outcome_independence(&HiddenVariableModel::lambda_free(behavior.clone()), 1e-12);
    let no_signalling = check_no_signalling(&behavior, 1e-12);
    Ok(BoxesOutcome {
        trace,
        behavior,
        oi_report,
        no_signalling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{born_joint, Spin, SpinOutcome};
    use crate::spacetime::validate_protocol;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn labels(br: &Branch) -> Vec<&str> {
        br.labels.iter().map(|(_, l)| l.as_str()).collect()
    }

    #[test]
    fn parallel_final_state() {
        let t = run_parallel_epr();
        let s = t.final_state();
        let h = FRAC_1_SQRT_2;
        for (i, a) in s.amplitudes().iter().enumerate() {
            let want = match s.digits(i).as_slice() {
                [0, 0, 1, 1] => h,
                [1, 1, 0, 0] => -h,
                _ => 0.0,
            };
            assert!((a - Complex64::new(want, 0.0)).norm() < 1e-12);
        }
        let br = &t.final_branches;
        assert_eq!(br.len(), 2);
        assert_eq!(labels(&br[0]), ["up", "up", "down", "down"]);
        assert_eq!(labels(&br[1]), ["down", "down", "up", "up"]);
    }

    #[test]
    fn parallel_order_immaterial() {
        let ab = run_parallel_epr_ordered(MeasurementOrder::AThenB);
        let ba = run_parallel_epr_ordered(MeasurementOrder::BThenA);
        assert_eq!(ab.final_state(), ba.final_state());
    }

    #[test]
    fn parallel_weights_match_born() {
        let singlet = StateVector::singlet(SPIN_1, SPIN_2);
        let p = born_joint(
            &singlet,
            &SpinOutcome::new(SPIN_1, Spin::Up, 0.0),
            &SpinOutcome::new(SPIN_2, Spin::Down, 0.0),
        )
        .unwrap();
        for br in &run_parallel_epr().final_branches {
            assert!((br.weight - p).abs() < 1e-12);
        }
    }

    #[test]
    fn nonparallel_zero_angle_reduces_to_parallel() {
        let t = run_nonparallel(0.0).unwrap();
        let measured = t.stage(stage::MEASURED_B).unwrap();
        assert_eq!(measured.state, *run_parallel_epr().final_state());
        assert_eq!(t.final_branches.len(), 2);
    }

    #[test]
    fn quarter_turn_has_four_equal_branches() {
        let t = run_nonparallel(FRAC_PI_2).unwrap();
        assert_eq!(t.final_branches.len(), 4);
        for br in &t.final_branches {
            assert!((br.weight - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn measured_stage_amplitudes() {
        let theta = 1.1;
        let t = run_nonparallel(theta).unwrap();
        let (s, c) = (theta / 2.0).sin_cos();
        // |↓⟩ = s|↑_θ⟩ + c|↓_θ⟩ and |↑⟩ = c|↑_θ⟩ − s|↓_θ⟩ on system 2
        let want = [
            (["up", "up", "up_θ", "up_θ"], s),
            (["up", "up", "down_θ", "down_θ"], c),
            (["down", "down", "up_θ", "up_θ"], -c),
            (["down", "down", "down_θ", "down_θ"], s),
        ];
        let br = &t.stage(stage::MEASURED_B).unwrap().branches;
        assert_eq!(br.len(), 4);
        for (b, (l, amp)) in br.iter().zip(want) {
            assert_eq!(labels(b), l);
            assert!((b.amplitude - Complex64::new(amp * FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn rotated_stage_is_same_state() {
        let t = run_nonparallel(0.8).unwrap();
        assert_eq!(
            t.stage(stage::PREPARED).unwrap().state,
            t.stage(stage::ROTATED).unwrap().state
        );
    }

    #[test]
    fn relative_state_of_parallel_branch() {
        let t = run_parallel_epr();
        let rel = relative_state(t.final_state(), &t.bases, &[(APPARATUS_A, "up")]).unwrap();
        let want = StateVector::up(SPIN_1)
            .tensor(&StateVector::down(SPIN_2))
            .unwrap()
            .tensor(&StateVector::down(APPARATUS_B))
            .unwrap();
        assert!(rel.distance(&want).unwrap() < 1e-12);
    }

    #[test]
    fn relative_state_entangled_after_local_measurements() {
        let theta = FRAC_PI_3;
        let t = run_nonparallel(theta).unwrap();
        let st = &t.stage(stage::MEASURED_B).unwrap().state;
        let rel = relative_state(st, &t.bases, &[(APPARATUS_A, "up"), (SPIN_1, "up")]).unwrap();
        let branches = decompose(&rel, &t.bases).unwrap();
        let (s, c) = (theta / 2.0).sin_cos();
        assert_eq!(branches.len(), 2);
        assert_eq!(labels(&branches[0]), ["up_θ", "up_θ"]);
        assert!((branches[0].amplitude.re - s).abs() < 1e-12);
        assert_eq!(labels(&branches[1]), ["down_θ", "down_θ"]);
        assert!((branches[1].amplitude.re - c).abs() < 1e-12);
    }

    #[test]
    fn conditioning_on_empty_branch_fails() {
        let t = run_parallel_epr();
        let err = relative_state(t.final_state(), &t.bases, &[(APPARATUS_A, "up"), (SPIN_1, "down")]).unwrap_err();
        assert_eq!(err, Error::EmptyBranch);
        let err = relative_state(t.final_state(), &t.bases, &[(APPARATUS_A, "sideways")]).unwrap_err();
        assert!(matches!(err, Error::UnknownPointerLabel { .. }));
    }

    #[test]
    fn definiteness_in_parallel_case() {
        let t = run_parallel_epr();
        assert!(is_definite_relative(t.final_state(), &t.bases, &REGION_B, &[(APPARATUS_A, "up")]).unwrap());
    }

    #[test]
    fn definiteness_transition_nonparallel() {
        let t = run_nonparallel(FRAC_PI_3).unwrap();
        let measured = &t.stage(stage::MEASURED_B).unwrap().state;
        assert!(!is_definite_relative(measured, &t.bases, &REGION_B, &[(APPARATUS_A, "up")]).unwrap());
        let compared = t.final_state();
        for br in &t.final_branches {
            let cond = [
                (APPARATUS_A, br.label_of(APPARATUS_A).unwrap()),
                (SPIN_1, br.label_of(SPIN_1).unwrap()),
                (COMPARER, br.label_of(COMPARER).unwrap()),
            ];
            assert!(is_definite_relative(compared, &t.bases, &REGION_B, &cond).unwrap());
        }
    }

    #[test]
    fn comparison_on_single_branch() {
        let s = StateVector::down(APPARATUS_A)
            .tensor(&StateVector::up(APPARATUS_B))
            .unwrap()
            .tensor(&StateVector::basis(COMPARER, 4, 0))
            .unwrap();
        let out = comparison_measurement(&s, COMPARER).unwrap();
        let br = decompose(&out, &protocol_bases(0.0)).unwrap();
        assert_eq!(br.len(), 1);
        assert_eq!(br[0].label_of(COMPARER), Some("du"));
    }

    #[test]
    fn comparison_requires_ready_comparer() {
        let s = StateVector::up(APPARATUS_A)
            .tensor(&StateVector::up(APPARATUS_B))
            .unwrap()
            .tensor(&StateVector::basis(COMPARER, 4, 2))
            .unwrap();
        assert_eq!(
            comparison_measurement(&s, COMPARER).unwrap_err(),
            Error::ComparerNotReady(COMPARER.into())
        );
    }

    #[test]
    fn trace_events_are_causally_ordered() {
        let t = run_nonparallel(0.7).unwrap();
        let events = t.events();
        assert!(validate_protocol(&events).unwrap().all_passed());
        for w in t.stages.windows(2) {
            assert!(w[0].event.t <= w[1].event.t);
        }
        for st in &t.stages {
            assert!(st.state.is_normalized(1e-12));
        }
    }

    #[test]
    fn boxes() {
        let out = einstein_boxes().unwrap();
        assert_eq!(out.trace.final_branches.len(), 2);
        for br in &out.trace.final_branches {
            assert!((br.weight - 0.5).abs() < 1e-12);
        }
        assert!(out.behavior.p(0, 0, 0, 0).abs() < 1e-15);
        assert!(!out.oi_report.passed);
        assert!((out.oi_report.max_violation - 0.5).abs() < 1e-12);
        assert!(out.no_signalling.passed);
    }
}
