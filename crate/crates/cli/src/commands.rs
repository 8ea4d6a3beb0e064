use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

use locality_lab::behavior::{angle_label, sign_model, HiddenVariableModel, Scenario};
use locality_lab::causality::{
    check_factorizability, check_no_signalling, check_outcome_independence,
    check_parameter_independence, jarrett_decomposition, suppes_zanotti_reduction, CheckReport,
    ReductionVerdict, Witness, DEFAULT_DETERMINISM_TOL,
};
use locality_lab::document::{ModelInput, ScenarioDocument};
use locality_lab::everett::{
    definiteness_matrix, einstein_boxes, run_nonparallel, run_parallel_epr, Branch, DefinitenessEntry,
    ProtocolTrace,
};
use locality_lab::inequalities::{bell_1964, classical_bound, quantum_max, CorrelatorSet};
use locality_lab::qstate::StateVector;
use locality_lab::spacetime::{region3_screens, validate_protocol, Event, ScreeningReport};

use crate::render::{num, pass_fail, sci, yes_no, Table};
use crate::{
    ChshMode, ConditionName, Format, Mode, Outcome, RunConfig, StateName, EXIT_CHECK_FAILED, EXIT_PASS,
};

type CmdResult = Result<Outcome, String>;

/// Largest number of grid angles per side accepted by `chsh --grid`.
const MAX_GRID: usize = 20_000;

pub fn run(cfg: &RunConfig) -> CmdResult {
    match &cfg.mode {
        Mode::Check { conditions } => check(cfg, conditions),
        Mode::Chsh { mode, state } => chsh(cfg, *mode, *state),
        Mode::Bell1964 { a, b, c } => bell1964(cfg, *a, *b, *c),
        Mode::Everett { theta } => everett(cfg, *theta),
        Mode::Boxes => boxes(cfg),
        Mode::SignModel { n, settings } => signmodel(cfg, *n, settings),
        Mode::Timeline => timeline(cfg),
    }
}

fn ok(output: String) -> CmdResult {
    Ok(Outcome {
        output,
        code: EXIT_PASS,
    })
}

fn verdict(output: String, passed: bool) -> CmdResult {
    Ok(Outcome {
        output,
        code: if passed { EXIT_PASS } else { EXIT_CHECK_FAILED },
    })
}

fn json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| e.to_string())
}

fn csv_rows<S: AsRef<str>>(header: &[&str], rows: impl IntoIterator<Item = Vec<S>>) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| e.to_string())?;
    for r in rows {
        w.write_record(r.iter().map(|c| c.as_ref())).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

fn read_input(path: Option<&Path>) -> Result<(String, String), String> {
    let path = path.ok_or("an input file is required")?;
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| format!("{shown}: {e}"))?;
    Ok((shown, text))
}

fn condition_name(c: ConditionName) -> String {
    c.to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default()
}

#[derive(Serialize)]
struct ConditionResult {
    condition: String,
    passed: bool,
    max_violation: Option<f64>,
    witness: Option<Witness>,
    skipped_cells: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
}

impl ConditionResult {
    fn from_report(c: ConditionName, r: CheckReport) -> Self {
        Self {
            condition: condition_name(c),
            passed: r.passed,
            max_violation: Some(r.max_violation),
            witness: r.witness,
            skipped_cells: r.skipped_cells,
            notes: r.notes,
        }
    }
}

#[derive(Serialize)]
struct CheckOutput {
    input: &'static str,
    tolerance: f64,
    passed: bool,
    results: Vec<ConditionResult>,
}

fn evaluate(m: &HiddenVariableModel, c: ConditionName, tol: f64) -> Result<ConditionResult, String> {
    Ok(match c {
        ConditionName::NoSignalling => {
            let avg = locality_lab::behavior::average(m);
            ConditionResult::from_report(c, check_no_signalling(&avg, tol))
        }
        ConditionName::ParameterIndependence => ConditionResult::from_report(c, check_parameter_independence(m, tol)),
        ConditionName::OutcomeIndependence => ConditionResult::from_report(c, check_outcome_independence(m, tol)),
        ConditionName::Factorizability => ConditionResult::from_report(c, check_factorizability(m, tol)),
        ConditionName::Jarrett => {
            let j = jarrett_decomposition(m, tol).map_err(|e| e.to_string())?;
            ConditionResult {
                condition: condition_name(c),
                passed: j.equivalent(),
                max_violation: None,
                witness: None,
                skipped_cells: 0,
                notes: vec![format!(
                    "factorizability {} ({}), parameter independence {} ({}), outcome independence {} ({})",
                    pass_fail(j.factorizability.passed),
                    sci(j.factorizability.max_violation),
                    pass_fail(j.parameter_independence.passed),
                    sci(j.parameter_independence.max_violation),
                    pass_fail(j.outcome_independence.passed),
                    sci(j.outcome_independence.max_violation),
                )],
            }
        }
        ConditionName::SuppesZanotti => {
            let r = suppes_zanotti_reduction(m, tol, DEFAULT_DETERMINISM_TOL).map_err(|e| e.to_string())?;
            let (a, b) = r.anticorrelation_pair;
            ConditionResult {
                condition: condition_name(c),
                passed: r.verdict != ReductionVerdict::Fails,
                max_violation: Some(r.determinism.max_violation),
                witness: r.determinism.witness.clone(),
                skipped_cells: r.determinism.skipped_cells,
                notes: vec![format!(
                    "verdict {:?}; factorizability {}; P(A = B) at parallel pair ({a}, {b}) = {}",
                    r.verdict,
                    pass_fail(r.factorizability.passed),
                    sci(r.anticorrelation_deficit),
                )],
            }
        }
    })
}

fn describe_witness(s: &Scenario, w: &Witness) -> String {
    let mut parts = Vec::new();
    if let Some(l) = w.lambda {
        parts.push(format!("λ={l}"));
    }
    parts.push(format!("a={}", s.settings_a[w.setting_a]));
    parts.push(format!("b={}", s.settings_b[w.setting_b]));
    if let Some(x) = w.outcome_a {
        parts.push(format!("A={}", s.outcomes_a[x]));
    }
    if let Some(y) = w.outcome_b {
        parts.push(format!("B={}", s.outcomes_b[y]));
    }
    if let Some(alt) = w.alt_setting {
        let label = if w.outcome_a.is_some() {
            format!("b'={}", s.settings_b[alt])
        } else {
            format!("a'={}", s.settings_a[alt])
        };
        parts.push(label);
    }
    parts.join(" ")
}

fn check(cfg: &RunConfig, conditions: &[ConditionName]) -> CmdResult {
    let (shown, text) = read_input(cfg.input_path.as_deref())?;
    let doc = ScenarioDocument::parse(&text).map_err(|e| format!("{shown}: {e}"))?;
    let input = doc.model_input().map_err(|e| format!("{shown}: {e}"))?;
    let kind = match input {
        ModelInput::Behavior(_) => "behavior",
        ModelInput::Model(_) => "model",
    };
    let model = input.into_model();
    let requested: Vec<ConditionName> = if conditions.is_empty() {
        vec![
            ConditionName::NoSignalling,
            ConditionName::ParameterIndependence,
            ConditionName::OutcomeIndependence,
            ConditionName::Factorizability,
        ]
    } else {
        conditions.to_vec()
    };
    let results = requested
        .iter()
        .map(|&c| evaluate(&model, c, cfg.tolerance))
        .collect::<Result<Vec<_>, _>>()?;
    let passed = results.iter().all(|r| r.passed);
    let report = CheckOutput {
        input: kind,
        tolerance: cfg.tolerance,
        passed,
        results,
    };
    let out = match cfg.output_format {
        Format::Json => json(&report)?,
        Format::Csv => csv_rows(
            &["condition", "passed", "max_violation", "skipped_cells"],
            report.results.iter().map(|r| {
                vec![
                    r.condition.clone(),
                    r.passed.to_string(),
                    r.max_violation.map(|v| v.to_string()).unwrap_or_default(),
                    r.skipped_cells.to_string(),
                ]
            }),
        )?,
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "input: {kind} ({} λ), tolerance {}", model.len(), cfg.tolerance);
            let mut t = Table::new(&["condition", "result", "max violation", "witness"]);
            for r in &report.results {
                t.row(vec![
                    r.condition.clone(),
                    pass_fail(r.passed),
                    r.max_violation.map(sci).unwrap_or_else(|| "-".into()),
                    r.witness
                        .as_ref()
                        .map(|w| describe_witness(model.scenario(), w))
                        .unwrap_or_else(|| "-".into()),
                ]);
            }
            t.render(&mut out);
            for r in &report.results {
                for n in &r.notes {
                    let _ = writeln!(out, "note ({}): {n}", r.condition);
                }
            }
            let _ = writeln!(out, "overall: {}", pass_fail(passed));
            out
        }
    };
    verdict(out, passed)
}

fn named_state(s: StateName) -> Result<StateVector, String> {
    match s {
        StateName::Singlet => Ok(StateVector::singlet("1", "2")),
        StateName::Triplet0 => Ok(StateVector::triplet_zero("1", "2")),
        StateName::Product => StateVector::up("1")
            .tensor(&StateVector::up("2"))
            .map_err(|e| e.to_string()),
    }
}

fn state_name(s: StateName) -> String {
    s.to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default()
}

fn chsh(cfg: &RunConfig, mode: ChshMode, state: StateName) -> CmdResult {
    let psi = named_state(state)?;
    match mode {
        ChshMode::Optimize => {
            let q = quantum_max(&psi, PI / 24.0, 60).map_err(|e| e.to_string())?;
            let angles = q.result.angles.unwrap_or([f64::NAN; 4]);
            let out = match cfg.output_format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Out<'a> {
                        state: String,
                        abs_s: f64,
                        result: &'a locality_lab::inequalities::QuantumMax,
                    }
                    json(&Out {
                        state: state_name(state),
                        abs_s: q.result.value.abs(),
                        result: &q,
                    })?
                }
                Format::Csv => csv_rows(
                    &["a", "a_prime", "b", "b_prime", "S", "abs_S"],
                    [angles
                        .iter()
                        .chain([q.result.value, q.result.value.abs()].iter())
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()],
                )?,
                Format::Table => {
                    let mut out = String::new();
                    let mut t = Table::new(&["quantity", "value"]);
                    t.row(vec!["state".into(), state_name(state)]);
                    for (name, v) in ["a", "a'", "b", "b'"].iter().zip(angles) {
                        t.row(vec![name.to_string(), num(v)]);
                    }
                    t.row(vec!["S".into(), num(q.result.value)]);
                    t.row(vec!["|S|".into(), num(q.result.value.abs())]);
                    t.row(vec!["grid |S|".into(), num(q.grid_value)]);
                    t.row(vec!["evaluations".into(), q.evaluations.to_string()]);
                    t.render(&mut out);
                    out
                }
            };
            ok(out)
        }
        ChshMode::Grid { step } => {
            let n = (TAU / step).ceil();
            if !(n.is_finite() && n < MAX_GRID as f64) {
                return Err(format!("--step {step} gives more than {MAX_GRID} angles per side"));
            }
            let angles: Vec<f64> = (0..=n as usize).map(|k| k as f64 * step).collect();
            let table = CorrelatorSet::quantum(&psi, &angles, &angles).map_err(|e| e.to_string())?;
            let mut buf = Vec::new();
            table.write_csv(&mut buf).map_err(|e| e.to_string())?;
            ok(String::from_utf8(buf).map_err(|e| e.to_string())?)
        }
        ChshMode::Classical => {
            let scenario = Scenario::binary(&["a", "a'"], &["b", "b'"]).map_err(|e| e.to_string())?;
            let cb = classical_bound(&scenario).map_err(|e| e.to_string())?;
            let pm = |i: usize| if i == 0 { "+1" } else { "-1" }.to_string();
            let rows: Vec<Vec<String>> = cb
                .strategies
                .iter()
                .map(|s| {
                    vec![
                        pm(s.out_a[0]),
                        pm(s.out_a[1]),
                        pm(s.out_b[0]),
                        pm(s.out_b[1]),
                        format!("{}", s.value),
                        format!("{}", s.value.abs()),
                    ]
                })
                .collect();
            let out = match cfg.output_format {
                Format::Json => json(&cb)?,
                Format::Csv => csv_rows(&["A_a", "A_a_prime", "B_b", "B_b_prime", "S", "abs_S"], rows)?,
                Format::Table => {
                    let mut out = String::new();
                    let mut t = Table::new(&["A(a)", "A(a')", "B(b)", "B(b')", "S", "|S|"]);
                    for r in rows {
                        t.row(r);
                    }
                    t.render(&mut out);
                    let _ = writeln!(out, "max |S| = {}", cb.max_abs);
                    out
                }
            };
            ok(out)
        }
    }
}

fn bell1964(cfg: &RunConfig, a: f64, b: f64, c: f64) -> CmdResult {
    if ![a, b, c].iter().all(|t| t.is_finite()) {
        return Err("angles must be finite".into());
    }
    let mut angles: Vec<f64> = Vec::new();
    for t in [a, b, c] {
        if !angles.iter().any(|&u| angle_label(u) == angle_label(t)) {
            angles.push(t);
        }
    }
    let singlet = StateVector::singlet("1", "2");
    let cs = CorrelatorSet::quantum(&singlet, &angles, &angles).map_err(|e| e.to_string())?;
    let r = bell_1964(&cs, &angle_label(a), &angle_label(b), &angle_label(c)).map_err(|e| e.to_string())?;
    let satisfied = r.slack >= -cfg.tolerance;
    let out = match cfg.output_format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                a: f64,
                b: f64,
                c: f64,
                satisfied: bool,
                #[serde(flatten)]
                result: &'a locality_lab::inequalities::Bell1964,
            }
            json(&Out {
                a,
                b,
                c,
                satisfied,
                result: &r,
            })?
        }
        Format::Csv => csv_rows(
            &["a", "b", "c", "E_ab", "E_ac", "E_bc", "slack", "satisfied"],
            [vec![
                a.to_string(),
                b.to_string(),
                c.to_string(),
                r.e_ab.to_string(),
                r.e_ac.to_string(),
                r.e_bc.to_string(),
                r.slack.to_string(),
                satisfied.to_string(),
            ]],
        )?,
        Format::Table => {
            let mut out = String::new();
            let mut t = Table::new(&["quantity", "value"]);
            t.row(vec!["E(a,b)".into(), num(r.e_ab)]);
            t.row(vec!["E(a,c)".into(), num(r.e_ac)]);
            t.row(vec!["E(b,c)".into(), num(r.e_bc)]);
            t.row(vec!["1 + E(b,c) - |E(a,b) - E(a,c)|".into(), num(r.slack)]);
            t.row(vec!["inequality satisfied".into(), yes_no(satisfied)]);
            t.row(vec!["E(x,x) = -1 for x in {a,b,c}".into(), yes_no(r.precondition_holds)]);
            t.render(&mut out);
            out
        }
    };
    ok(out)
}

/// Subsystem labels across all stages, in order of first appearance.
fn subsystem_columns(trace: &ProtocolTrace) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    for st in &trace.stages {
        for br in &st.branches {
            for (s, _) in &br.labels {
                if !cols.contains(s) {
                    cols.push(s.clone());
                }
            }
        }
    }
    cols
}

fn branch_table(out: &mut String, branches: &[Branch]) {
    let Some(first) = branches.first() else {
        out.push_str("  (no branches)\n");
        return;
    };
    let mut header: Vec<String> = first.labels.iter().map(|(s, _)| s.clone()).collect();
    header.extend(["re", "im", "weight"].map(String::from));
    let mut t = Table::new(&header);
    for br in branches {
        let mut row: Vec<String> = br.labels.iter().map(|(_, l)| l.clone()).collect();
        row.extend([num(br.amplitude.re), num(br.amplitude.im), num(br.weight)]);
        t.row(row);
    }
    let mut body = String::new();
    t.render(&mut body);
    for line in body.lines() {
        let _ = writeln!(out, "  {line}");
    }
}

fn conditioning_text(c: &[(String, String)]) -> String {
    c.iter().map(|(s, l)| format!("{s}={l}")).collect::<Vec<_>>().join(", ")
}

fn everett(cfg: &RunConfig, theta: f64) -> CmdResult {
    let trace = if theta == 0.0 {
        run_parallel_epr()
    } else {
        run_nonparallel(theta).map_err(|e| e.to_string())?
    };
    let matrix = definiteness_matrix(&trace).map_err(|e| e.to_string())?;
    let out = match cfg.output_format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                theta: f64,
                trace: &'a ProtocolTrace,
                definiteness: &'a [DefinitenessEntry],
            }
            json(&Out {
                theta,
                trace: &trace,
                definiteness: &matrix,
            })?
        }
        Format::Csv => {
            let cols = subsystem_columns(&trace);
            let mut header: Vec<&str> = vec!["stage"];
            header.extend(cols.iter().map(String::as_str));
            header.extend(["re", "im", "weight"]);
            let rows = trace.stages.iter().flat_map(|st| {
                st.branches.iter().map(|br| {
                    let mut row = vec![st.name.clone()];
                    row.extend(cols.iter().map(|c| br.label_of(c).unwrap_or("").to_string()));
                    row.extend([
                        br.amplitude.re.to_string(),
                        br.amplitude.im.to_string(),
                        br.weight.to_string(),
                    ]);
                    row
                })
            });
            csv_rows(&header, rows)?
        }
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "theta = {theta}");
            for st in &trace.stages {
                let _ = writeln!(
                    out,
                    "\nstage: {}  [{:?} at t={}, x={}]",
                    st.name, st.event.role, st.event.t, st.event.x
                );
                branch_table(&mut out, &st.branches);
            }
            let _ = writeln!(out, "\ndefiniteness (is the region definite relative to the conditioning branch?)");
            let mut t = Table::new(&["stage", "region", "conditioning", "definite"]);
            for e in &matrix {
                t.row(vec![
                    e.stage.clone(),
                    e.region.clone(),
                    conditioning_text(&e.conditioning),
                    yes_no(e.definite),
                ]);
            }
            t.render(&mut out);
            out
        }
    };
    ok(out)
}

fn boxes(cfg: &RunConfig) -> CmdResult {
    let b = einstein_boxes().map_err(|e| e.to_string())?;
    let s = b.behavior.scenario();
    let (sa, sb, oa, ob) = s.shape();
    let mut cells = Vec::new();
    for a in 0..sa {
        for bb in 0..sb {
            for x in 0..oa {
                for y in 0..ob {
                    cells.push((a, bb, x, y, b.behavior.p(a, bb, x, y)));
                }
            }
        }
    }
    let out = match cfg.output_format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                trace: &'a ProtocolTrace,
                behavior: &'a locality_lab::behavior::Behavior,
                no_signalling: &'a CheckReport,
                outcome_independence: &'a CheckReport,
            }
            json(&Out {
                trace: &b.trace,
                behavior: &b.behavior,
                no_signalling: &b.no_signalling,
                outcome_independence: &b.oi_report,
            })?
        }
        Format::Csv => csv_rows(
            &["a", "b", "A", "B", "P"],
            cells.iter().map(|&(a, bb, x, y, p)| {
                vec![
                    s.settings_a[a].clone(),
                    s.settings_b[bb].clone(),
                    s.outcomes_a[x].clone(),
                    s.outcomes_b[y].clone(),
                    p.to_string(),
                ]
            }),
        )?,
        Format::Table => {
            let mut out = String::new();
            for st in &b.trace.stages {
                let _ = writeln!(out, "stage: {}", st.name);
                branch_table(&mut out, &st.branches);
            }
            out.push_str("\nbehavior\n");
            let mut t = Table::new(&["a", "b", "A", "B", "P"]);
            for &(a, bb, x, y, p) in &cells {
                t.row(vec![
                    s.settings_a[a].clone(),
                    s.settings_b[bb].clone(),
                    s.outcomes_a[x].clone(),
                    s.outcomes_b[y].clone(),
                    num(p),
                ]);
            }
            t.render(&mut out);
            out.push('\n');
            let mut t = Table::new(&["condition", "result", "max violation"]);
            for (name, r) in [("no-signalling", &b.no_signalling), ("outcome-independence", &b.oi_report)] {
                t.row(vec![name.to_string(), pass_fail(r.passed), sci(r.max_violation)]);
            }
            t.render(&mut out);
            out
        }
    };
    ok(out)
}

/// Sign-model correlation for directions separated by `delta` in the plane.
fn linear_correlation(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(TAU);
    let d = if d > PI { TAU - d } else { d };
    -1.0 + 2.0 * d / PI
}

fn signmodel(cfg: &RunConfig, n: u64, settings: &[f64]) -> CmdResult {
    let seed = cfg.seed.ok_or("--seed is required")?;
    let run = sign_model(settings, settings, n, seed).map_err(|e| e.to_string())?;
    let rows: Vec<(f64, f64, f64, f64)> = settings
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| {
            let c = &run.correlators;
            settings
                .iter()
                .enumerate()
                .map(move |(j, &b)| (a, b, c.get(i, j), linear_correlation(a, b)))
        })
        .collect();
    let out = match cfg.output_format {
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                a: f64,
                b: f64,
                e: f64,
                e_model: f64,
            }
            #[derive(Serialize)]
            struct Out {
                samples: u64,
                seed: u64,
                distinct_lambdas: usize,
                correlators: Vec<Row>,
            }
            json(&Out {
                samples: run.samples,
                seed,
                distinct_lambdas: run.model.len(),
                correlators: rows
                    .iter()
                    .map(|&(a, b, e, e_model)| Row { a, b, e, e_model })
                    .collect(),
            })?
        }
        Format::Csv => csv_rows(
            &["a", "b", "E", "E_model"],
            rows.iter()
                .map(|&(a, b, e, m)| vec![a.to_string(), b.to_string(), e.to_string(), m.to_string()]),
        )?,
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "samples {}, seed {seed}, distinct λ {}",
                run.samples,
                run.model.len()
            );
            let mut t = Table::new(&["a", "b", "E", "-1 + 2|a-b|/π", "difference"]);
            for &(a, b, e, m) in &rows {
                t.row(vec![a.to_string(), b.to_string(), num(e), num(m), sci(e - m)]);
            }
            t.render(&mut out);
            out
        }
    };
    ok(out)
}

fn timeline(cfg: &RunConfig) -> CmdResult {
    let (shown, text) = read_input(cfg.input_path.as_deref())?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("{shown}: {e}"))?;
    let (events, slab): (Vec<Event>, Option<(f64, f64)>) = if value.is_array() {
        (serde_json::from_value(value).map_err(|e| format!("{shown}: {e}"))?, None)
    } else {
        let doc = ScenarioDocument::parse(&text).map_err(|e| format!("{shown}: {e}"))?;
        let events = doc
            .timeline
            .ok_or_else(|| format!("{shown}: missing field `timeline`"))?;
        (events, doc.region3)
    };
    let report = validate_protocol(&events).map_err(|e| format!("{shown}: {e}"))?;
    let screening: Option<ScreeningReport> = slab
        .map(|s| region3_screens(&events, s))
        .transpose()
        .map_err(|e| format!("{shown}: {e}"))?;
    let passed = report.all_passed() && screening.as_ref().is_none_or(|s| s.screens);
    let out = match cfg.output_format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                passed: bool,
                predicates: &'a [locality_lab::spacetime::Predicate],
                region3: Option<&'a ScreeningReport>,
            }
            json(&Out {
                passed,
                predicates: &report.predicates,
                region3: screening.as_ref(),
            })?
        }
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = report
                .predicates
                .iter()
                .map(|p| vec![p.name.clone(), p.passed.to_string()])
                .collect();
            if let Some(s) = &screening {
                rows.push(vec!["region 3 screens both backward light cones".into(), s.screens.to_string()]);
            }
            csv_rows(&["predicate", "passed"], rows)?
        }
        Format::Table => {
            let mut out = String::new();
            let mut t = Table::new(&["event", "role", "t", "x"]);
            for e in &events {
                t.row(vec![e.label.clone(), format!("{:?}", e.role), e.t.to_string(), e.x.to_string()]);
            }
            t.render(&mut out);
            out.push('\n');
            let mut t = Table::new(&["predicate", "result"]);
            for p in &report.predicates {
                t.row(vec![p.name.clone(), pass_fail(p.passed)]);
            }
            if let Some(s) = &screening {
                t.row(vec![
                    format!("region 3 [{}, {}] screens both backward light cones", s.slab.0, s.slab.1),
                    pass_fail(s.screens),
                ]);
            }
            t.render(&mut out);
            out
        }
    };
    verdict(out, passed)
}
