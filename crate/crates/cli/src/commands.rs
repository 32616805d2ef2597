use rayon::prelude::*;
use serde::Serialize;
use strsub::bounds::Theorem;
use strsub::curvature::*;
use strsub::infogain::SubmodularityReport;
use strsub::matroid::{constrained_greedy, constrained_optimal, validate_axioms};
use strsub::{
    backward_greedy, greedy, normalize, optimal_exhaustive, run_bound_suite, ActionString, BoundCheck, Error,
    GreedyTrace, Memoized, ProblemSpec, SuiteConfig, SuiteReport, Violation,
};

use crate::instance::{apply_axis, default_matroid, Axis, Instance, Source};
use crate::output::{num, opt, Output};
use crate::{CliError, RunConfig};

fn ratio(value: f64, optimal: f64) -> Option<f64> {
    (optimal != 0.0).then(|| value / optimal)
}

fn suite_config(cfg: &RunConfig) -> SuiteConfig {
    SuiteConfig { tol: cfg.tol, budget: cfg.budget, eta_search_len: cfg.search_len, ..Default::default() }
}

/// Drops quantities whose every candidate ratio is undefined.
fn defined(r: strsub::Result<CurvatureReport>) -> Result<Option<CurvatureReport>, CliError> {
    match r {
        Ok(r) => Ok(Some(r)),
        Err(Error::Degenerate { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct SolveReport {
    num_actions: usize,
    horizon: usize,
    constrained: bool,
    greedy: GreedyTrace,
    backward_greedy: Option<GreedyTrace>,
    optimal: ActionString,
    optimal_value: f64,
    measured_ratio: Option<f64>,
}

pub fn solve(cfg: &RunConfig, inst: &Instance) -> Result<Output, CliError> {
    let f = Memoized::new(&inst.oracle);
    let spec = ProblemSpec::new(&f, inst.num_actions, inst.horizon)?.with_budget(cfg.budget);
    let report = match inst.build_matroid()? {
        Some(m) => {
            let g = constrained_greedy(&spec, m.as_ref())?;
            let (optimal, optimal_value) = constrained_optimal(&spec, m.as_ref())?;
            SolveReport {
                num_actions: inst.num_actions,
                horizon: m.rank(),
                constrained: true,
                measured_ratio: ratio(g.value(), optimal_value),
                greedy: g,
                backward_greedy: None,
                optimal,
                optimal_value,
            }
        }
        None => {
            let g = greedy(&spec)?;
            let b = backward_greedy(&spec)?;
            let (optimal, optimal_value) = optimal_exhaustive(&spec)?;
            SolveReport {
                num_actions: inst.num_actions,
                horizon: inst.horizon,
                constrained: false,
                measured_ratio: ratio(g.value(), optimal_value),
                greedy: g,
                backward_greedy: Some(b),
                optimal,
                optimal_value,
            }
        }
    };
    let mut rows = Vec::new();
    let mut row = |name: &str, s: &ActionString, v: f64| {
        rows.push(vec![name.to_string(), s.to_string(), num(v), opt(ratio(v, report.optimal_value))]);
    };
    row("greedy", &report.greedy.strategy, report.greedy.value());
    if let Some(b) = &report.backward_greedy {
        row("backward_greedy", &b.strategy, b.value());
    }
    row("optimal", &report.optimal, report.optimal_value);
    Output::new(&["strategy", "string", "value", "ratio"], rows, &report)
}

#[derive(Serialize)]
struct ClosedForm {
    quantity: &'static str,
    index: Option<usize>,
    value: f64,
}

#[derive(Serialize)]
struct CurvatureOutput {
    num_actions: usize,
    horizon: usize,
    reports: Vec<CurvatureReport>,
    closed_forms: Vec<ClosedForm>,
    submodularity: Option<SubmodularityReport>,
}

pub fn curvature(cfg: &RunConfig, inst: &Instance) -> Result<Output, CliError> {
    let f = Memoized::new(normalize(&inst.oracle)?);
    let (n, k, b) = (inst.num_actions, inst.horizon, cfg.budget);
    let mut reports = Vec::new();
    reports.extend(defined(total_backward_sigma(&f, n, cfg.search_len.unwrap_or(k), b))?);
    reports.extend(defined(total_forward_epsilon(&f, n, cfg.search_len.unwrap_or(k), b))?);
    reports.extend(defined(elemental_forward_eta(&f, n, cfg.search_len.unwrap_or(2 * k - 2), b))?);
    reports.extend(defined(restricted_sigma_hat(&f, n, k, b))?);
    for i in 1..=k {
        reports.extend(defined(restricted_epsilon_hat(&f, n, i, k, b))?);
    }
    reports.extend(defined(restricted_eta_hat(&f, n, k, b))?);

    let mut closed_forms = Vec::new();
    let mut submodularity = None;
    if let Some(m) = inst.tasks() {
        closed_forms.push(ClosedForm { quantity: "eta_upper", index: None, value: m.eta_upper() });
        closed_forms.push(ClosedForm {
            quantity: "sigma_hat_closed_form",
            index: None,
            value: m.sigma_hat_closed_form(),
        });
        for i in 1..=k {
            let value = m.epsilon_hat_closed_form(i);
            closed_forms.push(ClosedForm { quantity: "epsilon_hat_closed_form", index: Some(i), value });
        }
    }
    if let Some(m) = inst.infogain() {
        let lower = m.eta_hat_lower_closed_form().value;
        closed_forms.push(ClosedForm { quantity: "eta_hat_lower_closed_form", index: None, value: lower });
        let upper = m.eta_hat_upper_closed_form().value;
        closed_forms.push(ClosedForm { quantity: "eta_hat_upper_closed_form", index: None, value: upper });
        submodularity = Some(m.submodularity_witness(b, cfg.tol)?);
    }

    let mut rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.kind.to_string(),
                r.index.map(|i| i.to_string()).unwrap_or_default(),
                num(r.value),
                r.search_len.to_string(),
                r.witness.actions.to_string(),
                r.witness.base.to_string(),
                r.candidates.to_string(),
                r.skipped.to_string(),
            ]
        })
        .collect();
    for c in &closed_forms {
        let index = c.index.map(|i| i.to_string()).unwrap_or_default();
        rows.push(vec![
            c.quantity.to_string(),
            index,
            num(c.value),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    let header =
        ["quantity", "index", "value", "search_len", "witness_actions", "witness_base", "candidates", "skipped"];
    let out = CurvatureOutput { num_actions: n, horizon: k, reports, closed_forms, submodularity };
    Output::new(&header, rows, &out)
}

fn suite(cfg: &RunConfig, inst: &Instance) -> Result<SuiteReport, CliError> {
    let spec = ProblemSpec::new(&inst.oracle, inst.num_actions, inst.horizon)?;
    let m = inst.build_matroid()?;
    Ok(run_bound_suite(&spec, m.as_deref(), &suite_config(cfg))?)
}

/// Returns the output and whether any check failed.
pub fn bounds(cfg: &RunConfig, inst: &Instance) -> Result<(Output, bool), CliError> {
    let report = suite(cfg, inst)?;
    let rows = report.checks.iter().map(check_row).collect();
    let header =
        ["theorem", "status", "hypotheses_met", "guaranteed_ratio", "raw_bound", "measured_ratio", "diagnostics"];
    let failed = report.failures().next().is_some();
    Ok((Output::new(&header, rows, &report)?, failed))
}

fn check_row(c: &BoundCheck) -> Vec<String> {
    vec![
        c.theorem.to_string(),
        c.status.to_string(),
        c.hypotheses_met.to_string(),
        num(c.guaranteed_ratio),
        num(c.raw_bound),
        num(c.measured_ratio),
        c.diagnostics.join("; "),
    ]
}

#[derive(Serialize)]
struct MatroidValidation {
    rank: usize,
    valid: bool,
    checked: u64,
    max_len: usize,
    violations: Vec<Violation>,
}

pub fn validate_matroid(cfg: &RunConfig, inst: &Instance) -> Result<Output, CliError> {
    let m = match inst.build_matroid()? {
        Some(m) => m,
        None => default_matroid(inst, cfg.seed)?,
    };
    let report = validate_axioms(m.as_ref(), inst.num_actions, cfg.budget)?;
    let out = MatroidValidation {
        rank: m.rank(),
        valid: report.is_empty(),
        checked: report.checked,
        max_len: report.max_len,
        violations: report.violations,
    };
    let base = [out.rank.to_string(), out.valid.to_string(), out.checked.to_string()];
    let mut rows: Vec<Vec<String>> = out
        .violations
        .iter()
        .map(|v| {
            let mut row = base.to_vec();
            row.push(serde_json::to_string(v).unwrap_or_default());
            row
        })
        .collect();
    if rows.is_empty() {
        let mut row = base.to_vec();
        row.push(String::new());
        rows.push(row);
    }
    Output::new(&["rank", "valid", "checked", "violation"], rows, &out)
}

#[derive(Serialize)]
pub struct SweepRow {
    pub axis: &'static str,
    pub value: f64,
    pub num_actions: usize,
    pub horizon: usize,
    pub optimal_value: f64,
    pub greedy_value: f64,
    pub measured_ratio: f64,
    pub sigma: f64,
    pub epsilon_max: f64,
    pub eta: f64,
    pub eta_bar: f64,
    pub k_eta: f64,
    pub sigma_hat: Option<f64>,
    pub eta_hat: Option<f64>,
    pub sigma_hat_closed_form: Option<f64>,
    pub eta_upper: Option<f64>,
    pub eta_hat_lower: Option<f64>,
    pub eta_hat_upper: Option<f64>,
    pub string_submodular: bool,
    pub failures: usize,
    pub checks: Vec<BoundCheck>,
}

const SWEEP_SCALARS: [&str; 20] = [
    "axis",
    "value",
    "num_actions",
    "horizon",
    "optimal_value",
    "greedy_value",
    "measured_ratio",
    "sigma",
    "epsilon_max",
    "eta",
    "eta_bar",
    "k_eta",
    "sigma_hat",
    "eta_hat",
    "sigma_hat_closed_form",
    "eta_upper",
    "eta_hat_lower",
    "eta_hat_upper",
    "string_submodular",
    "failures",
];

impl SweepRow {
    fn cells(&self) -> Vec<String> {
        let mut cells = vec![
            self.axis.to_string(),
            num(self.value),
            self.num_actions.to_string(),
            self.horizon.to_string(),
            num(self.optimal_value),
            num(self.greedy_value),
            num(self.measured_ratio),
            num(self.sigma),
            num(self.epsilon_max),
            num(self.eta),
            num(self.eta_bar),
            num(self.k_eta),
            opt(self.sigma_hat),
            opt(self.eta_hat),
            opt(self.sigma_hat_closed_form),
            opt(self.eta_upper),
            opt(self.eta_hat_lower),
            opt(self.eta_hat_upper),
            self.string_submodular.to_string(),
            self.failures.to_string(),
        ];
        for t in Theorem::ALL {
            match self.checks.iter().find(|c| c.theorem == t) {
                Some(c) => {
                    cells.push(num(c.guaranteed_ratio));
                    cells.push(c.status.to_string());
                }
                None => cells.extend([String::new(), String::new()]),
            }
        }
        cells
    }
}

fn sweep_row(cfg: &RunConfig, src: &Source, axis: Axis, value: f64) -> Result<SweepRow, CliError> {
    let inst = apply_axis(cfg, src, axis, value)?;
    let report = suite(cfg, &inst)?;
    let f = Memoized::new(normalize(&inst.oracle)?);
    let (n, k) = (inst.num_actions, report.horizon);
    let sigma_hat = defined(restricted_sigma_hat(&f, n, k, cfg.budget))?.map(|r| r.value);
    let eta_hat = defined(restricted_eta_hat(&f, n, k, cfg.budget))?.map(|r| r.value);
    let tasks = inst.tasks();
    let info = inst.infogain();
    Ok(SweepRow {
        axis: axis.name(),
        value,
        num_actions: n,
        horizon: k,
        optimal_value: report.optimal_value,
        greedy_value: report.greedy.value(),
        measured_ratio: report.measured_ratio,
        sigma: report.sigma.value,
        epsilon_max: report.epsilon_greedy.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max),
        eta: report.eta.value,
        eta_bar: report.eta_bar.value,
        k_eta: report.k_eta,
        sigma_hat,
        eta_hat,
        sigma_hat_closed_form: tasks.map(|m| m.sigma_hat_closed_form()),
        eta_upper: tasks.map(|m| m.eta_upper()),
        eta_hat_lower: info.map(|m| m.eta_hat_lower_closed_form().value),
        eta_hat_upper: info.map(|m| m.eta_hat_upper_closed_form().value),
        string_submodular: report.hypotheses.string_submodular(),
        failures: report.failures().count(),
        checks: report.checks,
    })
}

/// One row per grid point, computed in parallel and emitted in grid order.
pub fn sweep(cfg: &RunConfig, src: &Source) -> Result<(Output, bool), CliError> {
    let (axis, values) = match &src.sweep {
        Some(s) => (s.axis, s.values.clone()),
        None if src.body.is_none() => (Axis::Seed, (0..cfg.count).map(|i| (cfg.seed + i as u64) as f64).collect()),
        None => return Err(CliError::Input("the instance declares no \"sweep\" axis".into())),
    };
    let results: Vec<Result<SweepRow, CliError>> = values.par_iter().map(|&v| sweep_row(cfg, src, axis, v)).collect();
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut header: Vec<String> = SWEEP_SCALARS.iter().map(|s| s.to_string()).collect();
    for t in Theorem::ALL {
        header.push(format!("{t}_ratio"));
        header.push(format!("{t}_status"));
    }
    let failed = rows.iter().any(|r| r.failures > 0);
    let cells = rows.iter().map(SweepRow::cells).collect();
    let out = Output { header, rows: cells, json: serde_json::to_value(&rows).map_err(Error::from)? };
    Ok((out, failed))
}
