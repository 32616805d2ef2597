//! Closed-form greedy-versus-optimal bounds and the suite that checks them on
//! an instance.
//!
//! Each formula returns the raw ratio; [`run_bound_suite`] clamps to `[0, 1]`
//! before comparing with the measured `f(G_K) / f(O)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::checks::{check_backward_monotone, check_diminishing_return, check_forward_monotone};
use crate::curvature::{
    elemental_forward_eta, eta_bar, restricted_sigma_hat, total_backward_sigma_wrt, total_forward_epsilon_wrt,
    CurvatureReport, EtaBar, ZERO_GAIN,
};
use crate::error::{Error, Result};
use crate::matroid::{constrained_greedy, constrained_optimal, validate_axioms, StringMatroid};
use crate::objective::{normalize, Memoized, Objective};
use crate::strategy::{greedy, optimal_exhaustive, GreedyTrace, ProblemSpec};
use crate::string::{concat, ActionString};
use crate::{DEFAULT_BUDGET, DEFAULT_TOL};

/// `(1/σ)(1 − (1 − σ/K)^K)`, with value 1 at `σ = 0`.
pub fn t1_bound_i(sigma_o: f64, horizon: usize) -> f64 {
    curvature_power_bound(sigma_o, horizon as f64, horizon)
}

/// `(1/σ)(1 − e^{−σ})`, the `K → ∞` limit of [`t1_bound_i`].
pub fn t1_bound_i_asymptotic(sigma_o: f64) -> f64 {
    if sigma_o == 0.0 {
        1.0
    } else {
        -(-sigma_o).exp_m1() / sigma_o
    }
}

/// `(1/σ)(1 − (1 − σ/d)^K)`; the `σ → 0` limit is `K/d`.
fn curvature_power_bound(sigma: f64, d: f64, horizon: usize) -> f64 {
    if sigma == 0.0 {
        return horizon as f64 / d;
    }
    let x = sigma / d;
    let loss = if x < 1.0 { -(horizon as f64 * (-x).ln_1p()).exp_m1() } else { 1.0 - (1.0 - x).powi(horizon as i32) };
    loss / sigma
}

/// `1 − max_{i<K} ε(G_i)`.
pub fn t1_bound_ii(max_eps_gi: f64) -> f64 {
    1.0 - max_eps_gi
}

/// `K_η = 1 + η + … + η^{K−1}`.
pub fn k_eta(eta: f64, horizon: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..horizon {
        sum += term;
        term *= eta;
    }
    sum
}

/// `1 − (1 − 1/K_η)^K`.
pub fn t2_bound(eta: f64, horizon: usize) -> f64 {
    1.0 - (1.0 - 1.0 / k_eta(eta, horizon)).powi(horizon as i32)
}

/// `(1/σ)(1 − (1 − σ/K_η)^K)`; `K/K_η` at `σ = 0`.
pub fn p1_bound_i(sigma_o: f64, eta: f64, horizon: usize) -> f64 {
    curvature_power_bound(sigma_o, k_eta(eta, horizon), horizon)
}

/// `(1 − max_{i<K} ε(G_i)) · min(K/K_η, 1)`.
pub fn p1_bound_ii(max_eps_gi: f64, eta: f64, horizon: usize) -> f64 {
    let ratio = horizon as f64 / k_eta(eta, horizon);
    (1.0 - max_eps_gi) * ratio.min(1.0)
}

/// The alternative coefficient reading `(1 − max ε(G_i)) · K_η/K`, reported
/// alongside [`p1_bound_ii`].
pub fn p1_bound_ii_alt(max_eps_gi: f64, eta: f64, horizon: usize) -> f64 {
    (1.0 - max_eps_gi) * k_eta(eta, horizon) / horizon as f64
}

/// `1/(1 + σ(O))`.
pub fn t4_bound_i(sigma_o: f64) -> f64 {
    1.0 / (1.0 + sigma_o)
}

/// `1 − ε(G_K)`.
pub fn t4_bound_ii(eps_gk: f64) -> f64 {
    1.0 - eps_gk
}

/// `1/(1 + η̄)`.
pub fn t5_bound(eta: f64, horizon: usize) -> f64 {
    1.0 / (1.0 + eta_bar(eta, horizon).value)
}

/// `1/(σ(O) + η̄)`.
pub fn p2_bound_i(sigma_o: f64, eta: f64, horizon: usize) -> Result<f64> {
    let den = sigma_o + eta_bar(eta, horizon).value;
    if den.abs() <= ZERO_GAIN {
        return Err(Error::ZeroDenominator("σ(O) + η̄"));
    }
    Ok(1.0 / den)
}

/// `(1 − ε(G_K))/η̄`.
pub fn p2_bound_ii(eps_gk: f64, eta: f64, horizon: usize) -> Result<f64> {
    let bar = eta_bar(eta, horizon).value;
    if bar.abs() <= ZERO_GAIN {
        return Err(Error::ZeroDenominator("η̄"));
    }
    Ok((1.0 - eps_gk) / bar)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Theorem {
    T1i,
    T1ii,
    T2,
    C1,
    C2,
    P1i,
    P1ii,
    T4i,
    T4ii,
    C3,
    T5,
    C4,
    P2i,
    P2ii,
}

impl Theorem {
    pub const ALL: [Theorem; 14] = [
        Theorem::T1i,
        Theorem::T1ii,
        Theorem::T2,
        Theorem::C1,
        Theorem::C2,
        Theorem::P1i,
        Theorem::P1ii,
        Theorem::T4i,
        Theorem::T4ii,
        Theorem::C3,
        Theorem::T5,
        Theorem::C4,
        Theorem::P2i,
        Theorem::P2ii,
    ];

    /// Bounds derived for the uniform structure only.
    pub fn uniform_only(self) -> bool {
        matches!(
            self,
            Theorem::T1i | Theorem::T1ii | Theorem::T2 | Theorem::C1 | Theorem::C2 | Theorem::P1i | Theorem::P1ii
        )
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotApplicable => "NOT-APPLICABLE",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub theorem: Theorem,
    /// Formula value clamped to `[0, 1]`.
    pub guaranteed_ratio: f64,
    /// Formula value before clamping.
    pub raw_bound: f64,
    pub measured_ratio: f64,
    pub hypotheses_met: bool,
    /// Failed hypotheses and other notes.
    pub diagnostics: Vec<String>,
    pub status: Status,
    pub pass: bool,
}

impl BoundCheck {
    fn new(
        theorem: Theorem,
        raw_bound: f64,
        measured_ratio: f64,
        failed: Vec<String>,
        notes: Vec<String>,
        tol: f64,
    ) -> Self {
        let guaranteed_ratio = if raw_bound.is_nan() { 0.0 } else { raw_bound.clamp(0.0, 1.0) };
        let hypotheses_met = failed.is_empty();
        let status = if !hypotheses_met {
            Status::NotApplicable
        } else if measured_ratio >= guaranteed_ratio - tol {
            Status::Pass
        } else {
            Status::Fail
        };
        let mut diagnostics: Vec<String> = failed.into_iter().map(|h| format!("hypothesis not met: {h}")).collect();
        diagnostics.extend(notes);
        BoundCheck {
            theorem,
            guaranteed_ratio,
            raw_bound,
            measured_ratio,
            hypotheses_met,
            diagnostics,
            status,
            pass: status == Status::Pass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub tol: f64,
    pub budget: u128,
    /// Depth for `η`; `2K − 2` when unset.
    pub eta_search_len: Option<usize>,
    /// Depth for the monotonicity and diminishing-return checks; `2K` when unset.
    pub check_len: Option<usize>,
    /// Use `σ̂` in place of `σ(O)`; the oracle must then be defined up to `3K − 1`.
    pub sigma_hat: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            tol: DEFAULT_TOL,
            budget: DEFAULT_BUDGET,
            eta_search_len: None,
            check_len: None,
            sigma_hat: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub forward_monotone: bool,
    pub backward_monotone: bool,
    pub diminishing_return: bool,
    /// `f(G_i ⊕ O) ≥ f(O)` for `i = 1, .., K−1`.
    pub t2_condition: bool,
    /// `f(G_K ⊕ O) ≥ f(O)`.
    pub t5_condition: bool,
    pub uniform: bool,
    /// `None` on the uniform structure.
    pub matroid_valid: Option<bool>,
    pub greedy_stalled: bool,
    pub check_len: usize,
    pub notes: Vec<String>,
}

impl Hypotheses {
    pub fn string_submodular(&self) -> bool {
        self.forward_monotone && self.diminishing_return
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub num_actions: usize,
    pub horizon: usize,
    pub optimal: ActionString,
    pub optimal_value: f64,
    pub greedy: GreedyTrace,
    pub measured_ratio: f64,
    /// `σ(O)`, or `σ̂` when substituted.
    pub sigma: CurvatureReport,
    /// `ε(G_i)` for `i = 1, .., K`.
    pub epsilon_greedy: Vec<CurvatureReport>,
    pub eta: CurvatureReport,
    pub eta_bar: EtaBar,
    pub k_eta: f64,
    pub hypotheses: Hypotheses,
    pub checks: Vec<BoundCheck>,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn check(&self, theorem: Theorem) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.theorem == theorem)
    }
}

/// Measures `f(G_K)/f(O)` on the instance and evaluates every bound whose
/// hypotheses hold. With a matroid, greedy and optimum are the constrained ones
/// and the uniform-only bounds are not applicable.
///
/// The oracle is normalized and memoized internally.
pub fn run_bound_suite<F: Objective>(
    spec: &ProblemSpec<F>,
    matroid: Option<&dyn StringMatroid>,
    config: &SuiteConfig,
) -> Result<SuiteReport> {
    let tol = config.tol;
    let budget = config.budget;
    let n = spec.num_actions;
    let k = matroid.map_or(spec.horizon, |m| m.rank());
    if k == 0 {
        return Err(Error::invalid("the horizon K must be at least 1"));
    }
    let f = Memoized::new(normalize(&spec.objective)?);

    let check_len = config.check_len.unwrap_or(2 * k);
    let mut hyp = Hypotheses { uniform: matroid.is_none(), check_len, ..Default::default() };
    hyp.forward_monotone = check_forward_monotone(&f, n, check_len, tol, budget)?.is_empty();
    hyp.backward_monotone = check_backward_monotone(&f, n, check_len, tol, budget)?.is_empty();
    hyp.diminishing_return = check_diminishing_return(&f, n, check_len, tol, budget)?.is_empty();
    if let Some(m) = matroid {
        hyp.matroid_valid = Some(validate_axioms(m, n, budget)?.is_empty());
    }

    let inner =
        ProblemSpec { num_actions: n, horizon: k, objective: &f, forward_monotone: hyp.forward_monotone, budget };
    let (trace, (optimal, optimal_value)) = match matroid {
        None => (greedy(&inner)?, optimal_exhaustive(&inner)?),
        Some(m) => (constrained_greedy(&inner, m)?, constrained_optimal(&inner, m)?),
    };
    hyp.greedy_stalled = trace.stalled;
    let greedy_value = trace.value();
    let measured_ratio = if optimal_value.abs() <= tol { 1.0 } else { greedy_value / optimal_value };

    let mut t2 = true;
    let mut t5 = true;
    for i in 1..=trace.len() {
        let v = f.eval(&concat(trace.prefix(i), &optimal))?;
        let ok = v >= optimal_value - tol;
        if ok && v < optimal_value {
            hyp.notes.push(format!("f(G_{i} ⊕ O) falls short of f(O) by {:e}, within tolerance", optimal_value - v));
        }
        if i < k {
            t2 &= ok;
        } else {
            t5 = ok;
        }
    }
    hyp.t2_condition = t2;
    hyp.t5_condition = t5 && trace.len() == k;

    let sigma = if config.sigma_hat {
        restricted_sigma_hat(&f, n, k, budget)?
    } else {
        total_backward_sigma_wrt(&f, &optimal, n, k, budget)?
    };
    let epsilon_greedy = (1..=trace.len())
        .map(|i| total_forward_epsilon_wrt(&f, trace.prefix(i), n, k, budget))
        .collect::<Result<Vec<_>>>()?;
    let eta = elemental_forward_eta(&f, n, config.eta_search_len.unwrap_or(2 * k - 2), budget)?;

    let s = sigma.value;
    let e = eta.value;
    let bar = eta_bar(e, k);
    let keta = k_eta(e, k);
    let max_eps_before_k = epsilon_greedy.iter().take(k - 1).map(|r| r.value).fold(0.0, f64::max);
    let eps_k = epsilon_greedy.get(k - 1).map_or(1.0, |r| r.value);

    let sigma_note = config.sigma_hat.then(|| "upper-bounded hypothesis: σ̂ substituted for σ(O)".to_string());
    let sub = hyp.string_submodular();
    let fm = hyp.forward_monotone;
    let structure_ok = match hyp.matroid_valid {
        None => true,
        Some(valid) => valid && !hyp.greedy_stalled,
    };

    let mut checks = Vec::with_capacity(Theorem::ALL.len());
    for theorem in Theorem::ALL {
        let mut failed = Vec::new();
        let mut notes = Vec::new();
        let mut need = |cond: bool, what: &str| {
            if !cond {
                failed.push(what.to_string());
            }
        };
        if theorem.uniform_only() {
            need(hyp.uniform, "uniform structure");
        } else {
            need(structure_ok, "validated matroid with a full-length constrained greedy");
        }
        let raw = match theorem {
            Theorem::T1i => {
                need(sub, "string submodular");
                need(s <= k as f64 + tol, "σ(O) ≤ K");
                notes.extend(sigma_note.clone());
                t1_bound_i(s, k)
            }
            Theorem::T1ii => {
                need(sub, "string submodular");
                t1_bound_ii(max_eps_before_k)
            }
            Theorem::C1 => {
                need(sub, "string submodular");
                need(hyp.backward_monotone, "backward monotone");
                t1_bound_i(1.0, k)
            }
            Theorem::T2 => {
                need(fm, "forward monotone");
                need(hyp.t2_condition, "f(G_i ⊕ O) ≥ f(O) for i < K");
                t2_bound(e, k)
            }
            Theorem::C2 => {
                need(fm && hyp.diminishing_return, "string submodular");
                need(hyp.t2_condition, "f(G_i ⊕ O) ≥ f(O) for i < K");
                t2_bound(1.0, k)
            }
            Theorem::P1i => {
                need(fm, "forward monotone");
                need(s <= keta + tol, "σ(O) ≤ K_η");
                notes.extend(sigma_note.clone());
                p1_bound_i(s, e, k)
            }
            Theorem::P1ii => {
                need(fm, "forward monotone");
                notes.push(format!(
                    "coefficient K/K_η gives {:.6}, K_η/K gives {:.6}",
                    (1.0 - max_eps_before_k) * k as f64 / keta,
                    p1_bound_ii_alt(max_eps_before_k, e, k)
                ));
                p1_bound_ii(max_eps_before_k, e, k)
            }
            Theorem::T4i => {
                need(sub, "string submodular");
                notes.extend(sigma_note.clone());
                t4_bound_i(s)
            }
            Theorem::T4ii => {
                need(sub, "string submodular");
                t4_bound_ii(eps_k)
            }
            Theorem::C3 => {
                need(sub, "string submodular");
                need(hyp.backward_monotone, "backward monotone");
                t4_bound_i(1.0)
            }
            Theorem::T5 => {
                need(fm, "forward monotone");
                need(hyp.t5_condition, "f(G_K ⊕ O) ≥ f(O)");
                t5_bound(e, k)
            }
            Theorem::C4 => {
                need(fm && hyp.diminishing_return, "string submodular");
                need(hyp.t5_condition, "f(G_K ⊕ O) ≥ f(O)");
                t5_bound(1.0, k)
            }
            Theorem::P2i => {
                need(fm, "forward monotone");
                notes.extend(sigma_note.clone());
                match p2_bound_i(s, e, k) {
                    Ok(v) => v,
                    Err(_) => {
                        need(false, "σ(O) + η̄ > 0");
                        f64::NAN
                    }
                }
            }
            Theorem::P2ii => {
                need(fm, "forward monotone");
                match p2_bound_ii(eps_k, e, k) {
                    Ok(v) => v,
                    Err(_) => {
                        need(false, "η̄ > 0");
                        f64::NAN
                    }
                }
            }
        };
        checks.push(BoundCheck::new(theorem, raw, measured_ratio, failed, notes, tol));
    }

    Ok(SuiteReport {
        num_actions: n,
        horizon: k,
        optimal,
        optimal_value,
        greedy: trace,
        measured_ratio,
        sigma,
        epsilon_greedy,
        eta,
        eta_bar: bar,
        k_eta: keta,
        hypotheses: hyp,
        checks,
    })
}
