//! Exact curvature quantities by bounded enumeration.
//!
//! `𝔸*` is infinite, so every maximum is taken over strings `M` with
//! `|M| ≤ search_len`; reports carry that depth. Candidates whose denominator
//! vanishes (`|den| ≤ ZERO_GAIN`) are skipped rather than treated as infinite.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::string::{concat, count_strings, ensure_budget, for_each_string, Action, ActionString};

/// Denominators at or below this magnitude are treated as zero.
pub const ZERO_GAIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureKind {
    /// total backward curvature `σ`
    Sigma,
    /// `σ(M)`
    SigmaWrt,
    /// total forward curvature `ε`
    Epsilon,
    /// `ε(M)`
    EpsilonWrt,
    /// elemental forward curvature `η`
    Eta,
    /// `σ` restricted to `K ≤ |M| < 2K`
    SigmaHat,
    /// `ε` restricted to `i ≤ |M| < i + K`
    EpsilonHat,
    /// `η` restricted to `|M| ≤ 2K − 2`
    EtaHat,
}

impl fmt::Display for CurvatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CurvatureKind::Sigma => "sigma",
            CurvatureKind::SigmaWrt => "sigma_wrt",
            CurvatureKind::Epsilon => "epsilon",
            CurvatureKind::EpsilonWrt => "epsilon_wrt",
            CurvatureKind::Eta => "eta",
            CurvatureKind::SigmaHat => "sigma_hat",
            CurvatureKind::EpsilonHat => "epsilon_hat_i",
            CurvatureKind::EtaHat => "eta_hat",
        };
        f.write_str(name)
    }
}

/// The maximizing candidate. `actions` holds `(a)`, `(a_i, a_j)` or `N`
/// depending on the kind; `base` is `M`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub actions: ActionString,
    pub base: ActionString,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub kind: CurvatureKind,
    pub value: f64,
    pub witness: Witness,
    /// Largest `|M|` (or `|N|` for the `_wrt` kinds) enumerated.
    pub search_len: usize,
    /// Stage `i` for [`CurvatureKind::EpsilonHat`].
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub index: Option<usize>,
    pub candidates: u64,
    pub skipped: u64,
}

impl CurvatureReport {
    /// Re-evaluates the defining ratio at the witness.
    pub fn recompute<F: Objective + ?Sized>(&self, f: &F) -> Result<f64> {
        let w = &self.witness;
        let ratio = match self.kind {
            CurvatureKind::Sigma | CurvatureKind::SigmaHat | CurvatureKind::SigmaWrt => {
                backward_ratio(f, &w.actions, &w.base)?
            }
            CurvatureKind::Epsilon | CurvatureKind::EpsilonHat | CurvatureKind::EpsilonWrt => {
                forward_ratio(f, &w.base, &w.actions)?
            }
            CurvatureKind::Eta | CurvatureKind::EtaHat => eta_ratio(f, &w.base, w.actions[0], w.actions[1])?,
        };
        ratio.ok_or(Error::ZeroDenominator("curvature witness"))
    }
}

/// `1 − (f(N ⊕ M) − f(M)) / (f(N) − f(∅))`, `None` on a zero denominator.
pub fn backward_ratio<F: Objective + ?Sized>(f: &F, n: &[Action], m: &[Action]) -> Result<Option<f64>> {
    let den = f.eval(n)? - f.eval(&[])?;
    if den.abs() <= ZERO_GAIN {
        return Ok(None);
    }
    let num = f.eval(&concat(n, m))? - f.eval(m)?;
    Ok(Some(1.0 - num / den))
}

/// `1 − (f(M ⊕ N) − f(M)) / (f(N) − f(∅))`, `None` on a zero denominator.
pub fn forward_ratio<F: Objective + ?Sized>(f: &F, m: &[Action], n: &[Action]) -> Result<Option<f64>> {
    let den = f.eval(n)? - f.eval(&[])?;
    if den.abs() <= ZERO_GAIN {
        return Ok(None);
    }
    let num = f.eval(&concat(m, n))? - f.eval(m)?;
    Ok(Some(1.0 - num / den))
}

/// `(f(M ⊕ (a_i) ⊕ (a_j)) − f(M ⊕ (a_i))) / (f(M ⊕ (a_j)) − f(M))`.
pub fn eta_ratio<F: Objective + ?Sized>(f: &F, m: &[Action], ai: Action, aj: Action) -> Result<Option<f64>> {
    let mut buf = Vec::with_capacity(m.len() + 2);
    buf.extend_from_slice(m);
    let base = f.eval(&buf)?;
    buf.push(aj);
    let den = f.eval(&buf)? - base;
    if den.abs() <= ZERO_GAIN {
        return Ok(None);
    }
    buf[m.len()] = ai;
    let after_i = f.eval(&buf)?;
    buf.push(aj);
    let num = f.eval(&buf)? - after_i;
    Ok(Some(num / den))
}

struct Best {
    kind: CurvatureKind,
    value: f64,
    witness: Option<Witness>,
    candidates: u64,
    skipped: u64,
}

impl Best {
    fn new(kind: CurvatureKind) -> Self {
        Best { kind, value: f64::NEG_INFINITY, witness: None, candidates: 0, skipped: 0 }
    }

    fn offer(&mut self, ratio: Option<f64>, witness: impl FnOnce() -> Witness) {
        self.candidates += 1;
        match ratio {
            None => self.skipped += 1,
            Some(r) => {
                if self.witness.is_none() || r > self.value {
                    self.value = r;
                    self.witness = Some(witness());
                }
            }
        }
    }

    fn finish(self, search_len: usize, index: Option<usize>) -> Result<CurvatureReport> {
        let quantity = match self.kind {
            CurvatureKind::Sigma | CurvatureKind::SigmaWrt | CurvatureKind::SigmaHat => "backward curvature",
            CurvatureKind::Epsilon | CurvatureKind::EpsilonWrt | CurvatureKind::EpsilonHat => "forward curvature",
            CurvatureKind::Eta | CurvatureKind::EtaHat => "elemental curvature",
        };
        let witness = self.witness.ok_or(Error::Degenerate { quantity })?;
        Ok(CurvatureReport {
            kind: self.kind,
            value: self.value,
            witness,
            search_len,
            index,
            candidates: self.candidates,
            skipped: self.skipped,
        })
    }
}

fn visit_range<V>(num_actions: usize, min_len: usize, max_len: usize, mut visit: V) -> Result<()>
where
    V: FnMut(&[Action]) -> Result<()>,
{
    let mut err = None;
    for len in min_len..=max_len {
        for_each_string(num_actions, len, |m| match visit(m) {
            Ok(()) => true,
            Err(e) => {
                err = Some(e);
                false
            }
        });
        if let Some(e) = err.take() {
            return Err(e);
        }
    }
    Ok(())
}

/// Max of the backward ratio over single actions `a` and `min_len ≤ |M| ≤ max_len`.
fn singleton_backward<F: Objective + ?Sized>(
    f: &F,
    kind: CurvatureKind,
    num_actions: usize,
    min_len: usize,
    max_len: usize,
    budget: u128,
) -> Result<Best> {
    let per = 3 * num_actions as u128;
    ensure_budget(count_strings(num_actions, min_len, max_len).saturating_mul(per), budget)?;
    let mut best = Best::new(kind);
    visit_range(num_actions, min_len, max_len, |m| {
        for a in (0..num_actions).map(Action::new) {
            let r = backward_ratio(f, &[a], m)?;
            best.offer(r, || Witness { actions: ActionString::single(a), base: m.into() });
        }
        Ok(())
    })?;
    Ok(best)
}

fn singleton_forward<F: Objective + ?Sized>(
    f: &F,
    kind: CurvatureKind,
    num_actions: usize,
    min_len: usize,
    max_len: usize,
    budget: u128,
) -> Result<Best> {
    let per = 3 * num_actions as u128;
    ensure_budget(count_strings(num_actions, min_len, max_len).saturating_mul(per), budget)?;
    let mut best = Best::new(kind);
    visit_range(num_actions, min_len, max_len, |m| {
        for a in (0..num_actions).map(Action::new) {
            let r = forward_ratio(f, m, &[a])?;
            best.offer(r, || Witness { actions: ActionString::single(a), base: m.into() });
        }
        Ok(())
    })?;
    Ok(best)
}

fn elemental<F: Objective + ?Sized>(
    f: &F,
    kind: CurvatureKind,
    num_actions: usize,
    max_len: usize,
    budget: u128,
) -> Result<Best> {
    let per = 4 * (num_actions as u128).pow(2);
    ensure_budget(count_strings(num_actions, 0, max_len).saturating_mul(per), budget)?;
    let mut best = Best::new(kind);
    visit_range(num_actions, 0, max_len, |m| {
        for ai in (0..num_actions).map(Action::new) {
            for aj in (0..num_actions).map(Action::new) {
                let r = eta_ratio(f, m, ai, aj)?;
                best.offer(r, || Witness { actions: ActionString::from(vec![ai, aj]), base: m.into() });
            }
        }
        Ok(())
    })?;
    Ok(best)
}

/// `σ = max_{a, |M| ≤ search_len} 1 − (f((a) ⊕ M) − f(M)) / (f((a)) − f(∅))`.
pub fn total_backward_sigma<F: Objective + ?Sized>(
    f: &F,
    num_actions: usize,
    search_len: usize,
    budget: u128,
) -> Result<CurvatureReport> {
    singleton_backward(f, CurvatureKind::Sigma, num_actions, 0, search_len, budget)?.finish(search_len, None)
}

/// `σ(M) = max_{0 < |N| ≤ K} 1 − (f(N ⊕ M) − f(M)) / (f(N) − f(∅))`.
pub fn total_backward_sigma_wrt<F: Objective + ?Sized>(
    f: &F,
    m: &[Action],
    num_actions: usize,
    horizon: usize,
    budget: u128,
) -> Result<CurvatureReport> {
    ensure_budget(count_strings(num_actions, 1, horizon).saturating_mul(4), budget)?;
    let mut best = Best::new(CurvatureKind::SigmaWrt);
    visit_range(num_actions, 1, horizon, |n| {
        let r = backward_ratio(f, n, m)?;
        best.offer(r, || Witness { actions: n.into(), base: m.into() });
        Ok(())
    })?;
    best.finish(horizon, None)
}

/// `ε = max_{a, |M| ≤ search_len} 1 − (f(M ⊕ (a)) − f(M)) / (f((a)) − f(∅))`.
pub fn total_forward_epsilon<F: Objective + ?Sized>(
    f: &F,
    num_actions: usize,
    search_len: usize,
    budget: u128,
) -> Result<CurvatureReport> {
    singleton_forward(f, CurvatureKind::Epsilon, num_actions, 0, search_len, budget)?.finish(search_len, None)
}

/// `ε(M) = max_{0 < |N| ≤ K} 1 − (f(M ⊕ N) − f(M)) / (f(N) − f(∅))`.
pub fn total_forward_epsilon_wrt<F: Objective + ?Sized>(
    f: &F,
    m: &[Action],
    num_actions: usize,
    horizon: usize,
    budget: u128,
) -> Result<CurvatureReport> {
    ensure_budget(count_strings(num_actions, 1, horizon).saturating_mul(4), budget)?;
    let mut best = Best::new(CurvatureKind::EpsilonWrt);
    visit_range(num_actions, 1, horizon, |n| {
        let r = forward_ratio(f, m, n)?;
        best.offer(r, || Witness { actions: n.into(), base: m.into() });
        Ok(())
    })?;
    best.finish(horizon, None)
}

/// `η = max_{a_i, a_j, |M| ≤ search_len} (f(M⊕(a_i)⊕(a_j)) − f(M⊕(a_i))) / (f(M⊕(a_j)) − f(M))`.
pub fn elemental_forward_eta<F: Objective + ?Sized>(
    f: &F,
    num_actions: usize,
    search_len: usize,
    budget: u128,
) -> Result<CurvatureReport> {
    elemental(f, CurvatureKind::Eta, num_actions, search_len, budget)?.finish(search_len, None)
}

/// `σ̂`: the backward curvature restricted to `K ≤ |M| < 2K`.
pub fn restricted_sigma_hat<F: Objective + ?Sized>(
    f: &F,
    num_actions: usize,
    horizon: usize,
    budget: u128,
) -> Result<CurvatureReport> {
    let hi = 2 * horizon - 1;
    singleton_backward(f, CurvatureKind::SigmaHat, num_actions, horizon, hi, budget)?.finish(hi, None)
}

/// `ε̂_i`: the forward curvature restricted to `i ≤ |M| < i + K`.
pub fn restricted_epsilon_hat<F: Objective + ?Sized>(
    f: &F,
    num_actions: usize,
    stage: usize,
    horizon: usize,
    budget: u128,
) -> Result<CurvatureReport> {
    let hi = stage + horizon - 1;
    singleton_forward(f, CurvatureKind::EpsilonHat, num_actions, stage, hi, budget)?.finish(hi, Some(stage))
}

/// `η̂`: the elemental curvature restricted to `|M| ≤ 2K − 2`.
pub fn restricted_eta_hat<F: Objective + ?Sized>(
    f: &F,
    num_actions: usize,
    horizon: usize,
    budget: u128,
) -> Result<CurvatureReport> {
    let hi = 2 * horizon - 2;
    elemental(f, CurvatureKind::EtaHat, num_actions, hi, budget)?.finish(hi, None)
}

/// `η̄`: `η` when `η ≤ 1`, else `η^(2K−1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaBar {
    pub eta: f64,
    pub horizon: usize,
    pub value: f64,
}

pub fn eta_bar(eta: f64, horizon: usize) -> EtaBar {
    let value = if eta <= 1.0 { eta } else { eta.powi(2 * horizon as i32 - 1) };
    EtaBar { eta, horizon, value }
}
