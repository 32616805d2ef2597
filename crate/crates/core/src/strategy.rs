//! Greedy, backward-greedy and exhaustive-optimal strategies over the uniform
//! structure `{M : |M| ≤ K}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::string::{count_strings, ensure_budget, for_each_string, Action, ActionString};
use crate::DEFAULT_BUDGET;

/// Action-set size, horizon `K` and objective of a maximization instance.
#[derive(Clone, Debug)]
pub struct ProblemSpec<F> {
    pub num_actions: usize,
    pub horizon: usize,
    pub objective: F,
    /// Known forward monotone: exhaustive search may scan length `K` only.
    pub forward_monotone: bool,
    /// Cap on oracle evaluations for exhaustive operations.
    pub budget: u128,
}

impl<F: Objective> ProblemSpec<F> {
    pub fn new(objective: F, num_actions: usize, horizon: usize) -> Result<Self> {
        if num_actions == 0 {
            return Err(Error::invalid("the action set must be nonempty"));
        }
        if horizon == 0 {
            return Err(Error::invalid("the horizon K must be at least 1"));
        }
        Ok(ProblemSpec { num_actions, horizon, objective, forward_monotone: false, budget: DEFAULT_BUDGET })
    }

    pub fn assume_forward_monotone(mut self, yes: bool) -> Self {
        self.forward_monotone = yes;
        self
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    pub fn actions(&self) -> impl Iterator<Item = Action> {
        (0..self.num_actions).map(Action::new)
    }

    /// Borrowing view, handy for handing the same instance to several drivers.
    pub fn by_ref(&self) -> ProblemSpec<&F> {
        ProblemSpec {
            num_actions: self.num_actions,
            horizon: self.horizon,
            objective: &self.objective,
            forward_monotone: self.forward_monotone,
            budget: self.budget,
        }
    }
}

/// Record of a (forward, backward or constrained) greedy run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrace {
    pub strategy: ActionString,
    /// `f(G_i) − f(G_{i−1})` for each stage.
    pub stage_gains: Vec<f64>,
    /// `f(G_0), .., f(G_k)`.
    pub values: Vec<f64>,
    /// Exact argmax set at each stage; the chosen action is its lowest id.
    pub tie_sets: Vec<Vec<Action>>,
    /// True when a constrained run ran out of feasible extensions before the rank.
    #[serde(default)]
    pub stalled: bool,
}

impl GreedyTrace {
    pub fn value(&self) -> f64 {
        *self.values.last().expect("values holds f(G_0)")
    }

    /// `G_i`, the first `i` chosen actions (for forward traces).
    pub fn prefix(&self, i: usize) -> &[Action] {
        &self.strategy[..i]
    }

    pub fn len(&self) -> usize {
        self.strategy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategy.is_empty()
    }
}

/// Picks the best candidate gain; lowest action id wins ties.
pub(crate) fn argmax_stage<I>(candidates: I) -> Option<(Action, f64, Vec<Action>)>
where
    I: IntoIterator<Item = (Action, f64)>,
{
    let mut best: Option<(Action, f64)> = None;
    let mut ties = Vec::new();
    for (a, gain) in candidates {
        match best {
            Some((_, g)) if gain < g => {}
            Some((_, g)) if gain == g => ties.push(a),
            _ => {
                best = Some((a, gain));
                ties.clear();
                ties.push(a);
            }
        }
    }
    best.map(|(a, g)| (a, g, ties))
}

/// Forward greedy: stage `i` appends the action maximizing `f(G_{i−1} ⊕ (a))`.
pub fn greedy<F: Objective>(spec: &ProblemSpec<F>) -> Result<GreedyTrace> {
    let f = &spec.objective;
    let mut current: Vec<Action> = Vec::with_capacity(spec.horizon + 1);
    let mut values = vec![f.eval(&current)?];
    let mut stage_gains = Vec::with_capacity(spec.horizon);
    let mut tie_sets = Vec::with_capacity(spec.horizon);
    for _ in 0..spec.horizon {
        let base = *values.last().unwrap();
        let mut candidates = Vec::with_capacity(spec.num_actions);
        for a in spec.actions() {
            current.push(a);
            candidates.push((a, f.eval(&current)?));
            current.pop();
        }
        let (a, value, ties) = argmax_stage(candidates).expect("nonempty action set");
        current.push(a);
        stage_gains.push(value - base);
        values.push(value);
        tie_sets.push(ties);
    }
    Ok(GreedyTrace { strategy: current.into(), stage_gains, values, tie_sets, stalled: false })
}

/// Backward greedy: stage `i` prepends the action maximizing
/// `f((a) ⊕ Ĝ_{i−1}) − f(Ĝ_{i−1})`. Same tie rule as [`greedy`].
pub fn backward_greedy<F: Objective>(spec: &ProblemSpec<F>) -> Result<GreedyTrace> {
    let f = &spec.objective;
    let mut current = ActionString::empty();
    let mut values = vec![f.eval(&current)?];
    let mut stage_gains = Vec::with_capacity(spec.horizon);
    let mut tie_sets = Vec::with_capacity(spec.horizon);
    for _ in 0..spec.horizon {
        let base = *values.last().unwrap();
        let candidates =
            spec.actions().map(|a| f.eval(&current.prepended(a)).map(|v| (a, v))).collect::<Result<Vec<_>>>()?;
        let (a, value, ties) = argmax_stage(candidates).expect("nonempty action set");
        current = current.prepended(a);
        stage_gains.push(value - base);
        values.push(value);
        tie_sets.push(ties);
    }
    Ok(GreedyTrace { strategy: current, stage_gains, values, tie_sets, stalled: false })
}

/// Exhaustive maximizer of `f` over `{M : |M| ≤ K}`.
///
/// Scans every length `0..=K` unless the spec is flagged forward monotone, in
/// which case length `K` suffices. Ties keep the first string in
/// shortest-then-lexicographic order.
pub fn optimal_exhaustive<F: Objective>(spec: &ProblemSpec<F>) -> Result<(ActionString, f64)> {
    let k = spec.horizon;
    let min_len = if spec.forward_monotone { k } else { 0 };
    ensure_budget(count_strings(spec.num_actions, min_len, k), spec.budget)?;
    let f = &spec.objective;
    let mut best: Option<(ActionString, f64)> = None;
    let mut err = None;
    for len in min_len..=k {
        for_each_string(spec.num_actions, len, |s| match f.eval(s) {
            Ok(v) => {
                if best.as_ref().is_none_or(|(_, b)| v > *b) {
                    best = Some((s.into(), v));
                }
                true
            }
            Err(e) => {
                err = Some(e);
                false
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(best.expect("at least one candidate string"))
}
