//! Subtask-accomplishment model: `n` subtasks, and action `a` at stage `j`
//! accomplishes subtask `i` with probability `p_i^j(a)`.
//!
//! `f((a_1, .., a_k)) = (1/n) Σ_i (1 − Π_j (1 − p_i^j(a_j)))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{t1_bound_i, t2_bound};
use crate::curvature::{elemental_forward_eta, total_backward_sigma_wrt};
use crate::error::{Error, Result};
use crate::objective::{Memoized, Objective};
use crate::strategy::{optimal_exhaustive, ProblemSpec};
use crate::string::Action;

/// `1/α` with `α` the golden ratio.
pub const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskModel {
    /// Number of subtasks.
    pub n: usize,
    #[serde(rename = "K")]
    pub horizon: usize,
    /// `probs[i][j][a] = p_i^{j+1}(a)`; later stages repeat the last one.
    pub probs: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "L")]
    pub lower: Vec<f64>,
    #[serde(rename = "U")]
    pub upper: Vec<f64>,
}

impl TaskModel {
    pub fn new(probs: Vec<Vec<Vec<f64>>>, lower: Vec<f64>, upper: Vec<f64>, horizon: usize) -> Result<Self> {
        let m = TaskModel { n: probs.len(), horizon, probs, lower, upper };
        m.validate()?;
        Ok(m)
    }

    /// Stage-independent probabilities `p[i][a]`.
    pub fn stationary(p: Vec<Vec<f64>>, lower: Vec<f64>, upper: Vec<f64>, horizon: usize) -> Result<Self> {
        Self::new(p.into_iter().map(|row| vec![row]).collect(), lower, upper, horizon)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: TaskModel = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let m: TaskModel = serde_json::from_value(value)?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::invalid("K must be at least 1"));
        }
        if self.n == 0 || self.probs.len() != self.n {
            return Err(Error::invalid("probs must have one entry per subtask and n ≥ 1"));
        }
        let num_actions = self.lower.len();
        if num_actions == 0 || self.upper.len() != num_actions {
            return Err(Error::invalid("L and U must have one entry per action"));
        }
        for (a, (&l, &u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(0.0 < l && l < u && u < 1.0) {
                return Err(Error::invalid(format!("action {a}: need 0 < L < U < 1, got L = {l}, U = {u}")));
            }
        }
        for (i, stages) in self.probs.iter().enumerate() {
            if stages.is_empty() {
                return Err(Error::invalid(format!("subtask {i} declares no stages")));
            }
            for (j, row) in stages.iter().enumerate() {
                if row.len() != num_actions {
                    return Err(Error::invalid(format!(
                        "probs[{i}][{j}] has {} actions, expected {num_actions}",
                        row.len()
                    )));
                }
                for (a, &p) in row.iter().enumerate() {
                    if !(self.lower[a] <= p && p <= self.upper[a]) {
                        return Err(Error::invalid(format!(
                            "probs[{i}][{j}][{a}] = {p} lies outside [L, U] = [{}, {}]",
                            self.lower[a], self.upper[a]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn num_actions(&self) -> usize {
        self.lower.len()
    }

    /// Longest string the oracle evaluates.
    pub fn probe_depth(&self) -> usize {
        probe_depth(self.horizon)
    }

    /// `p_i^j(a)` with `j` counted from 1.
    pub fn prob(&self, subtask: usize, stage: usize, a: Action) -> f64 {
        let stages = &self.probs[subtask];
        stages[(stage - 1).min(stages.len() - 1)][a.index()]
    }

    pub fn l_hat(&self) -> f64 {
        self.lower.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn u_hat(&self) -> f64 {
        self.upper.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `c(a) = (1 − U(a))/(1 − L(a))`.
    pub fn c(&self, a: Action) -> f64 {
        (1.0 - self.upper[a.index()]) / (1.0 - self.lower[a.index()])
    }

    /// `c = min_a c(a)`.
    pub fn c_min(&self) -> f64 {
        (0..self.num_actions()).map(|a| self.c(Action::new(a))).fold(f64::INFINITY, f64::min)
    }

    /// Value of a single subtask, `1 − Π_j (1 − p_i^j(a_j))`.
    pub fn subtask_value(&self, subtask: usize, s: &[Action]) -> Result<f64> {
        self.check_string(s)?;
        Ok(self.subtask_value_unchecked(subtask, s))
    }

    fn subtask_value_unchecked(&self, subtask: usize, s: &[Action]) -> f64 {
        let miss: f64 = s.iter().enumerate().map(|(j, &a)| 1.0 - self.prob(subtask, j + 1, a)).product();
        1.0 - miss
    }

    fn check_string(&self, s: &[Action]) -> Result<()> {
        if s.len() > self.probe_depth() {
            return Err(Error::DepthExceeded { len: s.len(), max: self.probe_depth() });
        }
        for a in s {
            a.check(self.num_actions())?;
        }
        Ok(())
    }

    /// `(1 − L̂)Û/L̂`, an upper bound on `η`.
    pub fn eta_upper(&self) -> f64 {
        let l = self.l_hat();
        (1.0 - l) * self.u_hat() / l
    }

    /// `1/L̂ − 1/Û ≤ 1`, sufficient for string submodularity.
    pub fn submodular_sufficient(&self) -> bool {
        1.0 / self.l_hat() - 1.0 / self.u_hat() <= 1.0
    }

    /// `1 − min_{K ≤ k < 2K} ((1−Û)^k − (1−L̂)^{k+1})/L̂`, floored at 0.
    pub fn sigma_hat_closed_form(&self) -> f64 {
        let (l, u) = (self.l_hat(), self.u_hat());
        let k = self.horizon;
        let min = (k..2 * k)
            .map(|k| ((1.0 - u).powi(k as i32) - (1.0 - l).powi(k as i32 + 1)) / l)
            .fold(f64::INFINITY, f64::min);
        (1.0 - min).max(0.0)
    }

    /// `1 − (1 − Û)^{i+K−1}`, an upper bound on `ε(G_i)`.
    pub fn epsilon_hat_closed_form(&self, stage: usize) -> f64 {
        1.0 - (1.0 - self.u_hat()).powi((stage + self.horizon - 1) as i32)
    }

    /// `min_i p_i^1(a_1*) ≥ 1 − c^K` for the greedy first action `a_1*`.
    pub fn t2_hypothesis_sufficient(&self, first: Action) -> bool {
        let threshold = 1.0 - self.c_min().powi(self.horizon as i32);
        (0..self.n).all(|i| self.prob(i, 1, first) >= threshold)
    }

    /// `L̂ ≥ 1 − 1/α` and `Û ≤ 1/α`.
    pub fn golden_ratio_condition(&self) -> bool {
        self.l_hat() >= 1.0 - INV_GOLDEN && self.u_hat() <= INV_GOLDEN
    }

    /// Direction of `p_i^j(a)` over the declared stages: `(non-increasing, non-decreasing)`.
    pub fn stage_monotonicity(&self) -> (bool, bool) {
        let mut inc = true;
        let mut dec = true;
        for stages in &self.probs {
            for w in stages.windows(2) {
                for (p, q) in w[0].iter().zip(&w[1]) {
                    dec &= q <= p;
                    inc &= q >= p;
                }
            }
        }
        (dec, inc)
    }

    /// Checks the curvature bounds that hold when `p^j` is monotone in `j`
    /// and reports the improved guarantees.
    pub fn monotone_special_cases(&self, budget: u128, tol: f64) -> Result<MonotoneReport> {
        let (non_increasing, non_decreasing) = self.stage_monotonicity();
        if !non_increasing && !non_decreasing {
            return Err(Error::NotMonotone);
        }
        let k = self.horizon;
        let n = self.num_actions();
        let f = Memoized::new(self);
        let mut report = MonotoneReport { non_increasing, non_decreasing, eta: None, sigma: None };
        if non_increasing {
            let bound = 1.0 - self.l_hat();
            let eta = elemental_forward_eta(&f, n, 2 * k - 2, budget)?.value;
            report.eta = Some(SpecialCase {
                enumerated: eta,
                closed_form: bound,
                holds: eta <= bound + tol,
                improved_bound: t2_bound(bound, k),
            });
        }
        if non_decreasing {
            let bound = 1.0 - (1.0 - self.u_hat()).powi(2 * k as i32 - 1);
            let spec = ProblemSpec::new(&f, n, k)?.assume_forward_monotone(true).with_budget(budget);
            let (o, _) = optimal_exhaustive(&spec)?;
            let sigma = total_backward_sigma_wrt(&f, &o, n, k, budget)?.value;
            report.sigma = Some(SpecialCase {
                enumerated: sigma,
                closed_form: bound,
                holds: sigma <= bound + tol,
                improved_bound: t1_bound_i(bound, k),
            });
        }
        Ok(report)
    }

    /// Seeded random instance; see [`RandomTasks`].
    pub fn random(seed: u64, params: &RandomTasks) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = (params.lo, params.hi);
        let mid = 0.5 * (lo + hi);
        let lower: Vec<f64> = (0..params.actions).map(|_| rng.gen_range(lo..=mid)).collect();
        let upper: Vec<f64> = (0..params.actions).map(|_| rng.gen_range(mid..=hi)).collect();
        let upper: Vec<f64> = upper.iter().zip(&lower).map(|(&u, &l)| if u > l { u } else { hi }).collect();
        let stages = match params.shape {
            StageShape::Stationary => 1,
            _ => params.stages.max(1),
        };
        let mut probs = vec![vec![vec![0.0; params.actions]; stages]; params.subtasks];
        for subtask in probs.iter_mut() {
            for a in 0..params.actions {
                let mut seq: Vec<f64> = (0..stages).map(|_| rng.gen_range(lower[a]..=upper[a])).collect();
                match params.shape {
                    StageShape::NonIncreasing => seq.sort_by(|x, y| y.total_cmp(x)),
                    StageShape::NonDecreasing => seq.sort_by(|x, y| x.total_cmp(y)),
                    StageShape::Free | StageShape::Stationary => {}
                }
                for (j, p) in seq.into_iter().enumerate() {
                    subtask[j][a] = p;
                }
            }
        }
        Self::new(probs, lower, upper, params.horizon)
    }
}

/// `max(3K − 1, 2K + 2)`: deep enough for `σ̂` and for `η` at depth `2K`.
pub(crate) fn probe_depth(horizon: usize) -> usize {
    (3 * horizon - 1).max(2 * horizon + 2)
}

impl Objective for TaskModel {
    fn eval(&self, s: &[Action]) -> Result<f64> {
        self.check_string(s)?;
        let total: f64 = (0..self.n).map(|i| self.subtask_value_unchecked(i, s)).sum();
        Ok(total / self.n as f64)
    }

    fn max_len(&self) -> Option<usize> {
        Some(self.probe_depth())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageShape {
    /// One stage, so `p` does not depend on `j`.
    Stationary,
    Free,
    NonIncreasing,
    NonDecreasing,
}

/// Parameters of [`TaskModel::random`]. Per-action `L(a)` is drawn from
/// `[lo, mid]`, `U(a)` from `[mid, hi]`, and probabilities from `[L(a), U(a)]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomTasks {
    pub subtasks: usize,
    pub actions: usize,
    pub horizon: usize,
    pub stages: usize,
    pub lo: f64,
    pub hi: f64,
    pub shape: StageShape,
}

impl Default for RandomTasks {
    fn default() -> Self {
        RandomTasks { subtasks: 2, actions: 3, horizon: 3, stages: 3, lo: 0.4, hi: 0.6, shape: StageShape::Free }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecialCase {
    pub enumerated: f64,
    pub closed_form: f64,
    pub holds: bool,
    /// The guarantee obtained by plugging the closed form into the bound.
    pub improved_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub non_increasing: bool,
    pub non_decreasing: bool,
    /// `η ≤ 1 − L̂` plugged into `t2_bound`.
    pub eta: Option<SpecialCase>,
    /// `σ(O) ≤ 1 − (1 − Û)^{2K−1}` plugged into `t1_bound_i`.
    pub sigma: Option<SpecialCase>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::string::ActionString;

    fn s(ids: &[usize]) -> ActionString {
        ActionString::from_ids(ids.iter().copied())
    }

    #[test]
    fn oracle_values() {
        let m = TaskModel::stationary(vec![vec![0.4]], vec![0.3], vec![0.5], 1).unwrap();
        assert!((m.eval(&s(&[0])).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(m.eval(&s(&[])).unwrap(), 0.0);
        let m = TaskModel::stationary(vec![vec![0.5]], vec![0.4], vec![0.6], 3).unwrap();
        assert!((m.eval(&s(&[0, 0, 0])).unwrap() - 0.875).abs() < 1e-15);
    }

    #[test]
    fn two_subtasks_by_hand() {
        // subtask 0: stage 1 {0.2, 0.6}, stage 2 {0.3, 0.5}; subtask 1 constant {0.4, 0.3}
        let probs = vec![vec![vec![0.2, 0.6], vec![0.3, 0.5]], vec![vec![0.4, 0.3]]];
        let m = TaskModel::new(probs, vec![0.1, 0.2], vec![0.7, 0.8], 2).unwrap();
        let v = m.eval(&s(&[1, 0])).unwrap();
        let first = 1.0 - (1.0 - 0.6) * (1.0 - 0.3);
        let second = 1.0 - (1.0 - 0.3) * (1.0 - 0.4);
        assert!((v - 0.5 * (first + second)).abs() < 1e-15);
        // stage 3 repeats stage 2
        assert_eq!(m.prob(0, 3, Action(1)), 0.5);
    }

    #[test]
    fn validation() {
        assert!(TaskModel::stationary(vec![vec![0.9]], vec![0.3], vec![0.5], 1).is_err());
        assert!(TaskModel::stationary(vec![vec![0.4]], vec![0.5], vec![0.3], 1).is_err());
        assert!(TaskModel::stationary(vec![vec![0.4]], vec![0.3], vec![0.5], 0).is_err());
        let m = TaskModel::stationary(vec![vec![0.4]], vec![0.3], vec![0.5], 2).unwrap();
        assert!(matches!(m.eval(&[Action(0); 7]), Err(Error::DepthExceeded { .. })));
        assert_eq!(m.probe_depth(), 6);
    }

    #[test]
    fn closed_form_values() {
        let m = TaskModel::stationary(vec![vec![0.5, 0.55]], vec![0.5, 0.5], vec![0.6, 0.6], 2).unwrap();
        assert!((m.eta_upper() - 0.6).abs() < 1e-15);
        assert!(m.submodular_sufficient());
        assert!(m.golden_ratio_condition());
        assert!((m.epsilon_hat_closed_form(1) - (1.0 - 0.4f64.powi(2))).abs() < 1e-15);
        let wide = TaskModel::stationary(vec![vec![0.5]], vec![0.2], vec![0.9], 2).unwrap();
        assert!(!wide.submodular_sufficient());
        assert!(!wide.golden_ratio_condition());
    }

    #[test]
    fn sigma_hat_closed_form_at_equal_bounds_limit() {
        let m = TaskModel::stationary(vec![vec![0.5]], vec![0.5 - 1e-12], vec![0.5], 3).unwrap();
        let expected = 1.0 - (3..6).map(|k| 0.5f64.powi(k) * 0.5 / 0.5).fold(f64::INFINITY, f64::min);
        assert!((m.sigma_hat_closed_form() - expected).abs() < 1e-9);
    }

    #[test]
    fn t2_threshold() {
        // L = 0.2, U = 0.6: c = 0.4 / 0.8 = 0.5, K = 2 → threshold 0.75
        let m = TaskModel::stationary(vec![vec![0.5, 0.6]], vec![0.2, 0.2], vec![0.6, 0.6], 2).unwrap();
        assert!((m.c_min() - 0.5).abs() < 1e-15);
        assert!(!m.t2_hypothesis_sufficient(Action(1)));
        let m = TaskModel::stationary(vec![vec![0.8]], vec![0.7], vec![0.8 + 1e-9], 2).unwrap();
        assert!(m.t2_hypothesis_sufficient(Action(0)));
    }

    #[test]
    fn random_shapes() {
        for shape in [StageShape::NonIncreasing, StageShape::NonDecreasing] {
            let m = TaskModel::random(3, &RandomTasks { shape, ..Default::default() }).unwrap();
            let (dec, inc) = m.stage_monotonicity();
            assert_eq!((dec, inc), (shape == StageShape::NonIncreasing, shape == StageShape::NonDecreasing));
            let r = m.monotone_special_cases(2_000_000, 1e-9).unwrap();
            assert!(r.eta.as_ref().is_none_or(|c| c.holds));
            assert!(r.sigma.as_ref().is_none_or(|c| c.holds));
        }
        let free = TaskModel::random(3, &RandomTasks { stages: 4, ..Default::default() }).unwrap();
        assert!(matches!(free.monotone_special_cases(2_000_000, 1e-9), Err(Error::NotMonotone)));
    }

    #[test]
    fn json_schema() {
        let text = r#"{"n": 1, "K": 2, "probs": [[[0.4, 0.5]]], "L": [0.3, 0.3], "U": [0.6, 0.6]}"#;
        let m = TaskModel::from_json(text).unwrap();
        assert_eq!(m.horizon, 2);
        assert_eq!(m.num_actions(), 2);
        let bad = r#"{"n": 1, "K": 2, "probs": [[[0.7, 0.5]]], "L": [0.3, 0.3], "U": [0.6, 0.6]}"#;
        assert!(TaskModel::from_json(bad).is_err());
    }
}
