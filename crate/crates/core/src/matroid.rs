//! String matroids: independence oracles with a rank, axiom validation,
//! constrained greedy and optimal search, and the backward-induction
//! permutation certificate.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checks::{Violation, ViolationReport};
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::strategy::{argmax_stage, GreedyTrace, ProblemSpec};
use crate::string::{count_strings, ensure_budget, for_each_string, is_prefix, Action, ActionString};
use crate::DEFAULT_TOL;

/// A family `I ⊆ 𝔸*` given by its membership test, plus the rank `K`.
pub trait StringMatroid: Send + Sync {
    fn rank(&self) -> usize;
    fn is_independent(&self, s: &[Action]) -> bool;
}

impl<T: StringMatroid + ?Sized> StringMatroid for &T {
    fn rank(&self) -> usize {
        (**self).rank()
    }

    fn is_independent(&self, s: &[Action]) -> bool {
        (**self).is_independent(s)
    }
}

impl<T: StringMatroid + ?Sized> StringMatroid for Box<T> {
    fn rank(&self) -> usize {
        (**self).rank()
    }

    fn is_independent(&self, s: &[Action]) -> bool {
        (**self).is_independent(s)
    }
}

/// `{M : |M| ≤ K}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Uniform {
    pub rank: usize,
}

impl StringMatroid for Uniform {
    fn rank(&self) -> usize {
        self.rank
    }

    fn is_independent(&self, s: &[Action]) -> bool {
        s.len() <= self.rank
    }
}

/// Strings of length at most `rank` using action `a` at most `caps[a]` times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxRepeats {
    caps: Vec<usize>,
    rank: usize,
}

impl MaxRepeats {
    pub fn new(caps: Vec<usize>, rank: usize) -> Result<Self> {
        if caps.iter().sum::<usize>() < rank {
            return Err(Error::invalid("repetition caps sum to less than the rank"));
        }
        Ok(MaxRepeats { caps, rank })
    }

    pub fn caps(&self) -> &[usize] {
        &self.caps
    }
}

impl StringMatroid for MaxRepeats {
    fn rank(&self) -> usize {
        self.rank
    }

    fn is_independent(&self, s: &[Action]) -> bool {
        if s.len() > self.rank {
            return false;
        }
        let mut counts = vec![0usize; self.caps.len()];
        for a in s {
            match counts.get_mut(a.index()) {
                Some(c) => {
                    *c += 1;
                    if *c > self.caps[a.index()] {
                        return false;
                    }
                }
                None => return false,
            }
        }
        true
    }
}

/// Strings of length at most `rank` having no forbidden string as a prefix.
///
/// An arbitrary list need not satisfy the axioms; run [`validate_axioms`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixForbidden {
    forbidden: Vec<ActionString>,
    rank: usize,
}

impl PrefixForbidden {
    pub fn new(forbidden: Vec<ActionString>, rank: usize) -> Self {
        PrefixForbidden { forbidden, rank }
    }

    pub fn forbidden(&self) -> &[ActionString] {
        &self.forbidden
    }

    /// Action `a` may only occupy positions `1..deadlines[a]`; `None` means
    /// unrestricted. Such a family always satisfies the axioms provided some
    /// action is unrestricted (or has deadline beyond the rank).
    pub fn from_deadlines(num_actions: usize, rank: usize, deadlines: &[Option<usize>]) -> Result<Self> {
        if deadlines.len() != num_actions {
            return Err(Error::invalid("one deadline per action is required"));
        }
        if deadlines.iter().all(|d| d.is_some_and(|d| d <= rank)) {
            return Err(Error::invalid("at least one action must be usable at every position"));
        }
        let mut forbidden = Vec::new();
        for (a, d) in deadlines.iter().enumerate() {
            let Some(d) = *d else { continue };
            let d = d.max(1);
            for len in d..=rank {
                for_each_string(num_actions, len - 1, |head| {
                    let mut s = ActionString::from(head);
                    s.push(Action::new(a));
                    forbidden.push(s);
                    true
                });
            }
        }
        Ok(PrefixForbidden { forbidden, rank })
    }

    /// Seeded random instance of the deadline family. Action 0 is always
    /// unrestricted.
    pub fn random(seed: u64, num_actions: usize, rank: usize) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let deadlines: Vec<Option<usize>> = (0..num_actions)
            .map(|a| if a == 0 || rng.gen_bool(0.3) { None } else { Some(rng.gen_range(1..=rank.max(1))) })
            .collect();
        Self::from_deadlines(num_actions, rank, &deadlines)
    }
}

impl StringMatroid for PrefixForbidden {
    fn rank(&self) -> usize {
        self.rank
    }

    fn is_independent(&self, s: &[Action]) -> bool {
        s.len() <= self.rank && !self.forbidden.iter().any(|p| is_prefix(p, s))
    }
}

/// Arbitrary predicate with a rank; handy for planted instances.
pub struct FnMatroid<P> {
    pub rank: usize,
    pub predicate: P,
}

impl<P> StringMatroid for FnMatroid<P>
where
    P: Fn(&[Action]) -> bool + Send + Sync,
{
    fn rank(&self) -> usize {
        self.rank
    }

    fn is_independent(&self, s: &[Action]) -> bool {
        s.len() <= self.rank && (self.predicate)(s)
    }
}

/// JSON description of a built-in matroid. `rank` defaults to the horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatroidSpec {
    Uniform {
        #[serde(default)]
        rank: Option<usize>,
    },
    MaxRepeats {
        caps: Vec<usize>,
        #[serde(default)]
        rank: Option<usize>,
    },
    PrefixForbidden {
        forbidden: Vec<ActionString>,
        #[serde(default)]
        rank: Option<usize>,
    },
}

impl MatroidSpec {
    pub fn build(&self, num_actions: usize, horizon: usize) -> Result<Box<dyn StringMatroid>> {
        Ok(match self {
            MatroidSpec::Uniform { rank } => Box::new(Uniform { rank: rank.unwrap_or(horizon) }),
            MatroidSpec::MaxRepeats { caps, rank } => {
                if caps.len() != num_actions {
                    return Err(Error::invalid("max_repeats needs one cap per action"));
                }
                Box::new(MaxRepeats::new(caps.clone(), rank.unwrap_or(horizon))?)
            }
            MatroidSpec::PrefixForbidden { forbidden, rank } => {
                for s in forbidden {
                    s.validate(num_actions)?;
                }
                Box::new(PrefixForbidden::new(forbidden.clone(), rank.unwrap_or(horizon)))
            }
        })
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, MatroidSpec::Uniform { .. })
    }
}

/// Exhaustively checks the structure axioms over strings of length
/// `≤ rank + 1`: `∅ ∈ I`, hereditary (via single deletions, which is
/// equivalent by induction), augmentation by appension, some independent
/// string of length `rank` and none longer.
pub fn validate_axioms<M: StringMatroid + ?Sized>(m: &M, num_actions: usize, budget: u128) -> Result<ViolationReport> {
    let rank = m.rank();
    ensure_budget(count_strings(num_actions, 0, rank + 1), budget)?;
    let mut report = ViolationReport { max_len: rank + 1, ..Default::default() };

    let mut independent: Vec<ActionString> = Vec::new();
    for len in 0..=rank + 1 {
        for_each_string(num_actions, len, |s| {
            report.checked += 1;
            if m.is_independent(s) {
                if len > rank {
                    report.violations.push(Violation::RankExceeded { string: s.into() });
                } else {
                    independent.push(s.into());
                }
            }
            true
        });
    }

    if !m.is_independent(&[]) {
        report.violations.push(Violation::EmptyDependent);
    }
    if !independent.iter().any(|s| s.len() == rank) {
        report.violations.push(Violation::NoMaximalString { rank });
    }

    for s in &independent {
        for i in 0..s.len() {
            report.checked += 1;
            let mut sub = s.clone().into_vec();
            sub.remove(i);
            if !m.is_independent(&sub) {
                report.violations.push(Violation::Hereditary { string: s.clone(), subsequence: sub.into() });
            }
        }
    }

    // Augmentation only depends on the element set of N and its length, so keep
    // the longest independent representative per element set.
    let mut by_elements: BTreeMap<Vec<Action>, &ActionString> = BTreeMap::new();
    for s in &independent {
        let mut key = s.to_vec();
        key.sort_unstable();
        key.dedup();
        let slot = by_elements.entry(key).or_insert(s);
        if s.len() > slot.len() {
            *slot = s;
        }
    }
    let mut buf = Vec::with_capacity(rank + 1);
    for mstr in &independent {
        if mstr.len() >= rank {
            continue;
        }
        buf.clear();
        buf.extend_from_slice(mstr);
        let feasible: Vec<bool> = (0..num_actions)
            .map(|x| {
                buf.push(Action::new(x));
                let ok = m.is_independent(&buf);
                buf.pop();
                ok
            })
            .collect();
        for (elements, longer) in &by_elements {
            if longer.len() <= mstr.len() {
                continue;
            }
            report.checked += 1;
            if !elements.iter().any(|x| feasible[x.index()]) {
                report.violations.push(Violation::Augmentation { shorter: mstr.clone(), longer: (*longer).clone() });
            }
        }
    }
    Ok(report)
}

/// Greedy restricted to independent extensions, up to the rank. Sets
/// `stalled` when no feasible extension exists before reaching the rank.
pub fn constrained_greedy<F, M>(spec: &ProblemSpec<F>, m: &M) -> Result<GreedyTrace>
where
    F: Objective,
    M: StringMatroid + ?Sized,
{
    let f = &spec.objective;
    let mut current: Vec<Action> = Vec::with_capacity(m.rank() + 1);
    let mut values = vec![f.eval(&current)?];
    let mut stage_gains = Vec::new();
    let mut tie_sets = Vec::new();
    let mut stalled = false;
    for _ in 0..m.rank() {
        let base = *values.last().unwrap();
        let mut candidates = Vec::new();
        for a in spec.actions() {
            current.push(a);
            if m.is_independent(&current) {
                candidates.push((a, f.eval(&current)?));
            }
            current.pop();
        }
        let Some((a, value, ties)) = argmax_stage(candidates) else {
            stalled = true;
            break;
        };
        current.push(a);
        stage_gains.push(value - base);
        values.push(value);
        tie_sets.push(ties);
    }
    Ok(GreedyTrace { strategy: current.into(), stage_gains, values, tie_sets, stalled })
}

/// Exhaustive maximizer of `f` over the independent strings.
pub fn constrained_optimal<F, M>(spec: &ProblemSpec<F>, m: &M) -> Result<(ActionString, f64)>
where
    F: Objective,
    M: StringMatroid + ?Sized,
{
    let rank = m.rank();
    ensure_budget(count_strings(spec.num_actions, 0, rank), spec.budget)?;
    let f = &spec.objective;
    let mut best: Option<(ActionString, f64)> = None;
    let mut err = None;
    for len in 0..=rank {
        for_each_string(spec.num_actions, len, |s| {
            if !m.is_independent(s) {
                return true;
            }
            match f.eval(s) {
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
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    best.ok_or(Error::invalid("the empty string is not independent"))
}

/// A reordering `𝒫(N)` of an independent string `N` whose `i`-th element is
/// feasible after `G_{i−1}` and gains no more there than greedy did.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermutationCertificate {
    pub original: ActionString,
    pub permuted: ActionString,
    /// `f(G_{i−1} ⊕ (n̂_i)) − f(G_{i−1})` for each stage.
    pub candidate_gains: Vec<f64>,
    /// `f(G_i) − f(G_{i−1})` for each stage.
    pub greedy_gains: Vec<f64>,
    pub per_stage_checks: Vec<bool>,
}

impl PermutationCertificate {
    pub fn verified(&self) -> bool {
        self.permuted.is_permutation_of(&self.original) && self.per_stage_checks.iter().all(|&ok| ok)
    }
}

/// Builds `𝒫(N)` by backward induction: for `i = K, .., 1`, place at
/// position `i` a not-yet-placed element `x` of `N` with `G_{i−1} ⊕ (x) ∈ I`.
/// Among placeable elements the one with the largest gain wins, ties by
/// position in `N`.
pub fn build_theorem3_permutation<F, M>(
    f: &F,
    m: &M,
    greedy: &GreedyTrace,
    n: &[Action],
) -> Result<PermutationCertificate>
where
    F: Objective + ?Sized,
    M: StringMatroid + ?Sized,
{
    let k = greedy.len();
    if n.len() != k {
        return Err(Error::invalid(format!("N has length {} but the greedy strategy has length {k}", n.len())));
    }
    if !m.is_independent(n) {
        return Err(Error::invalid("N is not independent"));
    }
    let mut remaining: Vec<(usize, Action)> = n.iter().copied().enumerate().collect();
    let mut permuted = vec![Action(0); k];
    let mut candidate_gains = vec![0.0; k];
    let mut per_stage_checks = vec![false; k];
    for i in (1..=k).rev() {
        let g = greedy.prefix(i - 1);
        let base = greedy.values[i - 1];
        let mut buf = g.to_vec();
        let mut best: Option<(usize, f64)> = None;
        for (slot, &(_, x)) in remaining.iter().enumerate() {
            buf.push(x);
            if m.is_independent(&buf) {
                let gain = f.eval(&buf)? - base;
                if best.is_none_or(|(_, b)| gain > b) {
                    best = Some((slot, gain));
                }
            }
            buf.pop();
        }
        let (slot, gain) = best.ok_or(Error::ConstructionFailure { stage: i })?;
        let (_, x) = remaining.remove(slot);
        permuted[i - 1] = x;
        candidate_gains[i - 1] = gain;
        per_stage_checks[i - 1] = gain <= greedy.stage_gains[i - 1] + DEFAULT_TOL;
    }
    Ok(PermutationCertificate {
        original: n.into(),
        permuted: permuted.into(),
        candidate_gains,
        greedy_gains: greedy.stage_gains.clone(),
        per_stage_checks,
    })
}
