//! Exhaustive monotonicity and diminishing-return checkers.
//!
//! Each checker enumerates every string up to a depth and lists every
//! violation found; an empty report means none exists up to that depth.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::objective::Objective;
use crate::string::{count_strings, ensure_budget, for_each_string, Action, ActionString};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `f(M ⊕ (a)) < f(M)`
    ForwardMonotone { base: ActionString, action: Action, before: f64, after: f64 },
    /// `f((a) ⊕ M) < f(M)`
    BackwardMonotone { base: ActionString, action: Action, before: f64, after: f64 },
    /// `M ⪯ N` yet `f(M ⊕ (a)) − f(M) < f(N ⊕ (a)) − f(N)`
    DiminishingReturn {
        shorter: ActionString,
        longer: ActionString,
        action: Action,
        gain_shorter: f64,
        gain_longer: f64,
    },
    /// An independent string with a dependent subsequence.
    Hereditary { string: ActionString, subsequence: ActionString },
    /// `|M| < |N|`, both independent, and no element of `N` extends `M`.
    Augmentation { shorter: ActionString, longer: ActionString },
    /// No independent string of length equal to the rank.
    NoMaximalString { rank: usize },
    /// An independent string longer than the rank.
    RankExceeded { string: ActionString },
    /// The empty string is not independent.
    EmptyDependent,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    /// Deepest string length the check enumerated.
    pub max_len: usize,
    /// Number of inequalities tested.
    pub checked: u64,
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }
}

/// Visits every string of length `< max_len` together with its value and the
/// values of all its one-action extensions.
fn walk_extensions<F, V>(f: &F, num_actions: usize, max_len: usize, mut visit: V) -> Result<()>
where
    F: Objective + ?Sized,
    V: FnMut(&[Action], f64, &[f64]),
{
    let mut err = None;
    for len in 0..max_len {
        for_each_string(num_actions, len, |m| {
            let step = (|| -> Result<()> {
                let base = f.eval(m)?;
                let mut buf = Vec::with_capacity(len + 1);
                buf.extend_from_slice(m);
                let mut ext = Vec::with_capacity(num_actions);
                for a in 0..num_actions {
                    buf.push(Action::new(a));
                    ext.push(f.eval(&buf)?);
                    buf.pop();
                }
                visit(m, base, &ext);
                Ok(())
            })();
            match step {
                Ok(()) => true,
                Err(e) => {
                    err = Some(e);
                    false
                }
            }
        });
        if let Some(e) = err.take() {
            return Err(e);
        }
    }
    Ok(())
}

/// Lists every `(M, a)` with `|M| < max_len` and `f(M ⊕ (a)) < f(M) − tol`.
pub fn check_forward_monotone<F: Objective + ?Sized>(
    f: &F,
    num_actions: usize,
    max_len: usize,
    tol: f64,
    budget: u128,
) -> Result<ViolationReport> {
    ensure_budget(count_strings(num_actions, 0, max_len), budget)?;
    let mut report = ViolationReport { max_len, ..Default::default() };
    walk_extensions(f, num_actions, max_len, |m, base, ext| {
        for (a, &after) in ext.iter().enumerate() {
            report.checked += 1;
            if after < base - tol {
                report.violations.push(Violation::ForwardMonotone {
                    base: m.into(),
                    action: Action::new(a),
                    before: base,
                    after,
                });
            }
        }
    })?;
    Ok(report)
}

/// Lists every `(M, a)` with `|M| < max_len` and `f((a) ⊕ M) < f(M) − tol`.
pub fn check_backward_monotone<F: Objective + ?Sized>(
    f: &F,
    num_actions: usize,
    max_len: usize,
    tol: f64,
    budget: u128,
) -> Result<ViolationReport> {
    ensure_budget(count_strings(num_actions, 0, max_len), budget)?;
    let mut report = ViolationReport { max_len, ..Default::default() };
    let mut err = None;
    for len in 0..max_len {
        for_each_string(num_actions, len, |m| {
            let step = (|| -> Result<()> {
                let before = f.eval(m)?;
                let mut buf = Vec::with_capacity(len + 1);
                for a in 0..num_actions {
                    buf.clear();
                    buf.push(Action::new(a));
                    buf.extend_from_slice(m);
                    let after = f.eval(&buf)?;
                    report.checked += 1;
                    if after < before - tol {
                        report.violations.push(Violation::BackwardMonotone {
                            base: m.into(),
                            action: Action::new(a),
                            before,
                            after,
                        });
                    }
                }
                Ok(())
            })();
            if let Err(e) = step {
                err = Some(e);
                return false;
            }
            true
        });
        if let Some(e) = err.take() {
            return Err(e);
        }
    }
    Ok(report)
}

/// Lists every `(M, N, a)` with `M ⪯ N`, `|N| < max_len` and
/// `f(M ⊕ (a)) − f(M) < f(N ⊕ (a)) − f(N) − tol`.
///
/// Strict prefixes only; `M = N` is trivially fine.
pub fn check_diminishing_return<F: Objective + ?Sized>(
    f: &F,
    num_actions: usize,
    max_len: usize,
    tol: f64,
    budget: u128,
) -> Result<ViolationReport> {
    ensure_budget(count_strings(num_actions, 0, max_len), budget)?;
    let mut report = ViolationReport { max_len, ..Default::default() };
    // gains of every proper prefix of the current node, shortest first
    let mut stack: Vec<(Vec<Action>, Vec<f64>)> = Vec::new();
    let mut err = None;
    dfs(num_actions, max_len, &mut Vec::new(), &mut |node: &[Action]| -> bool {
        let step = (|| -> Result<()> {
            while stack.len() > node.len() {
                stack.pop();
            }
            let base = f.eval(node)?;
            let mut buf = node.to_vec();
            let mut gains = Vec::with_capacity(num_actions);
            for a in 0..num_actions {
                buf.push(Action::new(a));
                gains.push(f.eval(&buf)? - base);
                buf.pop();
            }
            for (prefix, prefix_gains) in &stack {
                for a in 0..num_actions {
                    report.checked += 1;
                    if prefix_gains[a] < gains[a] - tol {
                        report.violations.push(Violation::DiminishingReturn {
                            shorter: prefix.as_slice().into(),
                            longer: node.into(),
                            action: Action::new(a),
                            gain_shorter: prefix_gains[a],
                            gain_longer: gains[a],
                        });
                    }
                }
            }
            stack.push((node.to_vec(), gains));
            Ok(())
        })();
        match step {
            Ok(()) => true,
            Err(e) => {
                err = Some(e);
                false
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

/// Preorder DFS over strings of length `< max_len`; stops when `visit` returns false.
fn dfs(num_actions: usize, max_len: usize, path: &mut Vec<Action>, visit: &mut dyn FnMut(&[Action]) -> bool) -> bool {
    if path.len() >= max_len {
        return true;
    }
    if !visit(path) {
        return false;
    }
    for a in 0..num_actions {
        path.push(Action::new(a));
        let go_on = dfs(num_actions, max_len, path, visit);
        path.pop();
        if !go_on {
            return false;
        }
    }
    true
}

/// Subadditivity probe: lists strings with
/// `f(N) > Σ f((n_i)) + tol`, `|N| ≤ max_len`.
pub fn check_singleton_subadditive<F: Objective + ?Sized>(
    f: &F,
    num_actions: usize,
    max_len: usize,
    tol: f64,
    budget: u128,
) -> Result<Vec<ActionString>> {
    ensure_budget(count_strings(num_actions, 0, max_len), budget)?;
    let singles = (0..num_actions).map(|a| f.eval(&[Action::new(a)])).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    let mut err = None;
    for len in 0..=max_len {
        for_each_string(num_actions, len, |n| match f.eval(n) {
            Ok(v) => {
                let bound: f64 = n.iter().map(|a| singles[a.index()]).sum();
                if v > bound + tol {
                    out.push(n.into());
                }
                true
            }
            Err(e) => {
                err = Some(e);
                false
            }
        });
        if let Some(e) = err.take() {
            return Err(e);
        }
    }
    Ok(out)
}
