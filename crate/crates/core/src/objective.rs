//! The objective-oracle contract and the generic wrappers built on it.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::error::Result;
use crate::string::Action;

/// A deterministic real-valued function on action strings.
///
/// Implementations must be pure: the same string always yields the same
/// value. Drivers that enumerate heavily should wrap an oracle in
/// [`Memoized`].
pub trait Objective: Send + Sync {
    fn eval(&self, s: &[Action]) -> Result<f64>;

    /// Longest string the oracle is defined on, if bounded.
    fn max_len(&self) -> Option<usize> {
        None
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn eval(&self, s: &[Action]) -> Result<f64> {
        (**self).eval(s)
    }

    fn max_len(&self) -> Option<usize> {
        (**self).max_len()
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn eval(&self, s: &[Action]) -> Result<f64> {
        (**self).eval(s)
    }

    fn max_len(&self) -> Option<usize> {
        (**self).max_len()
    }
}

/// Adapts a closure into an oracle.
pub struct FnOracle<F>(pub F);

impl<F> Objective for FnOracle<F>
where
    F: Fn(&[Action]) -> f64 + Send + Sync,
{
    fn eval(&self, s: &[Action]) -> Result<f64> {
        Ok((self.0)(s))
    }
}

pub fn from_fn<F>(f: F) -> FnOracle<F>
where
    F: Fn(&[Action]) -> f64 + Send + Sync,
{
    FnOracle(f)
}

/// `f − f(∅)`.
pub struct Normalized<F> {
    inner: F,
    offset: f64,
}

impl<F: Objective> Normalized<F> {
    pub fn inner(&self) -> &F {
        &self.inner
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

impl<F: Objective> Objective for Normalized<F> {
    fn eval(&self, s: &[Action]) -> Result<f64> {
        if s.is_empty() {
            return Ok(0.0);
        }
        Ok(self.inner.eval(s)? - self.offset)
    }

    fn max_len(&self) -> Option<usize> {
        self.inner.max_len()
    }
}

/// Returns the marginalized oracle `g(M) = f(M) − f(∅)`.
pub fn normalize<F: Objective>(f: F) -> Result<Normalized<F>> {
    let offset = f.eval(&[])?;
    Ok(Normalized { inner: f, offset })
}

/// Caches oracle values keyed on the string.
///
/// Concurrent inserts of the same key are harmless since values are identical
/// by purity. Errors are not cached.
pub struct Memoized<F> {
    inner: F,
    cache: RwLock<HashMap<Box<[Action]>, f64>>,
}

impl<F: Objective> Memoized<F> {
    pub fn new(inner: F) -> Self {
        Memoized { inner, cache: RwLock::new(HashMap::new()) }
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }

    pub fn cached_len(&self) -> usize {
        self.cache.read().map(|c| c.len()).unwrap_or(0)
    }
}

impl<F: Objective> Objective for Memoized<F> {
    fn eval(&self, s: &[Action]) -> Result<f64> {
        if let Some(v) = self.cache.read().ok().and_then(|c| c.get(s).copied()) {
            return Ok(v);
        }
        let v = self.inner.eval(s)?;
        if let Ok(mut c) = self.cache.write() {
            c.insert(s.into(), v);
        }
        Ok(v)
    }

    fn max_len(&self) -> Option<usize> {
        self.inner.max_len()
    }
}

/// `f(M) = Σ w(m_i)`; the canonical zero-curvature oracle.
pub struct StringLinear {
    pub weights: Vec<f64>,
}

impl StringLinear {
    pub fn new(weights: Vec<f64>) -> Self {
        StringLinear { weights }
    }
}

impl Objective for StringLinear {
    fn eval(&self, s: &[Action]) -> Result<f64> {
        s.iter()
            .map(|a| {
                self.weights
                    .get(a.index())
                    .copied()
                    .ok_or(crate::Error::InvalidAction { id: a.index(), num_actions: self.weights.len() })
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::string::ActionString;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn s(ids: &[usize]) -> ActionString {
        ActionString::from_ids(ids.iter().copied())
    }

    #[test]
    fn normalize_constant_is_zero() {
        let g = normalize(from_fn(|_| 7.0)).unwrap();
        for x in [s(&[]), s(&[0]), s(&[1, 2, 0])] {
            assert_eq!(g.eval(&x).unwrap(), 0.0);
        }
    }

    #[test]
    fn normalize_is_identity_when_already_zero() {
        let f = StringLinear::new(vec![1.0, 2.5]);
        let g = normalize(StringLinear::new(vec![1.0, 2.5])).unwrap();
        for x in [s(&[]), s(&[1]), s(&[1, 0, 1])] {
            assert_eq!(g.eval(&x).unwrap(), f.eval(&x).unwrap());
        }
    }

    #[test]
    fn normalize_shifts_by_empty_value() {
        let g = normalize(from_fn(|m| m.len() as f64 + 3.0)).unwrap();
        assert_eq!(g.offset(), 3.0);
        assert_eq!(g.eval(&s(&[0, 0, 1])).unwrap(), 3.0);
        assert_eq!(g.eval(&s(&[])).unwrap(), 0.0);
    }

    #[test]
    fn memoized_evaluates_once() {
        let calls = AtomicUsize::new(0);
        let f = from_fn(|m| {
            calls.fetch_add(1, Ordering::Relaxed);
            m.len() as f64
        });
        let memo = Memoized::new(&f);
        for _ in 0..3 {
            assert_eq!(memo.eval(&s(&[1, 2])).unwrap(), 2.0);
        }
        assert_eq!(calls.load(Ordering::Relaxed), 1);
        assert_eq!(memo.cached_len(), 1);
    }

    #[test]
    fn string_linear_rejects_unknown_action() {
        let f = StringLinear::new(vec![1.0]);
        assert!(f.eval(&s(&[1])).is_err());
    }
}
