//! Actions, action strings and the three string relations used throughout the
//! crate: concatenation `⊕`, prefix `⪯` and subsequence `≺`.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Index of an action in the action set `{0, .., num_actions - 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Action(pub u32);

impl Action {
    pub fn new(id: usize) -> Self {
        Action(id as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn check(self, num_actions: usize) -> Result<Self> {
        if self.index() < num_actions {
            Ok(self)
        } else {
            Err(Error::InvalidAction { id: self.index(), num_actions })
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An ordered, possibly empty sequence of actions. Repeats are allowed.
///
/// Displays and serializes as comma-joined ids; the empty string is `""`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionString(Vec<Action>);

impl ActionString {
    pub fn empty() -> Self {
        ActionString(Vec::new())
    }

    pub fn from_ids<I>(ids: I) -> Self
    where
        I: IntoIterator<Item = usize>,
    {
        ActionString(ids.into_iter().map(Action::new).collect())
    }

    pub fn single(a: Action) -> Self {
        ActionString(vec![a])
    }

    pub fn as_slice(&self) -> &[Action] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Action> {
        self.0
    }

    pub fn push(&mut self, a: Action) {
        self.0.push(a);
    }

    /// `self ⊕ (a)`
    pub fn appended(&self, a: Action) -> Self {
        let mut v = Vec::with_capacity(self.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(a);
        ActionString(v)
    }

    /// `(a) ⊕ self`
    pub fn prepended(&self, a: Action) -> Self {
        let mut v = Vec::with_capacity(self.len() + 1);
        v.push(a);
        v.extend_from_slice(&self.0);
        ActionString(v)
    }

    /// Multiset equality: `other` is a reordering of `self`.
    pub fn is_permutation_of(&self, other: &ActionString) -> bool {
        let mut a = self.0.clone();
        let mut b = other.0.clone();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    pub fn validate(&self, num_actions: usize) -> Result<()> {
        self.0.iter().try_for_each(|a| a.check(num_actions).map(|_| ()))
    }
}

impl Deref for ActionString {
    type Target = [Action];

    fn deref(&self) -> &[Action] {
        &self.0
    }
}

impl From<Vec<Action>> for ActionString {
    fn from(v: Vec<Action>) -> Self {
        ActionString(v)
    }
}

impl From<&[Action]> for ActionString {
    fn from(v: &[Action]) -> Self {
        ActionString(v.to_vec())
    }
}

impl FromIterator<Action> for ActionString {
    fn from_iter<I: IntoIterator<Item = Action>>(iter: I) -> Self {
        ActionString(iter.into_iter().collect())
    }
}

impl fmt::Display for ActionString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, &self.0)
    }
}

pub(crate) fn write_joined(f: &mut impl fmt::Write, s: &[Action]) -> fmt::Result {
    for (i, a) in s.iter().enumerate() {
        if i > 0 {
            f.write_char(',')?;
        }
        write!(f, "{}", a.0)?;
    }
    Ok(())
}

/// Comma-joined rendering of a raw action slice.
pub fn key_of(s: &[Action]) -> String {
    let mut out = String::new();
    write_joined(&mut out, s).expect("writing to a String cannot fail");
    out
}

impl FromStr for ActionString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(ActionString::empty());
        }
        s.split(',').map(|tok| tok.trim().parse::<u32>().map(Action).map_err(|_| Error::Parse(s.to_string()))).collect()
    }
}

impl Serialize for ActionString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ActionString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `m ⊕ n`
pub fn concat(m: &[Action], n: &[Action]) -> ActionString {
    let mut v = Vec::with_capacity(m.len() + n.len());
    v.extend_from_slice(m);
    v.extend_from_slice(n);
    ActionString(v)
}

/// `m ⪯ n`: there is some `l` with `n = m ⊕ l`.
pub fn is_prefix(m: &[Action], n: &[Action]) -> bool {
    n.starts_with(m)
}

/// `m ≺ n` (non-strict): `m` is obtained by deleting zero or more elements of
/// `n` while preserving order.
pub fn is_subsequence(m: &[Action], n: &[Action]) -> bool {
    let mut it = n.iter();
    m.iter().all(|x| it.any(|y| y == x))
}

/// Number of strings over `num_actions` symbols with length in `min_len..=max_len`.
/// Saturates at `u128::MAX`.
pub fn count_strings(num_actions: usize, min_len: usize, max_len: usize) -> u128 {
    let n = num_actions as u128;
    let mut total: u128 = 0;
    let mut power: u128 = 1;
    for len in 0..=max_len {
        if len >= min_len {
            total = total.saturating_add(power);
        }
        power = power.saturating_mul(n);
    }
    total
}

/// Visits every string of exactly `len` actions in lexicographic order.
///
/// The callback may stop the walk early by returning `false`.
pub fn for_each_string<F>(num_actions: usize, len: usize, mut visit: F)
where
    F: FnMut(&[Action]) -> bool,
{
    if num_actions == 0 && len > 0 {
        return;
    }
    let mut buf = vec![Action(0); len];
    loop {
        if !visit(&buf) {
            return;
        }
        // odometer increment, last position fastest
        let mut pos = len;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if buf[pos].index() + 1 < num_actions {
                buf[pos].0 += 1;
                break;
            }
            buf[pos] = Action(0);
        }
    }
}

/// Like [`for_each_string`] over every length in `min_len..=max_len`, shortest first.
pub fn for_each_string_upto<F>(num_actions: usize, min_len: usize, max_len: usize, mut visit: F)
where
    F: FnMut(&[Action]) -> bool,
{
    for len in min_len..=max_len {
        let mut keep_going = true;
        for_each_string(num_actions, len, |s| {
            keep_going = visit(s);
            keep_going
        });
        if !keep_going {
            return;
        }
    }
}

/// Errors with [`Error::BudgetExceeded`] when `required > limit`.
pub fn ensure_budget(required: u128, limit: u128) -> Result<()> {
    if required > limit {
        Err(Error::BudgetExceeded { required, limit })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(ids: &[usize]) -> ActionString {
        ActionString::from_ids(ids.iter().copied())
    }

    #[test]
    fn concat_examples() {
        assert_eq!(concat(&s(&[1, 2]), &s(&[3])), s(&[1, 2, 3]));
        assert_eq!(concat(&s(&[]), &s(&[5])), s(&[5]));
        assert_eq!(concat(&s(&[1]), &s(&[])), s(&[1]));
    }

    #[test]
    fn prefix_examples() {
        assert!(is_prefix(&s(&[1, 2]), &s(&[1, 2, 3])));
        assert!(!is_prefix(&s(&[2, 1]), &s(&[1, 2, 3])));
        assert!(is_prefix(&s(&[]), &s(&[4, 4])));
        assert!(is_prefix(&s(&[]), &s(&[])));
    }

    #[test]
    fn subsequence_examples() {
        assert!(is_subsequence(&s(&[1, 3]), &s(&[1, 2, 3])));
        assert!(!is_subsequence(&s(&[3, 1]), &s(&[1, 2, 3])));
        assert!(is_subsequence(&s(&[1, 2, 3]), &s(&[1, 2, 3])));
        assert!(!is_subsequence(&s(&[1, 1]), &s(&[1, 2, 3])));
        assert!(is_subsequence(&s(&[]), &s(&[])));
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(s(&[1, 2, 3]).to_string(), "1,2,3");
        assert_eq!(s(&[]).to_string(), "");
        assert_eq!("1, 2,3".parse::<ActionString>().unwrap(), s(&[1, 2, 3]));
        assert_eq!("".parse::<ActionString>().unwrap(), s(&[]));
        assert!("1,x".parse::<ActionString>().is_err());
        let json = serde_json::to_string(&s(&[0, 2])).unwrap();
        assert_eq!(json, "\"0,2\"");
    }

    #[test]
    fn enumeration_counts() {
        let mut seen = Vec::new();
        for_each_string_upto(2, 0, 2, |x| {
            seen.push(ActionString::from(x));
            true
        });
        assert_eq!(seen.len() as u128, count_strings(2, 0, 2));
        assert_eq!(seen[0], s(&[]));
        assert_eq!(seen[1], s(&[0]));
        assert_eq!(seen[3], s(&[0, 0]));
        assert_eq!(seen[6], s(&[1, 1]));
        assert_eq!(count_strings(3, 4, 4), 81);
        assert_eq!(count_strings(3, 1, 2), 12);
    }

    #[test]
    fn enumeration_stops_early() {
        let mut n = 0;
        for_each_string_upto(3, 0, 3, |_| {
            n += 1;
            n < 5
        });
        assert_eq!(n, 5);
    }
}
