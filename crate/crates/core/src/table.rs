//! Table oracles loaded from JSON, and the seeded generator of random string
//! submodular oracles used by the soundness sweeps.

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::string::{for_each_string_upto, key_of, Action, ActionString};

/// Explicit value table with a default for missing strings.
///
/// JSON form: `{"num_actions": 3, "values": {"": 0, "0,1": 1.5}, "default": 0}`.
#[derive(Clone, Debug)]
pub struct TableOracle {
    num_actions: usize,
    values: HashMap<Box<[Action]>, f64>,
    default: f64,
}

#[derive(Serialize, Deserialize)]
struct TableDoc {
    num_actions: usize,
    values: BTreeMap<String, f64>,
    #[serde(default)]
    default: f64,
}

impl TableOracle {
    pub fn new(num_actions: usize, default: f64) -> Self {
        TableOracle { num_actions, values: HashMap::new(), default }
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn default_value(&self) -> f64 {
        self.default
    }

    pub fn insert(&mut self, s: &[Action], value: f64) -> Result<()> {
        for a in s {
            a.check(self.num_actions)?;
        }
        self.values.insert(s.into(), value);
        Ok(())
    }

    /// Builder form of [`insert`](Self::insert) taking raw ids.
    pub fn with(mut self, ids: &[usize], value: f64) -> Self {
        let s = ActionString::from_ids(ids.iter().copied());
        self.insert(&s, value).expect("action id out of range");
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let doc: TableDoc = serde_json::from_value(value)?;
        Self::from_doc(doc)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TableDoc = serde_json::from_str(text)?;
        Self::from_doc(doc)
    }

    fn from_doc(doc: TableDoc) -> Result<Self> {
        if doc.num_actions == 0 {
            return Err(Error::invalid("num_actions must be at least 1"));
        }
        let mut table = TableOracle::new(doc.num_actions, doc.default);
        for (key, v) in doc.values {
            let s: ActionString = key.parse()?;
            if !v.is_finite() {
                return Err(Error::invalid(format!("non-finite value for {key:?}")));
            }
            table.insert(&s, v)?;
        }
        Ok(table)
    }

    pub fn to_json(&self) -> String {
        let doc = TableDoc {
            num_actions: self.num_actions,
            values: self.values.iter().map(|(k, v)| (key_of(k), *v)).collect(),
            default: self.default,
        };
        serde_json::to_string_pretty(&doc).expect("table serializes")
    }

    /// Snapshots `f` on every string of length `≤ max_len`.
    pub fn materialize<F: Objective + ?Sized>(f: &F, num_actions: usize, max_len: usize) -> Result<Self> {
        let mut table = TableOracle::new(num_actions, 0.0);
        let mut err = None;
        for_each_string_upto(num_actions, 0, max_len, |s| match f.eval(s) {
            Ok(v) => {
                table.values.insert(s.into(), v);
                true
            }
            Err(e) => {
                err = Some(e);
                false
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(table),
        }
    }
}

impl Objective for TableOracle {
    fn eval(&self, s: &[Action]) -> Result<f64> {
        for a in s {
            a.check(self.num_actions)?;
        }
        Ok(self.values.get(s).copied().unwrap_or(self.default))
    }
}

type GainCache = HashMap<Box<[Action]>, Box<[f64]>>;

/// Lazily defined random string-submodular oracle.
///
/// Each string `M` carries a stagewise gain vector `g(· | M)` with
/// `f(M ⊕ (a)) = f(M) + g(a | M)`. Extending `M` by `b` multiplies every gain by
/// a factor in `(0, 1]` drawn from an RNG keyed on `(seed, M ⊕ (b))`, so gains
/// never increase along a prefix chain. The result is forward monotone with the
/// diminishing-return property on all of `𝔸*`, and order-dependent.
pub struct RandomSubmodular {
    seed: u64,
    num_actions: usize,
    gains: RwLock<GainCache>,
}

const MIN_ROOT_GAIN: f64 = 0.05;
const MIN_DECAY: f64 = 0.2;

impl RandomSubmodular {
    /// `num_actions` must be at most 256 and strings are keyed up to length 30.
    pub fn new(seed: u64, num_actions: usize) -> Self {
        assert!((1..=256).contains(&num_actions), "num_actions must be in 1..=256");
        RandomSubmodular { seed, num_actions, gains: RwLock::new(HashMap::new()) }
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn node_rng(&self, s: &[Action]) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8] = s.len() as u8;
        // one byte per action; the length byte disambiguates trailing zeros
        for (slot, a) in key[9..].iter_mut().zip(s) {
            *slot = a.0 as u8;
        }
        ChaCha8Rng::from_seed(key)
    }

    fn fresh_gains(&self, s: &[Action], parent: Option<&[f64]>) -> Box<[f64]> {
        let mut rng = self.node_rng(s);
        match parent {
            None => (0..self.num_actions).map(|_| rng.gen_range(MIN_ROOT_GAIN..1.0)).collect(),
            Some(p) => p
                .iter()
                .map(|g| {
                    let decay = if rng.gen_bool(0.15) { 1.0 } else { rng.gen_range(MIN_DECAY..1.0) };
                    g * decay
                })
                .collect(),
        }
    }

    /// Gain vector `g(· | s)`.
    pub fn gains(&self, s: &[Action]) -> Box<[f64]> {
        if let Some(g) = self.gains.read().ok().and_then(|m| m.get(s).cloned()) {
            return g;
        }
        let g = if s.is_empty() {
            self.fresh_gains(s, None)
        } else {
            let parent = self.gains(&s[..s.len() - 1]);
            self.fresh_gains(s, Some(&parent))
        };
        if let Ok(mut m) = self.gains.write() {
            m.insert(s.into(), g.clone());
        }
        g
    }
}

impl Objective for RandomSubmodular {
    fn eval(&self, s: &[Action]) -> Result<f64> {
        if s.len() > 23 {
            return Err(Error::DepthExceeded { len: s.len(), max: 23 });
        }
        let mut total = 0.0;
        for (i, a) in s.iter().enumerate() {
            a.check(self.num_actions)?;
            total += self.gains(&s[..i])[a.index()];
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::string::for_each_string;

    fn s(ids: &[usize]) -> ActionString {
        ActionString::from_ids(ids.iter().copied())
    }

    #[test]
    fn table_json_roundtrip_and_default() {
        let text = r#"{"num_actions": 3, "values": {"": 0, "1,2": 2.5, "0": 1}, "default": -1}"#;
        let t = TableOracle::from_json(text).unwrap();
        assert_eq!(t.eval(&s(&[])).unwrap(), 0.0);
        assert_eq!(t.eval(&s(&[1, 2])).unwrap(), 2.5);
        assert_eq!(t.eval(&s(&[2])).unwrap(), -1.0);
        let back = TableOracle::from_json(&t.to_json()).unwrap();
        assert_eq!(back.eval(&s(&[0])).unwrap(), 1.0);
        assert_eq!(back.len(), 3);
    }

    #[test]
    fn table_rejects_out_of_range_keys() {
        let text = r#"{"num_actions": 2, "values": {"2": 1}}"#;
        assert!(TableOracle::from_json(text).is_err());
        let t = TableOracle::new(2, 0.0);
        assert!(t.eval(&s(&[5])).is_err());
    }

    #[test]
    fn random_oracle_is_deterministic_per_seed() {
        let a = RandomSubmodular::new(7, 3);
        let b = RandomSubmodular::new(7, 3);
        let c = RandomSubmodular::new(8, 3);
        let x = s(&[2, 0, 1, 1]);
        assert_eq!(a.eval(&x).unwrap(), b.eval(&x).unwrap());
        assert_ne!(a.eval(&x).unwrap(), c.eval(&x).unwrap());
    }

    #[test]
    fn random_oracle_gains_shrink_along_prefixes() {
        let f = RandomSubmodular::new(3, 3);
        for_each_string(3, 3, |m| {
            let g = f.gains(m);
            let parent = f.gains(&m[..2]);
            assert!(g.iter().zip(parent.iter()).all(|(x, y)| x <= y && *x > 0.0));
            true
        });
    }

    #[test]
    fn materialize_matches_source() {
        let f = RandomSubmodular::new(11, 2);
        let t = TableOracle::materialize(&f, 2, 3).unwrap();
        assert_eq!(t.len(), 15);
        let x = s(&[1, 0, 1]);
        assert_eq!(t.eval(&x).unwrap(), f.eval(&x).unwrap());
    }
}
