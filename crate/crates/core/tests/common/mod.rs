#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strsub::{Action, Objective, TableOracle};

/// Every string of length `len` over `n` actions, by plain recursion.
pub fn all_strings(n: usize, len: usize) -> Vec<Vec<Action>> {
    if len == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for head in all_strings(n, len - 1) {
        for a in 0..n {
            let mut s = head.clone();
            s.push(Action::new(a));
            out.push(s);
        }
    }
    out
}

pub fn strings_between(n: usize, min: usize, max: usize) -> Vec<Vec<Action>> {
    (min..=max).flat_map(|len| all_strings(n, len)).collect()
}

pub fn cat(m: &[Action], n: &[Action]) -> Vec<Action> {
    m.iter().chain(n).copied().collect()
}

pub fn ev<F: Objective + ?Sized>(f: &F, s: &[Action]) -> f64 {
    f.eval(s).unwrap()
}

/// Table with `f(∅) = 0` and strictly positive but otherwise arbitrary
/// stagewise gains: forward monotone, usually not submodular.
pub fn random_increasing_table(seed: u64, n: usize, depth: usize) -> TableOracle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = TableOracle::new(n, 0.0);
    let mut frontier = vec![(Vec::<Action>::new(), 0.0)];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (s, v) in frontier {
            for a in 0..n {
                let mut e = s.clone();
                e.push(Action::new(a));
                let value = v + rng.gen_range(0.05..1.0);
                t.insert(&e, value).unwrap();
                next.push((e, value));
            }
        }
        frontier = next;
    }
    t
}

/// Table with arbitrary values in `[lo, hi)` and `f(∅) = 0`.
pub fn random_table(seed: u64, n: usize, depth: usize, lo: f64, hi: f64) -> TableOracle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = TableOracle::new(n, 0.0);
    for s in strings_between(n, 1, depth) {
        t.insert(&s, rng.gen_range(lo..hi)).unwrap();
    }
    t
}

/// Weighted coverage: action `a` covers `sets[a]`; the value of a string is
/// the total weight of the covered universe.
pub struct Coverage {
    pub sets: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
}

impl Coverage {
    pub fn value_of_set(&self, chosen: u32) -> f64 {
        let mut covered = vec![false; self.weights.len()];
        for (a, set) in self.sets.iter().enumerate() {
            if chosen & (1 << a) != 0 {
                for &u in set {
                    covered[u] = true;
                }
            }
        }
        covered.iter().zip(&self.weights).filter(|(c, _)| **c).map(|(_, w)| w).sum()
    }
}

impl Objective for Coverage {
    fn eval(&self, s: &[Action]) -> strsub::Result<f64> {
        Ok(self.value_of_set(s.iter().fold(0, |m, a| m | (1 << a.0))))
    }
}
