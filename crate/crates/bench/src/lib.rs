//! Shared fixtures for the benchmarks.

use strsub::tasks::{RandomTasks, StageShape, TaskModel};
use strsub::{ProblemSpec, RandomSubmodular, TableOracle};

/// Materialized random string-submodular table over `num_actions` actions,
/// defined up to `max_len`.
pub fn random_table(seed: u64, num_actions: usize, max_len: usize) -> TableOracle {
    TableOracle::materialize(&RandomSubmodular::new(seed, num_actions), num_actions, max_len)
        .expect("random oracle is defined at this depth")
}

/// A golden-window task instance with three actions.
pub fn golden_tasks(seed: u64, horizon: usize) -> TaskModel {
    let params = RandomTasks { horizon, lo: 0.39, hi: 0.61, shape: StageShape::Free, ..Default::default() };
    TaskModel::random(seed, &params).expect("valid parameters")
}

pub fn spec<F: strsub::Objective>(f: F, num_actions: usize, horizon: usize) -> ProblemSpec<F> {
    ProblemSpec::new(f, num_actions, horizon).expect("valid spec")
}
